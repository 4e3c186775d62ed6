"""Deterministic, splittable random streams for reproducible Monte-Carlo runs.

Every source of randomness in this package is an :class:`RngStream`: a pair
of 64-bit words ``(seed, stream_id)`` used as the key of a counter-based
Philox bit generator.  Streams are plain values, not mutable generator
objects, so they can be handed to parallel workers freely:

* the same ``(seed, stream_id)`` always reproduces the same draws,
* distinct ``stream_id`` values give statistically independent streams,
* substreams are derived by hashing, never by advancing shared state.

Consumption state lives only in the short-lived ``numpy`` generators
returned by :meth:`RngStream.generator`.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

_U64_MAX = 0xFFFFFFFFFFFFFFFF


def _hash64(blob: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")


def float_key(x: float) -> int:
    """Map a float to its IEEE-754 bit pattern, suitable for stream derivation.

    Collapses ``-0.0`` to ``0.0`` so that equal parameters derive equal streams.
    """
    x = float(x)
    if x == 0.0:
        x = 0.0
    return struct.unpack("<Q", struct.pack("<d", x))[0]


@dataclass(frozen=True)
class RngStream:
    """Value-type handle on one deterministic random stream.

    ``seed`` is the experiment-level seed; ``stream_id`` selects one of 2^64
    independent substreams under that seed.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, int) or not (0 <= v <= _U64_MAX):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def child(self, label: str, *indices: int) -> "RngStream":
        """Derive an independent substream keyed on ``label`` and ``indices``.

        Derivation is a pure function of ``(stream_id, label, indices)``; the
        seed is untouched so all substreams of an experiment share it.
        """
        blob = self.stream_id.to_bytes(8, "little") + label.encode("utf-8")
        for ix in indices:
            blob += int(ix).to_bytes(8, "little", signed=False)
        return RngStream(self.seed, _hash64(blob))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the origin of this stream.

        Each call restarts at counter zero: drawing ``n`` values twice yields
        the same values twice.  Callers that need successive fresh draws keep
        the returned generator alive and let it advance.
        """
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def permutation_from_uniforms(u: np.ndarray) -> np.ndarray:
    """Uniform random permutation(s) obtained by ranking i.i.d. uniforms.

    ``u`` has shape ``(..., k)``; the result holds, per row, the arm order
    ``argsort(u)``.  Ranking exchangeable draws makes every ordering equally
    likely, and the construction vectorizes over leading axes, so batched and
    one-at-a-time sampling consume the underlying stream identically.
    """
    return np.argsort(u, axis=-1)


def draw_permutation(gen: np.random.Generator, k: int) -> np.ndarray:
    """Draw one uniform permutation of ``range(k)``, consuming ``k`` uniforms."""
    return permutation_from_uniforms(gen.random(k))
