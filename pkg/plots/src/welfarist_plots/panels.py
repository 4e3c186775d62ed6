"""Regret-vs-horizon panels from sweep CSV files.

This package talks to the simulation harness only through its CSV schema::

    policy,p,horizon,regret,runs,std_error,tau_mean,degenerate_runs

Each panel is a line chart, one curve per (policy, p) series, with a
``std_error`` band and a log-scaled horizon axis (the benchmark horizons
span decades).  Rendering never alters or reorders the data: curves are
drawn in file order, and a dry-run mode prints the exact (x, y, err)
triples that would be plotted so the output can be diffed against the CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

EXPECTED_HEADER = (
    "policy", "p", "horizon", "regret", "runs", "std_error", "tau_mean", "degenerate_runs",
)

PANEL_IDS = ("a", "b", "c", "d", "e", "f")


class SchemaMismatch(ValueError):
    """The CSV header does not match the sweep schema; carries the diff."""

    def __init__(self, found: list[str]) -> None:
        missing = [c for c in EXPECTED_HEADER if c not in found]
        unexpected = [c for c in found if c not in EXPECTED_HEADER]
        parts = [f"expected columns {','.join(EXPECTED_HEADER)}"]
        if missing:
            parts.append(f"missing: {','.join(missing)}")
        if unexpected:
            parts.append(f"unexpected: {','.join(unexpected)}")
        if not missing and not unexpected:
            parts.append(f"wrong order: {','.join(found)}")
        super().__init__("; ".join(parts))
        self.missing = missing
        self.unexpected = unexpected


@dataclass(frozen=True)
class SeriesKey:
    """One curve: a policy label and a fairness order, as they appear in the CSV."""

    policy: str
    p: float

    def label(self, panel_id: str) -> str:
        if panel_id == "f":
            return f"p = {self.p:g}"
        return self.policy


#: Default curves per panel: (a)/(b) compare the two-phase policy with NCB at
#: p = 0 on Bernoulli/Gaussian arms, (c)-(e) compare it with explore-then-UCB
#: at p = 0.5 / -0.5 / -1.5, and (f) sweeps the fairness order alone.
DEFAULT_SERIES: dict[str, tuple[SeriesKey, ...]] = {
    "a": (SeriesKey("welfarist_ucb", 0.0), SeriesKey("ncb", 0.0)),
    "b": (SeriesKey("welfarist_ucb", 0.0), SeriesKey("ncb", 0.0)),
    "c": (SeriesKey("welfarist_ucb", 0.5), SeriesKey("explore_then_ucb", 0.5)),
    "d": (SeriesKey("welfarist_ucb", -0.5), SeriesKey("explore_then_ucb", -0.5)),
    "e": (SeriesKey("welfarist_ucb", -1.5), SeriesKey("explore_then_ucb", -1.5)),
    "f": (
        SeriesKey("welfarist_ucb", 0.5),
        SeriesKey("welfarist_ucb", 0.0),
        SeriesKey("welfarist_ucb", -0.5),
        SeriesKey("welfarist_ucb", -1.5),
    ),
}

_Y_LABELS = {
    "a": "Nash regret",
    "b": "Nash regret",
    "c": "p-mean regret (p = 0.5)",
    "d": "p-mean regret (p = -0.5)",
    "e": "p-mean regret (p = -1.5)",
    "f": "p-mean regret",
}


@dataclass(frozen=True)
class PanelSpec:
    """What to draw: which CSV, which panel defaults, which curves."""

    panel_id: str
    input_csv: Path
    series: tuple[SeriesKey, ...] = ()
    x_label: str = "horizon T"
    y_label: str = ""

    def __post_init__(self) -> None:
        if self.panel_id not in PANEL_IDS:
            raise ValueError(f"panel_id must be one of {'..'.join(PANEL_IDS[::5])}, got {self.panel_id!r}")
        if not self.series:
            object.__setattr__(self, "series", DEFAULT_SERIES[self.panel_id])
        if not self.y_label:
            object.__setattr__(self, "y_label", _Y_LABELS[self.panel_id])


@dataclass(frozen=True)
class SweepRow:
    policy: str
    p: float
    horizon: int
    regret: float
    std_error: float


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    """Parse a sweep CSV, validating the schema; preserves file order."""
    rows: list[SweepRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != EXPECTED_HEADER:
            raise SchemaMismatch(header or [])
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(EXPECTED_HEADER):
                raise SchemaMismatch(list(rec))
            try:
                rows.append(SweepRow(
                    policy=rec[0], p=float(rec[1]), horizon=int(rec[2]),
                    regret=float(rec[3]), std_error=float(rec[5]),
                ))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return rows


def series_triples(spec: PanelSpec) -> list[tuple[SeriesKey, list[tuple[int, float, float]]]]:
    """The (horizon, regret, std_error) triples each curve would plot.

    Triples keep the CSV's row order; a requested series with no rows is an
    error (the CSV does not hold that panel's data).
    """
    rows = read_sweep_csv(spec.input_csv)
    if not rows:
        raise ValueError(f"{spec.input_csv}: no data rows to plot")
    out = []
    for key in spec.series:
        triples = [
            (r.horizon, r.regret, r.std_error)
            for r in rows
            if r.policy == key.policy and r.p == key.p
        ]
        if not triples:
            have = sorted({(r.policy, r.p) for r in rows})
            raise ValueError(
                f"{spec.input_csv}: no rows for series ({key.policy}, p={key.p:g}); "
                f"file contains {have}"
            )
        out.append((key, triples))
    return out


def render_panel(spec: PanelSpec, out_path: str | Path) -> Path:
    """Draw the panel and write a raster image; returns the written path.

    Nothing is written when the data is missing or malformed.
    """
    data = series_triples(spec)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    for key, triples in data:
        x = [t[0] for t in triples]
        y = [t[1] for t in triples]
        err = [t[2] for t in triples]
        lo = [yi - ei for yi, ei in zip(y, err)]
        hi = [yi + ei for yi, ei in zip(y, err)]
        (line,) = ax.plot(x, y, marker="o", markersize=3.5, label=key.label(spec.panel_id))
        ax.fill_between(x, lo, hi, alpha=0.2, color=line.get_color(), linewidth=0)
    ax.set_xscale("log")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(f"panel ({spec.panel_id})")
    ax.legend()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def format_dry_run(spec: PanelSpec) -> str:
    """The diffable dry-run listing: one ``x,y,err`` line per plotted point.

    Floats are printed in shortest round-trip form, i.e. exactly the strings
    the sweep CSV holds.
    """
    lines = []
    for key, triples in series_triples(spec):
        lines.append(f"# series {key.policy} p={key.p!r}")
        for x, y, err in triples:
            lines.append(f"{x},{y!r},{err!r}")
    return "\n".join(lines) + "\n"
