"""Command-line entry point.

Subcommands::

    welfarist run     --config cfg.json [--set KEY=VALUE ...] [--out PATH]
    welfarist sweep   --config cfg.json [--set KEY=VALUE ...] [--out PATH] [--workers N]
    welfarist verify  [--config cfg.json] [--set KEY=VALUE ...] [--out PATH]
    welfarist figures --config cfg.json [--set KEY=VALUE ...] [--workers N]

Exit codes are a stable contract: 0 success, 2 configuration error,
3 runtime error, 4 verification failure.  The environment variable
``WELFARIST_SEED`` overrides the configured ``base_seed`` (an explicit
``--set base_seed=...`` wins over both).  All file writes go through a
temp-file-and-rename so an interrupted command never leaves a partial file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .figures import FiguresConfig, run_figures
from .harness import (
    CSV_HEADER,
    ExperimentConfig,
    RegretTable,
    _cell_row,
    _fmt,
    sweep,
    write_table,
)
from .theorycheck import VerifyConfig, default_verify_config, run_verify_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

SEED_ENV_VAR = "WELFARIST_SEED"

log = logging.getLogger("welfarist")


class ConfigError(Exception):
    """Anything wrong with the configuration or command line."""


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def _parse_override(item: str) -> tuple[str, object]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form KEY=VALUE")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value: object = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _apply_overrides(doc: dict, overrides: list[str], allowed: set[str]) -> dict:
    doc = dict(doc)
    if SEED_ENV_VAR in os.environ:
        try:
            doc["base_seed"] = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    for item in overrides:
        key, value = _parse_override(item)
        if key not in allowed:
            raise ConfigError(f"unknown override key {key!r}; valid keys: {sorted(allowed)}")
        doc[key] = value
    return doc


_EXPERIMENT_KEYS = {
    "instance_spec", "policy_specs", "p_values", "horizon_grid",
    "runs", "base_seed", "output_path",
}
_VERIFY_KEYS = {
    "instance_spec", "horizon", "runs", "p", "base_seed", "blocks", "numeric_samples",
}
_FIGURES_KEYS = {
    "bernoulli_instance", "gaussian_instance", "horizon_grid", "runs", "base_seed", "out_dir",
}


def _experiment_config(args) -> ExperimentConfig:
    doc = _apply_overrides(_load_json(args.config), args.set, _EXPERIMENT_KEYS)
    if args.out is not None:
        doc["output_path"] = args.out
    try:
        return ExperimentConfig.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _row_line(row) -> str:
    return ",".join([
        row.policy, _fmt(row.p), str(row.horizon), _fmt(row.regret),
        str(row.runs), _fmt(row.std_error), _fmt(row.tau_mean), str(row.degenerate_runs),
    ])


def cmd_run(args) -> int:
    config = _experiment_config(args)
    if len(config.policy_specs) != 1 or len(config.p_values) != 1 or len(config.horizon_grid) != 1:
        raise ConfigError(
            "run executes exactly one (policy, p, horizon) cell; narrow the config "
            "with --set (e.g. --set horizon_grid=[1000])"
        )
    if config.output_path is None:
        raise ConfigError("run needs an output path (config output_path or --out)")
    instance = config.instance_spec.build()
    row = _cell_row(
        config.policy_specs[0], instance, config.horizon_grid[0],
        config.p_values[0], config.runs, config.base_seed,
    )
    print(",".join(CSV_HEADER))
    print(_row_line(row))
    write_table(RegretTable(rows=(row,)), config.output_path)
    log.info("wrote %s", config.output_path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _experiment_config(args)
    if config.output_path is None:
        raise ConfigError("sweep needs an output path (config output_path or --out)")
    table = sweep(config, workers=args.workers)
    write_table(table, config.output_path)
    log.info("wrote %d rows to %s", len(table.rows), config.output_path)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.config is not None:
        doc = _apply_overrides(_load_json(args.config), args.set, _VERIFY_KEYS)
    else:
        doc = _apply_overrides(default_verify_config().to_json(), args.set, _VERIFY_KEYS)
    try:
        config = VerifyConfig.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    report = run_verify_suite(config)
    payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        _atomic_write_text(args.out, payload)
        log.info("wrote report to %s", args.out)
    else:
        sys.stdout.write(payload)
    if not report["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_figures(args) -> int:
    doc = _apply_overrides(_load_json(args.config), args.set, _FIGURES_KEYS)
    if args.out is not None:
        doc["out_dir"] = args.out
    try:
        config = FiguresConfig.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    written = run_figures(config, workers=args.workers)
    for panel, path in written.items():
        print(f"panel_{panel}: {path}")
    return EXIT_OK


def _atomic_write_text(path: str, payload: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="welfarist",
        description="Fairness-aware bandit experiments: runs, sweeps, lemma checks, figure data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required: bool) -> None:
        p.add_argument("--config", required=config_required, help="JSON config path")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a top-level config field (JSON-parsed value); repeatable")
        p.add_argument("--out", default=None, help="output path override")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("--verbose", action="store_true", help="log progress to stderr")

    p_run = sub.add_parser("run", help="execute one (policy, p, horizon) cell")
    common(p_run, config_required=True)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute the full grid and write the regret CSV")
    common(p_sweep, config_required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the lemma-verification suite")
    common(p_verify, config_required=False)
    p_verify.set_defaults(func=cmd_verify)

    p_fig = sub.add_parser("figures", help="emit the six panel CSV datasets")
    common(p_fig, config_required=True)
    p_fig.set_defaults(func=cmd_figures)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps everything to exit 3
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
