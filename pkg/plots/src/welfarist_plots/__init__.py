"""Panel rendering for welfarist-bandits sweep CSVs."""

from .panels import (
    DEFAULT_SERIES,
    PANEL_IDS,
    PanelSpec,
    SchemaMismatch,
    SeriesKey,
    SweepRow,
    format_dry_run,
    read_sweep_csv,
    render_panel,
    series_triples,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SERIES",
    "PANEL_IDS",
    "PanelSpec",
    "SchemaMismatch",
    "SeriesKey",
    "SweepRow",
    "format_dry_run",
    "read_sweep_csv",
    "render_panel",
    "series_triples",
]
