"""Panel parsing, rendering, and dry-run behavior on synthetic CSVs."""

import pytest

from welfarist_plots.panels import (
    EXPECTED_HEADER,
    PanelSpec,
    SchemaMismatch,
    SeriesKey,
    format_dry_run,
    read_sweep_csv,
    render_panel,
    series_triples,
)

HEADER = ",".join(EXPECTED_HEADER)


def _write_panel_a_csv(path, horizons=(1000, 2000, 5000)):
    lines = [HEADER]
    for policy, base in (("welfarist_ucb", 0.5), ("ncb", 0.9)):
        for i, h in enumerate(horizons):
            lines.append(f"{policy},0.0,{h},{base / (i + 1)!r},10,{0.01 * (i + 1)!r},12.0,0")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestReadSweepCsv:
    def test_reads_rows_in_file_order(self, tmp_path):
        path = _write_panel_a_csv(tmp_path / "a.csv")
        rows = read_sweep_csv(path)
        assert [r.horizon for r in rows] == [1000, 2000, 5000, 1000, 2000, 5000]
        assert rows[0].policy == "welfarist_ucb" and rows[3].policy == "ncb"

    def test_schema_mismatch_reports_column_diff(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("policy,p,horizon,regret,runs,stderr\n")
        with pytest.raises(SchemaMismatch) as err:
            read_sweep_csv(path)
        assert "missing" in str(err.value) and "std_error" in str(err.value)
        assert "unexpected" in str(err.value) and "stderr" in str(err.value)

    def test_reordered_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(reversed(EXPECTED_HEADER)) + "\n")
        with pytest.raises(SchemaMismatch):
            read_sweep_csv(path)


class TestSeriesSelection:
    def test_default_series_for_panel_a(self, tmp_path):
        spec = PanelSpec(panel_id="a", input_csv=_write_panel_a_csv(tmp_path / "a.csv"))
        data = series_triples(spec)
        assert [key.policy for key, _ in data] == ["welfarist_ucb", "ncb"]
        assert all(len(triples) == 3 for _, triples in data)

    def test_missing_series_is_an_error(self, tmp_path):
        spec = PanelSpec(panel_id="c", input_csv=_write_panel_a_csv(tmp_path / "a.csv"))
        with pytest.raises(ValueError, match="no rows for series"):
            series_triples(spec)

    def test_empty_csv_is_an_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER + "\n")
        spec = PanelSpec(panel_id="a", input_csv=path)
        with pytest.raises(ValueError, match="no data rows"):
            series_triples(spec)

    def test_unknown_panel_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            PanelSpec(panel_id="g", input_csv=tmp_path / "x.csv")

    def test_explicit_series_override(self, tmp_path):
        spec = PanelSpec(
            panel_id="a",
            input_csv=_write_panel_a_csv(tmp_path / "a.csv"),
            series=(SeriesKey("ncb", 0.0),),
        )
        data = series_triples(spec)
        assert len(data) == 1 and data[0][0].policy == "ncb"


class TestRenderPanel:
    def test_two_labeled_curves_written(self, tmp_path):
        spec = PanelSpec(panel_id="a", input_csv=_write_panel_a_csv(tmp_path / "a.csv"))
        out = render_panel(spec, tmp_path / "panel_a.png")
        assert out.exists() and out.stat().st_size > 1000
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_empty_csv_writes_nothing(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER + "\n")
        out = tmp_path / "nope.png"
        with pytest.raises(ValueError):
            render_panel(PanelSpec(panel_id="a", input_csv=path), out)
        assert not out.exists()


class TestDryRun:
    def test_triples_match_csv_contents_exactly(self, tmp_path):
        path = _write_panel_a_csv(tmp_path / "a.csv")
        listing = format_dry_run(PanelSpec(panel_id="a", input_csv=path))
        data_lines = [ln for ln in listing.splitlines() if ln and not ln.startswith("#")]
        csv_lines = path.read_text().splitlines()[1:]
        assert len(data_lines) == len(csv_lines)
        # triples carry the same (horizon, regret, std_error) strings as the CSV
        for got, src in zip(data_lines, sorted(csv_lines, key=lambda s: s.split(",")[0] != "welfarist_ucb")):
            fields = src.split(",")
            assert got == f"{fields[2]},{fields[3]},{fields[5]}"

    def test_order_preserved_within_series(self, tmp_path):
        path = _write_panel_a_csv(tmp_path / "a.csv", horizons=(5000, 1000, 2000))
        listing = format_dry_run(PanelSpec(panel_id="a", input_csv=path))
        first_series = listing.split("# series")[1].splitlines()[1:4]
        assert [int(ln.split(",")[0]) for ln in first_series] == [5000, 1000, 2000]
