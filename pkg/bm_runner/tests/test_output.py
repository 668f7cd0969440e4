import csv

from bm_engine.simulation import FeasibilityEntry, GridCell, Recommendation
from bm_runner.config_file import KEYS, parse_config
from bm_runner.output import (
    RECOMMEND_COLUMNS,
    REGION_COLUMNS,
    format_cell,
    recommend_rows,
    region_rows,
    render_csv,
    write_csv,
)
from bm_runner.schemas import RunManifest


def manifest(subcommand="recommend", output=None, text="seed = 17"):
    return RunManifest(subcommand=subcommand, settings=parse_config(text), output=output)


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(0.1 + 0.2) == "0.30000000000000004"
    assert format_cell(8) == "8"


def test_provenance_header():
    text = render_csv(manifest(), RECOMMEND_COLUMNS, [{"ssb_per_burst": 8, "burst_period_ms": 80}])
    lines = text.split("\n")
    assert lines[0] == "# seed=17"
    assert lines[1] == "# subcommand=recommend"
    assert lines[2] == "# L = 20.0"
    assert len([line for line in lines if line.startswith("# ")]) == 2 + len(KEYS)
    assert lines[2 + len(KEYS)] == "ssb_per_burst,burst_period_ms"
    assert lines[3 + len(KEYS)] == "8,80"
    assert "\r" not in text
    assert text.endswith("\n")


def test_region_rows():
    cell = GridCell(
        speed_mps=2.0,
        burst_period_ms=40,
        product_m=0.08,
        infeasible_fraction=0.0,
        misdetection_probability=0.0,
        passed=True,
    )
    entry = FeasibilityEntry(ssb_per_burst=8, tau_db=7.0, tx_power_dbm=18.0, max_product_m=None, cells=[cell])
    rows = region_rows([entry])
    assert rows[0]["bound_m"] is None
    text = render_csv(manifest("region"), REGION_COLUMNS, rows)
    assert text.splitlines()[-1] == "8,7.0,18.0,2.0,40,0.08,0.0,true,,true"


def test_write_csv(tmp_path):
    path = tmp_path / "out" / "rec.csv"
    choice = Recommendation(ssb_per_burst=8, burst_period_ms=160, tau_db=3.0, tx_power_dbm=18.0, speed_mps=1.0)
    written = write_csv(manifest(output=path), RECOMMEND_COLUMNS, recommend_rows(choice))
    assert written == path
    with path.open(encoding="utf-8") as handle:
        data = [row for row in csv.reader(handle) if not row[0].startswith("#")]
    assert data == [["ssb_per_burst", "burst_period_ms"], ["8", "160"]]
