"""
CSV result files.

Layout: `# seed=<seed>`, `# subcommand=<name>`, one `# key = value` line per
resolved config key, then the header row and data rows. UTF-8, LF line
endings, floats written with repr so they read back exactly.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence
import csv
import io
import logging

from bm_engine.errors import BeamManagementError
from bm_engine.simulation import FeasibilityEntry, MCStats, OffsetGainCurve, Recommendation
from bm_runner.config_file import config_lines
from bm_runner.schemas import RunManifest

logger = logging.getLogger(__name__)

STATS_COLUMNS = [
    "ssb_per_burst",
    "burst_period_ms",
    "speed_mps",
    "tau_db",
    "tx_power_dbm",
    "trials",
    "feasible_trials",
    "mean_n_star",
    "n_star_half_width",
    "misdetection_probability",
    "misdetection_half_width",
    "infeasible_fraction",
    "infeasible_half_width",
    "mean_peak_antennas",
    "mean_sweep_energy_j",
    "sweep_energy_half_width",
    "energy_per_time_w",
]
CURVE_COLUMNS = ["ssb_per_burst", "burst_period_ms", "speed_mps", "n_gnb", "mean_offset_rad", "mean_gain", "peak_antennas"]
REGION_COLUMNS = [
    "ssb_per_burst",
    "tau_db",
    "tx_power_dbm",
    "speed_mps",
    "burst_period_ms",
    "product_m",
    "infeasible_fraction",
    "passed",
    "bound_m",
    "monotone",
]
RECOMMEND_COLUMNS = ["ssb_per_burst", "burst_period_ms"]
ENERGY_COLUMNS = [
    "ssb_per_burst",
    "burst_period_ms",
    "n_gnb",
    "sweep_directions",
    "beam_management_time_s",
    "sweep_energy_j",
    "energy_per_time_w",
    "single_burst",
]


class OutputError(BeamManagementError):
    """Result file could not be written."""


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def stats_rows(stats: Iterable[MCStats]) -> List[Dict[str, Any]]:
    return [s.model_dump(include=set(STATS_COLUMNS)) for s in stats]


def curve_rows(curves: Iterable[OffsetGainCurve]) -> List[Dict[str, Any]]:
    rows = []
    for curve in curves:
        for n, offset, gain in zip(curve.candidates, curve.mean_offset, curve.mean_gain):
            rows.append(
                {
                    "ssb_per_burst": curve.ssb_per_burst,
                    "burst_period_ms": curve.burst_period_ms,
                    "speed_mps": curve.speed_mps,
                    "n_gnb": n,
                    "mean_offset_rad": offset,
                    "mean_gain": gain,
                    "peak_antennas": curve.peak_antennas,
                }
            )
    return rows


def region_rows(entries: Iterable[FeasibilityEntry]) -> List[Dict[str, Any]]:
    rows = []
    for entry in entries:
        for cell in entry.cells:
            rows.append(
                {
                    "ssb_per_burst": entry.ssb_per_burst,
                    "tau_db": entry.tau_db,
                    "tx_power_dbm": entry.tx_power_dbm,
                    "speed_mps": cell.speed_mps,
                    "burst_period_ms": cell.burst_period_ms,
                    "product_m": cell.product_m,
                    "infeasible_fraction": cell.infeasible_fraction,
                    "passed": cell.passed,
                    "bound_m": entry.max_product_m,
                    "monotone": entry.monotone,
                }
            )
    return rows


def recommend_rows(recommendation: Recommendation) -> List[Dict[str, Any]]:
    return [{"ssb_per_burst": recommendation.ssb_per_burst, "burst_period_ms": recommendation.burst_period_ms}]


def render_csv(manifest: RunManifest, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    lines = [f"# seed={manifest.seed}", f"# subcommand={manifest.subcommand}"]
    lines.extend(f"# {line}" for line in config_lines(manifest.settings))
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(column)) for column in columns])
    return "\n".join(lines) + "\n" + body.getvalue()


def write_csv(manifest: RunManifest, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    path = manifest.output or Path(f"{manifest.subcommand}.csv")
    text = render_csv(manifest, columns, rows)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")
    return path

