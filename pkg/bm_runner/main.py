"""
Command-line surface: `python -m bm_runner.main <subcommand> [options]`.

Results go to a CSV file; standard output carries a one-line JSON summary;
logs and progress bars go to standard error.
"""

from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional
import logging

import orjson
import typer
from rich.console import Console
from rich.logging import RichHandler

from bm_engine.energy import energy_table
from bm_engine.errors import BeamManagementError, ConfigurationError
from bm_engine.simulation import (
    MonteCarloEngine,
    feasibility_region,
    offset_and_gain_curves,
    recommend_config,
    sweep,
)
from bm_engine.timing import BurstConfig
from bm_runner import output
from bm_runner.config_file import load_environment, read_config
from bm_runner.schemas import RunManifest, RunSettings

logger = logging.getLogger("bm_runner.main")

app = typer.Typer(help="RedCap SSB beam-management energy simulator", add_completion=False)

RUNTIME_ERROR_EXIT = 4

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="Config file (key = value lines)")
SET_OPTION = typer.Option(None, "--set", "-s", help="Override one key, e.g. --set tau=3; repeatable")
TRIALS_OPTION = typer.Option(None, "--trials", "-t", help="Monte Carlo trials per cell")
SEED_OPTION = typer.Option(None, "--seed", help="Master seed (default: config, then BM_SEED, then 0)")
OUTPUT_OPTION = typer.Option(None, "--output", "-o", help="CSV path (default: <subcommand>.csv)")
THREADS_OPTION = typer.Option(None, "--threads", help="Worker threads (default: BM_THREADS or 1)")


def _configure_logging(verbose: bool, level_name: Optional[str]):
    level = logging.DEBUG if verbose else getattr(logging, (level_name or "INFO").upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")):
    environment = load_environment()
    _configure_logging(verbose, environment["log_level"])


def _manifest(
    subcommand: str,
    config: Optional[Path],
    overrides: Optional[List[str]],
    trials: Optional[int],
    seed: Optional[int],
    output_path: Optional[Path],
    threads: Optional[int],
) -> RunManifest:
    environment = load_environment()
    flags = list(overrides or [])
    if trials is not None:
        flags.append(f"trials={trials}")
    if seed is not None:
        flags.append(f"seed={seed}")
    settings = read_config(str(config) if config else None, flags, environment["seed"])

    if threads is None:
        raw = environment["threads"]
        try:
            threads = int(raw) if raw else 1
        except ValueError:
            raise ConfigurationError(f"BM_THREADS: {raw!r} is not an integer") from None
    if threads < 1:
        raise ConfigurationError(f"threads must be at least 1, got {threads}")

    manifest = RunManifest(subcommand=subcommand, settings=settings, output=output_path, threads=threads)
    logger.info(f"Running {subcommand} with seed={manifest.seed}, trials={settings.trials}, threads={threads}")
    return manifest


def _execute(action: Callable[[], Dict[str, Any]]):
    """Run a subcommand body, print its JSON summary and map failures to exit codes."""
    try:
        summary = action()
    except BeamManagementError as exc:
        logger.error(exc.detail)
        raise typer.Exit(code=exc.exit_code)
    except typer.Exit:
        raise
    except Exception:
        logger.exception("Unexpected failure")
        raise typer.Exit(code=RUNTIME_ERROR_EXIT)
    typer.echo(orjson.dumps(summary).decode())


def _burst(settings: RunSettings, n_ss: int, period: int) -> BurstConfig:
    return BurstConfig(
        ssb_per_burst=n_ss,
        burst_period_ms=period,
        numerology=settings.config.numerology,
        candidates=settings.axes.antennas,
    )


def _summary(manifest: RunManifest, path: Path, rows: int, **extra) -> Dict[str, Any]:
    return {"subcommand": manifest.subcommand, "seed": manifest.seed, "rows": rows, "output": str(path), **extra}


@app.command()
def simulate(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """One Monte Carlo cell at the first value of every axis."""

    def action():
        manifest = _manifest("simulate", config, overrides, trials, seed, output_path, threads)
        settings = manifest.settings
        axes = settings.axes
        engine = MonteCarloEngine(settings.config, threads=manifest.threads, progress=True)
        stats = engine.simulate(_burst(settings, axes.ssb_per_burst[0], axes.burst_periods_ms[0]), settings.trials)
        path = output.write_csv(manifest, output.STATS_COLUMNS, output.stats_rows(stats))
        return _summary(
            manifest,
            path,
            len(stats),
            misdetection_probability=stats[0].misdetection_probability,
            mean_n_star=stats[0].mean_n_star,
        )

    _execute(action)


@app.command()
def curves(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Mean angular offset and mean gNB gain per N_gNB, for every N_SS × T_SS × v."""

    def action():
        manifest = _manifest("curves", config, overrides, trials, seed, output_path, threads)
        settings = manifest.settings
        axes = settings.axes
        results = [
            offset_and_gain_curves(
                settings.config, _burst(settings, n_ss, period), speed, settings.trials, threads=manifest.threads
            )
            for n_ss in axes.ssb_per_burst
            for period in axes.burst_periods_ms
            for speed in axes.speeds
        ]
        rows = output.curve_rows(results)
        path = output.write_csv(manifest, output.CURVE_COLUMNS, rows)
        return _summary(manifest, path, len(rows), peak_antennas=[curve.peak_antennas for curve in results])

    _execute(action)


@app.command("sweep")
def sweep_command(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """MCStats over the full N_SS × T_SS × v × P_T × τ grid."""

    def action():
        manifest = _manifest("sweep", config, overrides, trials, seed, output_path, threads)
        settings = manifest.settings
        axes = settings.axes
        stats = sweep(
            settings.config,
            axes.ssb_per_burst,
            axes.burst_periods_ms,
            axes.speeds,
            axes.taus_db,
            axes.tx_powers_dbm,
            settings.trials,
            candidates=axes.antennas,
            threads=manifest.threads,
            progress=True,
        )
        path = output.write_csv(manifest, output.STATS_COLUMNS, output.stats_rows(stats))
        return _summary(manifest, path, len(stats))

    _execute(action)


def _regions(manifest: RunManifest, taus_db, tx_powers_dbm):
    settings = manifest.settings
    axes = settings.axes
    entries = []
    for tx_power in tx_powers_dbm:
        entries.extend(
            feasibility_region(
                settings.config,
                axes.ssb_per_burst,
                taus_db,
                tx_power,
                axes.speeds,
                axes.burst_periods_ms,
                settings.trials,
                epsilon=settings.epsilon,
                rule=settings.region_rule,
                candidates=axes.antennas,
                threads=manifest.threads,
                progress=True,
            )
        )
    return entries


@app.command()
def region(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Feasibility grid and v·T_SS bound per N_SS × τ × P_T."""

    def action():
        manifest = _manifest("region", config, overrides, trials, seed, output_path, threads)
        axes = manifest.settings.axes
        entries = _regions(manifest, axes.taus_db, axes.tx_powers_dbm)
        rows = output.region_rows(entries)
        path = output.write_csv(manifest, output.REGION_COLUMNS, rows)
        bounds = [
            {"ssb_per_burst": e.ssb_per_burst, "tau_db": e.tau_db, "tx_power_dbm": e.tx_power_dbm, "bound_m": e.max_product_m}
            for e in entries
        ]
        return _summary(manifest, path, len(rows), region_rule=manifest.settings.region_rule, bounds=bounds)

    _execute(action)


@app.command()
def recommend(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    target_speed: Optional[float] = typer.Option(None, "--target-speed", help="UE speed in m/s (default: first v)"),
    rule: str = typer.Option("top-left", "--rule", help="top-left | min-energy"),
):
    """(N_SS, T_SS) for UEs at the target speed, from the region at the first τ and P_T."""

    def action():
        if rule not in ("top-left", "min-energy"):
            raise ConfigurationError(f"--rule must be top-left or min-energy, got {rule!r}")
        manifest = _manifest("recommend", config, overrides, trials, seed, output_path, threads)
        axes = manifest.settings.axes
        speed = axes.speeds[0] if target_speed is None else target_speed
        entries = _regions(manifest, axes.taus_db[:1], axes.tx_powers_dbm[:1])
        choice = recommend_config(entries, speed, rule=rule)
        logger.info(f"Recommended N_SS={choice.ssb_per_burst}, T_SS={choice.burst_period_ms} ms at v={speed} m/s")
        path = output.write_csv(manifest, output.RECOMMEND_COLUMNS, output.recommend_rows(choice))
        return _summary(
            manifest, path, 1, ssb_per_burst=choice.ssb_per_burst, burst_period_ms=choice.burst_period_ms
        )

    _execute(action)


@app.command()
def energy(
    config: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    output_path: Optional[Path] = OUTPUT_OPTION,
):
    """Sweep size, T_BM, EC and EC̄_t per N_SS × T_SS × N_gNB (no simulation)."""

    def action():
        manifest = _manifest("energy", config, overrides, None, None, output_path, 1)
        settings = manifest.settings
        rows = [
            asdict(row)
            for n_ss in settings.axes.ssb_per_burst
            for period in settings.axes.burst_periods_ms
            for row in energy_table(settings.config.power, _burst(settings, n_ss, period))
        ]
        path = output.write_csv(manifest, output.ENERGY_COLUMNS, rows)
        return _summary(manifest, path, len(rows))

    _execute(action)


if __name__ == "__main__":
    app()
