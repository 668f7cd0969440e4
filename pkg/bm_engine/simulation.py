"""
Monte Carlo engine, metric aggregation and feasibility regions.

Trials are drawn from per-trial streams, evaluated in fixed-size chunks and
reduced in chunk order, so every statistic is reproducible bit-for-bit from
(config, seed) whatever the worker count. Grid cells reuse the same trial
streams (common random numbers).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from bm_engine.channel import FadingDraw, LinkDraws, sample_link_draws
from bm_engine.energy import energy_per_time, sweep_energy
from bm_engine.errors import ConfigurationError, InfeasibleRecommendation
from bm_engine.optimizer import evaluate_candidates, scan
from bm_engine.scenario import SystemConfig, UEState, sample_positions
from bm_engine.streams import stream_for
from bm_engine.timing import BurstConfig

logger = logging.getLogger(__name__)

CHUNK_TRIALS = 256
DEFAULT_EPSILON = 1e-3
MAX_SPEED = 25.0
# draws for more UE-trials than this are regenerated instead of cached
CACHE_LIMIT = 4_000_000
Z_95 = 1.959963984540054

# statistic a region cell is judged on against epsilon
RegionRule = Literal["infeasible", "misdetection"]
REGION_RULES = ("infeasible", "misdetection")


class MCStats(BaseModel):
    """
    Aggregated Monte Carlo statistics of one (burst config, speed, τ, P_T) cell.
    """

    ssb_per_burst: int
    burst_period_ms: int
    speed_mps: float
    tau_db: float
    tx_power_dbm: float
    seed: int
    trials: int
    feasible_trials: int
    mean_n_star: Optional[float] = Field(None, description="Mean N* over feasible trials")
    n_star_half_width: Optional[float] = None
    misdetection_probability: float = Field(..., ge=0, le=1)
    misdetection_half_width: float = Field(..., ge=0)
    infeasible_fraction: float = Field(..., ge=0, le=1)
    infeasible_half_width: float = Field(..., ge=0)
    mean_peak_antennas: float
    mean_sweep_energy_j: Optional[float] = None
    sweep_energy_half_width: Optional[float] = None
    energy_per_time_w: float
    candidates: List[int]
    mean_offset: List[float] = Field(..., description="θ̄ per candidate N, rad")
    mean_gain: List[float] = Field(..., description="UE-averaged gNB gain per candidate N")


class OffsetGainCurve(BaseModel):
    ssb_per_burst: int
    burst_period_ms: int
    speed_mps: float
    candidates: List[int]
    mean_offset: List[float]
    mean_gain: List[float]
    peak_antennas: int


class GridCell(BaseModel):
    speed_mps: float
    burst_period_ms: int
    product_m: float
    infeasible_fraction: float
    misdetection_probability: float
    passed: bool


class FeasibilityEntry(BaseModel):
    """
    Feasibility bound of one (N_SS, τ, P_T) combination, with the grid cells
    it was read from.
    """

    ssb_per_burst: int
    tau_db: float
    tx_power_dbm: float
    max_product_m: Optional[float] = Field(None, description="Largest supported v·T_SS, m")
    monotone: bool = True
    cells: List[GridCell]


class Recommendation(BaseModel):
    ssb_per_burst: int
    burst_period_ms: int
    tau_db: float
    tx_power_dbm: float
    speed_mps: float


@dataclass
class _Moments:
    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self.count += int(values.size)
        self.total += float(values.sum())
        self.total_sq += float((values * values).sum())

    def merge(self, other: "_Moments"):
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> Optional[float]:
        return self.total / self.count if self.count else None

    @property
    def half_width(self) -> Optional[float]:
        if not self.count:
            return None
        if self.count < 2:
            return 0.0
        variance = (self.total_sq - self.total * self.total / self.count) / (self.count - 1)
        return Z_95 * math.sqrt(max(variance, 0.0) / self.count)


@dataclass
class _PointTally:
    n_star: _Moments = field(default_factory=_Moments)
    misdetected: _Moments = field(default_factory=_Moments)
    infeasible: _Moments = field(default_factory=_Moments)
    energy: _Moments = field(default_factory=_Moments)

    def merge(self, other: "_PointTally"):
        self.n_star.merge(other.n_star)
        self.misdetected.merge(other.misdetected)
        self.infeasible.merge(other.infeasible)
        self.energy.merge(other.energy)


@dataclass
class _Tally:
    points: List[_PointTally]
    peak: _Moments = field(default_factory=_Moments)
    offset_sum: Optional[np.ndarray] = None
    gain_sum: Optional[np.ndarray] = None
    samples: int = 0

    def merge(self, other: "_Tally"):
        for mine, theirs in zip(self.points, other.points):
            mine.merge(theirs)
        self.peak.merge(other.peak)
        self.offset_sum = other.offset_sum if self.offset_sum is None else self.offset_sum + other.offset_sum
        self.gain_sum = other.gain_sum if self.gain_sum is None else self.gain_sum + other.gain_sum
        self.samples += other.samples


def draw_trial_arrays(config: SystemConfig, seed: int, index: int) -> Tuple[np.ndarray, np.ndarray, LinkDraws]:
    """Positions first, then link draws, from trial `index`'s own stream."""
    stream = stream_for(seed, index)
    distance, azimuth = sample_positions(config, stream)
    links = sample_link_draws(stream, config.num_ues)
    return distance, azimuth, links


def draw_trial(config: SystemConfig, seed: int, index: int) -> Tuple[List[UEState], List[FadingDraw]]:
    """The exact deployment and fading the engine uses for trial `index`."""
    distance, azimuth, links = draw_trial_arrays(config, seed, index)
    ues = [UEState.at(d, phi, config) for d, phi in zip(distance, azimuth)]
    return ues, links.to_draws()


class MonteCarloEngine:
    """
    Runs Monte Carlo cells for one scenario.

    Speed, burst configuration, τ and P_T vary per call; everything that
    shapes the random draws (hall, K, placement) is fixed by `config`, which
    lets the engine reuse drawn trials across cells.
    """

    def __init__(self, config: SystemConfig, threads: int = 1, progress: bool = False):
        self.config = config
        self.threads = max(1, int(threads))
        self.progress = progress
        self._draws: Dict[Tuple[int, int, int], Tuple[np.ndarray, np.ndarray, LinkDraws]] = {}

    def _chunk_draws(self, seed: int, start: int, stop: int, cache: bool):
        key = (seed, start, stop)
        if key in self._draws:
            return self._draws[key]
        rows = [draw_trial_arrays(self.config, seed, index) for index in range(start, stop)]
        draws = (
            np.stack([r[0] for r in rows]),
            np.stack([r[1] for r in rows]),
            LinkDraws.stack([r[2] for r in rows]),
        )
        if cache:
            self._draws[key] = draws
        return draws

    def _run_chunk(self, config, cfg, seed, start, stop, points, energies, cache) -> _Tally:
        distance, azimuth, links = self._chunk_draws(seed, start, stop, cache)
        evaluation = evaluate_candidates(distance, azimuth, links, config, cfg)

        tally = _Tally(points=[_PointTally() for _ in points])
        tally.peak.add(evaluation.candidates[evaluation.peak_index])
        tally.offset_sum = evaluation.offset.sum(axis=(0, 2))
        tally.gain_sum = evaluation.gain.sum(axis=(0, 2))
        tally.samples = distance.shape[0] * distance.shape[1]

        for point_tally, (tau_db, tx_power_dbm) in zip(tally.points, points):
            result = scan(evaluation, config, tau_db=tau_db, tx_power_dbm=tx_power_dbm)
            point_tally.n_star.add(result.n_star[result.feasible])
            point_tally.misdetected.add(result.misdetected)
            point_tally.infeasible.add(~result.feasible)
            point_tally.energy.add(energies[result.star_index[result.feasible]])
        return tally

    def simulate(
        self,
        cfg: BurstConfig,
        trials: int,
        seed: Optional[int] = None,
        speed: Optional[float] = None,
        points: Optional[Sequence[Tuple[float, float]]] = None,
    ) -> List[MCStats]:
        """
        Run `trials` trials for one burst configuration and speed; return one
        MCStats per (τ dB, P_T dBm) operating point. The points share the
        simulated trials since they only move the SNR threshold.
        """
        if trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {trials}")
        seed = self.config.seed if seed is None else seed
        config = self.config if speed is None else self.config.model_copy(update={"speed": float(speed)})
        points = list(points) if points else [(config.snr_threshold_db, config.tx_power_dbm)]
        energies = np.array([sweep_energy(n, config.power, cfg.numerology) for n in cfg.candidates])
        cache = trials * config.num_ues <= CACHE_LIMIT

        chunks = [(start, min(start + CHUNK_TRIALS, trials)) for start in range(0, trials, CHUNK_TRIALS)]
        logger.info(
            f"Simulating N_SS={cfg.ssb_per_burst} T_SS={cfg.burst_period_ms}ms v={config.speed}m/s "
            f"over {trials} trials ({len(chunks)} chunks, {self.threads} threads)"
        )

        def work(chunk):
            return self._run_chunk(config, cfg, seed, chunk[0], chunk[1], points, energies, cache)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = tqdm(
                pool.map(work, chunks),
                total=len(chunks),
                desc=f"N_SS={cfg.ssb_per_burst} T_SS={cfg.burst_period_ms} v={config.speed}",
                disable=not self.progress,
                leave=False,
            )
            tally = _Tally(points=[_PointTally() for _ in points])
            for chunk_tally in results:
                tally.merge(chunk_tally)

        return [self._stats(config, cfg, seed, trials, tally, i, point) for i, point in enumerate(points)]

    def _stats(self, config, cfg, seed, trials, tally: _Tally, i: int, point) -> MCStats:
        point_tally = tally.points[i]
        tau_db, tx_power_dbm = point
        return MCStats(
            ssb_per_burst=cfg.ssb_per_burst,
            burst_period_ms=cfg.burst_period_ms,
            speed_mps=config.speed,
            tau_db=tau_db,
            tx_power_dbm=tx_power_dbm,
            seed=seed,
            trials=trials,
            feasible_trials=point_tally.n_star.count,
            mean_n_star=point_tally.n_star.mean,
            n_star_half_width=point_tally.n_star.half_width,
            misdetection_probability=min(1.0, max(0.0, point_tally.misdetected.mean)),
            misdetection_half_width=point_tally.misdetected.half_width,
            infeasible_fraction=point_tally.infeasible.mean,
            infeasible_half_width=point_tally.infeasible.half_width,
            mean_peak_antennas=tally.peak.mean,
            mean_sweep_energy_j=point_tally.energy.mean,
            sweep_energy_half_width=point_tally.energy.half_width,
            energy_per_time_w=energy_per_time(config.power, cfg),
            candidates=list(cfg.candidates),
            mean_offset=(tally.offset_sum / tally.samples).tolist(),
            mean_gain=(tally.gain_sum / tally.samples).tolist(),
        )


def run_monte_carlo(
    config: SystemConfig,
    cfg: BurstConfig,
    trials: int,
    seed: Optional[int] = None,
    threads: int = 1,
    progress: bool = False,
) -> MCStats:
    engine = MonteCarloEngine(config, threads=threads, progress=progress)
    return engine.simulate(cfg, trials, seed)[0]


def offset_and_gain_curves(
    config: SystemConfig,
    cfg: BurstConfig,
    speed: float,
    trials: int,
    seed: Optional[int] = None,
    threads: int = 1,
) -> OffsetGainCurve:
    """
    Mean angular offset θ̄ and mean gNB gain per candidate N, with N_M read
    off the averaged gain curve.
    """
    stats = MonteCarloEngine(config, threads=threads).simulate(cfg, trials, seed, speed=speed)[0]
    peak = stats.candidates[int(np.argmax(stats.mean_gain))]
    return OffsetGainCurve(
        ssb_per_burst=cfg.ssb_per_burst,
        burst_period_ms=cfg.burst_period_ms,
        speed_mps=speed,
        candidates=stats.candidates,
        mean_offset=stats.mean_offset,
        mean_gain=stats.mean_gain,
        peak_antennas=peak,
    )


def sweep(
    config: SystemConfig,
    ssb_per_burst: Sequence[int],
    burst_periods_ms: Sequence[int],
    speeds: Sequence[float],
    taus_db: Sequence[float],
    tx_powers_dbm: Sequence[float],
    trials: int,
    seed: Optional[int] = None,
    candidates: Optional[Sequence[int]] = None,
    threads: int = 1,
    progress: bool = False,
) -> List[MCStats]:
    """
    MCStats for every N_SS × T_SS × v × P_T × τ combination, in that nesting
    order. One simulated cell serves all (τ, P_T) pairs.
    """
    engine = MonteCarloEngine(config, threads=threads, progress=progress)
    points = [(tau, power) for power in tx_powers_dbm for tau in taus_db]
    rows: List[MCStats] = []
    for n_ss in ssb_per_burst:
        for period in burst_periods_ms:
            cfg = _burst(config, n_ss, period, candidates)
            for speed in speeds:
                rows.extend(engine.simulate(cfg, trials, seed, speed=speed, points=points))
    return rows


def _burst(config: SystemConfig, n_ss: int, period: int, candidates: Optional[Sequence[int]]) -> BurstConfig:
    fields = {"ssb_per_burst": n_ss, "burst_period_ms": period, "numerology": config.numerology}
    if candidates is not None:
        fields["candidates"] = tuple(candidates)
    return BurstConfig(**fields)


def _product_key(value: float) -> float:
    return round(value, 9)


def region_bound(cells: Sequence[GridCell]) -> Tuple[Optional[float], bool]:
    """
    Largest product v·T_SS of a passing cell such that every cell with a
    strictly smaller product passes, and whether the pass/fail pattern is
    monotone in the product.

    A product level holding both passing and failing cells still sets the
    bound but marks the pattern non-monotone.
    """
    levels: Dict[float, List[GridCell]] = {}
    for cell in cells:
        levels.setdefault(_product_key(cell.product_m), []).append(cell)

    bound: Optional[float] = None
    broken = False
    monotone = True
    for level in sorted(levels):
        passed = [cell.passed for cell in levels[level]]
        if broken:
            if any(passed):
                monotone = False
            continue
        if any(passed):
            bound = level
        if not all(passed):
            broken = True
            if any(passed):
                monotone = False
    return bound, monotone


def feasibility_region(
    config: SystemConfig,
    ssb_per_burst: Sequence[int],
    taus_db: Sequence[float],
    tx_power_dbm: float,
    speeds: Sequence[float],
    burst_periods_ms: Sequence[int],
    trials: int,
    seed: Optional[int] = None,
    epsilon: float = DEFAULT_EPSILON,
    candidates: Optional[Sequence[int]] = None,
    threads: int = 1,
    progress: bool = False,
    rule: RegionRule = "infeasible",
) -> List[FeasibilityEntry]:
    """
    Grid of (v, T_SS) cells per (N_SS, τ).

    With rule="infeasible" a cell passes when its infeasible-trial fraction
    is at most `epsilon`; with rule="misdetection" it passes when its
    misdetection probability (mean misdetected share of UEs) is.
    """
    if not (ssb_per_burst and taus_db and speeds and burst_periods_ms):
        raise ConfigurationError("feasibility grids must be non-empty")
    if max(speeds) > MAX_SPEED:
        raise ConfigurationError(f"speeds above {MAX_SPEED} m/s are outside the studied range")
    if rule not in REGION_RULES:
        raise ConfigurationError(f"region rule must be one of {REGION_RULES}, got {rule!r}")

    taus_db = list(dict.fromkeys(taus_db))
    engine = MonteCarloEngine(config, threads=threads, progress=progress)
    points = [(tau, tx_power_dbm) for tau in taus_db]
    entries: List[FeasibilityEntry] = []

    for n_ss in ssb_per_burst:
        cells: Dict[float, List[GridCell]] = {tau: [] for tau in taus_db}
        for period in burst_periods_ms:
            cfg = _burst(config, n_ss, period, candidates)
            for speed in speeds:
                for stats in engine.simulate(cfg, trials, seed, speed=speed, points=points):
                    if rule == "misdetection":
                        measured = stats.misdetection_probability
                    else:
                        measured = stats.infeasible_fraction
                    cells[stats.tau_db].append(
                        GridCell(
                            speed_mps=speed,
                            burst_period_ms=period,
                            product_m=speed * period * 1e-3,
                            infeasible_fraction=stats.infeasible_fraction,
                            misdetection_probability=stats.misdetection_probability,
                            passed=measured <= epsilon,
                        )
                    )

        for tau in taus_db:
            bound, monotone = region_bound(cells[tau])
            if not monotone:
                logger.warning(
                    f"Non-monotone feasibility pattern for N_SS={n_ss} tau={tau}dB; rerun with more trials"
                )
            logger.info(f"Feasibility bound N_SS={n_ss} tau={tau}dB P_T={tx_power_dbm}dBm: v*T_SS <= {bound} ({rule} rule)")
            entries.append(
                FeasibilityEntry(
                    ssb_per_burst=n_ss,
                    tau_db=tau,
                    tx_power_dbm=tx_power_dbm,
                    max_product_m=bound,
                    monotone=monotone,
                    cells=cells[tau],
                )
            )
    return entries


def _feasible_periods(entry: FeasibilityEntry, speed: float) -> List[int]:
    if entry.max_product_m is None:
        return []
    periods = sorted({cell.burst_period_ms for cell in entry.cells})
    # a failing cell on a mixed bound level stays excluded
    failed = {cell.burst_period_ms for cell in entry.cells if cell.speed_mps == speed and not cell.passed}
    return [p for p in periods if p not in failed and _product_key(speed * p * 1e-3) <= entry.max_product_m]


def recommend_config(
    region: Sequence[FeasibilityEntry],
    speed: float,
    rule: Literal["top-left", "min-energy"] = "top-left",
) -> Recommendation:
    """
    Pick the beam-management configuration for UEs moving at `speed`.

    top-left: smallest N_SS that has a feasible period, with its largest
    feasible T_SS. min-energy: the feasible pair with the smallest N_SS/T_SS
    (i.e. lowest SSB energy per unit time), ties to the smaller N_SS.
    """
    operating_points = {(entry.tau_db, entry.tx_power_dbm) for entry in region}
    if len(operating_points) != 1:
        raise ConfigurationError(
            f"recommendation needs a region for exactly one (tau, P_T) pair, got {sorted(operating_points)}"
        )
    tau_db, tx_power_dbm = operating_points.pop()

    options = [
        (entry.ssb_per_burst, period)
        for entry in sorted(region, key=lambda e: e.ssb_per_burst)
        for period in _feasible_periods(entry, speed)
    ]
    if not options:
        raise InfeasibleRecommendation(
            f"no (N_SS, T_SS) is feasible at v={speed} m/s for tau={tau_db} dB, P_T={tx_power_dbm} dBm"
        )

    if rule == "min-energy":
        n_ss, period = min(options, key=lambda o: (o[0] / o[1], o[0]))
    else:
        smallest = options[0][0]
        n_ss, period = smallest, max(p for n, p in options if n == smallest)

    return Recommendation(
        ssb_per_burst=n_ss,
        burst_period_ms=period,
        tau_db=tau_db,
        tx_power_dbm=tx_power_dbm,
        speed_mps=speed,
    )
