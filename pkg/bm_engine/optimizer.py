"""
Per-trial antenna-count optimization.

For one realization of UE positions and fading, find the smallest gNB
antenna count N whose sweep leaves every UE at P_T·γ_k ≥ τ. Sweep energy is
strictly increasing in N, so the first feasible N of an upward scan is the
energy minimizer. The scan stops at N_M, the antenna count that maximizes
the UE-averaged gain, unless `cap_at_peak` is switched off.

The array kernels work on any leading batch shape: a single trial has UE
arrays of shape (K,), a batch of trials (T, K). Candidate antenna counts
become the second-to-last axis.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from bm_engine.array import array_factor, check_antennas, wrap_angle
from bm_engine.channel import FadingDraw, LinkDraws, db_to_linear, linear_to_db, unit_snr
from bm_engine.errors import ConfigurationError
from bm_engine.mobility import initial_offsets
from bm_engine.scenario import SystemConfig, UEState
from bm_engine.timing import BurstConfig, beam_management_times

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialOutcome:
    feasible: bool
    n_star: Optional[int]
    margins_db: Tuple[float, ...]
    misdetected_fraction: float
    peak_antennas: int


@dataclass(frozen=True)
class CandidateEvaluation:
    """
    Everything the scan needs, per candidate N and UE.

    `offset` and `gain` have shape (..., M, K); `unit_snr` (..., 1, K) is the
    link SNR before array gain and P_T.
    """

    candidates: np.ndarray
    offset: np.ndarray
    gain: np.ndarray
    unit_snr: np.ndarray

    def snr(self, tx_power_dbm: float) -> np.ndarray:
        """P_T·γ_k for every candidate and UE, linear."""
        return db_to_linear(tx_power_dbm) * self.unit_snr * self.gain

    @property
    def mean_gain(self) -> np.ndarray:
        return self.gain.mean(axis=-1)

    @property
    def peak_index(self) -> np.ndarray:
        # argmax keeps the first maximum, i.e. the smallest N on ties
        return np.asarray(np.argmax(self.mean_gain, axis=-1))


@dataclass(frozen=True)
class ScanResult:
    """Batch scan output; one entry per trial."""

    feasible: np.ndarray
    n_star: np.ndarray
    star_index: np.ndarray
    misdetected: np.ndarray
    peak_antennas: np.ndarray


def evaluate_candidates(
    distance: np.ndarray,
    azimuth: np.ndarray,
    links: LinkDraws,
    config: SystemConfig,
    cfg: BurstConfig,
    candidates: Optional[Sequence[int]] = None,
) -> CandidateEvaluation:
    """
    Build codebook → θ_i → S_D → T_BM → θ_v → θ_k → G_gNB → γ_k for every
    candidate antenna count at once.
    """
    n = np.asarray(candidates if candidates is not None else cfg.candidates, dtype=int)
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ConfigurationError("UE distances must be positive")

    sweep_sizes = np.ceil(np.pi * n).astype(int)
    bm_times = beam_management_times(sweep_sizes, cfg)

    d = distance[..., np.newaxis, :]
    phi = np.asarray(azimuth, dtype=float)[..., np.newaxis, :]
    theta_i = initial_offsets(phi, n[:, np.newaxis])
    theta_v = config.speed * bm_times[:, np.newaxis] / d
    theta = np.abs(theta_v + theta_i)
    gain = array_factor(n[:, np.newaxis], wrap_angle(theta))

    d_3d = np.sqrt(config.height_difference ** 2 + distance * distance)
    base = unit_snr(distance, d_3d, links, config)[..., np.newaxis, :]

    return CandidateEvaluation(candidates=n, offset=theta, gain=gain, unit_snr=base)


def scan(
    evaluation: CandidateEvaluation,
    config: SystemConfig,
    tau_db: Optional[float] = None,
    tx_power_dbm: Optional[float] = None,
) -> ScanResult:
    """
    Upward scan over candidates for every trial in the batch.
    """
    tau_db = config.snr_threshold_db if tau_db is None else tau_db
    tx_power_dbm = config.tx_power_dbm if tx_power_dbm is None else tx_power_dbm

    satisfied = evaluation.snr(tx_power_dbm) >= db_to_linear(tau_db)
    all_satisfied = satisfied.all(axis=-1)
    failing = 1.0 - satisfied.mean(axis=-1)

    m = evaluation.candidates.size
    peak_index = evaluation.peak_index
    if config.cap_at_peak:
        admissible = np.arange(m) <= peak_index[..., np.newaxis]
    else:
        admissible = np.ones_like(all_satisfied, dtype=bool)

    feasible_mask = all_satisfied & admissible
    feasible = feasible_mask.any(axis=-1)
    star_index = np.where(feasible, np.argmax(feasible_mask, axis=-1), -1)
    n_star = np.where(feasible, evaluation.candidates[np.maximum(star_index, 0)], 0)

    if config.misdetection_rule == "peak":
        at_peak = np.take_along_axis(failing, peak_index[..., np.newaxis], axis=-1)[..., 0]
        misdetected = np.where(feasible, 0.0, at_peak)
    else:
        misdetected = np.where(admissible, failing, np.inf).min(axis=-1)

    return ScanResult(
        feasible=feasible,
        n_star=n_star,
        star_index=star_index,
        misdetected=misdetected,
        peak_antennas=evaluation.candidates[peak_index],
    )


def trial_arrays(ues: Sequence[UEState], fadings: Sequence[FadingDraw]) -> Tuple[np.ndarray, np.ndarray, LinkDraws]:
    if len(ues) != len(fadings):
        raise ConfigurationError(f"{len(ues)} UEs but {len(fadings)} fading draws")
    distance = np.array([ue.distance for ue in ues], dtype=float)
    azimuth = np.array([ue.azimuth for ue in ues], dtype=float)
    return distance, azimuth, LinkDraws.from_draws(fadings)


def _evaluate_trial(ues, fadings, config, cfg, candidates=None) -> CandidateEvaluation:
    distance, azimuth, links = trial_arrays(ues, fadings)
    # every UE shares one speed per trial; the UE records carry it
    if ues and ues[0].speed != config.speed:
        config = config.model_copy(update={"speed": ues[0].speed})
    return evaluate_candidates(distance, azimuth, links, config, cfg, candidates)


def evaluate_candidate(
    n_antennas: int,
    ues: Sequence[UEState],
    fadings: Sequence[FadingDraw],
    config: SystemConfig,
    cfg: BurstConfig,
) -> List[float]:
    """
    P_T·γ_k (linear) of every UE when the gNB sweeps with `n_antennas`.
    """
    check_antennas(n_antennas)
    evaluation = _evaluate_trial(ues, fadings, config, cfg, candidates=[n_antennas])
    return evaluation.snr(config.tx_power_dbm)[0].tolist()


def gain_peak_antennas(
    ues: Sequence[UEState],
    fadings: Sequence[FadingDraw],
    config: SystemConfig,
    cfg: BurstConfig,
) -> int:
    """N_M: the candidate maximizing the UE-averaged gNB gain."""
    evaluation = _evaluate_trial(ues, fadings, config, cfg)
    return int(evaluation.candidates[evaluation.peak_index])


def misdetection_fraction(
    ues: Sequence[UEState],
    fadings: Sequence[FadingDraw],
    config: SystemConfig,
    cfg: BurstConfig,
) -> float:
    evaluation = _evaluate_trial(ues, fadings, config, cfg)
    return float(scan(evaluation, config).misdetected)


def solve_trial(
    ues: Sequence[UEState],
    fadings: Sequence[FadingDraw],
    config: SystemConfig,
    cfg: BurstConfig,
) -> TrialOutcome:
    """
    Smallest admissible N satisfying every SNR constraint, or an infeasible
    outcome with the misdetected fraction.
    """
    evaluation = _evaluate_trial(ues, fadings, config, cfg)
    result = scan(evaluation, config)
    feasible = bool(result.feasible)

    margins: Tuple[float, ...] = ()
    if feasible:
        row = evaluation.snr(config.tx_power_dbm)[int(result.star_index)]
        margins = tuple((linear_to_db(row) - config.snr_threshold_db).tolist())

    outcome = TrialOutcome(
        feasible=feasible,
        n_star=int(result.n_star) if feasible else None,
        margins_db=margins,
        misdetected_fraction=float(result.misdetected),
        peak_antennas=int(result.peak_antennas),
    )
    logger.debug(f"Trial solved: feasible={outcome.feasible} N*={outcome.n_star} N_M={outcome.peak_antennas}")
    return outcome
