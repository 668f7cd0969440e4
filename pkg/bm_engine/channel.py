"""
Indoor-factory (sparse clutter, high gNB) link model and per-UE SNR.

Path loss and LoS probability coefficients are those of the 3GPP TR 38.901
InF-SH sub-scenario. All dB quantities are converted to linear at the
function boundary; the SNR itself is computed in the linear domain.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np

from bm_engine.errors import ConfigurationError
from bm_engine.scenario import SystemConfig, UEState
from bm_engine.streams import RandomStream


class LinkCondition(str, Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class FadingDraw:
    """
    Random link state of one UE for one trial.

    `los_gain` and `nlos_gain` are |h|² of CN(0, 1) draws. The standard-normal
    shadowing draws and the LoS uniform are only read when shadowing or the
    Bernoulli LoS mode is switched on.
    """

    los_gain: float
    nlos_gain: float
    los_shadow: float = 0.0
    nlos_shadow: float = 0.0
    los_uniform: float = 0.5

    def __post_init__(self):
        if self.los_gain < 0 or self.nlos_gain < 0:
            raise ConfigurationError("fading power gains must be non-negative")


@dataclass(frozen=True)
class LinkDraws:
    """Array form of FadingDraw; every field has the same shape."""

    los_gain: np.ndarray
    nlos_gain: np.ndarray
    los_shadow: np.ndarray
    nlos_shadow: np.ndarray
    los_uniform: np.ndarray

    @classmethod
    def from_draws(cls, draws: Sequence[FadingDraw]) -> "LinkDraws":
        return cls(
            los_gain=np.array([d.los_gain for d in draws], dtype=float),
            nlos_gain=np.array([d.nlos_gain for d in draws], dtype=float),
            los_shadow=np.array([d.los_shadow for d in draws], dtype=float),
            nlos_shadow=np.array([d.nlos_shadow for d in draws], dtype=float),
            los_uniform=np.array([d.los_uniform for d in draws], dtype=float),
        )

    def to_draws(self) -> List[FadingDraw]:
        return [
            FadingDraw(float(a), float(b), float(c), float(d), float(e))
            for a, b, c, d, e in zip(
                self.los_gain, self.nlos_gain, self.los_shadow, self.nlos_shadow, self.los_uniform
            )
        ]

    @classmethod
    def stack(cls, batches: Sequence["LinkDraws"]) -> "LinkDraws":
        return cls(
            los_gain=np.stack([b.los_gain for b in batches]),
            nlos_gain=np.stack([b.nlos_gain for b in batches]),
            los_shadow=np.stack([b.los_shadow for b in batches]),
            nlos_shadow=np.stack([b.nlos_shadow for b in batches]),
            los_uniform=np.stack([b.los_uniform for b in batches]),
        )


@dataclass(frozen=True)
class LinkBudget:
    pl_los_db: float
    pl_nlos_db: float
    los_probability: float
    snr: float


def db_to_linear(value_db):
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


def los_probability(d_2d, clutter_size: float, clutter_density: float):
    """
    InF-SH LoS probability exp(−d/k_sub) with k_sub = −d_c / ln(1 − r).
    """
    if not 0.0 < clutter_density < 1.0:
        raise ConfigurationError(f"clutter density must lie in (0, 1), got {clutter_density}")
    if clutter_size <= 0:
        raise ConfigurationError(f"clutter size must be positive, got {clutter_size}")
    k_sub = -clutter_size / np.log1p(-clutter_density)
    result = np.exp(-np.asarray(d_2d, dtype=float) / k_sub)
    return float(result) if result.ndim == 0 else result


def _los_path_loss(d_3d, fc_ghz: float):
    return 31.84 + 21.50 * np.log10(d_3d) + 19.00 * np.log10(fc_ghz)


def _nlos_path_loss(d_3d, fc_ghz: float):
    sh = 32.4 + 23.0 * np.log10(d_3d) + 20.0 * np.log10(fc_ghz)
    return np.maximum(sh, _los_path_loss(d_3d, fc_ghz))


def path_loss(d_3d, carrier_hz: float, condition: LinkCondition):
    """
    Path loss in dB. NLoS is lower-bounded by the LoS value at the same distance.
    """
    d_3d = np.asarray(d_3d, dtype=float)
    if np.any(d_3d < 1.0):
        raise ConfigurationError("path loss is only defined for d_3D >= 1 m")
    fc_ghz = carrier_hz / 1e9
    if LinkCondition(condition) is LinkCondition.LOS:
        result = _los_path_loss(d_3d, fc_ghz)
    else:
        result = _nlos_path_loss(d_3d, fc_ghz)
    return float(result) if result.ndim == 0 else result


def noise_power_dbm(config: SystemConfig) -> float:
    """N_0 + 10·log10(B) + NF."""
    return float(config.noise_psd_dbm_hz + 10.0 * np.log10(config.bandwidth_hz) + config.noise_figure_db)


def sample_link_draws(stream: RandomStream, size) -> LinkDraws:
    """
    Draw independent link states. Fading gains are squared magnitudes of
    circularly-symmetric complex Gaussians with unit variance.
    """
    scale = np.sqrt(0.5)
    h_los = stream.normal(0.0, scale, size=size) + 1j * stream.normal(0.0, scale, size=size)
    h_nlos = stream.normal(0.0, scale, size=size) + 1j * stream.normal(0.0, scale, size=size)
    return LinkDraws(
        los_gain=np.abs(h_los) ** 2,
        nlos_gain=np.abs(h_nlos) ** 2,
        los_shadow=stream.standard_normal(size=size),
        nlos_shadow=stream.standard_normal(size=size),
        los_uniform=stream.random(size=size),
    )


def sample_fading(stream: RandomStream) -> FadingDraw:
    return sample_link_draws(stream, 1).to_draws()[0]


def unit_snr(d_2d, d_3d, links: LinkDraws, config: SystemConfig):
    """
    Vectorized SNR at unit gNB gain, excluding P_T (linear).

    [ℋ_L·P_LoS + ℋ_N·(1 − P_LoS)]·G_UE / (N_0·B·NF), with
    ℋ_j = |h_j|²·10^(−PL_j/10). Distances and link arrays share one shape.
    """
    d_2d = np.asarray(d_2d, dtype=float)
    d_3d = np.asarray(d_3d, dtype=float)
    fc_ghz = config.carrier_ghz

    pl_los_db = _los_path_loss(d_3d, fc_ghz)
    pl_nlos_db = _nlos_path_loss(d_3d, fc_ghz)
    if config.shadowing:
        pl_los_db = pl_los_db + config.shadow_sigma_los_db * links.los_shadow
        pl_nlos_db = pl_nlos_db + config.shadow_sigma_nlos_db * links.nlos_shadow

    h_los = links.los_gain * db_to_linear(-pl_los_db)
    h_nlos = links.nlos_gain * db_to_linear(-pl_nlos_db)

    los_argument = d_2d if config.los_distance == "2d" else d_3d
    p_los = los_probability(los_argument, config.clutter_size, config.clutter_density)
    if config.los_mode == "bernoulli":
        p_los = (links.los_uniform < p_los).astype(float)

    channel = h_los * p_los + h_nlos * (1.0 - p_los)
    return channel * config.ue_gain / db_to_linear(noise_power_dbm(config))


def link_snr(d_2d, d_3d, gain_gnb, links: LinkDraws, config: SystemConfig):
    """γ_k = unit SNR scaled by the gNB array gain; `gain_gnb` broadcasts."""
    return unit_snr(d_2d, d_3d, links, config) * np.asarray(gain_gnb, dtype=float)


def snr(ue: UEState, gain_gnb: float, fading: FadingDraw, config: SystemConfig) -> float:
    links = LinkDraws.from_draws([fading])
    value = link_snr(ue.distance, ue.distance_3d, gain_gnb, links, config)
    return float(np.asarray(value).reshape(-1)[0])


def link_budget(ue: UEState, config: SystemConfig) -> LinkBudget:
    """Link budget at unit fading and unit gNB gain."""
    los_argument = ue.distance if config.los_distance == "2d" else ue.distance_3d
    unit = FadingDraw(los_gain=1.0, nlos_gain=1.0)
    return LinkBudget(
        pl_los_db=path_loss(ue.distance_3d, config.carrier_frequency_hz, LinkCondition.LOS),
        pl_nlos_db=path_loss(ue.distance_3d, config.carrier_frequency_hz, LinkCondition.NLOS),
        los_probability=los_probability(los_argument, config.clutter_size, config.clutter_density),
        snr=snr(ue, 1.0, unit, config),
    )
