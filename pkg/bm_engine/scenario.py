"""
Scenario definition: system configuration, UE deployment and the gNB codebook.
"""

from dataclasses import dataclass
from typing import List, Literal, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bm_engine.array import beamwidth, sweep_directions
from bm_engine.energy import PowerModel
from bm_engine.errors import ConfigurationError
from bm_engine.streams import RandomStream
from bm_engine.timing import NUMEROLOGIES

logger = logging.getLogger(__name__)

MAX_RESAMPLES = 1_000_000

Placement = Literal["uniform-area", "uniform-annulus"]
LosMode = Literal["blend", "bernoulli"]
LosDistance = Literal["2d", "3d"]
MisdetectionRule = Literal["best", "peak"]


class SystemConfig(BaseModel):
    """
    Indoor-factory scenario, radio link and UE power parameters, plus the
    model options that select between literal and alternative readings.
    """

    model_config = ConfigDict(frozen=True)

    # hall and deployment
    hall_length: float = Field(20.0, gt=0, description="L, m")
    hall_width: float = Field(20.0, gt=0, description="W, m")
    hall_height: float = Field(25.0, gt=0, description="H, m")
    gnb_height: float = Field(25.0, gt=0, description="h_gNB, m")
    ue_height: float = Field(1.5, gt=0, description="h_UE, m")
    clutter_size: float = Field(10.0, gt=0, description="d_c, m")
    clutter_height: float = Field(5.0, gt=0, description="h_c, m")
    clutter_density: float = Field(0.2, gt=0, lt=1, description="r, fraction")
    num_ues: int = Field(50, ge=1, description="K")
    speed: float = Field(1.0, ge=0, description="UE speed v, m/s")
    min_distance: float = Field(1.0, gt=0, description="d_min, m")
    placement: Placement = "uniform-area"

    # radio
    carrier_ghz: float = Field(28.0, gt=0, description="f_c, GHz")
    bandwidth_mhz: float = Field(50.0, gt=0, description="B, MHz")
    tx_power_dbm: float = Field(18.0, description="P_T, dBm")
    snr_threshold_db: float = Field(7.0, description="tau, dB")
    noise_psd_dbm_hz: float = Field(-174.0, description="N_0, dBm/Hz")
    noise_figure_db: float = Field(9.0, ge=0, description="NF, dB")
    numerology: int = Field(4, description="n")
    ue_gain_dbi: float = Field(0.0, description="G_UE, dBi")

    # channel options
    shadowing: bool = False
    shadow_sigma_los_db: float = Field(4.3, ge=0)
    shadow_sigma_nlos_db: float = Field(5.9, ge=0)
    los_mode: LosMode = "blend"
    los_distance: LosDistance = "2d"

    # optimizer options
    cap_at_peak: bool = True
    misdetection_rule: MisdetectionRule = "best"

    power: PowerModel = Field(default_factory=PowerModel)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "SystemConfig":
        if not self.ue_height < self.clutter_height < self.gnb_height:
            raise ValueError("heights must satisfy h_UE < h_c < h_gNB")
        if self.gnb_height > self.hall_height:
            raise ValueError("gNB height exceeds hall height")
        if self.numerology not in NUMEROLOGIES:
            raise ValueError(f"numerology must be one of {NUMEROLOGIES}")
        return self

    @property
    def carrier_frequency_hz(self) -> float:
        return self.carrier_ghz * 1e9

    @property
    def bandwidth_hz(self) -> float:
        return self.bandwidth_mhz * 1e6

    @property
    def ue_gain(self) -> float:
        return 10.0 ** (self.ue_gain_dbi / 10.0)

    @property
    def height_difference(self) -> float:
        return self.gnb_height - self.ue_height


@dataclass(frozen=True)
class UEState:
    distance: float
    azimuth: float
    speed: float
    distance_3d: float

    @classmethod
    def at(cls, distance: float, azimuth: float, config: SystemConfig) -> "UEState":
        if distance <= 0:
            raise ConfigurationError(f"UE distance must be positive, got {distance}")
        return cls(
            distance=float(distance),
            azimuth=float(azimuth),
            speed=config.speed,
            distance_3d=math.sqrt(config.height_difference ** 2 + distance ** 2),
        )


@dataclass(frozen=True)
class Codebook:
    n_antennas: int
    beamwidth: float
    boresights: Tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.boresights)


def build_codebook(n_antennas: int) -> Codebook:
    """
    Boresights k·Δ_3dB for k = 0..S_D−1, covering the full circle.
    """
    width = beamwidth(n_antennas)
    size = sweep_directions(n_antennas)
    return Codebook(
        n_antennas=n_antennas,
        beamwidth=width,
        boresights=tuple(k * width for k in range(size)),
    )


def _max_floor_distance(config: SystemConfig) -> float:
    if config.placement == "uniform-annulus":
        return 0.5 * min(config.hall_length, config.hall_width)
    return math.hypot(0.5 * config.hall_length, 0.5 * config.hall_width)


def _polar(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    distance = np.hypot(x, y)
    azimuth = np.mod(np.arctan2(y, x), 2.0 * np.pi)
    # mod can round a tiny negative angle up to exactly 2π
    azimuth = np.where(azimuth >= 2.0 * np.pi, 0.0, azimuth)
    return distance, azimuth


def sample_positions(config: SystemConfig, stream: RandomStream) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw K UE positions as (d_k, φ_k) arrays.

    uniform-area: independent x, y uniform over the L×W floor centred on the
    gNB projection; points closer than d_min are redrawn.
    uniform-annulus: uniform density over the annulus d_min ≤ d ≤ min(L, W)/2.
    """
    if config.hall_length <= 0 or config.hall_width <= 0:
        raise ConfigurationError("hall floor has zero area")
    if _max_floor_distance(config) <= config.min_distance:
        raise ConfigurationError(
            f"no floor point lies farther than d_min={config.min_distance} m from the gNB"
        )

    k = config.num_ues
    if config.placement == "uniform-annulus":
        outer = _max_floor_distance(config)
        radius_sq = stream.uniform(config.min_distance ** 2, outer ** 2, size=k)
        azimuth = stream.uniform(0.0, 2.0 * np.pi, size=k)
        azimuth = np.where(azimuth >= 2.0 * np.pi, 0.0, azimuth)
        return np.sqrt(radius_sq), azimuth

    half_l = 0.5 * config.hall_length
    half_w = 0.5 * config.hall_width
    x = stream.uniform(-half_l, half_l, size=k)
    y = stream.uniform(-half_w, half_w, size=k)
    distance, azimuth = _polar(x, y)

    resamples = 0
    rejected = np.flatnonzero(distance < config.min_distance)
    while rejected.size:
        resamples += rejected.size
        if resamples > MAX_RESAMPLES:
            raise ConfigurationError(
                f"UE placement needed more than {MAX_RESAMPLES} redraws; d_min is degenerate"
            )
        x_new = stream.uniform(-half_l, half_l, size=rejected.size)
        y_new = stream.uniform(-half_w, half_w, size=rejected.size)
        distance[rejected], azimuth[rejected] = _polar(x_new, y_new)
        rejected = rejected[distance[rejected] < config.min_distance]

    return distance, azimuth


def sample_deployment(config: SystemConfig, stream: RandomStream) -> List[UEState]:
    distance, azimuth = sample_positions(config, stream)
    return [UEState.at(d, phi, config) for d, phi in zip(distance, azimuth)]
