from pathlib import Path
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from bm_engine.array import MAX_ANTENNAS, MIN_ANTENNAS
from bm_engine.scenario import SystemConfig
from bm_engine.simulation import DEFAULT_EPSILON, RegionRule
from bm_engine.timing import BURST_PERIOD_CHOICES_MS, SSB_PER_BURST_CHOICES

Subcommand = Literal["simulate", "curves", "sweep", "region", "recommend", "energy"]


def _non_empty(value: tuple) -> tuple:
    if not value:
        raise ValueError("needs at least one value")
    return value


class SweepAxes(BaseModel):
    """Lists of values the experiment grid runs over."""

    model_config = ConfigDict(frozen=True)

    speeds: Tuple[float, ...] = Field((1.0,), description="v, m/s")
    burst_periods_ms: Tuple[int, ...] = Field((20,), description="T_SS, ms")
    ssb_per_burst: Tuple[int, ...] = Field((8,), description="N_SS")
    taus_db: Tuple[float, ...] = Field((7.0,), description="tau, dB")
    tx_powers_dbm: Tuple[float, ...] = Field((18.0,), description="P_T, dBm")
    antennas: Tuple[int, ...] = Field(
        tuple(range(MIN_ANTENNAS, MAX_ANTENNAS + 1)), description="Candidate N_gNB"
    )

    @field_validator("speeds")
    @classmethod
    def _check_speeds(cls, value):
        _non_empty(value)
        for speed in value:
            if speed < 0:
                raise ValueError(f"speed {speed} is negative")
        return value

    @field_validator("burst_periods_ms")
    @classmethod
    def _check_periods(cls, value):
        _non_empty(value)
        for period in value:
            if period not in BURST_PERIOD_CHOICES_MS:
                raise ValueError(f"{period} not in {BURST_PERIOD_CHOICES_MS}")
        return value

    @field_validator("ssb_per_burst")
    @classmethod
    def _check_ssb_per_burst(cls, value):
        _non_empty(value)
        for n_ss in value:
            if n_ss not in SSB_PER_BURST_CHOICES:
                raise ValueError(f"{n_ss} not in {SSB_PER_BURST_CHOICES}")
        return value

    @field_validator("taus_db", "tx_powers_dbm")
    @classmethod
    def _check_levels(cls, value):
        return _non_empty(value)

    @field_validator("antennas")
    @classmethod
    def _check_antennas(cls, value):
        _non_empty(value)
        if list(value) != sorted(set(value)):
            raise ValueError("must be strictly increasing")
        for n in value:
            if not MIN_ANTENNAS <= n <= MAX_ANTENNAS:
                raise ValueError(f"{n} outside [{MIN_ANTENNAS}, {MAX_ANTENNAS}]")
        return value


class RunSettings(BaseModel):
    """
    Everything a config file resolves to. The scalar speed, τ and P_T of
    `config` are the first entries of the matching axes.
    """

    model_config = ConfigDict(frozen=True)

    config: SystemConfig = Field(default_factory=SystemConfig)
    axes: SweepAxes = Field(default_factory=SweepAxes)
    trials: int = Field(10_000, ge=1)
    epsilon: float = Field(DEFAULT_EPSILON, ge=0, lt=1)
    region_rule: RegionRule = "infeasible"


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    settings: RunSettings
    output: Optional[Path] = None
    threads: int = Field(1, ge=1)

    @property
    def seed(self) -> int:
        return self.settings.config.seed
