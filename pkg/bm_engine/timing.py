"""
SSB, burst and sweep time arithmetic.

Durations are built from whole OFDM symbol counts multiplied once by the
symbol duration, so closed-form and schedule-based computations agree exactly.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from bm_engine.array import MAX_ANTENNAS, MIN_ANTENNAS, sweep_directions
from bm_engine.errors import ConfigurationError

SSB_PER_BURST_CHOICES = (8, 16, 32, 64)
BURST_PERIOD_CHOICES_MS = (5, 10, 20, 40, 80, 160)
NUMEROLOGIES = (0, 1, 2, 3, 4)

SYMBOLS_PER_SSB = 4
SYMBOLS_PER_SLOT = 14
BASE_SYMBOL_US = 71.45


def check_numerology(numerology: int) -> int:
    if numerology not in NUMEROLOGIES:
        raise ConfigurationError(f"numerology {numerology} not in {NUMEROLOGIES}")
    return int(numerology)


class BurstConfig(BaseModel):
    """
    Beam-management knobs: burst size, burst period, numerology and the
    gNB antenna counts the optimizer may choose from.
    """

    model_config = ConfigDict(frozen=True)

    ssb_per_burst: int = Field(8, description="N_SS, SSBs per burst")
    burst_period_ms: int = Field(20, description="T_SS, burst periodicity in ms")
    numerology: int = Field(4, description="5G NR numerology n")
    candidates: Tuple[int, ...] = Field(
        tuple(range(MIN_ANTENNAS, MAX_ANTENNAS + 1)),
        description="Candidate gNB antenna counts, ascending",
    )

    @field_validator("ssb_per_burst")
    @classmethod
    def _check_ssb_per_burst(cls, value: int) -> int:
        if value not in SSB_PER_BURST_CHOICES:
            raise ValueError(f"must be one of {SSB_PER_BURST_CHOICES}")
        return value

    @field_validator("burst_period_ms")
    @classmethod
    def _check_burst_period(cls, value: int) -> int:
        if value not in BURST_PERIOD_CHOICES_MS:
            raise ValueError(f"must be one of {BURST_PERIOD_CHOICES_MS}")
        return value

    @field_validator("numerology")
    @classmethod
    def _check_numerology(cls, value: int) -> int:
        if value not in NUMEROLOGIES:
            raise ValueError(f"must be one of {NUMEROLOGIES}")
        return value

    @field_validator("candidates")
    @classmethod
    def _check_candidates(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("at least one candidate antenna count is required")
        if list(value) != sorted(set(value)):
            raise ValueError("candidates must be strictly increasing")
        for n in value:
            if not MIN_ANTENNAS <= n <= MAX_ANTENNAS:
                raise ValueError(f"antenna count {n} outside [{MIN_ANTENNAS}, {MAX_ANTENNAS}]")
        return value

    @property
    def burst_period_s(self) -> float:
        return self.burst_period_ms * 1e-3


@dataclass(frozen=True)
class SweepTiming:
    symbol: float
    ssb: float
    slot: float
    last_burst_ssbs: int
    last_burst: float
    beam_management: float


def symbol_duration(numerology: int) -> float:
    """OFDM symbol duration 71.45/2ⁿ µs, in seconds."""
    return BASE_SYMBOL_US / 2 ** check_numerology(numerology) * 1e-6


def ssb_duration(numerology: int) -> float:
    return SYMBOLS_PER_SSB * symbol_duration(numerology)


def slot_duration(numerology: int) -> float:
    return SYMBOLS_PER_SLOT * symbol_duration(numerology)


def bursts_needed(sweep_size, ssb_per_burst: int):
    """ceil(S_D / N_SS), integer arithmetic; accepts ints or int arrays."""
    return -(-np.asarray(sweep_size) // ssb_per_burst)


def last_burst_ssbs(sweep_size, ssb_per_burst: int):
    """N_SS,ℓ = S_D − N_SS·(ceil(S_D/N_SS) − 1)."""
    return np.asarray(sweep_size) - ssb_per_burst * (bursts_needed(sweep_size, ssb_per_burst) - 1)


def last_burst_symbols(remaining):
    """
    Symbols from the start of the last burst to the end of its final SSB.

    Even count: (N/2)·14 − 2. Odd count: floor(N/2)·14 + 6.
    """
    remaining = np.asarray(remaining)
    half = remaining // 2
    return np.where(
        remaining % 2 == 0,
        half * SYMBOLS_PER_SLOT - 2,
        half * SYMBOLS_PER_SLOT + 6,
    )


def last_burst_duration(sweep_size: int, ssb_per_burst: int, numerology: int) -> float:
    """T_ℓ, the time to send the SSBs left over for the last burst."""
    if sweep_size < 1:
        raise ConfigurationError(f"sweep size must be at least 1, got {sweep_size}")
    remaining = last_burst_ssbs(sweep_size, ssb_per_burst)
    return float(last_burst_symbols(remaining)) * symbol_duration(numerology)


def beam_management_times(sweep_sizes, cfg: BurstConfig) -> np.ndarray:
    """
    Vectorized T_BM = T_SS·(ceil(S_D/N_SS) − 1) + T_ℓ for an array of S_D.
    """
    sweep_sizes = np.asarray(sweep_sizes)
    full_bursts = bursts_needed(sweep_sizes, cfg.ssb_per_burst) - 1
    remaining = last_burst_ssbs(sweep_sizes, cfg.ssb_per_burst)
    tail = last_burst_symbols(remaining) * symbol_duration(cfg.numerology)
    return cfg.burst_period_s * full_bursts + tail


def beam_management_time(sweep_size: int, cfg: BurstConfig) -> float:
    if sweep_size < 1:
        raise ConfigurationError(f"sweep size must be at least 1, got {sweep_size}")
    return float(beam_management_times(sweep_size, cfg))


def sweep_timing(sweep_size: int, cfg: BurstConfig) -> SweepTiming:
    remaining = int(last_burst_ssbs(sweep_size, cfg.ssb_per_burst))
    return SweepTiming(
        symbol=symbol_duration(cfg.numerology),
        ssb=ssb_duration(cfg.numerology),
        slot=slot_duration(cfg.numerology),
        last_burst_ssbs=remaining,
        last_burst=last_burst_duration(sweep_size, cfg.ssb_per_burst, cfg.numerology),
        beam_management=beam_management_time(sweep_size, cfg),
    )


def single_burst_limit(ssb_per_burst: int) -> int:
    """
    Largest antenna count whose full sweep fits in one burst (S_D ≤ N_SS).
    T_SS has no effect on T_BM at or below this count.
    """
    limit = MIN_ANTENNAS - 1
    for n in range(MIN_ANTENNAS, MAX_ANTENNAS + 1):
        if sweep_directions(n) <= ssb_per_burst:
            limit = n
    return limit
