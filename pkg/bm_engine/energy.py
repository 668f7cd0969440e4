"""
UE receive-side power and energy for SSB reception.
"""

from dataclasses import dataclass
from typing import List

from pydantic import BaseModel, ConfigDict, Field

from bm_engine.array import sweep_directions
from bm_engine import timing


class PowerModel(BaseModel):
    """
    Power drawn by the UE front end while receiving. Components are in mW.
    """

    model_config = ConfigDict(frozen=True)

    lna_mw: float = Field(20.0, ge=0, description="Low noise amplifier")
    phase_shifter_mw: float = Field(30.0, ge=0, description="Phase shifter")
    mixer_mw: float = Field(19.0, ge=0, description="Mixer")
    local_oscillator_mw: float = Field(5.0, ge=0, description="Local oscillator")
    low_pass_filter_mw: float = Field(14.0, ge=0, description="Low pass filter")
    baseband_mw: float = Field(5.0, ge=0, description="Baseband amplifier")
    adc_mw: float = Field(200.0, ge=0, description="ADC, counted twice (I and Q)")
    combiner_mw: float = Field(0.0, ge=0, description="Combiner")
    ue_antennas: int = Field(2, ge=1, description="Receive antennas N_UE")

    @property
    def rf_chain_mw(self) -> float:
        return self.mixer_mw + self.local_oscillator_mw + self.low_pass_filter_mw + self.baseband_mw


def ue_power(pm: PowerModel) -> float:
    """
    P_UE = N_UE·(P_LNA + P_PS) + P_RF + P_C + 2·P_ADC, in watts.
    """
    total_mw = (
        pm.ue_antennas * (pm.lna_mw + pm.phase_shifter_mw)
        + pm.rf_chain_mw
        + pm.combiner_mw
        + 2.0 * pm.adc_mw
    )
    return total_mw * 1e-3


def ssb_energy(pm: PowerModel, numerology: int) -> float:
    """Energy to receive one SSB, P_UE·T_SSB."""
    return ue_power(pm) * timing.ssb_duration(numerology)


def sweep_energy(n_antennas: int, pm: PowerModel, numerology: int) -> float:
    """
    EC = S_D·P_UE·T_SSB for one full sweep with an N-antenna gNB, in joules.
    """
    return sweep_directions(n_antennas) * ssb_energy(pm, numerology)


def energy_per_time(pm: PowerModel, cfg: "timing.BurstConfig") -> float:
    """
    Average SSB reception power over time, P_UE·T_SSB·N_SS/T_SS, in watts.
    """
    return ssb_energy(pm, cfg.numerology) * cfg.ssb_per_burst / cfg.burst_period_s


@dataclass(frozen=True)
class EnergyRow:
    ssb_per_burst: int
    burst_period_ms: int
    n_gnb: int
    sweep_directions: int
    beam_management_time_s: float
    sweep_energy_j: float
    energy_per_time_w: float
    single_burst: bool


def energy_table(pm: PowerModel, cfg: "timing.BurstConfig") -> List[EnergyRow]:
    """
    Sweep size, T_BM, EC and EC̄_t of every candidate antenna count under
    one burst configuration.
    """
    per_time = energy_per_time(pm, cfg)
    rows = []
    for n in cfg.candidates:
        size = sweep_directions(n)
        rows.append(
            EnergyRow(
                ssb_per_burst=cfg.ssb_per_burst,
                burst_period_ms=cfg.burst_period_ms,
                n_gnb=n,
                sweep_directions=size,
                beam_management_time_s=timing.beam_management_time(size, cfg),
                sweep_energy_j=sweep_energy(n, pm, cfg.numerology),
                energy_per_time_w=per_time,
                single_burst=size <= cfg.ssb_per_burst,
            )
        )
    return rows
