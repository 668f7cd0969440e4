import pytest

from bm_engine.array import sweep_directions
from bm_engine.energy import PowerModel, energy_per_time, energy_table, ssb_energy, sweep_energy, ue_power
from bm_engine.timing import BURST_PERIOD_CHOICES_MS, SSB_PER_BURST_CHOICES, BurstConfig, ssb_duration


def test_default_ue_power():
    assert ue_power(PowerModel()) == pytest.approx(0.543)


def test_ue_power_scales_with_antennas():
    one = ue_power(PowerModel(ue_antennas=1))
    two = ue_power(PowerModel(ue_antennas=2))
    assert two - one == pytest.approx(0.050)


def test_ssb_energy():
    assert ssb_energy(PowerModel(), 4) == pytest.approx(0.543 * ssb_duration(4))


def test_sweep_energy_strictly_increasing():
    pm = PowerModel()
    energies = [sweep_energy(n, pm, 4) for n in range(2, 65)]
    assert all(b > a for a, b in zip(energies, energies[1:]))
    assert energies[0] == pytest.approx(sweep_directions(2) * ssb_energy(pm, 4))


def test_energy_per_time_linear():
    pm = PowerModel()
    base = energy_per_time(pm, BurstConfig(ssb_per_burst=8, burst_period_ms=20))
    assert energy_per_time(pm, BurstConfig(ssb_per_burst=16, burst_period_ms=20)) == pytest.approx(2 * base)
    assert energy_per_time(pm, BurstConfig(ssb_per_burst=8, burst_period_ms=80)) == pytest.approx(base / 4)
    assert energy_per_time(pm, BurstConfig(ssb_per_burst=32, burst_period_ms=80)) == pytest.approx(base)


def test_energy_table():
    cfg = BurstConfig(ssb_per_burst=16, burst_period_ms=40, candidates=(2, 5, 6, 64))
    rows = energy_table(PowerModel(), cfg)
    assert [row.n_gnb for row in rows] == [2, 5, 6, 64]
    assert [row.single_burst for row in rows] == [True, True, False, False]
    assert rows[3].sweep_directions == 202
    assert rows[3].beam_management_time_s > 0.040 * 12


def test_energy_per_time_over_burst_grid():
    pm = PowerModel()
    values = {
        (n_ss, period): energy_per_time(pm, BurstConfig(ssb_per_burst=n_ss, burst_period_ms=period))
        for n_ss in SSB_PER_BURST_CHOICES
        for period in BURST_PERIOD_CHOICES_MS
    }
    assert len(values) == 24
    assert min(values, key=values.get) == (8, 160)
    assert max(values, key=values.get) == (64, 5)
    assert values[(64, 5)] / values[(8, 160)] == pytest.approx(256.0)
