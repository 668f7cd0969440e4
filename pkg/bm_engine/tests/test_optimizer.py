import numpy as np
import pytest
from numpy.testing import assert_allclose

from bm_engine.array import gain_at_offset
from bm_engine.channel import snr
from bm_engine.energy import PowerModel, sweep_energy
from bm_engine.errors import ConfigurationError
from bm_engine.mobility import initial_offset, mobility_offset, total_offset
from bm_engine.optimizer import (
    evaluate_candidate,
    evaluate_candidates,
    gain_peak_antennas,
    misdetection_fraction,
    solve_trial,
    trial_arrays,
)
from bm_engine.scenario import SystemConfig, build_codebook
from bm_engine.simulation import draw_trial
from bm_engine.timing import BurstConfig, beam_management_time


def exhaustive_n_star(ues, fadings, config, cfg):
    """argmin of EC over every feasible N up to N_M, by enumeration."""
    evaluation = evaluate_candidates(*trial_arrays(ues, fadings), config, cfg)
    snr_table = evaluation.snr(config.tx_power_dbm)
    mean_gain = evaluation.gain.mean(axis=-1)
    peak = cfg.candidates[int(np.argmax(mean_gain))]
    threshold = 10 ** (config.snr_threshold_db / 10)
    feasible = [
        n for n, row in zip(cfg.candidates, snr_table) if n <= peak and np.all(row >= threshold)
    ]
    if not feasible:
        return None
    return min(feasible, key=lambda n: sweep_energy(n, config.power, cfg.numerology))


@pytest.mark.parametrize("tau_db, period", [(7.0, 20), (10.0, 160)])
def test_scan_matches_exhaustive_search(tau_db, period):
    config = SystemConfig(snr_threshold_db=tau_db, speed=1.0)
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=period)
    for index in range(1000):
        ues, fadings = draw_trial(config, 21, index)
        outcome = solve_trial(ues, fadings, config, cfg)
        assert outcome.n_star == exhaustive_n_star(ues, fadings, config, cfg)


def test_vectorized_snr_matches_scalar_pipeline():
    config = SystemConfig(speed=3.0, num_ues=6)
    cfg = BurstConfig(ssb_per_burst=16, burst_period_ms=40)
    ues, fadings = draw_trial(config, 2, 0)
    tx_linear = 10 ** (config.tx_power_dbm / 10)
    for n in (2, 9, 33, 64):
        codebook = build_codebook(n)
        bm_time = beam_management_time(codebook.size, cfg)
        expected = []
        for ue, fading in zip(ues, fadings):
            theta = total_offset(
                initial_offset(ue.azimuth, codebook),
                mobility_offset(ue.speed, bm_time, ue.distance),
            )
            expected.append(tx_linear * snr(ue, gain_at_offset(n, theta), fading, config))
        assert_allclose(evaluate_candidate(n, ues, fadings, config, cfg), expected, rtol=1e-9)


def test_vacuous_threshold_picks_smallest_array():
    config = SystemConfig(snr_threshold_db=-200.0)
    cfg = BurstConfig()
    ues, fadings = draw_trial(config, 0, 0)
    outcome = solve_trial(ues, fadings, config, cfg)
    assert outcome.feasible
    assert outcome.n_star == 2
    assert outcome.misdetected_fraction == 0.0
    assert len(outcome.margins_db) == config.num_ues
    assert min(outcome.margins_db) > 0


def test_unreachable_threshold():
    config = SystemConfig(snr_threshold_db=200.0)
    cfg = BurstConfig()
    ues, fadings = draw_trial(config, 0, 0)
    outcome = solve_trial(ues, fadings, config, cfg)
    assert not outcome.feasible
    assert outcome.n_star is None
    assert outcome.margins_db == ()
    assert outcome.misdetected_fraction == 1.0
    assert misdetection_fraction(ues, fadings, config, cfg) == 1.0


def test_margins_non_negative_when_feasible():
    config = SystemConfig()
    cfg = BurstConfig()
    for index in range(50):
        outcome = solve_trial(*draw_trial(config, 4, index), config, cfg)
        if outcome.feasible:
            assert min(outcome.margins_db) >= -1e-9
            assert outcome.n_star <= outcome.peak_antennas
            assert outcome.misdetected_fraction == 0.0
        else:
            assert 0.0 < outcome.misdetected_fraction <= 1.0


def test_uncapped_scan_keeps_capped_answer():
    capped = SystemConfig(speed=2.0)
    uncapped = SystemConfig(speed=2.0, cap_at_peak=False)
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=80)
    for index in range(100):
        ues, fadings = draw_trial(capped, 6, index)
        first = solve_trial(ues, fadings, capped, cfg)
        second = solve_trial(ues, fadings, uncapped, cfg)
        if first.feasible:
            assert second.n_star == first.n_star
        assert second.misdetected_fraction <= first.misdetected_fraction


def test_peak_rule_counts_failures_at_peak():
    config = SystemConfig(speed=5.0, snr_threshold_db=10.0, misdetection_rule="peak")
    best = SystemConfig(speed=5.0, snr_threshold_db=10.0)
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=160)
    for index in range(50):
        ues, fadings = draw_trial(config, 1, index)
        at_peak = solve_trial(ues, fadings, config, cfg)
        at_best = solve_trial(ues, fadings, best, cfg)
        if at_peak.feasible:
            assert at_peak.misdetected_fraction == 0.0
        assert at_best.misdetected_fraction <= at_peak.misdetected_fraction


def test_peak_antennas_in_candidates():
    config = SystemConfig(speed=2.0)
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=160)
    ues, fadings = draw_trial(config, 3, 0)
    peak = gain_peak_antennas(ues, fadings, config, cfg)
    assert peak in cfg.candidates
    assert solve_trial(ues, fadings, config, cfg).peak_antennas == peak


def test_evaluate_candidate_rejects_bad_antenna_count():
    config = SystemConfig(num_ues=3)
    ues, fadings = draw_trial(config, 0, 0)
    with pytest.raises(ConfigurationError):
        evaluate_candidate(1, ues, fadings, config, BurstConfig())


def test_mismatched_inputs():
    config = SystemConfig(num_ues=3)
    ues, fadings = draw_trial(config, 0, 0)
    with pytest.raises(ConfigurationError):
        solve_trial(ues, fadings[:2], config, BurstConfig())


@pytest.mark.parametrize(
    "power",
    [
        PowerModel(combiner_mw=75.0),
        PowerModel(ue_antennas=8),
        PowerModel(
            lna_mw=60.0,
            phase_shifter_mw=90.0,
            mixer_mw=57.0,
            local_oscillator_mw=15.0,
            low_pass_filter_mw=42.0,
            baseband_mw=15.0,
            adc_mw=600.0,
        ),
    ],
)
def test_n_star_ignores_power_model(power):
    base = SystemConfig(speed=2.0)
    other = base.model_copy(update={"power": power})
    cfg = BurstConfig(ssb_per_burst=16, burst_period_ms=40)
    for index in range(100):
        ues, fadings = draw_trial(base, 8, index)
        assert solve_trial(ues, fadings, other, cfg).n_star == solve_trial(ues, fadings, base, cfg).n_star


def test_more_transmit_power_never_hurts():
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=80)
    levels = [SystemConfig(speed=2.0, snr_threshold_db=10.0, tx_power_dbm=p) for p in (12.0, 18.0, 24.0)]
    for index in range(100):
        ues, fadings = draw_trial(levels[0], 10, index)
        outcomes = [solve_trial(ues, fadings, config, cfg) for config in levels]
        for weaker, stronger in zip(outcomes, outcomes[1:]):
            if weaker.feasible:
                assert stronger.feasible
                assert stronger.n_star <= weaker.n_star
            assert stronger.misdetected_fraction <= weaker.misdetected_fraction


def test_misdetection_non_decreasing_in_threshold():
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=160)
    levels = [SystemConfig(speed=5.0, snr_threshold_db=tau) for tau in (0.0, 3.0, 7.0, 10.0, 15.0)]
    for index in range(100):
        ues, fadings = draw_trial(levels[0], 14, index)
        fractions = [misdetection_fraction(ues, fadings, config, cfg) for config in levels]
        assert all(b >= a for a, b in zip(fractions, fractions[1:]))
