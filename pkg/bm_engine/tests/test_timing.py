import pytest
from pydantic import ValidationError

from bm_engine.array import sweep_directions
from bm_engine.errors import ConfigurationError
from bm_engine.timing import (
    BurstConfig,
    beam_management_time,
    beam_management_times,
    bursts_needed,
    last_burst_duration,
    last_burst_ssbs,
    last_burst_symbols,
    single_burst_limit,
    ssb_duration,
    sweep_timing,
    symbol_duration,
)

# SSBs start at symbols 2 and 8 of every 14-symbol slot
SSB_START_SYMBOLS = (2, 8)


def scheduled_end_symbol(ssb_count: int) -> int:
    """End of the last SSB of a burst, counted in symbols from the burst start."""
    last = ssb_count - 1
    slot, position = divmod(last, len(SSB_START_SYMBOLS))
    return 14 * slot + SSB_START_SYMBOLS[position] + 4


def test_symbol_duration():
    assert symbol_duration(0) == pytest.approx(71.45e-6)
    assert symbol_duration(4) == pytest.approx(71.45e-6 / 16)
    assert ssb_duration(4) == pytest.approx(4 * 71.45e-6 / 16)


def test_bad_numerology():
    with pytest.raises(ConfigurationError):
        symbol_duration(5)


@pytest.mark.parametrize("numerology", [0, 1, 2, 3, 4])
def test_last_burst_matches_slot_schedule(numerology):
    for count in range(1, 65):
        expected_symbols = scheduled_end_symbol(count)
        assert int(last_burst_symbols(count)) == expected_symbols
        assert last_burst_duration(count, 64, numerology) == expected_symbols * symbol_duration(numerology)


def test_bursts_and_remainder():
    assert bursts_needed(26, 8) == 4
    assert last_burst_ssbs(26, 8) == 2
    assert last_burst_ssbs(24, 8) == 8
    assert last_burst_ssbs(7, 8) == 7


def test_beam_management_time_eight_antennas():
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=20, numerology=4)
    # S_D = 26: three full periods, then 2 SSBs ending at symbol 12
    expected = 3 * 0.020 + 12 * symbol_duration(4)
    assert beam_management_time(sweep_directions(8), cfg) == pytest.approx(expected, rel=1e-12)


def test_single_burst_ignores_period():
    short = BurstConfig(ssb_per_burst=64, burst_period_ms=5)
    long = BurstConfig(ssb_per_burst=64, burst_period_ms=160)
    for n in range(2, single_burst_limit(64) + 1):
        size = sweep_directions(n)
        assert beam_management_time(size, short) == beam_management_time(size, long)


def test_vectorized_matches_scalar():
    cfg = BurstConfig(ssb_per_burst=16, burst_period_ms=40)
    sizes = [sweep_directions(n) for n in range(2, 65)]
    times = beam_management_times(sizes, cfg)
    for size, value in zip(sizes, times):
        assert value == beam_management_time(size, cfg)


def test_beam_management_time_increases_with_sweep():
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=80)
    times = [beam_management_time(sweep_directions(n), cfg) for n in range(2, 65)]
    assert all(b > a for a, b in zip(times, times[1:]))


@pytest.mark.parametrize("n_ss, expected", [(8, 2), (16, 5), (32, 10), (64, 20)])
def test_single_burst_limit(n_ss, expected):
    assert single_burst_limit(n_ss) == expected


def test_sweep_timing_fields():
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=20)
    timing = sweep_timing(26, cfg)
    assert timing.last_burst_ssbs == 2
    assert timing.slot == pytest.approx(14 * timing.symbol)
    assert timing.beam_management == beam_management_time(26, cfg)


def test_invalid_sweep_size():
    with pytest.raises(ConfigurationError):
        beam_management_time(0, BurstConfig())


@pytest.mark.parametrize(
    "fields",
    [
        {"ssb_per_burst": 12},
        {"burst_period_ms": 30},
        {"numerology": 7},
        {"candidates": (4, 3)},
        {"candidates": (1, 2)},
        {"candidates": ()},
    ],
)
def test_burst_config_rejects(fields):
    with pytest.raises(ValidationError):
        BurstConfig(**fields)
