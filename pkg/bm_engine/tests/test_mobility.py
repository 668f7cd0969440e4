import numpy as np
import pytest
from numpy.testing import assert_allclose

from bm_engine.array import beamwidth, sweep_directions
from bm_engine.errors import ConfigurationError
from bm_engine.mobility import (
    average_initial_offset,
    initial_offset,
    initial_offsets,
    mobility_offset,
    offset_breakdown,
    total_offset,
)
from bm_engine.scenario import SystemConfig, UEState, build_codebook
from bm_engine.streams import stream_for
from bm_engine.timing import BurstConfig, beam_management_time, bursts_needed, last_burst_duration


@pytest.mark.parametrize("n", [2, 3, 7, 8, 21, 64])
def test_vectorized_offsets_match_codebook_search(n):
    azimuth = stream_for(4).uniform(0, 2 * np.pi, size=500)
    codebook = build_codebook(n)
    expected = [initial_offset(phi, codebook) for phi in azimuth]
    assert_allclose(initial_offsets(azimuth, n), expected, atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 16, 64])
def test_initial_offset_within_half_beam(n):
    azimuth = np.linspace(0, 2 * np.pi, 5000, endpoint=False)
    offsets = initial_offsets(azimuth, n)
    assert np.all(np.abs(offsets) <= beamwidth(n) / 2 + 1e-12)


def test_offsets_broadcast_over_candidates():
    azimuth = np.array([0.1, 3.0, 6.2])
    n = np.array([2, 8, 64])[:, np.newaxis]
    offsets = initial_offsets(azimuth, n)
    assert offsets.shape == (3, 3)
    assert_allclose(offsets[1], initial_offsets(azimuth, 8))


def test_offset_at_boresight_is_zero():
    codebook = build_codebook(8)
    assert initial_offset(codebook.boresights[5], codebook) == pytest.approx(0.0, abs=1e-15)


def test_mobility_offset_depends_on_product():
    assert mobility_offset(2.0, 0.040, 5.0) == pytest.approx(mobility_offset(4.0, 0.020, 5.0))
    assert mobility_offset(3.0, 0.1, 6.0) == pytest.approx(0.05)


@pytest.mark.parametrize("speed, distance", [(1.0, 0.0), (1.0, -2.0), (-1.0, 3.0)])
def test_mobility_offset_rejects(speed, distance):
    with pytest.raises(ConfigurationError):
        mobility_offset(speed, 0.1, distance)


def test_breakdown_decomposes_total():
    config = SystemConfig(speed=5.0)
    cfg = BurstConfig(ssb_per_burst=8, burst_period_ms=160)
    codebook = build_codebook(12)
    ue = UEState.at(4.0, 2.2, config)
    parts = offset_breakdown(ue, codebook, cfg)
    assert parts.initial == pytest.approx(initial_offset(2.2, codebook))
    assert parts.motion == pytest.approx(5.0 * beam_management_time(codebook.size, cfg) / 4.0)
    assert parts.total == pytest.approx(abs(parts.initial + parts.motion))
    assert total_offset(-0.3, 0.1) == pytest.approx(0.2)


@pytest.mark.parametrize("n", [2, 8, 30, 64])
def test_average_initial_offset(n):
    azimuth = stream_for(9).uniform(0, 2 * np.pi, size=200_000)
    empirical = np.abs(initial_offsets(azimuth, n)).mean()
    assert average_initial_offset(n) == pytest.approx(empirical, rel=0.01)
    assert average_initial_offset(n) == pytest.approx(1 / (2 * n), rel=0.1)


@pytest.mark.parametrize("n, n_ss", [(12, 8), (40, 16), (64, 8), (3, 64)])
def test_motion_difference_splits_into_bursts_and_tail(n, n_ss):
    size = sweep_directions(n)
    full = int(bursts_needed(size, n_ss)) - 1
    tail = last_burst_duration(size, n_ss, 4)
    distance = 7.5
    (v1, t1), (v2, t2) = (2.0, 40), (3.0, 20)
    first = mobility_offset(v1, beam_management_time(size, BurstConfig(ssb_per_burst=n_ss, burst_period_ms=t1)), distance)
    second = mobility_offset(v2, beam_management_time(size, BurstConfig(ssb_per_burst=n_ss, burst_period_ms=t2)), distance)
    expected = (v1 * t1 * 1e-3 - v2 * t2 * 1e-3) * full / distance + (v1 - v2) * tail / distance
    assert first - second == pytest.approx(expected, rel=1e-9, abs=1e-15)
