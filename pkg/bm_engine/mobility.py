"""
Angular offsets between a moving UE and its serving gNB beam.

A UE starts off its nearest boresight by θ_i and, moving counterclockwise on
a circle around the gNB, rotates by θ_v = v·T_BM/d_k while the sweep runs.
The offset that matters for the gain is θ_k = |θ_v + θ_i|.
"""

from dataclasses import dataclass

import numpy as np

from bm_engine.array import beamwidth, sweep_directions
from bm_engine.errors import ConfigurationError
from bm_engine.scenario import Codebook, UEState
from bm_engine.timing import BurstConfig, beam_management_time

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OffsetBreakdown:
    initial: float
    motion: float
    total: float


def _wrapped_difference(a, b):
    return np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi


def initial_offset(azimuth: float, codebook: Codebook) -> float:
    """
    Signed offset φ_k − φ̄ to the boresight with the smallest wrapped
    distance; ties go to the lower boresight index.
    """
    if not codebook.boresights:
        raise ConfigurationError("codebook has no boresights")
    differences = _wrapped_difference(azimuth, np.asarray(codebook.boresights))
    return float(differences[np.argmin(np.abs(differences))])


def initial_offsets(azimuth, n_antennas):
    """
    Vectorized initial_offset for uniformly spaced codebooks.

    `azimuth` (values in [0, 2π)) broadcasts against `n_antennas`. Only the
    two boresights bracketing each azimuth are compared; the gap above the
    last boresight closes on boresight 0 at 2π.
    """
    azimuth = np.asarray(azimuth, dtype=float)
    n = np.asarray(n_antennas)
    width = 2.0 / n
    size = np.ceil(np.pi * n)

    index = np.minimum(np.floor(azimuth / width), size - 1)
    below = azimuth - index * width
    wraps = index + 1 >= size
    above = np.where(wraps, azimuth - TWO_PI, azimuth - (index + 1) * width)

    # tie: lower index wins, which is the upper neighbour when it wraps to 0
    take_below = np.where(wraps, np.abs(below) < np.abs(above), np.abs(below) <= np.abs(above))
    return np.where(take_below, below, above)


def mobility_offset(speed: float, bm_time: float, distance: float) -> float:
    """θ_v = v·T_BM/d_k."""
    if distance <= 0:
        raise ConfigurationError(f"UE distance must be positive, got {distance}")
    if speed < 0:
        raise ConfigurationError(f"speed must be non-negative, got {speed}")
    return speed * bm_time / distance


def total_offset(initial, motion):
    """θ_k = |θ_v + θ_i|."""
    result = np.abs(np.asarray(motion) + np.asarray(initial))
    return float(result) if result.ndim == 0 else result


def offset_breakdown(ue: UEState, codebook: Codebook, cfg: BurstConfig) -> OffsetBreakdown:
    initial = initial_offset(ue.azimuth, codebook)
    motion = mobility_offset(ue.speed, beam_management_time(codebook.size, cfg), ue.distance)
    return OffsetBreakdown(initial=initial, motion=motion, total=total_offset(initial, motion))


def average_initial_offset(n_antennas: int) -> float:
    """E|θ_i| for uniform azimuth, ≈ Δ_3dB/4 (exact up to the short last gap)."""
    width = beamwidth(n_antennas)
    gap = TWO_PI - (sweep_directions(n_antennas) - 1) * width
    full_gaps = sweep_directions(n_antennas) - 1
    return (full_gaps * width * width / 4.0 + gap * gap / 4.0) / TWO_PI
