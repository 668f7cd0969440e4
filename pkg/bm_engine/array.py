"""
Uniform linear array gain at the gNB.

The array factor |sin(N·π/2·sinθ) / sin(π/2·sinθ)| is used as a power gain
with peak N at boresight.
"""

from dataclasses import dataclass
import math

import numpy as np

from bm_engine.errors import ConfigurationError

MIN_ANTENNAS = 2
MAX_ANTENNAS = 64

# below this |sin(π/2·sinθ)| the ratio is replaced by its series expansion
_SINGULAR_EPS = 1e-8


def check_antennas(n_antennas: int) -> int:
    if not MIN_ANTENNAS <= n_antennas <= MAX_ANTENNAS:
        raise ConfigurationError(
            f"antenna count {n_antennas} outside [{MIN_ANTENNAS}, {MAX_ANTENNAS}]"
        )
    return int(n_antennas)


def beamwidth(n_antennas: int) -> float:
    """Half-power beamwidth Δ_3dB ≈ 2/N in radians."""
    return 2.0 / check_antennas(n_antennas)


def sweep_directions(n_antennas: int) -> int:
    """Number of SSBs S_D = ceil(π·N) needed to cover the full azimuth."""
    return math.ceil(math.pi * check_antennas(n_antennas))


@dataclass(frozen=True)
class GainQuery:
    n_antennas: int
    theta: float

    def __post_init__(self):
        check_antennas(self.n_antennas)
        if not math.isfinite(self.theta):
            raise ConfigurationError(f"offset angle must be finite, got {self.theta}")


def array_factor(n_antennas, theta):
    """
    Vectorized array gain.

    `n_antennas` and `theta` broadcast against each other. Points where the
    denominator vanishes are evaluated through N·|1 − (N²−1)ε²/6|, ε being
    the distance of π/2·sinθ to the nearest multiple of π.
    """
    n = np.asarray(n_antennas, dtype=float)
    x = 0.5 * np.pi * np.sin(np.asarray(theta, dtype=float))
    n, x = np.broadcast_arrays(n, x)

    denominator = np.sin(x)
    singular = np.abs(denominator) < _SINGULAR_EPS

    safe_denominator = np.where(singular, 1.0, denominator)
    gain = np.abs(np.sin(n * x) / safe_denominator)

    eps = x - np.pi * np.round(x / np.pi)
    series = n * np.abs(1.0 - (n * n - 1.0) * eps * eps / 6.0)
    gain = np.where(singular, series, gain)

    return np.minimum(gain, n)


def array_gain(query: GainQuery) -> float:
    return float(array_factor(query.n_antennas, query.theta))


def wrap_angle(theta):
    """Wrap angles into (−π, π]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)


def gain_at_offset(n_antennas: int, theta_total: float) -> float:
    """
    Gain seen by a UE whose total angular offset from its serving beam is
    `theta_total`.
    """
    check_antennas(n_antennas)
    return float(array_factor(n_antennas, wrap_angle(theta_total)))
