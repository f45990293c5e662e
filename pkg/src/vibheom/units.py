"""Unit conventions.

Energies and frequencies are carried in cm^-1, times in ps and temperatures
in K, with hbar = 1. A frequency in cm^-1 becomes an angular rate in rad/ps
through the factor ``2 pi c``.
"""

import math

import numpy as np

#: speed of light in cm/ps
SPEED_OF_LIGHT = 0.0299792458
#: Boltzmann constant in cm^-1/K
BOLTZMANN = 0.6950348
#: rad/ps per cm^-1
CM1_TO_RAD_PS = 2.0 * math.pi * SPEED_OF_LIGHT


def wavenumber_to_angular(value):
    """Convert cm^-1 to rad/ps."""
    return np.multiply(value, CM1_TO_RAD_PS)


def angular_to_wavenumber(value):
    """Convert rad/ps to cm^-1."""
    return np.divide(value, CM1_TO_RAD_PS)


def thermal_energy(temperature: float) -> float:
    """k_B T in cm^-1."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    return BOLTZMANN * temperature


def thermal_beta(temperature: float) -> float:
    """Inverse temperature 1/(k_B T) in cm.

    ``math.inf`` gives 0.
    """
    return 1.0 / thermal_energy(temperature)
