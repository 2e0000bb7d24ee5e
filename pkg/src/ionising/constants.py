"""Physical constants and default trap parameters (SI units)."""

import math

from scipy.constants import atomic_mass, e as ELEMENTARY_CHARGE, epsilon_0, hbar as HBAR

# Coulomb prefactor q^2 / (4 pi eps0), J*m
COULOMB_COEFF = ELEMENTARY_CHARGE**2 / (4.0 * math.pi * epsilon_0)

# Default ion species: 171Yb+ taken at the nominal mass number, kg
DEFAULT_ION_MASS = 171.0 * atomic_mass

# Default Raman geometry: counter-propagating 355 nm beams, |delta_k| in 1/m
DEFAULT_RAMAN_WAVELENGTH = 355e-9
DEFAULT_DELTA_K = 2.0 * (2.0 * math.pi / DEFAULT_RAMAN_WAVELENGTH)
