"""Physical constants and unit conversions.

All frequencies inside the package are angular (rad/s) and all times are
seconds. Conversions from Hz, kHz, ms, us and nT happen only at the config
and CLI boundary through the helpers below.
"""

import math

from scipy import constants as _sc

HBAR = _sc.hbar
PLANCK = _sc.h
BOHR_MAGNETON = _sc.physical_constants["Bohr magneton"][0]
#: mu_B / h in Hz/T (about 13.996 GHz/T)
BOHR_MAGNETON_HZ_PER_T = _sc.physical_constants["Bohr magneton in Hz/T"][0]

#: Lande g-factor of the 3D_{5/2} manifold of 40Ca+
G_D52 = 6.0 / 5.0

TWO_PI = 2.0 * math.pi


def hz(f):
    """Hz -> rad/s."""
    return TWO_PI * f


def khz(f):
    return TWO_PI * 1e3 * f


def mhz(f):
    return TWO_PI * 1e6 * f


def to_hz(omega):
    """rad/s -> Hz."""
    return omega / TWO_PI


def ms(t):
    return 1e-3 * t


def us(t):
    return 1e-6 * t


def nT(b):
    return 1e-9 * b
