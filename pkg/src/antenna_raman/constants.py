"""Physical constants and unit helpers used across the toolkit.

Everything internal runs in SI with angular frequencies (rad/s).  Scenario
files keep human-friendly units (ordinary Hz, nm, uW/um^2); conversion
happens exactly once, in the parameter-derivation layer.
"""

import math

import scipy.constants as _sc

HBAR = _sc.hbar
EPS0 = _sc.epsilon_0
C0 = _sc.c
KB = _sc.k
E_CHARGE = _sc.e

TWO_PI = 2.0 * math.pi

# 1 Debye in C*m
DEBYE = 1e-21 / _sc.c

# 1 eV in J
EV = _sc.e

# intensity unit used in scenario files: 1 uW/um^2 = 1e6 W/m^2
UW_PER_UM2 = 1e6


def hz_to_angular(f):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f


def angular_to_hz(w):
    """Angular frequency (rad/s) to ordinary frequency (Hz)."""
    return w / TWO_PI
