"""Closed-form short-time results for the four-wave-mixing pump mode.

These are the leading-order (``g²t²``) expressions the symbolic engine is
expected to reproduce; ``verify`` compares against them and the CLI uses the
numeric forms for quick estimates.
"""

from __future__ import annotations

from fractions import Fraction

from .operators import NormalWord, OperatorPoly
from .scalars import I, ScalarPoly, symbol

g, t = symbol("g"), symbol("t")
alpha, alphabar = symbol("alpha"), symbol("alphabar")
modulus2 = alpha * alphabar  # |α|²

# leading coefficient of d(l) in units of g²t²|α|^(2(l+1)), for l = 1, 2
D_COEFFICIENTS = {1: -2, 2: -6}


def d_leading(l: int) -> ScalarPoly:
    """``d(1) = -2g²t²|α|⁴`` and ``d(2) = -6g²t²|α|⁶``."""
    return D_COEFFICIENTS[l] * g**2 * t**2 * modulus2 ** (l + 1)


def d_leading_numeric(l: int, g_value: float, t_value: float, alpha2: float) -> float:
    return D_COEFFICIENTS[l] * g_value**2 * t_value**2 * alpha2 ** (l + 1)


def mean_number() -> ScalarPoly:
    return modulus2 - 2 * g**2 * t**2 * modulus2**2


def mean_number_squared() -> ScalarPoly:
    return modulus2**2 - 4 * g**2 * t**2 * modulus2**3


def mean_number_cubed() -> ScalarPoly:
    return modulus2**3 - 6 * g**2 * t**2 * modulus2**4


def second_factorial_moment() -> ScalarPoly:
    return modulus2**2 + g**2 * t**2 * (-4 * modulus2**3 - 2 * modulus2**2)


def third_factorial_moment() -> ScalarPoly:
    return modulus2**3 - g**2 * t**2 * (6 * modulus2**4 + 6 * modulus2**3)


def _w(**powers) -> OperatorPoly:
    return OperatorPoly.word(NormalWord.of(powers))


def pump_annihilator_series() -> OperatorPoly:
    """``A(t)`` through ``t²``."""
    half = Fraction(1, 2)
    bracket = (
        _w(a=(0, 1), b=(1, 1), c=(1, 1)) * 4
        - _w(a=(1, 2), b=(1, 1)) * 2
        - _w(a=(1, 2), c=(1, 1)) * 2
        - _w(a=(1, 2)) * 2
    )
    return (
        _w(a=(0, 1))
        - _w(a=(1, 0), b=(0, 1), c=(0, 1)) * (2 * I * g * t)
        + bracket * (g**2 * t**2 * half)
    )
