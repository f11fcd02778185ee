"""Short-time Heisenberg evolution of the four-wave-mixing modes.

The interaction ``g (A†² B C + A² B† C†)`` absorbs two pump photons and emits
one stokes and one signal photon.  Free evolution is removed by working in
the rotating frame, so only the interaction part drives the derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping

from .operators import (
    ModeId,
    NormalWord,
    OperatorPoly,
    annihilator,
    commutator,
    dagger,
    mul,
    number,
)
from .scalars import I, ScalarPoly, const, symbol

__all__ = [
    "DEFAULT_MAX_ORDER",
    "HamiltonianSpec",
    "CoherentVacuumState",
    "TermGrowthError",
    "four_wave_mixing",
    "heisenberg_derivative",
    "taylor_evolve",
    "factorial_moment_operator",
    "expect_coherent_vacuum",
    "moment_series",
]

DEFAULT_MAX_ORDER = 4

g = symbol("g")
t = symbol("t")


class TermGrowthError(ValueError):
    """Requested Taylor order is above the configured ceiling."""


@dataclass(frozen=True)
class HamiltonianSpec:
    free: OperatorPoly
    interaction: OperatorPoly

    @property
    def full(self) -> OperatorPoly:
        return self.free + self.interaction

    def is_hermitian(self) -> bool:
        H = self.full
        return dagger(H) == H


def four_wave_mixing() -> HamiltonianSpec:
    """``ω1 A†A + ω2 B†B + ω3 C†C + g (A†²BC + A²B†C†)``."""
    free = (
        number("a") * symbol("w1")
        + number("b") * symbol("w2")
        + number("c") * symbol("w3")
    )
    pump_in = OperatorPoly.word(NormalWord.of(a=(2, 0), b=(0, 1), c=(0, 1)))
    interaction = (pump_in + dagger(pump_in)) * g
    return HamiltonianSpec(free, interaction)


@dataclass(frozen=True)
class CoherentVacuumState:
    """Product of coherent states; unlisted modes are in vacuum.

    The default is ``|α⟩|0⟩|0⟩`` with a symbolic pump amplitude.
    """

    amplitudes: Mapping[ModeId, ScalarPoly] = field(
        default_factory=lambda: {"a": symbol("alpha"), "b": const(0), "c": const(0)}
    )

    def amplitude(self, mode: ModeId) -> ScalarPoly:
        return ScalarPoly.coerce(self.amplitudes.get(mode, 0))


def heisenberg_derivative(H: HamiltonianSpec, X: OperatorPoly) -> OperatorPoly:
    """Rotating-frame time derivative ``i [H_int, X]``."""
    return commutator(H.interaction, X) * I


def taylor_evolve(
    H: HamiltonianSpec, X: OperatorPoly, order: int, max_order: int = DEFAULT_MAX_ORDER
) -> OperatorPoly:
    """``sum_k t^k/k! X^(k)`` with successive Heisenberg derivatives.

    Raises
    ------
    TermGrowthError
        If ``order`` exceeds ``max_order``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order > max_order:
        raise TermGrowthError(f"Taylor order {order} exceeds the ceiling {max_order}")
    result = OperatorPoly.coerce(X)
    deriv = result
    for k in range(1, order + 1):
        deriv = heisenberg_derivative(H, deriv)
        result = result + deriv * (t**k * Fraction(1, factorial(k)))
    return result


def factorial_moment_operator(
    H: HamiltonianSpec,
    mode: ModeId,
    l: int,
    order: int,
    max_order: int = DEFAULT_MAX_ORDER,
) -> OperatorPoly:
    """Evolved ``x†^l x^l`` through ``t**order``, i.e. the factorial moment ``N^(l)(t)``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    x_t = taylor_evolve(H, annihilator(mode), order, max_order)
    x_dag_t = dagger(x_t)
    right = x_t
    for _ in range(l - 1):
        right = mul(right, x_t, t_order=order)
    left = x_dag_t
    for _ in range(l - 1):
        left = mul(left, x_dag_t, t_order=order)
    return mul(left, right, t_order=order)


def expect_coherent_vacuum(P: OperatorPoly, state: CoherentVacuumState | None = None) -> ScalarPoly:
    """Expectation value in a product coherent state.

    Each normal word maps to ``prod_m conj(β_m)^p β_m^q``; words touching a
    vacuum mode vanish.
    """
    state = state or CoherentVacuumState()
    total = ScalarPoly()
    for word, coeff in OperatorPoly.coerce(P).items():
        value = coeff
        for mode, p, q in word.powers:
            beta = state.amplitude(mode)
            if beta.is_zero():
                value = ScalarPoly()
                break
            value = value * beta.conj() ** p * beta**q
        total = total + value
    return total


def moment_series(
    l_max: int,
    order: int = 2,
    mode: ModeId = "a",
    H: HamiltonianSpec | None = None,
    state: CoherentVacuumState | None = None,
) -> list[ScalarPoly]:
    """``[⟨N^(1)(t)⟩, ..., ⟨N^(l_max+1)(t)⟩]`` for the pump by default."""
    H = H or four_wave_mixing()
    return [
        expect_coherent_vacuum(factorial_moment_operator(H, mode, l, order), state)
        for l in range(1, l_max + 2)
    ]
