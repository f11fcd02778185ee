"""Truncated three-mode Fock space for the four-wave-mixing Hamiltonian.

This is the numerical oracle for the short-time operator algebra: it evolves
``|α⟩|0⟩|0⟩`` exactly (up to truncation and a controlled propagation
tolerance) and measures pump factorial moments directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm
from scipy.stats import poisson

from .criterion import MomentSet

__all__ = [
    "MODES",
    "TAIL_BOUND",
    "TruncationError",
    "ConvergenceError",
    "FockSystem",
    "StateVector",
    "EvalPoint",
    "TruncationReport",
    "default_dims",
    "coherent_tail",
    "build_system",
    "prepare_state",
    "evolve",
    "expectation",
    "factorial_moment_numeric",
    "oracle_moments",
    "truncation_check",
]

MODES = ("a", "b", "c")
TAIL_BOUND = 1e-12
IMAG_BOUND = 1e-10
TRUNCATION_REL_TOL = 1e-6


class TruncationError(ValueError):
    """The Fock cutoff is too small for the requested state."""


class ConvergenceError(RuntimeError):
    """The propagator did not converge within its step budget."""


def default_dims(alpha2: float, moment_order: int = 0) -> tuple[int, int, int]:
    """Default cutoffs; ``moment_order`` k also bounds the cut part of ``<a†^k a^k>``.

    For a coherent state that part is ``|α|^(2k) P(n >= d - k)``, which grows
    fast with k, so high moments can need a few more pump levels.
    """
    d_a = max(16, math.ceil(alpha2 + 8 * math.sqrt(alpha2 + 1) + 8))
    if alpha2 > 0:
        while alpha2**moment_order * coherent_tail(alpha2, d_a - moment_order) > TAIL_BOUND:
            d_a += 1
    return (d_a, 6, 6)


def coherent_tail(alpha2: float, d: int) -> float:
    """Probability mass of a coherent state above the cutoff, ``P(n >= d)``."""
    return float(poisson.sf(d - 1, alpha2)) if alpha2 > 0 else 0.0


def _ladder(d: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr")


@dataclass(frozen=True, eq=False)
class FockSystem:
    dims: tuple[int, int, int]
    g: float
    omegas: tuple[float, float, float]
    interaction_only: bool
    ladders: dict = field(repr=False)
    hamiltonian: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def annihilator(self, mode: str) -> sp.csr_matrix:
        return self.ladders[mode]

    def number(self, mode: str) -> sp.csr_matrix:
        x = self.ladders[mode]
        return (x.conj().T @ x).tocsr()


def build_system(
    dims=(16, 6, 6),
    g: float = 1.0,
    omegas=(0.0, 0.0, 0.0),
    interaction_only: bool = True,
    alpha2_ceiling: float | None = None,
) -> FockSystem:
    """Assemble sparse ladders and the Hamiltonian on the truncated space.

    With ``interaction_only`` the rotating-frame form ``g (a†²bc + a²b†c†)``
    is used, otherwise the free terms ``Σ ω_m n_m`` are added.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 2:
        raise ValueError(f"need three dimensions >= 2, got {dims}")
    if alpha2_ceiling is not None and coherent_tail(alpha2_ceiling, dims[0]) >= TAIL_BOUND:
        raise TruncationError(
            f"pump dimension {dims[0]} is too small for |alpha|^2 <= {alpha2_ceiling}; "
            f"use at least {default_dims(alpha2_ceiling)[0]} and confirm with truncation_check"
        )
    eyes = [sp.identity(d, format="csr") for d in dims]
    ladders = {}
    for k, mode in enumerate(MODES):
        factors = list(eyes)
        factors[k] = _ladder(dims[k])
        ladders[mode] = sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")
    a, b, c = (ladders[m] for m in MODES)
    pump_in = a.T @ a.T @ b @ c  # real ladders, so .T is the adjoint
    H = g * (pump_in + pump_in.T)
    if not interaction_only:
        for w, m in zip(omegas, MODES):
            H = H + w * (ladders[m].T @ ladders[m])
    H = sp.csr_matrix(H, dtype=complex)
    H.eliminate_zeros()
    scale = max(sparse_norm(H), 1.0)
    if sparse_norm(H - H.conj().T) > 1e-12 * scale:
        raise AssertionError("assembled Hamiltonian is not Hermitian")
    return FockSystem(dims, float(g), tuple(float(w) for w in omegas), interaction_only, ladders, H)


@dataclass(frozen=True, eq=False)
class StateVector:
    data: np.ndarray
    dims: tuple[int, int, int]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


@dataclass(frozen=True)
class EvalPoint:
    g: float
    t: float
    alpha: complex

    @property
    def alpha2(self) -> float:
        return abs(self.alpha) ** 2

    def symbol_values(self) -> dict:
        return {"g": self.g, "t": self.t, "alpha": self.alpha, "alphabar": np.conj(self.alpha)}


def prepare_state(sys: FockSystem, alpha: complex) -> StateVector:
    """``|α⟩ ⊗ |0⟩ ⊗ |0⟩`` on the truncated space."""
    d_a, d_b, d_c = sys.dims
    alpha2 = abs(alpha) ** 2
    tail = coherent_tail(alpha2, d_a)
    if tail >= TAIL_BOUND:
        raise TruncationError(
            f"coherent tail above n = {d_a - 1} is {tail:.2e} for |alpha|^2 = {alpha2}; "
            f"increase the pump dimension (default for this amplitude: {default_dims(alpha2)[0]})"
        )
    amps = np.empty(d_a, dtype=complex)
    amps[0] = math.exp(-alpha2 / 2)
    for n in range(1, d_a):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    amps /= np.linalg.norm(amps)
    vac_b = np.zeros(d_b)
    vac_b[0] = 1.0
    vac_c = np.zeros(d_c)
    vac_c[0] = 1.0
    return StateVector(np.kron(np.kron(amps, vac_b), vac_c), sys.dims)


def evolve(
    sys: FockSystem,
    psi0: StateVector,
    t: float,
    tol: float = 1e-10,
    max_terms: int = 60,
    theta: float = 0.5,
) -> StateVector:
    """``exp(-iHt) psi0`` by a scaled, truncated Taylor series.

    The interval is split into ``s`` substeps with ``‖H‖₁ |t| / s <= theta``;
    each substep sums series terms until two consecutive terms fall below
    ``tol / s`` relative to the running vector.

    Raises
    ------
    ConvergenceError
        If a substep needs more than ``max_terms`` terms, or the norm drifts
        by more than ``10 * tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.array(psi0.data, dtype=complex)
    if t == 0:
        return StateVector(v, psi0.dims)
    H = sys.hamiltonian
    h_norm = float(abs(H).sum(axis=0).max()) if H.nnz else 0.0
    if h_norm == 0.0:
        return StateVector(v, psi0.dims)
    steps = max(1, math.ceil(h_norm * abs(t) / theta))
    dt = t / steps
    step_tol = tol / steps
    for step in range(steps):
        term = v
        acc = v.copy()
        prev_small = False
        for k in range(1, max_terms + 1):
            term = (H @ term) * (-1j * dt / k)
            acc += term
            small = np.linalg.norm(term) <= step_tol * np.linalg.norm(acc)
            if small and prev_small:
                break
            prev_small = small
        else:
            raise ConvergenceError(
                f"substep {step + 1}/{steps} did not converge in {max_terms} terms "
                f"(|H|_1 = {h_norm:.3g}, dt = {dt:.3g}, last term norm {np.linalg.norm(term):.3g})"
            )
        v = acc
    drift = abs(np.linalg.norm(v) - psi0.norm)
    if drift > 10 * tol:
        raise ConvergenceError(f"norm drifted by {drift:.3e} (> 10 * tol = {10 * tol:.1e})")
    return StateVector(v, psi0.dims)


def expectation(psi: StateVector, op: sp.spmatrix) -> complex:
    return complex(np.vdot(psi.data, op @ psi.data))


def factorial_moment_numeric(sys: FockSystem, psi: StateVector, mode: str, l: int) -> float:
    """``⟨psi| x†^l x^l |psi⟩`` by repeated sparse application."""
    if l < 1:
        raise ValueError("l must be >= 1")
    x = sys.annihilator(mode)
    xd = x.conj().T.tocsr()
    w = psi.data
    for _ in range(l):
        w = x @ w
    for _ in range(l):
        w = xd @ w
    value = complex(np.vdot(psi.data, w))
    if abs(value.imag) > IMAG_BOUND * max(1.0, abs(value.real)):
        raise ValueError(f"imaginary residue {value.imag:.3e} in <N^({l})>; Hermiticity or truncation is broken")
    return value.real


def oracle_moments(
    point: EvalPoint,
    l_max: int,
    dims=None,
    tol: float = 1e-12,
    interaction_only: bool = True,
    omegas=(0.0, 0.0, 0.0),
) -> MomentSet:
    """Pump moments ``<N^(1)> .. <N^(l_max+1)>`` after exact evolution to ``point.t``."""
    dims = dims or default_dims(point.alpha2, l_max + 1)
    sys = build_system(dims, point.g, omegas, interaction_only)
    psi = evolve(sys, prepare_state(sys, point.alpha), point.t, tol)
    return MomentSet(tuple(factorial_moment_numeric(sys, psi, "a", k) for k in range(1, l_max + 2)))


@dataclass(frozen=True)
class TruncationReport:
    passed: bool
    max_rel_change: float
    dims: tuple[int, int, int]
    enlarged_dims: tuple[int, int, int]
    reason: str = ""


def truncation_check(
    point: EvalPoint,
    l_max: int,
    dims=None,
    tol: float = 1e-12,
    threshold: float = TRUNCATION_REL_TOL,
) -> TruncationReport:
    """Compare moments at ``dims`` with moments at every dimension + 4.

    Never raises for a bad cutoff: a failed state preparation is reported
    as a failed check.
    """
    dims = tuple(dims or default_dims(point.alpha2, l_max + 1))
    bigger = tuple(d + 4 for d in dims)
    try:
        base = oracle_moments(point, l_max, dims, tol).moments
    except TruncationError as exc:
        return TruncationReport(False, math.inf, dims, bigger, str(exc))
    ref = oracle_moments(point, l_max, bigger, tol).moments
    change = max(abs(x - y) / max(abs(y), 1e-30) for x, y in zip(base, ref))
    if change <= threshold:
        return TruncationReport(True, change, dims, bigger)
    return TruncationReport(
        False, change, dims, bigger,
        f"moments change by {change:.2e} (> {threshold:.0e}) when every dimension grows by 4",
    )
