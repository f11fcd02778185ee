"""Higher-order antibunching criterion on photon factorial moments.

``d(l) = <N^(l+1)> - <N>^(l+1)`` is negative for l-th order antibunching,
zero for coherent light and positive for bunched light.  Moments can come
from the symbolic short-time engine, the Fock-space oracle, or a measured
photon-number distribution.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .scalars import ScalarPoly

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_L_MAX",
    "Classification",
    "MomentSet",
    "OrderResult",
    "ChainResult",
    "MomentReport",
    "CountDistribution",
    "DistributionError",
    "MissingMomentError",
    "d_of_l",
    "classify",
    "classify_symbolic",
    "chain_check",
    "moments_from_distribution",
    "build_report",
    "sps_verdict",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_L_MAX = 4
RENORMALIZE_TOL = 1e-6

Moment = Union[float, ScalarPoly]


class Classification(str, enum.Enum):
    ANTIBUNCHED = "Antibunched"
    COHERENT = "Coherent"
    BUNCHED = "Bunched"


class MissingMomentError(ValueError):
    pass


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class MomentSet:
    """``<N^(1)> ... <N^(l_max+1)>``, numeric or symbolic.

    ``moments[k]`` holds ``<N^(k+1)>``.  ``t_order`` is the truncation order
    applied to powers of ``<N>`` on the symbolic path.
    """

    moments: tuple
    t_order: int | None = None

    def __post_init__(self):
        if not self.moments:
            raise MissingMomentError("at least <N> is required")
        if not self.symbolic:
            for k, m in enumerate(self.moments, start=1):
                if not math.isfinite(m):
                    raise ValueError(f"<N^({k})> is not finite")
                if m < -1e-9:
                    raise ValueError(f"<N^({k})> = {m} is negative")

    @property
    def symbolic(self) -> bool:
        return isinstance(self.moments[0], ScalarPoly)

    @property
    def l_max(self) -> int:
        return len(self.moments) - 1

    def moment(self, k: int) -> Moment:
        if k < 1 or k > len(self.moments):
            raise MissingMomentError(f"<N^({k})> not available (have 1..{len(self.moments)})")
        return self.moments[k - 1]

    def evaluate(self, values: Mapping[str, complex]) -> "MomentSet":
        """Numeric moment set from a symbolic one at a parameter point."""
        if not self.symbolic:
            return self
        return MomentSet(tuple(_real(m.evaluate(values)) for m in self.moments))


def _real(z: complex, bound: float = 1e-10) -> float:
    if abs(z.imag) > bound * max(1.0, abs(z.real)):
        raise ValueError(f"imaginary residue {z.imag:.3e} in a real quantity")
    return z.real


def d_of_l(m: MomentSet, l: int) -> Moment:
    """``<N^(l+1)> - <N>^(l+1)``; the symbolic power is truncated at ``m.t_order``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    top = m.moment(l + 1)
    mean = m.moment(1)
    if m.symbolic:
        if m.t_order is None:
            power = mean ** (l + 1)
        else:
            power = mean.pow_truncated(l + 1, "t", m.t_order)
        return top - power
    return top - mean ** (l + 1)


def classify(d: float, tol: float = DEFAULT_TOL) -> Classification:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if not math.isfinite(d):
        raise ValueError(f"non-finite d = {d}")
    if d < -tol:
        return Classification.ANTIBUNCHED
    if d > tol:
        return Classification.BUNCHED
    return Classification.COHERENT


_REAL_SYMBOLS = {"g", "t", "w1", "w2", "w3"}


def _nonnegative_monomial(mono: dict) -> bool:
    # even powers of real symbols times (α ᾱ)^k are >= 0 for every real g, t and complex α
    if mono.get("alpha", 0) != mono.get("alphabar", 0):
        return False
    return all(p % 2 == 0 for s, p in mono.items() if s not in ("alpha", "alphabar")) and all(
        s in _REAL_SYMBOLS or s in ("alpha", "alphabar") for s in mono
    )


def classify_symbolic(d: ScalarPoly) -> Classification | None:
    """Sign of the lowest nonvanishing ``t`` order, when it is manifest.

    Returns ``COHERENT`` for the zero polynomial and ``None`` when the sign of
    the leading part cannot be read off its monomials.
    """
    if d.is_zero():
        return Classification.COHERENT
    lead = d.coefficient("t", d.min_degree("t"))
    signs = set()
    for mono, c in lead.items():
        if not c.is_real() or not _nonnegative_monomial(dict(mono)):
            return None
        signs.add(c.re > 0)
    if len(signs) != 1:
        return None
    return Classification.BUNCHED if signs.pop() else Classification.ANTIBUNCHED


@dataclass(frozen=True)
class ChainResult:
    """Outcome of the ordered chain ``<N^(l+1)> < <N^(l)><N> < ... < <N>^(l+1)``.

    ``values[k]`` is ``<N^(l+1-k)> <N>^k``; ``violated`` lists link indices
    ``k`` for which ``values[k] < values[k+1]`` fails by more than ``tol``.
    """

    l: int
    values: tuple[float, ...]
    violated: tuple[int, ...]
    verdict: str  # "holds", "coherent" or "violated"

    @property
    def holds(self) -> bool:
        return not self.violated


def chain_check(m: MomentSet, l: int, tol: float = DEFAULT_TOL) -> ChainResult:
    if m.symbolic:
        raise ValueError("chain_check needs numeric moments; evaluate the set first")
    if l < 1:
        raise ValueError("l must be >= 1")
    mean = m.moment(1)
    values = tuple(m.moment(l + 1 - k) * mean**k for k in range(l + 1))
    gaps = [values[k + 1] - values[k] for k in range(l)]
    violated = tuple(k for k, gap in enumerate(gaps) if gap < -tol)
    if violated:
        verdict = "violated"
    elif all(abs(gap) <= tol for gap in gaps):
        verdict = "coherent"
    else:
        verdict = "holds"
    return ChainResult(l, values, violated, verdict)


@dataclass(frozen=True)
class CountDistribution:
    """Photon-number probabilities ``p[n]``, validated and normalized."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DistributionError("probabilities must be a nonempty vector")
        if not np.all(np.isfinite(p)):
            raise DistributionError("probabilities must be finite")
        if np.any(p < 0):
            n = int(np.flatnonzero(p < 0)[0])
            raise DistributionError(f"negative probability p[{n}] = {p[n]}")
        total = math.fsum(p)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        if total != 1.0:
            p = p / total
        object.__setattr__(self, "p", p)

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    @classmethod
    def from_pairs(cls, pairs: Mapping[int, float]) -> "CountDistribution":
        if not pairs:
            raise DistributionError("no entries")
        if any(n < 0 for n in pairs):
            raise DistributionError("photon numbers must be nonnegative")
        p = np.zeros(max(pairs) + 1)
        for n, v in pairs.items():
            p[n] += v
        return cls(p)

    @classmethod
    def from_csv(cls, text: str) -> "CountDistribution":
        """CSV with header ``n,p``; rows may be sparse and unordered."""
        reader = csv.reader(io.StringIO(text))
        rows = [r for r in reader if r and any(x.strip() for x in r)]
        if not rows or [x.strip() for x in rows[0]] != ["n", "p"]:
            raise DistributionError("line 1: expected header 'n,p'")
        pairs: dict[int, float] = {}
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise DistributionError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                n = int(row[0])
                v = float(row[1])
            except ValueError as exc:
                raise DistributionError(f"line {lineno}: {exc}") from None
            if n in pairs:
                raise DistributionError(f"line {lineno}: duplicate n = {n}")
            pairs[n] = v
        return cls.from_pairs(pairs)

    @classmethod
    def from_json(cls, text: str) -> "CountDistribution":
        """JSON array of ``p_n`` values, or of ``{"n": .., "p": ..}`` objects."""
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, list) or not data:
            raise DistributionError("expected a nonempty JSON array")
        if all(isinstance(x, dict) for x in data):
            try:
                pairs = {int(x["n"]): float(x["p"]) for x in data}
            except (KeyError, TypeError, ValueError) as exc:
                raise DistributionError(f"bad entry: {exc}") from None
            return cls.from_pairs(pairs)
        try:
            return cls(np.array([float(x) for x in data]))
        except (TypeError, ValueError) as exc:
            raise DistributionError(f"bad entry: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "CountDistribution":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
            return cls.from_json(text)
        return cls.from_csv(text)


def moments_from_distribution(p: CountDistribution, l_max: int = DEFAULT_L_MAX) -> MomentSet:
    """``<N^(k)> = sum_n p_n n (n-1) ... (n-k+1)`` for ``k = 1..l_max+1``."""
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    if p.n_max < l_max + 1:
        log.warning("n_max = %d is below l_max + 1 = %d; higher moments vanish", p.n_max, l_max + 1)
    n = np.arange(p.p.size, dtype=float)
    falling = np.ones_like(n)
    moments = []
    for k in range(1, l_max + 2):
        falling = falling * (n - (k - 1))
        moments.append(math.fsum(p.p * falling))
    return MomentSet(tuple(moments))


@dataclass(frozen=True)
class OrderResult:
    order: int
    d: float
    classification: Classification
    tol: float

    def to_dict(self) -> dict:
        return {"order": self.order, "d": self.d, "classification": self.classification.value, "tol": self.tol}


@dataclass(frozen=True)
class MomentReport:
    moments: tuple[float, ...]
    orders: tuple[OrderResult, ...]
    chain: ChainResult | None = None
    symbolic_d: tuple[ScalarPoly, ...] = field(default=(), compare=False)

    def order(self, l: int) -> OrderResult:
        for r in self.orders:
            if r.order == l:
                return r
        raise MissingMomentError(f"report has no order {l}")

    def to_dict(self) -> dict:
        out = {
            "moments": list(self.moments),
            "orders": [r.to_dict() for r in self.orders],
        }
        if self.chain is not None:
            out["chain"] = {
                "l": self.chain.l,
                "verdict": self.chain.verdict,
                "holds": self.chain.holds,
                "values": list(self.chain.values),
                "violated_links": list(self.chain.violated),
            }
        return out


def build_report(
    m: MomentSet,
    tol: float = DEFAULT_TOL,
    values: Mapping[str, complex] | None = None,
    l_max: int | None = None,
) -> MomentReport:
    """Per-order ``d(l)`` and classification, plus the chain at the top order.

    A symbolic set is reduced with the truncated powers first and then
    evaluated at ``values``; the chain is only checked for numeric input.
    """
    l_max = m.l_max if l_max is None else l_max
    if m.symbolic:
        if values is None:
            raise ValueError("a symbolic moment set needs parameter values to build a numeric report")
        d_polys = tuple(d_of_l(m, l) for l in range(1, l_max + 1))
        ds = [_real(p.evaluate(values)) for p in d_polys]
        numeric = m.evaluate(values)
        orders = tuple(OrderResult(l, d, classify(d, tol), tol) for l, d in enumerate(ds, start=1))
        return MomentReport(numeric.moments, orders, None, d_polys)
    orders = tuple(
        OrderResult(l, d, classify(d, tol), tol) for l in range(1, l_max + 1) for d in [d_of_l(m, l)]
    )
    return MomentReport(m.moments, orders, chain_check(m, l_max, tol))


def sps_verdict(report: MomentReport, l_required: int) -> tuple[bool, str]:
    """True iff every order ``1..l_required`` is antibunched."""
    failing = []
    for l in range(1, l_required + 1):
        r = report.order(l)
        if r.classification is not Classification.ANTIBUNCHED:
            failing.append(f"order {l} is {r.classification.value} (d = {r.d:.6g})")
    if failing:
        return False, "fails the single-photon-source criterion: " + "; ".join(failing)
    return True, f"antibunched at every order 1..{l_required}"
