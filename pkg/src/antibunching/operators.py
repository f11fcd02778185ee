"""Normally ordered multimode bosonic operator polynomials.

A :class:`NormalWord` is a product ``prod_m x_m†^p x_m^q`` with creation
powers to the left of annihilation powers within every mode.  Operators on
different modes commute, so a word is just the per-mode power pairs.
:class:`OperatorPoly` maps words to exact :class:`ScalarPoly` coefficients
and is kept canonical after every operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, factorial
from typing import Iterator, Mapping

from .scalars import ScalarPoly, const

__all__ = [
    "ModeId",
    "MODE_ORDER",
    "NormalWord",
    "OperatorPoly",
    "normal_order_product",
    "mul",
    "dagger",
    "commutator",
    "truncate_t_order",
    "annihilator",
    "creator",
    "identity",
    "number",
]

ModeId = str

# pump, stokes, signal
MODE_ORDER: tuple[ModeId, ...] = ("a", "b", "c")
_MODE_RANK = {m: i for i, m in enumerate(MODE_ORDER)}


def _mode_key(mode: ModeId):
    return (_MODE_RANK.get(mode, len(_MODE_RANK)), mode)


@dataclass(frozen=True)
class NormalWord:
    """Normally ordered monomial, stored as ``((mode, creation, annihilation), ...)``.

    Modes with both powers zero are omitted; the empty word is the identity.
    """

    powers: tuple[tuple[ModeId, int, int], ...] = ()

    def __post_init__(self):
        for mode, p, q in self.powers:
            if p < 0 or q < 0:
                raise ValueError(f"negative power in mode {mode!r}")

    @classmethod
    def of(cls, powers: Mapping[ModeId, tuple[int, int]] | None = None, **kw) -> "NormalWord":
        """Build from ``{mode: (creation, annihilation)}``; ``NormalWord.of(a=(1, 1))`` is a†a."""
        merged = dict(powers or {})
        merged.update(kw)
        items = [(m, int(p), int(q)) for m, (p, q) in merged.items() if p or q]
        items.sort(key=lambda x: _mode_key(x[0]))
        return cls(tuple(items))

    def pair(self, mode: ModeId) -> tuple[int, int]:
        for m, p, q in self.powers:
            if m == mode:
                return p, q
        return 0, 0

    def modes(self) -> tuple[ModeId, ...]:
        return tuple(m for m, _, _ in self.powers)

    def is_identity(self) -> bool:
        return not self.powers

    def adjoint(self) -> "NormalWord":
        # (x†^p x^q)† = x†^q x^p is again normal ordered
        return NormalWord(tuple((m, q, p) for m, p, q in self.powers))

    def sort_key(self):
        return tuple((_mode_key(m), p, q) for m, p, q in self.powers)

    def __str__(self):
        from .render import word_to_text

        return word_to_text(self)


def _mode_product(p1: int, q1: int, p2: int, q2: int) -> list[tuple[int, int, int]]:
    """Expand ``x†^p1 x^q1 · x†^p2 x^q2`` into ``[(coefficient, creation, annihilation)]``.

    Uses ``x^q x†^p = sum_k k! C(q,k) C(p,k) x†^(p-k) x^(q-k)``.
    """
    return [
        (factorial(k) * comb(q1, k) * comb(p2, k), p1 + p2 - k, q1 + q2 - k)
        for k in range(min(q1, p2) + 1)
    ]


def _word_product(u: NormalWord, v: NormalWord) -> list[tuple[int, NormalWord]]:
    modes = sorted(set(u.modes()) | set(v.modes()), key=_mode_key)
    per_mode = []
    for m in modes:
        p1, q1 = u.pair(m)
        p2, q2 = v.pair(m)
        per_mode.append([(c, (m, p, q)) for c, p, q in _mode_product(p1, q1, p2, q2)])
    out = []
    for choice in product(*per_mode):
        coeff = 1
        powers = []
        for c, entry in choice:
            coeff *= c
            if entry[1] or entry[2]:
                powers.append(entry)
        out.append((coeff, NormalWord(tuple(powers))))
    return out


class OperatorPoly:
    """Finite sum of normal words with exact scalar-polynomial coefficients.

    Supports ``+``, ``-``, ``*`` (operator product, or scaling by a
    :class:`ScalarPoly` / number) and integer powers.  Instances are immutable.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[NormalWord, object] | None = None):
        clean: dict[NormalWord, ScalarPoly] = {}
        for w, c in (terms or {}).items():
            c = ScalarPoly.coerce(c)
            if w in clean:
                c = clean[w] + c
            if c.is_zero():
                clean.pop(w, None)
            else:
                clean[w] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict) -> "OperatorPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def coerce(cls, value) -> "OperatorPoly":
        if isinstance(value, OperatorPoly):
            return value
        c = ScalarPoly.coerce(value)
        return cls._raw({} if c.is_zero() else {NormalWord(): c})

    @classmethod
    def word(cls, word: NormalWord, coeff=1) -> "OperatorPoly":
        return cls({word: coeff})

    @property
    def terms(self) -> dict[NormalWord, ScalarPoly]:
        return dict(self._terms)

    def items(self) -> list[tuple[NormalWord, ScalarPoly]]:
        """Terms in deterministic order: by lowest power of ``t``, then by word."""
        return sorted(self._terms.items(), key=lambda kv: (kv[1].min_degree("t"), kv[0].sort_key()))

    def __iter__(self) -> Iterator[NormalWord]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __getitem__(self, word: NormalWord) -> ScalarPoly:
        return self._terms.get(word, ScalarPoly())

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other):
        try:
            other = OperatorPoly.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for w, c in other._terms.items():
            if w in out:
                s = out[w] + c
                if s.is_zero():
                    del out[w]
                else:
                    out[w] = s
            else:
                out[w] = c
        return OperatorPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return OperatorPoly._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-OperatorPoly.coerce(other))

    def __rsub__(self, other):
        return OperatorPoly.coerce(other) - self

    def scale(self, factor) -> "OperatorPoly":
        factor = ScalarPoly.coerce(factor)
        out = {}
        for w, c in self._terms.items():
            c = c * factor
            if not c.is_zero():
                out[w] = c
        return OperatorPoly._raw(out)

    def __mul__(self, other):
        if isinstance(other, OperatorPoly):
            return mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        # scalars commute with operators
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative operator power")
        result = identity()
        for _ in range(n):
            result = mul(result, self)
        return result

    def __eq__(self, other):
        try:
            other = OperatorPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def map_coefficients(self, fn) -> "OperatorPoly":
        return OperatorPoly({w: fn(c) for w, c in self._terms.items()})

    def dagger(self) -> "OperatorPoly":
        return dagger(self)

    def __repr__(self):
        return f"OperatorPoly({self!s})"

    def __str__(self):
        from .render import operator_to_text

        return operator_to_text(self)


def normal_order_product(u: NormalWord, v: NormalWord) -> OperatorPoly:
    """Canonical normal-ordered expansion of the word product ``u · v``."""
    out: dict[NormalWord, int] = {}
    for c, w in _word_product(u, v):
        out[w] = out.get(w, 0) + c
    return OperatorPoly._raw({w: const(c) for w, c in out.items() if c})


def mul(P: OperatorPoly, Q: OperatorPoly, t_order: int | None = None) -> OperatorPoly:
    """Operator product ``P · Q``.

    With ``t_order`` set, coefficient pairs whose combined power of ``t`` must
    exceed it are skipped and the result is truncated, which keeps products
    of short-time series small.
    """
    P = OperatorPoly.coerce(P)
    Q = OperatorPoly.coerce(Q)
    acc: dict[NormalWord, ScalarPoly] = {}
    for u, cu in P._terms.items():
        lo_u = cu.min_degree("t")
        for v, cv in Q._terms.items():
            if t_order is not None and lo_u + cv.min_degree("t") > t_order:
                continue
            coeff = cu * cv
            if t_order is not None:
                coeff = coeff.truncate("t", t_order)
            if coeff.is_zero():
                continue
            for k, w in _word_product(u, v):
                term = coeff if k == 1 else coeff * k
                if w in acc:
                    acc[w] = acc[w] + term
                else:
                    acc[w] = term
    return OperatorPoly._raw({w: c for w, c in acc.items() if not c.is_zero()})


def dagger(P: OperatorPoly) -> OperatorPoly:
    """Hermitian adjoint: words reversed (powers swapped), coefficients conjugated."""
    P = OperatorPoly.coerce(P)
    return OperatorPoly._raw({w.adjoint(): c.conj() for w, c in P._terms.items()})


def commutator(P: OperatorPoly, Q: OperatorPoly) -> OperatorPoly:
    return mul(P, Q) - mul(Q, P)


def truncate_t_order(P: OperatorPoly, order: int) -> OperatorPoly:
    """Drop every monomial whose power of ``t`` exceeds ``order``."""
    out = {}
    for w, c in OperatorPoly.coerce(P)._terms.items():
        c = c.truncate("t", order)
        if not c.is_zero():
            out[w] = c
    return OperatorPoly._raw(out)


def identity() -> OperatorPoly:
    return OperatorPoly._raw({NormalWord(): const(1)})


def annihilator(mode: ModeId, power: int = 1) -> OperatorPoly:
    return OperatorPoly.word(NormalWord.of({mode: (0, power)}))


def creator(mode: ModeId, power: int = 1) -> OperatorPoly:
    return OperatorPoly.word(NormalWord.of({mode: (power, 0)}))


def number(mode: ModeId) -> OperatorPoly:
    return OperatorPoly.word(NormalWord.of({mode: (1, 1)}))
