"""Exact multivariate polynomials with complex-rational coefficients.

Coefficients are Gaussian rationals (rational real and imaginary parts), so
every identity produced by the operator engine is checked by structural
equality instead of floating-point closeness.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Mapping

__all__ = [
    "CRational",
    "ScalarPoly",
    "SYMBOL_ORDER",
    "CONJUGATE_SYMBOLS",
    "symbol",
    "const",
    "I",
]

# Canonical layout order; unknown symbols sort after these, alphabetically.
SYMBOL_ORDER = ("g", "t", "w1", "w2", "w3", "alpha", "alphabar")
CONJUGATE_SYMBOLS = {"alpha": "alphabar", "alphabar": "alpha"}

_RANK = {name: i for i, name in enumerate(SYMBOL_ORDER)}


def _symbol_key(name: str):
    return (_RANK.get(name, len(_RANK)), name)


class CRational:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "CRational":
        if isinstance(value, CRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (Rational, float, str)):
            return cls(Fraction(value))
        raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")

    def __add__(self, other):
        other = CRational.coerce(other)
        return CRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-CRational.coerce(other))

    def __mul__(self, other):
        o = CRational.coerce(other)
        return CRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CRational.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero coefficient")
        return self * CRational(o.re / den, -o.im / den)

    def conjugate(self) -> "CRational":
        return CRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = CRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"CRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


Monomial = tuple  # tuple[tuple[str, int], ...], sorted by _symbol_key


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for name, p in m2:
        powers[name] = powers.get(name, 0) + p
    return tuple(sorted(powers.items(), key=lambda kv: _symbol_key(kv[0])))


def _mono_degree(m: Monomial, name: str) -> int:
    for sym, p in m:
        if sym == name:
            return p
    return 0


class ScalarPoly:
    """Polynomial over commuting named symbols with exact complex coefficients.

    Instances are immutable. Zero coefficients are never stored, so two
    polynomials are equal exactly when their term dictionaries are equal.

    Examples
    --------
    >>> g, t = symbol("g"), symbol("t")
    >>> str(-2 * g**2 * t**2)
    '-2g²t²'
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = CRational.coerce(c)
                if c:
                    mono = tuple(sorted(((s, int(p)) for s, p in mono if p), key=lambda kv: _symbol_key(kv[0])))
                    prev = clean.get(mono)
                    c = c if prev is None else prev + c
                    if c:
                        clean[mono] = c
                    else:
                        clean.pop(mono, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "ScalarPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def coerce(cls, value) -> "ScalarPoly":
        if isinstance(value, ScalarPoly):
            return value
        return const(value)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in deterministic order: by power of ``t``, then lexicographically."""
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def symbols(self) -> set[str]:
        return {s for mono in self._terms for s, _ in mono}

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not mono for mono in self._terms)

    def constant_term(self) -> CRational:
        return self._terms.get((), CRational())

    def degree(self, name: str) -> int:
        """Highest power of ``name``; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(_mono_degree(m, name) for m in self._terms)

    def min_degree(self, name: str) -> int:
        """Lowest power of ``name`` among stored terms; -1 for zero."""
        if not self._terms:
            return -1
        return min(_mono_degree(m, name) for m in self._terms)

    def truncate(self, name: str, order: int) -> "ScalarPoly":
        """Drop every term whose power of ``name`` exceeds ``order``."""
        kept = {m: c for m, c in self._terms.items() if _mono_degree(m, name) <= order}
        if len(kept) == len(self._terms):
            return self
        return ScalarPoly._raw(kept)

    def coefficient(self, name: str, power: int) -> "ScalarPoly":
        """Collect the coefficient of ``name**power`` as a polynomial in the other symbols."""
        out = {}
        for m, c in self._terms.items():
            if _mono_degree(m, name) == power:
                out[tuple((s, p) for s, p in m if s != name)] = c
        return ScalarPoly._raw(out)

    def conj(self) -> "ScalarPoly":
        """Complex conjugate: ``i -> -i`` and paired symbols swapped (alpha <-> alphabar)."""
        out = {}
        for m, c in self._terms.items():
            mono = tuple(sorted(((CONJUGATE_SYMBOLS.get(s, s), p) for s, p in m),
                                key=lambda kv: _symbol_key(kv[0])))
            out[mono] = c.conjugate()
        return ScalarPoly._raw(out)

    def subs(self, values: Mapping[str, object]) -> "ScalarPoly":
        """Exact substitution of symbols by constants or polynomials."""
        result = ScalarPoly()
        for m, c in self._terms.items():
            term = ScalarPoly._raw({(): c})
            rest = []
            for s, p in m:
                if s in values:
                    term = term * ScalarPoly.coerce(values[s]) ** p
                else:
                    rest.append((s, p))
            result = result + term * ScalarPoly._raw({tuple(rest): CRational(1)})
        return result

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Floating-point evaluation; every symbol present must be bound."""
        missing = self.symbols() - set(values)
        if missing:
            raise KeyError(f"unbound symbols: {sorted(missing)}")
        total = 0j
        for m, c in self._terms.items():
            v = complex(c)
            for s, p in m:
                v *= complex(values[s]) ** p
            total += v
        return total

    def __add__(self, other):
        other = ScalarPoly.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            prev = out.get(m)
            if prev is None:
                out[m] = c
            else:
                s = prev + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return ScalarPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-ScalarPoly.coerce(other))

    def __rsub__(self, other):
        return ScalarPoly.coerce(other) - self

    def __mul__(self, other):
        try:
            other = ScalarPoly.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                prev = out.get(m)
                if prev is not None:
                    c = prev + c
                if c:
                    out[m] = c
                else:
                    out.pop(m, None)
        return ScalarPoly._raw(out)

    def __rmul__(self, other):
        return ScalarPoly.coerce(other) * self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def pow_truncated(self, n: int, name: str, order: int) -> "ScalarPoly":
        """``self**n`` with powers of ``name`` above ``order`` dropped at every step."""
        result = const(1)
        for _ in range(n):
            result = (result * self).truncate(name, order)
        return result

    def __eq__(self, other):
        try:
            other = ScalarPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"ScalarPoly({self!s})"

    def __str__(self):
        from .render import scalar_to_text

        return scalar_to_text(self)


def _sort_key(mono: Monomial):
    exps = dict(mono)
    known = tuple(exps.get(s, 0) for s in SYMBOL_ORDER)
    extra = tuple(sorted((s, p) for s, p in mono if s not in _RANK))
    return (exps.get("t", 0), known, extra)


def symbol(name: str) -> ScalarPoly:
    return ScalarPoly._raw({((name, 1),): CRational(1)})


def const(value) -> ScalarPoly:
    c = CRational.coerce(value)
    return ScalarPoly._raw({(): c} if c else {})


I = ScalarPoly._raw({(): CRational(0, 1)})
