"""Text, LaTeX and JSON forms of scalar and operator polynomials.

Term order is deterministic everywhere.  ``(α ᾱ)^k`` factors are displayed
as ``|α|^(2k)``.
"""

from __future__ import annotations

from fractions import Fraction

from .operators import NormalWord, OperatorPoly
from .scalars import CRational, ScalarPoly

__all__ = [
    "scalar_to_text",
    "scalar_to_latex",
    "word_to_text",
    "word_to_latex",
    "operator_to_text",
    "operator_to_latex",
    "scalar_to_json",
    "scalar_from_json",
    "operator_to_json",
    "operator_from_json",
]

_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")

_TEXT_NAMES = {"alpha": "α", "alphabar": "ᾱ", "w1": "ω1", "w2": "ω2", "w3": "ω3"}
_LATEX_NAMES = {
    "alpha": r"\alpha",
    "alphabar": r"\bar{\alpha}",
    "w1": r"\omega_{1}",
    "w2": r"\omega_{2}",
    "w3": r"\omega_{3}",
}


def _sup(n: int) -> str:
    return "" if n == 1 else str(n).translate(_SUP)


def _split_modulus(mono) -> tuple[list[tuple[str, int]], int]:
    """Pull the common α ᾱ power out of a monomial as a modulus power."""
    powers = dict(mono)
    k = min(powers.get("alpha", 0), powers.get("alphabar", 0))
    if k:
        powers["alpha"] -= k
        powers["alphabar"] -= k
    return [(s, powers[s]) for s, _ in mono if powers[s]], k


def _coeff_parts(c: CRational) -> tuple[str, str]:
    """Sign and magnitude text for a coefficient; unit magnitude gives ''."""
    if c.im == 0:
        sign = "-" if c.re < 0 else "+"
        mag = abs(c.re)
        return sign, "" if mag == 1 else str(mag)
    if c.re == 0:
        sign = "-" if c.im < 0 else "+"
        mag = abs(c.im)
        return sign, ("i" if mag == 1 else f"{mag}i")
    return "+", f"({c.re}{'+' if c.im > 0 else '-'}{abs(c.im)}i)"


def _mono_text(mono) -> str:
    rest, k = _split_modulus(mono)
    out = "".join(f"{_TEXT_NAMES.get(s, s)}{_sup(p)}" for s, p in rest if s not in ("alpha", "alphabar"))
    if k:
        out += f"|α|{_sup(2 * k)}"
    out += "".join(f"{_TEXT_NAMES[s]}{_sup(p)}" for s, p in rest if s in ("alpha", "alphabar"))
    return out


def _join(pieces: list[tuple[str, str]]) -> str:
    if not pieces:
        return "0"
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def scalar_to_text(p: ScalarPoly) -> str:
    pieces = []
    for mono, c in p.items():
        sign, mag = _coeff_parts(c)
        body = mag + _mono_text(mono)
        pieces.append((sign, body or "1"))
    return _join(pieces)


def word_to_text(w: NormalWord) -> str:
    if w.is_identity():
        return "1"
    out = ""
    for mode, p, q in w.powers:
        name = mode.upper()
        if p:
            out += f"{name}†{_sup(p)}"
        if q:
            out += f"{name}{_sup(q)}"
    return out


def operator_to_text(P: OperatorPoly) -> str:
    pieces = []
    for word, coeff in P.items():
        wtext = "" if word.is_identity() else word_to_text(word)
        if len(coeff.terms) == 1:
            (mono, c), = coeff.items()
            sign, mag = _coeff_parts(c)
            body = mag + _mono_text(mono) + wtext
            pieces.append((sign, body or "1"))
        else:
            pieces.append(("+", f"({scalar_to_text(coeff)}){wtext}"))
    return _join(pieces)


def _latex_frac(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return rf"\frac{{{x.numerator}}}{{{x.denominator}}}"


def _latex_coeff(c: CRational) -> tuple[str, str]:
    if c.im == 0:
        mag = abs(c.re)
        return ("-" if c.re < 0 else "+"), ("" if mag == 1 else _latex_frac(mag))
    if c.re == 0:
        mag = abs(c.im)
        return ("-" if c.im < 0 else "+"), ("i" if mag == 1 else f"{_latex_frac(mag)} i")
    sign = "+" if c.im > 0 else "-"
    return "+", rf"\left({_latex_frac(c.re)} {sign} {_latex_frac(abs(c.im))} i\right)"


def _latex_pow(base: str, p: int) -> str:
    return base if p == 1 else f"{base}^{{{p}}}"


def _mono_latex(mono) -> str:
    rest, k = _split_modulus(mono)
    parts = [_latex_pow(_LATEX_NAMES.get(s, s), p) for s, p in rest if s not in ("alpha", "alphabar")]
    if k:
        parts.append(rf"|\alpha|^{{{2 * k}}}")
    parts += [_latex_pow(_LATEX_NAMES[s], p) for s, p in rest if s in ("alpha", "alphabar")]
    return " ".join(parts)


def scalar_to_latex(p: ScalarPoly) -> str:
    pieces = []
    for mono, c in p.items():
        sign, mag = _latex_coeff(c)
        body = " ".join(x for x in (mag, _mono_latex(mono)) if x)
        pieces.append((sign, body or "1"))
    return _join(pieces)


def word_to_latex(w: NormalWord) -> str:
    if w.is_identity():
        return "1"
    parts = []
    for mode, p, q in w.powers:
        name = mode.upper()
        if p:
            parts.append(rf"{name}^{{\dagger {p}}}" if p > 1 else rf"{name}^{{\dagger}}")
        if q:
            parts.append(_latex_pow(name, q))
    return " ".join(parts)


def operator_to_latex(P: OperatorPoly) -> str:
    pieces = []
    for word, coeff in P.items():
        wtex = "" if word.is_identity() else word_to_latex(word)
        if len(coeff.terms) == 1:
            (mono, c), = coeff.items()
            sign, mag = _latex_coeff(c)
            body = " ".join(x for x in (mag, _mono_latex(mono), wtex) if x)
            pieces.append((sign, body or "1"))
        else:
            pieces.append(("+", rf"\left({scalar_to_latex(coeff)}\right) {wtex}".rstrip()))
    return _join(pieces)


# JSON shape
# ScalarPoly:   [{"coeff": ["re", "im"], "powers": {"g": 2, "t": 2}}, ...]
# OperatorPoly: {"modes": ["a", "b", "c"],
#                "terms": [{"word": {"a": [p, q], ...}, "coeff": <ScalarPoly>}, ...]}
# Rationals are strings such as "-1/2" so the round trip is exact.


def scalar_to_json(p: ScalarPoly) -> list[dict]:
    return [
        {"coeff": [str(c.re), str(c.im)], "powers": {s: e for s, e in mono}}
        for mono, c in p.items()
    ]


def scalar_from_json(data: list[dict]) -> ScalarPoly:
    terms = {}
    for entry in data:
        re, im = entry["coeff"]
        mono = tuple(entry.get("powers", {}).items())
        terms[mono] = CRational(Fraction(re), Fraction(im))
    return ScalarPoly(terms)


def operator_to_json(P: OperatorPoly) -> dict:
    modes = sorted({m for w in P for m in w.modes()}, key=lambda m: NormalWord.of({m: (1, 0)}).sort_key())
    return {
        "modes": modes,
        "terms": [
            {"word": {m: [p, q] for m, p, q in w.powers}, "coeff": scalar_to_json(c)}
            for w, c in P.items()
        ],
    }


def operator_from_json(data: dict) -> OperatorPoly:
    return OperatorPoly(
        {
            NormalWord.of({m: tuple(pq) for m, pq in term["word"].items()}): scalar_from_json(term["coeff"])
            for term in data["terms"]
        }
    )
