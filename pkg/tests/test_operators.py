import random
from functools import reduce

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from antibunching.operators import (
    NormalWord,
    OperatorPoly,
    annihilator,
    commutator,
    creator,
    dagger,
    identity,
    mul,
    normal_order_product,
    truncate_t_order,
)
from antibunching.scalars import I, CRational, ScalarPoly, symbol

g, t = symbol("g"), symbol("t")
MODES = ("a", "b", "c")


def W(**kw):
    return NormalWord.of(kw)


# Integer-valued ladder representation: lower|n> = n|n-1>, raise|n> = |n+1>.
# It is similar to the usual one via diag(sqrt(n!)), so [lower, raise] = 1 holds
# exactly away from the top state and all products stay in int64.
def _int_ladders(d):
    lower = sp.diags(np.arange(1, d, dtype=np.int64), 1, shape=(d, d), format="csr", dtype=np.int64)
    raise_ = sp.diags(np.ones(d - 1, dtype=np.int64), -1, shape=(d, d), format="csr", dtype=np.int64)
    return lower, raise_


def _word_matrix(word, dims):
    factors = []
    for mode, d in zip(MODES, dims):
        lower, raise_ = _int_ladders(d)
        p, q = word.pair(mode)
        m = sp.identity(d, dtype=np.int64, format="csr")
        for _ in range(p):
            m = m @ raise_
        for _ in range(q):
            m = m @ lower
        factors.append(m)
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)


def _poly_matrix(P, dims):
    total = sp.csr_matrix((int(np.prod(dims)),) * 2, dtype=np.int64)
    for w, c in P.items():
        (mono, coeff), = c.items()
        assert mono == () and coeff.im == 0 and coeff.re.denominator == 1
        total = total + int(coeff.re) * _word_matrix(w, dims)
    return total


def _interior_columns(u, v, dims):
    """Basis columns where no intermediate state of ``u·v`` reaches past the cutoff."""
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    ok = np.ones(grids[0].shape, dtype=bool)
    for k, mode in enumerate(MODES):
        ok &= grids[k] + u.pair(mode)[0] + v.pair(mode)[0] <= dims[k] - 1
    return np.flatnonzero(ok.ravel())


def test_defining_commutator():
    assert normal_order_product(W(a=(0, 1)), W(a=(1, 0))) == OperatorPoly({W(a=(1, 1)): 1, W(): 1})


def test_a2_adag2_against_brute_force():
    u, v = W(a=(0, 2)), W(a=(2, 0))
    expected = OperatorPoly({W(a=(2, 2)): 1, W(a=(1, 1)): 4, W(): 2})
    dims = (10, 1 + 1, 1 + 1)
    cols = _interior_columns(u, v, dims)
    brute = (_word_matrix(u, dims) @ _word_matrix(v, dims)).toarray()[:, cols]
    assert np.array_equal(brute, _poly_matrix(expected, dims).toarray()[:, cols])
    assert normal_order_product(u, v) == expected


def test_distinct_modes_commute_without_corrections():
    assert normal_order_product(W(a=(1, 0), b=(0, 1)), W(c=(1, 1))) == OperatorPoly.word(
        W(a=(1, 0), b=(0, 1), c=(1, 1))
    )


def test_normal_order_soundness_200_random_pairs():
    rng = random.Random(20240515)
    for _ in range(200):
        u = NormalWord.of({m: (rng.randint(0, 3), rng.randint(0, 3)) for m in MODES})
        v = NormalWord.of({m: (rng.randint(0, 3), rng.randint(0, 3)) for m in MODES})
        maxp = max(max(u.pair(m) + v.pair(m)) for m in MODES)
        dims = tuple(maxp + 6 for _ in MODES)
        cols = _interior_columns(u, v, dims)
        assert cols.size
        brute = (_word_matrix(u, dims) @ _word_matrix(v, dims))[:, cols]
        engine = _poly_matrix(normal_order_product(u, v), dims)[:, cols]
        assert (brute != engine).nnz == 0, (u, v)


def test_identity_is_neutral():
    P = annihilator("a") * (2 * I * g) + creator("b", 2)
    assert identity() * P == P
    assert P * identity() == P


def test_dagger_examples():
    assert dagger(identity()) == identity()
    x = OperatorPoly.word(W(a=(1, 0), b=(0, 1), c=(0, 1)), I * g)
    assert dagger(x) == OperatorPoly.word(W(a=(0, 1), b=(1, 0), c=(1, 0)), -I * g)


def test_basic_commutators():
    a, b = annihilator("a"), annihilator("b")
    assert commutator(a, creator("a")) == identity()
    assert commutator(a, b).is_zero()
    assert commutator(a, creator("b")).is_zero()


def test_truncate_t_order():
    P = annihilator("a") * (g**3 * t**3) + creator("a") * (g * t)
    assert truncate_t_order(P, 2) == creator("a") * (g * t)
    assert truncate_t_order(P, 10) == P


def test_mul_with_t_order_matches_truncated_product():
    x = annihilator("a") + OperatorPoly.word(W(a=(1, 0), b=(0, 1)), g * t) + creator("c") * t**2
    y = dagger(x)
    assert mul(x, y, t_order=2) == truncate_t_order(mul(x, y), 2)


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        NormalWord((("a", -1, 0),))


# random operator polynomials with scalar coefficients over g, t
@st.composite
def words(draw):
    return NormalWord.of({m: (draw(st.integers(0, 2)), draw(st.integers(0, 2))) for m in MODES})


@st.composite
def coeffs(draw):
    re, im = draw(st.integers(-2, 2)), draw(st.integers(-2, 2))
    return ScalarPoly({(("g", draw(st.integers(0, 1))), ("t", draw(st.integers(0, 1)))): CRational(re, im)})


@st.composite
def operators(draw, max_terms=2):
    n = draw(st.integers(1, max_terms))
    return OperatorPoly({draw(words()): draw(coeffs()) for _ in range(n)})


@settings(max_examples=40, deadline=None)
@given(operators(), operators(), operators())
def test_mul_is_associative(P, Q, R):
    assert mul(mul(P, Q), R) == mul(P, mul(Q, R))


@settings(max_examples=60, deadline=None)
@given(operators(), operators())
def test_dagger_is_involutive_antihomomorphism(P, Q):
    assert dagger(dagger(P)) == P
    assert dagger(mul(P, Q)) == mul(dagger(Q), dagger(P))


@settings(max_examples=60, deadline=None)
@given(operators(), operators(), operators())
def test_commutator_antisymmetric_and_bilinear(P, Q, R):
    assert commutator(P, P).is_zero()
    assert commutator(P, Q) == -commutator(Q, P)
    assert commutator(P + R, Q) == commutator(P, Q) + commutator(R, Q)
    assert commutator(P, Q * (2 * g)) == commutator(P, Q) * (2 * g)
