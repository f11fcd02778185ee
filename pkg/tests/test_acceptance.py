"""Acceptance gate. One test per criterion; the oracle-agreement criterion is split in parts.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""

import math
import random
import time

import numpy as np
import pytest

from antibunching.criterion import Classification, CountDistribution, MomentSet, classify, d_of_l, moments_from_distribution
from antibunching.fock import EvalPoint, build_system, default_dims, evolve, expectation, oracle_moments, prepare_state
from antibunching.operators import NormalWord, OperatorPoly, annihilator, commutator, dagger, mul, normal_order_product
from antibunching.scalars import I, CRational, ScalarPoly, symbol
from antibunching.shorttime import factorial_moment_operator, moment_series, taylor_evolve

from test_operators import MODES, _interior_columns, _poly_matrix, _word_matrix

g, t, alpha, alphabar = (symbol(s) for s in ("g", "t", "alpha", "alphabar"))
mod2 = alpha * alphabar
g2t2 = g**2 * t**2

GT_GRID = (1e-3, 3e-3, 1e-2)
ALPHA2_GRID = (0.5, 1.0, 2.0, 4.0)
LEVELS = (1, 2)
SCALING_BAND = (2.0, 4.5)  # error ratio for the 3.33x step, i.e. an O(t) relative correction


def op(a=(0, 0), b=(0, 0), c=(0, 0)):
    return OperatorPoly.word(NormalWord.of(a=a, b=b, c=c))


def symbolic_moments(l_max=2):
    return MomentSet(tuple(moment_series(l_max, order=2)), t_order=2)


@pytest.fixture(scope="module")
def oracle_grid():
    """Relative gaps ``gaps[(alpha2, l)] = [gap at each g t]`` plus wall time."""
    start = time.perf_counter()
    m = symbolic_moments()
    sym = {l: d_of_l(m, l) for l in LEVELS}
    gaps = {}
    for alpha2 in ALPHA2_GRID:
        for gt in GT_GRID:
            point = EvalPoint(1.0, gt, math.sqrt(alpha2))
            numeric = oracle_moments(point, max(LEVELS))
            for l in LEVELS:
                d_sym = sym[l].evaluate(point.symbol_values()).real
                gaps.setdefault((alpha2, l), []).append(abs(d_of_l(numeric, l) - d_sym) / abs(d_sym))
    return gaps, time.perf_counter() - start


def test_criterion_1_symbolic_exactness():
    start = time.perf_counter()
    m = symbolic_moments()
    assert d_of_l(m, 1) == -2 * g2t2 * mod2**2
    assert d_of_l(m, 2) == -6 * g2t2 * mod2**3
    assert time.perf_counter() - start < 1.0


def test_criterion_2_intermediate_reproductions(fwm):
    a_t = (
        op(a=(0, 1))
        - 2 * I * g * t * op(a=(1, 0), b=(0, 1), c=(0, 1))
        + 2 * g2t2 * op(a=(0, 1), b=(1, 1), c=(1, 1))
        - g2t2 * (op(a=(1, 2), b=(1, 1)) + op(a=(1, 2), c=(1, 1)) + op(a=(1, 2)))
    )
    start = time.perf_counter()
    assert taylor_evolve(fwm, annihilator("a"), 2) == a_t
    assert time.perf_counter() - start < 1.0
    start = time.perf_counter()
    n1, n2, n3 = moment_series(2, order=2)
    assert n2 == mod2**2 + g2t2 * (-4 * mod2**3 - 2 * mod2**2)
    assert n1.pow_truncated(2, "t", 2) == mod2**2 - 4 * g2t2 * mod2**3
    assert n3 == mod2**3 - g2t2 * (6 * mod2**4 + 6 * mod2**3)
    assert n1.pow_truncated(3, "t", 2) == mod2**3 - 6 * g2t2 * mod2**4
    assert time.perf_counter() - start < 1.0


def test_criterion_3a_agreement_at_gt_1e_3(oracle_grid):
    gaps, _ = oracle_grid
    worst = max(v[0] for v in gaps.values())
    assert worst <= 1e-2, f"worst relative gap {worst:.3e}"


def test_criterion_3b_agreement_at_gt_1e_2(oracle_grid):
    gaps, _ = oracle_grid
    worst = max(v[2] for v in gaps.values())
    assert worst <= 1e-1, f"worst relative gap {worst:.3e}"


def test_criterion_3c_gap_decreases_with_t(oracle_grid):
    gaps, _ = oracle_grid
    for key, v in gaps.items():
        assert v[0] < v[1] < v[2], key


def test_criterion_3d_gap_scaling_is_one_extra_power_of_t(oracle_grid):
    gaps, _ = oracle_grid
    ratios = {key: v[2] / v[1] for key, v in gaps.items()}
    outside = {k: round(r, 3) for k, r in ratios.items() if not SCALING_BAND[0] <= r <= SCALING_BAND[1]}
    # The t^3 term of every factorial moment vanishes for this Hamiltonian, so
    # the first omitted order is t^4 and the relative gap grows as t^2
    # (ratio near 3.33^2 = 11.1), which lies outside the band.
    assert not outside, f"error ratios outside {SCALING_BAND}: {outside}"


def test_criterion_3e_runtime(oracle_grid):
    _, seconds = oracle_grid
    assert seconds <= 60.0, f"{seconds:.1f} s"


def test_criterion_4_coherence_null():
    for alpha2 in ALPHA2_GRID:
        numeric = oracle_moments(EvalPoint(0.0, 1e-2, math.sqrt(alpha2)), 4)
        for l in range(1, 5):
            assert abs(d_of_l(numeric, l)) <= 1e-10, (alpha2, l)
    m = symbolic_moments(4)
    for l in range(1, 5):
        assert d_of_l(m, l).subs({"g": 0}).is_zero()


def test_criterion_5_criterion_layer_oracles():
    single = np.zeros(2)
    single[1] = 1.0
    assert d_of_l(moments_from_distribution(CountDistribution(single), 1), 1) == -1.0

    mu = 2.0
    p = np.array([math.exp(-mu) * mu**n / math.factorial(n) for n in range(41)])
    m = moments_from_distribution(CountDistribution(p / p.sum()), 3)
    for l in range(1, 4):
        assert abs(d_of_l(m, l)) <= 1e-8

    p = np.array([0.5 ** (n + 1) for n in range(61)])
    m = moments_from_distribution(CountDistribution(p / p.sum()), 1)
    assert abs(d_of_l(m, 1) - 1.0) <= 1e-6
    assert classify(d_of_l(m, 1)) is Classification.BUNCHED


def test_criterion_6_structural_identities():
    m = symbolic_moments()
    d1, d2 = d_of_l(m, 1), d_of_l(m, 2)
    assert d2 == 3 * mod2 * d1
    for d in (d1, d2):
        values = [abs(d.evaluate({"g": 1.0, "t": 1e-3, "alpha": math.sqrt(x), "alphabar": math.sqrt(x)}))
                  for x in (1.0, 2.0, 4.0)]
        assert values[0] < values[1] < values[2]


def _random_poly(rng):
    terms = {}
    for _ in range(rng.randint(1, 2)):
        word = NormalWord.of({m: (rng.randint(0, 2), rng.randint(0, 2)) for m in MODES})
        coeff = CRational(rng.randint(-2, 2), rng.randint(-2, 2))
        terms[word] = ScalarPoly({(("g", rng.randint(0, 1)), ("t", rng.randint(0, 1))): coeff})
    return OperatorPoly(terms)


def test_criterion_7_algebra_property_suite(fwm):
    rng = random.Random(20240515)
    for _ in range(200):
        u = NormalWord.of({m: (rng.randint(0, 3), rng.randint(0, 3)) for m in MODES})
        v = NormalWord.of({m: (rng.randint(0, 3), rng.randint(0, 3)) for m in MODES})
        dims = tuple(max(max(u.pair(m) + v.pair(m)) for m in MODES) + 6 for _ in MODES)
        cols = _interior_columns(u, v, dims)
        brute = (_word_matrix(u, dims) @ _word_matrix(v, dims))[:, cols]
        assert (brute != _poly_matrix(normal_order_product(u, v), dims)[:, cols]).nnz == 0, (u, v)

    for _ in range(50):
        P, Q, R = (_random_poly(rng) for _ in range(3))
        assert dagger(dagger(P)) == P
        assert dagger(mul(P, Q)) == mul(dagger(Q), dagger(P))
        assert commutator(P, Q) == -commutator(Q, P)
        assert commutator(P + R, Q) == commutator(P, Q) + commutator(R, Q)

    for l in range(1, 4):
        for order in range(3):
            X = factorial_moment_operator(fwm, "a", l, order)
            assert dagger(X) == X

    sys = build_system(default_dims(1.0), g=1.0)
    psi = prepare_state(sys, 1.0)
    conserved = [sys.number("a") + 2 * sys.number("b"), sys.number("b") - sys.number("c")]
    start = [expectation(psi, K).real for K in conserved]
    for _ in range(5):
        psi = evolve(sys, psi, 0.02)
        for K, v0 in zip(conserved, start):
            assert abs(expectation(psi, K).real - v0) <= 1e-8
