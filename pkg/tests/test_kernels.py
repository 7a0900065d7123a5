import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppclab.geometry import UsageError
from ppclab.kernels import (
    ZETA2,
    OverlapCase,
    classify_overlap,
    lemma21_expectation,
    lemma23_lhs,
    lemma24_check,
    lemma24_grid,
    remark22_expectation,
    sinc_pi,
    triangular_density,
)
from ppclab.numtheory import alpha_preset, geometric_exp_sum

from oracles import CASE_SLOTS, case_coefficients, integrate_density, product_expectation, tensor_expectation

FREQS = [r for r in range(-5, 6) if r]
EPSILONS = [0.1, 0.3, 0.7, 1.3]


@pytest.mark.parametrize("x, expected", [(0.0, 1.0), (1.0, 0.0), (0.5, 2 / math.pi)])
def test_sinc_examples(x, expected):
    assert sinc_pi(x) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-1e3, 1e3))
def test_sinc_even_and_bounded(x):
    assert sinc_pi(x) == sinc_pi(-x)
    assert abs(sinc_pi(x)) <= 1.0


def test_classification_total_and_unique():
    seen = {c: 0 for c in OverlapCase}
    for k, l, m, n in itertools.product(range(5), repeat=4):
        if k == l or m == n:
            with pytest.raises(UsageError):
                classify_overlap(k, l, m, n)
            continue
        case = classify_overlap(k, l, m, n)
        seen[case] += 1
        # the slot pattern of the case reproduces the coincidences of the tuple
        slots = CASE_SLOTS[case.value]
        idx = (k, l, m, n)
        for a in range(4):
            for b in range(4):
                assert (slots[a] == slots[b]) == (idx[a] == idx[b])
    assert all(v > 0 for v in seen.values())


def test_lemma21_examples():
    assert lemma21_expectation(1, 2, 1.0, OverlapCase.DISTINCT) == pytest.approx(0.0, abs=1e-15)
    assert lemma21_expectation(1, -1, 0.37, OverlapCase.KM_LN) == 1.0
    assert lemma21_expectation(2, 2, 0.37, OverlapCase.KN_LM) == 1.0


def test_lemma21_distinct_quadrature_example():
    got = lemma21_expectation(1, 2, 0.3, OverlapCase.DISTINCT)
    want = tensor_expectation(case_coefficients("distinct", 1, 2, 0.3))
    assert abs(got - want) < 1e-9


@pytest.mark.parametrize("case", [c.value for c in OverlapCase])
def test_lemma21_full_grid_against_quadrature(case):
    worst = 0.0
    for r, rp, eps in itertools.product(FREQS, FREQS, EPSILONS):
        want = product_expectation(case_coefficients(case, r, rp, eps))
        got = lemma21_expectation(r, rp, eps, OverlapCase.parse(case))
        assert isinstance(got, float)
        worst = max(worst, abs(got - want))
    assert worst < 1e-9


@pytest.mark.parametrize(
    "case, r, rp, eps",
    [
        ("k=m;l!=n", 3, -2, 0.7),
        ("k=n;l!=m", 4, 4, 1.3),
        ("k=m;l=n", -5, 5, 0.3),
        ("k=n;l=m", 2, -3, 0.1),
        ("k!=m;l=n", 1, 5, 1.3),
        ("distinct", -4, 3, 0.7),
    ],
)
def test_lemma21_unfactorised_tensor_rule(case, r, rp, eps):
    want = tensor_expectation(case_coefficients(case, r, rp, eps))
    assert abs(lemma21_expectation(r, rp, eps, OverlapCase.parse(case)) - want) < 1e-9


def test_lemma21_replacement_rules():
    for eps in EPSILONS:
        a = sinc_pi(3 * eps)
        # r = r': the (r - r') factor becomes 1
        assert lemma21_expectation(3, 3, eps, OverlapCase.K_EQ_N) == pytest.approx(a * a, abs=1e-15)
        # r = -r': the (r + r') factor becomes 1
        assert lemma21_expectation(3, -3, eps, OverlapCase.K_EQ_M) == pytest.approx(a * a, abs=1e-15)


@given(st.sampled_from(FREQS), st.sampled_from(FREQS), st.floats(0.01, 3.0), st.sampled_from(list(OverlapCase)))
def test_lemma21_bounded_and_mirror_symmetric(r, rp, eps, case):
    v = lemma21_expectation(r, rp, eps, case)
    assert -1.0 <= v <= 1.0
    assert lemma21_expectation(rp, r, eps, case.mirror) == pytest.approx(v, abs=1e-15)


@pytest.mark.parametrize("case", list(OverlapCase))
def test_kernels_continuous_at_zero_eps(case):
    assert lemma21_expectation(3, -2, 1e-9, case) == pytest.approx(1.0, abs=1e-12)
    assert remark22_expectation(4, 1e-9) == pytest.approx(1.0, abs=1e-12)


def test_lemma21_errors():
    with pytest.raises(UsageError):
        lemma21_expectation(0, 1, 0.1, OverlapCase.DISTINCT)
    with pytest.raises(UsageError):
        lemma21_expectation(1, 1, 0.0, OverlapCase.DISTINCT)
    with pytest.raises(UsageError):
        OverlapCase.parse("k=l")


def test_remark22():
    assert remark22_expectation(2, 0.5) == pytest.approx(0.0, abs=1e-30)
    want = tensor_expectation([0.25, -0.25])
    assert abs(remark22_expectation(1, 0.25) - want) < 1e-9
    with pytest.raises(UsageError):
        remark22_expectation(0, 0.5)


def test_triangular_density_values():
    assert triangular_density([0.0], 0.5) == 2.0
    assert triangular_density([0.5], 0.5) == 0.0
    assert triangular_density([0.1, -0.3], 0.3) == 0.0
    assert triangular_density([0.25, 0.0], 0.5) == pytest.approx(2.0 * 0.5 * 2.0)


@pytest.mark.parametrize("d, n", [(1, 64), (2, 64), (3, 16)])
@pytest.mark.parametrize("eps", [0.2, 1.0, 2.5])
def test_triangular_density_integrates_to_one(d, n, eps):
    assert integrate_density(lambda x: triangular_density(x, eps), eps, d, n) == pytest.approx(1.0, abs=1e-9)


def test_lemma23_trivial_cases():
    a = alpha_preset("golden")
    assert lemma23_lhs(a, 1.0, 200, 100).lhs == pytest.approx(0.0, abs=1e-20)
    assert lemma23_lhs(a, 0.5, 1, 100).lhs == 0.0


def test_lemma23_against_direct_double_sum():
    a = alpha_preset("golden")
    N, R, eps = 30, 25, 0.5
    k = np.arange(1, N + 1)
    total = 0.0
    for r in list(range(-R, 0)) + list(range(1, R + 1)):
        ph = (r * k * a.values[0]) % 1.0
        pair = np.exp(2j * np.pi * (ph[:, None] - ph[None, :]))
        np.fill_diagonal(pair, 0.0)
        total += sinc_pi(r * eps) ** 2 * abs(pair.sum().real)
    res = lemma23_lhs(a, eps, N, R)
    assert res.lhs == pytest.approx(total, rel=1e-9)
    assert res.tail == pytest.approx(2 * N**2 / (math.pi**2 * eps**2 * R))


def test_lemma23_tail_bounds_the_omitted_terms():
    a = alpha_preset("golden")
    N, eps = 50, 0.5
    short, long = lemma23_lhs(a, eps, N, 100), lemma23_lhs(a, eps, N, 20000)
    assert long.lhs - short.lhs <= short.tail


def test_lemma23_envelope_non_increasing():
    a = alpha_preset("golden")
    ratios = [lemma23_lhs(a, 0.5, N, 10**5).lhs / N**1.5 for N in (100, 1000, 10**4)]
    assert ratios[0] >= ratios[1] >= ratios[2]


def test_zeta2_and_lemma24_rhs():
    assert ZETA2 == pytest.approx(1.6449341, abs=1e-7)
    assert lemma24_check(1, 0.0, 100).rhs == pytest.approx(6.9348, abs=1e-4)


def test_lemma24_sum_by_loop():
    rp, sigma, R = -3, 0.25, 400
    want = math.fsum(r**-sigma / (r + rp) ** 2 for r in range(1, R + 1) if r != abs(rp))
    res = lemma24_check(rp, sigma, R)
    assert res.lhs == pytest.approx(want, rel=1e-12)
    assert res.satisfied


def test_lemma24_tail_bounds_remainder():
    for rp in (1, -2, 7):
        short, long = lemma24_check(rp, 0.0, 4 * abs(rp) + 40), lemma24_check(rp, 0.0, 10**5)
        assert long.lhs - short.lhs <= short.tail


def test_lemma24_grid_agrees_with_single():
    grid = lemma24_grid([1, 5, -2], [0.0, 0.9], 200)
    single = [lemma24_check(rp, s, 200) for s in (0.0, 0.9) for rp in (1, 5, -2)]
    for g, s in zip(grid, single):
        assert g.lhs == pytest.approx(s.lhs, rel=1e-14)
        assert g.params == s.params


def test_lemma24_errors():
    with pytest.raises(UsageError):
        lemma24_check(0, 0.5, 100)
    with pytest.raises(UsageError):
        lemma24_check(1, 1.0, 100)
    with pytest.raises(UsageError):
        lemma24_check(30, 0.5, 100)


def test_geometric_identity_used_by_lemma23():
    a = alpha_preset("golden")
    th = float(a.phase(np.array([[3]]))[0])
    N = 40
    k = np.arange(1, N + 1)
    pair = np.exp(2j * np.pi * th * (k[:, None] - k[None, :]))
    np.fill_diagonal(pair, 0)
    assert abs(geometric_exp_sum(th, N)) ** 2 - N == pytest.approx(pair.sum().real, abs=1e-9)
