"""Closed-form expectations behind the variance estimate, checked by quadrature.

For each index-overlap pattern the expectation of the product of exponentials
reduces to a product of sinc factors. Here we compare the closed form with a
64-point Gauss-Legendre rule per axis and then look at the two series bounds.
"""

import numpy as np

from ppclab import OverlapCase, alpha_preset, lemma21_expectation, lemma23_lhs, lemma24_check

nodes, weights = np.polynomial.legendre.leggauss(64)
nodes, weights = (nodes + 1) / 2, weights / 2


def quad_exp(coeff):
    # E[exp(2 pi i c U)] for U uniform on [0, 1), one factor per independent variable
    return np.sum(weights * np.exp(2j * np.pi * coeff * nodes))


r, rp, eps = 3, -2, 0.7
coeffs = {
    OverlapCase.DISTINCT: [r * eps, -r * eps, rp * eps, -rp * eps],
    OverlapCase.KM_LN: [(r + rp) * eps, -(r + rp) * eps],
    OverlapCase.KN_LM: [(r - rp) * eps, -(r - rp) * eps],
}
for case, cs in coeffs.items():
    q = np.prod([quad_exp(c) for c in cs]).real
    print(f"{case.value:<10} closed form {lemma21_expectation(r, rp, eps, case): .12f}  quadrature {q: .12f}")

print()
for rp in (1, 10, 100):
    res = lemma24_check(rp, 0.5, 10**5)
    print(f"series bound rp={rp:<4} lhs+tail={res.lhs + res.tail:.4f} <= rhs={res.rhs:.4f}: {res.satisfied}")

golden = alpha_preset("golden")
for N in (100, 1000, 10000):
    res = lemma23_lhs(golden, 0.5, N, 10**5)
    print(f"weighted pair sum N={N:<6} (lhs+tail)/N^1.5 = {(res.lhs + res.tail) / N**1.5:.4f}")
