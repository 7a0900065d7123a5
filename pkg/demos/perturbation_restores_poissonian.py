"""A golden-ratio Kronecker sequence is far from Poissonian pair correlation.

Nudging every point by an independent uniform kick of width eps changes that:
F_N(s) settles on 2s. Run with ``python3 demos/perturbation_restores_poissonian.py``.
"""

from ppclab import PairCorrQuery, generate, pair_corr, parse_spec

S_VALUES = (0.5, 1.0, 2.0)
query = PairCorrQuery(beta=1.0, s_values=S_VALUES)

print("unperturbed kronecker:golden")
for N in (10**3, 10**4, 10**5):
    res = pair_corr(generate(parse_spec("kronecker:golden"), N), query)
    print(f"  N={N:>7d}  " + "  ".join(f"F({s})={f:.3f}" for s, f in zip(S_VALUES, res.F)))

for eps in (0.1, 0.01):
    print(f"perturbed, eps={eps}")
    for N in (10**3, 10**4, 10**5):
        spec = parse_spec(f"perturbed:golden:eps={eps}:seed=7")
        res = pair_corr(generate(spec, N), query)
        print(f"  N={N:>7d}  " + "  ".join(f"F({s})={f:.3f}" for s, f in zip(S_VALUES, res.F)))

print("target 2s:", ", ".join(f"{2 * s:g}" for s in S_VALUES))
