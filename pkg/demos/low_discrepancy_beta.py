"""Low-discrepancy sequences and the beta-scaled pair correlation.

With window s/N^beta for beta < 1/d the statistic only needs equidistribution,
so van der Corput and Kronecker already give 2^d s. Their discrepancy stays
within a constant times log(N)/N, while iid points drift away from that rate.
"""

from ppclab import PairCorrQuery, generate, low_disc_scaling, pair_corr, parse_spec

N = 10**5
for spec in ("vdc:2", "kronecker:golden", "halton:2,3"):
    seq = parse_spec(spec)
    pts = generate(seq, N)
    beta = 0.5 if pts.dim == 1 else 0.25
    res = pair_corr(pts, PairCorrQuery(beta, (0.5, 1.0)))
    target = [2**pts.dim * s for s in (0.5, 1.0)]
    print(f"{spec:<18} beta={beta}  F={res.F.round(4).tolist()}  target={target}")

print()
print("N * D_N / log N")
ladder = [10, 100, 10**3, 10**4, 10**5]
for spec in ("vdc:2", "kronecker:golden", "iid:d=1:seed=1"):
    row = low_disc_scaling(parse_spec(spec), ladder)
    print(f"{spec:<18} " + "  ".join(f"{v:7.3f}" for _, v in row))
