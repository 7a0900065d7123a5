"""Continued fractions of the preset irrationals, computed from exact surds.

Bounded partial quotients are what make a number badly approximable, and the
products q * ||q alpha|| stay away from zero.
"""

from ppclab import alpha_preset, badness_profile, cf_expand

for name in ("golden", "sqrt2", "sqrt23"):
    alpha = alpha_preset(name)
    for i, x in enumerate(alpha.exact):
        cf = cf_expand(x, 12)
        prof = badness_profile(x, 30)
        print(f"{name}[{i}] = {x}")
        print(f"  quotients {cf.partial_quotients}")
        print(f"  last convergent {cf.convergents[-1][0]}/{cf.convergents[-1][1]}")
        print(f"  max quotient {prof.max_quotient}, min q*||q x|| {prof.min_product:.4f}, "
              f"tail min {prof.tail_min_product:.4f}")
    print(f"  independence: {alpha.independence_note}")
