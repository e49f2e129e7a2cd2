"""
Shadowing a split weighted shift
================================

A forward shift on rapidly decreasing sequences that contracts to the right
and expands to the left. We find its splitting, draw random delta-chains and
shadow them by true orbits.
"""

import numpy as np
from gmpy2 import mpq

from shadowlab.hyperbolicity import delta_for_epsilon, detect_split
from shadowlab.operators import ConstantTail, ShiftOperator, WeightSequence
from shadowlab.shadowing import make_chain, random_cycle, shadow_finite, shadow_periodic
from shadowlab.spaces import RapidDecrease, SeqVec

# weights 4 on the left half, 1/4 on the right half
w = WeightSequence.from_table({-1: 4, 0: mpq(1, 4)}, ConstantTail(4), ConstantTail(mpq(1, 4)))
T = ShiftOperator("forward", w)
fam = RapidDecrease()

cert = detect_split(T, fam, (1, 2, 3))
for k in (1, 2, 3):
    g = cert.constants(k)
    print(f"grade {k}: c = {g.c:.4f}, t = {g.t}")
print("M side:", cert.m_side, "boundary at", cert.split_boundary)

# how small must the defects be for a 0.1-shadow at grade 2
eps = 0.1
_, delta = delta_for_epsilon(cert, eps, 2)
print(f"delta = {delta:.4e}")

window = (-64, 64)
devs = []
for seed in range(20):
    chain = make_chain(T, fam, SeqVec.zeros(window, exact=True), 50, 2, delta, seed=seed,
                       window=window)
    rep = shadow_finite(chain, cert, T)
    devs.append(rep.max_deviation)
devs = np.array(devs)
print(f"max deviation over 20 chains: {devs.max():.4e} (bound {rep.bound_used:.4e})")

# a closed cycle gets a genuinely periodic shadow
_, delta_p = delta_for_epsilon(cert, eps, 2, "periodic")
cycle = random_cycle(T, fam, 5, 2, delta_p, seed=3, window=(-12, 12))
prep = shadow_periodic(cycle, cert, T, 1e-12)
print(f"period 5: residual {prep.periodic_residual:.2e} <= {prep.residual_bound:.2e},",
      f"deviation {prep.max_deviation:.4e}")
