"""
Expansivity of weighted shifts
==============================

Analytic verdicts next to brute-force orbit growth.
"""

import numpy as np
from gmpy2 import mpq

from shadowlab.hyperbolicity import (classify_expansivity_shift, expansion_certificate,
                                     orbit_growth_scan, uniform_expansivity_witness)
from shadowlab.operators import ConstantTail, PowerLawTail, ShiftOperator, WeightSequence
from shadowlab.spaces import Lp, OmegaProduct, RapidDecrease, SeqVec

cases = {
    "constant 2 on l2": (WeightSequence.constant(2), Lp(2)),
    "3 / (1/5) on the product space": (
        WeightSequence.from_table({0: 3}, ConstantTail(3), ConstantTail(mpq(1, 5))), OmegaProduct()),
    "power law on rapid decrease": (
        WeightSequence.from_table({0: 1}, PowerLawTail(1, -1), PowerLawTail(1, 1)), RapidDecrease()),
}

e0 = SeqVec.basis(0)
for name, (w, fam) in cases.items():
    T = ShiftOperator("forward", w)
    v = classify_expansivity_shift(T, fam, (1, 2))
    fwd = orbit_growth_scan(T, e0, fam, (1, 2), 300, 1)
    bwd = orbit_growth_scan(T, e0, fam, (1, 2), 300, -1)
    print(f"{name}: {v.kind.value}; e0 grows forward {fwd.grows(1) or fwd.grows(2)},",
          f"backward {bwd.grows(1) or bwd.grows(2)}")

# uniform growth: every unit vector doubles after one step on one side
w = WeightSequence.from_table({-1: mpq(1, 2), 0: 2}, ConstantTail(mpq(1, 2)), ConstantTail(2))
T = ShiftOperator("forward", w)
fam = RapidDecrease()
ec = expansion_certificate(T, fam, (1,))
rng = np.random.default_rng(0)
samples = []
for _ in range(10):
    x = SeqVec((-4, 4), rng.standard_normal(9)).to_exact()
    samples.append(x.scale(1 / mpq(sum(abs(c) * (abs(j) + 1) for j, c in x.items()))))
rep = uniform_expansivity_witness(ec, T, fam, samples, 10, 1)
print("sides:", [s.side for s in rep.samples], "all hold:", rep.all_hold)
