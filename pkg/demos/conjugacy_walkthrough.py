"""
Conjugating a perturbed shift
=============================

The split shift plus a small constant is conjugate to the shift itself.
We evaluate the conjugacy at a few points, then build ball homeomorphisms
that move one point to another.
"""

import numpy as np
from gmpy2 import mpq

from shadowlab.conjugacy import (ConjugacyMap, ConstantVector, PerturbedMap, ball_homeo,
                                 conjugacy_delta, radial_homeo, verify_semiconjugacy)
from shadowlab.hyperbolicity import detect_split
from shadowlab.operators import ConstantTail, ShiftOperator, WeightSequence
from shadowlab.spaces import Lp, RapidDecrease, SeqVec, seminorm_eval

w = WeightSequence.from_table({-1: 4, 0: mpq(1, 4)}, ConstantTail(4), ConstantTail(mpq(1, 4)))
T = ShiftOperator("forward", w)
fam = RapidDecrease()
cert = detect_split(T, fam, (2,))

_, delta = conjugacy_delta(cert, 0.1, 2)
g = SeqVec.from_mapping({-1: mpq(1, 2), 1: mpq(1, 3)}, exact=True)
g = g.scale(mpq(delta) / 2 / mpq(seminorm_eval(g, fam, 2)))
S = PerturbedMap(T, ConstantVector(g))
phi = ConjugacyMap(T, cert, S, 1e-10, fam, 2)

rng = np.random.default_rng(1)
xs = [SeqVec((-5, 5), rng.standard_normal(11)).to_exact() for _ in range(5)]
print("residuals:", verify_semiconjugacy(T, S, phi, xs, fam, 2))
# constant perturbation: phi(x) - x is the same vector for every x
print("displacements:", [round(seminorm_eval(phi(x) - x, fam, 2), 6) for x in xs])

# radial stretch along a ray
h = radial_homeo(SeqVec.zeros((0, 0)), 1.0, Lp(2), 1, SeqVec.basis(0, 0.2), SeqVec.basis(0, 0.4))
print("k =", h.k, "knots", h.knots)

# two arbitrary points in a ball
a = SeqVec.from_mapping({0: 0.3, 1: -0.2})
b = SeqVec.from_mapping({-1: 0.1, 2: 0.25})
H = ball_homeo(SeqVec.zeros((0, 0)), 1.0, Lp(2), 1, a, b)
print("|H(a) - b| =", seminorm_eval(H.apply(a) - b, Lp(2), 1))
