import csv
import json

import numpy as np
import pytest
from gmpy2 import mpq

from shadowlab.errors import CertificateMismatchError, ChainError
from shadowlab.hyperbolicity import delta_for_epsilon, detect_split
from shadowlab.operators import MultiplicationOperator, ScalarOperator, ShiftOperator, WeightSequence
from shadowlab.shadowing import (Pseudotrajectory, adversarial_mult_chain, counterexample_cycle,
                                 counterexample_operator, make_chain, make_cycle, make_two_sided,
                                 periodic_points_trivial, periodic_truncation, random_cycle,
                                 shadow_finite, shadow_periodic, shadow_two_sided,
                                 telescoping_sides, verify_shadowing)
from shadowlab.spaces import Lp, RapidDecrease, SeqVec, seminorm_eval

WIN = (-24, 24)


@pytest.fixture
def split_cert(split_shift):
    return detect_split(split_shift, RapidDecrease(), (1, 2, 3))


def test_zero_scale_gives_exact_orbit(split_shift):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.basis(-3), 6, 2, 0.1, scale=(0, 0))
    assert all(y.is_zero() for y in ch.defects)
    x = SeqVec.basis(-3, exact=True)
    for p in ch.points:
        assert p == x
        x = split_shift(x)


def test_length_one_chain(split_shift):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 1, 2, 0.1, seed=4)
    assert len(ch.points) == 2 and len(ch.defects) == 1 and ch.length == 1


def test_chain_determinism(split_shift):
    a = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 8, 2, 0.01, seed=11)
    b = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 8, 2, 0.01, seed=11)
    c = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 8, 2, 0.01, seed=12)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())
    assert json.dumps(a.to_json()) != json.dumps(c.to_json())


def test_chain_defect_sizes(split_shift):
    d = 0.02
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 30, 2, d, seed=1)
    ch.validate(split_shift)
    norms = ch.defect_norms()
    assert np.all(norms >= 0.2 * d * (1 - 1e-12)) and np.all(norms <= 0.9 * d * (1 + 1e-12))


def test_validate_catches_tampering(split_shift):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 3, 2, 0.02, seed=1)
    bad = Pseudotrajectory(ch.points, (ch.defects[1],) + ch.defects[1:], 2, 0.02,
                           RapidDecrease())
    with pytest.raises(ChainError):
        bad.validate(split_shift)
    small = Pseudotrajectory(ch.points, ch.defects, 2, 1e-6, RapidDecrease())
    with pytest.raises(ChainError):
        small.validate(split_shift)


def test_bad_chain_arguments(split_shift):
    with pytest.raises(ValueError):
        make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 3, 2, 0.0)
    with pytest.raises(ValueError):
        make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 3, 2, 0.1, scale=(0.5, 1.0))


# cycles

def test_cycle_of_fixed_point():
    op = ShiftOperator("forward", WeightSequence.constant(1))
    zero = SeqVec.zeros((0, 3))
    cy = make_cycle(op, Lp(2), zero, 4, 1, 0.1, scale=(0, 0))
    cy.validate(op)
    assert cy.periodic and all(y.is_zero() for y in cy.defects)


def test_cycle_length_one_closing_defect():
    op = ScalarOperator(2)
    v = SeqVec.from_mapping({0: 0.3, 1: 0.4})
    cy = make_cycle(op, Lp(2), v, 1, 1, 0.6)
    assert cy.length == 1
    assert cy.defects[0] == v.scale(-1)
    with pytest.raises(ChainError):
        make_cycle(op, Lp(2), v, 1, 1, 0.4)


def test_counterexample_cycle_validates():
    chain, _ = counterexample_cycle(0.01)
    chain.validate(counterexample_operator())
    assert chain.periodic and chain.points[0] == chain.points[-1]


def test_random_cycle_defects(split_shift):
    cy = random_cycle(split_shift, RapidDecrease(), 5, 2, 0.01, seed=3)
    cy.validate(split_shift)
    assert cy.length == 5 and cy.defect_norms().max() <= 0.9 * 0.01


# finite shadowing

def test_shadow_of_exact_orbit_is_start(split_shift, split_cert):
    x0 = SeqVec.from_mapping({-2: 1.0, 3: 0.5})
    ch = make_chain(split_shift, RapidDecrease(), x0, 10, 2, 0.1, scale=(0, 0))
    rep = shadow_finite(ch, split_cert, split_shift)
    assert rep.shadow_point == x0
    assert np.all(rep.deviations == 0)


def test_shadow_finite_hand_example():
    op = ShiftOperator("forward", WeightSequence.constant(2))
    cert = detect_split(op, Lp(2), (1,))
    p0 = SeqVec.basis(0, exact=True)
    p1 = SeqVec.from_mapping({0: mpq(1, 10), 1: 2}, exact=True)
    ch = Pseudotrajectory((p0, p1), (p1 - op(p0),), 1, 0.2, Lp(2), False, 0, op.fingerprint())
    rep = shadow_finite(ch, cert, op)
    assert ch.defects[0] == SeqVec.basis(0, mpq(1, 10), exact=True)
    assert rep.shadow_point == SeqVec.from_mapping({-1: mpq(1, 20), 0: 1}, exact=True)
    assert rep.deviations.tolist() == [0.05, 0.0]


def test_shadow_finite_bound(split_shift, split_cert):
    eps = 0.1
    _, d = delta_for_epsilon(split_cert, eps, 2)
    for seed in range(8):
        ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 25, 2, d, seed=seed,
                        window=WIN)
        rep = shadow_finite(ch, split_cert, split_shift)
        assert rep.holds
        assert rep.max_deviation <= 2 * eps / 3 + 1e-12
        assert rep.segment_length == 26


def test_certificate_operator_mismatch(split_shift, split_cert):
    other = ShiftOperator("forward", WeightSequence.constant(2))
    ch = make_chain(other, Lp(2), SeqVec.zeros((0, 2)), 2, 1, 0.1)
    with pytest.raises(CertificateMismatchError):
        shadow_finite(ch, split_cert, split_shift)


def test_verify_matches_report(split_shift, split_cert):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 12, 2, 0.005, seed=7)
    rep = shadow_finite(ch, split_cert, split_shift)
    trace = verify_shadowing(ch, rep.shadow_point, split_shift, 2)
    assert np.array_equal(trace, rep.deviations)


def test_verify_zero_on_defect_free_chain(split_shift):
    x0 = SeqVec.basis(1, exact=True)
    ch = make_chain(split_shift, RapidDecrease(), x0, 5, 1, 0.1, scale=(0, 0))
    assert np.all(verify_shadowing(ch, x0, split_shift, 1) == 0)


def test_telescoping_identity_exact(split_shift, split_cert):
    for seed in range(5):
        ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 15, 2, 0.01,
                        seed=seed)
        x = shadow_finite(ch, split_cert, split_shift).shadow_point
        for lhs, rhs in telescoping_sides(ch, split_cert, split_shift, x):
            assert lhs == rhs


# periodic shadowing

def test_periodic_truncation_rule():
    K = periodic_truncation(2.25, 1.0, 0.5, 0.01, 3, 1e-12)
    assert K >= 3
    assert 2.25 * 0.01 * 0.5 ** (K + 1) / 0.5 <= 1e-12 * 0.5 ** 3 / 2
    assert 2.25 * 0.01 * 0.5 ** K / 0.5 > 1e-12 * 0.5 ** 3 / 2
    assert periodic_truncation(1, 1, 0.5, 0.0, 4, 1e-9) == 4


def test_periodic_expanding_scalar_fixed_point():
    op = ScalarOperator(2)
    cert = detect_split(op, Lp(2), (1,))
    v = SeqVec.from_mapping({0: 0.3, 2: -0.4}, exact=True)
    cy = make_cycle(op, Lp(2), v, 1, 1, 1.0)
    rep = shadow_periodic(cy, cert, op, 1e-12)
    assert seminorm_eval(rep.shadow_point, Lp(2), 1) < 1e-12
    assert rep.deviations[0] == pytest.approx(0.5, rel=1e-10)
    assert rep.periodic_residual <= rep.residual_bound


def test_periodic_exact_orbit(split_shift, split_cert):
    # zero is the only periodic orbit available here
    cy = make_cycle(split_shift, RapidDecrease(), SeqVec.zeros((0, 0)), 3, 2, 0.1,
                    scale=(0, 0))
    rep = shadow_periodic(cy, split_cert, split_shift, 1e-12)
    assert rep.shadow_point.is_zero() and rep.periodic_residual == 0


def test_periodic_random_cycle(split_shift, split_cert):
    eps, tol = 0.1, 1e-12
    _, d = delta_for_epsilon(split_cert, eps, 2, "periodic")
    cy = random_cycle(split_shift, RapidDecrease(), 6, 2, d, seed=21)
    rep = shadow_periodic(cy, split_cert, split_shift, tol)
    assert rep.periodic_residual <= 10 * tol
    assert rep.periodic_residual <= rep.residual_bound
    assert rep.max_deviation < eps and rep.holds


def test_periodic_tol_halving(split_shift, split_cert):
    cy = random_cycle(split_shift, RapidDecrease(), 4, 2, 0.005, seed=2)
    r1 = shadow_periodic(cy, split_cert, split_shift, 1e-10)
    r2 = shadow_periodic(cy, split_cert, split_shift, 5e-11)
    assert r2.residual_bound <= r1.residual_bound / 2 * (1 + 1e-12)


def test_periodic_rejects_bad_input(split_shift, split_cert):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 3, 2, 0.01)
    with pytest.raises(ChainError):
        shadow_periodic(ch, split_cert, split_shift, 1e-9)
    cy = random_cycle(split_shift, RapidDecrease(), 2, 2, 0.01)
    with pytest.raises(ValueError):
        shadow_periodic(cy, split_cert, split_shift, 0.0)


# two-sided shadowing

def test_two_sided_exact_orbit(split_shift, split_cert):
    x0 = SeqVec.from_mapping({-1: 2.0, 1: 1.0})
    ch = make_two_sided(split_shift, RapidDecrease(), x0, 4, 2, 0.1, scale=(0, 0))
    rep = shadow_two_sided(ch, split_cert, split_shift)
    assert rep.shadow_point == x0 and np.all(rep.deviations == 0)


def test_two_sided_doubling_shift():
    op = ShiftOperator("forward", WeightSequence.constant(2))
    cert = detect_split(op, Lp(2), (1,))
    eps = 0.1
    _, d = delta_for_epsilon(cert, eps, 1)
    ch = make_two_sided(op, Lp(2), SeqVec.zeros((-6, 6)), 8, 1, d / 2, seed=5, window=(-6, 6))
    rep = shadow_two_sided(ch, cert, op)
    assert rep.holds and rep.max_deviation < eps
    assert rep.start == -8 and rep.segment_length == 17


def test_two_sided_split_shift(split_shift, split_cert):
    eps = 0.1
    _, d = delta_for_epsilon(split_cert, eps, 2)
    for seed in range(4):
        ch = make_two_sided(split_shift, RapidDecrease(), SeqVec.zeros((-10, 10)), 10, 2,
                            d / 4, seed=seed, window=(-10, 10))
        rep = shadow_two_sided(ch, split_cert, split_shift)
        assert rep.holds and rep.max_deviation < eps


# counterexample

def test_counterexample_small_delta():
    chain, cert = counterexample_cycle(0.01)
    assert cert.n == 7 and cert.peak_norm == pytest.approx(1.28)
    assert cert.shadowing_fails
    assert cert.distance_from_zero_orbit == pytest.approx(1.28)
    norms = chain.defect_norms()
    assert norms[0] == 0.01 and norms[-1] == 0.005
    assert np.all(norms[1:-1] == 0)
    assert chain.length == 2 * 7 + 2


def test_counterexample_large_delta():
    chain, cert = counterexample_cycle(2)
    assert cert.n == 0 and cert.peak_norm == 2.0
    chain.validate(counterexample_operator())
    assert cert.shadowing_fails


def test_counterexample_zero_candidate():
    chain, cert = counterexample_cycle(0.05)
    dist = verify_shadowing(chain, SeqVec.zeros((0, 0)), counterexample_operator(), 1)
    assert dist.max() == 2 ** cert.n * 0.05


def test_only_trivial_periodic_points():
    op = counterexample_operator()
    samples = [SeqVec.from_mapping({-2: 1.0, 5: 3.0}), SeqVec.basis(0)]
    assert periodic_points_trivial(op, 3, samples).only_zero


def test_adversarial_escape_indices():
    op = MultiplicationOperator(("z0", "z1"), (1.0, 0.5), marked_site="z0", phase=complex(0.6, 0.8))
    for delta, k in ((0.5, 4), (0.1, 20)):
        ch = adversarial_mult_chain(op, delta)
        assert ch.escape_index == k
        assert ch.max_defect == pytest.approx(delta, rel=1e-15)
        assert ch.marked_value_at_escape == pytest.approx(k * delta, rel=1e-12)


def test_adversarial_unit_phase():
    op = MultiplicationOperator((0, 1), (1.0, 2.0), marked_site=0, phase=1.0)
    ch = adversarial_mult_chain(op, 1.0)
    assert ch.escape_index == 2
    assert [f[0] for f in ch.values] == [0, 1, 2]


def test_adversarial_needs_unit_modulus():
    op = MultiplicationOperator((0,), (2.0,), marked_site=0, phase=1.0)
    with pytest.raises(ValueError):
        adversarial_mult_chain(op, 0.5)


def test_report_csv(tmp_path, split_shift, split_cert):
    ch = make_chain(split_shift, RapidDecrease(), SeqVec.zeros(WIN), 4, 2, 0.01, seed=1)
    rep = shadow_finite(ch, split_cert, split_shift)
    path = tmp_path / "trace.csv"
    rep.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["step", "deviation", "bound"]
    assert len(rows) == 6 and float(rows[3][1]) == rep.deviations[2]
    json.dumps(rep.to_json())
