import json
import math

import numpy as np
import pytest
from gmpy2 import mpq

from shadowlab.errors import CertificateMismatchError, ExpansivityInputError
from shadowlab.hyperbolicity import (ExpansivityKind, GHCertificate, NoCertificate,
                                     classify_expansivity_kothe, classify_expansivity_shift,
                                     classify_multiplication, delta_for_epsilon, detect_split,
                                     expansion_certificate, orbit_doubling_check,
                                     orbit_growth_scan, poly_geometric_sup,
                                     uniform_expansivity_witness)
from shadowlab.operators import (ConstantTail, MultiplicationOperator, PowerLawTail,
                                 ScalarOperator, ShiftOperator, WeightSequence, iterate)
from shadowlab.spaces import (BandIndicator, C0, ConstantMatrix, KothePrimary, Lp,
                              OmegaProduct, PolynomialGrade, RapidDecrease, SeqVec, TableMatrix,
                              WeightedConstant, seminorm_eval)

from conftest import power_law_weights, split_weights


def test_poly_geometric_sup_values():
    # tie between n = 0 and n = 1
    assert poly_geometric_sup(1, 0.5)[0] == 1.0
    assert poly_geometric_sup(2, 0.5) == (2.25, 2)
    c3, n3 = poly_geometric_sup(3, 0.5)
    assert c3 == pytest.approx(8.0, rel=1e-14) and n3 == 3
    assert poly_geometric_sup(0, 0.3) == (1.0, 0)


def test_split_on_rapid_decrease(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (1, 2, 3))
    assert isinstance(cert, GHCertificate)
    assert cert.split_boundary == 0 and cert.m_side == "upper"
    assert not cert.trivial_splitting and not cert.hyperbolic
    assert cert.d == 1.0
    assert [cert.constants(k).t for k in (1, 2, 3)] == [0.5, 0.5, 0.5]
    assert [cert.constants(k).c for k in (1, 2, 3)] == pytest.approx([1.0, 2.25, 8.0], rel=1e-14)
    # M keeps j >= 0, N keeps j <= -1
    x = SeqVec.from_mapping({-2: 1.0, -1: 2.0, 0: 3.0, 4: 5.0})
    assert cert.project_m(x) == SeqVec.from_mapping({0: 3.0, 4: 5.0})
    assert cert.project_n(x) == SeqVec.from_mapping({-2: 1.0, -1: 2.0})


def test_doubling_shift_trivial_split():
    cert = detect_split(ShiftOperator("forward", WeightSequence.constant(2)), Lp(2), (1,))
    assert cert.m_side == "none" and cert.trivial_splitting and cert.hyperbolic
    g = cert.constants(1)
    assert (g.c, g.t) == (1.0, 0.5)


def test_contracting_shift_trivial_split():
    cert = detect_split(ShiftOperator("forward", WeightSequence.constant(mpq(1, 3))), C0(), (1,))
    assert cert.m_side == "all"
    assert cert.constants(1).t == pytest.approx(1 / 3)


def test_neutral_tail_no_certificate():
    w = WeightSequence.from_table({0: 2}, ConstantTail(1), ConstantTail(mpq(1, 2)))
    res = detect_split(ShiftOperator("forward", w), Lp(2), (1,))
    assert isinstance(res, NoCertificate)
    assert "|w_j| = 1" in res.reason


def test_two_switches_no_certificate():
    w = WeightSequence.from_table({0: mpq(1, 2), 1: 2}, ConstantTail(2), ConstantTail(mpq(1, 2)))
    assert isinstance(detect_split(ShiftOperator("forward", w), Lp(2), (1,)), NoCertificate)


def test_contract_then_expand_no_certificate():
    w = split_weights(2)
    assert isinstance(detect_split(ShiftOperator("forward", w), Lp(1), (1,)), NoCertificate)


def test_unsupported_family():
    assert isinstance(detect_split(ShiftOperator("forward", split_weights(mpq(1, 4))),
                                   OmegaProduct(), (1,)), NoCertificate)


def test_backward_split_orientation():
    # B_w with contraction on the left moves mass down: M is a lower set
    w = WeightSequence.from_table({0: mpq(1, 3), 1: 3}, ConstantTail(mpq(1, 3)), ConstantTail(3))
    op = ShiftOperator("backward", w)
    cert = detect_split(op, Lp(2), (1,))
    assert cert.m_side == "lower" and cert.split_boundary == 1
    assert _soundness_violations(cert, op, Lp(2), 1, 60, seed=5) == 0


def test_core_correction_enters_c():
    w = WeightSequence.from_table({0: mpq(1, 2), 1: 3, 2: mpq(1, 2)}, ConstantTail(2),
                                  ConstantTail(mpq(1, 2)))
    res = detect_split(ShiftOperator("forward", w), Lp(2), (1,))
    # regime switches twice through the core
    assert isinstance(res, NoCertificate)
    w = WeightSequence.from_table({0: mpq(1, 2), 1: mpq(9, 10), 2: mpq(1, 2)}, ConstantTail(2),
                                  ConstantTail(mpq(1, 2)))
    op = ShiftOperator("forward", w)
    cert = detect_split(op, Lp(2), (1,))
    assert cert.constants(1).c >= 1.0
    assert _soundness_violations(cert, op, Lp(2), 1, 80, seed=2) == 0


def test_scalar_operator_certificate():
    cert = detect_split(ScalarOperator(mpq(1, 2)), RapidDecrease(), (1, 2))
    assert cert.m_side == "all" and cert.constants(2).t == 0.5
    assert isinstance(detect_split(ScalarOperator(-1), Lp(2), (1,)), NoCertificate)


def test_certificate_json_round_trip(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (1, 2))
    back = GHCertificate.from_json(json.loads(json.dumps(cert.to_json())))
    assert back.to_json() == cert.to_json()
    assert back.constants(2) == cert.constants(2)


def test_certificate_mismatch(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (1,))
    with pytest.raises(CertificateMismatchError):
        cert.check(ShiftOperator("forward", WeightSequence.constant(2)))
    with pytest.raises(CertificateMismatchError):
        cert.check(split_shift, Lp(2))
    with pytest.raises(ValueError):
        cert.constants(9)


def _soundness_violations(cert, op, fam, grade, samples, seed, nmax=40):
    g = cert.constants(grade)
    rng = np.random.default_rng(seed)
    inv = op.inverse()
    bad = 0
    for _ in range(samples):
        x = SeqVec((-10, 10), rng.standard_normal(21)).to_exact()
        for proj, step in ((cert.project_m, op), (cert.project_n, inv)):
            y = proj(x)
            ny = seminorm_eval(y, fam, g.beta)
            for n in range(nmax + 1):
                if seminorm_eval(y, fam, grade) > g.c * g.t ** n * ny * (1 + 1e-10):
                    bad += 1
                y = proj(step(y))
    return bad


@pytest.mark.parametrize("grade", [1, 2, 3])
def test_certificate_soundness_rapid_decrease(split_shift, grade):
    cert = detect_split(split_shift, RapidDecrease(), (grade,))
    assert _soundness_violations(cert, split_shift, RapidDecrease(), grade, 20, seed=grade) == 0


def test_certificate_soundness_power_core():
    w = WeightSequence.from_table({-1: 3, 0: mpq(1, 3), 1: mpq(2, 3)}, ConstantTail(5),
                                  ConstantTail(mpq(1, 5)))
    op = ShiftOperator("forward", w)
    cert = detect_split(op, RapidDecrease(), (2,))
    assert _soundness_violations(cert, op, RapidDecrease(), 2, 20, seed=9) == 0


def test_m_plus_inverse_n(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (1,))
    x = SeqVec.from_mapping({-3: 1.0, 2: 1.0})
    assert cert.in_m_plus_inverse_n(x, split_shift)
    assert not cert.in_m_plus_inverse_n(SeqVec.basis(-1), split_shift)


# delta

def test_delta_example(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (2,))
    beta, d = delta_for_epsilon(cert, 0.1, 2)
    assert beta == 2
    assert d == pytest.approx(0.05 / 6.75, rel=1e-15)
    assert d == pytest.approx(7.407e-3, abs=1e-6)


def test_delta_small_t_limit():
    cert = detect_split(ScalarOperator(mpq(1, 10 ** 12)), Lp(2), (1,))
    assert delta_for_epsilon(cert, 1.0, 1)[1] == pytest.approx(1 / 3, rel=1e-9)


def test_delta_rejects_nonpositive_eps(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (2,))
    with pytest.raises(ValueError):
        delta_for_epsilon(cert, 0.0, 2)


def test_delta_linear_in_eps(split_shift):
    cert = detect_split(split_shift, RapidDecrease(), (1, 2, 3))
    for k in (1, 2, 3):
        assert delta_for_epsilon(cert, 0.3, k)[1] == pytest.approx(
            3 * delta_for_epsilon(cert, 0.1, k)[1], rel=1e-15)
    # larger c at higher grade gives smaller delta
    ds = [delta_for_epsilon(cert, 0.1, k)[1] for k in (1, 2, 3)]
    assert ds[0] > ds[1] > ds[2]


# expansivity

def test_omega_never_expansive():
    for w in (WeightSequence.constant(5), power_law_weights(2, 1), split_weights(mpq(1, 3))):
        v = classify_expansivity_shift(ShiftOperator("forward", w), OmegaProduct(), (1, 2, 3))
        assert v.kind is ExpansivityKind.NOT_EXPANSIVE and v.witness_grade is None


def test_power_law_both_branches():
    v = classify_expansivity_shift(ShiftOperator("forward", power_law_weights(1, 1)),
                                   RapidDecrease(), (1, 2, 3))
    assert v.kind is ExpansivityKind.BOTH and v.witness_grade == 1
    assert v.status == "analytic"


def test_weighted_lp_characterization():
    # sup |w_1...w_n| v_{n+1}: w = 1 with v_j = (|j|+1)^(1/2) diverges on the right
    v_seq = WeightSequence.from_table({0: 1}, PowerLawTail(0.5, -1), PowerLawTail(0.5, 1))
    fam = KothePrimary(WeightedConstant(v_seq), 1)
    v = classify_expansivity_shift(ShiftOperator("forward", WeightSequence.constant(1)), fam, (1,))
    assert v.kind is ExpansivityKind.FORWARD
    # with w_j = 1/2 the geometric decay wins
    v = classify_expansivity_shift(
        ShiftOperator("forward", WeightSequence.constant(mpq(1, 2))), fam, (1,))
    assert v.branch("a", 1).diverges is False


def test_bounded_weights_on_lp_not_expansive():
    w = WeightSequence.from_table({0: 3, 1: mpq(1, 3)}, ConstantTail(1), ConstantTail(1))
    v = classify_expansivity_kothe(w, ConstantMatrix(1.0), 2, (1,))
    assert v.kind is ExpansivityKind.NOT_EXPANSIVE


def test_contracting_constant_on_rapid_decrease_branch_b():
    w = WeightSequence.constant(mpq(1, 4))
    v = classify_expansivity_kothe(w, PolynomialGrade(), 1, (1, 2))
    assert v.branch("b", 2).diverges and not v.branch("a", 2).diverges
    assert v.kind is ExpansivityKind.INVERSE


def test_gh_split_not_expansive(split_shift):
    v = classify_expansivity_shift(split_shift, RapidDecrease(), (1, 2, 3))
    assert v.kind is ExpansivityKind.NOT_EXPANSIVE


def test_backward_shift_classified_by_reflection():
    op = ShiftOperator("backward", WeightSequence.constant(3))
    v = classify_expansivity_shift(op, Lp(2), (1,))
    assert v.kind is ExpansivityKind.FORWARD


def test_table_matrix_inconclusive():
    rows = tuple((1.0 + abs(j),) for j in range(-30, 31))
    v = classify_expansivity_kothe(WeightSequence.constant(2), TableMatrix(-30, rows), 1, (1,))
    assert v.status == "inconclusive"
    assert v.branch("a", 1).method == "scan"
    assert v.branch("a", 1).note == "diverges within horizon"


def test_verdict_json(split_shift):
    obj = classify_expansivity_shift(split_shift, RapidDecrease(), (1,)).to_json()
    assert obj["kind"] == "NotExpansive"
    json.dumps(obj)


# multiplication

def test_multiplication_constant_two():
    v = classify_multiplication(MultiplicationOperator((0, 1, 2), (2, 2, 2)), [[0, 1], [2]])
    assert v.hyperbolic and v.contracting_sites == () and v.t_per_compact == (0.5, 0.5)


def test_multiplication_mixed():
    v = classify_multiplication(MultiplicationOperator(("x", "y"), (0.5, 3.0)))
    assert v.hyperbolic and v.t_per_compact == (0.5,)
    assert v.expansivity is ExpansivityKind.TOPOLOGICAL


def test_multiplication_unit_modulus_fails():
    v = classify_multiplication(MultiplicationOperator((0, 1, 2), (0.5, 1.0, 2.0)))
    assert not v.hyperbolic and v.failing_sites == (1,)


# uniform expansion witness

@pytest.fixture
def expanding_split():
    return ShiftOperator("forward", split_weights(2))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_expansion_certificate_constants(expanding_split, k):
    ec = expansion_certificate(expanding_split, RapidDecrease(), (k,))
    assert ec.forward[k].rho == 2 and ec.backward[k].rho == 2
    assert ec.forward[k].c == 1 and ec.backward[k].c == 1


def test_witness_forward_sample(expanding_split):
    fam = RapidDecrease()
    ec = expansion_certificate(expanding_split, fam, (2,))
    rep = uniform_expansivity_witness(ec, expanding_split, fam, [SeqVec.basis(0)], 5, 2)
    s = rep.samples[0]
    assert s.side == "A" and s.holds and s.bound == 2 ** 5 / 2


def test_witness_backward_sample(expanding_split):
    fam = RapidDecrease()
    ec = expansion_certificate(expanding_split, fam, (2,))
    x = SeqVec.basis(-1, 1 / 4)
    rep = uniform_expansivity_witness(ec, expanding_split, fam, [x], 5, 2)
    assert rep.samples[0].side == "B" and rep.all_hold


def test_witness_mixed_sample(expanding_split):
    fam = RapidDecrease()
    ec = expansion_certificate(expanding_split, fam, (1,))
    x = SeqVec.basis(0) + SeqVec.basis(-1)
    x = x.scale(1 / seminorm_eval(x, fam, 1))
    s = uniform_expansivity_witness(ec, expanding_split, fam, [x], 5, 1).samples[0]
    # ||P_M x||_1 = 1/3, so the sample goes to B with ||P_N x||_1 = 2/3
    assert s.side == "B" and s.projection_norm == pytest.approx(2 / 3) and s.holds


def test_witness_rejects_off_sphere(expanding_split):
    ec = expansion_certificate(expanding_split, RapidDecrease(), (1,))
    with pytest.raises(ExpansivityInputError):
        uniform_expansivity_witness(ec, expanding_split, RapidDecrease(),
                                    [SeqVec.basis(0, 2.0)], 3, 1)


def test_witness_from_trivial_gh_certificate():
    op = ShiftOperator("forward", WeightSequence.constant(3))
    cert = detect_split(op, Lp(2), (1,))
    rep = uniform_expansivity_witness(cert, op, Lp(2), [SeqVec.basis(4)], 6, 1)
    assert rep.all_hold and rep.samples[0].measured == 3.0 ** 6


# orbit scans

def test_doubling_found_at_one():
    r = orbit_doubling_check(ShiftOperator("forward", WeightSequence.constant(2)),
                             SeqVec.basis(0), Lp(2), 1, 10)
    assert r.found and r.n == 1 and r.ratio == 2.0


def test_doubling_isometry_not_found():
    r = orbit_doubling_check(ShiftOperator("forward", WeightSequence.constant(1)),
                             SeqVec.from_mapping({0: 1.0, 3: -2.0}), Lp(2), 1, 200)
    assert not r.found


def test_doubling_split_shift(split_shift):
    # rate 1/4: (n+1)^2 4^-n never reaches 2 in either direction
    assert not orbit_doubling_check(split_shift, SeqVec.basis(0), RapidDecrease(), 2, 50).found
    mild = ShiftOperator("forward", split_weights(mpq(9, 10)))
    r = orbit_doubling_check(mild, SeqVec.basis(0), RapidDecrease(), 2, 50)
    assert r.found and r.n == 1
    y = iterate(mild, SeqVec.basis(0, exact=True), r.n)
    assert seminorm_eval(y, RapidDecrease(), 2) >= 2


def test_doubling_zero_input():
    with pytest.raises(ExpansivityInputError):
        orbit_doubling_check(ShiftOperator("forward", WeightSequence.constant(2)),
                             SeqVec.zeros((0, 2)), Lp(2), 1, 5)


def test_omega_orbit_eventually_constant():
    op = ShiftOperator("forward", WeightSequence.constant(3))
    scan = orbit_growth_scan(op, SeqVec.basis(0), OmegaProduct(), (1, 2, 3), 60)
    for k in (1, 2, 3):
        assert scan.eventually_constant(k)
        assert scan.norms[-1, k - 1] == 0.0


def test_growth_scan_power_law():
    scan = orbit_growth_scan(ShiftOperator("forward", power_law_weights(1, 1)),
                             SeqVec.basis(0), RapidDecrease(), (1,), 400)
    assert scan.grows(1)
    assert math.isinf(scan.norms[-1, 0])
