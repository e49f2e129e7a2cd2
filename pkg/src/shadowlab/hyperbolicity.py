"""Hyperbolic splittings and expansivity for weighted shifts.

:func:`detect_split` finds a coordinate splitting ``X = M + N`` and constants
``(c, t)`` with ``||T^n y||_a <= c t^n ||y||_a`` on ``M`` and
``||T^-n z||_a <= c t^n ||z||_a`` on ``N``. The constants come from the tail
rates of the weights and a correction for the finite core table. On
polynomially weighted spaces the index factor ``(n+1)^k`` is absorbed by
square-root damping, ``t = sqrt(rate)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from ._arith import mpq_to_float
from .errors import CertificateMismatchError, ExpansivityInputError
from .operators import (LinearOperator, LogGrowth, MultiplicationOperator, ScalarOperator,
                        ShiftOperator, WeightSequence, iterate, reflected)
from .spaces import (ConstantMatrix, KotheMatrix, KothePrimary, PolynomialGrade,
                     SeminormFamily, SeqVec, TableMatrix, WeightedConstant, BandIndicator,
                     seminorm_eval, seminorm_exact, family_from_json)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class GradeConstants:
    alpha: int
    beta: int
    c: float
    t: float

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "c": self.c, "t": self.t}


def _project(x: SeqVec, side: str, boundary: int | None, keep: str) -> SeqVec:
    # side: layout of M; keep: "M" or "N"
    if side == "all":
        return x if keep == "M" else SeqVec.zeros(x.window, exact=x.exact)
    if side == "none":
        return x if keep == "N" else SeqVec.zeros(x.window, exact=x.exact)
    upper = (side == "upper") == (keep == "M")
    return x.restrict(lo=boundary) if upper else x.restrict(hi=boundary - 1)


@dataclass(frozen=True)
class GHCertificate:
    """A coordinate splitting with contraction constants.

    ``m_side`` describes ``M``: ``"upper"`` means ``M = {x : x_j = 0 for j < s}``
    and ``N`` the coordinates ``j < s``; ``"lower"`` swaps the roles; ``"all"``
    and ``"none"`` are the trivial splittings ``N = 0`` and ``M = 0``.
    """

    split_boundary: int | None
    m_side: str
    grade_constants: Mapping[int, GradeConstants]
    d: float
    hyperbolic: bool
    operator_fingerprint: str
    family: SeminormFamily
    provenance: Mapping = field(default_factory=dict)

    @property
    def trivial_splitting(self) -> bool:
        return self.m_side in ("all", "none")

    def constants(self, alpha: int) -> GradeConstants:
        try:
            return self.grade_constants[alpha]
        except KeyError:
            raise ValueError(f"certificate has no constants for grade {alpha}; "
                             f"available: {sorted(self.grade_constants)}") from None

    def project_m(self, x: SeqVec) -> SeqVec:
        return _project(x, self.m_side, self.split_boundary, "M")

    def project_n(self, x: SeqVec) -> SeqVec:
        return _project(x, self.m_side, self.split_boundary, "N")

    def check(self, op: LinearOperator, family: SeminormFamily | None = None) -> None:
        if op.fingerprint() != self.operator_fingerprint:
            raise CertificateMismatchError("certificate was issued for a different operator")
        if family is not None and family.to_json() != self.family.to_json():
            raise CertificateMismatchError("certificate was issued for a different seminorm family")

    def in_m_plus_inverse_n(self, x: SeqVec, op: LinearOperator) -> bool:
        """Whether ``x`` lies in ``M + T^{-1}(N)``, i.e. ``P_M T P_N x = 0``."""
        return self.project_m(op(self.project_n(x))).is_zero()

    def to_json(self) -> dict:
        return {
            "kind": "gh_certificate",
            "split_boundary": self.split_boundary,
            "m_side": self.m_side,
            "trivial_splitting": self.trivial_splitting,
            "hyperbolic": self.hyperbolic,
            "d": self.d,
            "grade_constants": [self.grade_constants[a].to_json()
                                for a in sorted(self.grade_constants)],
            "operator_fingerprint": self.operator_fingerprint,
            "family": self.family.to_json(),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "GHCertificate":
        gc = {g["alpha"]: GradeConstants(g["alpha"], g["beta"], g["c"], g["t"])
              for g in obj["grade_constants"]}
        return cls(obj["split_boundary"], obj["m_side"], gc, obj["d"], obj["hyperbolic"],
                   obj["operator_fingerprint"], family_from_json(obj["family"]),
                   obj.get("provenance", {}))


@dataclass(frozen=True)
class NoCertificate:
    reason: str
    details: Mapping = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": "no_certificate", "reason": self.reason, "details": dict(self.details)}


# ---------------------------------------------------------------------------
# split detection


def _ratio_kind(fam: SeminormFamily) -> str | None:
    matrix, _ = fam.canonical
    if isinstance(matrix, ConstantMatrix) and matrix.value > 0:
        return "unit"
    if isinstance(matrix, PolynomialGrade):
        return "polynomial"
    return None


def _regime(v: float) -> str:
    a = abs(v)
    return "contract" if a < 1 else "expand" if a > 1 else "neutral"


def _regimes(u: WeightSequence) -> tuple[str, list[str], str]:
    return u.tail_regime("left"), [_regime(v) for v in u._core_f], u.tail_regime("right")


def _switches(seq: Iterable[str]) -> int:
    s = [r for r in seq if r != "neutral"]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def _max_segment_log(logs: np.ndarray) -> float:
    # Kadane: largest sum over nonempty contiguous runs
    best, cur = -math.inf, 0.0
    for v in logs.tolist():
        cur = max(v, cur + v)
        best = max(best, cur)
    return best


def _min_segment_log(logs: np.ndarray) -> float:
    return -_max_segment_log(-logs)


def _core_slice(u: WeightSequence, lo: int, hi: int) -> np.ndarray:
    lo, hi = max(lo, u.core_lo), min(hi, u.core_hi)
    if lo > hi:
        return np.empty(0)
    return np.abs(u._core_f[lo - u.core_lo:hi - u.core_lo + 1])


def poly_geometric_sup(k: int, q: float) -> tuple[float, int]:
    """``sup_{n>=0} (n+1)^k q^n`` for ``0 < q < 1`` and its argmax.

    The term ratio ``((n+2)/(n+1))^k q`` decreases in n, so the scan stops at
    the first n where it drops below 1.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    n, term = 0, 1.0
    while ((n + 2) / (n + 1)) ** k * q >= 1:
        n += 1
        term *= ((n + 1) / n) ** k * q
    return term, n


@dataclass(frozen=True)
class _Side:
    rate: float        # asymptotic per-step factor (< 1)
    correction: float  # core correction C >= 1


def _tail_extrema(u: WeightSequence, lo: int | None, hi: int | None) -> list[tuple[float, float]]:
    # (inf, sup) of |u_j| on each tail piece meeting [lo, hi]
    out = []
    if lo is None or lo < u.core_lo:
        out.append(u.tail_abs_extrema("left", hi))
    if hi is None or hi > u.core_hi:
        out.append(u.tail_abs_extrema("right", lo))
    return out


def _contract_side(u: WeightSequence, lo: int | None, hi: int | None, inverse: bool) -> _Side:
    """Bound ``prod of factors over any run of length n <= C rate^n`` for runs
    inside [lo, hi] (None = unbounded); factors are |u_i| or 1/|u_i|."""
    rate = max(1 / inf_ if inverse else sup_ for inf_, sup_ in _tail_extrema(u, lo, hi))
    core = _core_slice(u, u.core_lo if lo is None else lo, u.core_hi if hi is None else hi)
    if core.size == 0:
        return _Side(rate, 1.0)
    logs = (-np.log(core) if inverse else np.log(core)) - math.log(rate)
    return _Side(rate, max(1.0, math.exp(_max_segment_log(logs))))


def _grade_constants(kind: str, sides: Sequence[_Side], grades: Sequence[int]):
    prov = {}
    out = {}
    if kind == "unit":
        t = max(s.rate for s in sides)
        c = max(s.correction for s in sides)
        for a in grades:
            out[a] = GradeConstants(a, a, c, t)
        prov["t_formula"] = "max of tail rates"
        prov["index_factor"] = "1"
    else:
        t = max(math.sqrt(s.rate) for s in sides)
        for a in grades:
            c = 0.0
            arg = {}
            for i, s in enumerate(sides):
                sup, n = poly_geometric_sup(a, s.rate / t)
                c = max(c, s.correction * sup)
                arg[i] = n
            out[a] = GradeConstants(a, a, c, t)
            prov.setdefault("scan_argmax", {})[str(a)] = [arg[i] for i in range(len(sides))]
        prov["t_formula"] = "max of square roots of tail rates"
        prov["index_factor"] = "(n+1)^k"
    return out, prov


def detect_split(op: LinearOperator, fam: SeminormFamily,
                 grades: Sequence[int] = (1, 2, 3)) -> GHCertificate | NoCertificate:
    """Find a coordinate splitting realizing generalized hyperbolicity.

    Supported: scalar multiples on any family, and weighted shifts on
    grade-independent ``l^p``/``c_0`` norms or on polynomially weighted spaces,
    provided the contract/expand regime of ``|w_j|`` switches at most once and
    no tail has ``|w_j| = 1``.
    """
    grades = tuple(sorted(set(int(g) for g in grades)))
    if not grades or grades[0] < 1:
        raise ValueError("grades must be positive integers")
    fp = op.fingerprint()
    if isinstance(op, ScalarOperator):
        lam = abs(mpq_to_float(op.factor))
        if lam == 1:
            return NoCertificate("scalar multiple of modulus 1 has no contracting part")
        t = lam if lam < 1 else 1 / lam
        gc = {a: GradeConstants(a, a, 1.0, t) for a in grades}
        return GHCertificate(None, "all" if lam < 1 else "none", gc, 1.0, True, fp, fam,
                             {"t_formula": "|factor| or 1/|factor|", "index_factor": "1"})
    kind = _ratio_kind(fam)
    if kind is None:
        return NoCertificate("unsupported seminorm family for split detection",
                             {"family": fam.to_json()})
    u = op.weights if op.direction == "forward" else reflected(op).weights
    left, core, right = _regimes(u)
    if "neutral" in (left, right):
        return NoCertificate("a weight tail has |w_j| = 1 at some index; no uniform contraction",
                             {"left_tail": left, "right_tail": right})
    n_sw = _switches([left, *core, right])
    if n_sw > 1:
        return NoCertificate("the contract/expand regime of |w_j| switches more than once",
                             {"switches": n_sw})
    if left == "contract" and right == "contract":
        side, s = "all", None
        sides = [_contract_side(u, None, None, inverse=False)]
    elif left == "expand" and right == "expand":
        side, s = "none", None
        sides = [_contract_side(u, None, None, inverse=True)]
    elif left == "expand" and right == "contract":
        last_expand = max([u.core_lo + i for i, r in enumerate(core) if r == "expand"],
                          default=u.core_lo - 1)
        first_contract = [u.core_lo + i for i, r in enumerate(core)
                          if r == "contract" and u.core_lo + i > last_expand]
        s = first_contract[0] if first_contract else u.core_hi + 1
        side = "upper"
        sides = [_contract_side(u, s, None, inverse=False),
                 _contract_side(u, None, s - 2, inverse=True)]
    else:
        return NoCertificate("contracting left tail with expanding right tail: no forward-"
                             "invariant coordinate splitting",
                             {"left_tail": left, "right_tail": right})
    gc, prov = _grade_constants(kind, sides, grades)
    prov.update({"rates": [sd.rate for sd in sides],
                 "core_corrections": [sd.correction for sd in sides],
                 "beta_choice": "beta = alpha"})
    if op.direction == "backward" and s is not None:
        # reflected coordinates: M = {m >= s} becomes {j <= -s} = {j < 1 - s}
        side, s = "lower", 1 - s
    hyperbolic = side in ("all", "none")
    return GHCertificate(s, side, gc, 1.0, hyperbolic, fp, fam, prov)


def delta_for_epsilon(cert: GHCertificate, eps: float, alpha: int,
                      mode: str = "finite") -> tuple[int, float]:
    """Input grade and defect size ``(1-t) eps / (3 c d)`` for the finite and
    periodic shadowing series."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if mode not in ("finite", "periodic"):
        raise ValueError(f"unknown mode {mode!r}")
    g = cert.constants(alpha)
    return g.beta, (1 - g.t) * eps / (3 * g.c * cert.d)


# ---------------------------------------------------------------------------
# uniform expansion certificates


@dataclass(frozen=True)
class ExpansionBound:
    """``||T^{+-n} P x||_k >= rho^n ||P x||_k / c`` on one side."""

    rho: float
    c: float

    def to_json(self) -> dict:
        return {"rho": self.rho, "c": self.c}


@dataclass(frozen=True)
class ExpansionCertificate:
    """Coordinate splitting into a forward-expanding part (index set given by
    ``forward_side``) and a backward-expanding part, with per-grade bounds."""

    split_boundary: int | None
    forward_side: str  # "upper", "lower", "all" or "none"
    forward: Mapping[int, ExpansionBound]
    backward: Mapping[int, ExpansionBound]
    operator_fingerprint: str
    family: SeminormFamily
    provenance: Mapping = field(default_factory=dict)

    def project_forward(self, x: SeqVec) -> SeqVec:
        return _project(x, self.forward_side, self.split_boundary, "M")

    def project_backward(self, x: SeqVec) -> SeqVec:
        return _project(x, self.forward_side, self.split_boundary, "N")

    def to_json(self) -> dict:
        return {
            "kind": "expansion_certificate",
            "split_boundary": self.split_boundary,
            "forward_side": self.forward_side,
            "forward": {str(k): b.to_json() for k, b in sorted(self.forward.items())},
            "backward": {str(k): b.to_json() for k, b in sorted(self.backward.items())},
            "operator_fingerprint": self.operator_fingerprint,
            "family": self.family.to_json(),
            "provenance": dict(self.provenance),
        }


def _expand_side(u: WeightSequence, lo: int | None, hi: int | None,
                 inverse: bool) -> tuple[float, float]:
    """(rho, C_low) with ``prod over a run of length n >= C_low rho^n`` for runs
    in [lo, hi]; factors |u_i| (or 1/|u_i| when ``inverse``)."""
    rho = min(1 / sup_ if inverse else inf_ for inf_, sup_ in _tail_extrema(u, lo, hi))
    core = _core_slice(u, u.core_lo if lo is None else lo, u.core_hi if hi is None else hi)
    if core.size == 0:
        return rho, 1.0
    logs = (-np.log(core) if inverse else np.log(core)) - math.log(rho)
    return rho, min(1.0, math.exp(_min_segment_log(logs)))


def _index_loss(kind: str, k: int, moving: str, lo: int | None, hi: int | None,
                rho: float) -> tuple[float, float]:
    """Adjust (rho, 1/c-factor) for the seminorm weights seen by moving coordinates."""
    if kind == "unit":
        return rho, 1.0
    if moving == "right":
        if lo is None:
            # j -> j+n can land near 0 from far left: damp the rate
            r = math.sqrt(rho)
            sup, _ = poly_geometric_sup(k, 1 / r)
            return r, 1 / sup
        return rho, (1.0 / (max(0, -lo) + 1)) ** k
    if hi is None:
        r = math.sqrt(rho)
        sup, _ = poly_geometric_sup(k, 1 / r)
        return r, 1 / sup
    return rho, (1.0 / (max(0, hi) + 1)) ** k


def expansion_certificate(op: LinearOperator, fam: SeminormFamily,
                          grades: Sequence[int] = (1, 2, 3)) -> ExpansionCertificate | NoCertificate:
    """Lower growth bounds proving uniform expansivity, when the weight pattern
    allows a coordinate splitting into forward- and backward-expanding parts."""
    grades = tuple(sorted(set(int(g) for g in grades)))
    fp = op.fingerprint()
    if isinstance(op, ScalarOperator):
        lam = abs(mpq_to_float(op.factor))
        if lam == 1:
            return NoCertificate("scalar multiple of modulus 1 is an isometry")
        b = {k: ExpansionBound(max(lam, 1 / lam), 1.0) for k in grades}
        if lam > 1:
            return ExpansionCertificate(None, "all", b, {}, fp, fam)
        return ExpansionCertificate(None, "none", {}, b, fp, fam)
    kind = _ratio_kind(fam)
    if kind is None:
        return NoCertificate("unsupported seminorm family", {"family": fam.to_json()})
    u = op.weights if op.direction == "forward" else reflected(op).weights
    left, core, right = _regimes(u)
    if "neutral" in (left, right):
        return NoCertificate("a weight tail has |w_j| = 1 at some index")
    if _switches([left, *core, right]) > 1:
        return NoCertificate("the contract/expand regime of |w_j| switches more than once")
    # forward-expanding coordinates move right under F_u; backward ones move left under F_u^{-1}
    fwd_range = bwd_range = None
    if left == "expand" and right == "expand":
        side, s, fwd_range = "all", None, (None, None)
    elif left == "contract" and right == "contract":
        side, s, bwd_range = "none", None, (None, None)
    elif left == "contract" and right == "expand":
        last_contract = max([u.core_lo + i for i, r in enumerate(core) if r == "contract"],
                            default=u.core_lo - 1)
        first_expand = [u.core_lo + i for i, r in enumerate(core)
                        if r == "expand" and u.core_lo + i > last_contract]
        s = first_expand[0] if first_expand else u.core_hi + 1
        side, fwd_range, bwd_range = "upper", (s, None), (None, s - 1)
    else:
        return NoCertificate("expanding left tail with contracting right tail: the splitting "
                             "contracts in both time directions, not expansive")
    fwd, bwd = {}, {}
    for k in grades:
        if fwd_range is not None:
            rho, clow = _expand_side(u, fwd_range[0], fwd_range[1], inverse=False)
            rho2, loss = _index_loss(kind, k, "right", fwd_range[0], fwd_range[1], rho)
            fwd[k] = ExpansionBound(rho2, 1 / (clow * loss))
        if bwd_range is not None:
            hi = None if bwd_range[1] is None else bwd_range[1] - 1
            rho, clow = _expand_side(u, bwd_range[0], hi, inverse=True)
            rho2, loss = _index_loss(kind, k, "left", bwd_range[0], bwd_range[1], rho)
            bwd[k] = ExpansionBound(rho2, 1 / (clow * loss))
    if op.direction == "backward":
        fwd_side = {"upper": "lower", "all": "all", "none": "none"}[side]
        s = None if s is None else 1 - s
    else:
        fwd_side = side
    return ExpansionCertificate(s, fwd_side, fwd, bwd, fp, fam,
                                {"beta_choice": "beta = alpha", "index_factor":
                                 "1" if kind == "unit" else "(|j|+1)^k"})


def expansion_from_gh(cert: GHCertificate) -> ExpansionCertificate:
    """A hyperbolic certificate with trivial splitting expands in one time
    direction: ``||T^n z|| >= ||z|| / (c t^n)`` when ``N = X``."""
    if not cert.trivial_splitting:
        raise ValueError("only trivial splittings convert to expansion bounds")
    b = {a: ExpansionBound(1 / g.t, g.c) for a, g in cert.grade_constants.items()}
    if cert.m_side == "none":
        return ExpansionCertificate(None, "all", b, {}, cert.operator_fingerprint, cert.family)
    return ExpansionCertificate(None, "none", {}, b, cert.operator_fingerprint, cert.family)


@dataclass(frozen=True)
class WitnessSample:
    side: str  # "A" (forward) or "B" (backward)
    projection_norm: float
    measured: float
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {"side": self.side, "projection_norm": self.projection_norm,
                "measured": self.measured, "bound": self.bound, "holds": self.holds}


@dataclass(frozen=True)
class WitnessReport:
    grade: int
    n: int
    samples: tuple[WitnessSample, ...]

    @property
    def all_hold(self) -> bool:
        return all(s.holds for s in self.samples)

    def to_json(self) -> dict:
        return {"grade": self.grade, "n": self.n, "all_hold": self.all_hold,
                "samples": [s.to_json() for s in self.samples]}


def uniform_expansivity_witness(cert: GHCertificate | ExpansionCertificate, op: LinearOperator,
                                fam: SeminormFamily, samples: Sequence[SeqVec], n: int,
                                grade: int, sphere_tol: float = 1e-12) -> WitnessReport:
    """Check the uniform growth bound on unit-sphere samples.

    A sample whose forward-side projection has seminorm at least 1/2 must
    satisfy ``||T^n x|| >= rho^n / (2c)``; otherwise its backward-side
    projection does and ``||T^-n x|| >= rho^n / (2c)`` is checked.
    Iterates are computed exactly.
    """
    if isinstance(cert, GHCertificate):
        cert = expansion_from_gh(cert)
    if cert.operator_fingerprint != op.fingerprint():
        raise CertificateMismatchError("certificate was issued for a different operator")

    def norm(v):
        # rational when the family allows it, so comparisons are exact
        q = seminorm_exact(v, fam, grade)
        return q if q is not None else seminorm_eval(v, fam, grade)

    out = []
    for x in samples:
        xe = x.to_exact()
        nx = norm(xe)
        if abs(nx - 1) > sphere_tol:
            raise ExpansivityInputError(f"sample has seminorm {float(nx)!r}, not 1")
        pf = norm(cert.project_forward(xe))
        if grade in cert.forward and pf >= mpq(1, 2):
            b = cert.forward[grade]
            bound = b.rho ** n / (2 * b.c)
            m = norm(iterate(op, xe, n))
            out.append(WitnessSample("A", float(pf), float(m), float(bound), bool(m >= bound)))
        else:
            if grade not in cert.backward:
                raise ExpansivityInputError("sample misses the forward side and the "
                                            "certificate has no backward side")
            pb = norm(cert.project_backward(xe))
            b = cert.backward[grade]
            bound = b.rho ** n / (2 * b.c)
            m = norm(iterate(op, xe, -n))
            out.append(WitnessSample("B", float(pb), float(m), float(bound),
                                     bool(m >= bound and pb >= mpq(1, 2))))
    return WitnessReport(grade, n, tuple(out))


# ---------------------------------------------------------------------------
# expansivity classification


class ExpansivityKind(str, Enum):
    NOT_EXPANSIVE = "NotExpansive"
    FORWARD = "PositivelyExpansiveForward"
    INVERSE = "PositivelyExpansiveInverse"
    BOTH = "Both"
    TOPOLOGICAL = "TopologicallyExpansive"


@dataclass(frozen=True)
class BranchEvidence:
    grade: int
    branch: str  # "a" (forward) or "b" (inverse)
    diverges: bool
    method: str  # "analytic" or "scan"
    growth: LogGrowth | None = None
    scan_max: float | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"grade": self.grade, "branch": self.branch, "diverges": self.diverges,
               "method": self.method, "note": self.note}
        if self.growth is not None:
            out["growth"] = self.growth.to_json()
        if self.scan_max is not None:
            out["scan_max"] = self.scan_max if math.isfinite(self.scan_max) else "inf"
        return out


@dataclass(frozen=True)
class ExpansivityVerdict:
    kind: ExpansivityKind
    witness_grade: int | None
    status: str  # "analytic", or "inconclusive" when any branch came from a finite scan
    evidence: tuple[BranchEvidence, ...]

    def branch(self, name: str, grade: int) -> BranchEvidence:
        for e in self.evidence:
            if e.branch == name and e.grade == grade:
                return e
        raise KeyError((name, grade))

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "witness_grade": self.witness_grade,
                "status": self.status, "evidence": [e.to_json() for e in self.evidence]}


def _neg(g: LogGrowth) -> LogGrowth:
    return LogGrowth(-g.nlogn, -g.linear, -g.log, g.vanishes)


def _matrix_growth(A: KotheMatrix, side: str, k: int) -> LogGrowth | None:
    if isinstance(A, ConstantMatrix):
        return LogGrowth(vanishes=A.value == 0)
    if isinstance(A, PolynomialGrade):
        return LogGrowth(log=float(k))
    if isinstance(A, BandIndicator):
        return LogGrowth(vanishes=True)
    if isinstance(A, WeightedConstant):
        return LogGrowth(log=A.weights.tail(side).point_log_coefficient())
    return None


def _branch_scan(w: WeightSequence, A: KotheMatrix, k: int, branch: str,
                 horizon: int) -> tuple[bool, float]:
    # log of |w_1...w_n| a_{n+1,k} (branch a) or |w_{-n+1}...w_0|^-1 a_{-n+1,k} (branch b)
    if isinstance(A, TableMatrix):
        tw = A.window
        horizon = min(horizon, tw.hi - 1 if branch == "a" else 1 - tw.lo)
    if horizon < 2:
        return False, math.nan
    n = np.arange(1, horizon + 1)
    if branch == "a":
        logw = np.cumsum(np.log(np.abs(w.values(n))))
        a = A.entries(n + 1, k)
    else:
        logw = -np.cumsum(np.log(np.abs(w.values(-n + 1))))
        a = A.entries(-n + 1, k)
    with np.errstate(divide="ignore"):
        lg = logw + np.log(a)
    h, half = lg[-1], lg[len(lg) // 2]
    grows = bool(np.isfinite(h) and h > max(lg[0], 0) + math.log(10) and h > half + math.log(1.1))
    return grows, float(np.exp(np.max(lg))) if np.isfinite(np.max(lg)) else math.inf


def classify_expansivity_kothe(w: WeightSequence, A: KotheMatrix, p: float,
                               grades: Sequence[int] = (1, 2, 3),
                               horizon: int = 2000) -> ExpansivityVerdict:
    """Classify the forward shift ``F_w`` on ``lambda_p(A)`` through the two
    growth branches: (a) ``sup_n |w_1...w_n| a_{n+1,k} = oo`` and
    (b) ``sup_n |w_{-n+1}...w_0|^{-1} a_{-n+1,k} = oo``.

    Branch (a) is positive expansivity of ``F_w``, branch (b) that of its
    inverse. Tail rules decide each branch in closed form; a table matrix
    falls back to a finite scan and makes the verdict inconclusive.
    """
    grades = tuple(sorted(set(int(g) for g in grades)))
    ev = []
    status = "analytic"
    for k in grades:
        for branch, side in (("a", "right"), ("b", "left")):
            mg = _matrix_growth(A, side, k)
            if mg is None:
                grows, mx = _branch_scan(w, A, k, branch, horizon)
                status = "inconclusive"
                note = ("diverges within horizon" if grows else
                        f"bounded by {mx:.6g} within horizon")
                ev.append(BranchEvidence(k, branch, grows, "scan", scan_max=mx, note=note))
                continue
            pg = w.tail(side).product_growth()
            g = (pg if branch == "a" else _neg(pg)) + mg
            ev.append(BranchEvidence(k, branch, g.diverges(), "analytic", growth=g))
    a_grades = [e.grade for e in ev if e.branch == "a" and e.diverges]
    b_grades = [e.grade for e in ev if e.branch == "b" and e.diverges]
    if a_grades and b_grades:
        kind = ExpansivityKind.BOTH
    elif a_grades:
        kind = ExpansivityKind.FORWARD
    elif b_grades:
        kind = ExpansivityKind.INVERSE
    else:
        kind = ExpansivityKind.NOT_EXPANSIVE
    witness = min(a_grades + b_grades) if (a_grades or b_grades) else None
    return ExpansivityVerdict(kind, witness, status, tuple(ev))


def classify_expansivity_shift(op: LinearOperator, fam: SeminormFamily,
                               grades: Sequence[int] = (1, 2, 3),
                               horizon: int = 2000) -> ExpansivityVerdict:
    """Expansivity verdict for a weighted shift (or scalar multiple) on ``fam``."""
    if isinstance(op, ScalarOperator):
        lam = abs(mpq_to_float(op.factor))
        g = [k for k in sorted(set(grades))]
        kind = (ExpansivityKind.FORWARD if lam > 1 else ExpansivityKind.INVERSE if lam < 1
                else ExpansivityKind.NOT_EXPANSIVE)
        ev = tuple(BranchEvidence(k, b, (lam > 1) if b == "a" else (lam < 1), "analytic",
                                  growth=LogGrowth(linear=math.log(lam) * (1 if b == "a" else -1)))
                   for k in g for b in ("a", "b"))
        return ExpansivityVerdict(kind, g[0] if lam != 1 else None, "analytic", ev)
    matrix, p = fam.canonical
    if op.direction == "backward":
        op = reflected(op)
        matrix = matrix.reflect()
    return classify_expansivity_kothe(op.weights, matrix, p, grades, horizon)


@dataclass(frozen=True)
class MultiplicationVerdict:
    hyperbolic: bool
    contracting_sites: tuple
    expanding_sites: tuple
    t_per_compact: tuple
    failing_sites: tuple
    expansivity: ExpansivityKind

    def to_json(self) -> dict:
        return {"hyperbolic": self.hyperbolic,
                "contracting_sites": list(self.contracting_sites),
                "expanding_sites": list(self.expanding_sites),
                "t_per_compact": list(self.t_per_compact),
                "failing_sites": list(self.failing_sites),
                "expansivity": self.expansivity.value}


def classify_multiplication(op: MultiplicationOperator,
                            compacts: Sequence[Sequence] | None = None) -> MultiplicationVerdict:
    """Split the grid into ``A = {|phi| < 1}`` and ``B = {|phi| > 1}``; on each
    compact (a site subset) ``t = max(max_A |phi|, max_B 1/|phi|)``."""
    mod = dict(zip(op.sites, op.modulus))
    failing = tuple(s for s in op.sites if mod[s] == 1)
    A = tuple(s for s in op.sites if mod[s] < 1)
    B = tuple(s for s in op.sites if mod[s] > 1)
    if failing:
        exp = ExpansivityKind.NOT_EXPANSIVE
        return MultiplicationVerdict(False, A, B, (), failing, exp)
    if compacts is None:
        compacts = [op.sites]
    ts = []
    for K in compacts:
        if not K:
            raise ValueError("compacts must be nonempty site subsets")
        unknown = [s for s in K if s not in mod]
        if unknown:
            raise ValueError(f"unknown sites {unknown}")
        ts.append(max(mod[s] if mod[s] < 1 else 1 / mod[s] for s in K))
    if A and B:
        exp = ExpansivityKind.TOPOLOGICAL
    elif B:
        exp = ExpansivityKind.FORWARD
    else:
        exp = ExpansivityKind.INVERSE
    return MultiplicationVerdict(True, A, B, tuple(ts), (), exp)


# ---------------------------------------------------------------------------
# orbit scans


@dataclass(frozen=True)
class DoublingResult:
    found: bool
    n: int | None
    ratio: float | None

    def to_json(self) -> dict:
        return {"found": self.found, "n": self.n, "ratio": self.ratio}


def _orbit_norms(op: LinearOperator, x: SeqVec, fam: SeminormFamily, grades: Sequence[int],
                 horizon: int, sign: int) -> np.ndarray:
    """Rows n = 0..horizon of ``||T^{sign*n} x||_k`` per grade; float iteration,
    overflow turns the rest of the row into inf."""
    step = op if sign > 0 else op.inverse()
    out = np.full((horizon + 1, len(grades)), math.inf)
    y = x.to_float()
    for n in range(horizon + 1):
        for i, k in enumerate(grades):
            out[n, i] = seminorm_eval(y, fam, k)
        if n == horizon:
            break
        try:
            y = step(y)
        except OverflowError:
            break
        y = y.trim()
    return out


def orbit_doubling_check(op: LinearOperator, x: SeqVec, fam: SeminormFamily, k: int,
                         horizon: int) -> DoublingResult:
    """Least ``|n| <= horizon`` with ``||T^n x||_k >= 2 ||x||_k`` (positive n first)."""
    base = seminorm_eval(x, fam, k)
    if base == 0:
        raise ExpansivityInputError("zero seminorm input")
    fwd = _orbit_norms(op, x, fam, [k], horizon, 1)[:, 0]
    bwd = _orbit_norms(op, x, fam, [k], horizon, -1)[:, 0]
    for n in range(1, horizon + 1):
        for s, arr in ((n, fwd), (-n, bwd)):
            if arr[n] >= 2 * base:
                return DoublingResult(True, s, float(arr[n] / base))
    return DoublingResult(False, None, None)


@dataclass(frozen=True)
class OrbitScan:
    grades: tuple[int, ...]
    direction: int
    norms: np.ndarray  # (horizon+1, len(grades))

    def grows(self, k: int) -> bool:
        """Growth signature at the end of the horizon: non-finite, or the last
        value beats both the start and 1.1x the value at half horizon."""
        col = self.norms[:, self.grades.index(k)]
        h = col[-1]
        if not math.isfinite(h):
            return True
        return bool(h > col[0] and h > 1.1 * col[len(col) // 2])

    def eventually_constant(self, k: int, tail: int = 10) -> bool:
        col = self.norms[:, self.grades.index(k)]
        return bool(np.all(col[-tail:] == col[-1]))


def orbit_growth_scan(op: LinearOperator, x: SeqVec, fam: SeminormFamily,
                      grades: Sequence[int], horizon: int, direction: int = 1) -> OrbitScan:
    """Brute-force seminorms along ``T^n x`` (direction +1) or ``T^-n x`` (-1)."""
    grades = tuple(grades)
    return OrbitScan(grades, direction, _orbit_norms(op, x, fam, grades, horizon, direction))


__all__ = [
    "GradeConstants", "GHCertificate", "NoCertificate", "detect_split", "delta_for_epsilon",
    "poly_geometric_sup", "ExpansionBound", "ExpansionCertificate", "expansion_certificate",
    "expansion_from_gh", "WitnessSample", "WitnessReport", "uniform_expansivity_witness",
    "ExpansivityKind", "BranchEvidence", "ExpansivityVerdict", "classify_expansivity_kothe",
    "classify_expansivity_shift", "MultiplicationVerdict", "classify_multiplication",
    "DoublingResult", "orbit_doubling_check", "OrbitScan", "orbit_growth_scan",
]
