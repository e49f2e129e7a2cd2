"""Pseudotrajectories and explicit shadowing points.

Chains are built in exact rational arithmetic by default, so the synthesized
shadow points are exact finite sums and only the final seminorm evaluation
rounds. Let ``S`` be the inverse of ``T``, ``P_M``/``P_N`` the certificate
projections and ``y_j = x_{j+1} - T x_j`` the defects. The finite shadow point
is then

    x = x_0 + sum_{j=1}^{p} S^j P_N y_{j-1}

and the periodic point of a cycle adds the ``M``-side sum of ``T^n`` terms
over the periodically extended defects.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._arith import exact_scalar
from .errors import CertificateMismatchError, ChainError
from .hyperbolicity import GHCertificate
from .operators import (ConstantTail, LinearOperator, MultiplicationOperator, ShiftOperator,
                        WeightSequence, mult_apply, operator_norm_bound)
from .spaces import IndexWindow, Lp, SeminormFamily, SeqVec, seminorm_eval, support


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Pseudotrajectory:
    """Points ``x_start, ..., x_{start+len-1}`` with cached defects.

    ``defects[i] = points[i+1] - T points[i]``. For a cycle the last point
    repeats the first and the closing defect is the last entry.
    """

    points: tuple[SeqVec, ...]
    defects: tuple[SeqVec, ...]
    grade: int
    delta: float
    family: SeminormFamily
    periodic: bool = False
    start: int = 0
    operator_fingerprint: str = ""

    @property
    def length(self) -> int:
        """Number of steps."""
        return len(self.defects)

    def point(self, j: int) -> SeqVec:
        return self.points[j - self.start]

    def defect_norms(self, grade: int | None = None) -> np.ndarray:
        g = self.grade if grade is None else grade
        return np.array([seminorm_eval(y, self.family, g) for y in self.defects])

    def validate(self, op: LinearOperator) -> None:
        """Re-derive defects from the points and check them against the cache and delta."""
        if len(self.points) != len(self.defects) + 1:
            raise ChainError("need exactly one more point than defects")
        if self.periodic and not (self.points[0] == self.points[-1]):
            raise ChainError("cycle does not close: first and last point differ")
        for i, (a, b, y) in enumerate(zip(self.points, self.points[1:], self.defects)):
            if not ((b - op(a)) == y):
                raise ChainError(f"cached defect {i} disagrees with the points")
        norms = self.defect_norms()
        bad = np.nonzero(norms > self.delta)[0]
        if bad.size:
            i = int(bad[0])
            raise ChainError(f"defect {i} has seminorm {norms[i]!r} > delta = {self.delta!r}")

    def to_json(self) -> dict:
        return {"start": self.start, "grade": self.grade, "delta": self.delta,
                "periodic": self.periodic, "family": self.family.to_json(),
                "operator_fingerprint": self.operator_fingerprint,
                "points": [p.to_json() for p in self.points]}


def _defects(op, pts) -> tuple[SeqVec, ...]:
    return tuple(b - op(a) for a, b in zip(pts, pts[1:]))


def _random_perturbation(rng: np.random.Generator, window: IndexWindow, fam: SeminormFamily,
                         grade: int, size: float, exact: bool) -> SeqVec:
    d = SeqVec(window, rng.standard_normal(window.width))
    nd = seminorm_eval(d, fam, grade)
    if nd == 0 or size == 0:
        return SeqVec.zeros(window, exact=exact)
    d = d.scale(size / nd)
    return d.to_exact() if exact else d


def _pick_window(window, *vecs: SeqVec) -> IndexWindow:
    if window is not None:
        return IndexWindow.of(window)
    w = vecs[0].window
    for v in vecs[1:]:
        w = w.hull(v.window)
    return w


def make_chain(op: LinearOperator, fam: SeminormFamily, x0: SeqVec, length: int, grade: int,
               delta: float, seed: int = 0, *, window=None, scale=(0.2, 0.9),
               exact: bool = True) -> Pseudotrajectory:
    """``x_{j+1} = T x_j + r_j`` with ``||r_j||_grade`` uniform in ``scale * delta``.

    Directions are Gaussian on ``window`` (default: the hull of the supports of
    ``x_j`` and ``T x_j``). ``scale=(0, 0)`` gives an exact orbit.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if length < 0:
        raise ValueError("length must be non-negative")
    lo, hi = scale
    if not 0 <= lo <= hi < 1:
        raise ValueError("scale must satisfy 0 <= lo <= hi < 1")
    rng = np.random.default_rng(seed)
    x = x0.to_exact() if exact else x0.to_float()
    pts = [x]
    rs = []
    for _ in range(length):
        tx = op(x)
        size = rng.uniform(lo, hi) * delta
        r = _random_perturbation(rng, _pick_window(window, x, tx), fam, grade, size, exact)
        x = tx + r
        pts.append(x)
        rs.append(r)
    # exact sums cancel, so the drawn perturbations are the defects
    ys = tuple(rs) if exact else _defects(op, pts)
    return Pseudotrajectory(tuple(pts), ys, grade, delta, fam, False, 0, op.fingerprint())


def make_cycle(op: LinearOperator, fam: SeminormFamily, x0: SeqVec, length: int, grade: int,
               delta: float, seed: int = 0, *, window=None, scale=(0.2, 0.9),
               exact: bool = True) -> Pseudotrajectory:
    """A chain of ``length - 1`` random steps closed back to ``x0``; the closing
    defect ``x0 - T x_{length-1}`` must itself be at most ``delta``."""
    if length < 1:
        raise ValueError("cycle length must be at least 1")
    ch = make_chain(op, fam, x0, length - 1, grade, delta, seed, window=window, scale=scale,
                    exact=exact)
    pts = list(ch.points) + [ch.points[0]]
    closing = pts[-1] - op(pts[-2])
    nc = seminorm_eval(closing, fam, grade)
    if nc > delta:
        raise ChainError(f"closing defect has seminorm {nc!r} > delta = {delta!r}")
    return Pseudotrajectory(tuple(pts), _defects(op, pts), grade, delta, fam, True, 0,
                            op.fingerprint())


def random_cycle(op: LinearOperator, fam: SeminormFamily, period: int, grade: int,
                 delta: float, seed: int = 0, *, window=(-8, 8), exact: bool = True,
                 scale=(0.2, 0.9)) -> Pseudotrajectory:
    """A random ``delta``-cycle: random points on ``window``, rescaled as a whole
    so the largest cyclic defect has seminorm ``u * delta``."""
    if period < 1:
        raise ValueError("period must be at least 1")
    rng = np.random.default_rng(seed)
    w = IndexWindow.of(window)
    pts = [SeqVec(w, rng.standard_normal(w.width)) for _ in range(period)]
    if exact:
        pts = [p.to_exact() for p in pts]
    pts.append(pts[0])
    ys = _defects(op, pts)
    big = max(seminorm_eval(y, fam, grade) for y in ys)
    if big == 0:
        raise ChainError("random points form an exact periodic orbit; pick another seed")
    u = rng.uniform(*scale)
    f = exact_scalar(u * delta / big) if exact else u * delta / big
    pts = [p.scale(f) for p in pts]
    return Pseudotrajectory(tuple(pts), _defects(op, pts), grade, delta, fam, True, 0,
                            op.fingerprint())


def make_two_sided(op: LinearOperator, fam: SeminormFamily, x0: SeqVec, m: int, grade: int,
                   delta: float, seed: int = 0, *, window=None, scale=(0.2, 0.9),
                   exact: bool = True) -> Pseudotrajectory:
    """Points indexed ``-m..m``. Negative indices are produced backwards by
    ``x_{-j-1} = S(x_{-j} - r)``, so every forward defect is a random ``r``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    rng = np.random.default_rng(seed)
    inv = op.inverse()
    lo, hi = scale
    x = x0.to_exact() if exact else x0.to_float()
    fwd = make_chain(op, fam, x, m, grade, delta, int(rng.integers(2**63)), window=window,
                     scale=scale, exact=exact).points
    back = []
    for _ in range(m):
        size = rng.uniform(lo, hi) * delta
        r = _random_perturbation(rng, _pick_window(window, x), fam, grade, size, exact)
        x = inv(x - r)
        back.append(x)
    pts = list(reversed(back)) + list(fwd)
    return Pseudotrajectory(tuple(pts), _defects(op, pts), grade, delta, fam, False, -m,
                            op.fingerprint())


# ---------------------------------------------------------------------------
# reports


@dataclass
class ShadowReport:
    mode: str
    shadow_point: SeqVec
    grade: int
    start: int
    deviations: np.ndarray
    bounds: np.ndarray
    bound_used: float
    max_defect: float
    periodic_residual: float | None = None
    residual_bound: float | None = None
    truncation_tolerance: float | None = None
    truncation_terms: int | None = None
    notes: dict = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations)) if self.deviations.size else 0.0

    @property
    def segment_length(self) -> int:
        return int(self.deviations.size)

    @property
    def holds(self) -> bool:
        ok = bool(np.all(self.deviations <= self.bounds * (1 + 1e-12) + 1e-300))
        if self.periodic_residual is not None:
            ok = ok and self.periodic_residual <= self.residual_bound * (1 + 1e-12) + 1e-300
        return ok

    def to_json(self, include_point: bool = True) -> dict:
        out = {
            "mode": self.mode, "grade": self.grade, "start": self.start,
            "segment_length": self.segment_length,
            "deviations": self.deviations.tolist(),
            "bounds": self.bounds.tolist(),
            "max_deviation": self.max_deviation, "bound_used": self.bound_used,
            "max_defect": self.max_defect, "holds": self.holds,
            "periodic_residual": self.periodic_residual,
            "residual_bound": self.residual_bound,
            "truncation_tolerance": self.truncation_tolerance,
            "truncation_terms": self.truncation_terms,
            "notes": dict(self.notes),
        }
        if include_point:
            out["shadow_point"] = self.shadow_point.to_json()
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["step", "deviation", "bound"])
            for i, (d, b) in enumerate(zip(self.deviations.tolist(), self.bounds.tolist())):
                wr.writerow([self.start + i, repr(d), repr(b)])


# ---------------------------------------------------------------------------
# synthesis


def _check(cert: GHCertificate, op: LinearOperator, chain: Pseudotrajectory) -> None:
    cert.check(op)
    if chain.operator_fingerprint and chain.operator_fingerprint != op.fingerprint():
        raise CertificateMismatchError("chain was generated for a different operator")


def _n_side_sum(ys: Sequence[SeqVec], cert: GHCertificate, inv) -> SeqVec:
    # sum_{j=1}^{len} S^j P_N ys[j-1], Horner from the far end
    acc = None
    for y in reversed(ys):
        v = cert.project_n(y)
        acc = inv(v if acc is None else v + acc)
    return acc


def _m_side_sum(ys: Sequence[SeqVec], cert: GHCertificate, op, first_power: int) -> SeqVec:
    # sum_j T^{j + first_power} P_M ys[j]
    acc = None
    for y in reversed(ys):
        v = cert.project_m(y)
        acc = v if acc is None else v + op(acc)
    if acc is None:
        return None
    for _ in range(first_power):
        acc = op(acc)
    return acc


def _add(x: SeqVec, v: SeqVec | None, sign: int = 1) -> SeqVec:
    if v is None:
        return x
    return x + v if sign > 0 else x - v


def _forward_deviations(chain: Pseudotrajectory, x: SeqVec, op, grade: int) -> np.ndarray:
    out = []
    y = x
    for i, p in enumerate(chain.points):
        if i:
            y = op(y)
        out.append(seminorm_eval(p - y, chain.family, grade))
    return np.array(out)


def shadow_finite(chain: Pseudotrajectory, cert: GHCertificate, op: LinearOperator,
                  grade: int | None = None) -> ShadowReport:
    """Shadow a finite chain by ``x = x_0 + sum_{j=1}^p S^j P_N y_{j-1}``.

    Every deviation is bounded by ``2 c d Y / (1-t)``, where ``Y`` is the
    largest measured defect at the input grade.
    """
    _check(cert, op, chain)
    alpha = chain.grade if grade is None else grade
    g = cert.constants(alpha)
    x0 = chain.points[0]
    x = _add(x0, _n_side_sum(chain.defects, cert, op.inverse()))
    dev = _forward_deviations(chain, x, op, alpha)
    ymax = float(chain.defect_norms(g.beta).max()) if chain.defects else 0.0
    bound = 2 * g.c * cert.d * ymax / (1 - g.t)
    return ShadowReport("finite", x, alpha, chain.start, dev, np.full(dev.size, bound), bound,
                        ymax, notes={"declared_delta": chain.delta,
                                     "declared_bound": 2 * g.c * cert.d * chain.delta / (1 - g.t)})


def telescoping_sides(chain: Pseudotrajectory, cert: GHCertificate, op: LinearOperator,
                      x: SeqVec) -> list[tuple[SeqVec, SeqVec]]:
    """For m = 0..p: ``(x_m - T^m x, A_m - B_m)`` with the right side built
    from ``A_{m+1} = P_M y_m + T A_m`` and ``B_m = S(P_N y_m + B_{m+1})``."""
    p = chain.length
    ys = chain.defects
    inv = op.inverse()
    zero = SeqVec.zeros(chain.points[0].window, exact=chain.points[0].exact)
    A = [zero]
    for m in range(p):
        A.append(cert.project_m(ys[m]) + op(A[m]))
    B = [zero] * (p + 1)
    for m in range(p - 1, -1, -1):
        B[m] = inv(cert.project_n(ys[m]) + B[m + 1])
    out = []
    y = x
    for m, pt in enumerate(chain.points):
        if m:
            y = op(y)
        out.append((pt - y, A[m] - B[m]))
    return out


def periodic_truncation(c: float, d: float, t: float, ymax: float, p: int, tol: float) -> int:
    """Least ``K >= p`` with ``c d Y t^{K+1} / (1-t) <= tol t^p / 2``."""
    if ymax == 0:
        return p
    need = math.log(tol * t ** p * (1 - t) / (2 * c * d * ymax)) / math.log(t) - 1
    K = max(p, math.ceil(need))
    while c * d * ymax * t ** (K + 1) / (1 - t) > tol * t ** p / 2:
        K += 1
    return K


def shadow_periodic(cycle: Pseudotrajectory, cert: GHCertificate, op: LinearOperator,
                    tol: float, grade: int | None = None) -> ShadowReport:
    """Approximate periodic shadow point of a cycle.

    Both series run over the periodically extended defects up to ``K`` terms;
    ``K`` keeps each discarded tail below ``tol t^p / 2``, which bounds the
    residual ``||T^p x - x||`` by ``(1 + t^p)^2 tol / 2``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not cycle.periodic:
        raise ChainError("shadow_periodic needs a cycle")
    _check(cert, op, cycle)
    alpha = cycle.grade if grade is None else grade
    g = cert.constants(alpha)
    c, d, t = g.c, cert.d, g.t
    p = cycle.length
    ys = cycle.defects
    ymax = float(cycle.defect_norms(g.beta).max())
    K = periodic_truncation(c, d, t, ymax, p, tol)
    n_terms = [ys[(j - 1) % p] for j in range(1, K + 1)]
    m_terms = [ys[(-n - 1) % p] for n in range(0, K + 1)]
    x = cycle.points[0]
    x = _add(x, _n_side_sum(n_terms, cert, op.inverse()))
    x = _add(x, _m_side_sum(m_terms, cert, op, 0), -1)
    dev = _forward_deviations(cycle, x, op, alpha)
    tp = t ** p
    bound = 3 * c * d * ymax / (1 - t) + tol
    y = x
    for _ in range(p):
        y = op(y)
    resid = seminorm_eval(y - x, cycle.family, alpha)
    return ShadowReport("periodic", x, alpha, 0, dev, np.full(dev.size, bound), bound, ymax,
                        periodic_residual=resid, residual_bound=(1 + tp) ** 2 * tol / 2,
                        truncation_tolerance=tol, truncation_terms=K,
                        notes={"declared_delta": cycle.delta})


def shadow_two_sided(pseudo: Pseudotrajectory, cert: GHCertificate, op: LinearOperator,
                     tol: float = 0.0, grade: int | None = None) -> ShadowReport:
    """Shadow a segment indexed ``-m..m`` by ``x = x_0 + u + v`` with
    ``u = sum_{j=1}^m S^j P_N y_{j-1}`` and ``v = sum_{j=1}^m T^j P_M z_{j-1}``,
    where ``z_j = x_{-j-1} - S x_{-j}``.

    Defects outside the segment are zero, so both sums are exact.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    _check(cert, op, pseudo)
    if pseudo.start > 0 or pseudo.start + pseudo.length < 0:
        raise ChainError("segment must contain index 0")
    alpha = pseudo.grade if grade is None else grade
    g = cert.constants(alpha)
    c, d, t = g.c, cert.d, g.t
    inv = op.inverse()
    m_fwd = pseudo.start + pseudo.length
    m_bwd = -pseudo.start
    ys = [pseudo.point(j + 1) - op(pseudo.point(j)) for j in range(m_fwd)]
    zs = [pseudo.point(-j - 1) - inv(pseudo.point(-j)) for j in range(m_bwd)]
    x0 = pseudo.point(0)
    x = _add(x0, _n_side_sum(ys, cert, inv))
    x = _add(x, _m_side_sum(zs, cert, op, 1))
    fam = pseudo.family
    Y = max((seminorm_eval(y, fam, g.beta) for y in ys), default=0.0)
    Z = max((seminorm_eval(z, fam, g.beta) for z in zs), default=0.0)
    dev = verify_shadowing(pseudo, x, op, alpha)

    def geo(a: int, b: int) -> float:  # sum_{j=a}^{b} t^j
        return sum(t ** j for j in range(a, b + 1)) if b >= a else 0.0

    bounds = []
    for idx in range(pseudo.start, m_fwd + 1):
        if idx >= 0:
            bounds.append(c * d * (Y * (geo(0, idx - 1) + geo(1, m_fwd - idx))
                                   + Z * t ** idx * geo(1, m_bwd)))
        else:
            k = -idx
            bounds.append(c * d * (Z * (geo(0, k - 1) + geo(1, m_bwd - k))
                                   + Y * t ** k * geo(1, m_fwd)))
    bounds = np.array(bounds)
    b = operator_norm_bound(op.inverse(), fam, alpha)
    return ShadowReport("two_sided", x, alpha, pseudo.start, dev, bounds,
                        float(bounds.max()) if bounds.size else 0.0, max(Y, Z),
                        truncation_tolerance=tol, truncation_terms=max(m_fwd, m_bwd),
                        notes={"declared_delta": pseudo.delta, "forward_defect_max": Y,
                               "backward_defect_max": Z, "inverse_norm_bound": b})


def verify_shadowing(pseudo: Pseudotrajectory, candidate: SeqVec, op: LinearOperator,
                     grade: int) -> np.ndarray:
    """``||x_j - T^j candidate||_grade`` for every index of the segment."""
    fam = pseudo.family
    out = {}
    y = candidate
    for j in range(0, pseudo.start + pseudo.length + 1):
        if j:
            y = op(y)
        out[j] = seminorm_eval(pseudo.point(j) - y, fam, grade)
    inv = op.inverse()
    y = candidate
    for j in range(-1, pseudo.start - 1, -1):
        y = inv(y)
        out[j] = seminorm_eval(pseudo.point(j) - y, fam, grade)
    return np.array([out[j] for j in range(pseudo.start, pseudo.start + pseudo.length + 1)])


# ---------------------------------------------------------------------------
# counterexamples


def counterexample_operator() -> ShiftOperator:
    """``(Tx)_n = w_{n+1} x_{n+1}`` with ``w_n = 1/2`` for n <= 0 and 2 for n >= 1."""
    half, two = exact_scalar(Fraction(1, 2)), exact_scalar(2)
    w = WeightSequence.from_table({0: half, 1: two}, ConstantTail(half), ConstantTail(two))
    return ShiftOperator("backward", w)


@dataclass(frozen=True)
class PeriodicPointCheck:
    only_zero: bool
    reason: str

    def to_json(self) -> dict:
        return {"only_zero": self.only_zero, "reason": self.reason}


def periodic_points_trivial(op: LinearOperator, period: int | None = None,
                            samples: Sequence[SeqVec] = ()) -> PeriodicPointCheck:
    """On finitely supported sequences a weighted shift moves the lowest
    support index by ``p`` steps under ``T^p``, so ``T^p x = x`` forces
    ``x = 0``. ``samples`` are propagated as an explicit check."""
    if not isinstance(op, ShiftOperator):
        return PeriodicPointCheck(False, "not a weighted shift")
    for x in samples:
        sx = support(x)
        if sx is None:
            continue
        y = x
        for _ in range(period or 1):
            y = op(y)
        sy = support(y)
        if sy is not None and sy.lo == sx.lo:
            return PeriodicPointCheck(False, "support did not move")
    return PeriodicPointCheck(True, f"T^p moves every finite support by {op.step} * p")


@dataclass(frozen=True)
class FailureCertificate:
    n: int
    delta: float
    peak_norm: float
    max_defect: float
    periodic_points: PeriodicPointCheck
    distance_from_zero_orbit: float
    shadow_radius: float = 1.0

    @property
    def shadowing_fails(self) -> bool:
        return self.periodic_points.only_zero and self.distance_from_zero_orbit > self.shadow_radius

    def to_json(self) -> dict:
        return {"kind": "failure_certificate", "n": self.n, "delta": self.delta,
                "peak_norm": self.peak_norm, "max_defect": self.max_defect,
                "periodic_points": self.periodic_points.to_json(),
                "distance_from_zero_orbit": self.distance_from_zero_orbit,
                "shadow_radius": self.shadow_radius, "shadowing_fails": self.shadowing_fails}


def counterexample_cycle(delta, fam: SeminormFamily | None = None,
                         grade: int = 1) -> tuple[Pseudotrajectory, FailureCertificate]:
    """The cycle ``0, d e_n, 2d e_{n-1}, ..., 2^n d e_0, ..., d e_{-n}, 0`` with
    the least ``n >= 0`` such that ``2^n d > 1``.

    Its only candidate periodic shadow is 0, which stays ``2^n d`` away.
    """
    fam = Lp(2) if fam is None else fam
    dq = exact_scalar(delta)
    if not dq > 0:
        raise ValueError("delta must be positive")
    n = 0
    while (2 ** n) * dq <= 1:
        n += 1
    op = counterexample_operator()
    zero = SeqVec.zeros((0, 0), exact=True)
    pts = [zero]
    for i in range(n + 1):
        pts.append(SeqVec.basis(n - i, dq * 2 ** i, exact=True))
    for i in range(1, n + 1):
        pts.append(SeqVec.basis(-i, dq * 2 ** (n - i), exact=True))
    pts.append(zero)
    chain = Pseudotrajectory(tuple(pts), _defects(op, pts), grade, float(dq), fam, True, 0,
                             op.fingerprint())
    chain.validate(op)
    norms = chain.defect_norms()
    dist = float(verify_shadowing(chain, zero, op, grade).max())
    cert = FailureCertificate(n, float(dq), float(2 ** n * dq), float(norms.max()),
                              periodic_points_trivial(op, chain.length, chain.points[1:-1]),
                              dist)
    return chain, cert


@dataclass(frozen=True)
class AdversarialChain:
    values: tuple[dict, ...]
    delta: float
    max_defect: float
    escape_index: int
    marked_value_at_escape: float

    def to_json(self) -> dict:
        return {"delta": self.delta, "length": len(self.values) - 1,
                "max_defect": self.max_defect, "escape_index": self.escape_index,
                "marked_value_at_escape": self.marked_value_at_escape}


def adversarial_mult_chain(op: MultiplicationOperator, delta: float,
                           compact: Sequence | None = None) -> AdversarialChain:
    """``f_0 = 0``, ``f_j = phi f_{j-1} + phi(z0)^{j-1} delta`` on the grid.

    Every defect has modulus ``delta`` on the compact while ``|f_j(z0)| = j delta``,
    so the chain leaves ``|f_k(z0)| < 2`` at ``k = ceil(2/delta)``.
    """
    z0 = op.marked_site
    if z0 is None or op.phase is None:
        raise ValueError("operator needs a marked site with a phase")
    if abs(op.modulus[op.sites.index(z0)] - 1.0) > 0:
        raise ValueError("marked site must have |phi| = 1")
    if not delta > 0:
        raise ValueError("delta must be positive")
    k = math.ceil(2 / Fraction(str(delta)))
    compact = list(op.sites) if compact is None else list(compact)
    lam = op.multiplier(z0)
    f = {s: 0j for s in op.sites}
    vals = [f]
    worst = 0.0
    for j in range(1, k + 1):
        shift = lam ** (j - 1) * delta
        mf = mult_apply(op, f)
        f = {s: mf[s] + shift for s in op.sites}
        # the defect is the added constant at every site of the compact
        worst = max(worst, abs(shift) if compact else 0.0)
        vals.append(f)
    return AdversarialChain(tuple(vals), delta, worst, k, abs(vals[k][z0]))


__all__ = [
    "Pseudotrajectory", "make_chain", "make_cycle", "random_cycle", "make_two_sided",
    "ShadowReport", "shadow_finite", "telescoping_sides", "periodic_truncation",
    "shadow_periodic", "shadow_two_sided", "verify_shadowing", "counterexample_operator",
    "PeriodicPointCheck", "periodic_points_trivial", "FailureCertificate",
    "counterexample_cycle", "AdversarialChain", "adversarial_mult_chain",
]
