"""Semiconjugacies for bounded perturbations and radial homeomorphisms.

A perturbed map is ``S(x) = T x + g(x)`` with ``g`` bounded. For a
generalized hyperbolic ``T`` the map ``phi = I + Psi^{-1}(-g)`` satisfies
``T o phi = phi o S``, where

    Psi^{-1}(f)(x) = sum_{k>=0} T^k P_M f(S^{-k-1} x) - sum_{k>=1} T^{-k} P_N f(S^{k-1} x).

Both series are cut at the first ``K`` whose geometric tails fall below the
requested tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractionError
from .hyperbolicity import GHCertificate
from .operators import LinearOperator, operator_norm_bound
from .spaces import IndexWindow, SeminormFamily, SeqVec, seminorm_eval


# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class ConstantVector:
    """``g(x) = v``."""

    value: SeqVec

    lipschitz = 0.0

    def __call__(self, x: SeqVec) -> SeqVec:
        return self.value

    def bound(self, fam: SeminormFamily, grade: int) -> float:
        return seminorm_eval(self.value, fam, grade)

    def scaled(self, alpha) -> "ConstantVector":
        return ConstantVector(self.value.scale(alpha))

    def plus(self, other: "ConstantVector") -> "ConstantVector":
        return ConstantVector(self.value + other.value)

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value.to_json()}


@dataclass(frozen=True)
class LipschitzTable:
    """Coordinatewise ``g(x)_j = a_j * clip(x_j, -1, 1)`` for ``j`` in the table window.

    On a solid seminorm ``g`` is Lipschitz with constant ``max |a_j|`` and
    bounded by the seminorm of the amplitude vector.
    """

    amplitudes: SeqVec
    lipschitz_constant: float | None = None

    def __post_init__(self):
        amp = self.amplitudes.to_float()
        object.__setattr__(self, "amplitudes", amp)
        lmax = float(np.max(np.abs(amp.coeffs))) if amp.window.width else 0.0
        if self.lipschitz_constant is None:
            object.__setattr__(self, "lipschitz_constant", lmax)
        elif self.lipschitz_constant < lmax:
            raise ValueError(f"stated Lipschitz constant {self.lipschitz_constant} is below "
                             f"the table maximum {lmax}")

    @property
    def lipschitz(self) -> float:
        return self.lipschitz_constant

    def __call__(self, x: SeqVec) -> SeqVec:
        w = self.amplitudes.window
        hw = x.window.hull(w)
        xs = x.to_float().embed(hw).coeffs[w.lo - hw.lo:w.hi - hw.lo + 1]
        return SeqVec(w, self.amplitudes.coeffs * np.clip(xs, -1.0, 1.0))

    def bound(self, fam: SeminormFamily, grade: int) -> float:
        return seminorm_eval(self.amplitudes, fam, grade)

    def scaled(self, alpha) -> "LipschitzTable":
        return LipschitzTable(self.amplitudes.scale(float(alpha)))

    def plus(self, other: "LipschitzTable") -> "LipschitzTable":
        return LipschitzTable(self.amplitudes + other.amplitudes)

    def to_json(self) -> dict:
        return {"kind": "lipschitz_table", "amplitudes": self.amplitudes.to_json(),
                "lipschitz": self.lipschitz_constant}


Perturbation = ConstantVector | LipschitzTable


def perturbation_from_json(obj) -> Perturbation:
    if obj["kind"] == "constant":
        return ConstantVector(SeqVec.from_json(obj["value"]))
    if obj["kind"] == "lipschitz_table":
        return LipschitzTable(SeqVec.from_json(obj["amplitudes"]), obj.get("lipschitz"))
    raise ValueError(f"unknown perturbation kind {obj['kind']!r}")


@dataclass(frozen=True)
class PerturbedMap:
    """``S(x) = T x + g(x)``."""

    base: LinearOperator
    g: Perturbation

    def __call__(self, x: SeqVec) -> SeqVec:
        return self.base(x) + self.g(x)

    def contraction_factor(self, fam: SeminormFamily, grade: int) -> float:
        """``L * ||T^{-1}||``; the fixed-point inverse needs this below 1."""
        return self.g.lipschitz * operator_norm_bound(self.base.inverse(), fam, grade)

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "g": self.g.to_json()}


def invert_perturbed(S: PerturbedMap, y: SeqVec, tol: float, fam: SeminormFamily,
                     grade: int, max_iter: int = 10_000) -> SeqVec:
    """Solve ``S(x) = y`` by iterating ``x <- T^{-1}(y - g(x))``."""
    q = S.contraction_factor(fam, grade)
    if not q < 1:
        raise ContractionError(f"L * ||T^-1|| = {q!r} is not below 1; fixed-point inverse "
                               "is not guaranteed")
    inv = S.base.inverse()
    if isinstance(S.g, ConstantVector):
        return inv(y - S.g.value)
    x = inv(y)
    for _ in range(max_iter):
        nxt = inv(y - S.g(x))
        step = seminorm_eval(nxt - x, fam, grade)
        x = nxt
        if step < tol:
            return x
    raise ContractionError(f"no convergence within {max_iter} iterations")


# ---------------------------------------------------------------------------
# series


def psi_truncation(c: float, d: float, t: float, bound: float, tol: float) -> int:
    """Least ``K`` with ``c d B t^{K+1}/(1-t) < tol`` and ``c d B (t^K + t^{K+1}) < tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if bound == 0:
        return 0
    K = 0
    while not (c * d * bound * t ** (K + 1) / (1 - t) < tol
               and c * d * bound * (t ** K + t ** (K + 1)) < tol):
        K += 1
    return K


@dataclass(frozen=True)
class PsiResult:
    value: SeqVec
    terms: int
    residual_bound: float
    tail_bound: float

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "terms": self.terms,
                "residual_bound": self.residual_bound, "tail_bound": self.tail_bound}


def psi_inverse(f: Perturbation, R: PerturbedMap, cert: GHCertificate, x: SeqVec, tol: float,
                fam: SeminormFamily, grade: int, bound: float | None = None) -> PsiResult:
    """Truncated ``Psi^{-1}(f)(x)``; ``bound`` defaults to the declared sup of ``f``."""
    op = R.base
    cert.check(op)
    g = cert.constants(grade)
    B = f.bound(fam, g.beta) if bound is None else bound
    K = psi_truncation(g.c, cert.d, g.t, B, tol)
    tail = g.c * cert.d * B * g.t ** (K + 1) / (1 - g.t)
    resid = g.c * cert.d * B * (g.t ** K + g.t ** (K + 1))
    inv = op.inverse()
    if isinstance(f, ConstantVector):
        back = [f.value] * (K + 1)
        fwd = [f.value] * K
    else:
        back, fwd = [], []
        z = x
        for _ in range(K + 1):  # f(R^{-k-1} x), k = 0..K
            z = invert_perturbed(R, z, tol * 1e-3, fam, grade)
            back.append(f(z))
        z = x
        for k in range(K):  # f(R^{k} x), k = 0..K-1
            if k:
                z = R(z)
            fwd.append(f(z))
    zero = SeqVec.zeros(x.window, exact=x.exact and isinstance(f, ConstantVector)
                        and f.value.exact)
    acc = None
    for v in reversed(back):
        pm = cert.project_m(v)
        acc = pm if acc is None else pm + op(acc)
    first = acc if acc is not None else zero
    acc = None
    for v in reversed(fwd):
        pn = cert.project_n(v)
        acc = inv(pn if acc is None else pn + acc)
    out = first - acc if acc is not None else first
    return PsiResult(out, K, resid, tail)


def conjugacy_delta(cert: GHCertificate, eps: float, grade: int) -> tuple[int, float]:
    """Input grade and perturbation size ``(1-t) eps / (2 c d)``."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    g = cert.constants(grade)
    return g.beta, (1 - g.t) * eps / (2 * g.c * cert.d)


@dataclass(frozen=True)
class ConjugacyValue:
    point: SeqVec
    value: SeqVec
    terms: int
    residual_bound: float
    displacement_bound: float

    def to_json(self) -> dict:
        return {"point": self.point.to_json(), "value": self.value.to_json(),
                "terms": self.terms, "residual_bound": self.residual_bound,
                "displacement_bound": self.displacement_bound}


class ConjugacyMap:
    """``phi = I + Psi^{-1}(-g)`` as a callable; constant perturbations are
    summed once since the series does not depend on the point."""

    def __init__(self, op: LinearOperator, cert: GHCertificate, S: PerturbedMap, tol: float,
                 fam: SeminormFamily, grade: int):
        if S.base.fingerprint() != op.fingerprint():
            raise ValueError("perturbed map is built on a different operator")
        cert.check(op)
        self.op, self.cert, self.S, self.tol = op, cert, S, tol
        self.fam, self.grade = fam, grade
        g = cert.constants(grade)
        self.bound = S.g.bound(fam, g.beta)
        self.displacement_bound = g.c * cert.d * self.bound * (1 + g.t) / (1 - g.t)
        self._neg = S.g.scaled(-1)
        self._cached = None

    def correction(self, x: SeqVec) -> PsiResult:
        if isinstance(self._neg, ConstantVector):
            if self._cached is None:
                self._cached = psi_inverse(self._neg, self.S, self.cert, x, self.tol,
                                           self.fam, self.grade)
            return self._cached
        return psi_inverse(self._neg, self.S, self.cert, x, self.tol, self.fam, self.grade)

    def evaluate(self, x: SeqVec) -> ConjugacyValue:
        r = self.correction(x)
        return ConjugacyValue(x, x + r.value, r.terms, r.residual_bound,
                              self.displacement_bound)

    def __call__(self, x: SeqVec) -> SeqVec:
        return x + self.correction(x).value


def conjugacy_map(op: LinearOperator, cert: GHCertificate, S: PerturbedMap, x: SeqVec,
                  tol: float, fam: SeminormFamily, grade: int) -> ConjugacyValue:
    return ConjugacyMap(op, cert, S, tol, fam, grade).evaluate(x)


def verify_semiconjugacy(T: Callable, S: Callable, phi: Callable, samples: Sequence[SeqVec],
                         fam: SeminormFamily, grade: int) -> np.ndarray:
    """``||T(phi(x)) - phi(S(x))||_grade`` per sample."""
    return np.array([seminorm_eval(T(phi(x)) - phi(S(x)), fam, grade) for x in samples])


# ---------------------------------------------------------------------------
# radial homeomorphisms


def _dist(x: SeqVec, y: SeqVec, fam: SeminormFamily, grade: int) -> float:
    return seminorm_eval(x.to_float() - y.to_float(), fam, grade)


@dataclass(frozen=True)
class RadialHomeo:
    """``h(x) = x0 + phi(1 + k v)/(1 + k v) (x - x0)`` with ``v = ||x - x0|| / r``.

    ``phi`` interpolates ``(1, 1)``, ``(1 + k v_a, lam (1 + k v_a))`` and
    ``(1 + k, 1 + k)`` and is the identity beyond ``1 + k``.
    """

    center: SeqVec
    radius: float
    family: SeminormFamily
    grade: int
    k: int
    lam: float
    nu_a: float

    @property
    def knots(self) -> tuple[tuple[float, float], ...]:
        u = 1 + self.k * self.nu_a
        return ((1.0, 1.0), (u, self.lam * u), (1.0 + self.k, 1.0 + self.k))

    def interpolant(self, u: float) -> float:
        (x0, y0), (x1, y1), (x2, y2) = self.knots
        if u >= x2:
            return u
        if u <= x1:
            return y0 + (y1 - y0) * (u - x0) / (x1 - x0)
        return y1 + (y2 - y1) * (u - x1) / (x2 - x1)

    def _nu(self, x: SeqVec) -> float:
        return _dist(x, self.center, self.family, self.grade) / self.radius

    def psi(self, s: float) -> float:
        u = 1 + self.k * s
        return self.interpolant(u) * s / u

    def psi_inverse(self, mu: float) -> float:
        if mu >= 1:
            return mu
        (x0, y0), (x1, y1), (x2, y2) = self.knots
        nu_b = self.lam * self.nu_a
        if mu <= nu_b:
            xa, ya, xb, yb = x0, y0, x1, y1
        else:
            xa, ya, xb, yb = x1, y1, x2, y2
        beta = (yb - ya) / (xb - xa)
        alpha = ya - beta * xa
        # (alpha + beta (1 + k s)) s = mu (1 + k s)
        A = beta * self.k
        Bq = alpha + beta - mu * self.k
        disc = math.sqrt(Bq * Bq + 4 * A * mu)
        return 2 * mu / (Bq + disc) if Bq > 0 else (disc - Bq) / (2 * A)

    def apply(self, x: SeqVec) -> SeqVec:
        nu = self._nu(x)
        if nu >= 1 or nu == 0:
            return x
        u = 1 + self.k * nu
        return self.center.to_float() + (x.to_float() - self.center.to_float()).scale(
            self.interpolant(u) / u)

    def inverse_apply(self, y: SeqVec) -> SeqVec:
        mu = self._nu(y)
        if mu >= 1 or mu == 0:
            return y
        s = self.psi_inverse(mu)
        return self.center.to_float() + (y.to_float() - self.center.to_float()).scale(s / mu)

    def to_json(self) -> dict:
        return {"kind": "radial", "center": self.center.to_json(), "radius": self.radius,
                "family": self.family.to_json(), "grade": self.grade, "k": self.k,
                "lambda": self.lam, "nu_a": self.nu_a,
                "knots": [list(p) for p in self.knots]}


def radial_homeo(x0: SeqVec, r: float, fam: SeminormFamily, grade: int, a: SeqVec, b: SeqVec,
                 max_k: int = 1 << 20) -> RadialHomeo:
    """Radial map of the ball ``||x - x0|| < r`` sending ``a`` to ``b``, where
    ``b - x0`` is a positive multiple of ``a - x0``; ``k`` is the least admissible."""
    if not r > 0:
        raise ValueError("radius must be positive")
    da = _dist(a, x0, fam, grade)
    db = _dist(b, x0, fam, grade)
    if not 0 < da < r:
        raise ValueError("a must lie in the ball and off the center")
    if not 0 < db < r:
        raise ValueError("b must lie in the ball and off the center")
    lam = db / da
    off = seminorm_eval((b.to_float() - x0.to_float()) - (a.to_float() - x0.to_float()).scale(lam),
                        fam, grade)
    if off > 1e-12 * max(db, 1e-300):
        raise ValueError("b - x0 is not a positive multiple of a - x0; use ball_homeo")
    nu = da / r
    k = 1
    while not (1 < lam * (1 + k * nu) < 1 + k):
        k += 1
        if k > max_k:
            raise AssertionError("no admissible k; inputs violate the ball conditions")
    return RadialHomeo(x0.to_float(), float(r), fam, grade, k, lam, nu)


def radial_homeo_apply(h, x: SeqVec) -> SeqVec:
    return h.apply(x)


def radial_homeo_inverse_apply(h, x: SeqVec) -> SeqVec:
    return h.inverse_apply(x)


@dataclass(frozen=True)
class CompositeHomeo:
    """Composition of maps applied left to right; ``inverted[i]`` swaps the
    direction of the i-th map."""

    parts: tuple
    inverted: tuple[bool, ...] = ()

    def __post_init__(self):
        if not self.inverted:
            object.__setattr__(self, "inverted", (False,) * len(self.parts))

    def apply(self, x: SeqVec) -> SeqVec:
        for h, inv in zip(self.parts, self.inverted):
            x = h.inverse_apply(x) if inv else h.apply(x)
        return x

    def inverse_apply(self, y: SeqVec) -> SeqVec:
        for h, inv in zip(reversed(self.parts), reversed(self.inverted)):
            y = h.apply(y) if inv else h.inverse_apply(y)
        return y

    def to_json(self) -> dict:
        return {"kind": "composite", "inverted": list(self.inverted),
                "parts": [p.to_json() for p in self.parts]}


def _identity() -> CompositeHomeo:
    return CompositeHomeo(())


def homeo_to_center(x0: SeqVec, r: float, fam: SeminormFamily, grade: int,
                    a: SeqVec) -> RadialHomeo:
    """A map of the ball around ``x0`` sending ``a`` to ``x0``, built on a
    shifted centre behind ``x0`` so that ``x0`` lies on the ray through ``a``."""
    da = _dist(a, x0, fam, grade)
    if not 0 < da < r:
        raise ValueError("a must lie in the ball and off the center")
    t = (r - da) / 3
    dirv = (a.to_float() - x0.to_float()).scale(1 / da)
    c = x0.to_float() - dirv.scale(t)
    return radial_homeo(c, r - t, fam, grade, a, x0)


def _probe_directions(window: IndexWindow) -> list[SeqVec]:
    out = []
    for j in window.indices().tolist():
        out.append(SeqVec.basis(int(j)))
    return out


def ball_homeo(x0: SeqVec, r: float, fam: SeminormFamily, grade: int, a: SeqVec,
               b: SeqVec) -> CompositeHomeo:
    """A homeomorphism sending ``a`` to ``b`` and fixing everything outside the ball.

    The centre is nudged by ``(r - m)/4`` along a basis direction, with ``m``
    the larger distance of ``a``, ``b`` from ``x0``. It then works inside the
    ball of radius ``r - (r - m)/2``.
    """
    da, db = _dist(a, x0, fam, grade), _dist(b, x0, fam, grade)
    if not (da < r and db < r):
        raise ValueError("a and b must lie in the ball")
    if (a.to_float() - b.to_float()).is_zero():
        return _identity()
    m = max(da, db)
    eps = (r - m) / 2
    window = x0.window.hull(a.window).hull(b.window)
    window = IndexWindow(window.lo - 1, window.hi + 1)
    for e in _probe_directions(window):
        ne = seminorm_eval(e, fam, grade)
        if ne == 0:
            continue
        c = x0.to_float() + e.scale((r - m) / 4 / ne)
        if _dist(a, c, fam, grade) > 0 and _dist(b, c, fam, grade) > 0:
            break
    else:
        raise ValueError("seminorm vanishes on every probe direction")
    f = homeo_to_center(c, r - eps, fam, grade, a)
    g = homeo_to_center(c, r - eps, fam, grade, b)
    return CompositeHomeo((f, g), (False, True))


def path_homeo(waypoints: Sequence[SeqVec], radius: float, fam: SeminormFamily,
               grade: int) -> CompositeHomeo:
    """Chain ball maps along ``waypoints``: each hop uses the ball of the given
    radius centred at the midpoint of the hop."""
    if len(waypoints) < 2:
        return _identity()
    parts = []
    for p, q in zip(waypoints, waypoints[1:]):
        mid = (p.to_float() + q.to_float()).scale(0.5)
        if _dist(p, mid, fam, grade) >= radius:
            raise ValueError("hop longer than the ball diameter")
        parts.append(ball_homeo(mid, radius, fam, grade, p, q))
    return CompositeHomeo(tuple(parts))


__all__ = [
    "ConstantVector", "LipschitzTable", "Perturbation", "perturbation_from_json",
    "PerturbedMap", "invert_perturbed", "psi_truncation", "PsiResult", "psi_inverse",
    "conjugacy_delta", "ConjugacyValue", "ConjugacyMap", "conjugacy_map",
    "verify_semiconjugacy", "RadialHomeo", "radial_homeo", "radial_homeo_apply",
    "radial_homeo_inverse_apply", "CompositeHomeo", "homeo_to_center", "ball_homeo",
    "path_homeo",
]
