"""Bilateral weighted shifts, scalar multiples and grid multiplication operators.

Forward shift: ``(F_w x)_n = w_{n-1} x_{n-1}``. Backward shift:
``(B_w x)_n = w_{n+1} x_{n+1}``. Weights live in a :class:`WeightSequence`,
an explicit core table plus Constant / PowerLaw tail rules, so growth questions
about the tails can be answered in closed form.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from ._arith import ONE, ZERO, exact_scalar, mpq_to_float, scalar_to_json
from .spaces import (BandIndicator, ConstantMatrix, IndexWindow, PolynomialGrade,
                     SeminormFamily, SeqVec, TableMatrix, WeightedConstant,
                     KotheMatrix)

DEFAULT_ITERATION_HORIZON = 100_000


# ---------------------------------------------------------------------------
# asymptotic growth bookkeeping


@dataclass(frozen=True)
class LogGrowth:
    """``log f(n) = nlogn*n*log(n) + linear*n + log*log(n) + O(1)`` as n -> oo.

    ``vanishes`` marks sequences that are eventually 0. Only the leading
    nonzero coefficient matters for bounded-vs-divergent questions.
    """

    nlogn: float = 0.0
    linear: float = 0.0
    log: float = 0.0
    vanishes: bool = False

    def __add__(self, other: "LogGrowth") -> "LogGrowth":
        return LogGrowth(self.nlogn + other.nlogn, self.linear + other.linear,
                         self.log + other.log, self.vanishes or other.vanishes)

    def leading(self) -> float:
        for c in (self.nlogn, self.linear, self.log):
            if c != 0:
                return c
        return 0.0

    def diverges(self) -> bool:
        return not self.vanishes and self.leading() > 0

    def to_json(self) -> dict:
        return {"n_log_n": self.nlogn, "n": self.linear, "log_n": self.log,
                "eventually_zero": self.vanishes}


# ---------------------------------------------------------------------------
# weights


def _min_pos(side: str, start: int, offset: int) -> int:
    # smallest |j - offset| + 1 over the half-line j >= start (right) or j <= start (left)
    if side == "right":
        return 1 if offset >= start else start - offset + 1
    return 1 if offset <= start else offset - start + 1


@dataclass(frozen=True)
class ConstantTail:
    value: object  # mpq

    def __post_init__(self):
        v = exact_scalar(self.value)
        if v == 0:
            raise ValueError("weights must be nonzero")
        object.__setattr__(self, "value", v)

    def values(self, idx: np.ndarray, exact: bool) -> np.ndarray:
        if exact:
            return np.full(idx.shape, self.value, dtype=object)
        return np.full(idx.shape, mpq_to_float(self.value))

    def abs_extrema(self, side: str, start: int) -> tuple[float, float]:
        a = abs(mpq_to_float(self.value))
        return a, a

    def product_growth(self) -> LogGrowth:
        return LogGrowth(linear=math.log(abs(mpq_to_float(self.value))))

    def point_log_coefficient(self) -> float:
        return 0.0

    def reflect(self) -> "ConstantTail":
        return self

    def reciprocal_shifted(self, d: int) -> "ConstantTail":
        return ConstantTail(ONE / self.value)

    def to_json(self) -> dict:
        return {"kind": "constant", "value": scalar_to_json(self.value)}


@dataclass(frozen=True)
class PowerLawTail:
    """``w_j = (|j - offset| + 1)^(sign*exponent)``."""

    exponent: float
    sign: int = 1
    offset: int = 0

    def __post_init__(self):
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise ValueError("power-law exponent must be positive and finite")
        if self.sign not in (1, -1):
            raise ValueError("power-law sign must be +1 or -1")
        object.__setattr__(self, "exponent", float(self.exponent))

    def _base(self, idx: np.ndarray) -> np.ndarray:
        pos = np.abs(np.asarray(idx, dtype=float) - self.offset) + 1.0
        with np.errstate(over="ignore"):
            return pos ** self.exponent

    def values(self, idx: np.ndarray, exact: bool) -> np.ndarray:
        base = self._base(idx)
        if exact:
            if self.sign > 0:
                return np.array([mpq(b) for b in base.tolist()], dtype=object).reshape(idx.shape)
            return np.array([ONE / mpq(b) for b in base.tolist()], dtype=object).reshape(idx.shape)
        return base if self.sign > 0 else 1.0 / base

    def abs_extrema(self, side: str, start: int) -> tuple[float, float]:
        lo = float(_min_pos(side, start, self.offset)) ** self.exponent
        if self.sign > 0:
            return lo, math.inf
        return 0.0, 1.0 / lo

    def product_growth(self) -> LogGrowth:
        # sum_{i<=n} log(i^r) = r (n log n - n) + O(log n)
        s = self.sign * self.exponent
        return LogGrowth(nlogn=s, linear=-s)

    def point_log_coefficient(self) -> float:
        return self.sign * self.exponent

    def reflect(self) -> "PowerLawTail":
        return PowerLawTail(self.exponent, self.sign, -self.offset)

    def reciprocal_shifted(self, d: int) -> "PowerLawTail":
        return PowerLawTail(self.exponent, -self.sign, self.offset - d)

    def to_json(self) -> dict:
        return {"kind": "power_law", "exponent": self.exponent, "sign": self.sign,
                "offset": self.offset}


TailRule = ConstantTail | PowerLawTail


def tail_from_json(obj: Mapping) -> TailRule:
    kind = obj["kind"]
    if kind == "constant":
        return ConstantTail(obj["value"])
    if kind == "power_law":
        return PowerLawTail(float(obj["exponent"]), int(obj.get("sign", 1)),
                            int(obj.get("offset", 0)))
    raise ValueError(f"unknown tail kind {kind!r}")


@dataclass(frozen=True)
class WeightSequence:
    """Nonzero weights: ``core`` holds ``w_{core_lo}, w_{core_lo+1}, ...`` and the
    tails cover everything to the left and right of the core."""

    core_lo: int
    core: tuple
    left_tail: TailRule
    right_tail: TailRule
    _core_f: np.ndarray = field(init=False, repr=False, compare=False, hash=False)
    _core_q: np.ndarray = field(init=False, repr=False, compare=False, hash=False)
    _span_cache: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        core = tuple(exact_scalar(v) for v in self.core)
        if not core:
            raise ValueError("weight core table must be nonempty")
        if any(v == 0 for v in core):
            raise ValueError("weights must be nonzero")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "core_lo", int(self.core_lo))
        object.__setattr__(self, "_core_f", np.array([mpq_to_float(v) for v in core]))
        object.__setattr__(self, "_core_q", np.array(core, dtype=object))
        object.__setattr__(self, "_span_cache", {})

    # constructors
    @classmethod
    def constant(cls, value) -> "WeightSequence":
        return cls(0, (value,), ConstantTail(value), ConstantTail(value))

    @classmethod
    def from_table(cls, table: Mapping[int, object], left: TailRule,
                   right: TailRule) -> "WeightSequence":
        keys = sorted(int(k) for k in table)
        if not keys or keys != list(range(keys[0], keys[-1] + 1)):
            raise ValueError("weight table must cover a contiguous nonempty index range")
        return cls(keys[0], tuple(table[k] if k in table else table[str(k)] for k in keys),
                   left, right)

    @property
    def core_hi(self) -> int:
        return self.core_lo + len(self.core) - 1

    @property
    def core_window(self) -> IndexWindow:
        return IndexWindow(self.core_lo, self.core_hi)

    def values(self, idx, exact: bool = False) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.empty(idx.shape, dtype=object if exact else float)
        lo, hi = self.core_lo, self.core_hi
        mid = (idx >= lo) & (idx <= hi)
        left = idx < lo
        right = idx > hi
        if mid.any():
            out[mid] = (self._core_q if exact else self._core_f)[idx[mid] - lo]
        if left.any():
            out[left] = self.left_tail.values(idx[left], exact)
        if right.any():
            out[right] = self.right_tail.values(idx[right], exact)
        return out

    def span_values(self, lo: int, hi: int, exact: bool = False) -> np.ndarray:
        """Weights ``w_lo..w_hi``; read-only and cached since orbits reuse windows."""
        key = (lo, hi, exact)
        out = self._span_cache.get(key)
        if out is None:
            if len(self._span_cache) > 256:
                self._span_cache.clear()
            out = self.values(np.arange(lo, hi + 1), exact)
            out.flags.writeable = False
            self._span_cache[key] = out
        return out

    def value(self, j: int, exact: bool = False):
        return self.values(np.array([j]), exact)[0]

    def tail(self, side: str) -> TailRule:
        return self.left_tail if side == "left" else self.right_tail

    def tail_abs_extrema(self, side: str, start: int | None = None) -> tuple[float, float]:
        """(inf, sup) of ``|w_j|`` over the tail half-line beginning at ``start``
        (default: right next to the core)."""
        if side == "right":
            start = self.core_hi + 1 if start is None else max(start, self.core_hi + 1)
        else:
            start = self.core_lo - 1 if start is None else min(start, self.core_lo - 1)
        return self.tail(side).abs_extrema(side, start)

    def tail_regime(self, side: str) -> str:
        inf_, sup_ = self.tail_abs_extrema(side)
        if sup_ < 1:
            return "contract"
        if inf_ > 1:
            return "expand"
        return "neutral"

    def reflect(self) -> "WeightSequence":
        """``u_m = w_{-m}``."""
        return WeightSequence(-self.core_hi, tuple(reversed(self.core)),
                              self.right_tail.reflect(), self.left_tail.reflect())

    def reciprocal_shifted(self, d: int) -> "WeightSequence":
        """``v_n = 1 / w_{n+d}``."""
        return WeightSequence(self.core_lo - d, tuple(ONE / v for v in self.core),
                              self.left_tail.reciprocal_shifted(d),
                              self.right_tail.reciprocal_shifted(d))

    def abs_sup(self) -> float:
        return max(float(np.abs(self._core_f).max()),
                   self.tail_abs_extrema("left")[1], self.tail_abs_extrema("right")[1])

    def abs_inf(self) -> float:
        return min(float(np.abs(self._core_f).min()),
                   self.tail_abs_extrema("left")[0], self.tail_abs_extrema("right")[0])

    def to_json(self) -> dict:
        return {"table": {str(self.core_lo + i): scalar_to_json(v)
                          for i, v in enumerate(self.core)},
                "left_tail": self.left_tail.to_json(),
                "right_tail": self.right_tail.to_json()}

    @classmethod
    def from_json(cls, obj: Mapping) -> "WeightSequence":
        table = {int(k): v for k, v in obj["table"].items()}
        return cls.from_table(table, tail_from_json(obj["left_tail"]),
                              tail_from_json(obj["right_tail"]))


# ---------------------------------------------------------------------------
# operators


def _fingerprint(obj: dict) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ShiftOperator:
    """Weighted bilateral shift; ``direction`` is ``"forward"`` or ``"backward"``."""

    direction: str
    weights: WeightSequence

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be forward or backward, got {self.direction!r}")

    def __call__(self, x: SeqVec) -> SeqVec:
        return shift_apply(self, x)

    def inverse(self) -> "ShiftOperator":
        return shift_inverse(self)

    @property
    def step(self) -> int:
        return 1 if self.direction == "forward" else -1

    def to_json(self) -> dict:
        return {"kind": "shift", "direction": self.direction, "weights": self.weights.to_json()}

    def fingerprint(self) -> str:
        return _fingerprint(self.to_json())


@dataclass(frozen=True)
class ScalarOperator:
    """``x -> factor * x``."""

    factor: object

    def __post_init__(self):
        v = exact_scalar(self.factor)
        if v == 0:
            raise ValueError("scalar operator must be invertible")
        object.__setattr__(self, "factor", v)

    def __call__(self, x: SeqVec) -> SeqVec:
        if x.exact:
            return x.scale(self.factor)
        return x.scale(mpq_to_float(self.factor))

    def inverse(self) -> "ScalarOperator":
        return ScalarOperator(ONE / self.factor)

    def to_json(self) -> dict:
        return {"kind": "scalar", "factor": scalar_to_json(self.factor)}

    def fingerprint(self) -> str:
        return _fingerprint(self.to_json())


LinearOperator = ShiftOperator | ScalarOperator


def shift_apply(op: ShiftOperator, x: SeqVec) -> SeqVec:
    """Apply a weighted shift; the window moves by one step, coefficients are
    multiplied by the weight at their source index."""
    w = op.weights.span_values(x.lo, x.hi, exact=x.exact)
    window = x.window.shifted(op.step)
    if x.exact:
        return SeqVec._raw(window, x.coeffs * w)
    with np.errstate(over="ignore"):
        c = x.coeffs * w
    if not np.all(np.isfinite(c)):
        raise OverflowError("shift produced non-finite coefficients; use exact vectors")
    return SeqVec._raw(window, c)


def shift_inverse(op: ShiftOperator) -> ShiftOperator:
    """``F_w^{-1} = B_v`` with ``v_n = 1/w_{n-1}``; ``B_w^{-1} = F_u`` with
    ``u_n = 1/w_{n+1}``."""
    if op.direction == "forward":
        return ShiftOperator("backward", op.weights.reciprocal_shifted(-1))
    return ShiftOperator("forward", op.weights.reciprocal_shifted(1))


def iterate(op: LinearOperator, x: SeqVec, n: int,
            horizon: int = DEFAULT_ITERATION_HORIZON) -> SeqVec:
    """``T^n x`` for signed ``n``."""
    if abs(n) > horizon:
        raise ValueError(f"|n| = {abs(n)} exceeds the iteration horizon {horizon}")
    step = op if n >= 0 else op.inverse()
    for _ in range(abs(n)):
        x = step(x)
    return x


def reflected(op: ShiftOperator) -> ShiftOperator:
    """Conjugate by the reflection ``(Rx)_j = x_{-j}``: ``R B_w R = F_u`` with
    ``u_m = w_{-m}`` and vice versa."""
    other = "forward" if op.direction == "backward" else "backward"
    return ShiftOperator(other, op.weights.reflect())


def reflect_vec(x: SeqVec) -> SeqVec:
    return SeqVec._raw(IndexWindow(-x.hi, -x.lo), x.coeffs[::-1].copy())


def _ratio_sup(fam: SeminormFamily, k: int) -> float:
    # sup_j a_{j+-1,k} / a_{j,k} for the supported families
    matrix, _ = fam.canonical
    if isinstance(matrix, ConstantMatrix):
        return 1.0
    if isinstance(matrix, PolynomialGrade):
        return 2.0 ** k
    return math.inf


def operator_norm_bound(op: LinearOperator, fam: SeminormFamily, k: int) -> float:
    """An upper bound B with ``||op x||_k <= B ||x||_k``; ``inf`` when no
    same-grade bound is available (e.g. band seminorms)."""
    if isinstance(op, ScalarOperator):
        return abs(mpq_to_float(op.factor))
    return op.weights.abs_sup() * _ratio_sup(fam, k)


# ---------------------------------------------------------------------------
# Köthe conditions


def _matrix_point_growth(A: KotheMatrix, side: str, k: int) -> LogGrowth | None:
    """Growth of ``a_{j,k}`` as ``|j| -> oo`` on one side; None if unknown."""
    if isinstance(A, ConstantMatrix):
        return LogGrowth(vanishes=A.value == 0)
    if isinstance(A, PolynomialGrade):
        return LogGrowth(log=float(k))
    if isinstance(A, BandIndicator):
        return LogGrowth(vanishes=True)
    if isinstance(A, WeightedConstant):
        return LogGrowth(log=A.weights.tail(side).point_log_coefficient())
    return None


def _ratio_log_coefficient(A: KotheMatrix, side: str, k: int, m: int) -> tuple[float, bool] | None:
    """Coefficient of log|j| in ``log(a_{j+1,k} / a_{j,m})`` on one side, and
    whether the ratio is eventually the 0/0 = 1 convention (weights then drop
    out). None if the matrix has no tail rule."""
    if isinstance(A, BandIndicator):
        return 0.0, True
    if isinstance(A, (ConstantMatrix, WeightedConstant)):
        return 0.0, False
    if isinstance(A, PolynomialGrade):
        return float(k - m), False
    return None


def _scan_window(w: WeightSequence, A: KotheMatrix, horizon: int, max_m: int) -> IndexWindow:
    h = max(horizon, abs(w.core_lo) + 2, abs(w.core_hi) + 2)
    if isinstance(A, BandIndicator):
        h = max(h, A.max_radius(max_m) + 2)
    if isinstance(A, WeightedConstant):
        h = max(h, abs(A.weights.core_lo) + 2, abs(A.weights.core_hi) + 2)
    if isinstance(A, TableMatrix):
        tw = A.window
        return IndexWindow(max(tw.lo, -h), min(tw.hi - 1, h))
    return IndexWindow(-h, h)


def _ratio_scan(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = num / den
    r = np.where(den == 0, np.where(num == 0, 1.0, math.inf), r)
    return r


@dataclass(frozen=True)
class KotheGradeVerdict:
    grade: int
    holds: bool | None  # None: inconclusive
    least_m: int | None
    scan_sup: float
    method: str  # "analytic" or "scan"
    note: str = ""

    def to_json(self) -> dict:
        return {"grade": self.grade, "holds": self.holds, "least_m": self.least_m,
                "scan_sup": self.scan_sup if math.isfinite(self.scan_sup) else "inf",
                "method": self.method, "note": self.note}


@dataclass(frozen=True)
class KotheVerdict:
    condition: str  # "well_defined" or "invertible"
    scan_window: IndexWindow
    grades: tuple[KotheGradeVerdict, ...]

    @property
    def holds(self) -> bool:
        return all(g.holds is True for g in self.grades)

    @property
    def inconclusive(self) -> bool:
        return any(g.holds is None for g in self.grades)

    def to_json(self) -> dict:
        return {"condition": self.condition, "scan_window": self.scan_window.to_json(),
                "holds": self.holds, "inconclusive": self.inconclusive,
                "grades": [g.to_json() for g in self.grades]}


def _kothe_condition(w: WeightSequence, A: KotheMatrix, horizon: int, grades: Sequence[int],
                     max_extra: int, invert: bool) -> KotheVerdict:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    grades = tuple(int(k) for k in grades)
    max_m = max(grades) + max_extra
    window = _scan_window(w, A, horizon, max_m)
    j = window.indices()
    absw = np.abs(w.values(j))
    out = []
    for k in grades:
        found = None
        last_sup = math.inf
        tail_ok_any = False
        for m in range(k, max_m + 1):
            if invert:
                num, den = A.entries(j, k), absw * A.entries(j + 1, m)
            else:
                num, den = absw * A.entries(j + 1, k), A.entries(j, m)
            sup = float(np.max(_ratio_scan(num, den)))
            last_sup = sup
            coefs = []
            for side in ("left", "right"):
                rc = _ratio_log_coefficient(A, side, k, m)
                if rc is None:
                    coefs = None
                    break
                c, trivial = rc
                wc = 0.0 if trivial else w.tail(side).point_log_coefficient()
                coefs.append(c + (-wc if invert else wc))
            if coefs is None:
                continue
            tail_ok = all(c <= 0 for c in coefs)
            tail_ok_any = tail_ok_any or tail_ok
            if tail_ok and math.isfinite(sup):
                found = (m, sup)
                break
        if isinstance(A, TableMatrix):
            # no tail rule for the matrix: report what the finite table shows
            out.append(KotheGradeVerdict(k, None, None, last_sup, "scan",
                                         "table matrix: supremum beyond the table is unknown"))
        elif found is not None:
            out.append(KotheGradeVerdict(k, True, found[0], found[1], "analytic"))
        else:
            note = ("tail ratio grows like a positive power of |j| for every m tried"
                    if not tail_ok_any else
                    "zero denominator with nonzero numerator inside the scan window")
            out.append(KotheGradeVerdict(k, False, None, last_sup, "analytic", note))
    return KotheVerdict("invertible" if invert else "well_defined", window, tuple(out))


def kothe_well_defined(w: WeightSequence, A: KotheMatrix, horizon: int = 64,
                       grades: Sequence[int] = (1, 2, 3), max_extra: int = 16) -> KotheVerdict:
    """For each grade k, the least ``m >= k`` with
    ``sup_j |w_j| a_{j+1,k} / a_{j,m} < oo``.

    Tails are decided from the growth exponents of the weight and matrix rules;
    the window ``[-horizon, horizon]`` (widened to cover the core and any band
    transition) is scanned for zero denominators and finiteness.
    """
    return _kothe_condition(w, A, horizon, grades, max_extra, invert=False)


def kothe_invertible(w: WeightSequence, A: KotheMatrix, horizon: int = 64,
                     grades: Sequence[int] = (1, 2, 3), max_extra: int = 16) -> KotheVerdict:
    """Same as :func:`kothe_well_defined` for ``sup_j a_{j,k} / (|w_j| a_{j+1,m})``."""
    return _kothe_condition(w, A, horizon, grades, max_extra, invert=True)


# ---------------------------------------------------------------------------
# multiplication operators on a finite grid


@dataclass(frozen=True)
class MultiplicationOperator:
    """``f -> phi * f`` on an explicit list of sample sites.

    ``modulus`` gives ``|phi|`` per site. At ``marked_site`` the multiplier is
    ``modulus * phase`` (``phase`` a unit scalar, possibly complex).
    """

    sites: tuple
    modulus: tuple
    marked_site: object = None
    phase: complex | float | None = None

    def __post_init__(self):
        sites = tuple(self.sites)
        mod = tuple(float(m) for m in self.modulus)
        if not sites:
            raise ValueError("grid must be nonempty")
        if len(set(sites)) != len(sites):
            raise ValueError("grid sites must be distinct")
        if len(mod) != len(sites):
            raise ValueError("one modulus value per site")
        if any(not (m > 0 and math.isfinite(m)) for m in mod):
            raise ValueError("modulus values must be positive and finite")
        if self.phase is not None:
            if self.marked_site not in sites:
                raise ValueError("phase given without a marked grid site")
            if abs(abs(self.phase) - 1.0) > 1e-12:
                raise ValueError("phase must have modulus 1")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "modulus", mod)

    def multiplier(self, site):
        m = self.modulus[self.sites.index(site)]
        if site == self.marked_site and self.phase is not None:
            return m * self.phase
        return m

    def to_json(self) -> dict:
        out = {"kind": "multiplication", "sites": list(self.sites),
               "modulus": list(self.modulus)}
        if self.marked_site is not None:
            out["marked_site"] = self.marked_site
        if self.phase is not None:
            p = complex(self.phase)
            out["phase"] = [p.real, p.imag]
        return out


def mult_apply(op: MultiplicationOperator, f: Mapping) -> dict:
    missing = [s for s in op.sites if s not in f]
    if missing:
        raise ValueError(f"grid function undefined at sites {missing}")
    return {s: op.multiplier(s) * f[s] for s in op.sites}


def operator_from_json(obj: Mapping):
    kind = obj["kind"]
    if kind == "shift":
        return ShiftOperator(obj.get("direction", "forward"),
                             WeightSequence.from_json(obj["weights"]))
    if kind == "scalar":
        return ScalarOperator(obj["factor"])
    if kind == "multiplication":
        phase = obj.get("phase")
        if phase is not None:
            phase = complex(phase[0], phase[1]) if phase[1] else float(phase[0])
        return MultiplicationOperator(tuple(obj["sites"]), tuple(obj["modulus"]),
                                      obj.get("marked_site"), phase)
    raise ValueError(f"unknown operator kind {kind!r}")


__all__ = [
    "DEFAULT_ITERATION_HORIZON", "LogGrowth", "ConstantTail", "PowerLawTail", "TailRule",
    "tail_from_json", "WeightSequence", "ShiftOperator", "ScalarOperator",
    "LinearOperator", "shift_apply", "shift_inverse", "iterate", "reflected",
    "reflect_vec", "operator_norm_bound", "KotheGradeVerdict", "KotheVerdict",
    "kothe_well_defined", "kothe_invertible", "MultiplicationOperator", "mult_apply",
    "operator_from_json",
]
