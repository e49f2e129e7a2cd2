"""Finite-support sequences over integer windows and graded seminorm families.

A :class:`SeqVec` is a finitely supported sequence ``(x_j)`` indexed by ``j`` in
an :class:`IndexWindow`. Coefficients are either doubles or exact rationals
(``gmpy2.mpq`` in an object array). Seminorm families are weighted
``l^p``-type sums ``(sum_j |x_j a_{j,k}|^p)^(1/p)`` (a sup when ``p = 0``) driven
by a Köthe matrix ``a_{j,k}``. Grades ``k`` start at 1.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np
from gmpy2 import mpq

from ._arith import (ZERO, exact_scalar, is_exact, scalar_from_json,
                     scalar_to_json, to_exact, to_float)
from .errors import WindowCapError

DEFAULT_WINDOW_CAP = 2 ** 20
_window_cap = DEFAULT_WINDOW_CAP


def get_window_cap() -> int:
    return _window_cap


def set_window_cap(cap: int) -> int:
    """Set the maximal window width; returns the previous value."""
    global _window_cap
    if cap < 1:
        raise ValueError("window cap must be positive")
    old, _window_cap = _window_cap, int(cap)
    return old


@contextlib.contextmanager
def window_cap(cap: int) -> Iterator[None]:
    old = set_window_cap(cap)
    try:
        yield
    finally:
        set_window_cap(old)


# ---------------------------------------------------------------------------
# windows and vectors


@dataclass(frozen=True, order=True)
class IndexWindow:
    """Inclusive integer range ``[lo, hi]``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")
        if self.hi - self.lo + 1 > _window_cap:
            raise WindowCapError(
                f"window [{self.lo}, {self.hi}] has width {self.hi - self.lo + 1}, "
                f"cap is {_window_cap}")

    @classmethod
    def of(cls, w) -> "IndexWindow":
        if isinstance(w, IndexWindow):
            return w
        lo, hi = w
        return cls(int(lo), int(hi))

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def __contains__(self, j) -> bool:
        return self.lo <= j <= self.hi

    def hull(self, other: "IndexWindow") -> "IndexWindow":
        return IndexWindow(min(self.lo, other.lo), max(self.hi, other.hi))

    def shifted(self, d: int) -> "IndexWindow":
        return IndexWindow(self.lo + d, self.hi + d)

    def to_json(self) -> list:
        return [self.lo, self.hi]


def _zeros(width: int, exact: bool) -> np.ndarray:
    if exact:
        return np.full(width, ZERO, dtype=object)
    return np.zeros(width)


class SeqVec:
    """Immutable finitely supported sequence.

    Parameters
    ----------
    window : IndexWindow or (lo, hi)
        Index range holding the stored coefficients. Everything outside is 0.
    coeffs : array_like
        One value per window index. A numpy object array is treated as exact
        and its entries are converted to ``mpq``; anything else becomes
        ``float64`` and must be finite.
    """

    __slots__ = ("window", "_c", "_f")

    def __init__(self, window, coeffs):
        window = IndexWindow.of(window)
        arr = np.asarray(coeffs)
        if arr.dtype == object:
            arr = np.array([exact_scalar(v) for v in arr.reshape(-1)], dtype=object)
        else:
            arr = np.array(arr, dtype=float).reshape(-1)
            if not np.all(np.isfinite(arr)):
                raise ValueError("SeqVec coefficients must be finite")
        if arr.shape != (window.width,):
            raise ValueError(f"expected {window.width} coefficients, got {arr.shape}")
        self._init(window, arr)

    def _init(self, window: IndexWindow, arr: np.ndarray, floats=None) -> None:
        arr.flags.writeable = False
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "_c", arr)
        # float copy of exact coefficients, filled lazily
        object.__setattr__(self, "_f", floats)

    def __setattr__(self, name, value):
        raise AttributeError("SeqVec is immutable")

    @classmethod
    def _raw(cls, window: IndexWindow, arr: np.ndarray) -> "SeqVec":
        # trusted constructor: arr already has the right dtype and length
        v = cls.__new__(cls)
        v._init(window, arr)
        return v

    # constructors
    @classmethod
    def zeros(cls, window=(0, 0), exact: bool = False) -> "SeqVec":
        w = IndexWindow.of(window)
        return cls._raw(w, _zeros(w.width, exact))

    @classmethod
    def basis(cls, n: int, value=1.0, exact: bool = False) -> "SeqVec":
        """``value * e_n``."""
        arr = _zeros(1, exact)
        arr[0] = exact_scalar(value) if exact else float(value)
        if not exact and not math.isfinite(arr[0]):
            raise ValueError("non-finite coefficient")
        return cls._raw(IndexWindow(n, n), arr)

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, object], window=None,
                     exact: bool = False) -> "SeqVec":
        if window is None:
            if not coeffs:
                window = (0, 0)
            else:
                window = (min(coeffs), max(coeffs))
        w = IndexWindow.of(window)
        arr = _zeros(w.width, exact)
        for j, v in coeffs.items():
            if j not in w:
                raise ValueError(f"index {j} outside window [{w.lo}, {w.hi}]")
            arr[j - w.lo] = exact_scalar(v) if exact else float(v)
        if exact:
            return cls._raw(w, arr)
        return cls(w, arr)

    # accessors
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def exact(self) -> bool:
        return is_exact(self._c)

    @property
    def lo(self) -> int:
        return self.window.lo

    @property
    def hi(self) -> int:
        return self.window.hi

    def indices(self) -> np.ndarray:
        return self.window.indices()

    def __getitem__(self, j: int):
        if j in self.window:
            return self._c[j - self.window.lo]
        return ZERO if self.exact else 0.0

    def items(self) -> Iterator[tuple[int, object]]:
        """Nonzero ``(index, value)`` pairs in increasing index order."""
        for off in np.flatnonzero(self._c != 0):
            yield self.window.lo + int(off), self._c[off]

    def to_exact(self) -> "SeqVec":
        if self.exact:
            return self
        v = SeqVec.__new__(SeqVec)
        # doubles convert without rounding, so the float copy is known
        v._init(self.window, to_exact(self._c), self._c)
        return v

    def to_float(self) -> "SeqVec":
        """Float copy. Exact values beyond double range saturate to +-inf, so
        the result may violate the finiteness invariant; it is meant for
        measurement only."""
        if not self.exact:
            return self
        return SeqVec._raw(self.window, self.float_coeffs())

    def float_coeffs(self) -> np.ndarray:
        if not self.exact:
            return self._c
        if self._f is None:
            f = to_float(self._c)
            f.flags.writeable = False
            object.__setattr__(self, "_f", f)
        return self._f

    def is_zero(self) -> bool:
        return not np.any(self._c != 0)

    def embed(self, window) -> "SeqVec":
        """Same vector stored on a larger window."""
        w = IndexWindow.of(window)
        if w == self.window:
            return self
        if self.lo < w.lo or self.hi > w.hi:
            nz = support(self)
            if nz is not None and (nz.lo < w.lo or nz.hi > w.hi):
                raise ValueError("embedding would drop nonzero coefficients")
        arr = _zeros(w.width, self.exact)
        lo, hi = max(w.lo, self.lo), min(w.hi, self.hi)
        if lo <= hi:
            arr[lo - w.lo:hi - w.lo + 1] = self._c[lo - self.lo:hi - self.lo + 1]
        return SeqVec._raw(w, arr)

    def trim(self) -> "SeqVec":
        nz = support(self)
        if nz is None:
            return SeqVec.zeros((self.lo, self.lo), exact=self.exact)
        return SeqVec._raw(nz, self._c[nz.lo - self.lo:nz.hi - self.lo + 1].copy())

    def restrict(self, lo: int | None = None, hi: int | None = None) -> "SeqVec":
        """Coordinate projection onto indices in ``[lo, hi]`` (None = unbounded).
        The window is kept."""
        idx = self.indices()
        keep = np.ones(idx.shape, dtype=bool)
        if lo is not None:
            keep &= idx >= lo
        if hi is not None:
            keep &= idx <= hi
        if keep.all():
            return self
        arr = self._c.copy()
        arr[~keep] = ZERO if self.exact else 0.0
        return SeqVec._raw(self.window, arr)

    # arithmetic
    def __add__(self, other: "SeqVec") -> "SeqVec":
        return _combine(self, other, None, 1)

    def __sub__(self, other: "SeqVec") -> "SeqVec":
        return vec_sub(self, other)

    def __neg__(self) -> "SeqVec":
        return SeqVec._raw(self.window, -self._c)

    def scale(self, alpha) -> "SeqVec":
        if self.exact:
            return SeqVec._raw(self.window, self._c * exact_scalar(alpha))
        return SeqVec(self.window, self._c * float(alpha))

    def __mul__(self, alpha) -> "SeqVec":
        return self.scale(alpha)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeqVec):
            return NotImplemented
        d = vec_sub(self, other)
        return d.is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(f"{j}: {v}" for j, v in self.items())
        tag = ", exact" if self.exact else ""
        return f"SeqVec([{self.lo}, {self.hi}]{tag}, {{{body}}})"

    # serialization
    def to_json(self) -> dict:
        out: dict = {"window": self.window.to_json(),
                     "coeffs": {str(j): scalar_to_json(v) for j, v in self.items()}}
        if self.exact:
            out["exact"] = True
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "SeqVec":
        exact = bool(obj.get("exact", False))
        coeffs = {int(j): scalar_from_json(v, exact) for j, v in obj["coeffs"].items()}
        return cls.from_mapping(coeffs, window=obj["window"], exact=exact)


def _combine(x: SeqVec, y: SeqVec, alpha, sign: int) -> SeqVec:
    # alpha*x + sign*y on the hull, one allocation
    w = x.window.hull(y.window)
    exact = x.exact or y.exact
    a = x.to_exact().coeffs if exact else x.coeffs
    b = y.to_exact().coeffs if exact else y.coeffs
    if alpha is not None:
        a = a * (exact_scalar(alpha) if exact else float(alpha))
    if x.window == w:
        out = a.copy() if alpha is None else a
    else:
        out = _zeros(w.width, exact)
        out[x.lo - w.lo:x.hi - w.lo + 1] = a
    sl = slice(y.lo - w.lo, y.hi - w.lo + 1)
    if sign > 0:
        out[sl] += b
    else:
        out[sl] -= b
    if exact:
        return SeqVec._raw(w, out)
    return SeqVec(w, out)


def vec_axpy(alpha, x: SeqVec, y: SeqVec) -> SeqVec:
    """``alpha*x + y`` on the hull of both windows."""
    return _combine(x, y, alpha, 1)


def vec_sub(x: SeqVec, y: SeqVec) -> SeqVec:
    return _combine(x, y, None, -1)


def support(x: SeqVec) -> IndexWindow | None:
    """Smallest window holding every nonzero coefficient; None for the zero vector."""
    nz = np.flatnonzero(x.coeffs != 0)
    if nz.size == 0:
        return None
    return IndexWindow(x.lo + int(nz[0]), x.lo + int(nz[-1]))


# ---------------------------------------------------------------------------
# Köthe matrices


@dataclass(frozen=True)
class ConstantMatrix:
    """``a_{j,k} = value`` for every j and k."""

    value: float = 1.0

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("constant Köthe entry must be finite and nonnegative")

    def entries(self, idx: np.ndarray, k: int) -> np.ndarray:
        return np.full(np.shape(idx), float(self.value))

    def first_positive_grade(self, j: int) -> int | None:
        return 1 if self.value > 0 else None

    def reflect(self) -> "ConstantMatrix":
        return self

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class PolynomialGrade:
    """``a_{j,k} = (|j|+1)^k``."""

    def entries(self, idx: np.ndarray, k: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            return (np.abs(np.asarray(idx, dtype=float)) + 1.0) ** k

    def first_positive_grade(self, j: int) -> int | None:
        return 1

    def reflect(self) -> "PolynomialGrade":
        return self

    def to_json(self) -> dict:
        return {"kind": "polynomial_grade"}


@dataclass(frozen=True)
class BandIndicator:
    """``a_{j,k} = 1`` if ``|j| <= r_k`` else 0.

    ``radii`` lists ``r_1, r_2, ...``; None means ``r_k = k``. Beyond the end of
    an explicit table the last radius is kept.
    """

    radii: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.radii is not None:
            object.__setattr__(self, "radii", tuple(int(r) for r in self.radii))
            if not self.radii:
                raise ValueError("empty radius table")

    def radius(self, k: int) -> int:
        if self.radii is None:
            return k
        return self.radii[min(k, len(self.radii)) - 1]

    def entries(self, idx: np.ndarray, k: int) -> np.ndarray:
        return (np.abs(np.asarray(idx)) <= self.radius(k)).astype(float)

    def first_positive_grade(self, j: int) -> int | None:
        if self.radii is None:
            return max(abs(j), 1)
        for k, r in enumerate(self.radii, start=1):
            if abs(j) <= r:
                return k
        return None

    def max_radius(self, max_grade: int) -> int:
        return max(self.radius(k) for k in range(1, max_grade + 1))

    def reflect(self) -> "BandIndicator":
        return self

    def to_json(self) -> dict:
        return {"kind": "band_indicator",
                "radii": None if self.radii is None else list(self.radii)}


@dataclass(frozen=True)
class TableMatrix:
    """Explicit entries: ``rows[j - lo][k - 1] = a_{j,k}`` for the stored range only."""

    lo: int
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise ValueError("table rows must be nonempty and of equal length")
        object.__setattr__(self, "rows", rows)

    @property
    def window(self) -> IndexWindow:
        return IndexWindow(self.lo, self.lo + len(self.rows) - 1)

    @property
    def max_grade(self) -> int:
        return len(self.rows[0])

    def entries(self, idx: np.ndarray, k: int) -> np.ndarray:
        idx = np.asarray(idx)
        w = self.window
        if idx.size and (idx.min() < w.lo or idx.max() > w.hi):
            raise ValueError(f"table Köthe matrix queried outside [{w.lo}, {w.hi}]")
        if not 1 <= k <= self.max_grade:
            raise ValueError(f"table Köthe matrix has grades 1..{self.max_grade}")
        col = np.array([r[k - 1] for r in self.rows])
        return col[idx - self.lo]

    def first_positive_grade(self, j: int) -> int | None:
        if j not in self.window:
            return None
        for k, v in enumerate(self.rows[j - self.lo], start=1):
            if v > 0:
                return k
        return None

    def reflect(self) -> "TableMatrix":
        return TableMatrix(-(self.lo + len(self.rows) - 1), tuple(reversed(self.rows)))

    def to_json(self) -> dict:
        return {"kind": "table", "lo": self.lo, "rows": [list(r) for r in self.rows]}


@dataclass(frozen=True)
class WeightedConstant:
    """``a_{j,k} = |v_j|`` for a weight sequence ``v`` (grade independent)."""

    weights: object  # operators.WeightSequence; typed loosely to avoid an import cycle

    def entries(self, idx: np.ndarray, k: int) -> np.ndarray:
        return np.abs(self.weights.values(np.asarray(idx)))

    def first_positive_grade(self, j: int) -> int | None:
        return 1

    def reflect(self) -> "WeightedConstant":
        return WeightedConstant(self.weights.reflect())

    def to_json(self) -> dict:
        return {"kind": "weighted_constant", "weights": self.weights.to_json()}


KotheMatrix = ConstantMatrix | PolynomialGrade | BandIndicator | TableMatrix | WeightedConstant


def kothe_from_json(obj: Mapping) -> KotheMatrix:
    kind = obj["kind"]
    if kind == "constant":
        return ConstantMatrix(float(obj.get("value", 1.0)))
    if kind == "polynomial_grade":
        return PolynomialGrade()
    if kind == "band_indicator":
        radii = obj.get("radii")
        return BandIndicator(None if radii is None else tuple(radii))
    if kind == "table":
        return TableMatrix(int(obj["lo"]), tuple(tuple(r) for r in obj["rows"]))
    if kind == "weighted_constant":
        from .operators import WeightSequence
        return WeightedConstant(WeightSequence.from_json(obj["weights"]))
    raise ValueError(f"unknown Köthe matrix kind {kind!r}")


# ---------------------------------------------------------------------------
# seminorm families


def _check_p(p: float, allow_zero: bool) -> float:
    p = float(p)
    if allow_zero and p == 0:
        return 0.0
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError(f"exponent p must be in [1, inf){' or 0' if allow_zero else ''}, got {p}")
    return p


@dataclass(frozen=True)
class Lp:
    """Unweighted ``l^p``; the same norm at every grade."""

    p: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p, False))

    @property
    def canonical(self):
        return ConstantMatrix(1.0), self.p

    def to_json(self) -> dict:
        return {"kind": "lp", "p": self.p}


@dataclass(frozen=True)
class C0:
    """Sup norm of ``c_0``."""

    @property
    def canonical(self):
        return ConstantMatrix(1.0), 0.0

    def to_json(self) -> dict:
        return {"kind": "c0"}


@dataclass(frozen=True)
class RapidDecrease:
    """Rapidly decreasing sequences: ``||x||_k = sum_j (|j|+1)^k |x_j|``."""

    @property
    def canonical(self):
        return PolynomialGrade(), 1.0

    def to_json(self) -> dict:
        return {"kind": "rapid_decrease"}


@dataclass(frozen=True)
class KothePrimary:
    """Echelon space with matrix ``matrix`` and exponent ``p`` (0 means sup)."""

    matrix: KotheMatrix = field(default_factory=PolynomialGrade)
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p, True))

    @property
    def canonical(self):
        return self.matrix, self.p

    def to_json(self) -> dict:
        return {"kind": "kothe", "matrix": self.matrix.to_json(), "p": self.p}


@dataclass(frozen=True)
class OmegaProduct:
    """All sequences with the product topology: ``||x||_k = max_{|j|<=k} |x_j|``."""

    @property
    def canonical(self):
        return BandIndicator(None), 0.0

    def to_json(self) -> dict:
        return {"kind": "omega"}


SeminormFamily = Lp | C0 | RapidDecrease | KothePrimary | OmegaProduct


def family_from_json(obj: Mapping) -> SeminormFamily:
    kind = obj["kind"]
    if kind == "lp":
        return Lp(obj.get("p", 2.0))
    if kind == "c0":
        return C0()
    if kind == "rapid_decrease":
        return RapidDecrease()
    if kind == "kothe":
        return KothePrimary(kothe_from_json(obj["matrix"]), obj.get("p", 1.0))
    if kind == "omega":
        return OmegaProduct()
    raise ValueError(f"unknown seminorm family kind {kind!r}")


def is_grade_independent(fam: SeminormFamily) -> bool:
    matrix, _ = fam.canonical
    return isinstance(matrix, (ConstantMatrix, WeightedConstant))


def _pnorm(v: np.ndarray, p: float) -> float:
    if p == 0:
        return float(v.max())
    if p == 1:
        try:
            return math.fsum(v.tolist())
        except OverflowError:
            return math.inf
    s = float(v.max())
    if s == 0:
        return 0.0
    return s * math.fsum(((v / s) ** p).tolist()) ** (1.0 / p)


def seminorm_eval(x: SeqVec, fam: SeminormFamily, k: int) -> float:
    """Grade-``k`` seminorm of ``x``.

    The sum runs over the nonzero coefficients only, so no truncation is
    involved. Overflow gives ``math.inf`` instead of raising.
    """
    if k < 1:
        raise ValueError(f"grades start at 1, got {k}")
    matrix, p = fam.canonical
    c = x.float_coeffs()
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        return 0.0
    vals = np.abs(c[nz])
    a = matrix.entries(nz + x.lo, k)
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.where(a == 0, 0.0, vals * a)
        if not np.all(np.isfinite(v)):
            return math.inf
        r = _pnorm(v, p)
    return r if math.isfinite(r) else math.inf


def seminorm_exact(x: SeqVec, fam: SeminormFamily, k: int):
    """Rational value of the grade-``k`` seminorm of an exact vector, or None
    when it is not rational in general (``1 < p < inf``) or a weight overflows."""
    if k < 1:
        raise ValueError(f"grades start at 1, got {k}")
    matrix, p = fam.canonical
    if p not in (0, 1):
        return None
    c = x.to_exact().coeffs
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        return mpq(0)
    a = matrix.entries(nz + x.lo, k)
    if not np.all(np.isfinite(a)):
        return None
    terms = [abs(c[i]) * mpq(float(w)) for i, w in zip(nz, a)]
    return max(terms) if p == 0 else sum(terms, mpq(0))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class KotheValidation:
    valid: bool
    window: IndexWindow
    max_grade: int
    monotonicity_violations: tuple[tuple[int, int], ...]  # (j, k): a_{j,k} > a_{j,k+1}
    negative_entries: tuple[tuple[int, int], ...]
    dead_rows: tuple[int, ...]  # rows with no positive entry at any grade

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "window": self.window.to_json(),
            "max_grade": self.max_grade,
            "monotonicity_violations": [{"index": j, "grades": [k, k + 1]}
                                        for j, k in self.monotonicity_violations],
            "negative_entries": [{"index": j, "grade": k} for j, k in self.negative_entries],
            "dead_rows": list(self.dead_rows),
        }


def kothe_validate(A: KotheMatrix, window, max_grade: int) -> KotheValidation:
    """Check ``0 <= a_{j,k} <= a_{j,k+1}`` over ``window x [1, max_grade]`` and
    that every row becomes positive at some grade."""
    w = IndexWindow.of(window)
    if max_grade < 1:
        raise ValueError("max_grade must be at least 1")
    idx = w.indices()
    cols = np.stack([A.entries(idx, k) for k in range(1, max_grade + 1)], axis=1)
    neg = [(int(idx[i]), int(k) + 1) for i, k in zip(*np.nonzero(cols < 0))]
    mono = [(int(idx[i]), int(k) + 1)
            for i, k in zip(*np.nonzero(cols[:, :-1] > cols[:, 1:]))]
    dead = [int(j) for j in idx if A.first_positive_grade(int(j)) is None]
    return KotheValidation(not (neg or mono or dead), w, max_grade,
                           tuple(mono), tuple(neg), tuple(dead))


__all__ = [
    "DEFAULT_WINDOW_CAP", "get_window_cap", "set_window_cap", "window_cap",
    "IndexWindow", "SeqVec", "vec_axpy", "vec_sub", "support",
    "ConstantMatrix", "PolynomialGrade", "BandIndicator", "TableMatrix",
    "WeightedConstant", "KotheMatrix", "kothe_from_json",
    "Lp", "C0", "RapidDecrease", "KothePrimary", "OmegaProduct", "SeminormFamily",
    "family_from_json", "is_grade_independent", "seminorm_eval", "seminorm_exact",
    "KotheValidation", "kothe_validate",
]
