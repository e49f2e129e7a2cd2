"""Scalar plumbing for the two coefficient modes.

Float mode stores ``float64`` arrays. Exact mode stores numpy object arrays of
``gmpy2.mpq``; every double converts to an mpq without rounding, so exact mode
can replay a float computation with no cancellation error.
"""
from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)
_MPQ = np.frompyfunc(mpq, 1, 1)


def exact_scalar(v) -> mpq:
    """Convert ``v`` (int, float, Fraction, mpq or a ``"p/q"`` string) to mpq."""
    if isinstance(v, type(ZERO)):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(v, (int, np.integer)):
        return mpq(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if not math.isfinite(f):
            raise ValueError(f"non-finite scalar {f!r}")
        return mpq(f)
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    if isinstance(v, str):
        return mpq(v.strip())
    raise TypeError(f"cannot convert {type(v).__name__} to an exact scalar")


def mpq_to_float(q) -> float:
    try:
        return float(q)
    except OverflowError:
        return math.inf if q > 0 else -math.inf


def to_exact(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a
    if a.dtype.kind == "f":
        return _floats_to_mpq(np.asarray(a, dtype=float))
    out = np.empty(a.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(a.reshape(-1).tolist()):
        flat[i] = mpq(v)
    return out


_POW2 = [gmpy2.mpz(1) << k for k in range(1130)]


def _floats_to_mpq(a: np.ndarray) -> np.ndarray:
    # a finite double is m / 2^k with integer m and k <= 1127; building
    # mpq(m, 2^k) from a table is about three times faster than mpq(double)
    out = np.empty(a.shape, dtype=object)
    if not np.all(np.isfinite(a)):
        out.reshape(-1)[:] = [mpq(v) for v in a.reshape(-1).tolist()]
        return out
    mant, expo = np.frexp(a.reshape(-1))
    m = (mant * 9007199254740992.0).astype(np.int64).tolist()
    k = 53 - expo
    if k.size and k.min() < 0:
        out.reshape(-1)[:] = [mpq(v) for v in a.reshape(-1).tolist()]
        return out
    out.reshape(-1)[:] = list(map(mpq, m, [_POW2[i] for i in k.tolist()]))
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    if a.dtype != object:
        return np.asarray(a, dtype=float)
    try:
        return a.astype(float)
    except OverflowError:
        pass
    return np.fromiter((mpq_to_float(v) for v in a.reshape(-1)), dtype=float,
                       count=a.size).reshape(a.shape)


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def scalar_to_json(v):
    """Floats stay floats; an mpq becomes a float when that is lossless, else ``"p/q"``."""
    if isinstance(v, type(ZERO)):
        f = mpq_to_float(v)
        if math.isfinite(f) and mpq(f) == v:
            return f
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def scalar_from_json(v, exact: bool):
    if exact:
        return exact_scalar(v)
    if isinstance(v, str):
        return mpq_to_float(mpq(v))
    return float(v)


def is_mpq(v) -> bool:
    return isinstance(v, type(ZERO))


__all__ = [
    "ZERO", "ONE", "exact_scalar", "mpq_to_float", "to_exact", "to_float",
    "is_exact", "scalar_to_json", "scalar_from_json", "is_mpq", "gmpy2",
]
