"""Integer-order Bessel functions of the first kind and their positive zeros.

Small arguments use the ascending power series; larger ones use Miller's
backward recurrence normalised with ``J_0 + 2 * sum(J_2k) = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError

MAX_ORDER = 200
MAX_ARGUMENT = 50.0
SERIES_LIMIT = 12.0

MAX_ZERO_ORDER = 10
MAX_ZERO_INDEX = 10


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    if half == 0.0:
        return 1.0 if n == 0 else 0.0
    log_first = n * math.log(abs(half)) - math.lgamma(n + 1)
    if log_first < -745.0:
        return 0.0
    term = math.copysign(math.exp(log_first), half**n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > 2:
            break
    return total


def _miller_start(nmax: int, x: float) -> int:
    top = max(nmax, int(abs(x)) + 1)
    start = top + int(math.sqrt(40.0 * top)) + 20
    return start + (start % 2)


def bessel_j_orders(nmax: int, x: float) -> np.ndarray:
    """Return ``[J_0(x), ..., J_nmax(x)]`` from one backward-recurrence sweep."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"non-finite argument {x!r}")
    if nmax < 0:
        raise InvalidArgumentError("nmax must be non-negative")
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    ax = abs(x)
    if ax < 1.0:
        # one recurrence step can overflow when 2k/x is huge; the series is cheap here
        out[:] = [_series(n, x) for n in range(nmax + 1)]
        return out
    start = _miller_start(nmax, ax)
    vals = np.zeros(start + 2)
    vals[start] = 1e-30
    norm = 0.0
    for k in range(start, 0, -1):
        vals[k - 1] = (2.0 * k / ax) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
            norm *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * vals[k - 1]
    norm += vals[0]
    out[:] = vals[: nmax + 1] / norm
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_j(order: int, x: float) -> float:
    """J_order(x) for integer order, accurate to ~1e-12 absolute for |x| <= 50."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"non-finite argument {x!r}")
    order = int(order)
    if abs(order) > MAX_ORDER:
        raise OutOfRangeError(f"|order| must be <= {MAX_ORDER}, got {order}")
    n = abs(order)
    sign = -1.0 if (order < 0 and n % 2) else 1.0
    if abs(x) < SERIES_LIMIT:
        return sign * _series(n, x)
    return sign * float(bessel_j_orders(n, x)[n])


@dataclass(frozen=True)
class BesselZeroRequest:
    order: int
    index: int

    def __post_init__(self):
        if self.order < 0 or self.order > MAX_ZERO_ORDER:
            raise OutOfRangeError(f"zero order must lie in [0, {MAX_ZERO_ORDER}]")
        if self.index < 1 or self.index > MAX_ZERO_INDEX:
            raise OutOfRangeError(f"zero index must lie in [1, {MAX_ZERO_INDEX}]")


def bessel_zero(order: int, index: int) -> float:
    """k-th positive zero of J_order.

    The zero is bracketed by a sign-change scan (consecutive zeros are more
    than pi apart), bisected, then polished with guarded secant steps.
    """
    req = BesselZeroRequest(int(order), int(index))
    f = lambda z: bessel_j(req.order, z)  # noqa: E731

    step = 0.1
    lo = max(float(req.order), step)
    flo = f(lo)
    found = 0
    while True:
        hi = lo + step
        if hi > MAX_ARGUMENT:
            raise OutOfRangeError("requested zero lies beyond the supported range")
        fhi = f(hi)
        if flo == 0.0:
            found += 1
            if found == req.index:
                return lo
        elif flo * fhi < 0.0:
            found += 1
            if found == req.index:
                break
        lo, flo = hi, fhi

    a, b, fa = lo, hi, flo
    while b - a > 1e-6:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0.0:
            b = mid
        else:
            a, fa = mid, fm
    x0, x1 = a, b
    f0, f1 = f(x0), f(x1)
    for _ in range(50):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo <= x2 <= hi):
            break
        x0, f0 = x1, f1
        x1, f1 = x2, f(x2)
        if abs(x1 - x0) < 1e-13:
            break
    return x1
