"""
Bessel function of the first kind, order zero.

Three regimes, chosen so the absolute error stays below 1e-12 up to
|x| = 1e4 and beyond:

* |x| <= 8        power series summed in double-double arithmetic, so the
                  cancellation between its terms (up to 1e2 in size) costs
                  nothing and the result is within an ulp
* 8 < |x| <= 30   Miller backward recurrence normalised by
                  J0 + 2 * sum_k J_2k = 1
* |x| > 30        Hankel asymptotic expansion; the truncation error of the
                  optimally truncated series is ~exp(-2|x|) and is far below
                  double precision here
"""

import math

import numpy as np

from ..errors import DomainError

SERIES_LIMIT = 8.0
ASYMPTOTIC_LIMIT = 30.0
_N_SERIES = 40
_N_ASYMPTOTIC = 24


_SPLIT = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    v = s - a
    return s, (a - (s - v)) + (b - v)


def _two_prod(a, b):
    p = a * b
    ah = _SPLIT * a
    ah = ah - (ah - a)
    bh = _SPLIT * b
    bh = bh - (bh - b)
    al, bl = a - ah, b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _two_sum(p, e)


def _dd_div(ah, al, d):
    q = ah / d
    p, e = _two_prod(q, d)
    r = ((ah - p) - e + al) / d
    return _two_sum(q, r)


def _series(x):
    # q = -x^2/4 exactly as a double-double
    qh, ql = _two_prod(x, x)
    qh, ql = -0.25 * qh, -0.25 * ql
    th, tl = np.ones_like(x), np.zeros_like(x)
    sh, sl = np.ones_like(x), np.zeros_like(x)
    for k in range(1, _N_SERIES):
        th, tl = _dd_mul(th, tl, qh, ql)
        th, tl = _dd_div(th, tl, float(k * k))
        sh, e = _two_sum(sh, th)
        sh, sl = _two_sum(sh, e + sl + tl)
        if np.max(np.abs(th)) < 1e-34:
            break
    return sh + sl


def _miller(x):
    # start order well above x so the recurrence is dominated by the minimal solution
    start = int(2 * math.ceil((float(np.max(x)) + 40.0) / 2.0))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j0 = np.zeros_like(x)
    for n in range(start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm = norm + 2.0 * j_cur
        big = np.abs(j_cur) > 1e200
        if np.any(big):
            scale = np.where(big, 1e-200, 1.0)
            j_cur = j_cur * scale
            j_next = j_next * scale
            norm = norm * scale
    j0 = j_cur
    return j0 / (j0 + norm)


def _asymptotic(x):
    inv8x = 1.0 / (8.0 * x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, _N_ASYMPTOTIC):
        term = term * ((2 * k - 1) ** 2) * inv8x / k
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sign * term
        else:
            q = q - sign * term
    c, s = np.cos(x), np.sin(x)
    cos_chi = (c + s) / math.sqrt(2.0)
    sin_chi = (s - c) / math.sqrt(2.0)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def bessel_j0(x):
    """
    Bessel function J0.

    Parameters
    ----------
    x : float or array_like
        Real argument(s). J0 is even, so the sign is ignored.

    Returns
    -------
    float or ndarray
        J0(x), with the same shape as `x`.

    Raises
    ------
    DomainError
        If any input is NaN or infinite.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("bessel_j0 requires finite arguments")
    ax = np.abs(arr)
    out = np.empty_like(ax)
    lo = ax <= SERIES_LIMIT
    mid = (ax > SERIES_LIMIT) & (ax <= ASYMPTOTIC_LIMIT)
    hi = ax > ASYMPTOTIC_LIMIT
    if np.any(lo):
        out[lo] = _series(ax[lo])
    if np.any(mid):
        out[mid] = _miller(ax[mid])
    if np.any(hi):
        out[hi] = _asymptotic(ax[hi])
    if np.ndim(x) == 0:
        return float(out)
    return out


_ZEROS = np.empty(0)


def j0_zeros(n):
    """First `n` positive zeros of J0.

    McMahon's expansion gives a start within 2e-3 of each zero; a few secant
    steps on `bessel_j0` bring them to machine precision. Each zero is
    refined independently, so results are cached and reused.
    """
    global _ZEROS
    if n > _ZEROS.size:
        _ZEROS = _compute_zeros(max(n, 2 * _ZEROS.size))
        _ZEROS.setflags(write=False)
    return _ZEROS[:n].copy()


def _compute_zeros(n):
    b = (np.arange(1, n + 1) - 0.25) * math.pi
    eb = 8.0 * b
    z1 = b + 1.0 / eb - 124.0 / (3.0 * eb**3) + 120928.0 / (15.0 * eb**5)
    z0 = z1 - 1e-3
    f0, f1 = bessel_j0(z0), bessel_j0(z1)
    for _ in range(8):
        denom = f1 - f0
        safe = denom != 0.0
        step = np.where(safe, f1 * (z1 - z0) / np.where(safe, denom, 1.0), 0.0)
        z0, f0 = z1, f1
        z1 = z1 - step
        f1 = bessel_j0(z1)
    return z1
