"""Bessel functions of the first kind, orders 0 and 1, for real x >= 0.

The argument range is split in three:

* ``x < 8``: Maclaurin series (terms stay below ~1e2, so cancellation
  costs at most two digits).
* ``8 <= x < 25``: Miller backward recurrence normalised with
  ``J0 + 2*sum(J_2k) = 1``.
* ``x >= 25``: Hankel asymptotic expansion. The optimally truncated error
  is of order ``exp(-2x)``, far below double precision here.

Absolute accuracy is better than 1e-12 on [0, 1000].
"""

import math

import numpy as np

__all__ = ["bessel_j0", "bessel_j1", "bessel_j01"]

_SERIES_MAX = 8.0
_ASYMPTOTIC_MIN = 25.0
_SERIES_TERMS = 40
_MILLER_START = 2 * ((int(_ASYMPTOTIC_MIN) + 42) // 2)
_ASYMPTOTIC_TERMS = 30


def _hankel_coefficients(nu, nterms):
    # a_k(nu) = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k)
    mu = 4.0 * nu * nu
    coef = [1.0]
    for k in range(1, nterms):
        coef.append(coef[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return np.array(coef)


_A0 = _hankel_coefficients(0, _ASYMPTOTIC_TERMS)
_A1 = _hankel_coefficients(1, _ASYMPTOTIC_TERMS)


def _check(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Bessel argument must be finite")
    if np.any(x < 0):
        raise ValueError("Bessel argument must be non-negative")
    return x


def _series(x):
    q = -0.25 * x * x
    t0 = np.ones_like(x)
    t1 = np.ones_like(x)
    s0 = t0.copy()
    s1 = t1.copy()
    for k in range(1, _SERIES_TERMS):
        t0 = t0 * q / (k * k)
        t1 = t1 * q / (k * (k + 1))
        s0 += t0
        s1 += t1
    return s0, 0.5 * x * s1


def _miller(x):
    # fixed start order keeps results independent of how arguments are batched
    start = _MILLER_START
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j1 = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        jp1, jk = jk, jm1
        # jk now holds J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * jk
        if k - 1 == 1:
            j1 = jk.copy()
        big = np.abs(jk) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            jk *= scale
            jp1 *= scale
            norm *= scale
            j1 *= scale
    norm += jk
    return jk / norm, j1 / norm


def _asymptotic(x):
    inv = 1.0 / x
    s, c = np.sin(x), np.cos(x)
    r = math.sqrt(0.5)
    # chi = x - pi/4 for J0 and x - 3pi/4 for J1, expanded so sin/cos act on x only
    phases = ((r * (c + s), r * (s - c)), (r * (s - c), -r * (s + c)))
    out = []
    for coef, (cos_chi, sin_chi) in zip((_A0, _A1), phases):
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        power = np.ones_like(x)
        for k, a in enumerate(coef):
            term = a * power if (k // 2) % 2 == 0 else -a * power
            if k % 2 == 0:
                p += term
            else:
                q += term
            power = power * inv
        out.append(np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi))
    return out[0], out[1]


def bessel_j01(x):
    """Return ``(J0(x), J1(x))`` evaluated together.

    Accepts scalars or arrays; scalars come back as Python floats.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_check(x))
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)

    lo = x < _SERIES_MAX
    hi = x >= _ASYMPTOTIC_MIN
    mid = ~(lo | hi)
    if np.any(lo):
        j0[lo], j1[lo] = _series(x[lo])
    if np.any(mid):
        j0[mid], j1[mid] = _miller(x[mid])
    if np.any(hi):
        j0[hi], j1[hi] = _asymptotic(x[hi])
    if scalar:
        return float(j0[0]), float(j1[0])
    return j0, j1


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Raises
    ------
    ValueError
        If ``x`` is negative or not finite.
    """
    return bessel_j01(x)[0]


def bessel_j1(x):
    """Bessel function of the first kind of order one."""
    return bessel_j01(x)[1]
