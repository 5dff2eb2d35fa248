"""Radial and axial eigenvalues of the coated-cylinder diffusion problem.

Radial roots solve ``gamma*J1(gamma) = B*J0(gamma)`` with Biot number
``B = h*R/D``; ``alpha_n = gamma_n / R``.

Axial roots are the positive zeros of the pole-free form

    g(beta) = (beta**2 - H**2) * sin(beta*Z) - 2*H*beta*cos(beta*Z)

with ``H = h/D``. Zeros of ``g`` coincide with the positive solutions of
``tan(beta*Z) = 2*H*beta / (beta**2 - H**2)`` because ``g`` cannot vanish
where ``cos(beta*Z) = 0`` unless ``beta = H``.

Both solvers isolate roots by a sign-change scan whose step (1/50 of a
half-period) is far below the root spacing, then refine every bracket by
vectorised bisection down to adjacent floating-point numbers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import bessel_j01

__all__ = [
    "RadialSpectrum",
    "AxialSpectrum",
    "BracketingError",
    "radial_residual",
    "axial_residual",
    "solve_radial",
    "solve_axial",
]

SCAN_DIVISIONS = 50
DIRICHLET_BIOT = 1e6


class BracketingError(RuntimeError):
    """Raised when the scan does not isolate the requested number of roots."""


@dataclass(frozen=True)
class RadialSpectrum:
    biot: float
    radius: float
    gammas: np.ndarray

    @property
    def eigenvalues(self):
        """``alpha_n`` in 1/m."""
        return self.gammas / self.radius

    def residuals(self):
        return radial_residual(self.gammas, self.biot)

    def __len__(self):
        return len(self.gammas)


@dataclass(frozen=True)
class AxialSpectrum:
    h_over_d: float
    height: float
    eigenvalues: np.ndarray

    def residuals(self):
        return axial_residual(self.eigenvalues, self.h_over_d, self.height)

    def __len__(self):
        return len(self.eigenvalues)


def radial_residual(gamma, biot):
    j0, j1 = bessel_j01(gamma)
    return gamma * j1 - biot * j0


def axial_residual(beta, h_over_d, height):
    beta = np.asarray(beta, dtype=float)
    bz = beta * height
    return (beta**2 - h_over_d**2) * np.sin(bz) - 2.0 * h_over_d * beta * np.cos(bz)


def _isolate(f, grid, count, what):
    values = f(grid)
    exact = np.flatnonzero(values == 0.0)
    sign = np.sign(values)
    change = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    lo, hi = grid[change], grid[change + 1]
    if len(change) + len(exact) < count:
        raise BracketingError(
            f"{what}: found {len(change) + len(exact)} roots in "
            f"[{grid[0]:.6g}, {grid[-1]:.6g}], needed {count}"
        )
    roots = _bisect(f, lo, hi)
    roots = np.sort(np.concatenate([roots, grid[exact]]))
    return roots[:count]


def _bisect(f, lo, hi, max_iter=200):
    flo = f(lo)
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        fmid = f(mid)
        left = np.sign(fmid) == np.sign(flo)
        lo = np.where(active & left, mid, lo)
        flo = np.where(active & left, fmid, flo)
        hi = np.where(active & ~left, mid, hi)
    # pick the endpoint with the smaller residual
    return np.where(np.abs(f(lo)) <= np.abs(f(hi)), lo, hi)


def solve_radial(biot, radius, count):
    """First ``count`` radial eigenvalues for Biot number ``biot``.

    Exactly one root lies between consecutive zeros of J0 (with 0 taken as
    the zeroth zero), so scanning ``[0, (count + 1) * pi]`` suffices.

    Parameters
    ----------
    biot : float
        ``h*R/D``, must be positive.
    radius : float
        Cylinder radius in m.
    count : int
        Number of roots.

    Returns
    -------
    RadialSpectrum
    """
    if not (biot > 0 and math.isfinite(biot)):
        raise ValueError(f"biot must be positive and finite, got {biot!r}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")

    def f(g):
        return radial_residual(g, biot)

    npts = SCAN_DIVISIONS * (count + 1) + 1
    grid = np.linspace(0.0, (count + 1) * math.pi, npts)
    gammas = _isolate(f, grid, count, "radial eigencondition")
    return RadialSpectrum(float(biot), float(radius), gammas)


def solve_axial(h_over_d, height, count):
    """First ``count`` positive axial eigenvalues ``beta_m`` in 1/m.

    Each interval ``[(k - 1/2)*pi/Z, (k + 1/2)*pi/Z]`` holds one root except
    the one containing ``beta = H``, which holds two. The scan starts at
    ``1e-9/Z`` to drop the trivial root ``beta = 0``.
    """
    if not (h_over_d > 0 and math.isfinite(h_over_d)):
        raise ValueError(f"h_over_d must be positive and finite, got {h_over_d!r}")
    if not height > 0:
        raise ValueError(f"height must be positive, got {height!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")

    def f(b):
        return axial_residual(b, h_over_d, height)

    step = math.pi / (SCAN_DIVISIONS * height)
    npts = SCAN_DIVISIONS * count + SCAN_DIVISIONS // 2 + 1
    grid = np.arange(npts) * step
    grid[0] = 1e-9 / height
    betas = _isolate(f, grid, count, "axial eigencondition")
    return AxialSpectrum(float(h_over_d), float(height), betas)


def j0_zeros(count):
    """First ``count`` positive zeros of J0 (used for interlacing checks)."""
    grid = np.linspace(0.0, (count + 1) * math.pi, SCAN_DIVISIONS * (count + 1) + 1)
    return _isolate(lambda x: bessel_j01(x)[0], grid, count, "J0 zeros")
