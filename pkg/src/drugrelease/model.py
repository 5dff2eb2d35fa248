"""Eigenfunction-series model of release from a coated cylinder.

Concentration in ``0 <= r <= R, 0 <= z <= Z``::

    c(r, z, t) = c0 * sum_nm A_nm J0(alpha_n r) X_m(z) exp(-D (alpha_n^2 + beta_m^2) t)
    X_m(z)     = beta_m cos(beta_m z) + H sin(beta_m z)

with ``H = h/D`` and ``c0 = 1/(pi R^2 Z)`` so the loaded mass is one. The
cumulative fraction released ``F(t)`` is available in closed form and as a
quadrature of the boundary fluxes ``h*c``; the two agree to rounding once
the quadrature resolves the highest retained mode.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .eigen import DIRICHLET_BIOT, AxialSpectrum, RadialSpectrum, solve_axial, solve_radial
from .specfun import bessel_j0, bessel_j01

__all__ = [
    "ModelParams",
    "EigenSystem",
    "ReleaseCurve",
    "DEFAULT_TRUNCATION",
    "build_eigensystem",
    "concentration",
    "release_closed_form",
    "release_flux_integral",
    "release_curve",
    "half_release_time",
    "time_to_fraction",
]

log = logging.getLogger(__name__)

DEFAULT_TRUNCATION = (250, 250)
ROBIN = "robin"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class ModelParams:
    """Geometry, diffusivities and coating of the carrier (SI units).

    Parameters
    ----------
    radius, height : float
        Cylinder radius ``R`` and height ``Z`` in m.
    bulk_diffusivity : float
        ``D`` inside the carrier, m^2/s.
    coating_diffusivity : float, optional
        ``D_c`` inside the coating, m^2/s. Needed in robin mode.
    coating_thickness : float, optional
        Coating thickness ``l`` in m. Needed in robin mode.
    boundary_mode : {"robin", "dirichlet"}
        ``"dirichlet"`` models an uncoated carrier by a large Biot number
        ``dirichlet_biot`` instead of a true limit.
    permeability_override : float, optional
        Fixes ``h`` directly (m/s); ``0`` seals the carrier.
    """

    radius: float
    height: float
    bulk_diffusivity: float
    coating_diffusivity: float | None = None
    coating_thickness: float | None = None
    boundary_mode: str = ROBIN
    dirichlet_biot: float = DIRICHLET_BIOT
    permeability_override: float | None = None

    def __post_init__(self):
        for name in ("radius", "height", "bulk_diffusivity"):
            value = getattr(self, name)
            if not (value is not None and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.boundary_mode not in (ROBIN, DIRICHLET):
            raise ValueError(f"boundary_mode must be 'robin' or 'dirichlet', got {self.boundary_mode!r}")
        if self.permeability_override is not None:
            if not (math.isfinite(self.permeability_override) and self.permeability_override >= 0):
                raise ValueError(f"permeability_override must be >= 0, got {self.permeability_override!r}")
        elif self.boundary_mode == ROBIN:
            for name in ("coating_diffusivity", "coating_thickness"):
                value = getattr(self, name)
                if not (value is not None and math.isfinite(value) and value > 0):
                    raise ValueError(f"{name} must be positive in robin mode, got {value!r}")
        elif not self.dirichlet_biot > 0:
            raise ValueError(f"dirichlet_biot must be positive, got {self.dirichlet_biot!r}")

    @property
    def permeability(self):
        """``h`` in m/s."""
        if self.permeability_override is not None:
            return self.permeability_override
        if self.boundary_mode == DIRICHLET:
            return self.dirichlet_biot * self.bulk_diffusivity / self.radius
        return self.coating_diffusivity / self.coating_thickness

    @property
    def biot(self):
        return self.permeability * self.radius / self.bulk_diffusivity

    @property
    def h_over_d(self):
        return self.permeability / self.bulk_diffusivity

    @property
    def volume(self):
        return math.pi * self.radius**2 * self.height

    @property
    def c0(self):
        return 1.0 / self.volume

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class EigenSystem:
    """Spectra, expansion coefficients and squared norms for one parameter set.

    A sealed carrier (``h == 0``) keeps empty spectra: the concentration
    stays at ``c0`` and nothing is released.
    """

    params: ModelParams
    radial: RadialSpectrum | None
    axial: AxialSpectrum | None
    coefficients: np.ndarray
    radial_norms: np.ndarray
    axial_norms: np.ndarray
    truncation: tuple
    # per-mode pieces reused by the release formulas
    j0_boundary: np.ndarray = field(repr=False)
    j1_boundary: np.ndarray = field(repr=False)
    radial_projection: np.ndarray = field(repr=False)
    axial_projection: np.ndarray = field(repr=False)

    @property
    def sealed(self):
        return self.radial is None

    @property
    def alpha(self):
        return self.radial.eigenvalues

    @property
    def beta(self):
        return self.axial.eigenvalues

    @property
    def decay_rates(self):
        """``D*(alpha_n^2 + beta_m^2)`` in 1/s, shape (N, M)."""
        d = self.params.bulk_diffusivity
        return d * (self.alpha[:, None] ** 2 + self.beta[None, :] ** 2)

    def axial_mode(self, z):
        """``X_m(z)`` for every retained mode, shape ``z.shape + (M,)``."""
        z = np.asarray(z, dtype=float)[..., None]
        b = self.beta
        return b * np.cos(b * z) + self.params.h_over_d * np.sin(b * z)

    def radial_mode(self, r):
        r = np.asarray(r, dtype=float)[..., None]
        return bessel_j0(self.alpha * r)


@dataclass(frozen=True)
class ReleaseCurve:
    """Cumulative fraction released at strictly increasing times.

    ``replicates`` optionally holds the individual measured columns, shape
    (len(times), n_rep); ``fractions`` is then their mean.
    """

    times: np.ndarray
    fractions: np.ndarray
    replicates: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        fractions = np.asarray(self.fractions, dtype=float).reshape(-1)
        if times.shape != fractions.shape:
            raise ValueError("times and fractions must have the same length")
        if np.any(times < 0) or np.any(np.diff(times) <= 0):
            raise ValueError("times must be non-negative and strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fractions", fractions)
        if self.replicates is not None:
            reps = np.asarray(self.replicates, dtype=float)
            if reps.ndim == 1:
                reps = reps[:, None]
            if reps.shape[0] != len(times):
                raise ValueError("replicates must have one row per time")
            object.__setattr__(self, "replicates", reps)

    def __len__(self):
        return len(self.times)


def build_eigensystem(params, truncation=DEFAULT_TRUNCATION):
    """Solve both spectra and assemble ``A_nm`` and the squared norms."""
    n_rad, n_ax = (int(v) for v in truncation)
    if n_rad < 1 or n_ax < 1:
        raise ValueError(f"truncation counts must be positive, got {truncation!r}")
    if params.permeability == 0:
        empty = np.zeros(0)
        return EigenSystem(params, None, None, np.zeros((0, 0)), empty, empty,
                           (n_rad, n_ax), empty, empty, empty, empty)

    R, Z = params.radius, params.height
    H = params.h_over_d
    radial = solve_radial(params.biot, R, n_rad)
    axial = solve_axial(H, Z, n_ax)

    alpha = radial.eigenvalues
    beta = axial.eigenvalues
    j0, j1 = bessel_j01(radial.gammas)

    radial_projection = R / alpha * j1
    radial_norms = 0.5 * j0**2 * R**2 * (H**2 + alpha**2) / alpha**2
    bz = beta * Z
    axial_projection = H / beta + np.sin(bz) - H / beta * np.cos(bz)
    s = beta**2 + H**2
    axial_norms = 0.5 * (s * (Z + H / s) + H)

    coefficients = np.outer(radial_projection / radial_norms, axial_projection / axial_norms)
    return EigenSystem(params, radial, axial, coefficients, radial_norms, axial_norms,
                       (n_rad, n_ax), j0, j1, radial_projection, axial_projection)


def _check_unit_interval(values, upper, name):
    values = np.asarray(values, dtype=float)
    slack = 1e-12 * upper
    if np.any(values < -slack) or np.any(values > upper + slack) or not np.all(np.isfinite(values)):
        raise ValueError(f"{name} must lie in [0, {upper:g}]")
    return np.clip(values, 0.0, upper)


def concentration(sys, r, z, t):
    """Concentration ``c(r, z, t)`` in 1/m^3 (mass normalised to one).

    ``r``, ``z`` and ``t`` broadcast against each other.
    """
    p = sys.params
    r = _check_unit_interval(r, p.radius, "r")
    z = _check_unit_interval(z, p.height, "z")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    r, z, t = np.broadcast_arrays(r, z, t)
    if sys.sealed:
        out = np.full(r.shape, p.c0)
        return float(out) if out.ndim == 0 else out

    rates = sys.decay_rates
    flat_r, flat_z, flat_t = r.reshape(-1), z.reshape(-1), t.reshape(-1)
    flat = np.empty(flat_r.shape)
    for tk in np.unique(flat_t):
        sel = flat_t == tk
        weights = sys.coefficients * np.exp(-rates * tk)
        # sum over m first, then n
        inner = sys.axial_mode(flat_z[sel]) @ weights.T
        flat[sel] = np.einsum("pn,pn->p", inner, sys.radial_mode(flat_r[sel]))
        if log.isEnabledFor(logging.DEBUG):
            tail = max(np.abs(weights[-1, :]).max(), np.abs(weights[:, -1]).max())
            log.debug("t=%g: last retained coefficient magnitude %.3e", tk, tail)
    out = p.c0 * flat.reshape(r.shape)
    return float(out) if out.ndim == 0 else out


def _release_kernel(sys):
    """Per-mode weights ``w_nm`` with ``F(t) = sum w_nm (1 - exp(-rate_nm t))``."""
    p = sys.params
    R, Z, H = p.radius, p.height, p.h_over_d
    alpha, beta = sys.alpha, sys.beta
    bz = beta * Z
    ends = beta * np.cos(bz) + H * np.sin(bz) + beta  # X_m(Z) + X_m(0)
    flux = (np.outer(sys.radial_projection, ends)
            + np.outer(R * sys.j0_boundary, sys.axial_projection))
    # 2h/(Z R^2) / (D lambda) = 2H / (Z R^2 lambda)
    lam = alpha[:, None] ** 2 + beta[None, :] ** 2
    return 2.0 * H / (Z * R**2) * sys.coefficients * flux / lam


def _release_from_kernel(sys, kernel, times, chunk=32):
    times = np.asarray(times, dtype=float)
    flat = times.reshape(-1)
    rates = sys.decay_rates[::-1, ::-1]
    # reversed order sums the smallest-magnitude modes first
    kernel = kernel[::-1, ::-1]
    vals = np.empty(flat.shape)
    for start in range(0, len(flat), chunk):
        block = flat[start:start + chunk]
        growth = -np.expm1(-rates[None, :, :] * block[:, None, None])
        vals[start:start + chunk] = np.einsum("knm,nm->k", growth, kernel)
    return vals.reshape(times.shape)


def release_closed_form(sys, t):
    """Cumulative fraction released by time ``t`` (closed form).

    Returns a float for scalar ``t`` and an array otherwise. Values are not
    clamped; truncation slack can push them slightly outside [0, 1].
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    if sys.sealed:
        out = np.zeros(t_arr.shape)
    else:
        out = _release_from_kernel(sys, _release_kernel(sys), t_arr)
    return float(out) if out.ndim == 0 else out


def release_flux_integral(sys, t, quadrature_points=1024):
    """Cumulative release from Gauss-Legendre quadrature of boundary fluxes.

    The flux ``h*c`` is integrated over the end faces ``z = 0, Z`` and the
    mantle ``r = R``; the time integral of each mode is done analytically.
    Independent of the closed-form integrals of ``r*J0`` and ``X_m``.
    """
    if quadrature_points < 32:
        raise ValueError("quadrature_points must be >= 32")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    if sys.sealed:
        out = np.zeros(t_arr.shape)
        return float(out) if out.ndim == 0 else out

    p = sys.params
    R, Z, h, D = p.radius, p.height, p.permeability, p.bulk_diffusivity
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
    r = 0.5 * R * (nodes + 1.0)
    z = 0.5 * Z * (nodes + 1.0)
    # integral of 2 pi r J0(alpha_n r) over the end face, per n
    face = 0.5 * R * (weights * 2.0 * np.pi * r) @ sys.radial_mode(r)
    # integral of X_m(z) along the mantle, per m
    mantle = 0.5 * Z * weights @ sys.axial_mode(z)
    ends = sys.axial_mode(0.0) + sys.axial_mode(Z)

    flux = np.outer(face, ends) + 2.0 * np.pi * R * np.outer(sys.j0_boundary, mantle)
    lam = sys.alpha[:, None] ** 2 + sys.beta[None, :] ** 2
    kernel = h * p.c0 * sys.coefficients * flux / (D * lam)
    out = _release_from_kernel(sys, kernel, t_arr)
    return float(out) if out.ndim == 0 else out


def release_curve(sys, times):
    """Evaluate the closed form at many times sharing one eigensystem."""
    times = np.asarray(times, dtype=float).reshape(-1)
    if len(times) == 0:
        return ReleaseCurve(times, np.zeros(0))
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ValueError("times must be non-negative and strictly increasing")
    return ReleaseCurve(times, np.atleast_1d(release_closed_form(sys, times)))


def first_rate(sys):
    """Slowest decay rate ``D*(alpha_1^2 + beta_1^2)``."""
    return float(sys.decay_rates[0, 0])


def time_to_fraction(sys, fraction, rel_tol=1e-12):
    """Earliest ``t`` with ``F(t) = fraction`` (F is increasing)."""
    if sys.sealed:
        return math.inf
    lo, hi = 0.0, 1.0 / first_rate(sys)
    while release_closed_form(sys, hi) < fraction:
        hi *= 2.0
        if hi > 1e6 / first_rate(sys):
            return math.inf
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if release_closed_form(sys, mid) < fraction:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def half_release_time(sys):
    return time_to_fraction(sys, 0.5)
