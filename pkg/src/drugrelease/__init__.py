"""Drug release from polymer-coated cylindrical carriers.

Analytical eigenfunction-series model with Robin (thin coating) boundaries,
a finite-volume cross-check, and least-squares parameter estimation.
"""

from .eigen import AxialSpectrum, RadialSpectrum, solve_axial, solve_radial
from .fit import CoatedDataset, FitError, FitProblem, FitResult, fit_pipeline, fit_scalar
from .model import (
    EigenSystem,
    ModelParams,
    ReleaseCurve,
    build_eigensystem,
    concentration,
    half_release_time,
    release_closed_form,
    release_curve,
    release_flux_integral,
    time_to_fraction,
)
from .oracle import GridSpec, OracleResult, simulate_release, stable_time_step
from .specfun import bessel_j0, bessel_j1

__version__ = "0.1.0"
