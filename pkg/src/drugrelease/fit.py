"""Single-parameter least-squares fits and the two-stage estimation pipeline.

Stage A fits the bulk diffusivity ``D`` to an uncoated release curve with
the uncoated carrier modelled in dirichlet mode. Stage B holds ``D`` and
fits either the coating diffusivity or the coating thickness to each coated
curve. Every fit is a golden-section search on ``log(parameter)`` over a
user-supplied interval; each probe rebuilds the eigensystem.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DEFAULT_TRUNCATION, DIRICHLET, ROBIN, build_eigensystem, release_closed_form

__all__ = [
    "FitProblem",
    "FitResult",
    "FitError",
    "FREE_PARAMETERS",
    "DEFAULT_INTERVALS",
    "CoatedDataset",
    "PREVIOUS",
    "sse",
    "fit_scalar",
    "fit_pipeline",
]

FREE_PARAMETERS = {
    "D": "bulk_diffusivity",
    "D_c": "coating_diffusivity",
    "l": "coating_thickness",
    "bulk_diffusivity": "bulk_diffusivity",
    "coating_diffusivity": "coating_diffusivity",
    "coating_thickness": "coating_thickness",
}
UNITS = {"bulk_diffusivity": "m^2/s", "coating_diffusivity": "m^2/s", "coating_thickness": "m"}
# three decades around typical literature values
DEFAULT_INTERVALS = {
    "bulk_diffusivity": (1e-11, 1e-8),
    "coating_diffusivity": (1e-12, 1e-9),
    "coating_thickness": (1e-5, 1e-2),
}
PREVIOUS = "previous"
MAX_FRACTION = 1.05
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitError(RuntimeError):
    """Fit could not be carried out; ``history`` holds the probes made so far."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


@dataclass
class FitProblem:
    measured: object
    params: object
    free_parameter: str
    search_interval: tuple
    truncation: tuple = DEFAULT_TRUNCATION

    def __post_init__(self):
        try:
            self.free_parameter = FREE_PARAMETERS[self.free_parameter]
        except KeyError:
            raise ValueError(f"unknown free parameter {self.free_parameter!r}") from None
        lo, hi = self.search_interval
        if not (0 < lo < hi):
            raise ValueError(f"search interval must satisfy 0 < lo < hi, got {self.search_interval!r}")
        frac = self.measured.fractions
        if np.any(frac < 0) or np.any(frac > MAX_FRACTION):
            bad = frac[(frac < 0) | (frac > MAX_FRACTION)][0]
            raise ValueError(f"measured fraction {bad!r} outside [0, {MAX_FRACTION}]")

    @property
    def overshoot(self):
        return bool(np.any(self.measured.fractions > 1.0))

    def model(self, value):
        return self.params.with_(**{self.free_parameter: value})

    def predict(self, value, times=None):
        sys = build_eigensystem(self.model(value), self.truncation)
        times = self.measured.times if times is None else times
        return np.atleast_1d(release_closed_form(sys, times))

    def loss(self, value):
        return sse(self.predict(value), self.measured.fractions)


@dataclass
class FitResult:
    parameter: str
    estimate: float | None
    sse: float
    iterations: int
    converged: bool
    bracket_history: list = field(default_factory=list)
    units: str = ""
    at_boundary: bool = False
    replicate_sse: list = field(default_factory=list)
    overshoot: bool = False
    params: object = None


def sse(predicted, measured):
    d = np.asarray(predicted, dtype=float) - np.asarray(measured, dtype=float)
    return float(d @ d)


def _replicate_sse(problem, params):
    reps = problem.measured.replicates
    if reps is None or reps.shape[1] < 2:
        return []
    sys = build_eigensystem(params, problem.truncation)
    pred = np.atleast_1d(release_closed_form(sys, problem.measured.times))
    return [sse(pred, reps[:, j]) for j in range(reps.shape[1])]


def fit_scalar(problem, rel_tol=1e-6, max_iter=200):
    """Minimise the squared-residual loss over the free parameter.

    Golden-section search in ``log`` space. The bracket is accepted when the
    first interior probe beats both endpoints; if an endpoint is the best
    probe the estimate is that endpoint and ``at_boundary`` is set.

    Raises
    ------
    FitError
        If both endpoints beat both interior probes (loss not unimodal
        on the interval).
    """
    history = []

    def f(u, value=None):
        value = math.exp(u) if value is None else value
        loss = problem.loss(value)
        history.append((value, loss))
        return loss

    end_lo, end_hi = problem.search_interval
    a, b = math.log(end_lo), math.log(end_hi)
    fa, fb = f(a, end_lo), f(b, end_hi)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    if max(fa, fb) < min(f1, f2):
        raise FitError(
            f"loss for {problem.free_parameter} is lower at both interval ends than inside; "
            "widen or move the search interval",
            history,
        )

    lo, hi = a, b
    iterations = 0
    converged = False
    while iterations < max_iter:
        # the best probe never leaves [lo, hi], so exp(lo) bounds the estimate from below
        if math.exp(hi) - math.exp(lo) <= rel_tol * math.exp(lo):
            converged = True
            break
        iterations += 1
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)

    estimate, best = min(history, key=lambda p: p[1])
    at_boundary = estimate in (end_lo, end_hi)
    if not at_boundary:
        u = 0.5 * (lo + hi) if converged else math.log(estimate)
        centre = math.exp(u)
        loss_centre = problem.loss(centre)
        history.append((centre, loss_centre))
        if loss_centre <= best:
            estimate, best = centre, loss_centre
    fitted = problem.model(estimate)
    return FitResult(
        parameter=problem.free_parameter,
        estimate=estimate,
        sse=best,
        iterations=iterations,
        converged=converged,
        bracket_history=history,
        units=UNITS[problem.free_parameter],
        at_boundary=at_boundary,
        replicate_sse=_replicate_sse(problem, fitted),
        overshoot=problem.overshoot,
        params=fitted,
    )


@dataclass
class CoatedDataset:
    """A coated release curve and whichever coating quantities are known.

    ``known`` maps ``"coating_thickness"`` / ``"coating_diffusivity"`` (or
    ``"l"`` / ``"D_c"``) to a value, or to ``PREVIOUS`` to reuse the most
    recent estimate of that quantity from an earlier stage.
    """

    curve: object
    known: dict
    interval: tuple | None = None


def fit_pipeline(uncoated, coated, base_params, bulk_diffusivity=None, intervals=None,
                 truncation=DEFAULT_TRUNCATION, rel_tol=1e-6, max_iter=200):
    """Run stage A (``D`` from the uncoated curve) then stage B per coated curve.

    Parameters
    ----------
    uncoated : ReleaseCurve or None
        Required unless ``bulk_diffusivity`` is given.
    coated : list of CoatedDataset
    base_params : ModelParams
        Supplies the measured radius and height.
    bulk_diffusivity : float, optional
        Known ``D``; stage A is skipped.
    intervals : dict, optional
        Search interval per free parameter name; defaults to
        ``DEFAULT_INTERVALS``.

    Returns
    -------
    list of FitResult
        Stage A first (if run), then one per coated dataset. A dataset with
        both coating quantities known yields an evaluation-only result with
        ``estimate=None``.
    """
    intervals = {**DEFAULT_INTERVALS, **(intervals or {})}
    results = []
    estimates = {}

    if bulk_diffusivity is None:
        if uncoated is None:
            raise ValueError("an uncoated curve is required when the bulk diffusivity is unknown")
        stage_a = FitProblem(
            uncoated,
            base_params.with_(boundary_mode=DIRICHLET, permeability_override=None),
            "bulk_diffusivity",
            intervals["bulk_diffusivity"],
            truncation,
        )
        res = fit_scalar(stage_a, rel_tol, max_iter)
        results.append(res)
        bulk_diffusivity = res.estimate
    estimates["bulk_diffusivity"] = bulk_diffusivity

    for ds in coated:
        known = {}
        for key, value in ds.known.items():
            name = FREE_PARAMETERS[key]
            if isinstance(value, str) and value == PREVIOUS:
                if name not in estimates:
                    raise ValueError(f"no earlier estimate of {name} to reuse")
                value = estimates[name]
            known[name] = float(value)
        missing = [n for n in ("coating_diffusivity", "coating_thickness") if n not in known]
        params = base_params.with_(
            bulk_diffusivity=bulk_diffusivity,
            boundary_mode=ROBIN,
            permeability_override=None,
            coating_diffusivity=known.get("coating_diffusivity", 1.0),
            coating_thickness=known.get("coating_thickness", 1.0),
        )
        if len(missing) == 2:
            raise ValueError("each coated dataset needs the coating thickness or the coating diffusivity")
        if not missing:
            sys = build_eigensystem(params, truncation)
            pred = np.atleast_1d(release_closed_form(sys, ds.curve.times))
            loss = sse(pred, ds.curve.fractions)
            results.append(FitResult("none", None, loss, 0, True, [], "", params=params,
                                     overshoot=bool(np.any(ds.curve.fractions > 1.0))))
            continue
        name = missing[0]
        problem = FitProblem(ds.curve, params, name, ds.interval or intervals[name], truncation)
        res = fit_scalar(problem, rel_tol, max_iter)
        results.append(res)
        estimates[name] = res.estimate
    return results
