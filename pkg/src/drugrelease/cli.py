"""Command-line front end.

Subcommands: ``eigen``, ``release``, ``concentration``, ``fit``, ``validate``.
Exit status is 0 on success, 1 when a validation or fit gate fails and 2 on
input errors.
"""

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import dataio
from .dataio import ConfigError, write_csv
from .eigen import BracketingError
from .fit import CoatedDataset, FitError, fit_pipeline
from .model import build_eigensystem, concentration, release_closed_form, release_curve
from .oracle import simulate_release

log = logging.getLogger("drugrelease")

VALIDATION_GATE = 1e-2
EXIT_OK, EXIT_GATE, EXIT_INPUT = 0, 1, 2


def _out_dir(args, cfg):
    out = args.out or os.path.join(cfg.base_dir, cfg.output_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _write_summary(path, items):
    lines = [f"{k}: {v}" for k, v in items]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))


def half_time_from_samples(times, fractions, level=0.5):
    """First time the sampled curve reaches ``level``, interpolated linearly."""
    idx = np.flatnonzero(fractions >= level)
    if len(idx) == 0:
        return math.nan
    k = idx[0]
    if k == 0:
        return float(times[0])
    t0, t1 = times[k - 1], times[k]
    f0, f1 = fractions[k - 1], fractions[k]
    return float(t0 + (level - f0) * (t1 - t0) / (f1 - f0))


def cmd_eigen(args, cfg):
    sys_ = build_eigensystem(cfg.params, cfg.truncation)
    out = _out_dir(args, cfg)
    if sys_.sealed:
        raise ConfigError("params: permeability is zero, no eigenvalues to report")
    rad, ax = sys_.radial, sys_.axial
    rad_res = np.abs(rad.residuals()) / max(1.0, rad.biot)
    ax_res = np.abs(ax.residuals()) / (ax.eigenvalues**2 + ax.h_over_d**2)
    write_csv(os.path.join(out, "radial.csv"), ["n", "gamma_n", "alpha_n_per_m", "residual"],
              [np.arange(1, len(rad) + 1), rad.gammas, rad.eigenvalues, rad_res])
    write_csv(os.path.join(out, "axial.csv"), ["m", "beta_m_per_m", "residual"],
              [np.arange(1, len(ax) + 1), ax.eigenvalues, ax_res])
    print(f"radial: {len(rad)} roots, max scaled residual {rad_res.max():.3e}")
    print(f"axial: {len(ax)} roots, max scaled residual {ax_res.max():.3e}")
    return EXIT_OK


def cmd_release(args, cfg):
    sys_ = build_eigensystem(cfg.params, cfg.truncation)
    curve = release_curve(sys_, cfg.times)
    fractions = curve.fractions
    if args.noise:
        rng = np.random.default_rng(args.seed)
        fractions = np.clip(fractions * (1.0 + args.noise * rng.standard_normal(len(fractions))), 0.0, 1.05)
    out = _out_dir(args, cfg)
    # reporting layer: clamp truncation slack unless noise was requested
    shown = fractions if args.noise else np.clip(fractions, 0.0, 1.0)
    write_csv(os.path.join(out, "release.csv"), list(dataio.RELEASE_HEADER), [curve.times, shown])
    items = [
        ("samples", len(curve)),
        ("permeability_m_per_s", dataio.format_float(cfg.params.permeability)),
        ("biot", dataio.format_float(cfg.params.biot)),
        ("truncation", f"{cfg.truncation[0]},{cfg.truncation[1]}"),
    ]
    if len(curve):
        items += [
            ("t_half_s", dataio.format_float(half_time_from_samples(curve.times, curve.fractions))),
            ("t_end_s", dataio.format_float(curve.times[-1])),
            ("fraction_at_t_end", dataio.format_float(curve.fractions[-1])),
        ]
    _write_summary(os.path.join(out, "release_summary.txt"), items)
    return EXIT_OK


def cmd_concentration(args, cfg):
    sys_ = build_eigensystem(cfg.params, cfg.truncation)
    spec = cfg.concentration
    t = args.time if args.time is not None else spec["time_s"]
    r = np.linspace(0.0, cfg.params.radius, spec["nr"])
    z = np.linspace(0.0, cfg.params.height, spec["nz"])
    rr, zz = np.meshgrid(r, z, indexing="ij")
    c = concentration(sys_, rr, zz, t)
    out = _out_dir(args, cfg)
    write_csv(os.path.join(out, "concentration.csv"), ["r_m", "z_m", "conc_per_m3"],
              [rr.ravel(), zz.ravel(), np.ravel(c)])
    print(f"wrote {rr.size} points at t = {t:g} s")
    return EXIT_OK


def _load_curve(entry, data_files, cfg):
    path = entry.get("data")
    if path is None:
        if not data_files:
            raise ConfigError("fit: dataset without a data file and no --data left to assign")
        path = data_files.pop(0)
    elif not os.path.isabs(path):
        path = os.path.join(cfg.base_dir, path)
    return dataio.read_release_csv(path), path


def cmd_fit(args, cfg):
    spec = cfg.fit
    if spec is None:
        raise ConfigError("fit: section missing from config")
    data_files = list(args.data or [])
    uncoated = None
    labels = []
    curves = []
    if spec.uncoated is not None:
        uncoated, path = _load_curve(spec.uncoated, data_files, cfg)
        labels.append(("uncoated", path))
        curves.append(uncoated)
    coated = []
    intervals = {}
    if spec.uncoated and spec.uncoated["interval"]:
        intervals["bulk_diffusivity"] = spec.uncoated["interval"]
    for entry in spec.coated:
        curve, path = _load_curve(entry, data_files, cfg)
        coated.append(CoatedDataset(curve, entry["known"], entry["interval"]))
        labels.append((entry["label"], path))
        curves.append(curve)
    if spec.bulk_diffusivity is None and uncoated is None:
        raise ConfigError("fit.uncoated: required when fit.bulk_diffusivity_m2_per_s is not given")

    try:
        results = fit_pipeline(uncoated, coated, cfg.params, bulk_diffusivity=spec.bulk_diffusivity,
                               intervals=intervals, truncation=cfg.truncation,
                               rel_tol=spec.rel_tol, max_iter=spec.max_iter)
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        for value, loss in exc.history:
            print(f"  probe {value!r} sse {loss!r}", file=sys.stderr)
        return EXIT_GATE

    out = _out_dir(args, cfg)
    lines = []
    ok = True
    for (label, path), curve, res in zip(labels, curves, results):
        lines.append(f"[{label}]")
        lines.append(f"data: {path}")
        if res.estimate is None:
            lines.append("mode: prediction (no free parameter)")
        else:
            lines.append(f"parameter: {res.parameter}")
            lines.append(f"estimate: {res.estimate!r} {res.units}")
            lines.append(f"iterations: {res.iterations}")
            lines.append(f"converged: {str(res.converged).lower()}")
            lines.append(f"at_interval_boundary: {str(res.at_boundary).lower()}")
        lines.append(f"sse: {res.sse!r}")
        if res.replicate_sse:
            lines.append("replicate_sse: " + ", ".join(repr(v) for v in res.replicate_sse))
        if res.overshoot:
            lines.append("warning: measured fractions exceed 1")
        if res.bracket_history:
            lines.append("probes:")
            lines += [f"  {v!r} {loss!r}" for v, loss in res.bracket_history]
        lines.append("")
        ok &= res.converged and not res.at_boundary
        sys_ = build_eigensystem(res.params, cfg.truncation)
        predicted = np.atleast_1d(release_closed_form(sys_, curve.times))
        write_csv(os.path.join(out, f"fit_{label}.csv"), ["time_s", "measured", "predicted"],
                  [curve.times, curve.fractions, predicted])
    text = "\n".join(lines)
    with open(os.path.join(out, "fit_report.txt"), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(text)
    return EXIT_OK if ok else EXIT_GATE


def cmd_validate(args, cfg):
    times = cfg.times
    if len(times) == 0:
        raise ConfigError("times: validation needs at least one sample time")
    sys_ = build_eigensystem(cfg.params, cfg.truncation)
    analytic = release_curve(sys_, times).fractions
    try:
        oracle = simulate_release(cfg.params, cfg.grid, times)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    diff = np.abs(analytic - oracle.release.fractions)
    out = _out_dir(args, cfg)
    write_csv(os.path.join(out, "validation.csv"), ["time_s", "analytic", "oracle", "abs_diff"],
              [times, analytic, oracle.release.fractions, diff])
    passed = diff.max() <= VALIDATION_GATE
    _write_summary(os.path.join(out, "validation_report.txt"), [
        ("grid", f"{cfg.grid.nr}x{cfg.grid.nz}"),
        ("steps", oracle.steps),
        ("max_abs_discrepancy", dataio.format_float(diff.max())),
        ("mass_error", dataio.format_float(oracle.mass_error)),
        ("gate", dataio.format_float(VALIDATION_GATE)),
        ("result", "PASS" if passed else "FAIL"),
    ])
    return EXIT_OK if passed else EXIT_GATE


COMMANDS = {
    "eigen": cmd_eigen,
    "release": cmd_release,
    "concentration": cmd_concentration,
    "fit": cmd_fit,
    "validate": cmd_validate,
}


def _truncation(text):
    try:
        n, m = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected N,M") from None
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError("N and M must be positive")
    return (n, m)


def build_parser():
    parser = argparse.ArgumentParser(prog="drugrelease", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--truncation", type=_truncation, help="series terms N,M")
        if name == "fit":
            p.add_argument("--data", action="append", help="measured CSV, repeatable")
        if name == "release":
            p.add_argument("--noise", type=float, default=0.0,
                           help="relative Gaussian noise for synthetic data")
            p.add_argument("--seed", type=int, default=0)
        if name == "concentration":
            p.add_argument("--time", type=float, help="evaluation time in s")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = dataio.load_config(args.config)
        if args.truncation:
            cfg.truncation = args.truncation
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError, BracketingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
