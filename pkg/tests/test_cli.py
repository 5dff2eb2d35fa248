import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from drugrelease.cli import half_time_from_samples, main
from drugrelease.dataio import ConfigError, parse_config, read_release_csv
from drugrelease.scenarios import (
    BULK_DIFFUSIVITY,
    COATING_DIFFUSIVITY,
    HEIGHT,
    RADIUS,
    THICKNESS_20MIN,
    THICKNESS_30MIN,
)

PARAMS = {
    "radius_m": RADIUS,
    "height_m": HEIGHT,
    "bulk_diffusivity_m2_per_s": BULK_DIFFUSIVITY,
    "coating_diffusivity_m2_per_s": COATING_DIFFUSIVITY,
    "coating_thickness_m": THICKNESS_20MIN,
}
UNCOATED = {**PARAMS, "boundary_mode": "dirichlet"}
TIMES = {"start_s": 60.0, "end_s": 3e5, "count": 40, "spacing": "log"}


def write_config(tmp_path, name="run.json", **sections):
    cfg = {"params": PARAMS, "times": TIMES, **sections}
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(*argv):
    return main([str(a) for a in argv])


def test_eigen_dump(tmp_path):
    cfg = write_config(tmp_path)
    assert run("eigen", "--config", cfg, "--out", tmp_path) == 0
    radial = read_rows(tmp_path / "radial.csv")
    axial = read_rows(tmp_path / "axial.csv")
    assert radial[0] == ["n", "gamma_n", "alpha_n_per_m", "residual"]
    assert axial[0] == ["m", "beta_m_per_m", "residual"]
    assert len(radial) == 251 and len(axial) == 251
    assert max(float(r[3]) for r in radial[1:]) <= 1e-10
    assert max(float(r[2]) for r in axial[1:]) <= 1e-10


def test_eigen_single_row(tmp_path):
    cfg = write_config(tmp_path)
    assert run("eigen", "--config", cfg, "--out", tmp_path, "--truncation", "1,1") == 0
    assert len(read_rows(tmp_path / "radial.csv")) == 2
    assert len(read_rows(tmp_path / "axial.csv")) == 2


def test_negative_radius_is_input_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"params": {**PARAMS, "radius_m": -1.0}}))
    assert run("eigen", "--config", path, "--out", tmp_path) == 2
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1 and "radius_m" in err


def test_unit_suffix_required(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"params": {**PARAMS, "radius": 1.0}}))
    assert run("eigen", "--config", path) == 2
    assert "params.radius" in capsys.readouterr().err


def test_json_syntax_error_names_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "params": {\n    "radius_m": ,\n  }\n}\n')
    assert run("eigen", "--config", path) == 2
    assert "line 3" in capsys.readouterr().err


def test_release_uncoated(tmp_path):
    cfg = write_config(tmp_path, params=UNCOATED, times={**TIMES, "end_s": 1e5})
    assert run("release", "--config", cfg, "--out", tmp_path) == 0
    rows = read_rows(tmp_path / "release.csv")
    assert rows[0] == ["time_s", "fraction_released"]
    f = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(np.diff(f) >= 0) and f[-1] >= 0.99
    summary = (tmp_path / "release_summary.txt").read_text()
    assert "t_half_s:" in summary and "fraction_at_t_end:" in summary


def test_release_ordering_of_scenarios(tmp_path):
    halves = []
    for name, params in [("u", UNCOATED), ("c20", PARAMS), ("c30", {**PARAMS, "coating_thickness_m": THICKNESS_30MIN})]:
        out = tmp_path / name
        cfg = write_config(tmp_path, f"{name}.json", params=params)
        assert run("release", "--config", cfg, "--out", out) == 0
        rows = read_rows(out / "release.csv")[1:]
        t = np.array([float(r[0]) for r in rows])
        f = np.array([float(r[1]) for r in rows])
        halves.append(half_time_from_samples(t, f))
    assert halves[0] < halves[1] < halves[2]


def test_release_empty_times(tmp_path):
    cfg = write_config(tmp_path, times={"values_s": []})
    assert run("release", "--config", cfg, "--out", tmp_path) == 0
    assert (tmp_path / "release.csv").read_text() == "time_s,fraction_released\n"


def test_release_is_byte_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    run("release", "--config", cfg, "--out", tmp_path / "a")
    run("release", "--config", cfg, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "release.csv").read_bytes() == (tmp_path / "b" / "release.csv").read_bytes()
    assert b"\r\n" not in (tmp_path / "a" / "release.csv").read_bytes()


def test_concentration_dump(tmp_path):
    cfg = write_config(tmp_path, concentration={"time_s": 3600.0, "nr": 5, "nz": 4})
    assert run("concentration", "--config", cfg, "--out", tmp_path) == 0
    rows = read_rows(tmp_path / "concentration.csv")
    assert rows[0] == ["r_m", "z_m", "conc_per_m3"] and len(rows) == 21


def _fit_config(tmp_path, data, free="coating_thickness"):
    known = ({"coating_diffusivity_m2_per_s": COATING_DIFFUSIVITY, "interval_m": [1e-5, 1e-3]}
             if free == "coating_thickness" else
             {"coating_thickness_m": THICKNESS_20MIN, "interval_m2_per_s": [1e-12, 1e-9]})
    return write_config(tmp_path, "fit.json", fit={
        "bulk_diffusivity_m2_per_s": BULK_DIFFUSIVITY,
        "coated": [{"data": str(data), "label": "c20", **known}],
        "rel_tol": 1e-6,
    })


def test_round_trip_release_to_fit(tmp_path):
    cfg = write_config(tmp_path)
    assert run("release", "--config", cfg, "--out", tmp_path) == 0
    fit_cfg = _fit_config(tmp_path, tmp_path / "release.csv", free="coating_diffusivity")
    assert run("fit", "--config", fit_cfg, "--out", tmp_path) == 0
    report = (tmp_path / "fit_report.txt").read_text()
    line = next(l for l in report.splitlines() if l.startswith("estimate:"))
    assert float(line.split()[1]) == pytest.approx(COATING_DIFFUSIVITY, rel=1e-3)
    rows = read_rows(tmp_path / "fit_c20.csv")
    assert rows[0] == ["time_s", "measured", "predicted"]


def test_fit_stage_a_from_data_flag(tmp_path):
    cfg = write_config(tmp_path, params=UNCOATED)
    run("release", "--config", cfg, "--out", tmp_path)
    fit_cfg = write_config(tmp_path, "fit.json", fit={"uncoated": {"interval_m2_per_s": [1e-11, 1e-9]}})
    assert run("fit", "--config", fit_cfg, "--data", tmp_path / "release.csv", "--out", tmp_path) == 0
    report = (tmp_path / "fit_report.txt").read_text()
    assert "parameter: bulk_diffusivity" in report and "probes:" in report and "converged: true" in report


def test_fit_reports_replicate_sse(tmp_path):
    cfg = write_config(tmp_path)
    run("release", "--config", cfg, "--out", tmp_path)
    rows = read_rows(tmp_path / "release.csv")[1:]
    lines = ["time_s,fraction_released,rep2,rep3"]
    for t, f in rows:
        f = float(f)
        lines.append(f"{t},{f},{min(f * 1.01, 1.0)},{f * 0.99}")
    data = tmp_path / "reps.csv"
    data.write_text("\n".join(lines) + "\n")
    assert run("fit", "--config", _fit_config(tmp_path, data), "--out", tmp_path) == 0
    assert "replicate_sse:" in (tmp_path / "fit_report.txt").read_text()


@pytest.mark.parametrize("body,message", [
    ("time_s,fraction_released\n1,0.1\n2,1.2\n", "1.2"),
    ("time_s,fraction_released\n1,0.1\n2,abc\n", "row 3"),
    ("time_s,fraction_released\n1,0.1\n2\n", "row 3"),
    ("time_s,fraction_released\n1,0.1\n3,0.2\n2,0.3\n", "strictly increasing"),
    ("t,f\n1,0.1\n", "header"),
])
def test_fit_rejects_bad_data(tmp_path, capsys, body, message):
    data = tmp_path / "bad.csv"
    data.write_text(body)
    assert run("fit", "--config", _fit_config(tmp_path, data), "--out", tmp_path) == 2
    assert message in capsys.readouterr().err


def test_read_release_csv_averages_replicates(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("time_s,fraction_released,rep2\n1,0.1,0.3\n2,0.4,0.6\n")
    curve = read_release_csv(data)
    np.testing.assert_allclose(curve.fractions, [0.2, 0.5])
    assert curve.replicates.shape == (2, 2)


def test_validate_passes_with_default_grid(tmp_path, capsys):
    cfg = write_config(tmp_path, times={"start_s": 100.0, "end_s": 2e5, "count": 20, "spacing": "log"})
    assert run("validate", "--config", cfg, "--out", tmp_path) == 0
    report = (tmp_path / "validation_report.txt").read_text()
    assert "result: PASS" in report


def test_validate_coarse_grid(tmp_path):
    cfg = write_config(tmp_path, times={"start_s": 100.0, "end_s": 2e5, "count": 20, "spacing": "log"},
                       grid={"nr": 8, "nz": 8})
    run("validate", "--config", cfg, "--out", tmp_path)
    fields = dict(line.split(": ") for line in (tmp_path / "validation_report.txt").read_text().splitlines())
    assert float(fields["max_abs_discrepancy"]) > 1e-3
    assert float(fields["mass_error"]) <= 1e-3


def test_validate_sealed(tmp_path):
    cfg = write_config(tmp_path, params={**PARAMS, "permeability_override_m_per_s": 0.0},
                       times={"start_s": 100.0, "end_s": 1e4, "count": 5, "spacing": "log"}, grid={"nr": 10, "nz": 10})
    assert run("validate", "--config", cfg, "--out", tmp_path) == 0
    fields = dict(line.split(": ") for line in (tmp_path / "validation_report.txt").read_text().splitlines())
    assert float(fields["max_abs_discrepancy"]) == 0.0


def test_validate_unstable_grid(tmp_path, capsys):
    cfg = write_config(tmp_path, times={"values_s": [10.0]}, grid={"nr": 40, "nz": 40, "dt_s": 1e3})
    assert run("validate", "--config", cfg, "--out", tmp_path) == 2
    assert "stability" in capsys.readouterr().err


def test_parse_config_rejects_wrong_interval_unit():
    with pytest.raises(ConfigError, match="wrong unit"):
        parse_config({"params": PARAMS, "fit": {"coated": [
            {"coating_diffusivity_m2_per_s": 1e-11, "interval_m2_per_s": [1e-12, 1e-9]}]}})


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "drugrelease.cli", "eigen", "--config", cfg,
                           "--out", str(tmp_path), "--truncation", "3,3"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
