"""Cumulative release for the uncoated carrier and the two coatings.

Thicker coatings lower the permeability h = D_c / l and stretch the
release. Half-release times come from bisection on the closed form.
"""

import numpy as np

from drugrelease import build_eigensystem, concentration, half_release_time, release_closed_form
from drugrelease.scenarios import SCENARIOS, reference_params

if __name__ == "__main__":
    hours = np.array([0.25, 0.5, 1, 2, 4, 8, 16])
    systems = {name: build_eigensystem(reference_params(name)) for name in SCENARIOS}

    print("t [h]  " + "".join(f"{name:>14s}" for name in SCENARIOS))
    for t in hours:
        row = [release_closed_form(systems[name], t * 3600) for name in SCENARIOS]
        print(f"{t:5.2f}  " + "".join(f"{v:14.4f}" for v in row))

    print()
    for name in SCENARIOS:
        print(f"{name:>14s}: t_half = {half_release_time(systems[name]) / 3600:.3f} h")

    # concentration along the mid-plane after one hour, relative to c0
    sys = systems["coated_20min"]
    r = np.linspace(0, sys.params.radius, 6)
    c = concentration(sys, r, 0.5 * sys.params.height, 3600.0) / sys.params.c0
    print("\nc/c0 on the mid-plane at 1 h (125 um coating):")
    print("  r/R  " + "  ".join(f"{v:6.2f}" for v in r / sys.params.radius))
    print("  c/c0 " + "  ".join(f"{v:6.3f}" for v in c))
