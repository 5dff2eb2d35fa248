"""Series solution against an explicit finite-volume simulation.

Both should agree to within a percent on an 80 x 60 grid. The uncoated
case is the hardest for the grid because the wall concentration drops
to zero instantly.
"""

import time

import numpy as np

from drugrelease import GridSpec, build_eigensystem, release_closed_form, simulate_release
from drugrelease.scenarios import SCENARIOS, reference_params, release_window

if __name__ == "__main__":
    for name in SCENARIOS:
        params = reference_params(name)
        sys = build_eigensystem(params)
        times = release_window(sys, 0.01, 0.99, 20)
        start = time.perf_counter()
        res = simulate_release(params, GridSpec(80, 60), times)
        elapsed = time.perf_counter() - start
        diff = np.abs(res.release.fractions - release_closed_form(sys, times))
        print(f"{name:>14s}: max |dF| = {diff.max():.2e} at F = {release_closed_form(sys, times[diff.argmax()]):.3f}, "
              f"{res.steps} steps in {elapsed:.1f} s, mass error {res.mass_error:.1e}")

    # grid refinement on the uncoated case
    params = reference_params("uncoated")
    sys = build_eigensystem(params)
    times = release_window(sys, 0.01, 0.99, 20)
    print("\nuncoated grid refinement:")
    for nr, nz in ((20, 15), (40, 30), (80, 60)):
        res = simulate_release(params, GridSpec(nr, nz), times)
        err = np.abs(res.release.fractions - release_closed_form(sys, times)).max()
        print(f"  {nr:3d} x {nz:3d}: {err:.2e}")
