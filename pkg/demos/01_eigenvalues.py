"""Radial and axial eigenvalues of the coated cylinder.

The radial roots sit one per oscillation of J0 and slide from the J0
derivative zeros (sealed wall) to the J0 zeros (perfect sink) as the
Biot number grows. The axial roots show the same drift, plus one extra
root in the interval that holds the pole at beta = h/D.
"""

import numpy as np

from drugrelease import solve_axial, solve_radial
from drugrelease.scenarios import HEIGHT, RADIUS, reference_params

if __name__ == "__main__":
    print("first five radial roots gamma_n = alpha_n R")
    for biot in (0.01, 1.0, 8.59, 100.0, 1e6):
        g = solve_radial(biot, RADIUS, 5).gammas
        print(f"  B = {biot:>9g}: " + "  ".join(f"{v:8.5f}" for v in g))

    p = reference_params("coated_20min")
    print(f"\n125 um coating: h = {p.permeability:.4e} m/s, B = {p.biot:.3f}, h/D = {p.h_over_d:.1f} 1/m")
    ax = solve_axial(p.h_over_d, HEIGHT, 8)
    # beta Z / pi shows where each root falls relative to the sin zeros
    print("axial roots beta_m Z / pi: " + "  ".join(f"{v:.4f}" for v in ax.eigenvalues * HEIGHT / np.pi))
    print(f"pole at h/D: beta Z / pi = {p.h_over_d * HEIGHT / np.pi:.4f}")
    print(f"max |residual| {np.abs(ax.residuals()).max():.2e}")
