"""Heralding a single phonon from a weak two-mode squeezed state.

Run: python demos/01_heralded_state.py
"""

import warnings

import numpy as np

from phonon_herald import (
    DetectorModel,
    herald,
    herald_click_probability,
    heralded_state_approx,
    thermal_distribution,
    two_mode_squeezed,
)
from phonon_herald.fock import g2, marginal

p, eta_S, pi_0 = 0.0158, 0.1, 7.5e-7
joint = two_mode_squeezed(p)
det = DetectorModel(eta_S, pi_0)

# Each mode on its own is thermal.
print(f"unconditional g2 = {g2(marginal(joint)):.6f}")
print("matches thermal:", marginal(joint).allclose(thermal_distribution(p / (1 - p))))

print(f"Stokes click probability per pulse = {herald_click_probability(joint, det):.4e}")
print(f"signal-to-dark ratio eta p / pi    = {eta_S * p / pi_0:.0f}")

for mode in ("linear", "paper_squared"):
    d = herald(joint, det, mode)
    print(f"{mode:>14}: P0={d[0]:.3e} P1={d[1]:.5f} P2={d[2]:.3e} g2={g2(d):.4f}")
d = heralded_state_approx(p, eta_S, pi_0)
print(f"{'three-level':>14}: P0={d[0]:.3e} P1={d[1]:.5f} P2={d[2]:.3e} g2={g2(d):.4f}")

# Stronger pumping buys rate at the cost of purity.
print("\n     p     P1(paper_squared)  P1(three-level)")
for pp in np.geomspace(1e-3, 0.2, 6):
    exact = herald(two_mode_squeezed(pp), det)[1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        approx = heralded_state_approx(pp, eta_S, pi_0)[1]
    print(f"{pp:8.4f}  {exact:17.5f}  {approx:15.5f}")
