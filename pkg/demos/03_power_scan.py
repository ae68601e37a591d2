"""Heralded correlation and Stokes/anti-Stokes correlation versus write-pulse energy.

Run: python demos/03_power_scan.py
"""

import numpy as np

from phonon_herald import PowerModelParams, alpha_loss, alpha_zero_delay, g2_SAS_power

base = PowerModelParams(p=0.0, eta_S=0.1, pi_0=7.5e-7, eta_AS=0.019, pi_AS=3.1e-5,
                        energy_to_p=7.9e-4)
energies = np.geomspace(20, 200, 11)

print("energy/pJ     p      alpha(0)   (4-2eta)p   g2_SAS")
rows = []
for e in energies:
    prm = base.at_energy(e)
    rows.append((e, alpha_zero_delay(prm), g2_SAS_power(prm)))
    print(f"{e:9.1f}  {prm.p:.4f}  {rows[-1][1]:9.4f}  {alpha_loss(prm.p, prm.eta_S):9.4f}  "
          f"{rows[-1][2]:7.2f}")

e, a, g = map(np.array, zip(*rows))
slope = np.polyfit(np.log(e), np.log(g - 1), 1)[0]
print(f"\nlog-log slope of g2_SAS - 1: {slope:.3f}")

# At low power detector noise lifts alpha above the pair-only value.
for p in (1e-3, 1e-4, 1e-5):
    noisy = alpha_zero_delay(PowerModelParams(p, 0.1, 7.5e-7, 0.019, 3.1e-5))
    quiet = alpha_zero_delay(PowerModelParams(p, 0.1, 0.0, 0.019, 0.0))
    print(f"p={p:.0e}: alpha with noise {noisy:.3e}, without {quiet:.3e}")
