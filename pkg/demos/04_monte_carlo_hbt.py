"""Monte Carlo of the full sequence, written to a time-tag file and analyzed back.

Run: python demos/04_monte_carlo_hbt.py [workdir]
"""

import sys
import tempfile
from pathlib import Path

from phonon_herald import (
    DetectorModel,
    ExperimentConfig,
    PowerModelParams,
    ReadoutModel,
    alpha_estimate,
    alpha_zero_delay,
    g2_SAS_estimate,
    g2_SAS_power,
    read_stream,
    simulate,
    write_stream,
)
from phonon_herald.cli import analyze_stream

workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())

# Desk-scale efficiencies: enough triple coincidences in a few million pulses.
cfg = ExperimentConfig(p=0.05, stokes_det=DetectorModel(0.5, 0.0), readout=ReadoutModel(0.3),
                       pi_AS=0.0, repetitions=4_000_000, rng_seed=42)
counts, stream = simulate(cfg, return_stream=True)
a = alpha_estimate(counts)
closed = PowerModelParams(cfg.p, 0.5, 0.0, 0.3, 0.0)
print(counts)
print(f"alpha  = {a.value:.4f} +- {a.stderr:.4f}   closed form {alpha_zero_delay(closed):.4f}")
g = g2_SAS_estimate(counts)
print(f"g2_SAS = {g.value:.2f} +- {g.stderr:.2f}   closed form {g2_SAS_power(closed):.2f}")

path = workdir / "heralded.tt"
write_stream(stream, path)
report = analyze_stream(read_stream(path))
print(f"\nfrom {path}:")
print(f"  alpha (counting)  = {report['alpha']['value']!r}")
print(f"  alpha (histogram) = {report['alpha_histogram']['value']:.4f}")

# Unconditional Stokes light on the same HBT pair is thermal.
thermal = ExperimentConfig(p=0.1, stokes_det=DetectorModel(0.5, 0.0), hbt_source="stokes",
                           repetitions=4_000_000, rng_seed=43)
_, tstream = simulate(thermal, return_stream=True)
g = analyze_stream(tstream)["g2_D1_D2"]
print(f"\nthermal Stokes g2(0) = {g['value']:.3f} +- {g['stderr']:.3f}")
