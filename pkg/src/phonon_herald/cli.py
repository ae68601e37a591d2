"""
Command-line entry point: ``phonon-herald <scenario> [--config FILE] [--out PATH] [--seed N]``.

Scenarios: ``herald``, ``decay-scan``, ``power-scan``, ``montecarlo``,
``analyze``. Configuration is JSON; every section and key is optional and
falls back to the defaults below. ``--set section.key=value`` overrides a
single value (value parsed as JSON). Tables are written as CSV, reports as
JSON, and both embed the fully resolved configuration so that passing the
output file back as ``--config`` reproduces it exactly.

Errors exit non-zero with ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import DecayParams, alpha_model, evolve_analytic, fit_decay, g2_SAS_decay_model
from .errors import ApproximationWarning, PhononHeraldError
from .fock import g2, two_mode_squeezed
from .heralding import (
    DetectorModel,
    herald,
    herald_click_probability,
    heralded_state_approx,
    vacuum_weight_comparison,
)
from .montecarlo import (
    CoincidenceCounts,
    ExperimentConfig,
    alpha_estimate,
    g2_from_histogram,
    g2_SAS_estimate,
    simulate,
)
from .powermodel import PowerModelParams, alpha_zero_delay, g2_SAS_power
from .timetag import build_histogram, herald_filter, read_stream, write_stream

SCENARIOS = ("herald", "decay-scan", "power-scan", "montecarlo", "analyze")

DEFAULTS = {
    "herald": {
        "p": 0.0158,
        "eta_S": 0.1,
        "pi_0": 7.5e-7,
        "n_trunc": None,
    },
    "decay": {
        "tau_m": 3.9,
        "nbar_bath": 1.5e-3,
        "P1_0": 0.985,
        "alpha0": 0.08,
        "g2_SAS_0": 30.0,
        "irf_fwhm": None,
        "delays": [0.5 * k for k in range(41)],
        "n_trunc": 12,
        "synthetic_noise": None,
        "synthetic_seed": 0,
    },
    "power": {
        "energies": [float(e) for e in np.geomspace(20.0, 200.0, 11)],
        "energy_to_p": 7.9e-4,
        "eta_S": 0.1,
        "pi_0": 7.5e-7,
        "eta_AS": 0.019,
        "pi_AS": 3.1e-5,
    },
    "montecarlo": {
        "p": 0.0158,
        "nbar_ambient": 0.0,
        "tau_m": 3.9,
        "nbar_bath": 1.5e-3,
        "delay": 0.0,
        "eta_S": 0.1,
        "pi_0": 7.5e-7,
        "eta_read": 0.019,
        "pi_AS": 3.1e-5,
        "repetitions": 1_000_000,
        "rng_seed": 0,
        "repetition_period": 12.5,
        "hbt_source": "anti-stokes",
        "batch_size": 1 << 20,
        "stream": None,
    },
    "analyze": {
        "input": None,
        "max_offset": 10,
        "exclusion_window": [],
    },
}


class ConfigError(PhononHeraldError, ValueError):
    pass


def _check_type(section, key, value, default):
    if default is None or value is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, (int, float)):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok and isinstance(default, int) and not isinstance(default, bool) \
                and key in ("repetitions", "rng_seed", "batch_size", "n_trunc", "max_offset",
                            "synthetic_seed"):
            ok = isinstance(value, int)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, list):
        ok = isinstance(value, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"{section}.{key}: expected {type(default).__name__}, got {value!r}")


def resolve_config(user: dict | None = None, overrides: list[str] = ()) -> dict:
    """Merge ``user`` and ``overrides`` over :data:`DEFAULTS`; unknown keys are rejected."""
    cfg = copy.deepcopy(DEFAULTS)
    layers = [user or {}]
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        path, raw = item.split("=", 1)
        section, key = path.split(".", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        layers.append({section: {key: value}})
    for layer in layers:
        if not isinstance(layer, dict):
            raise ConfigError("configuration must be a JSON object")
        for section, values in layer.items():
            if section == "scenario":
                continue
            if section not in cfg:
                raise ConfigError(f"unknown config section {section!r}")
            if not isinstance(values, dict):
                raise ConfigError(f"section {section!r} must be an object")
            for key, value in values.items():
                if key not in cfg[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                _check_type(section, key, value, DEFAULTS[section][key])
                cfg[section][key] = value
    return cfg


def load_config_file(path) -> dict:
    """Read a JSON config, or recover the embedded config of a previous CSV/JSON output."""
    text = Path(path).read_text(encoding="utf-8")
    if text.startswith("# config: "):
        return json.loads(text.splitlines()[0][len("# config: "):])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict) and "config" in data and "report" in data:
        return data["config"]
    return data


def _csv(header, rows, cfg, trailer=()) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    for line in trailer:
        buf.write(line + "\n")
    return buf.getvalue()


def _report(cfg, scenario, report) -> str:
    return json.dumps({"scenario": scenario, "config": cfg, "report": report},
                      sort_keys=True, indent=2) + "\n"


def run_herald(cfg: dict) -> str:
    c = cfg["herald"]
    joint = two_mode_squeezed(c["p"], c["n_trunc"])
    det = DetectorModel(c["eta_S"], c["pi_0"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        approx = heralded_state_approx(c["p"], c["eta_S"], c["pi_0"])
    out = {"click_probability": herald_click_probability(joint, det),
           "signal_to_dark": (c["eta_S"] * c["p"] / c["pi_0"]) if c["pi_0"] else None,
           "vacuum_weight": vacuum_weight_comparison(c["p"], det, c["n_trunc"])}
    for name, dist in (("linear", herald(joint, det, "linear")),
                       ("paper_squared", herald(joint, det, "paper_squared")),
                       ("three_level", approx)):
        out[name] = {"P": [float(dist[k]) for k in range(4)], "g2": g2(dist)}
    return _report(cfg, "herald", out)


def run_decay_scan(cfg: dict):
    """Model curves versus delay: alpha, g2_SAS, and P_0..P_2 of the heralded state."""
    c, h = cfg["decay"], cfg["herald"]
    if not c["delays"]:
        raise ConfigError("decay.delays must be non-empty")
    d = DecayParams(c["tau_m"], c["nbar_bath"])
    t = np.asarray(c["delays"], dtype=float)
    alpha = alpha_model(np.clip(t, 0, None), c["P1_0"], d, c["alpha0"])
    g2sas = g2_SAS_decay_model(t, c["g2_SAS_0"], d, c["irf_fwhm"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        P0 = heralded_state_approx(h["p"], h["eta_S"], h["pi_0"]).padded(c["n_trunc"])
    rows = []
    for ti, ai, gi in zip(t, np.atleast_1d(alpha), np.atleast_1d(g2sas)):
        P = evolve_analytic(P0, d, max(ti, 0.0))
        rows.append((ti, ai, gi, P[0], P[1], P[2]))
    trailer = []
    if c["synthetic_noise"]:
        rng = np.random.default_rng(c["synthetic_seed"])
        ts = t[t >= 0]
        truth = g2_SAS_decay_model(ts, c["g2_SAS_0"], d, c["irf_fwhm"])
        err = c["synthetic_noise"] * truth
        samples = np.column_stack([ts, truth + err * rng.standard_normal(ts.size), err])
        fit = fit_decay(samples, "g2_SAS", irf_fwhm=c["irf_fwhm"])
        trailer.append("# fit: " + json.dumps(
            {"params": fit.params, "stderr": fit.stderr, "ci": fit.ci, "chi2": fit.chi2},
            sort_keys=True))
    header = ("t_ps", "alpha_model", "g2_SAS_model", "P0", "P1", "P2")
    return _csv(header, rows, cfg, trailer), rows


def run_power_scan(cfg: dict):
    c = cfg["power"]
    if not c["energies"]:
        raise ConfigError("power.energies must be non-empty")
    base = PowerModelParams(p=0.0, eta_S=c["eta_S"], pi_0=c["pi_0"], eta_AS=c["eta_AS"],
                            pi_AS=c["pi_AS"], energy_to_p=c["energy_to_p"])
    rows = []
    for e in c["energies"]:
        prm = base.at_energy(e)
        rows.append((e, prm.p, prm.p / (1.0 - prm.p), alpha_zero_delay(prm), g2_SAS_power(prm)))
    header = ("energy_pJ", "p", "n_S", "alpha0", "g2_SAS")
    return _csv(header, rows, cfg), rows


def experiment_config(cfg: dict) -> ExperimentConfig:
    from .readout import ReadoutModel

    m = cfg["montecarlo"]
    return ExperimentConfig(
        p=m["p"], nbar_ambient=m["nbar_ambient"],
        decay=DecayParams(m["tau_m"], m["nbar_bath"]), delay=m["delay"],
        stokes_det=DetectorModel(m["eta_S"], m["pi_0"]),
        readout=ReadoutModel(m["eta_read"]), pi_AS=m["pi_AS"],
        repetitions=m["repetitions"], rng_seed=m["rng_seed"],
        repetition_period=m["repetition_period"], hbt_source=m["hbt_source"],
        batch_size=m["batch_size"],
    )


def _safe(fn, *args):
    try:
        est = fn(*args)
    except PhononHeraldError as exc:
        return {"value": None, "stderr": None, "reason": str(exc)}
    return {"value": est.value, "stderr": est.stderr, "upper_bound": est.upper_bound}


def run_montecarlo(cfg: dict) -> str:
    exp = experiment_config(cfg)
    path = cfg["montecarlo"]["stream"]
    if path:
        counts, stream = simulate(exp, return_stream=True)
        write_stream(stream, path)
    else:
        counts = simulate(exp)
    rep = {"counts": counts.to_dict(),
           "alpha": _safe(alpha_estimate, counts),
           "g2_SAS": _safe(g2_SAS_estimate, counts)}
    return _report(cfg, "montecarlo", rep)


def analyze_stream(stream, max_offset: int = 10, exclusion_window=()) -> dict:
    """Coincidence report of a time-tag stream (the analysis behind ``analyze``)."""
    if len(stream) == 0:
        raise PhononHeraldError("no data: the time-tag stream is empty")
    counts = CoincidenceCounts.from_stream(stream, repetitions=None)
    rep = {"counts": counts.to_dict(), "alpha": _safe(alpha_estimate, counts)}
    excl = list(exclusion_window)
    for start, stop in (("D1", "D2"), ("S", "D1"), ("S", "D2")):
        hist = build_histogram(stream, start, stop, max_offset, excl)
        rep[f"g2_{start}_{stop}"] = _safe(g2_from_histogram, hist)
    heralded = herald_filter(stream)
    hist = build_histogram(heralded, "D1", "D2", max_offset, excl)
    rep["alpha_histogram"] = _safe(g2_from_histogram, hist)
    return rep


def run_analyze(cfg: dict) -> str:
    a = cfg["analyze"]
    if not a["input"]:
        raise ConfigError("analyze.input (or the positional INPUT) is required")
    stream = read_stream(a["input"])
    return _report(cfg, "analyze", analyze_stream(stream, a["max_offset"], a["exclusion_window"]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phonon-herald", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config, or a previous output to re-run")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--seed", type=int, help="RNG seed (montecarlo, decay-scan synthetic data)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
        if name == "montecarlo":
            sp.add_argument("--stream", help="also write the time-tag stream to this path")
        if name == "analyze":
            sp.add_argument("input", nargs="?", help="time-tag file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        user = load_config_file(args.config) if args.config else {}
        overrides = list(args.set)
        if args.seed is not None:
            overrides += [f"montecarlo.rng_seed={args.seed}", f"decay.synthetic_seed={args.seed}"]
        if getattr(args, "stream", None):
            overrides.append(f"montecarlo.stream={json.dumps(args.stream)}")
        if getattr(args, "input", None):
            overrides.append(f"analyze.input={json.dumps(args.input)}")
        cfg = resolve_config(user, overrides)
        if args.scenario == "herald":
            text = run_herald(cfg)
        elif args.scenario == "decay-scan":
            text = run_decay_scan(cfg)[0]
        elif args.scenario == "power-scan":
            text = run_power_scan(cfg)[0]
        elif args.scenario == "montecarlo":
            text = run_montecarlo(cfg)
        else:
            text = run_analyze(cfg)
    except (PhononHeraldError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2 if isinstance(exc, ConfigError) else 1
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
