"""
Pulse-by-pulse Monte Carlo of the write / herald / delay / read / HBT sequence.

Each laser repetition is sampled exactly:

1. ambient thermal phonons (geometric, mean ``nbar_ambient``);
2. write pulse: ``n`` Stokes-phonon pairs with ``P(n) = (1-p) p**n``;
3. Stokes click with probability ``1 - (1-pi_0)(1-eta_S)**n``;
4. free evolution over the delay with the exact birth-death propagator;
5. read pulse + losses: binomial thinning with ``eta_read``;
6. 50/50 split onto detectors D1, D2, each also clicking on noise with
   probability ``pi_AS``.

Repetitions are processed in fixed-size batches. Batch ``k`` draws from its
own generator spawned from ``SeedSequence(rng_seed)``, so results are
reproducible bit-for-bit and batches may be computed anywhere and summed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .dynamics import DecayParams
from .errors import DomainError, UndefinedStatisticError
from .heralding import DetectorModel
from .readout import ReadoutModel
from .timetag import StartStopHistogram, TimeTagStream

__all__ = [
    "ExperimentConfig",
    "CoincidenceCounts",
    "Estimate",
    "simulate",
    "simulate_batch",
    "alpha_estimate",
    "g2_SAS_estimate",
    "g2_from_histogram",
]

HBT_SOURCES = ("anti-stokes", "stokes")
POISSON_UPPER_95 = -math.log(0.05)  # one-sided 95 % bound on a mean when 0 events are seen


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one simulated acquisition.

    ``hbt_source="stokes"`` reproduces the unconditional Stokes measurement:
    the Stokes field itself is split onto D1/D2 (efficiency ``eta_S`` and
    noise ``pi_0`` per arm) and nothing is recorded on S.
    """

    p: float
    nbar_ambient: float = 0.0
    decay: DecayParams = field(default_factory=lambda: DecayParams(3.9, 0.0))
    delay: float = 0.0  # ps; negative means the read pulse precedes the write pulse
    stokes_det: DetectorModel = field(default_factory=lambda: DetectorModel(0.1, 7.5e-7))
    readout: ReadoutModel = field(default_factory=lambda: ReadoutModel(0.019))
    pi_AS: float = 3.1e-5
    repetitions: int = 1_000_000
    rng_seed: int = 0
    repetition_period: float = 12.5  # ns
    hbt_source: str = "anti-stokes"
    batch_size: int = 1 << 20

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        if self.nbar_ambient < 0:
            raise DomainError("nbar_ambient must be non-negative")
        if not 0.0 <= self.pi_AS <= 1.0:
            raise DomainError("pi_AS must lie in [0, 1]")
        if self.repetitions < 1 or self.batch_size < 1:
            raise DomainError("repetitions and batch_size must be >= 1")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise DomainError("rng_seed must be a 64-bit unsigned integer")
        if self.hbt_source not in HBT_SOURCES:
            raise DomainError(f"hbt_source must be one of {HBT_SOURCES}")

    @property
    def n_batches(self) -> int:
        return -(-self.repetitions // self.batch_size)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "decay" in d and isinstance(d["decay"], dict):
            d["decay"] = DecayParams(**d["decay"])
        if "stokes_det" in d and isinstance(d["stokes_det"], dict):
            d["stokes_det"] = DetectorModel(**d["stokes_det"])
        if "readout" in d and isinstance(d["readout"], dict):
            d["readout"] = ReadoutModel(**d["readout"])
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown ExperimentConfig keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class CoincidenceCounts:
    """Click tallies over a run; ``N_d1d2S`` counts triple coincidences."""

    N_S: int = 0
    N_d1: int = 0
    N_d2: int = 0
    N_d1S: int = 0
    N_d2S: int = 0
    N_d1d2: int = 0
    N_d1d2S: int = 0
    repetitions: int | None = 0

    def __add__(self, other: "CoincidenceCounts") -> "CoincidenceCounts":
        vals = {f.name: getattr(self, f.name) + getattr(other, f.name)
                for f in fields(self) if f.name != "repetitions"}
        reps = None if None in (self.repetitions, other.repetitions) else \
            self.repetitions + other.repetitions
        return CoincidenceCounts(**vals, repetitions=reps)

    def check(self) -> None:
        """Raise ``ValueError`` if the tallies are not mutually consistent."""
        ok = (self.N_d1d2S <= min(self.N_d1S, self.N_d2S)
              and max(self.N_d1S, self.N_d2S) <= self.N_S
              and self.N_d1d2 <= min(self.N_d1, self.N_d2)
              and self.N_d1S <= self.N_d1 and self.N_d2S <= self.N_d2)
        if self.repetitions is not None:
            ok = ok and max(self.N_S, self.N_d1, self.N_d2) <= self.repetitions
        if not ok:
            raise ValueError(f"inconsistent coincidence counts: {self}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CoincidenceCounts":
        return cls(**json.loads(text))

    @classmethod
    def from_stream(cls, records, repetitions: int | None = None) -> "CoincidenceCounts":
        """Tally coincidences per pulse; repeated events on one channel in a pulse count once."""
        stream = TimeTagStream.from_records(records)
        s = np.unique(stream.indices("S"))
        d1 = np.unique(stream.indices("D1"))
        d2 = np.unique(stream.indices("D2"))
        d1d2 = np.intersect1d(d1, d2, assume_unique=True)
        return cls(
            N_S=s.size, N_d1=d1.size, N_d2=d2.size,
            N_d1S=np.intersect1d(d1, s, assume_unique=True).size,
            N_d2S=np.intersect1d(d2, s, assume_unique=True).size,
            N_d1d2=d1d2.size,
            N_d1d2S=np.intersect1d(d1d2, s, assume_unique=True).size,
            repetitions=repetitions,
        )


@dataclass(frozen=True)
class Estimate:
    """A statistic with its one-sigma error; unpacks as ``value, stderr``."""

    value: float
    stderr: float
    upper_bound: float | None = None

    def __iter__(self):
        yield self.value
        yield self.stderr


def _geometric_counts(rng, ratio: float, n: int) -> np.ndarray:
    if ratio <= 0.0:
        return np.zeros(n, dtype=np.int64)
    return rng.geometric(1.0 - ratio, n) - 1


def _propagate(rng, n: np.ndarray, t: float, d: DecayParams) -> np.ndarray:
    """Sample the phonon number after time ``t`` given ``n`` at time zero.

    Each initial quantum survives with ``a = e^{-t/tau}``; a survivor is
    kept with ``1 - q`` and then drags along a geometric number of thermal
    quanta, and the bath adds an independent geometric count. Here
    ``b = nbar (1 - a)`` and ``q = b / (1 + b)``; this reproduces the
    generating-function propagator exactly.
    """
    if t == 0:
        return n
    a = math.exp(-t / d.tau_m)
    b = d.nbar_bath * -math.expm1(-t / d.tau_m)
    survivors = rng.binomial(n, a)
    if b == 0.0:
        return survivors
    q = b / (1.0 + b)
    kept = rng.binomial(survivors, 1.0 - q)
    return kept + rng.negative_binomial(kept + 1, 1.0 / (1.0 + b))


def _batch_generators(config: ExperimentConfig):
    seeds = np.random.SeedSequence(config.rng_seed).spawn(config.n_batches)
    return [np.random.Generator(np.random.PCG64(s)) for s in seeds]


def simulate_batch(config: ExperimentConfig, batch: int, rng=None, with_stream: bool = False):
    """Simulate batch number ``batch`` of a run; returns counts (and the stream)."""
    if not 0 <= batch < config.n_batches:
        raise DomainError(f"batch {batch} is outside 0..{config.n_batches - 1}")
    if rng is None:
        rng = _batch_generators(config)[batch]
    start = batch * config.batch_size
    n = min(config.batch_size, config.repetitions - start)

    n_th = _geometric_counts(rng, config.nbar_ambient / (1.0 + config.nbar_ambient), n)
    n_pair = _geometric_counts(rng, config.p, n)
    det = config.stokes_det

    if config.hbt_source == "stokes":
        detected = rng.binomial(n_pair, det.efficiency)
        m1 = rng.binomial(detected, 0.5)
        click_1 = (m1 > 0) | (rng.random(n) < det.noise_prob)
        click_2 = (detected - m1 > 0) | (rng.random(n) < det.noise_prob)
        click_s = np.zeros(n, dtype=bool)
    else:
        click_s = (rng.binomial(n_pair, det.efficiency) > 0) | (rng.random(n) < det.noise_prob)
        if config.delay < 0:
            phonons = n_th
        else:
            phonons = _propagate(rng, n_th + n_pair, config.delay, config.decay)
        m = rng.binomial(phonons, config.readout.eta_read)
        m1 = rng.binomial(m, 0.5)
        click_1 = (m1 > 0) | (rng.random(n) < config.pi_AS)
        click_2 = (m - m1 > 0) | (rng.random(n) < config.pi_AS)

    both = click_1 & click_2
    counts = CoincidenceCounts(
        N_S=int(click_s.sum()),
        N_d1=int(click_1.sum()),
        N_d2=int(click_2.sum()),
        N_d1S=int((click_1 & click_s).sum()),
        N_d2S=int((click_2 & click_s).sum()),
        N_d1d2=int(both.sum()),
        N_d1d2S=int((both & click_s).sum()),
        repetitions=n,
    )
    if not with_stream:
        return counts
    stream = TimeTagStream.from_channels(
        S=np.flatnonzero(click_s) + start,
        D1=np.flatnonzero(click_1) + start,
        D2=np.flatnonzero(click_2) + start,
    )
    return counts, stream


def simulate(config: ExperimentConfig, return_stream: bool = False):
    """Run ``config.repetitions`` pulses; returns :class:`CoincidenceCounts`.

    With ``return_stream=True`` returns ``(counts, TimeTagStream)``.
    """
    total = CoincidenceCounts()
    idx, ch = [], []
    for k, rng in enumerate(_batch_generators(config)):
        out = simulate_batch(config, k, rng, with_stream=return_stream)
        if return_stream:
            out, stream = out
            idx.append(stream.pulse_index)
            ch.append(stream.channel)
        total = total + out
    if not return_stream:
        return total
    return total, TimeTagStream(np.concatenate(idx), np.concatenate(ch))


def alpha_estimate(counts: CoincidenceCounts) -> Estimate:
    """``N_d1d2S N_S / (N_d1S N_d2S)`` with Poisson error propagation.

    With no triple coincidence the value is 0 and ``upper_bound`` carries a
    one-sided 95 % limit.
    """
    if counts.N_d1S <= 0 or counts.N_d2S <= 0:
        raise UndefinedStatisticError("no heralded anti-Stokes events on one detector")
    scale = counts.N_S / (counts.N_d1S * counts.N_d2S)
    n3 = counts.N_d1d2S
    if n3 == 0:
        return Estimate(0.0, scale, POISSON_UPPER_95 * scale)
    value = n3 * scale
    rel = math.sqrt(1.0 / n3 + 1.0 / counts.N_S + 1.0 / counts.N_d1S + 1.0 / counts.N_d2S)
    return Estimate(value, value * rel)


def g2_SAS_estimate(counts: CoincidenceCounts) -> Estimate:
    """Stokes / anti-Stokes cross-correlation, treating "D1 or D2" as the anti-Stokes click.

    Compare with :func:`~phonon_herald.powermodel.g2_SAS_power` using
    ``pi_AS -> 1 - (1 - pi_AS)**2`` for the combined detector.
    """
    if not counts.repetitions:
        raise UndefinedStatisticError("repetition count is required")
    n_as = counts.N_d1 + counts.N_d2 - counts.N_d1d2
    n_sas = counts.N_d1S + counts.N_d2S - counts.N_d1d2S
    if counts.N_S == 0 or n_as == 0 or n_sas == 0:
        raise UndefinedStatisticError("no coincidences")
    value = n_sas * counts.repetitions / (counts.N_S * n_as)
    return Estimate(value, value * math.sqrt(1.0 / n_sas + 1.0 / counts.N_S + 1.0 / n_as))


def g2_from_histogram(hist: StartStopHistogram, side_offsets=None) -> Estimate:
    """Zero-delay peak over the mean of the accidental (non-zero offset) peaks.

    Offsets in ``hist.exclusion_window`` are never used as side peaks.
    """
    if side_offsets is None:
        side = hist.side_offsets()
    else:
        side = [k for k in side_offsets if k != 0 and k not in hist.exclusion_window]
    if len(side) < 2:
        raise UndefinedStatisticError("need at least two side peaks outside the exclusion window")
    side_total = sum(hist.bins.get(k, 0) for k in side)
    if side_total == 0:
        raise UndefinedStatisticError("side peaks are empty")
    mean_side = side_total / len(side)
    zero = hist.bins.get(0, 0)
    value = zero / mean_side
    if zero == 0:
        return Estimate(0.0, 1.0 / mean_side, POISSON_UPPER_95 / mean_side)
    return Estimate(value, value * math.sqrt(1.0 / zero + 1.0 / side_total))
