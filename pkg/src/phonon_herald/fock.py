"""
Diagonal Fock-space states of one and two bosonic modes.

Every state handled by this package is diagonal in the number basis, so a
single-mode state is just a probability vector ``P_n`` over ``n = 0..N``
(:class:`NumberDistribution`) and the Stokes/vibration pair produced by the
write pulse is the vector of pair probabilities ``P(n, n)``
(:class:`JointPairState`).

Truncation
----------
Constructors of infinite-support states (thermal, two-mode squeezed) pick the
smallest ``N`` whose discarded tail mass is below ``1e-12`` unless an explicit
``n_trunc`` is given. In either case the last retained probability must not
exceed ``1e-10``; otherwise :class:`~phonon_herald.errors.TruncationError` is
raised and a larger ``n_trunc`` should be requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError, UndefinedStatisticError

__all__ = [
    "PLANCK",
    "BOLTZMANN",
    "NumberDistribution",
    "JointPairState",
    "bose_occupancy",
    "thermal_distribution",
    "fock_distribution",
    "poisson_distribution",
    "two_mode_squeezed",
    "marginal",
    "g2",
    "factorial_moment",
    "default_truncation",
]

# CODATA 2018 (exact in the SI), quoted to 9 significant digits.
PLANCK = 6.62607015e-34  # J s
BOLTZMANN = 1.380649e-23  # J / K

NORM_TOL = 1e-12
TAIL_MASS = 1e-12
GUARD = 1e-10


@dataclass(frozen=True, eq=False)
class NumberDistribution:
    """Probability vector ``probs[n]`` over Fock states ``n = 0..N``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-d vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite")
        if p.min() < 0:
            raise ValueError(f"negative probability {p.min():.3e}")
        total = math.fsum(p)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, weights) -> "NumberDistribution":
        """Normalize non-negative weights into a distribution."""
        w = np.asarray(weights, dtype=float)
        if w.min() < 0:
            raise ValueError("weights must be non-negative")
        total = math.fsum(w)
        if total <= 0:
            raise ValueError("weights sum to zero")
        return cls(w / total)

    @property
    def n_trunc(self) -> int:
        return self.probs.size - 1

    def __len__(self):
        return self.probs.size

    def __getitem__(self, n):
        return self.probs[n] if n < self.probs.size else 0.0

    def __repr__(self):
        return f"NumberDistribution(n_trunc={self.n_trunc}, mean={self.mean():.6g})"

    def mean(self) -> float:
        return factorial_moment(self, 1)

    def padded(self, n_trunc: int) -> "NumberDistribution":
        """Return the same state on a larger truncation ``0..n_trunc``."""
        if n_trunc < self.n_trunc:
            if np.any(self.probs[n_trunc + 1:] > 0):
                raise TruncationError("cannot shrink: discarded entries are non-zero")
            return NumberDistribution(self.probs[: n_trunc + 1])
        out = np.zeros(n_trunc + 1)
        out[: self.probs.size] = self.probs
        return NumberDistribution(out)

    def allclose(self, other: "NumberDistribution", atol: float = 1e-12) -> bool:
        n = max(len(self), len(other))
        a = self.padded(n - 1).probs
        b = other.padded(n - 1).probs
        return bool(np.max(np.abs(a - b)) <= atol)


@dataclass(frozen=True, eq=False)
class JointPairState:
    """Diagonal two-mode squeezed state, stored as the pair weights ``P(n, n)``."""

    pair_probs: np.ndarray
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise DomainError(f"squeeze parameter p={self.p} not in [0, 1)")
        pp = NumberDistribution(self.pair_probs).probs
        object.__setattr__(self, "pair_probs", pp)

    @property
    def n_trunc(self) -> int:
        return self.pair_probs.size - 1

    @property
    def mean_pairs(self) -> float:
        return self.p / (1.0 - self.p)


def _check_guard(probs: np.ndarray, what: str):
    if probs.size > 1 and probs[-1] > GUARD:
        raise TruncationError(
            f"{what}: P_N = {probs[-1]:.2e} at N = {probs.size - 1} exceeds {GUARD:g}; "
            "pass a larger n_trunc"
        )


def default_truncation(ratio: float, tail: float = TAIL_MASS) -> int:
    """Smallest ``N`` such that a geometric law ``(1-r) r**n`` has tail mass below ``tail``.

    The mass beyond ``N`` is ``r**(N+1)``. ``N`` is raised further if needed
    so that ``P_N`` itself passes the truncation guard.
    """
    if ratio <= 0.0:
        return 0
    if ratio >= 1.0:
        raise DomainError("geometric ratio must be < 1")
    n = max(int(math.ceil(math.log(tail) / math.log(ratio))) - 1, 0)
    while (1.0 - ratio) * ratio ** n > GUARD:
        n += 1
    return n


def _geometric(ratio: float, n_trunc: int | None, what: str) -> np.ndarray:
    if n_trunc is None:
        n_trunc = default_truncation(ratio)
    n = np.arange(n_trunc + 1)
    # ratio**0 is 1 even for ratio == 0
    w = (1.0 - ratio) * ratio ** n
    w /= math.fsum(w)
    _check_guard(w, what)
    return w


def bose_occupancy(frequency: float, temperature: float) -> float:
    """Bose-Einstein mean occupancy of a mode.

    Parameters
    ----------
    frequency : float
        Ordinary frequency in THz.
    temperature : float
        Temperature in kelvin.
    """
    if frequency <= 0 or temperature <= 0:
        raise DomainError("frequency and temperature must be positive")
    x = PLANCK * frequency * 1e12 / (BOLTZMANN * temperature)
    return 1.0 / math.expm1(x)


def thermal_distribution(nbar: float, n_trunc: int | None = None) -> NumberDistribution:
    """Geometric number distribution with mean ``nbar`` (renormalized over the truncation)."""
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    return NumberDistribution(_geometric(nbar / (1.0 + nbar), n_trunc, "thermal_distribution"))


def fock_distribution(n: int, n_trunc: int | None = None) -> NumberDistribution:
    if n_trunc is None:
        n_trunc = n
    if not 0 <= n <= n_trunc:
        raise DomainError(f"Fock index {n} outside 0..{n_trunc}")
    probs = np.zeros(n_trunc + 1)
    probs[n] = 1.0
    return NumberDistribution(probs)


def poisson_distribution(mean: float, n_trunc: int | None = None) -> NumberDistribution:
    """Poissonian (coherent-state) number distribution."""
    from scipy.stats import poisson

    if mean < 0:
        raise DomainError("mean must be non-negative")
    if n_trunc is None:
        n_trunc = int(poisson.isf(TAIL_MASS, mean)) + 1 if mean > 0 else 0
    w = poisson.pmf(np.arange(n_trunc + 1), mean)
    w /= math.fsum(w)
    _check_guard(w, "poisson_distribution")
    return NumberDistribution(w)


def two_mode_squeezed(p: float, n_trunc: int | None = None) -> JointPairState:
    """Pair distribution ``P(n, n) = (1-p) p**n`` left by the write pulse."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p={p} not in [0, 1)")
    return JointPairState(_geometric(p, n_trunc, "two_mode_squeezed"), p)


def marginal(joint: JointPairState) -> NumberDistribution:
    """Reduced number distribution of either mode of the pair state (thermal)."""
    return NumberDistribution(joint.pair_probs)


def factorial_moment(dist: NumberDistribution, k: int) -> float:
    """``sum_n n (n-1) ... (n-k+1) P_n``."""
    if k < 1:
        raise DomainError("k must be >= 1")
    n = np.arange(len(dist), dtype=float)
    falling = np.ones_like(n)
    for j in range(k):
        falling *= n - j
    return math.fsum(falling * dist.probs)


def g2(dist: NumberDistribution) -> float:
    """Zero-delay intensity correlation ``<n(n-1)>/<n>**2``."""
    m1 = factorial_moment(dist, 1)
    if m1 <= 0:
        raise UndefinedStatisticError("g2 undefined for a state with zero mean occupancy")
    return factorial_moment(dist, 2) / m1 ** 2
