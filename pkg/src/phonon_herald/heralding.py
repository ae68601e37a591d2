"""
Stokes click detection and the heralded (conditional) phonon state.

A click detector with efficiency ``eta`` and per-pulse noise probability
``pi`` fires on an ``n``-photon Fock state with probability

    w_n = 1 - (1 - pi) * (1 - eta)**n .

Conditioning the pair state on a click can be done two ways:

``"linear"``
    standard POVM update of a diagonal state, ``P_n ∝ P(n,n) w_n``.
``"paper_squared"``
    the sandwich ``Π ρ Π†`` written with the click operator's matrix
    elements, which squares them: ``P_n ∝ P(n,n) w_n**2``. The vacuum
    weight ``P(0,0) pi**2`` falls out of the same expression.

The two agree for an ideal detector. For noisy detectors the vacuum weight
differs markedly (see :func:`vacuum_weight_comparison`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ApproximationWarning, DomainError, ImpossibleConditionError
from .fock import JointPairState, NumberDistribution

__all__ = [
    "DetectorModel",
    "click_weight",
    "click_weights",
    "herald",
    "heralded_state_approx",
    "herald_click_probability",
    "vacuum_weight_comparison",
]

WEIGHT_MODES = ("linear", "paper_squared")


@dataclass(frozen=True)
class DetectorModel:
    """Non-number-resolving detector: efficiency and per-pulse noise click probability."""

    efficiency: float
    noise_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError(f"efficiency {self.efficiency} not in [0, 1]")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise DomainError(f"noise_prob {self.noise_prob} not in [0, 1]")


def click_weight(det: DetectorModel, n: int) -> float:
    """Click probability given ``n`` photons."""
    if n < 0:
        raise DomainError("photon number must be >= 0")
    return 1.0 - (1.0 - det.noise_prob) * (1.0 - det.efficiency) ** n


def click_weights(det: DetectorModel, n_trunc: int) -> np.ndarray:
    n = np.arange(n_trunc + 1)
    # -expm1(n log(1-eta)) keeps w_1 = eta accurate for tiny eta
    if det.efficiency < 1.0:
        miss = np.exp(n * math.log1p(-det.efficiency))
    else:
        miss = (n == 0).astype(float)
    return 1.0 - (1.0 - det.noise_prob) * miss


def herald_click_probability(joint: JointPairState, det: DetectorModel) -> float:
    """Probability that the Stokes detector clicks on the pair state."""
    return math.fsum(joint.pair_probs * click_weights(det, joint.n_trunc))


def herald(
    joint: JointPairState, det: DetectorModel, weight_mode: str = "paper_squared"
) -> NumberDistribution:
    """Phonon number distribution conditioned on a Stokes click."""
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
    w = click_weights(det, joint.n_trunc)
    if weight_mode == "paper_squared":
        w = w * w
    weights = joint.pair_probs * w
    if math.fsum(weights) <= 0.0:
        raise ImpossibleConditionError("the herald detector can never click on this state")
    return NumberDistribution.from_weights(weights)


def heralded_state_approx(p: float, eta: float, pi: float) -> NumberDistribution:
    """Three-level approximation ``{pi/(2 eta p), 1, p}`` of the heralded state, normalized.

    Emits :class:`ApproximationWarning` when ``eta*p < 10*pi`` (the dark-count
    term is then not a small correction).
    """
    if not 0.0 <= p < 1.0:
        raise DomainError("p must lie in [0, 1)")
    if pi == 0.0:
        vac = 0.0
    elif eta * p == 0.0:
        raise ImpossibleConditionError("no Stokes signal: eta*p == 0 with dark counts present")
    else:
        vac = pi / (2.0 * eta * p)
    if eta * p < 10.0 * pi:
        warnings.warn(
            f"eta*p = {eta * p:.3g} is not >> pi = {pi:.3g}; vacuum weight is unreliable",
            ApproximationWarning,
            stacklevel=2,
        )
    return NumberDistribution.from_weights([vac, 1.0, p])


def vacuum_weight_comparison(p: float, det: DetectorModel, n_trunc: int | None = None) -> dict:
    """Heralded vacuum probability from the exact conditionings and the three-level formula.

    The three-level formula keeps the ``2 p eta pi`` cross term but not the
    ``p eta**2`` term of ``p w_1**2``, so it overstates the vacuum weight of
    the squared conditioning by roughly ``eta p / (2 pi)``.
    """
    from .fock import two_mode_squeezed

    joint = two_mode_squeezed(p, n_trunc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        approx = heralded_state_approx(p, det.efficiency, det.noise_prob)
    return {
        "paper_squared": float(herald(joint, det, "paper_squared")[0]),
        "linear": float(herald(joint, det, "linear")[0]),
        "three_level": float(approx[0]),
    }
