"""
Anti-Stokes readout: beam-splitter mapping, loss and additive noise.

The read pulse swaps phonons into anti-Stokes photons with probability
``sin²θ``; collection and detection losses compose with it, so the whole
chain is one binomial thinning with survival ``eta_read``. Thinning scales
the k-th factorial moment by ``s**k`` and hence leaves ``g2`` unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .errors import ApproximationWarning, DomainError, UndefinedStatisticError
from .fock import NumberDistribution, g2

__all__ = [
    "ReadoutModel",
    "thin",
    "g2_after_thinning",
    "noisy_g2",
    "alpha_offset",
]


@dataclass(frozen=True)
class ReadoutModel:
    """Phonon-to-click survival ``eta_read`` and the noise-mixing parameters.

    ``noise_fraction`` is the beam-splitter weight of a fictitious thermal
    noise mode with mean occupancy ``noise_nbar``.
    """

    eta_read: float
    noise_fraction: float = 0.0
    noise_nbar: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta_read <= 1.0:
            raise DomainError("eta_read must lie in [0, 1]")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise DomainError("noise_fraction must lie in [0, 1]")
        if self.noise_nbar < 0:
            raise DomainError("noise_nbar must be non-negative")


def thin(dist: NumberDistribution, survival: float) -> NumberDistribution:
    """Binomial loss: each quantum survives independently with probability ``survival``."""
    if not 0.0 <= survival <= 1.0:
        raise DomainError("survival must lie in [0, 1]")
    N = dist.n_trunc
    n = np.arange(N + 1)
    # kernel[m, n] = C(n, m) s^m (1-s)^(n-m)
    kernel = binom.pmf(n[:, None], n[None, :], survival)
    return NumberDistribution.from_weights(kernel @ dist.probs)


def g2_after_thinning(dist: NumberDistribution, survival: float, rtol: float = 1e-9) -> float:
    """``g2`` of the thinned state, checked against the unthinned value."""
    if survival <= 0:
        raise DomainError("survival must be positive")
    thinned = g2(thin(dist, survival))
    direct = g2(dist)
    if not math.isclose(thinned, direct, rel_tol=rtol, abs_tol=rtol):
        raise ArithmeticError(
            f"thinning changed g2: {thinned!r} vs {direct!r}; check the truncation"
        )
    return thinned


def noisy_g2(g2_b: float, n: float, eps: float, n_T: float, g2_T: float = 2.0,
             form: str = "exact") -> float:
    """``g2`` of the mode ``sqrt(1-eps) b + sqrt(eps) b_T`` with an independent noise mode.

    ``form="first_order"`` keeps only the leading term in the noise-to-signal
    ratio ``eps n_T / ((1-eps) n)``.
    """
    if n <= 0:
        raise DomainError("signal occupancy n must be positive")
    if not 0.0 <= eps <= 1.0:
        raise DomainError("eps must lie in [0, 1]")
    if form == "exact":
        denom = ((1.0 - eps) * n + eps * n_T) ** 2
        if denom == 0:
            raise UndefinedStatisticError("mixed mode has zero occupancy")
        num = ((1.0 - eps) ** 2 * n ** 2 * g2_b + eps ** 2 * n_T ** 2 * g2_T
               + 2.0 * eps * (1.0 - eps) * n * n_T)
        return num / denom
    if form == "first_order":
        if eps == 1.0:
            raise UndefinedStatisticError("no signal left at eps = 1")
        ratio = eps * n_T / ((1.0 - eps) * n)
        if ratio > 0.2:
            warnings.warn(f"noise-to-signal ratio {ratio:.3g} is not small",
                          ApproximationWarning, stacklevel=2)
        return g2_b + 2.0 * ratio
    raise ValueError("form must be 'exact' or 'first_order'")


def alpha_offset(g2_SAS: float) -> float:
    """Noise offset ``2/g2_SAS`` on the heralded correlation."""
    if g2_SAS <= 1.0:
        raise DomainError("g2_SAS <= 1: no heralded signal above accidentals")
    return 2.0 / g2_SAS
