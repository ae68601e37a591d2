"""
Pump-power dependence of the heralded statistics at zero write-read delay.

With a two-mode squeezed pair state of pair probability ``p`` and click
detectors on both arms, every quantity is a ratio of click probabilities
that can be summed in closed form. ``zeta(x)`` is the generating function
``E[x**n | Stokes click]`` of the heralded pair number, and ``K`` is the
Stokes click probability.

Anti-Stokes noise enters as a per-detector click probability ``pi_AS``
applied to each of the two HBT detectors, which share the phonon readout
efficiency ``eta_AS`` equally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, UndefinedStatisticError

__all__ = [
    "PowerModelParams",
    "REFERENCE_PARAMS",
    "zeta",
    "K",
    "alpha_zero_delay",
    "g2_SAS_power",
    "detection_probabilities",
    "alpha_loss",
]


@dataclass(frozen=True)
class PowerModelParams:
    p: float
    eta_S: float = 0.1
    pi_0: float = 7.5e-7
    eta_AS: float = 0.019
    pi_AS: float = 3.1e-5
    energy_to_p: float | None = None  # pair probability per pJ of write-pulse energy

    def __post_init__(self):
        for name in ("p", "eta_S", "pi_0", "eta_AS", "pi_AS"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name}={v} not in [0, 1]")
        if self.p >= 1.0:
            raise DomainError("p must be < 1")
        if self.energy_to_p is not None and not self.energy_to_p > 0:
            raise DomainError("energy_to_p must be positive")

    def at_energy(self, energy_pJ: float) -> "PowerModelParams":
        """Same detectors, with ``p`` set from a write-pulse energy (linear calibration)."""
        if self.energy_to_p is None:
            raise DomainError("energy_to_p calibration is not set")
        return replace(self, p=self.energy_to_p * energy_pJ)


REFERENCE_PARAMS = PowerModelParams(p=0.0158, eta_S=0.1, pi_0=7.5e-7, eta_AS=0.019, pi_AS=3.1e-5)


def K(params: PowerModelParams) -> float:
    """Probability of a Stokes click."""
    p, e = params.p, 1.0 - params.eta_S
    # 1 - (1-pi_0)(1-p)/(1-p e), with the cancellation done by hand
    return (p * params.eta_S + params.pi_0 * (1.0 - p)) / (1.0 - p * e)


def zeta(x, params: PowerModelParams):
    """``E[x**n | Stokes click]`` for the heralded pair number ``n``."""
    p, eta_S, pi_0 = params.p, params.eta_S, params.pi_0
    x = np.asarray(x, dtype=float)
    if np.any(p * x >= 1.0):
        raise DomainError("zeta pole crossed: p*x >= 1")
    k = K(params)
    if k <= 0:
        raise UndefinedStatisticError("Stokes detector never clicks")
    out = ((1.0 - p) / (1.0 - p * x)
           - (1.0 - pi_0) * (1.0 - p) / (1.0 - p * (1.0 - eta_S) * x)) / k
    return out if out.ndim else float(out)


def _zeta_parts(params: PowerModelParams):
    """Pieces of ``1 - zeta(x) = (1 - x) g(x) / K`` written without subtractive cancellation."""
    p, pi_0 = params.p, params.pi_0
    e = 1.0 - params.eta_S
    c = pi_0 * (1.0 - p) * p * e / (1.0 - p * e)

    def g(x):
        return (p * params.eta_S * (1.0 - p * p * e * x)
                / ((1.0 - p * x) * (1.0 - p * e) * (1.0 - p * e * x))
                + c / (1.0 - p * e * x))

    def g_diff(h, f):
        # g(h) - g(f) via partial fractions; the eta_S prefactor cancels
        d = h - f
        first = p * (p * d * (1.0 - p * e) / ((1.0 - p * h) * (1.0 - p * f))
                     - e * e * (1.0 - p) * p * d / ((1.0 - p * e * h) * (1.0 - p * e * f)))
        first /= 1.0 - p * e
        return first + c * p * e * d / ((1.0 - p * e * h) * (1.0 - p * e * f))

    return g, g_diff


def alpha_zero_delay(params: PowerModelParams) -> float:
    """Heralded HBT estimator ``alpha`` at zero delay, including detector noise.

    Evaluates ``(1 - 2(1-pi_AS) zeta_h + (1-pi_AS)**2 zeta_f) / (1 - (1-pi_AS) zeta_h)**2``
    with ``zeta_h = zeta(1 - eta_AS/2)`` and ``zeta_f = zeta(1 - eta_AS)``, rearranged
    so that it stays accurate when all click probabilities are tiny.
    """
    k = K(params)
    if k <= 0:
        raise UndefinedStatisticError("Stokes detector never clicks")
    g, g_diff = _zeta_parts(params)
    eta_AS, pi_AS = params.eta_AS, params.pi_AS
    keep = 1.0 - pi_AS
    h, f = 1.0 - eta_AS / 2.0, 1.0 - eta_AS
    u_h = (eta_AS / 2.0) * g(h) / k
    u_f = eta_AS * g(f) / k
    w = eta_AS * g_diff(h, f) / k  # 2 u_h - u_f
    single = pi_AS + keep * u_h
    if single <= 0:
        raise UndefinedStatisticError("anti-Stokes detectors never click")
    both = pi_AS ** 2 + keep * (w + pi_AS * u_f)
    return both / single ** 2


def g2_SAS_power(params: PowerModelParams) -> float:
    """Normalized Stokes/anti-Stokes cross-correlation ``N_S,AS / (N_S N_AS)``."""
    if params.eta_AS == 0.0:
        raise UndefinedStatisticError("eta_AS = 0: no anti-Stokes detection")
    p = params.p
    e_S, e_AS = 1.0 - params.eta_S, 1.0 - params.eta_AS

    def single(eta, pi, e):
        return (p * eta + pi * (1.0 - p)) / (1.0 - p * e)

    n_S = single(params.eta_S, params.pi_0, e_S)
    n_AS = single(params.eta_AS, params.pi_AS, e_AS)
    if n_S * n_AS == 0:
        raise UndefinedStatisticError("a detector never clicks")
    # N_S,AS - N_S N_AS in closed form
    cov = ((1.0 - params.pi_0) * (1.0 - params.pi_AS) * (1.0 - p) * p
           * params.eta_S * params.eta_AS
           / ((1.0 - p * e_S * e_AS) * (1.0 - p * e_S) * (1.0 - p * e_AS)))
    return 1.0 + cov / (n_S * n_AS)


def detection_probabilities(p: float, eta_S: float, eta_d1: float = 1.0, eta_d2: float = 1.0):
    """Leading-order click probabilities ``(N_S, N_d1S, N_d2S, N_d1d2S)`` per pulse.

    Only the one- and two-pair terms ``P(1,1) = (1-p)p`` and
    ``P(2,2) = (1-p)p**2`` are kept; detectors are ideal apart from their
    transmissions.
    """
    for v in (p, eta_S, eta_d1, eta_d2):
        if not 0.0 <= v <= 1.0:
            raise DomainError("probabilities must lie in [0, 1]")
    p11 = (1.0 - p) * p
    p22 = (1.0 - p) * p ** 2
    n_S = eta_S * p11
    n_d1S = 0.5 * eta_S * eta_d1 * p11
    n_d2S = 0.5 * eta_S * eta_d2 * p11
    n_d1d2S = 0.5 * (2.0 * eta_S - eta_S ** 2) * eta_d1 * eta_d2 * p22
    return n_S, n_d1S, n_d2S, n_d1d2S


def alpha_loss(p: float, eta_S: float) -> float:
    """``(4 - 2 eta_S) p``: the leading-order alpha with lossy Stokes detection."""
    return (4.0 - 2.0 * eta_S) * p
