"""
Open-system decay of the heralded phonon number distribution.

The vibrational mode relaxes towards a bath of mean occupancy ``nbar`` at
energy decay rate ``gamma``. Projected on the number basis the master
equation becomes the birth-death rate equations (:func:`rate_rhs`), solved
here two independent ways:

* :func:`evolve_numeric` integrates the truncated rate equations with
  fixed-step RK4;
* :func:`evolve_analytic` evaluates the closed-form generating function

      Q(z, t) = Q0(1 - (1-z) e^{-γt} / D) / D,   D = 1 + nbar (1-z)(1 - e^{-γt})

  as a truncated power series in ``z`` and reads off ``P_n(t)``.

All times are in picoseconds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from .errors import DomainError, FitError, IntegrationError, TruncationError
from .fock import NumberDistribution
from .series import Series, compose_polynomial

__all__ = [
    "DecayParams",
    "DEFAULT_IRF_FWHM_FS",
    "generator_matrix",
    "rate_rhs",
    "evolve_numeric",
    "evolve_analytic",
    "pn_closed_form",
    "g2_conditional",
    "alpha_model",
    "g2_SAS_decay_model",
    "DecayFit",
    "fit_decay",
]

DEFAULT_IRF_FWHM_FS = 200.0
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class DecayParams:
    """Phonon lifetime ``tau_m`` (ps) and bath occupancy ``nbar_bath``."""

    tau_m: float
    nbar_bath: float = 0.0

    def __post_init__(self):
        if not self.tau_m > 0:
            raise DomainError("tau_m must be positive")
        if self.nbar_bath < 0:
            raise DomainError("nbar_bath must be non-negative")

    @classmethod
    def from_rate(cls, gamma_m: float, nbar_bath: float = 0.0) -> "DecayParams":
        if not gamma_m > 0:
            raise DomainError("gamma_m must be positive")
        return cls(1.0 / gamma_m, nbar_bath)

    @property
    def gamma_m(self) -> float:
        return 1.0 / self.tau_m


def generator_matrix(n_trunc: int, d: DecayParams) -> np.ndarray:
    """Rate matrix ``L`` with ``dP/dt = L @ P`` on ``0..n_trunc``.

    The upward transition out of ``n_trunc`` is dropped, so columns sum to zero.
    """
    g, nb = d.gamma_m, d.nbar_bath
    k = np.arange(n_trunc + 1, dtype=float)
    down = g * (nb + 1.0) * k  # k -> k-1
    up = g * nb * (k + 1.0)  # k -> k+1
    up[-1] = 0.0
    L = np.diag(-(down + up))
    L += np.diag(down[1:], 1)
    L += np.diag(up[:-1], -1)
    return L


def rate_rhs(P: NumberDistribution, d: DecayParams) -> np.ndarray:
    """``dP_k/dt`` of the birth-death rate equations."""
    return generator_matrix(P.n_trunc, d) @ P.probs


def _clean(p: np.ndarray) -> np.ndarray:
    # round-off can leave -1e-17 entries
    return np.where((p < 0) & (p > -1e-12), 0.0, p)


def evolve_numeric(P0: NumberDistribution, d: DecayParams, t: float, dt: float | None = None,
                   full_output: bool = False):
    """Fixed-step RK4 integration of the rate equations up to time ``t``.

    The default step is ``min(0.01 / (gamma (1 + nbar)), t / 100)``. The
    result is not renormalized; with ``full_output=True`` the normalization
    drift ``sum(P) - 1`` is returned alongside the distribution.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if dt is not None and not dt > 0:
        raise DomainError("dt must be positive")
    p = P0.probs.copy()
    if t > 0:
        if dt is None:
            dt = min(0.01 / (d.gamma_m * (1.0 + d.nbar_bath)), t / 100.0)
        n_steps = int(math.ceil(t / dt - 1e-9))
        h = t / n_steps
        L = generator_matrix(P0.n_trunc, d)
        for _ in range(n_steps):
            k1 = L @ p
            k2 = L @ (p + 0.5 * h * k1)
            k3 = L @ (p + 0.5 * h * k2)
            k4 = L @ (p + h * k3)
            p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if p.min() < -1e-9:
                raise IntegrationError(
                    f"P_k = {p.min():.2e} < 0 during integration; reduce dt (was {h:.3g} ps)"
                )
    drift = math.fsum(p) - 1.0
    dist = NumberDistribution(_clean(p))
    return (dist, drift) if full_output else dist


def evolve_analytic(P0: NumberDistribution, d: DecayParams, t: float,
                    n_trunc: int | None = None, tail_tol: float = 1e-10) -> NumberDistribution:
    """``P_n(t)`` from the generating function, to order ``n_trunc`` (default: that of ``P0``).

    Raises :class:`TruncationError` when more than ``tail_tol`` of the
    probability lies beyond ``n_trunc``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    order = P0.n_trunc if n_trunc is None else n_trunc
    if order < P0.n_trunc:
        raise TruncationError("output order must be at least the degree of P0")
    a = math.exp(-d.gamma_m * t)
    b = d.nbar_bath * -math.expm1(-d.gamma_m * t)
    z = Series.variable(order)
    one_minus_z = 1.0 - z
    D = 1.0 + b * one_minus_z
    inner = 1.0 - a * one_minus_z / D
    Q = compose_polynomial(P0.probs, inner) / D
    coeffs = _clean(Q.coeffs)
    lost = 1.0 - math.fsum(coeffs)
    if lost > tail_tol:
        raise TruncationError(
            f"series truncation overflow: {lost:.2e} of the probability lies above n={order}"
        )
    return NumberDistribution.from_weights(coeffs)


def pn_closed_form(P0: NumberDistribution, d: DecayParams, t):
    """``(P_0(t), P_1(t), P_2(t))`` at zero bath occupancy for an initial state on ``n <= 2``.

    ``d.nbar_bath`` is ignored. ``t`` may be an array.
    """
    if P0.n_trunc > 2 and np.any(P0.probs[3:] > 0):
        raise DomainError("closed form only covers initial states supported on n <= 2")
    p0, p1, p2 = P0[0], P0[1], P0[2]
    e = np.exp(-d.gamma_m * np.asarray(t, dtype=float))
    q = 1.0 - e
    return (
        p0 + q * p1 + q ** 2 * p2,
        e * p1 + 2.0 * e * q * p2,
        e ** 2 * p2,
    )


def g2_conditional(t, P1_0: float, d: DecayParams):
    """Heralded phonon intensity correlation ``(2/P1_0) [1 - 1/(1 + nbar(e^{γt} - 1))**2]``."""
    if not 0.0 < P1_0 <= 1.0:
        raise DomainError("P1_0 must lie in (0, 1]")
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        growth = 1.0 + d.nbar_bath * np.expm1(d.gamma_m * t)
    out = (2.0 / P1_0) * (1.0 - 1.0 / growth ** 2)
    return out if out.ndim else float(out)


def alpha_model(t, P1_0: float, d: DecayParams, alpha0: float):
    """Heralded correlation plus a constant background-noise offset ``alpha0``."""
    if alpha0 < 0:
        raise DomainError("alpha0 must be non-negative")
    return g2_conditional(t, P1_0, d) + alpha0


def _exp_step_conv(t: np.ndarray, tau: float, sigma: float) -> np.ndarray:
    """``H(t) e^{-t/tau}`` convolved with a unit-area Gaussian of width ``sigma``."""
    x = t / sigma - sigma / tau
    out = np.empty_like(t)
    neg = x < 0
    # exponentially modified Gaussian; the erfcx branch avoids exp overflow
    out[neg] = 0.5 * special.erfcx(-x[neg] / math.sqrt(2.0)) * np.exp(-0.5 * (t[neg] / sigma) ** 2)
    xp = x[~neg]
    out[~neg] = np.exp(0.5 * (sigma / tau) ** 2 - t[~neg] / tau) * special.ndtr(xp)
    return out


def g2_SAS_decay_model(t, g2_0: float, d: DecayParams, irf_fwhm: float | None = None):
    """Stokes/anti-Stokes cross-correlation versus write-read delay.

    ``1 + (g2_0 - 1) e^{-t/tau}`` for ``t >= 0`` and ``1`` (accidentals) before
    the write pulse. When ``irf_fwhm`` (femtoseconds) is given, the decaying
    part is convolved with a Gaussian instrument response of that FWHM.
    """
    t = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t)
    if irf_fwhm:
        sigma = irf_fwhm * 1e-3 / FWHM_PER_SIGMA
        shape = _exp_step_conv(tt, d.tau_m, sigma)
    else:
        shape = np.where(tt >= 0, np.exp(-np.clip(tt, 0, None) / d.tau_m), 0.0)
    out = 1.0 + (g2_0 - 1.0) * shape
    return out.reshape(t.shape) if t.ndim else float(out[0])


@dataclass
class DecayFit:
    """Result of :func:`fit_decay`. ``ci`` holds 95 % confidence intervals."""

    model: str
    params: dict
    stderr: dict
    ci: dict
    chi2: float
    dof: int
    nfev: int
    fixed: dict = field(default_factory=dict)

    @property
    def tau(self) -> float:
        return self.params["tau"]


def _unpack_samples(samples):
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FitError("samples must be a sequence of (t, value, stderr) triples")
    t, y, s = arr.T
    if np.any(s <= 0) or not np.all(np.isfinite(arr)):
        raise FitError("stderr values must be positive and all entries finite")
    return t, y, s


def fit_decay(samples, model: str = "g2_SAS", *, irf_fwhm: float | None = None,
              P1_0: float = 0.985, nbar: float = 1.5e-3, fit_nbar: bool = False,
              max_nfev: int = 2000) -> DecayFit:
    """Weighted least-squares fit of a decay curve.

    Parameters
    ----------
    samples : sequence of (t, value, stderr)
        Delay in ps, measured value, one-sigma error.
    model : {"g2_SAS", "alpha"}
        ``"g2_SAS"`` fits ``tau`` and ``g2_0`` of :func:`g2_SAS_decay_model`;
        ``"alpha"`` fits ``tau`` and ``alpha0`` of :func:`alpha_model`
        (and the bath occupancy when ``fit_nbar`` is set).

    The starting point comes from a fixed log-spaced scan over ``tau`` with
    the linear parameter solved exactly, so the fit is deterministic.
    """
    t, y, s = _unpack_samples(samples)
    n_distinct = np.unique(t).size
    if model == "g2_SAS":
        names = ["tau", "g2_0"]

        def shape(tau, _extra):
            return g2_SAS_decay_model(t, 2.0, DecayParams(tau), irf_fwhm) - 1.0

        def predict(x):
            return g2_SAS_decay_model(t, x[1], DecayParams(x[0]), irf_fwhm)

        offset = 1.0
        fixed = {"irf_fwhm": irf_fwhm}
    elif model == "alpha":
        names = ["tau", "alpha0"] + (["nbar"] if fit_nbar else [])

        def shape(tau, extra):
            return g2_conditional(t, P1_0, DecayParams(tau, extra))

        def predict(x):
            nb = x[2] if fit_nbar else nbar
            return alpha_model(t, P1_0, DecayParams(x[0], nb), 0.0) + x[1]

        offset = 0.0
        fixed = {"P1_0": P1_0} if fit_nbar else {"P1_0": P1_0, "nbar": nbar}
    else:
        raise ValueError("model must be 'g2_SAS' or 'alpha'")

    n_par = len(names)
    if t.size < 4 or n_distinct < n_par + 1:
        raise FitError(
            f"degenerate sample set: {t.size} samples at {n_distinct} distinct delays"
        )
    span = float(t.max() - t.min())
    if span <= 0:
        raise FitError("degenerate sample set: all delays identical")

    w = 1.0 / s ** 2
    best = None
    for tau in np.geomspace(span / 200.0, span * 20.0, 121):
        f = shape(tau, nbar)
        if model == "g2_SAS":
            denom = np.sum(w * f * f)
            if denom <= 0:
                continue
            lin = offset + np.sum(w * f * (y - offset)) / denom
            resid = y - (offset + (lin - offset) * f)
        else:
            lin = max(np.sum(w * (y - f)) / np.sum(w), 0.0)
            resid = y - f - lin
        chi2 = float(np.sum(w * resid ** 2))
        if best is None or chi2 < best[0]:
            best = (chi2, tau, lin)
    x0 = [best[1], best[2]] + ([nbar] if fit_nbar else [])
    lower = [1e-9 * span, -np.inf if model == "g2_SAS" else 0.0] + ([0.0] if fit_nbar else [])
    upper = [np.inf] * n_par
    x0 = np.clip(x0, np.array(lower) + 1e-12 * span, upper)
    if fit_nbar and x0[2] <= 0:
        x0[2] = 1e-4

    res = optimize.least_squares(
        lambda x: (predict(x) - y) / s, x0, bounds=(lower, upper),
        method="trf", x_scale="jac", max_nfev=max_nfev,
    )
    if res.status <= 0:
        raise FitError(f"fit did not converge: {res.message}")
    dof = t.size - n_par
    chi2 = float(np.sum(res.fun ** 2))
    J = res.jac
    try:
        cov = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular Jacobian; parameters are not identifiable") from exc
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    q = stats.t.ppf(0.975, max(dof, 1))
    params = dict(zip(names, map(float, res.x)))
    if span < params["tau"]:
        warnings.warn("samples span less than one fitted decay time", stacklevel=2)
    return DecayFit(
        model=model,
        params=params,
        stderr=dict(zip(names, map(float, err))),
        ci={k: (v - q * e, v + q * e) for k, v, e in zip(names, res.x, err)},
        chi2=chi2,
        dof=dof,
        nfev=int(res.nfev),
        fixed=fixed,
    )
