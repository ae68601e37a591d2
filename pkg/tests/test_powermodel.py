import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_herald.errors import DomainError, UndefinedStatisticError
from phonon_herald.fock import two_mode_squeezed
from phonon_herald.heralding import DetectorModel, herald
from phonon_herald.powermodel import (
    REFERENCE_PARAMS,
    K,
    PowerModelParams,
    alpha_loss,
    alpha_zero_delay,
    detection_probabilities,
    g2_SAS_power,
    zeta,
)


def test_params_validation_and_energy():
    with pytest.raises(DomainError):
        PowerModelParams(p=1.0)
    with pytest.raises(DomainError):
        PowerModelParams(p=0.1, eta_S=1.5)
    with pytest.raises(DomainError):
        PowerModelParams(p=0.1).at_energy(10.0)
    pm = PowerModelParams(p=0.0, energy_to_p=7.9e-4).at_energy(20.0)
    assert pm.p == pytest.approx(0.0158)


@given(st.floats(1e-5, 0.9), st.floats(0.01, 1.0), st.floats(0.0, 0.1))
@settings(max_examples=100, deadline=None)
def test_zeta_at_one_is_one(p, eta, pi):
    assert zeta(1.0, PowerModelParams(p, eta, pi)) == pytest.approx(1.0, rel=1e-9)


def test_zeta_ideal_detector():
    p = 0.2
    pm = PowerModelParams(p, 1.0, 0.0)
    assert K(pm) == pytest.approx(p, rel=1e-14)
    x = 0.6
    assert zeta(x, pm) == pytest.approx(((1 - p) / (1 - p * x) - (1 - p)) / p, rel=1e-13)


def test_K_extended_precision():
    mpmath.mp.dps = 50
    p, eta, pi = mpmath.mpf("0.0158"), mpmath.mpf("0.1"), mpmath.mpf("7.5e-7")
    ref = mpmath.nsum(lambda n: (1 - p) * p ** n * (1 - (1 - pi) * (1 - eta) ** n),
                      [0, mpmath.inf])
    assert K(REFERENCE_PARAMS) == pytest.approx(float(ref), rel=1e-12)
    assert K(REFERENCE_PARAMS) == pytest.approx(1.60354e-3, rel=1e-5)


def test_zeta_matches_heralded_generating_function():
    """zeta(x) = E[x^n] over the (linearly) heralded pair number."""
    pm = PowerModelParams(0.05, 0.3, 1e-3)
    d = herald(two_mode_squeezed(pm.p, 60), DetectorModel(pm.eta_S, pm.pi_0), "linear")
    n = np.arange(len(d))
    for x in [0.0, 0.3, 0.99, 1.0, 1.5]:
        assert zeta(x, pm) == pytest.approx(math.fsum(d.probs * x ** n), rel=1e-12)
    assert np.allclose(zeta(np.array([0.3, 0.9]), pm), [zeta(0.3, pm), zeta(0.9, pm)])


def test_zeta_pole():
    with pytest.raises(DomainError):
        zeta(20.0, PowerModelParams(0.1))


def _alpha_brute(pm):
    d = herald(two_mode_squeezed(pm.p, 80), DetectorModel(pm.eta_S, pm.pi_0), "linear")
    n = np.arange(len(d))
    keep = 1 - pm.pi_AS
    none1 = keep * math.fsum(d.probs * (1 - pm.eta_AS / 2) ** n)
    none12 = keep ** 2 * math.fsum(d.probs * (1 - pm.eta_AS) ** n)
    single = 1 - none1
    both = 1 - 2 * none1 + none12
    return both / single ** 2


@pytest.mark.parametrize("pm", [REFERENCE_PARAMS, PowerModelParams(0.05, 0.5, 0.0, 0.3, 0.0),
                                PowerModelParams(0.2, 0.9, 1e-3, 0.5, 1e-3)])
def test_alpha_zero_delay_matches_brute_force(pm):
    # both routes form 1 - 2a + b from O(1) terms; cancellation limits agreement to ~1e-8
    assert alpha_zero_delay(pm) == pytest.approx(_alpha_brute(pm), rel=1e-7)


def _mp_reference(pm):
    """Direct evaluation of the closed forms (as written, with cancellations) in 60 digits."""
    mpmath.mp.dps = 60
    p, eS, pi0, eA, piA = (mpmath.mpf(repr(v)) for v in
                           (pm.p, pm.eta_S, pm.pi_0, pm.eta_AS, pm.pi_AS))
    k = 1 - (1 - pi0) * (1 - p) / (1 - p * (1 - eS))
    z = lambda x: ((1 - p) / (1 - p * x) - (1 - pi0) * (1 - p) / (1 - p * (1 - eS) * x)) / k
    keep = 1 - piA
    zh, zf = z(1 - eA / 2), z(1 - eA)
    alpha = (1 - 2 * keep * zh + keep ** 2 * zf) / (1 - keep * zh) ** 2
    nS = 1 - (1 - pi0) * (1 - p) / (1 - p * (1 - eS))
    nA = 1 - (1 - piA) * (1 - p) / (1 - p * (1 - eA))
    nSA = nS + nA - 1 + (1 - pi0) * (1 - piA) * (1 - p) / (1 - p * (1 - eS) * (1 - eA))
    return float(alpha), float(nSA / (nS * nA))


@pytest.mark.parametrize("pm", [
    REFERENCE_PARAMS,
    PowerModelParams(1e-5, 0.1, 0.0, 1e-3, 0.0),
    PowerModelParams(1e-5, 0.1, 7.5e-7, 0.019, 3.1e-5),
    PowerModelParams(0.3, 0.9, 1e-3, 0.5, 1e-2),
    PowerModelParams(0.05, 0.0, 1e-3, 0.3, 0.0),
    PowerModelParams(1e-12, 0.1, 7.5e-7, 0.019, 3.1e-5),
])
def test_closed_forms_extended_precision(pm):
    alpha, g2sas = _mp_reference(pm)
    assert alpha_zero_delay(pm) == pytest.approx(alpha, rel=1e-10)
    assert g2_SAS_power(pm) == pytest.approx(g2sas, rel=1e-12)


def test_alpha_dark_herald_is_thermal():
    # a Stokes detector that only fires on noise heralds nothing: thermal statistics
    pm = PowerModelParams(0.05, 0.0, 1e-3, 0.3, 0.0)
    assert alpha_zero_delay(pm) == pytest.approx(2.0, rel=0.02)


def test_alpha_reference_lowest_power():
    a = alpha_zero_delay(REFERENCE_PARAMS)
    assert a == pytest.approx(0.06, abs=0.005)
    assert a == pytest.approx(0.06468, abs=5e-5)


@pytest.mark.parametrize("eta_S", [0.1, 0.5, 1.0])
def test_alpha_low_power_limit(eta_S):
    for p in [1e-4, 1e-5]:
        pm = PowerModelParams(p, eta_S, 0.0, 0.019, 0.0)
        assert alpha_zero_delay(pm) == pytest.approx(alpha_loss(p, eta_S), rel=20 * p + 0.019)


def test_alpha_noise_dominated_regime():
    pm_lo = replace(REFERENCE_PARAMS, p=1e-5)
    pm_hi = replace(REFERENCE_PARAMS, p=1e-4)
    # accidental noise coincidences dominate and grow as the pair rate drops
    assert alpha_zero_delay(pm_lo) > alpha_zero_delay(pm_hi) > alpha_loss(1e-4, 0.1)


def test_g2_SAS_reference_and_slope():
    assert g2_SAS_power(REFERENCE_PARAMS) == pytest.approx(58.3, abs=0.1)
    E = np.geomspace(20, 200, 11)
    pms = [PowerModelParams(0.0, energy_to_p=7.9e-4).at_energy(e) for e in E]
    g = np.array([g2_SAS_power(replace(REFERENCE_PARAMS, p=pm.p)) for pm in pms])
    slope = np.polyfit(np.log(E), np.log(g - 1), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_g2_SAS_limits():
    # accidentals only as the pair probability vanishes
    assert g2_SAS_power(replace(REFERENCE_PARAMS, p=1e-12)) == pytest.approx(1.0, abs=1e-3)
    # noise-free: 1 + 1/p at leading order
    pm = PowerModelParams(1e-4, 0.1, 0.0, 0.019, 0.0)
    assert g2_SAS_power(pm) == pytest.approx(1 + 1 / 1e-4, rel=1e-3)
    with pytest.raises(UndefinedStatisticError):
        g2_SAS_power(replace(REFERENCE_PARAMS, eta_AS=0.0))


def test_detection_probabilities_loss_algebra():
    for p in [1e-3, 0.0158, 0.1]:
        for eta in [0.0001, 0.1, 0.5, 1.0]:
            nS, n1, n2, n12 = detection_probabilities(p, eta)
            assert n12 * nS / (n1 * n2) == pytest.approx((4 - 2 * eta) * p, rel=1e-12)
    nS, n1, n2, n12 = detection_probabilities(0.01, 1.0)
    assert n12 * nS / (n1 * n2) == pytest.approx(0.02, rel=1e-12)
    assert alpha_loss(0.0158, 0.1) == pytest.approx(0.06004, rel=1e-12)
    assert alpha_loss(0.01, 0.0) == 0.04


@given(st.floats(1e-4, 0.5), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
@settings(max_examples=60, deadline=None)
def test_detector_efficiencies_cancel(p, eta, e1, e2):
    nS, n1, n2, n12 = detection_probabilities(p, eta, e1, e2)
    assert n12 * nS / (n1 * n2) == pytest.approx(alpha_loss(p, eta), rel=1e-10)


def test_alpha_monotone_in_p_without_noise():
    ps = np.geomspace(1e-4, 0.3, 30)
    a = [alpha_zero_delay(PowerModelParams(p, 0.1, 0.0, 0.019, 0.0)) for p in ps]
    assert np.all(np.diff(a) > 0)


def test_detection_probabilities_domain():
    with pytest.raises(DomainError):
        detection_probabilities(0.1, 1.5)
