import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_herald.errors import DomainError, TruncationError, UndefinedStatisticError
from phonon_herald.fock import (
    BOLTZMANN,
    PLANCK,
    NumberDistribution,
    bose_occupancy,
    factorial_moment,
    fock_distribution,
    g2,
    marginal,
    poisson_distribution,
    thermal_distribution,
    two_mode_squeezed,
)


def brute_g2(probs):
    """Double loop over n, independent of factorial_moment."""
    num = 0.0
    mean = 0.0
    for n, p in enumerate(probs):
        mean += n * p
        num += n * (n - 1) * p
    return num / mean ** 2


def test_bose_occupancy_paper_value():
    assert bose_occupancy(40.0, 295.0) == pytest.approx(1.5e-3, rel=0.05)


def test_bose_occupancy_unit_at_ln2():
    T = 300.0
    nu_thz = math.log(2.0) * BOLTZMANN * T / PLANCK / 1e12
    assert bose_occupancy(nu_thz, T) == pytest.approx(1.0, rel=1e-12)


def test_bose_occupancy_extended_precision():
    mpmath.mp.dps = 50
    x = mpmath.mpf(PLANCK) * mpmath.mpf(40e12) / (mpmath.mpf(BOLTZMANN) * 10)
    ref = float(1 / mpmath.expm1(x))
    assert bose_occupancy(40.0, 10.0) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("nu,T", [(0, 300), (40, 0), (-1, 10)])
def test_bose_occupancy_domain(nu, T):
    with pytest.raises(DomainError):
        bose_occupancy(nu, T)


def test_thermal_vacuum():
    d = thermal_distribution(0.0)
    assert d.probs.tolist() == [1.0]


def test_thermal_unit_mean():
    d = thermal_distribution(1.0)
    assert d[0] == pytest.approx(0.5, abs=1e-12)
    assert d[1] == pytest.approx(0.25, abs=1e-12)


def test_thermal_ambient_g2():
    d = thermal_distribution(1.5e-3)
    assert brute_g2(d.probs) == pytest.approx(2.0, abs=1e-6)
    assert g2(d) == pytest.approx(2.0, abs=1e-6)


def test_thermal_guard():
    with pytest.raises(TruncationError):
        thermal_distribution(1.0, n_trunc=5)


@given(st.floats(1e-4, 10.0))
@settings(max_examples=60, deadline=None)
def test_thermal_g2_property(nbar):
    d = thermal_distribution(nbar)
    assert abs(math.fsum(d.probs) - 1.0) <= 1e-12
    assert g2(d) == pytest.approx(2.0, abs=1e-6)


def test_fock_states():
    assert fock_distribution(0).probs.tolist() == [1.0]
    assert g2(fock_distribution(1, 4)) == 0.0
    assert g2(fock_distribution(2, 4)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        fock_distribution(5, 3)


def test_two_mode_squeezed():
    assert two_mode_squeezed(0.0).pair_probs.tolist() == [1.0]
    j = two_mode_squeezed(9.9e-3)
    assert marginal(j).mean() == pytest.approx(9.9e-3 / (1 - 9.9e-3), rel=1e-9)
    assert marginal(j).mean() == pytest.approx(1e-2, rel=2e-4)
    assert two_mode_squeezed(0.5).pair_probs[2] == pytest.approx(0.125, abs=1e-12)
    with pytest.raises(DomainError):
        two_mode_squeezed(1.0)


def test_marginal_examples():
    assert marginal(two_mode_squeezed(0.0)).probs.tolist() == [1.0]
    assert marginal(two_mode_squeezed(0.5)).mean() == pytest.approx(1.0, abs=1e-9)
    assert brute_g2(marginal(two_mode_squeezed(0.0158)).probs) == pytest.approx(2.0, abs=1e-6)


@given(st.floats(0.0, 0.9))
@settings(max_examples=60, deadline=None)
def test_marginal_is_thermal(p):
    m = marginal(two_mode_squeezed(p))
    t = thermal_distribution(p / (1 - p), n_trunc=m.n_trunc)
    assert np.max(np.abs(m.probs - t.probs)) <= 1e-12


def test_g2_poisson_bruteforce():
    mean = 0.3
    w = [math.exp(-mean) * mean ** n / math.factorial(n) for n in range(40)]
    w = np.array(w) / math.fsum(w)
    assert brute_g2(w) == pytest.approx(1.0, abs=1e-9)
    assert g2(poisson_distribution(mean)) == pytest.approx(1.0, abs=1e-9)


def test_g2_zero_mean():
    with pytest.raises(UndefinedStatisticError):
        g2(fock_distribution(0, 3))


def test_factorial_moments():
    assert factorial_moment(fock_distribution(1, 3), 2) == 0.0
    nbar = 0.7
    assert factorial_moment(thermal_distribution(nbar, 200), 2) == pytest.approx(2 * nbar ** 2, rel=1e-10)
    d = NumberDistribution([0.0, 0.9, 0.1])
    assert factorial_moment(d, 2) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(DomainError):
        factorial_moment(d, 0)


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=30).filter(lambda w: sum(w[1:]) > 1e-3))
@settings(max_examples=100, deadline=None)
def test_factorial_route_matches_bruteforce(w):
    d = NumberDistribution.from_weights(w)
    assert abs(math.fsum(d.probs) - 1) <= 1e-12
    assert factorial_moment(d, 1) == pytest.approx(d.mean())
    assert g2(d) == pytest.approx(brute_g2(d.probs), rel=1e-12, abs=1e-12)


def test_distribution_validation():
    with pytest.raises(ValueError):
        NumberDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        NumberDistribution([1.1, -0.1])
    d = NumberDistribution([0.5, 0.5])
    assert d.padded(4).probs.tolist() == [0.5, 0.5, 0, 0, 0]
    assert d.allclose(d.padded(6))
