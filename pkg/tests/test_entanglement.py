import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from duet_baths import BathSpec, ConfigError, DomainError, renormalized_basis
from duet_baths.correlators import coherence_exact_delta0
from duet_baths.entanglement import (
    bath_difference_kernel,
    coherence_growth,
    exp_divided_difference,
    second_order_coherence,
)

PI4 = math.pi / 4
BASIS = renormalized_basis(1.0, 0.0, PI4)


def dd_by_quadrature(x, y):
    def part(fn):
        return integrate.dblquad(lambda sp, s: fn(np.exp(x * s + (y - x) * sp)), 0, 1, 0, lambda s: s,
                                 epsabs=1e-13, epsrel=1e-12)[0]

    return complex(part(np.real), part(np.imag))


@pytest.mark.parametrize("x,y", [(0.0, 0.0), (1e-9, -2e-9), (0.3, 0.3), (2j, 2.0000001j), (1.5j, -0.7j),
                                 (4 + 3j, -2j), (0.999, 0.0), (1.001, 0.0), (-3.0, 1e-5), (10j, 10j)])
def test_divided_difference_matches_integral(x, y):
    assert exp_divided_difference(x, y) == pytest.approx(dd_by_quadrature(x, y), rel=1e-9, abs=1e-14)


def test_divided_difference_closed_forms():
    assert exp_divided_difference(0.0, 0.0) == pytest.approx(0.5, rel=1e-15)
    x = 2.0
    assert exp_divided_difference(x, x) == pytest.approx((math.exp(x) - math.expm1(x) / x) / x, rel=1e-13)
    x, y = 1.7j, -3.1j
    want = ((np.exp(y) - 1) / y - (np.exp(x) - 1) / x) / (y - x)
    assert exp_divided_difference(x, y) == pytest.approx(want, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(max_magnitude=8.0, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=8.0, allow_nan=False, allow_infinity=False))
def test_divided_difference_symmetric_and_vectorized(x, y):
    a = exp_divided_difference(x, y)
    assert a == pytest.approx(exp_divided_difference(y, x), rel=1e-10, abs=1e-13)
    v = exp_divided_difference(np.array([x, y]), np.array([y, x]))
    assert v.shape == (2,)
    assert v[0] == pytest.approx(a, rel=1e-12, abs=1e-14)


def test_bath_kernel_coincident_and_quadrature():
    b1, b2 = BathSpec(0.1, 20.0), BathSpec(0.02, 20.0)
    cs = math.sin(0.4) * math.cos(0.4)
    assert bath_difference_kernel(b1, b2, 0.4, 0.0) == pytest.approx(cs * 0.08 * 400 / (2 * math.pi), rel=1e-12)
    dt = 0.37
    im = -integrate.quad(lambda w: w * math.sin(w * dt), 0, 20.0)[0]
    want = cs * 0.08 * complex(integrate.quad(lambda w: w * math.cos(w * dt), 0, 20.0)[0], im) / math.pi
    assert bath_difference_kernel(b1, b2, 0.4, dt) == pytest.approx(want, rel=1e-10)
    assert bath_difference_kernel(b1, b1, 0.4, dt) == 0
    assert bath_difference_kernel(b1, b2, 0.0, dt) == 0
    with pytest.raises(DomainError):
        bath_difference_kernel(BathSpec(0.1, 20.0, 0.5), b2, 0.4, dt)


def test_second_order_trivial_cases():
    b1, b2 = BathSpec(0.01, 20.0), BathSpec(0.0, 20.0)
    assert second_order_coherence(BASIS, (b1, b2), 0.0) == 0
    assert second_order_coherence(BASIS, (b1, b1), 3.0) == 0
    assert abs(second_order_coherence(renormalized_basis(1.0, 0.0, 0.0), (b1, b2), 3.0)) < 1e-18
    with pytest.raises(DomainError):
        second_order_coherence(BASIS, (b1, b2), -1.0)
    with pytest.raises(DomainError):
        second_order_coherence(BASIS, (b1.replace(temperature=0.1), b2), 1.0)


def test_second_order_is_linear_and_antisymmetric():
    t = 2.5
    a = second_order_coherence(BASIS, (BathSpec(0.03, 20.0), BathSpec(0.01, 20.0)), t, counterterm=True)
    b = second_order_coherence(BASIS, (BathSpec(0.01, 20.0), BathSpec(0.03, 20.0)), t, counterterm=True)
    c = second_order_coherence(BASIS, (BathSpec(0.02, 20.0), BathSpec(0.0, 20.0)), t, counterterm=True)
    assert b == pytest.approx(-a, rel=1e-12)
    assert a == pytest.approx(c, rel=1e-10)
    # exchanging the baths is the same as psi -> -psi
    flipped = renormalized_basis(1.0, 0.0, -PI4)
    assert second_order_coherence(flipped, (BathSpec(0.03, 20.0), BathSpec(0.01, 20.0)), t, True) == \
        pytest.approx(b, rel=1e-12)


def test_second_order_matches_exact_at_weak_coupling():
    # relative error should be O(gamma)
    errs = []
    for g in (0.01, 0.005):
        b1, b2 = BathSpec(g, 20.0), BathSpec(0.0, 20.0)
        for t in (0.5, 2.0, 5.0):
            exact = coherence_exact_delta0(1.0, PI4, b1, b2, t)
            approx = second_order_coherence(BASIS, (b1, b2), t, counterterm=True)
            assert abs(approx.imag) < 1e-15
            errs.append(abs(approx.real - exact) / abs(exact))
    assert max(errs[:3]) < 0.08 and max(errs[3:]) < 0.04
    assert errs[5] / errs[2] == pytest.approx(0.5, rel=0.15)


def test_growth_fit_and_validation():
    res = coherence_growth(BASIS, (BathSpec(0.01, 20.0), BathSpec(0.0, 20.0)), np.array([0.01, 0.02, 0.04]))
    assert res.values.shape == (3,)
    assert 1.5 < res.growth_exponent < 4.5
    assert math.isnan(coherence_growth(BASIS, (BathSpec(0.01, 20.0), BathSpec(0.0, 20.0)),
                                       np.array([0.0, 1.0])).growth_exponent)
    with pytest.raises(ConfigError):
        coherence_growth(BASIS, (BathSpec(0.01, 20.0), BathSpec(0.0, 20.0)), np.array([]))
