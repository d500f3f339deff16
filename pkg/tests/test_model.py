import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duet_baths import (
    BathSpec,
    ConfigError,
    Cutoff,
    InstabilityError,
    SystemParams,
    counterterms,
    diagonalize,
    renormalized_basis,
)
from duet_baths.model import counterterm_shift, rotation

freq = st.floats(0.05, 20.0)
angle = st.floats(0.0, 2 * math.pi, exclude_max=True)


def potential_matrix(p):
    a2, b2, c2 = p.omega_a**2, p.omega_b**2, p.omega_c**2
    return np.array([[a2 + c2, -c2], [-c2, b2 + c2]])


def test_decoupled_identical_oscillators():
    b = diagonalize(SystemParams(1.0, 1.0, 0.0, 0.0))
    assert b.omega_plus == pytest.approx(1.0) and b.omega_minus == pytest.approx(1.0)
    assert b.lambda_angle == 0.0


def test_symmetric_coupling_fixes_quarter_angle():
    b = diagonalize(SystemParams(1.0, 1.0, 1.0, 0.0))
    assert b.lambda_angle == pytest.approx(math.pi / 4, abs=1e-15)
    assert b.omega_plus**2 == pytest.approx(3.0, rel=1e-14)
    assert b.omega_minus**2 == pytest.approx(1.0, rel=1e-14)


def test_asymmetric_case_matches_dense_eigensolver():
    p = SystemParams(2.0, 1.0, 1.0, 0.0)
    b = diagonalize(p)
    ev = np.linalg.eigvalsh(potential_matrix(p))
    assert b.frequencies_squared[::-1] == pytest.approx(ev, rel=1e-13)
    # frozen from the dense solver
    assert b.omega_plus**2 == pytest.approx(3.5 + math.sqrt(13) / 2, rel=1e-14)
    assert math.tan(2 * b.lambda_angle) == pytest.approx(2.0 / 3.0, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(freq, freq, st.floats(0.0, 20.0), angle)
def test_rotation_diagonalizes_potential(a, b, c, theta):
    p = SystemParams(a, b, c, theta)
    basis = diagonalize(p)
    m = potential_matrix(p)
    v = basis.rotation
    d = v @ m @ v.T
    scale = np.max(np.abs(m))
    assert abs(d[0, 1]) <= 1e-10 * scale
    assert d[0, 0] == pytest.approx(basis.omega_plus**2, rel=1e-10, abs=1e-10 * scale)
    assert d[1, 1] == pytest.approx(basis.omega_minus**2, rel=1e-10, abs=1e-10 * scale)
    assert np.max(np.abs(v.T @ v - np.eye(2))) < 1e-12
    assert basis.frequencies_squared.sum() == pytest.approx(a * a + b * b + 2 * c * c, rel=1e-12)
    det = (a * a + c * c) * (b * b + c * c) - c**4
    assert basis.omega_plus**2 * basis.omega_minus**2 == pytest.approx(det, rel=1e-10)
    assert basis.psi_angle == basis.lambda_angle + theta
    assert basis.omega_plus >= basis.omega_minus > 0
    assert 0.0 <= basis.lambda_angle <= math.pi / 2


@pytest.mark.parametrize("kw", [dict(omega_a=0.0, omega_b=1.0, omega_c=0.0), dict(omega_a=1.0, omega_b=-1.0, omega_c=0.0),
                                dict(omega_a=1.0, omega_b=1.0, omega_c=-0.1),
                                dict(omega_a=1.0, omega_b=1.0, omega_c=0.0, theta=2 * math.pi)])
def test_system_params_validation(kw):
    with pytest.raises(ConfigError):
        SystemParams(**kw)


def test_renormalized_basis():
    b = renormalized_basis(1.0, 0.25, 0.3)
    assert (b.omega_plus, b.omega_minus) == (0.875, 1.125)
    assert b.w_mean == 1.0 and b.detuning == 0.25 and b.psi_angle == 0.3
    with pytest.raises(InstabilityError):
        renormalized_basis(0.1, 0.5, 0.0)
    with pytest.raises(ConfigError):
        renormalized_basis(0.0, 0.0, 0.0)


@pytest.mark.parametrize("kw", [dict(gamma=-0.1, lambda_cut=1.0), dict(gamma=0.1, lambda_cut=0.0),
                                dict(gamma=0.1, lambda_cut=math.inf), dict(gamma=0.1, lambda_cut=1.0, temperature=-1.0),
                                dict(gamma=math.nan, lambda_cut=1.0)])
def test_bath_validation(kw):
    with pytest.raises(ConfigError):
        BathSpec(**kw)


def test_bath_cutoff_coercion_and_replace():
    b = BathSpec(0.1, 10.0, cutoff_family="drude")
    assert b.cutoff_family is Cutoff.DRUDE
    assert b.replace(gamma=0.2).gamma == 0.2 and b.replace(gamma=0.2).cutoff_family is Cutoff.DRUDE
    with pytest.raises(ValueError):
        BathSpec(0.1, 10.0, cutoff_family="lorentzian")


def test_counterterm_examples():
    same = counterterms(BathSpec(0.1, 50.0), BathSpec(0.1, 50.0), 0.7)
    assert same.d_pm == 0.0
    assert same.d_pp == pytest.approx(10.0 / math.pi) and same.d_mm == pytest.approx(10.0 / math.pi)

    b1, b2 = BathSpec(0.1, 100.0), BathSpec(0.01, 100.0)
    ct = counterterms(b1, b2, 0.0)
    assert (ct.d_pp, ct.d_mm, ct.d_pm) == (pytest.approx(20 / math.pi), pytest.approx(2 / math.pi), 0.0)
    ct = counterterms(b1, b2, math.pi / 4)
    assert ct.d_pm == pytest.approx(9 / math.pi, rel=1e-14)
    assert ct.matrix()[0, 1] == ct.matrix()[1, 0] == ct.d_pm


def test_counterterm_shift_by_family():
    assert counterterm_shift(BathSpec(0.2, 30.0)) == pytest.approx(12.0 / math.pi)
    assert counterterm_shift(BathSpec(0.2, 30.0, strict_ohmic=True)) == pytest.approx(12.0 / math.pi)
    assert counterterm_shift(BathSpec(0.2, 30.0, cutoff_family="drude")) == pytest.approx(6.0)
    assert counterterm_shift(BathSpec(0.2, 30.0, cutoff_family="exponential")) == pytest.approx(12.0 / math.pi)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(1.0, 100.0), st.floats(1.0, 100.0), angle,
       st.floats(0.1, 3.0))
def test_counterterm_properties(g1, g2, l1, l2, psi, k):
    b1, b2 = BathSpec(g1, l1), BathSpec(g2, l2)
    m = counterterms(b1, b2, psi).matrix()
    # linear in (dOmega_1, dOmega_2), periodic under psi -> psi + pi
    assert np.allclose(counterterms(b1.replace(gamma=k * g1), b2.replace(gamma=k * g2), psi).matrix(), k * m,
                       rtol=1e-12, atol=1e-14)
    assert np.allclose(counterterms(b1, b2, psi + math.pi).matrix(), m, rtol=1e-12, atol=1e-12)
    v = rotation(psi)
    assert np.allclose(v @ np.diag([counterterm_shift(b1), counterterm_shift(b2)]) @ v.T, m, atol=1e-12)
    balanced = BathSpec(g1, l1), BathSpec(g1 * l1 / l2, l2)
    assert abs(counterterms(*balanced, psi).d_pm) < 1e-12 * max(1.0, np.max(np.abs(m)))
