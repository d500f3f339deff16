import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duet_baths import BathSpec, ConfigError, InstabilityError, renormalized_basis
from duet_baths.greens import (
    Regime,
    check_stable,
    damped_sine,
    greens_companion,
    greens_kernel,
    greens_numeric,
    greens_one_bath,
    greens_strong_delta0,
    greens_weak,
    laplace_matrix,
    slow_damping_rate,
    stability_scan,
)
from duet_baths.model import rotation

PI4 = math.pi / 4


def strict(g):
    return BathSpec(g, 1e3, 0.0, strict_ohmic=True)


def direct_inverse(s, wp, wm, psi, a1, a2):
    c, sn = math.cos(psi), math.sin(psi)
    m = np.array([[s * s + wp * wp, 0], [0, s * s + wm * wm]], dtype=complex)
    m += a1 * np.array([[c * c, c * sn], [c * sn, sn * sn]]) + a2 * np.array([[sn * sn, -c * sn], [-c * sn, c * c]])
    return np.linalg.inv(m)


def test_uncoupled_laplace_matrix_is_diagonal():
    lap = laplace_matrix(renormalized_basis(1.0, 0.3, 0.4), strict(0.0), strict(0.0))
    s = np.array([0.2 + 1.3j, 2.0 - 0.5j])
    g = lap(s)
    assert np.allclose(g[:, 0, 0], 1 / (s * s + 0.85**2))
    assert np.allclose(g[:, 1, 1], 1 / (s * s + 1.15**2))
    assert np.max(np.abs(g[:, 0, 1])) < 1e-15


def test_degenerate_off_diagonal_structure():
    g1, g2, w = 0.1, 0.03, 1.0
    lap = laplace_matrix(renormalized_basis(w, 0.0, PI4), strict(g1), strict(g2))
    for s in (0.3 + 0.7j, 1.5 + 0.0j, 0.05 - 2.0j):
        want = (s * (g2 - g1) / 2) / ((s * s + w * w + s * g1) * (s * s + w * w + s * g2))
        assert complex(lap(np.array([s]))[0, 0, 1]) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("family", ["strict", "sharp", "drude"])
def test_laplace_matrix_matches_direct_inversion(family):
    rng = np.random.default_rng(7)
    w, delta, psi, g1, g2, lam = 1.0, 0.3, 0.8, 0.2, 0.05, 25.0
    if family == "strict":
        b1, b2 = BathSpec(g1, lam, strict_ohmic=True), BathSpec(g2, lam, strict_ohmic=True)

        def a(g, s):
            return g * s
    elif family == "sharp":
        b1, b2 = BathSpec(g1, lam), BathSpec(g2, lam)

        def a(g, s):
            return (2 * g / math.pi) * s * np.arctan(lam / s)
    else:
        b1, b2 = BathSpec(g1, lam, cutoff_family="drude"), BathSpec(g2, lam, cutoff_family="drude")

        def a(g, s):
            return g * lam * s / (lam + s)

    lap = laplace_matrix(renormalized_basis(w, delta, psi), b1, b2)
    s_vals = rng.uniform(0.01, 3.0, 20) + 1j * rng.uniform(-4.0, 4.0, 20)
    got = lap(s_vals)
    for k, s in enumerate(s_vals):
        want = direct_inverse(s, w - delta / 2, w + delta / 2, psi, a(g1, s), a(g2, s))
        assert np.allclose(got[k], want, rtol=1e-10, atol=1e-13)
        assert np.allclose(got[k] @ lap.inverse(np.array([s]))[0], np.eye(2), atol=1e-10)
    sc = lap.scalars(s_vals)
    assert np.allclose(sc["alpha"] ** 2 + sc["beta"] ** 2, 1.0, atol=1e-12)


def test_bromwich_initial_conditions():
    lap = laplace_matrix(renormalized_basis(1.0, 0.2, 0.5), strict(0.1), strict(0.04))
    assert np.array_equal(greens_numeric(lap, 0.0), np.zeros((2, 2)))
    assert np.array_equal(greens_numeric(lap, 0.0, derivative=True), np.eye(2))
    small = greens_numeric(lap, 1e-3, derivative=True)
    assert np.allclose(small, np.eye(2), atol=2e-3)


def test_bromwich_matches_degenerate_closed_form():
    w, psi, g1, g2 = 1.0, PI4, 0.1, 0.03
    lap = laplace_matrix(renormalized_basis(w, 0.0, psi), strict(g1), strict(g2))
    t = np.linspace(0.0, 50.0, 26)
    assert np.max(np.abs(greens_numeric(lap, t) - greens_strong_delta0(w, psi, g1, g2, t))) < 1e-6
    gd = greens_strong_delta0(w, psi, g1, g2, t, derivative=True)
    assert np.max(np.abs(greens_numeric(lap, t, derivative=True) - gd)) < 1e-6


def test_bromwich_matches_one_bath_at_late_time():
    lap = laplace_matrix(renormalized_basis(1.0, 0.0, PI4), strict(0.1), strict(0.0))
    assert np.max(np.abs(greens_numeric(lap, 100.0) - greens_one_bath(1.0, PI4, 0.1, 100.0))) < 1e-6


def test_weak_kernel_tracks_bromwich():
    # gamma/W = 0.01, Delta/W = 0.3: residual O(gamma^2/Delta^2)
    w, delta, psi, g1, g2 = 1.0, 0.3, PI4, 0.01, 0.002
    lap = laplace_matrix(renormalized_basis(w, delta, psi), strict(g1), strict(g2))
    t = np.array([5.0, 20.0, 60.0])
    err = np.max(np.abs(greens_numeric(lap, t) - greens_weak(w, delta, psi, g1, g2, t)))
    assert err < 2 * (g1 / delta) ** 2
    # the specified example point
    lapf = laplace_matrix(renormalized_basis(1.0, 0.25, PI4), strict(0.05), strict(0.005))
    assert np.max(np.abs(greens_numeric(lapf, 20.0) - greens_weak(1.0, 0.25, PI4, 0.05, 0.005, 20.0))) < 5e-3


def test_bromwich_finite_band_matches_companion_limit():
    # a sharp bath with a very wide band approaches the strict Ohmic kernel
    w, delta, psi = 1.0, 0.4, 0.6
    lap = laplace_matrix(renormalized_basis(w, delta, psi), BathSpec(0.1, 2e3), BathSpec(0.02, 2e3))
    g, _ = greens_companion(w, delta, psi, 0.1, 0.02, 7.0)
    assert np.max(np.abs(greens_numeric(lap, 7.0) - g)) < 1e-3


def test_degenerate_closed_form_examples():
    t = np.linspace(0, 30, 31)
    same = greens_strong_delta0(1.0, 0.7, 0.1, 0.1, t)
    g1, _ = damped_sine(1.0, 0.1, t)
    assert np.allclose(same[:, 0, 1], 0.0, atol=1e-16)
    assert np.allclose(same[:, 0, 0], g1) and np.allclose(same[:, 1, 1], g1)

    w1 = math.sqrt(1 - 0.0025)
    assert damped_sine(1.0, 0.1, math.pi / w1)[0] == pytest.approx(0.0, abs=1e-15)

    G = greens_strong_delta0(1.0, PI4, 0.1, 0.03, 5.0)
    v = rotation(PI4)
    d = np.diag([damped_sine(1.0, 0.1, 5.0)[0], damped_sine(1.0, 0.03, 5.0)[0]])
    assert np.allclose(G, v @ d @ np.linalg.inv(v), atol=1e-15)
    # frozen: G_1(5) = e^{-0.25} sin(5 W_1)/W_1
    assert float(d[0, 0]) == pytest.approx(math.exp(-0.25) * math.sin(5 * w1) / w1, rel=1e-14)


def test_one_bath_limit_and_undamped_amplitude():
    t = np.linspace(0, 80, 41)
    assert np.allclose(greens_strong_delta0(1.0, PI4, 0.1, 1e-12, t), greens_one_bath(1.0, PI4, 0.1, t), atol=1e-10)
    late = np.linspace(500.0, 510.0, 2001)
    g = greens_one_bath(1.0, 0.3, 0.1, late)
    assert np.max(np.abs(g[:, 0, 0])) == pytest.approx(abs(0.5 - 0.5 * math.cos(0.6)), rel=1e-4)
    assert np.max(np.abs(g[:, 1, 1])) == pytest.approx(abs(0.5 + 0.5 * math.cos(0.6)), rel=1e-4)


def test_overdamped_continuation_matches_companion():
    t = np.linspace(0, 10, 11)
    g, gd = greens_companion(1.0, 0.0, 0.4, 3.0, 0.5, t)
    assert np.allclose(greens_strong_delta0(1.0, 0.4, 3.0, 0.5, t), g, atol=1e-12)
    assert np.allclose(greens_strong_delta0(1.0, 0.4, 3.0, 0.5, t, derivative=True), gd, atol=1e-12)


def test_weak_kernel_limits():
    t = np.linspace(0, 40, 21)
    assert np.allclose(greens_weak(1.0, 0.3, 0.6, 0.02, 0.02, t)[:, 0, 1], 0.0, atol=1e-16)
    g = greens_weak(1.0, 0.3, 0.0, 0.02, 0.006, t, pole_shift=False)
    assert np.allclose(g[:, 0, 1], 0.0, atol=1e-16)
    assert np.allclose(g[:, 0, 0], np.exp(-0.01 * t) * np.sin(0.85 * t) / 0.85)
    assert np.allclose(g[:, 1, 1], np.exp(-0.003 * t) * np.sin(1.15 * t) / 1.15)
    with pytest.raises(ConfigError):
        greens_weak(1.0, 0.0, 0.6, 0.02, 0.01, t)


def test_kernel_regime_constraints():
    with pytest.raises(ConfigError):
        greens_kernel(1.0, 0.2, 0.3, 0.1, 0.1, Regime.STRONG_DELTA0)
    with pytest.raises(ConfigError):
        greens_kernel(1.0, 0.0, 0.3, 0.1, 0.1, Regime.ONE_BATH)
    with pytest.raises(ConfigError):
        greens_kernel(1.0, 0.2, 0.3, 0.1, 0.1, Regime.NUMERIC)
    k = greens_kernel(1.0, 0.25, 0.3, 0.05, 0.01, "WeakCoupling")
    assert set(k.derived) == {"Omega_plus", "Omega_minus", "Gamma_plus", "Gamma_minus"}
    assert greens_kernel(1.0, 0.0, 0.3, 0.05, 0.0, "OneBath").derived["W2"] == 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 0.8), st.floats(0.0, math.pi), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_initial_value_property_all_closed_regimes(w, dfrac, psi, g1, g2):
    delta = dfrac * w
    zero = np.zeros((2, 2))
    kernels = [greens_kernel(w, 0.0, psi, g1, g2, Regime.STRONG_DELTA0),
               greens_kernel(w, delta, psi, g1, g2, Regime.STRONG_DETUNED)]
    if delta > 0.05 * w:
        kernels.append(greens_kernel(w, delta, psi, 0.01 * g1, 0.01 * g2, Regime.WEAK))
    for k in kernels:
        assert np.allclose(k(0.0), zero, atol=1e-10)
        assert np.allclose(k.derivative(0.0), np.eye(2), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 0.8), st.floats(0.0, math.pi), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_poles_in_closed_left_half_plane(w, dfrac, psi, g1, g2):
    lap = laplace_matrix(renormalized_basis(w, dfrac * w, psi), strict(g1), strict(g2))
    roots = stability_scan(lap)
    assert roots.size == 4
    assert np.all(roots.real <= 1e-10 * w)
    check_stable(lap)


def test_finite_band_scan_finds_damped_poles():
    lap = laplace_matrix(renormalized_basis(1.0, 0.3, 0.5), BathSpec(0.05, 30.0), BathSpec(0.01, 30.0))
    roots = stability_scan(lap)
    assert np.all(roots.real <= 1e-12)
    check_stable(lap)


def test_missing_counterterm_is_unstable():
    lap = laplace_matrix(renormalized_basis(1.0, 0.0, 0.3), BathSpec(0.5, 50.0), BathSpec(0.1, 50.0),
                         counterterm=False)
    with pytest.raises(InstabilityError):
        check_stable(lap)
    with pytest.raises(InstabilityError):
        greens_numeric(lap, 1.0)


def test_slow_rate_scales_with_detuning_squared():
    # one-bath dark mode picks up a rate ~ Delta^2 / (2 gamma_1)
    assert abs(slow_damping_rate(1.0, 0.0, PI4, 0.5, 0.0)) < 1e-12
    for d in (0.02, 0.01):
        assert slow_damping_rate(1.0, d, PI4, 0.5, 0.0) == pytest.approx(d * d, rel=2e-3)
    r0 = slow_damping_rate(1.0, 0.0, PI4, 0.5, 0.1)
    assert r0 == pytest.approx(0.05, rel=1e-10)
    ratio = (slow_damping_rate(1.0, 0.02, PI4, 0.5, 0.1) - r0) / (slow_damping_rate(1.0, 0.01, PI4, 0.5, 0.1) - r0)
    assert ratio == pytest.approx(4.0, rel=0.02)


def test_companion_equals_degenerate_closed_form():
    t = np.linspace(0, 25, 26)
    g, gd = greens_companion(1.3, 0.0, 0.9, 0.2, 0.07, t)
    assert np.allclose(g, greens_strong_delta0(1.3, 0.9, 0.2, 0.07, t), atol=1e-12)
    assert np.allclose(gd, greens_strong_delta0(1.3, 0.9, 0.2, 0.07, t, derivative=True), atol=1e-12)
