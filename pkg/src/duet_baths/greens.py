"""Laplace-domain matrix G(s) and time-domain Green's functions.

Conventions: in the normal-mode basis

    G^{-1}(s) = s^2 + diag(Omega_R+^2, Omega_R-^2) + V(psi) diag(a_1(s), a_2(s)) V(psi)^T

with a_j(s) the renormalized self-energy of bath j (``gamma_j * s`` for
strict Ohmic baths). The time-domain kernel satisfies G(0) = 0, G'(0) = 1.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from .errors import ConfigError, InstabilityError, NumericalError
from .model import BathSpec, NormalModeBasis, counterterms, rotation
from .spectral import renormalized_self_energy

__all__ = [
    "Regime",
    "LaplaceMatrix",
    "laplace_matrix",
    "stability_scan",
    "check_stable",
    "greens_numeric",
    "greens_strong_delta0",
    "greens_one_bath",
    "greens_weak",
    "greens_companion",
    "slow_damping_rate",
    "damped_sine",
    "GreensKernel",
    "greens_kernel",
    "weak_rates",
]


class Regime(str, enum.Enum):
    NUMERIC = "NumericBromwich"
    STRONG_DELTA0 = "StrongDelta0"
    ONE_BATH = "OneBath"
    WEAK = "WeakCoupling"
    STRONG_DETUNED = "StrongDetunedPerturbative"


# ---------------------------------------------------------------- Laplace domain


class LaplaceMatrix:
    """Evaluator s -> G(s) for complex s with Re s > 0 (or on the axis for
    finite-bandwidth families), built on the projector decomposition

        G = (1+R)/2 / (M^2 - rho/2) + (1-R)/2 / (M^2 + rho/2).
    """

    def __init__(self, basis: NormalModeBasis, bath1: BathSpec, bath2: BathSpec, counterterm: bool = True):
        self.basis = basis
        self.baths = (bath1, bath2)
        self.counterterm = counterterm
        self.psi = basis.psi_angle
        self.k_diag = basis.frequencies_squared
        self.strict = bath1.strict_ohmic and bath2.strict_ohmic

    def self_energies(self, s):
        a1 = renormalized_self_energy(self.baths[0], s, self.counterterm)
        a2 = renormalized_self_energy(self.baths[1], s, self.counterterm)
        return a1, a2

    def scalars(self, s) -> dict:
        s = np.asarray(s, dtype=complex)
        a1, a2 = self.self_energies(s)
        c, sn = math.cos(self.psi), math.sin(self.psi)
        wp2 = self.k_diag[0] + c * c * a1 + sn * sn * a2
        wm2 = self.k_diag[1] + sn * sn * a1 + c * c * a2
        theta2 = c * sn * (a1 - a2)
        m2 = s * s + 0.5 * (wp2 + wm2)
        rho = np.sqrt((wp2 - wm2) ** 2 + 4.0 * theta2**2)
        with np.errstate(divide="ignore", invalid="ignore"):
            alpha = (wm2 - wp2) / rho
            beta = 2.0 * theta2 / rho
        return dict(Wp2=wp2, Wm2=wm2, Theta2=theta2, M2=m2, rho=rho, alpha=alpha, beta=beta)

    def inverse(self, s) -> np.ndarray:
        """G^{-1}(s) assembled directly, shape (..., 2, 2)."""
        s = np.asarray(s, dtype=complex)
        a1, a2 = self.self_energies(s)
        v = rotation(self.psi)
        out = np.zeros(s.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = s * s + self.k_diag[0]
        out[..., 1, 1] = s * s + self.k_diag[1]
        for j, a in enumerate((a1, a2)):
            out += a[..., None, None] * np.outer(v[:, j], v[:, j])
        return out

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        sc = self.scalars(s)
        rho, m2 = sc["rho"], sc["M2"]
        scale = np.abs(m2) + np.abs(sc["Wp2"]) + np.abs(sc["Wm2"])
        degenerate = np.abs(rho) <= 1e-9 * scale
        alpha = np.where(degenerate, 0.0, sc["alpha"])
        beta = np.where(degenerate, 0.0, sc["beta"])
        r = np.zeros(s.shape + (2, 2), dtype=complex)
        r[..., 0, 0], r[..., 0, 1], r[..., 1, 0], r[..., 1, 1] = alpha, -beta, -beta, -alpha
        eye = np.eye(2)
        lo = (m2 - rho / 2)[..., None, None]
        hi = (m2 + rho / 2)[..., None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 0.5 * (eye + r) / lo + 0.5 * (eye - r) / hi
        if np.any(degenerate):
            g[degenerate] = np.linalg.inv(self.inverse(s[degenerate]))
        return g


def laplace_matrix(basis: NormalModeBasis, bath1: BathSpec, bath2: BathSpec, counterterm: bool = True) -> LaplaceMatrix:
    return LaplaceMatrix(basis, bath1, bath2, counterterm)


def _companion(k_diag, damping) -> np.ndarray:
    a = np.zeros((4, 4))
    a[:2, 2:] = np.eye(2)
    a[2:, :2] = -np.diag(k_diag)
    a[2:, 2:] = -damping
    return a


def _damping_matrix(psi, g1, g2) -> np.ndarray:
    v = rotation(psi)
    return v @ np.diag([g1, g2]) @ v.T


def stability_scan(lap: LaplaceMatrix, newton_iter: int = 60) -> np.ndarray:
    """Poles of G(s) near the undamped normal modes.

    Strict Ohmic baths give a quadratic eigenproblem solved exactly through
    the companion matrix. Otherwise Newton's method on det G^{-1} is seeded
    at +-i Omega_R+- (slightly to the right of the axis).
    """
    if lap.strict:
        g1, g2 = lap.baths[0].gamma, lap.baths[1].gamma
        k = lap.k_diag
        if not lap.counterterm:
            k = np.diag(k) - counterterms(*lap.baths, lap.psi).matrix()
            a = np.zeros((4, 4))
            a[:2, 2:] = np.eye(2)
            a[2:, :2] = -k
            a[2:, 2:] = -_damping_matrix(lap.psi, g1, g2)
            return np.linalg.eigvals(a)
        return np.linalg.eigvals(_companion(k, _damping_matrix(lap.psi, g1, g2)))

    def det(s):
        return np.linalg.det(lap.inverse(np.array([s]))[0])

    # The self-energies are evaluated on their principal branch, valid for
    # Re s > 0. An iterate crossing into Re s < 0 means the pole sits on the
    # stable side; only converged roots are reported.
    roots = []
    for w in np.sqrt(lap.k_diag):
        for sgn in (1.0, -1.0):
            s = complex(1e-3 * w, sgn * w)
            for _ in range(newton_iter):
                if s.real < 0:
                    break
                h = 1e-7 * max(1.0, abs(s))
                f = det(s)
                df = (det(s + h) - det(s - h)) / (2 * h)
                if df == 0:
                    break
                step = f / df
                s -= step
                if abs(step) < 1e-13 * max(1.0, abs(s)):
                    if s.real >= 0 and abs(det(s)) < 1e-9 * max(1.0, abs(s)) ** 4:
                        roots.append(s)
                    break
    return np.array(roots)


def check_stable(lap: LaplaceMatrix, tol: float = 1e-10) -> None:
    static = lap.inverse(np.array([1e-12 + 0j]))[0].real
    if np.min(np.linalg.eigvalsh(0.5 * (static + static.T))) <= 0:
        raise InstabilityError("static stiffness G^{-1}(0) is not positive definite")
    roots = stability_scan(lap)
    scale = max(1.0, float(np.max(np.sqrt(lap.k_diag))))
    bad = roots[roots.real > tol * scale]
    if bad.size:
        raise InstabilityError(f"pole(s) of G(s) in the right half-plane: {bad}")


# ---------------------------------------------------------------- numeric inversion


_ELEMS = ((0, 0), (0, 1), (1, 1))


def _bromwich_one(func, t, wmarks, epsabs):
    """(e^{ct}/pi) int_0^inf Re[e^{i w t} F(c + i w)] dw for the 3 independent
    entries of a symmetric 2x2 transform F; c = 1/t."""
    c = 1.0 / t
    w_split = max(4.0 * max(wmarks), 6.0 * c, 2.0)
    marks = sorted(m for m in wmarks if 0 < m < w_split)
    cache = {}

    def entry(w, ij):
        if w not in cache:
            cache[w] = func(complex(c, w))
        return cache[w][ij]

    out = np.zeros((2, 2))
    for ij in _ELEMS:
        def re(w, ij=ij):
            return entry(w, ij).real

        def im(w, ij=ij):
            return entry(w, ij).imag

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                edges = [0.0] + marks + [w_split]
                total = 0.0
                for lo, hi in zip(edges[:-1], edges[1:]):
                    total += integrate.quad(re, lo, hi, weight="cos", wvar=t, epsabs=epsabs, limit=500)[0]
                    total -= integrate.quad(im, lo, hi, weight="sin", wvar=t, epsabs=epsabs, limit=500)[0]
                total += integrate.quad(re, w_split, np.inf, weight="cos", wvar=t, epsabs=epsabs, limlst=200)[0]
                total -= integrate.quad(im, w_split, np.inf, weight="sin", wvar=t, epsabs=epsabs, limlst=200)[0]
            except integrate.IntegrationWarning as exc:
                raise NumericalError(f"Bromwich quadrature failed at t={t}: {exc}") from exc
        out[ij] = total * math.exp(c * t) / math.pi
    out[1, 0] = out[0, 1]
    return out


def greens_numeric(lap: LaplaceMatrix, t, epsabs: float = 1e-11, check: bool = True, derivative: bool = False):
    """Bromwich inversion along Re s = 1/t.

    With ``derivative=True`` returns dG/dt, obtained from the transform
    s G(s) - 1/(s+1) (whose inverse is G'(t) - e^{-t}).
    """
    if check:
        check_stable(lap)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ConfigError("greens_numeric requires t >= 0")
    marks = list(np.sqrt(lap.k_diag))
    for b in lap.baths:
        if not b.strict_ohmic:
            marks.append(b.lambda_cut)

    if derivative:
        def func(s):
            g = lap(np.array([s]))[0]
            return s * g - np.eye(2) / (s + 1.0)
    else:
        def func(s):
            return lap(np.array([s]))[0]

    out = np.zeros(ts.shape + (2, 2))
    for k, tk in enumerate(ts):
        if tk == 0.0:
            out[k] = np.eye(2) if derivative else 0.0
            continue
        out[k] = _bromwich_one(func, tk, marks, epsabs)
        if derivative:
            out[k] += math.exp(-tk) * np.eye(2)
    return out if np.ndim(t) else out[0]


def greens_companion(w, delta, psi, g1, g2, t):
    """Exact strict-Ohmic kernel and its derivative from expm of the
    first-order system  d/dt (q, p) = [[0, 1], [-K, -Gamma]] (q, p)."""
    k = np.array([(w - delta / 2) ** 2, (w + delta / 2) ** 2])
    a = _companion(k, _damping_matrix(psi, g1, g2))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    g = np.empty(ts.shape + (2, 2))
    gd = np.empty_like(g)
    for i, tk in enumerate(ts):
        e = linalg.expm(a * tk)
        g[i], gd[i] = e[:2, 2:], e[2:, 2:]
    if np.ndim(t) == 0:
        return g[0], gd[0]
    return g, gd


def slow_damping_rate(w, delta, psi, g1, g2) -> float:
    """Smallest decay rate -Re(s) among the exact strict-Ohmic poles."""
    k = np.array([(w - delta / 2) ** 2, (w + delta / 2) ** 2])
    ev = np.linalg.eigvals(_companion(k, _damping_matrix(psi, g1, g2)))
    return float(np.min(-ev.real))


# ---------------------------------------------------------------- closed forms


def _sin_over(x, t):
    """sin(x t)/x, continuous through x = 0 and valid for complex x."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x * t) < 1e-6
    xs = np.where(small, 1.0, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.sin(xs * t) / xs
    return np.where(small, t * (1.0 - (x * t) ** 2 / 6.0), val)


def damped_sine(w, gamma, t):
    """G(t) = e^{-gamma t/2} sin(W1 t)/W1, W1 = sqrt(W^2 - gamma^2/4), and G'(t).

    Overdamped parameters continue to sinh(kappa t)/kappa.
    """
    t = np.asarray(t, dtype=float)
    w1 = np.sqrt(complex(w * w - gamma * gamma / 4.0))
    env = np.exp(-gamma * t / 2.0)
    so = _sin_over(w1, t)
    co = np.cos(w1 * t)
    g = (env * so).real
    gd = (env * (co - 0.5 * gamma * so)).real
    return g, gd


def _rotate(psi, d1, d2):
    v = rotation(psi)
    d1 = np.asarray(d1)
    out = np.zeros(d1.shape + (2, 2))
    for j, d in enumerate((d1, d2)):
        out += np.asarray(d)[..., None, None] * np.outer(v[:, j], v[:, j])
    return out


def greens_strong_delta0(w, psi, g1, g2, t, derivative: bool = False):
    """V(psi) diag(G_1, G_2) V(psi)^T for degenerate renormalized modes."""
    a1, b1 = damped_sine(w, g1, t)
    a2, b2 = damped_sine(w, g2, t)
    if derivative:
        return _rotate(psi, b1, b2)
    return _rotate(psi, a1, a2)


def greens_one_bath(w, psi, g1, t, derivative: bool = False):
    return greens_strong_delta0(w, psi, g1, 0.0, t, derivative)


def weak_rates(w, delta, psi, g1, g2):
    """Omega_+-, Gamma_+- of the weakly damped normal modes."""
    c2, s2 = math.cos(psi) ** 2, math.sin(psi) ** 2
    return (w - delta / 2, w + delta / 2), (g1 * c2 + g2 * s2, g2 * c2 + g1 * s2)


def _weak_poles(w, delta, psi, g1, g2, pole_shift):
    (op, om), (gp, gm) = weak_rates(w, delta, psi, g1, g2)
    if pole_shift:
        # level repulsion from the off-diagonal damping, second order in gamma
        k2 = ((g2 - g1) * math.sin(2 * psi)) ** 2 / (8.0 * w * delta)
        wp2 = op * op * (1 + k2) - gp * gp / 4
        wm2 = om * om * (1 - k2) - gm * gm / 4
    else:
        wp2, wm2 = op * op, om * om
    zp = complex(-gp / 2, 0) + 1j * np.sqrt(complex(wp2))
    zm = complex(-gm / 2, 0) + 1j * np.sqrt(complex(wm2))
    return zp, zm


def greens_weak(w, delta, psi, g1, g2, t, pole_shift: bool = True, derivative: bool = False):
    """Weak-damping kernel.

    Diagonal: g_+- = e^{-Gamma_+- t/2} sin(w_+- t)/w_+-. Off-diagonal:
    inverse transform of -c s (gamma_1 - gamma_2) s / (D_+(s) D_-(s)) by
    partial fractions over the four weak-coupling poles; to leading order this
    is (gamma_2 - gamma_1) sin(2 psi) / (4 W Delta) * h(t) with
    h = e^{-Gamma_+ t/2} cos(Omega_+ t) - e^{-Gamma_- t/2} cos(Omega_- t).

    ``pole_shift`` adds the O(gamma^2/(W Delta)) frequency corrections
    (damped frequency and level repulsion); with it off, w_+- = Omega_+-.
    """
    if delta == 0:
        raise ConfigError("weak-coupling kernel requires Delta != 0")
    t = np.asarray(t, dtype=float)
    zp, zm = _weak_poles(w, delta, psi, g1, g2, pole_shift)
    poles = np.array([zp, np.conj(zp), zm, np.conj(zm)])
    theta = (g1 - g2) * math.cos(psi) * math.sin(psi)
    tt = t[..., None]
    ex = np.exp(poles * tt)
    if derivative:
        ex = ex * poles
    # d_+(s) = (s - zp)(s - zp*), likewise d_-
    diag_p = (ex[..., 0] - ex[..., 1]) / (zp - np.conj(zp))
    diag_m = (ex[..., 2] - ex[..., 3]) / (zm - np.conj(zm))
    off = 0.0
    for k, p in enumerate(poles):
        others = np.delete(poles, k)
        off = off + (-theta * p) * ex[..., k] / np.prod(p - others)
    out = np.zeros(t.shape + (2, 2))
    out[..., 0, 0] = diag_p.real
    out[..., 1, 1] = diag_m.real
    out[..., 0, 1] = out[..., 1, 0] = np.real(off)
    return out


# ---------------------------------------------------------------- kernel object


@dataclass(frozen=True)
class GreensKernel:
    regime: Regime
    w: float
    delta: float
    psi: float
    gamma1: float
    gamma2: float
    laplace: LaplaceMatrix | None = field(default=None, compare=False, repr=False)
    pole_shift: bool = True

    def __post_init__(self):
        if self.regime in (Regime.STRONG_DELTA0, Regime.ONE_BATH) and self.delta != 0:
            raise ConfigError(f"{self.regime.value} requires Delta = 0")
        if self.regime is Regime.ONE_BATH and self.gamma2 != 0:
            raise ConfigError("OneBath requires gamma2 = 0")
        if self.regime is Regime.NUMERIC and self.laplace is None:
            raise ConfigError("numeric regime needs a LaplaceMatrix")

    @property
    def derived(self) -> dict:
        if self.regime in (Regime.STRONG_DELTA0, Regime.ONE_BATH):
            w1 = np.sqrt(complex(self.w**2 - self.gamma1**2 / 4))
            w2 = np.sqrt(complex(self.w**2 - self.gamma2**2 / 4))
            return {"W1": w1, "W2": w2}
        (op, om), (gp, gm) = weak_rates(self.w, self.delta, self.psi, self.gamma1, self.gamma2)
        return {"Omega_plus": op, "Omega_minus": om, "Gamma_plus": gp, "Gamma_minus": gm}

    def _eval(self, t, derivative):
        if self.regime in (Regime.STRONG_DELTA0, Regime.ONE_BATH):
            return greens_strong_delta0(self.w, self.psi, self.gamma1, self.gamma2, t, derivative)
        if self.regime is Regime.WEAK:
            return greens_weak(self.w, self.delta, self.psi, self.gamma1, self.gamma2, t, self.pole_shift,
                               derivative)
        if self.regime is Regime.NUMERIC:
            return greens_numeric(self.laplace, t, derivative=derivative)
        g, gd = greens_companion(self.w, self.delta, self.psi, self.gamma1, self.gamma2, t)
        return gd if derivative else g

    def __call__(self, t):
        return self._eval(t, False)

    def derivative(self, t):
        return self._eval(t, True)


def greens_kernel(w, delta, psi, gamma1, gamma2, regime: Regime | str = Regime.STRONG_DELTA0,
                  laplace: LaplaceMatrix | None = None, pole_shift: bool = True) -> GreensKernel:
    return GreensKernel(Regime(regime), w, delta, psi, gamma1, gamma2, laplace, pole_shift)
