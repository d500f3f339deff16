"""Initial-condition and stationary (noise) correlation functions.

Stationary correlators are thermal integrals of the form

    I[f](tau) = (1/pi) int_R f(w) n(w) e^{i w tau} dw
              = (1/pi) int_0^inf { a coth(w/2T) cos(w tau) - b coth(w/2T) sin(w tau)
                                   - i [a sin(w tau) + b cos(w tau)] } dw,

with f = a + i b on w > 0 and f(-w) = -conj f(w). For rational f this is
evaluated exactly by closing the contour in the upper half-plane: the poles
of f plus the Matsubara poles i nu_l = 2 pi i l T of the Bose factor.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError, NumericalError
from .greens import GreensKernel, Regime, damped_sine, greens_companion, weak_rates
from .model import BathSpec, Cutoff, NormalModeBasis, counterterm_shift, rotation
from .spectral import (
    _sigma_coth,
    oscillatory_integral,
    self_energy,
    spectral_density,
)

__all__ = [
    "Kind",
    "Source",
    "CorrelationSeries",
    "thermal_integral_residues",
    "thermal_integral_quad",
    "coherence_initial_strong",
    "coherence_initial_weak",
    "coherence_initial",
    "initial_correlator_matrix",
    "coherence_noise_strong",
    "coherence_exact_delta0",
    "channel_spectral_weight",
    "F_function",
    "H_function",
    "effective_temperatures",
    "J_function",
    "stationary_strong",
    "stationary_weak",
    "stationary_numeric",
    "high_t_strong",
    "high_t_weak",
    "equilibrium_coherence_weak",
]


class Kind(str, enum.Enum):
    QQ_pp = "QQ_pp"
    QQ_mm = "QQ_mm"
    QQ_pm = "QQ_pm"
    PP_pp = "PP_pp"
    PP_mm = "PP_mm"
    PP_pm = "PP_pm"


class Source(str, enum.Enum):
    INITIAL = "InitialCondition"
    NOISE = "Noise"
    TOTAL = "Total"


@dataclass(frozen=True)
class CorrelationSeries:
    tau_grid: np.ndarray
    values: np.ndarray
    kind: Kind
    source: Source


# ---------------------------------------------------------------- thermal integrals

_MATSUBARA_CHUNK = 4096
_MATSUBARA_CAP = 400_000


def _matsubara_sum(fiv, temperature: float, tau: float) -> complex:
    """T sum_{l>=1} f(i nu_l) e^{-nu_l tau}, nu_l = 2 pi l T.

    Stops once the next term is below 1e-12 of the partial sum and
    l > 2 + 2 pi T tau; beyond a hard cap the remainder is replaced by its
    midpoint-rule integral.
    """
    total = 0.0j
    guard = 2.0 + 2.0 * math.pi * temperature * tau
    start = 1
    while start <= _MATSUBARA_CAP:
        # one extra term so the last partial sum also sees its successor
        ls = np.arange(start, start + _MATSUBARA_CHUNK + 1, dtype=float)
        nu = 2.0 * math.pi * temperature * ls
        ahead = temperature * fiv(nu) * np.exp(-nu * tau)
        terms, ls = ahead[:-1], ls[:-1]
        partial = total + np.cumsum(terms)
        small = (np.abs(ahead[1:]) < 1e-12 * np.maximum(np.abs(partial), 1e-300)) & (ls > guard)
        hit = np.flatnonzero(small)
        if hit.size:
            return complex(partial[hit[0]])
        total = complex(partial[-1])
        start += _MATSUBARA_CHUNK
    nu0 = 2.0 * math.pi * temperature * (start - 0.5)
    re = integrate.quad(lambda v: (fiv(np.array([v]))[0] * math.exp(-v * tau)).real, nu0, np.inf)[0]
    im = integrate.quad(lambda v: (fiv(np.array([v]))[0] * math.exp(-v * tau)).imag, nu0, np.inf)[0]
    return total + complex(re, im) / (2.0 * math.pi)


def _bose(temperature: float, z):
    z = np.asarray(z, dtype=complex)
    if temperature == 0.0:
        return np.where(z.real < 0, -1.0 + 0j, 0.0 + 0j)
    with np.errstate(over="ignore"):
        x = z / temperature
        out = np.where(x.real > 700, 0.0 + 0j, 1.0 / np.expm1(np.minimum(x.real, 700) + 1j * x.imag))
    return out


def thermal_integral_residues(num, den, temperature: float, tau: float) -> complex:
    """Exact (1/pi) int_R f n e^{i w tau} dw for rational f = num/den, tau >= 0.

    ``num``/``den`` are polynomial coefficients (highest degree first). f must
    vanish at w = 0 and decay at least like 1/w (1/w^2 when tau = 0).
    """
    num = np.poly1d(np.asarray(num, dtype=complex))
    den = np.poly1d(np.asarray(den, dtype=complex))
    if tau < 0:
        raise DomainError("residue evaluation requires tau >= 0")
    if abs(num(0.0)) > 1e-14 * max(1.0, np.max(np.abs(num.coeffs))):
        raise DomainError("integrand must vanish at w = 0")
    if tau == 0 and den.order - num.order < 2:
        raise DomainError("integrand decays too slowly for tau = 0")
    roots = np.roots(den.coeffs)
    dden = den.deriv()
    scale = max(1.0, float(np.max(np.abs(roots))))
    upper = roots[roots.imag > 1e-14 * scale]
    for i, r in enumerate(upper):
        if np.any(np.abs(np.delete(upper, i) - r) < 1e-7 * scale):
            raise NumericalError("repeated pole in residue evaluation")
    if temperature == 0.0 and np.any(np.abs(upper.real) < 1e-12 * scale):
        raise NumericalError("pole on the imaginary axis at T = 0")
    res = num(upper) / dden(upper) * _bose(temperature, upper) * np.exp(1j * upper * tau)
    pole_part = complex(np.sum(res))

    def fiv(nu):
        z = 1j * np.asarray(nu, dtype=complex)
        return num(z) / den(z)

    if temperature > 0.0:
        mats = _matsubara_sum(fiv, temperature, tau)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                re = integrate.quad(lambda v: (fiv(v) * math.exp(-v * tau)).real, 0, np.inf,
                                    epsabs=1e-14, epsrel=1e-11, limit=400)[0]
                im = integrate.quad(lambda v: (fiv(v) * math.exp(-v * tau)).imag, 0, np.inf,
                                    epsabs=1e-14, epsrel=1e-11, limit=400)[0]
            except integrate.IntegrationWarning as exc:
                raise NumericalError(f"zero-temperature Matsubara integral failed: {exc}") from exc
        mats = complex(re, im) / (2.0 * math.pi)
    return 2j * (pole_part + mats)


def _a_coth(f, temperature):
    """w -> (Re f(w) * coth, Im f(w) * coth) with the w -> 0 limit handled."""

    def g(w, part):
        if w == 0.0:
            w = 1e-12
        v = f(w)
        v = v.real if part == "re" else v.imag
        if temperature == 0.0:
            return v
        return v / math.tanh(w / (2.0 * temperature))

    return g


def thermal_integral_quad(f, temperature: float, tau: float, upper: float = np.inf, points=None,
                          epsabs: float = 1e-13, epsrel: float = 1e-10) -> complex:
    """Direct quadrature of the thermal integral; f(w) for w > 0 only."""
    if tau < 0:
        # f(-w) = -conj f(w) maps tau -> -tau onto conj with f -> conj f
        return complex(np.conj(thermal_integral_quad(lambda w: np.conj(f(w)), temperature, -tau, upper,
                                                     points, epsabs, epsrel)))
    g = _a_coth(f, temperature)

    def re(w):
        v = f(w if w else 1e-12)
        return v.real

    def im(w):
        v = f(w if w else 1e-12)
        return v.imag

    def oi(func, kind):
        return oscillatory_integral(func, 0.0, upper, tau, kind, epsabs, epsrel, points=points)

    real = oi(lambda w: g(w, "re"), "cos") - oi(lambda w: g(w, "im"), "sin")
    imag = -(oi(re, "sin") + oi(im, "cos"))
    return complex(real, imag) / math.pi


# ---------------------------------------------------------------- initial conditions


def coherence_initial_strong(kernel: GreensKernel, t):
    """<q_+(t) q_-(t)> from the ground-state initial condition, Delta = 0:

        (sin 2psi / 4W) [(G1'^2 + W^2 G1^2) - (G2'^2 + W^2 G2^2)].
    """
    if kernel.regime not in (Regime.STRONG_DELTA0, Regime.ONE_BATH):
        raise ConfigError("coherence_initial_strong needs a StrongDelta0 or OneBath kernel")
    w = kernel.w
    g1, d1 = damped_sine(w, kernel.gamma1, t)
    g2, d2 = damped_sine(w, kernel.gamma2, t)
    return math.sin(2 * kernel.psi) / (4 * w) * ((d1**2 + w * w * g1**2) - (d2**2 + w * w * g2**2))


def coherence_initial_weak(w, delta, psi, g1, g2, t):
    """Weak-coupling initial coherence with interference beats.

    (i kappa / 2) { e^{-Gamma_+ t} + e^{-Gamma_- t}
                    - e^{-(Gamma_+ + Gamma_-) t/2} [X(t) + Y(t)] },
    X = e^{-i Omega_+ t} [cos Omega_- t + i (Omega_-/Omega_+) sin Omega_- t],
    Y = e^{+i Omega_- t} [cos Omega_+ t - i (Omega_+/Omega_-) sin Omega_+ t],
    kappa = (gamma_2 - gamma_1) sin 2psi / (4 W Delta).
    """
    t = np.asarray(t, dtype=float)
    (op, om), (gp, gm) = weak_rates(w, delta, psi, g1, g2)
    kappa = (g2 - g1) * math.sin(2 * psi) / (4 * w * delta)
    x = np.exp(-1j * op * t) * (np.cos(om * t) + 1j * (om / op) * np.sin(om * t))
    y = np.exp(1j * om * t) * (np.cos(op * t) - 1j * (op / om) * np.sin(op * t))
    br = np.exp(-gp * t) + np.exp(-gm * t) - np.exp(-0.5 * (gp + gm) * t) * (x + y)
    return 0.5j * kappa * br


def initial_correlator_matrix(g, gd, omega_pm):
    """<q(t) q(t)^T> from the normal-mode ground state given G(t), G'(t)."""
    p = np.diag([omega_pm[0] / 2, omega_pm[1] / 2])
    q = np.diag([1 / (2 * omega_pm[0]), 1 / (2 * omega_pm[1])])
    gt = np.swapaxes(g, -1, -2)
    gdt = np.swapaxes(gd, -1, -2)
    return g @ p @ gt + gd @ q @ gdt + 0.5j * (gd @ gt - g @ gdt)


def coherence_initial(w, delta, psi, g1, g2, t, kernel: GreensKernel | None = None):
    """General initial-condition coherence; exact strict-Ohmic kernel by default."""
    if kernel is None:
        g, gd = greens_companion(w, delta, psi, g1, g2, t)
    else:
        g, gd = kernel(t), kernel.derivative(t)
    m = initial_correlator_matrix(np.asarray(g), np.asarray(gd), (w - delta / 2, w + delta / 2))
    return m[..., 0, 1]


def _finite_time_parts(w, gamma, t, omega):
    """B(w, t) = int_0^t G(a) e^{-i w a} da written as P e^{-i w t} - Q.

    G = e^{-gamma a/2} sin(W1 a)/W1. P and Q are smooth in w, which lets the
    oscillatory cross term of |B|^2 go to a Fourier-weight integrator.
    """
    w1 = np.sqrt(complex(w * w - gamma * gamma / 4))
    if abs(w1) < 1e-9:
        w1 = 1e-9 + 0j
    om = np.asarray(omega, dtype=float)
    p = q = 0.0
    for z, eps in ((-gamma / 2 + 1j * w1, 1 / (2j * w1)), (-gamma / 2 - 1j * w1, -1 / (2j * w1))):
        u = eps / (z - 1j * om)
        p = p + u * np.exp(z * t)
        q = q + u
    return p, q


def _noise_band(bath: BathSpec) -> float:
    # the switch-on transient makes int sigma |B|^2 grow like ln(Lambda): keep the bath's own band
    if bath.strict_ohmic or bath.cutoff_family is Cutoff.SHARP:
        return bath.lambda_cut
    return np.inf


def coherence_noise_strong(w, psi, bath1: BathSpec, bath2: BathSpec, t, epsabs: float = 1e-12,
                           epsrel: float = 1e-10):
    """Finite-time noise part of <q_+(t) q_-(t)> for Delta = 0:

    cos psi sin psi (1/pi) int_0^Lambda [sigma_1 coth_1 |B_1|^2 - sigma_2 coth_2 |B_2|^2] dw,
    B_j(w, t) = int_0^t G_j(a) e^{-i w a} da with the strict Ohmic G_j.

    The integral is cut at the bath bandwidth (sharp and strict Ohmic baths):
    |B_j|^2 ~ G_j(t)^2 / w^2 at large w, so the unbounded integral diverges.
    """
    cs = math.cos(psi) * math.sin(psi)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(ts.shape)
    for k, tk in enumerate(ts):
        if tk == 0.0 or cs == 0.0:
            continue
        total = 0.0
        for sign, bath in ((1.0, bath1), (-1.0, bath2)):
            if bath.gamma == 0.0:
                continue
            band = bath.replace(strict_ohmic=False, cutoff_family=Cutoff.SHARP) if bath.strict_ohmic else bath
            upper = _noise_band(bath)

            def weight(om, band=band):
                return _sigma_coth(band, max(om, 1e-300))

            def smooth(om, bath=bath, weight=weight):
                p, q = _finite_time_parts(w, bath.gamma, tk, om)
                return float(weight(om) * (abs(p) ** 2 + abs(q) ** 2))

            def cross(om, part, bath=bath, weight=weight):
                p, q = _finite_time_parts(w, bath.gamma, tk, om)
                v = p * np.conj(q)
                return float(weight(om) * (v.real if part == "re" else v.imag))

            marks = [w, 2 * w] if (np.isinf(upper) or w < upper) else []
            val = oscillatory_integral(smooth, 0.0, upper, 0.0, "cos", epsabs, epsrel, points=marks)
            val -= 2 * oscillatory_integral(lambda o: cross(o, "re"), 0.0, upper, tk, "cos", epsabs, epsrel,
                                            points=marks)
            val -= 2 * oscillatory_integral(lambda o: cross(o, "im"), 0.0, upper, tk, "sin", epsabs, epsrel,
                                            points=marks)
            total += sign * val
        out[k] = cs * total / math.pi
    return out if np.ndim(t) else float(out[0])


def _gl_nodes(edges, order):
    x, wts = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * x).ravel(), (half * wts).ravel()


def _band_nodes(w, gamma, upper, t_max, order=10):
    """Gauss-Legendre nodes on (0, upper) resolving the resonance at W and phases up to t_max."""
    h = min(0.5 * math.pi / max(t_max, 1e-9), upper / 200.0, w / 4.0)
    half_width = max(gamma, 1e-6) / 2.0
    lo, hi = max(w - 40 * half_width, 0.0), min(w + 40 * half_width, upper)
    fine = min(h, half_width / 4.0)
    pieces = []
    for a, b, step in ((0.0, lo, h), (lo, hi, fine), (hi, upper, h)):
        if b > a:
            pieces.append(np.linspace(a, b, max(1, int(math.ceil((b - a) / step))) + 1))
    edges = np.unique(np.concatenate(pieces))
    return _gl_nodes(edges, order)


def channel_spectral_weight(w, bath: BathSpec, omega):
    """Im G(w + i0) for one Delta = 0 channel with a finite-bandwidth sharp bath.

    sigma / [(W^2 - w^2 + Re chi + delta Omega)^2 + sigma^2]; G(t) then follows as
    (2/pi) int_0^Lambda rho(w) sin(w t) dw.
    """
    if bath.strict_ohmic or bath.cutoff_family is not Cutoff.SHARP:
        raise ConfigError("finite-bandwidth channel weight needs a sharp, non-strict bath")
    se = self_energy(bath, omega)
    re = w * w - np.asarray(omega) ** 2 + se.re + counterterm_shift(bath)
    return se.im / (re * re + se.im**2)


def coherence_exact_delta0(w, psi, bath1: BathSpec, bath2: BathSpec, t, order: int = 10):
    """Total <q_+(t) q_-(t)> at Delta = 0 for sharp baths of finite bandwidth.

    Same decomposition as the strict Ohmic closed forms (ground-state initial
    part plus finite-time noise part) but every channel propagator keeps the
    full cutoff-dependent self-energy. Differences from the strict Ohmic
    result are O(gamma / Lambda).
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise DomainError("t must be >= 0")
    cs = math.cos(psi) * math.sin(psi)
    t_max = float(ts.max()) if ts.size else 0.0
    order_t = np.argsort(ts)
    # time quadrature nodes: pieces of length <= 1 / Lambda-scale between consecutive output times
    upper = max(bath1.lambda_cut, bath2.lambda_cut)
    cuts = np.unique(np.concatenate([[0.0], ts[order_t]]))
    seg_len = min(1.0, 2.0 * math.pi / upper)
    edges = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        edges.append(np.linspace(a, b, max(1, int(math.ceil((b - a) / seg_len))) + 1)[:-1])
    edges = np.concatenate(edges + [[cuts[-1]]]) if len(cuts) > 1 else np.array([0.0])
    if edges.size > 1:
        a_nodes, a_wts = _gl_nodes(edges, 16)
        seg_id = np.repeat(np.arange(edges.size - 1), 16)
    else:
        a_nodes = a_wts = np.zeros(0)
        seg_id = np.zeros(0, dtype=int)
    out_pos = np.searchsorted(edges, ts) - 1  # last segment index ending at each t

    per = []
    for bath in (bath1, bath2):
        if bath.gamma == 0.0:
            gt, gdt = np.sin(w * ts) / w, np.cos(w * ts)
            per.append((gt, gdt, np.zeros(ts.shape)))
            continue
        om, ow = _band_nodes(w, bath.gamma, bath.lambda_cut, t_max, order)
        rho = (2.0 / math.pi) * channel_spectral_weight(w, bath, om) * ow
        gt = np.sin(np.outer(ts, om)) @ rho
        gdt = np.cos(np.outer(ts, om)) @ (rho * om)
        ga = np.sin(np.outer(a_nodes, om)) @ rho if a_nodes.size else np.zeros(0)
        weight = np.array([_sigma_coth(bath, x) for x in om]) * ow
        noise = np.zeros(ts.shape)
        chunk = max(1, 4_000_000 // max(a_nodes.size, 1))
        for s0 in range(0, om.size, chunk):
            sl = slice(s0, s0 + chunk)
            phase = np.exp(-1j * np.outer(om[sl], a_nodes)) * (ga * a_wts)
            seg = np.zeros((phase.shape[0], edges.size - 1), dtype=complex)
            np.add.at(seg.T, seg_id, phase.T)
            cum = np.cumsum(seg, axis=1)
            b = np.where(out_pos[None, :] >= 0, cum[:, np.maximum(out_pos, 0)], 0.0)
            noise += weight[sl] @ (np.abs(b) ** 2)
        per.append((gt, gdt, noise / math.pi))
    (g1, d1, n1), (g2, d2, n2) = per
    initial = math.sin(2 * psi) / (4 * w) * ((d1**2 + w * w * g1**2) - (d2**2 + w * w * g2**2))
    total = initial + cs * (n1 - n2)
    return total if np.ndim(t) else float(total[0])


# ---------------------------------------------------------------- F, H (Delta = 0)


def _coth(z):
    return 1.0 / np.tanh(z)


def _fh_exponential_part(gamma, w, temperature, tau, second_derivative):
    w1 = np.sqrt(complex(w * w - gamma * gamma / 4))
    z1, z2 = -gamma / 2 + 1j * w1, -gamma / 2 - 1j * w1
    if temperature == 0.0:
        cp, cm = 1.0, 1.0
    else:
        cp = _coth((w1 + 0.5j * gamma) / (2 * temperature))
        cm = _coth((w1 - 0.5j * gamma) / (2 * temperature))
    p = (cp - 1.0) / (4 * w1)
    q = (cm + 1.0) / (4 * w1)
    if second_derivative:
        return -(p * z1 * z1 * np.exp(z1 * tau) + q * z2 * z2 * np.exp(z2 * tau))
    return p * np.exp(z1 * tau) + q * np.exp(z2 * tau)


def _fh_matsubara_part(gamma, w, temperature, tau, momentum):
    def fiv(nu):
        d = (nu * nu + w * w) ** 2 - gamma * gamma * nu * nu
        return (nu**3 if momentum else -nu) * gamma / d

    if temperature > 0.0:
        return 2.0 * _matsubara_sum(fiv, temperature, tau)
    # T -> 0: 2T sum -> (1/pi) int_0^inf d nu
    val = integrate.quad(lambda v: fiv(np.array(v)) * math.exp(-v * tau), 0, np.inf, epsabs=1e-14, epsrel=1e-11,
                         limit=400)[0]
    return val / math.pi


def _h_coincident(bath: BathSpec, w: float) -> float:
    """H(0) with a sharp cutoff Lambda on the frequency integral.

    T = 0 part: (gamma/2pi) int_0^{Lambda^2} x dx / ((x - W^2)^2 + gamma^2 x), done
    in closed form; finite T adds (1/pi) int_0^Lambda gamma w^3 2n(w) / D dw.
    """
    g, lam, T = bath.gamma, bath.lambda_cut, bath.temperature
    if g == 0.0:
        return 0.0
    b = 2 * w * w - g * g
    disc = np.sqrt(complex(b * b - 4 * w**4))
    xp, xm = (b + disc) / 2, (b - disc) / 2
    L = lam * lam

    def lg(x0):
        return np.log((L - x0) / (-x0))

    val = (xp * lg(xp) - xm * lg(xm)) / (xp - xm)
    zero_t = g / (2 * math.pi) * val.real
    if T == 0.0:
        return float(zero_t)

    def rem(om):
        if om == 0.0:
            return 0.0
        return g * om**3 * 2.0 / math.expm1(om / T) / ((w * w - om * om) ** 2 + g * g * om * om)

    upper = min(lam, 60.0 * T + 10 * w)
    thermal = integrate.quad(rem, 0.0, upper, limit=400, points=[w] if w < upper else None)[0] / math.pi
    return float(zero_t + thermal)


def _fh(bath: BathSpec, w: float, tau, momentum: bool):
    g, T = bath.gamma, bath.temperature
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.zeros(taus.shape, dtype=complex)
    overdamped = g >= 2 * w * (1 - 1e-9)
    for k, tk in enumerate(taus):
        if g == 0.0:
            continue
        at = abs(tk)
        if momentum and at == 0.0:
            if bath.strict_ohmic:
                raise DomainError(
                    "coincident momentum correlator diverges for a strict Ohmic bath: "
                    "supply a finite-bandwidth bath or evaluate at tau >= 1/Lambda"
                )
            out[k] = _h_coincident(bath, w)
            continue
        if overdamped and T == 0.0:
            val = _fh_quad(bath, w, at, momentum)
        else:
            val = _fh_exponential_part(g, w, T, at, momentum) + _fh_matsubara_part(g, w, T, at, momentum)
        out[k] = val if tk >= 0 else np.conj(val)
    return out if np.ndim(tau) else complex(out[0])


def _fh_quad(bath: BathSpec, w: float, tau: float, momentum: bool, upper=np.inf) -> complex:
    g = bath.gamma

    def f(om):
        d = (w * w - om * om) ** 2 + g * g * om * om
        return complex(g * om * (om * om if momentum else 1.0) / d)

    marks = [max(w - 3 * g, w / 2), w, w + 3 * g] if g < w else [w]
    return thermal_integral_quad(f, bath.temperature, tau, upper=upper, points=marks)


def F_function(bath: BathSpec, w: float, tau):
    """F(tau) = (1/pi) int_R sigma(w) n(w) |g(w)|^2 e^{i w tau} dw,
    g(w) = 1/(W^2 - w^2 + i gamma w): exponential (pole) part plus the
    Matsubara series. Negative tau via F(-tau) = conj F(tau)."""
    return _fh(bath, w, tau, momentum=False)


def H_function(bath: BathSpec, w: float, tau):
    """H = -F''; at tau = 0 requires a finite-bandwidth bath."""
    return _fh(bath, w, tau, momentum=True)


def effective_temperatures(psi, t1, t2):
    c2, s2 = math.cos(psi) ** 2, math.sin(psi) ** 2
    return c2 * t1 + s2 * t2, s2 * t1 + c2 * t2


# ---------------------------------------------------------------- J (weak coupling)


def _mode_poly(omega, gam, sign):
    # g(i z) for sign=+1: 1/(-z^2 + i Gamma z + Omega^2 + Gamma^2/4); sign=-1 gives g(-i z)
    return np.array([-1.0, sign * 1j * gam, omega * omega + gam * gam / 4], dtype=complex)


def J_function(bath: BathSpec, alpha: str, beta: str, omega_pm, gamma_pm, tau, momentum: bool = False):
    """J^{(j)}_{alpha beta}(tau) = (1/pi) int_R sigma_j n_j g_alpha(i w) conj(g_beta(i w)) e^{i w tau} dw

    with g_+-(s) = 1/((s + Gamma_+-/2)^2 + Omega_+-^2). ``momentum`` inserts w^2.
    Evaluated exactly by residues; J_{ab}(-tau) = conj J_{ba}(tau).
    """
    idx = {"+": 0, "-": 1}
    a, b = idx[alpha], idx[beta]
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.zeros(taus.shape, dtype=complex)
    if bath.gamma == 0.0:
        return out if np.ndim(tau) else 0j
    for k, tk in enumerate(taus):
        if tk < 0:
            a_, b_ = b, a
        else:
            a_, b_ = a, b
        den = np.polymul(_mode_poly(omega_pm[a_], gamma_pm[a_], 1), _mode_poly(omega_pm[b_], gamma_pm[b_], -1))
        num = np.array([bath.gamma, 0.0], dtype=complex)
        if momentum:
            num = np.polymul(num, [1.0, 0.0, 0.0])
        val = thermal_integral_residues(num, den, bath.temperature, abs(tk))
        out[k] = val if tk >= 0 else np.conj(val)
    return out if np.ndim(tau) else complex(out[0])


# ---------------------------------------------------------------- assembled correlators


def _kinds(observable):
    if observable == "q":
        return Kind.QQ_pp, Kind.QQ_mm, Kind.QQ_pm
    if observable == "p":
        return Kind.PP_pp, Kind.PP_mm, Kind.PP_pm
    raise ConfigError("observable must be 'q' or 'p'")


def stationary_strong(basis: NormalModeBasis, baths, tau, observable: str = "q"):
    """Stationary (noise) correlators for Delta = 0: C_++ = c^2 X_1 + s^2 X_2,
    C_-- = s^2 X_1 + c^2 X_2, C_+- = c s (X_1 - X_2), X = F (coordinates) or H (momenta)."""
    if abs(basis.detuning) > 1e-12 * basis.w_mean:
        raise ConfigError("stationary_strong requires Delta = 0")
    b1, b2 = baths
    fn = F_function if observable == "q" else H_function
    _kinds(observable)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    x1 = np.atleast_1d(fn(b1, basis.w_mean, taus))
    x2 = np.atleast_1d(fn(b2, basis.w_mean, taus))
    c, s = math.cos(basis.psi_angle), math.sin(basis.psi_angle)
    vals = (c * c * x1 + s * s * x2, s * s * x1 + c * c * x2, c * s * (x1 - x2))
    return tuple(CorrelationSeries(taus, v, k, Source.NOISE) for v, k in zip(vals, _kinds(observable)))


def stationary_weak(basis: NormalModeBasis, baths, tau, observable: str = "q"):
    """Weak-coupling stationary correlators assembled from J functions:
    C_++ = c^2 J1_++ + s^2 J2_++, C_-- = s^2 J1_-- + c^2 J2_--,
    C_+- = c s (J1_+- - J2_+-)."""
    b1, b2 = baths
    psi = basis.psi_angle
    (op, om), (gp, gm) = weak_rates(basis.w_mean, basis.detuning, psi, b1.gamma, b2.gamma)
    opm, gpm = (basis.omega_plus, basis.omega_minus), (gp, gm)
    mom = observable == "p"
    kinds = _kinds(observable)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    c, s = math.cos(psi), math.sin(psi)

    def j(bath, a, b):
        return np.atleast_1d(J_function(bath, a, b, opm, gpm, taus, mom))

    pp = c * c * j(b1, "+", "+") + s * s * j(b2, "+", "+")
    mm = s * s * j(b1, "-", "-") + c * c * j(b2, "-", "-")
    pm = c * s * (j(b1, "+", "-") - j(b2, "+", "-"))
    return tuple(CorrelationSeries(taus, v, k, Source.NOISE) for v, k in zip((pp, mm, pm), kinds))


def _axis_propagator(basis: NormalModeBasis, baths, omega: float, counterterm: bool = True) -> np.ndarray:
    """G(s = i w + 0) on the real frequency axis."""
    k = np.diag(basis.frequencies_squared).astype(complex) - omega * omega * np.eye(2)
    v = rotation(basis.psi_angle)
    for j, bath in enumerate(baths):
        if bath.strict_ohmic:
            a = 1j * bath.gamma * omega
        else:
            se = self_energy(bath, omega)
            a = complex(se.re, se.im) + counterterm_shift(bath)
        if not counterterm:
            a -= counterterm_shift(bath)
        k += a * np.outer(v[:, j], v[:, j])
    return np.linalg.inv(k)


def stationary_numeric(basis: NormalModeBasis, baths, tau, observable: str = "q", element=(0, 1),
                       epsabs: float = 1e-12, epsrel: float = 1e-9):
    """Exact stationary correlator by frequency quadrature with the full G(i w):

    C_ab(tau) = sum_j (1/pi) int_R sigma_j n_j [G v_j]_a conj([G v_j]_b) e^{i w tau} dw.
    """
    v = rotation(basis.psi_angle)
    a, b = element
    mom = observable == "p"
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.zeros(taus.shape, dtype=complex)
    marks = [basis.omega_plus, basis.omega_minus]
    for j, bath in enumerate(baths):
        if bath.gamma == 0.0:
            continue
        finite = not bath.strict_ohmic and bath.cutoff_family.value == "sharp"
        upper = bath.lambda_cut * (1 - 1e-12) if finite else np.inf

        def f(om, j=j, bath=bath):
            gv = _axis_propagator(basis, baths, om) @ v[:, j]
            val = spectral_density(bath, om) * gv[a] * np.conj(gv[b])
            return complex(val * (om * om if mom else 1.0))

        for k, tk in enumerate(taus):
            pts = [m for m in marks if m < upper] if np.isfinite(upper) else None
            out[k] += thermal_integral_quad(f, bath.temperature, tk, upper=upper, points=pts, epsabs=epsabs,
                                            epsrel=epsrel)
    return out if np.ndim(tau) else complex(out[0])


# ---------------------------------------------------------------- high-T limits


def high_t_strong(w, psi, t1, t2):
    """Classical equal-time values for Delta = 0: (T+_eff/W^2, T-_eff/W^2, sin2psi (T1-T2)/(2W^2))."""
    tp, tm = effective_temperatures(psi, t1, t2)
    return tp / w**2, tm / w**2, math.sin(2 * psi) * (t1 - t2) / (2 * w**2)


def high_t_weak(w, delta, psi, g1, g2, t1, t2):
    """High-temperature weak-coupling values of C_++, C_--, C_+- from the J assembly."""
    (op, om), (gp, gm) = weak_rates(w, delta, psi, g1, g2)
    c2, s2 = math.cos(psi) ** 2, math.sin(psi) ** 2
    pp = (c2 * t1 * g1 + s2 * t2 * g2) / (op * op * gp)
    mm = (s2 * t1 * g1 + c2 * t2 * g2) / (om * om * gm)
    pm = math.cos(psi) * math.sin(psi) * (g1 + g2) / (2 * (w * delta) ** 2) * (t1 * g1 - t2 * g2)
    return pp, mm, pm


def equilibrium_coherence_weak(w, delta, psi, g1, g2, temperature):
    return math.cos(psi) * math.sin(psi) * (temperature / w**2) * (g1 * g1 - g2 * g2) / (2 * delta**2)
