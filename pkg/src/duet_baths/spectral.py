"""Spectral densities, self-energies, Bose occupation and bath noise kernels."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import sici

from .errors import DomainError, NumericalError
from .model import BathSpec, Cutoff, counterterm_shift

__all__ = [
    "SelfEnergy",
    "DEFAULT_EPSABS",
    "DEFAULT_EPSREL",
    "spectral_density",
    "self_energy",
    "renormalized_self_energy",
    "occupation",
    "coth_half",
    "noise_kernel",
    "oscillatory_integral",
]

DEFAULT_EPSABS = 1e-10
DEFAULT_EPSREL = 1e-8
# |tau| * support above which QAWO/QAWF replaces plain adaptive quadrature
FILON_THRESHOLD = 50.0


@dataclass(frozen=True)
class SelfEnergy:
    re: np.ndarray | float
    im: np.ndarray | float


def spectral_density(bath: BathSpec, omega):
    w = np.asarray(omega, dtype=float)
    g, lam = bath.gamma, bath.lambda_cut
    if bath.strict_ohmic:
        out = g * w
    elif bath.cutoff_family is Cutoff.SHARP:
        out = np.where(np.abs(w) < lam, g * w, 0.0)
    elif bath.cutoff_family is Cutoff.DRUDE:
        out = w * g * lam**2 / (lam**2 + w**2)
    else:
        out = g * w * np.exp(-np.abs(w) / lam)
    return out if out.ndim else float(out)


def _exp_cutoff_re(bath: BathSpec, w: float) -> float:
    # Re chi(w) = -(2/pi) P int_0^inf sigma(x) x / (x^2 - w^2) dx
    g, lam = bath.gamma, bath.lambda_cut
    if w == 0.0:
        return -2.0 * g * lam / math.pi
    w = abs(w)

    def f(x):
        return g * x * x * math.exp(-x / lam) / (x + w)

    upper = 2 * w + 60 * lam
    pv, _ = integrate.quad(f, 0.0, upper, weight="cauchy", wvar=w, limit=400)
    tail, _ = integrate.quad(lambda x: g * x * x * math.exp(-x / lam) / (x * x - w * w), upper, np.inf)
    return -(2.0 / math.pi) * (pv + tail)


def self_energy(bath: BathSpec, omega) -> SelfEnergy:
    """chi_j(omega) on the real axis: Im chi = sigma, Re chi from Kramers-Kronig."""
    w = np.asarray(omega, dtype=float)
    g, lam = bath.gamma, bath.lambda_cut
    im = spectral_density(bath, w)
    if bath.strict_ohmic:
        re = np.full_like(w, -2.0 * g * lam / math.pi)
    elif bath.cutoff_family is Cutoff.SHARP:
        if np.any(np.abs(w) >= lam):
            raise DomainError("sharp-cutoff self-energy requires |omega| < Lambda")
        with np.errstate(divide="ignore", invalid="ignore"):
            logt = np.where(w == 0, 0.0, w * np.log(np.abs((lam - w) / (lam + w))))
        re = -2.0 * g * lam / math.pi - g * logt / math.pi
    elif bath.cutoff_family is Cutoff.DRUDE:
        re = -g * lam**3 / (lam**2 + w**2)
    else:
        re = np.vectorize(lambda x: _exp_cutoff_re(bath, float(x)))(w)
    if w.ndim == 0:
        return SelfEnergy(float(re), float(im))
    return SelfEnergy(re, im)


def renormalized_self_energy(bath: BathSpec, s, counterterm: bool = True):
    """Laplace-domain self-energy plus counterterm, a(s) = Sigma(s) + delta Omega.

    Sigma(s) = -(2/pi) int_0^inf sigma(w) w / (w^2 + s^2) dw for Re s > 0,
    so that a(s) -> gamma * s in the strict Ohmic limit.
    """
    s = np.asarray(s, dtype=complex)
    g, lam = bath.gamma, bath.lambda_cut
    shift = counterterm_shift(bath)
    if bath.strict_ohmic:
        a = g * s
        return a if counterterm else a - shift
    if bath.cutoff_family is Cutoff.SHARP:
        a = (2.0 * g / math.pi) * s * np.arctan(lam / s)
    elif bath.cutoff_family is Cutoff.DRUDE:
        a = g * lam * s / (lam + s)
    else:
        z = s / lam
        si, ci = sici(z)
        aux = ci * np.sin(z) - (si - math.pi / 2) * np.cos(z)
        a = (2.0 * g / math.pi) * s * aux
    return a if counterterm else a - shift


def occupation(temperature: float, omega):
    """Bose factor; at T = 0 the limit -Theta(-omega)."""
    w = np.asarray(omega, dtype=float)
    if temperature == 0.0:
        out = np.where(w < 0, -1.0, 0.0)
        if np.any(w == 0):
            raise DomainError("occupation undefined at omega = 0")
    else:
        if np.any(w == 0):
            raise DomainError("occupation has a pole at omega = 0")
        out = 1.0 / np.expm1(w / temperature)
    return out if out.ndim else float(out)


def coth_half(temperature: float, omega):
    """coth(omega / 2T) with the T = 0 limit sign(omega)."""
    w = np.asarray(omega, dtype=float)
    if temperature == 0.0:
        return np.sign(w)
    return 1.0 / np.tanh(w / (2.0 * temperature))


def _sigma_coth(bath: BathSpec, w: float) -> float:
    # finite at w -> 0: gamma * 2T for Ohmic-like densities
    T = bath.temperature
    if T == 0.0:
        return spectral_density(bath, w)
    x = w / (2.0 * T)
    if abs(x) < 1e-6:
        return bath.gamma * 2.0 * T * (1.0 + x * x / 3.0)
    return spectral_density(bath, w) / math.tanh(x)


def _quad(f, a, b, epsabs, epsrel, **kw) -> float:
    """quad with warnings promoted to errors after one relaxed retry."""
    for relax in (1.0, 100.0):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                return integrate.quad(f, a, b, epsabs=epsabs * relax, epsrel=epsrel * relax, **kw)[0]
            except integrate.IntegrationWarning as exc:
                last = exc
    raise NumericalError(f"quadrature on [{a}, {b}] did not converge: {last}")


def oscillatory_integral(f, a: float, b: float, freq: float, kind: str, epsabs=DEFAULT_EPSABS,
                         epsrel=DEFAULT_EPSREL, points=None, limit=2000) -> float:
    """int_a^b f(w) cos(freq w) dw (kind='cos') or sin; b may be inf.

    ``points`` marks narrow features (resonances, kinks). On [a, inf) the
    range is split beyond the last mark so that QAWF only sees the smooth
    tail. Finite pieces use QAWO once |freq| * length exceeds the Filon
    threshold and plain adaptive quadrature otherwise.
    """
    marks = sorted(p for p in (points or ()) if a < p < b)
    if np.isinf(b):
        split = max(4.0 * (marks[-1] if marks else 1.0), a + 1.0)
        head = oscillatory_integral(f, a, split, freq, kind, epsabs, epsrel, marks, limit)
        if kind == "sin" and freq == 0.0:
            return head
        if freq == 0.0:
            return head + _quad(f, split, np.inf, epsabs, epsrel, limit=limit)
        tail = _quad(f, split, np.inf, epsabs, 0.0, weight=kind, wvar=abs(freq), limlst=200, limit=limit)
        if kind == "sin" and freq < 0:
            tail = -tail
        return head + tail
    if kind == "sin" and freq == 0.0:
        return 0.0
    trig = math.cos if kind == "cos" else math.sin
    edges = [a] + marks + [b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if abs(freq) * (hi - lo) > FILON_THRESHOLD:
            total += _quad(f, lo, hi, epsabs, epsrel, weight=kind, wvar=freq, limit=limit)
        else:
            total += _quad(lambda x: f(x) * trig(freq * x), lo, hi, epsabs, epsrel, limit=limit)
    return total


def noise_kernel(bath: BathSpec, dt: float, epsabs=DEFAULT_EPSABS, epsrel=DEFAULT_EPSREL) -> complex:
    """<xi(t1) xi(t2)> at dt = t1 - t2:
    (1/pi) int_0^inf sigma(w) [coth(w/2T) cos(w dt) - i sin(w dt)] dw.

    The strict Ohmic sentinel is integrated with a sharp cutoff at Lambda.
    """
    if bath.gamma == 0.0:
        return 0.0j
    dt = float(dt)
    if dt < 0:
        return complex(np.conj(noise_kernel(bath, -dt, epsabs, epsrel)))
    finite = bath.strict_ohmic or bath.cutoff_family is Cutoff.SHARP
    upper = bath.lambda_cut if finite else np.inf
    if bath.strict_ohmic:
        sharp = bath.replace(strict_ohmic=False, cutoff_family=Cutoff.SHARP)
    else:
        sharp = bath
    if dt == 0.0 and not finite and bath.cutoff_family is Cutoff.DRUDE:
        raise NumericalError("coincident Drude noise kernel diverges logarithmically")
    re = oscillatory_integral(lambda w: _sigma_coth(sharp, w), 0.0, upper, dt, "cos", epsabs, epsrel)
    im = oscillatory_integral(lambda w: spectral_density(sharp, w), 0.0, upper, dt, "sin", epsabs, epsrel)
    return complex(re, -im) / math.pi
