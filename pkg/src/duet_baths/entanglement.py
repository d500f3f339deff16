"""Second-order (zero-temperature) growth of the normal-mode coherence.

Starting from the product vacuum of system and baths, the Heisenberg
operators are expanded to second order in the system-bath coupling:

    q_a = q_a0 + dq_a + d2q_a,

where ``dq_a`` is the free response to the bath operator ``b_a`` and
``d2q_a`` the response to the back-action of the other mode through the
retarded bath kernel. Only the bath *difference* enters the cross terms, so
the coherence is linear in sigma_1 - sigma_2. All time integrals are done
in closed form (divided differences of the exponential), leaving one
frequency integral over the bath band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .model import BathSpec, Cutoff, NormalModeBasis, counterterms
from .spectral import noise_kernel, spectral_density

__all__ = [
    "PerturbativeCoherence",
    "bath_difference_kernel",
    "second_order_coherence",
    "coherence_growth",
    "exp_divided_difference",
]


@dataclass(frozen=True)
class PerturbativeCoherence:
    t_grid: np.ndarray
    values: np.ndarray
    growth_exponent: float


def _require_vacuum(*baths: BathSpec):
    for b in baths:
        if b.temperature != 0.0:
            raise DomainError("perturbative coherence is defined for zero-temperature baths only")


def bath_difference_kernel(bath1: BathSpec, bath2: BathSpec, psi: float, dt: float) -> complex:
    """<b_+(t1) b_-(t2)> in the joint bath vacuum, dt = t1 - t2.

    Equals sin(psi) cos(psi) times the difference of the two zero-temperature
    noise kernels, (1/pi) int_0^inf [sigma_1 - sigma_2] e^{-i w dt} dw.
    """
    _require_vacuum(bath1, bath2)
    cs = math.sin(psi) * math.cos(psi)
    if cs == 0.0 or bath1 == bath2:
        return 0.0j
    return cs * (noise_kernel(bath1, dt) - noise_kernel(bath2, dt))


def _sinhc(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z * z / 6.0 + z**4 / 120.0, np.sinh(safe) / safe)


def _dd1(a, b):
    # exp[a, b], stable for a ~ b
    return np.exp(0.5 * (a + b)) * _sinhc(0.5 * (b - a))


def exp_divided_difference(x, y):
    """exp[0, x, y], the second divided difference of exp at (0, x, y).

    Equal to int_0^1 ds int_0^s ds' exp(x s + (y - x) s'). Vectorized over
    complex arrays and accurate when any of the nodes coalesce.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    x, y = np.broadcast_arrays(x, y)
    pts = np.stack([np.zeros_like(x), x, y])
    d01, d02, d12 = np.abs(x), np.abs(y), np.abs(y - x)
    diam = np.maximum(np.maximum(d01, d02), d12)

    # far pair (p, r) and middle node m: exp[p,m,r] = (exp[m,r] - exp[p,m]) / (r - p)
    which = np.argmax(np.stack([d12, d02, d01]), axis=0)  # index of the node left out of the far pair
    idx = np.array([[1, 0, 2], [0, 1, 2], [0, 2, 1]])[which]  # (p, m, r) per element
    p = np.take_along_axis(pts, idx[..., 0][None], 0)[0]
    m = np.take_along_axis(pts, idx[..., 1][None], 0)[0]
    r = np.take_along_axis(pts, idx[..., 2][None], 0)[0]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        far = (_dd1(m, r) - _dd1(p, m)) / (r - p)

    # clustered nodes: Taylor series about the centroid
    c = (x + y) / 3.0
    q0, q1, q2 = -c, x - c, y - c
    e1 = q0 + q1 + q2
    e2 = q0 * q1 + q0 * q2 + q1 * q2
    e3 = q0 * q1 * q2
    h = [np.ones_like(x), e1, e1 * e1 - e2]
    total = h[0] / 2.0 + h[1] / 6.0 + h[2] / 24.0
    fact = 24.0
    for k in range(3, 30):
        hk = e1 * h[-1] - e2 * h[-2] + e3 * h[-3]
        h = [h[-2], h[-1], hk]
        fact *= k + 2
        total = total + hk / fact
    near = np.exp(c) * total
    out = np.where(diam < 1.0, near, far)
    return out if out.ndim else complex(out)


def _response_amplitude(omega, w_mode, t):
    """A(w) = int_0^t sin(W (t - s))/W e^{-i w s} ds."""
    out = 0.0
    for sg in (1, -1):
        out = out + 0.5 * exp_divided_difference(1j * omega * t, 1j * (omega + sg * w_mode) * t)
    return t * t * np.exp(-1j * omega * t) * out


def _backaction_amplitude(omega, w_g, nu, t):
    """int_0^t ds sin(W_g(t-s))/W_g int_0^s ds' sin(w(s-s')) e^{i nu (t-s')}."""
    out = 0.0
    for s1 in (1, -1):
        for s2 in (1, -1):
            a = 1j * (-s1 * w_g + s2 * omega)
            ab = -1j * (s1 * w_g + nu)
            pref = -s1 * s2 * np.exp(1j * (s1 * w_g + nu) * t) / (4.0 * w_g)
            out = out + pref * exp_divided_difference(a * t, ab * t)
    return t * t * out


def _static_amplitude(w_g, nu, t):
    """int_0^t sin(W_g u)/W_g e^{i nu u} du."""
    out = 0.0
    for sg in (1, -1):
        out = out + 0.5 * exp_divided_difference(1j * nu * t, 1j * (nu + sg * w_g) * t)
    return t * t * out


def _band_edge(bath: BathSpec) -> float:
    if bath.cutoff_family is Cutoff.SHARP or bath.strict_ohmic:
        return bath.lambda_cut
    # Drude and exponential tails are negligible well past the knee
    return 60.0 * bath.lambda_cut


def _integrand(basis: NormalModeBasis, b1: BathSpec, b2: BathSpec, omega, t):
    wp, wm = basis.omega_plus, basis.omega_minus
    cs = math.sin(basis.psi_angle) * math.cos(basis.psi_angle)
    sharp1 = b1.replace(strict_ohmic=False, cutoff_family=Cutoff.SHARP) if b1.strict_ohmic else b1
    sharp2 = b2.replace(strict_ohmic=False, cutoff_family=Cutoff.SHARP) if b2.strict_ohmic else b2
    d = cs * (spectral_density(sharp1, omega) - spectral_density(sharp2, omega)) / math.pi
    direct = _response_amplitude(omega, wp, t) * np.conj(_response_amplitude(omega, wm, t))
    # retarded kernel R(u) = 2 int D sin(w u); each vacuum partner carries 1/(2 W)
    back = (_backaction_amplitude(omega, wm, -wp, t) / wp + _backaction_amplitude(omega, wp, wm, t) / wm)
    return d * (direct + back)


def second_order_coherence(basis: NormalModeBasis, baths, t, counterterm: bool = False,
                           nodes_per_period: int = 24) -> complex:
    """<q_+(t) q_-(t)> to second order in the coupling, both baths in vacuum.

    The frequency integral runs over the bath band with Gauss-Legendre panels
    of width pi/t. ``counterterm=True`` adds the first-order action of the
    off-diagonal counterterm, which removes the bandwidth-divergent part.
    """
    b1, b2 = baths
    _require_vacuum(b1, b2)
    t = float(t)
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0.0 or b1 == b2:
        return 0.0j
    wp, wm = basis.omega_plus, basis.omega_minus
    edge = max(_band_edge(b1), _band_edge(b2))
    marks = sorted({0.0, min(wp, edge), min(wm, edge), b1.lambda_cut if b1.lambda_cut < edge else edge,
                    b2.lambda_cut if b2.lambda_cut < edge else edge, edge})
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_period)
    total = 0.0j
    for lo, hi in zip(marks[:-1], marks[1:]):
        if hi <= lo:
            continue
        n_pan = max(1, int(math.ceil((hi - lo) * t / math.pi)))
        edges = np.linspace(lo, hi, n_pan + 1)
        half = 0.5 * np.diff(edges)[:, None]
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        om = (mid + half * xg[None, :]).ravel()
        wts = (half * wg[None, :]).ravel()
        total += np.sum(wts * _integrand(basis, b1, b2, om, t))
    if counterterm:
        d_pm = counterterms(b1, b2, basis.psi_angle).d_pm
        total -= d_pm * (_static_amplitude(wm, -wp, t) / (2 * wp) + _static_amplitude(wp, wm, t) / (2 * wm))
    return complex(total)


def coherence_growth(basis: NormalModeBasis, baths, t_grid, counterterm: bool = False,
                     fit_window=None) -> PerturbativeCoherence:
    """Evaluate the second-order coherence on a grid and fit |C| ~ t^p.

    ``fit_window`` (t_lo, t_hi) restricts the log-log least-squares fit; by
    default the whole positive part of the grid is used.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ConfigError("t_grid must be a non-empty 1-D array")
    vals = np.array([second_order_coherence(basis, baths, t, counterterm) for t in t_grid])
    lo, hi = fit_window if fit_window is not None else (0.0, np.inf)
    mask = (t_grid > 0) & (t_grid >= lo) & (t_grid <= hi) & (np.abs(vals) > 0)
    if mask.sum() >= 2:
        slope = float(np.polyfit(np.log(t_grid[mask]), np.log(np.abs(vals[mask])), 1)[0])
    else:
        slope = float("nan")
    return PerturbativeCoherence(t_grid, vals, slope)
