"""Exact finite-bath Gaussian dynamics.

Each bath is replaced by N harmonic modes on a midpoint frequency grid. The
full system plus baths is then a quadratic Hamiltonian

    H = p.p / 2 + x^T K x / 2,   x = (q_+, q_-, Q_{1,1..N1}, Q_{2,1..N2}),

whose symplectic propagator follows from a single symmetric eigensolve of
K. Phase-space vectors are ordered (x, p); covariances are symmetrized
second moments V_ij = <{z_i, z_j}>/2 and the canonical form is
J = [[0, I], [-I, 0]].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConfigError, DomainError, InstabilityError
from .model import BathSpec, Cutoff, CountertermMatrix, NormalModeBasis
from .spectral import spectral_density

__all__ = [
    "RecurrenceWarning",
    "DiscretizedBath",
    "QuadraticForm",
    "CovarianceState",
    "discretize",
    "discrete_counterterms",
    "build_hamiltonian",
    "initial_state",
    "propagator",
    "evolve",
    "extract",
    "two_time",
    "system_covariances",
    "log_negativity",
    "symplectic_form",
]


class RecurrenceWarning(RuntimeWarning):
    """Requested time exceeds the Poincare recurrence time of a discretized bath."""


@dataclass(frozen=True)
class DiscretizedBath:
    frequencies: np.ndarray
    couplings: np.ndarray
    temperature: float = 0.0

    @property
    def count(self) -> int:
        return int(self.frequencies.size)

    @property
    def spacing(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0]) if self.count > 1 else float(2 * self.frequencies[0])

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    def binned_density(self) -> np.ndarray:
        """sigma reconstructed from the weighted delta comb, one value per bin."""
        return math.pi * self.couplings**2 / (2.0 * self.frequencies * self.spacing)


def discretize(bath: BathSpec, n_modes: int, omega_max: float) -> DiscretizedBath:
    """Midpoint grid w_k = (k - 1/2) d, d = omega_max / N, C_k^2 = 2 w_k sigma(w_k) d / pi."""
    if int(n_modes) != n_modes or n_modes < 2:
        raise ConfigError("n_modes must be an integer >= 2")
    if not omega_max > 0:
        raise ConfigError("omega_max must be > 0")
    sharp = bath.strict_ohmic or bath.cutoff_family is Cutoff.SHARP
    if sharp and omega_max > bath.lambda_cut * (1 + 1e-12):
        raise ConfigError("omega_max must not exceed the sharp cutoff Lambda")
    n = int(n_modes)
    d = omega_max / n
    w = (np.arange(1, n + 1) - 0.5) * d
    sig = np.asarray(spectral_density(bath.replace(strict_ohmic=False) if bath.strict_ohmic else bath, w))
    c = np.sqrt(2.0 * w * sig * d / math.pi)
    return DiscretizedBath(w, c, bath.temperature)


def discrete_counterterms(b1: DiscretizedBath, b2: DiscretizedBath, psi: float) -> CountertermMatrix:
    """Counterterms sum_k C_k^2 / W_k^2 matched to the discrete baths.

    With these the static limit of the system block is exactly diag(Omega_R^2).
    """
    d1 = float(np.sum(b1.couplings**2 / b1.frequencies**2))
    d2 = float(np.sum(b2.couplings**2 / b2.frequencies**2))
    c, s = math.cos(psi), math.sin(psi)
    return CountertermMatrix(c * c * d1 + s * s * d2, s * s * d1 + c * c * d2, c * s * (d1 - d2))


def symplectic_form(n_coords: int) -> np.ndarray:
    eye = np.eye(n_coords)
    zero = np.zeros((n_coords, n_coords))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass
class QuadraticForm:
    """Potential matrix K with a cached eigendecomposition K = U diag(w^2) U^T."""

    K: np.ndarray
    n1: int
    n2: int
    recurrence_time: float = math.inf
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.K.shape[0]

    def eig(self):
        if self._eig is None:
            w2, u = linalg.eigh(self.K)
            if w2[0] <= 0:
                raise InstabilityError(f"discretized quadratic form is not positive definite (min eigenvalue {w2[0]:g})")
            self._eig = (np.sqrt(w2), u)
        return self._eig

    def eigenfrequencies(self) -> np.ndarray:
        return self.eig()[0]


def build_hamiltonian(basis: NormalModeBasis, ct: CountertermMatrix | None, b1: DiscretizedBath,
                      b2: DiscretizedBath, psi: float | None = None) -> QuadraticForm:
    """Potential matrix of system, baths and counterterms.

    ``ct=None`` leaves the counterterms out. ``psi`` defaults to the basis angle.
    """
    psi = basis.psi_angle if psi is None else psi
    c, s = math.cos(psi), math.sin(psi)
    n1, n2 = b1.count, b2.count
    m = 2 + n1 + n2
    K = np.zeros((m, m))
    K[0, 0], K[1, 1] = basis.omega_plus**2, basis.omega_minus**2
    if ct is not None:
        K[:2, :2] += ct.matrix()
    i1 = slice(2, 2 + n1)
    i2 = slice(2 + n1, m)
    K[i1, i1] = np.diag(b1.frequencies**2)
    K[i2, i2] = np.diag(b2.frequencies**2)
    # H_SB = -(q_+ b_+ + q_- b_-), b_+ = c B1 - s B2, b_- = s B1 + c B2
    K[0, i1] = -c * b1.couplings
    K[0, i2] = s * b2.couplings
    K[1, i1] = -s * b1.couplings
    K[1, i2] = -c * b2.couplings
    K[i1, 0], K[i2, 0], K[i1, 1], K[i2, 1] = K[0, i1], K[0, i2], K[1, i1], K[1, i2]
    rec = min(b1.recurrence_time if n1 else math.inf, b2.recurrence_time if n2 else math.inf)
    H = QuadraticForm(K, n1, n2, rec)
    H.eig()
    return H


@dataclass(frozen=True)
class CovarianceState:
    mean: np.ndarray
    cov: np.ndarray
    time: float = 0.0

    @property
    def n_coords(self) -> int:
        return self.cov.shape[0] // 2

    def uncertainty_margin(self) -> float:
        """Smallest eigenvalue of cov + iJ/2 (>= 0 for a physical state)."""
        J = symplectic_form(self.n_coords)
        return float(np.min(linalg.eigvalsh(self.cov + 0.5j * J)))

    def purity(self) -> float:
        # Gaussian purity 1 / sqrt(det(2 V))
        sign, logdet = np.linalg.slogdet(2.0 * self.cov)
        return float(math.exp(-0.5 * logdet)) if sign > 0 else 0.0

    def system_block(self) -> np.ndarray:
        """4x4 covariance of (q_+, q_-, p_+, p_-)."""
        m = self.n_coords
        idx = [0, 1, m, m + 1]
        return self.cov[np.ix_(idx, idx)]


def _thermal_pair(w, T):
    # (<Q^2>, <P^2>) = ((n + 1/2)/w, (n + 1/2) w)
    w = np.asarray(w, dtype=float)
    half = 0.5 / np.tanh(w / (2 * T)) if T > 0 else 0.5 * np.ones_like(w)
    return half / w, half * w


def initial_state(basis: NormalModeBasis, b1: DiscretizedBath, b2: DiscretizedBath,
                  T1: float | None = None, T2: float | None = None) -> CovarianceState:
    """System normal modes in vacuum, each bath mode thermal, no correlations."""
    T1 = b1.temperature if T1 is None else T1
    T2 = b2.temperature if T2 is None else T2
    if T1 < 0 or T2 < 0:
        raise ConfigError("temperatures must be >= 0")
    w_sys = np.array([basis.omega_plus, basis.omega_minus])
    qs, ps = 0.5 / w_sys, 0.5 * w_sys
    q1, p1 = _thermal_pair(b1.frequencies, T1)
    q2, p2 = _thermal_pair(b2.frequencies, T2)
    diag = np.concatenate([qs, q1, q2, ps, p1, p2])
    return CovarianceState(np.zeros(diag.size), np.diag(diag), 0.0)


def _check_recurrence(H: QuadraticForm, t: float):
    if abs(t) >= H.recurrence_time:
        warnings.warn(
            f"t={t:g} exceeds the bath recurrence time {H.recurrence_time:g}; finite-bath revivals expected",
            RecurrenceWarning,
            stacklevel=3,
        )


def propagator(H: QuadraticForm, t: float) -> np.ndarray:
    """Symplectic map S(t) with z(t) = S(t) z(0)."""
    m = H.size
    try:
        w, u = H.eig()
    except linalg.LinAlgError:
        gen = np.block([[np.zeros((m, m)), np.eye(m)], [-H.K, np.zeros((m, m))]])
        return linalg.expm(gen * t)
    cw, sw = np.cos(w * t), np.sin(w * t)
    A = (u * cw) @ u.T
    B = (u * (sw / w)) @ u.T
    C = -(u * (sw * w)) @ u.T
    return np.block([[A, B], [C, A]])


def evolve(state: CovarianceState, H: QuadraticForm, t: float) -> CovarianceState:
    """Advance the state by time t under H."""
    if state.cov.shape[0] != 2 * H.size:
        raise ConfigError("state and Hamiltonian sizes differ")
    _check_recurrence(H, state.time + t)
    S = propagator(H, t)
    cov = S @ state.cov @ S.T
    cov = 0.5 * (cov + cov.T)
    return CovarianceState(S @ state.mean, cov, state.time + t)


_EXTRACT = {
    "q++": (0, 0, "x"),
    "q--": (1, 1, "x"),
    "q+-": (0, 1, "x"),
    "p++": (0, 0, "p"),
    "p--": (1, 1, "p"),
    "p+-": (0, 1, "p"),
}


def extract(state: CovarianceState, which: str) -> float:
    """Equal-time symmetrized moment of the system modes, e.g. 'q+-' or 'p++'."""
    if which not in _EXTRACT:
        raise ConfigError(f"unknown moment {which!r}; choose from {sorted(_EXTRACT)}")
    a, b, kind = _EXTRACT[which]
    off = state.n_coords if kind == "p" else 0
    return float(state.cov[off + a, off + b])


def two_time(state: CovarianceState, H: QuadraticForm, tau: float, i: int = 0, j: int = 1) -> complex:
    """<z_i(t + tau) z_j(t)> = [S(tau) V(t)]_ij + (i/2) [S(tau) J]_ij for phase-space indices."""
    _check_recurrence(H, state.time + tau)
    S = propagator(H, tau)
    J = symplectic_form(H.size)
    return complex((S[i] @ state.cov[:, j]) + 0.5j * (S[i] @ J[:, j]))


def system_covariances(state0: CovarianceState, H: QuadraticForm, t_grid) -> np.ndarray:
    """System-block covariances (q_+, q_-, p_+, p_-) on a time grid, shape (nt, 4, 4).

    Only the system rows of S(t) are formed, so each time costs O(M^2).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size:
        _check_recurrence(H, float(np.max(np.abs(t_grid))) + state0.time)
    w, u = H.eig()
    us = u[:2]
    V = state0.cov
    out = np.empty((t_grid.size, 4, 4))
    for n, t in enumerate(t_grid):
        cw, sw = np.cos(w * t), np.sin(w * t)
        A = (us * cw) @ u.T
        B = (us * (sw / w)) @ u.T
        C = -(us * (sw * w)) @ u.T
        Srows = np.vstack([np.hstack([A, B]), np.hstack([C, A])])
        out[n] = Srows @ V @ Srows.T
    return 0.5 * (out + out.transpose(0, 2, 1))


def _symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    n = V.shape[0] // 2
    J = symplectic_form(n)
    ev = np.abs(np.linalg.eigvals(1j * J @ V))
    return np.sort(ev)[::2]


def log_negativity(state, tol: float = 1e-8) -> float:
    """E_N = max(0, -ln(2 nu_min)) of the two system modes.

    ``state`` is a CovarianceState or a 4x4 covariance ordered (q_+, q_-, p_+, p_-).
    """
    V = state.system_block() if isinstance(state, CovarianceState) else np.asarray(state, dtype=float)
    if V.shape != (4, 4):
        raise ConfigError("log_negativity needs a 4x4 two-mode covariance")
    if np.min(_symplectic_eigenvalues(V)) < 0.5 - tol:
        raise DomainError("covariance violates the uncertainty principle")
    # partial transpose on mode '-': p_- -> -p_-
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    nu = float(np.min(_symplectic_eigenvalues(P @ V @ P)))
    en = -math.log(2.0 * nu)
    # roundoff floor for separable states
    return en if en > 1e-12 else 0.0
