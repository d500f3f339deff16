"""System and bath parameters, normal-mode diagonalization, counterterms.

Units: hbar = k_B = mass = 1. Frequencies, temperatures and damping rates
all share the same (user-chosen) reference unit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InstabilityError

__all__ = [
    "Cutoff",
    "BathSpec",
    "SystemParams",
    "NormalModeBasis",
    "CountertermMatrix",
    "rotation",
    "diagonalize",
    "renormalized_basis",
    "counterterm_shift",
    "counterterms",
]


class Cutoff(str, enum.Enum):
    SHARP = "sharp"
    DRUDE = "drude"
    # numeric quadrature only, no closed forms downstream
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class BathSpec:
    """One Ohmic bath.

    ``strict_ohmic`` marks the infinite-bandwidth limit taken after the
    counterterm subtraction: the renormalized self-energy is exactly
    ``gamma * s``. ``lambda_cut`` is still used wherever a finite bandwidth
    is physically required (noise kernels, coincidence limits).
    """

    gamma: float
    lambda_cut: float
    temperature: float = 0.0
    cutoff_family: Cutoff = Cutoff.SHARP
    strict_ohmic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cutoff_family", Cutoff(self.cutoff_family))
        for name in ("gamma", "lambda_cut", "temperature"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ConfigError(f"BathSpec.{name} must be a finite real number, got {v!r}")
        if self.gamma < 0:
            raise ConfigError(f"BathSpec.gamma must be >= 0, got {self.gamma}")
        if self.lambda_cut <= 0:
            raise ConfigError(f"BathSpec.lambda_cut must be > 0, got {self.lambda_cut}")
        if self.temperature < 0:
            raise ConfigError(f"BathSpec.temperature must be >= 0, got {self.temperature}")

    def replace(self, **kw) -> "BathSpec":
        d = dict(
            gamma=self.gamma,
            lambda_cut=self.lambda_cut,
            temperature=self.temperature,
            cutoff_family=self.cutoff_family,
            strict_ohmic=self.strict_ohmic,
        )
        d.update(kw)
        return BathSpec(**d)


@dataclass(frozen=True)
class SystemParams:
    omega_a: float
    omega_b: float
    omega_c: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ConfigError("omega_a and omega_b must be > 0")
        if not self.omega_c >= 0:
            raise ConfigError("omega_c must be >= 0")
        if not (0.0 <= self.theta < 2 * math.pi):
            raise ConfigError("theta must lie in [0, 2*pi)")


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class NormalModeBasis:
    """Normal-mode data.

    ``omega_plus``/``omega_minus`` are the mode frequencies used downstream.
    From :func:`diagonalize` they are the bare normal modes; from
    :func:`renormalized_basis` they are W -/+ detuning/2.
    """

    omega_plus: float
    omega_minus: float
    lambda_angle: float
    theta: float
    w_mean: float = field(init=False)
    detuning: float = field(init=False)
    psi_angle: float = field(init=False)
    rotation: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.omega_plus > 0 and self.omega_minus > 0):
            raise InstabilityError("normal-mode frequencies must be positive")
        object.__setattr__(self, "w_mean", 0.5 * (self.omega_plus + self.omega_minus))
        object.__setattr__(self, "detuning", self.omega_minus - self.omega_plus)
        object.__setattr__(self, "psi_angle", self.lambda_angle + self.theta)
        object.__setattr__(self, "rotation", rotation(self.lambda_angle))

    @property
    def frequencies_squared(self) -> np.ndarray:
        return np.array([self.omega_plus**2, self.omega_minus**2])


def diagonalize(params: SystemParams) -> NormalModeBasis:
    a2, b2, c2 = params.omega_a**2, params.omega_b**2, params.omega_c**2
    root = math.hypot(a2 - b2, 2 * c2)
    mean = 0.5 * (a2 + b2 + 2 * c2)
    wp2, wm2 = mean + 0.5 * root, mean - 0.5 * root
    if wm2 <= 0:
        raise InstabilityError(f"unstable quadratic form: Omega_-^2 = {wm2:g} <= 0")
    if root == 0.0:
        lam = 0.0
    else:
        # 2*lambda in [0, pi]; sin(2 lambda) = 2 Omega^2 / root >= 0
        lam = 0.5 * math.atan2(2 * c2, a2 - b2)
    return NormalModeBasis(math.sqrt(wp2), math.sqrt(wm2), lam, params.theta)


def renormalized_basis(w: float, delta: float, psi: float) -> NormalModeBasis:
    """Basis specified directly by (W, Delta, psi); Omega_R+- = W -+ Delta/2."""
    if not w > 0:
        raise ConfigError("W must be > 0")
    if not w > abs(delta) / 2:
        raise InstabilityError(f"W={w} must exceed |Delta|/2={abs(delta) / 2}")
    return NormalModeBasis(w - delta / 2, w + delta / 2, 0.0, psi)


def counterterm_shift(bath: BathSpec) -> float:
    """delta Omega_j = -Re chi_j(0) = (2/pi) int sigma(w)/w dw."""
    g, lam = bath.gamma, bath.lambda_cut
    if bath.cutoff_family is Cutoff.DRUDE and not bath.strict_ohmic:
        return g * lam
    return 2.0 * g * lam / math.pi


@dataclass(frozen=True)
class CountertermMatrix:
    d_pp: float
    d_mm: float
    d_pm: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.d_pp, self.d_pm], [self.d_pm, self.d_mm]])


def counterterms(bath1: BathSpec, bath2: BathSpec, psi: float) -> CountertermMatrix:
    d1, d2 = counterterm_shift(bath1), counterterm_shift(bath2)
    c, s = math.cos(psi), math.sin(psi)
    return CountertermMatrix(c * c * d1 + s * s * d2, s * s * d1 + c * c * d2, c * s * (d1 - d2))
