"""Liouville limit profiles and the envelope curves U_beta, V_L.

Every profile belongs to the family

    z(r) = log(2 a^2 b / (r^(2-a) (1 + b r^a)^2)),

which solves -z'' - z'/r = e^z on (0, inf) with mass int e^z r dr = 2a.
``Regular0`` is (a, b) = (2, 1/8), ``Tilde0`` is (2, 1/2) and ``SingularA``
takes a in (0, 2), with b = (sqrt(2)/a)^a by default.

Internally everything is a function of s = log r through w = b e^(a s):

    z_s  = -(2 - a) - 2a w/(1 + w)
    z_ss = -2a^2 w/(1 + w)^2 = -e^(2s + z).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Profile:
    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("Regular0", "SingularA", "Tilde0"):
            raise DomainError(f"unknown profile {self.kind!r}")
        if self.kind == "SingularA" and not (0 < self.a < 2):
            raise DomainError("SingularA needs a in (0, 2)")
        if not self.b > 0:
            raise DomainError("b must be positive")

    @property
    def mass(self) -> float:
        return 2.0 * self.a

    @property
    def log_coef(self) -> float:
        return math.log(2.0 * self.a**2 * self.b)

    @property
    def s_peak(self) -> float:
        """log-radius where w = 1, i.e. where the scaled density peaks."""
        return -math.log(self.b) / self.a


def regular0() -> Profile:
    return Profile("Regular0", 2.0, 0.125)


def tilde0() -> Profile:
    return Profile("Tilde0", 2.0, 0.5)


def singular(a: float, b: float | None = None) -> Profile:
    a = float(a)
    if b is None:
        if not (0 < a < 2):
            raise DomainError("SingularA needs a in (0, 2)")
        b = (SQRT2 / a) ** a
    return Profile("SingularA", a, float(b))


def _sigmoid(lw):
    # w/(1+w) with w = e^lw, stable on both tails
    return np.where(lw >= 0, 1.0 / (1.0 + np.exp(-np.abs(lw))), np.exp(-np.abs(lw)) / (1.0 + np.exp(-np.abs(lw))))


def eval_log_radius(profile: Profile, s):
    """(z, z_s, z_ss) as functions of s = log r."""
    s = np.asarray(s, dtype=float)
    a, b = profile.a, profile.b
    lw = math.log(b) + a * s
    sig = _sigmoid(lw)
    z = profile.log_coef - (2.0 - a) * s - 2.0 * np.logaddexp(0.0, lw)
    zs = -(2.0 - a) - 2.0 * a * sig
    zss = -2.0 * a * a * sig * (1.0 - sig)
    return z, zs, zss


def eval_profile(profile: Profile, r):
    """(z, z', z'') in the radial variable, analytic throughout."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or (profile.a < 2 and np.any(r == 0)):
        raise DomainError("r must be > 0 (>= 0 for regular profiles)")
    if profile.a == 2.0:
        b = profile.b
        br2 = b * r * r
        z = profile.log_coef - 2.0 * np.log1p(br2)
        z1 = -4.0 * b * r / (1.0 + br2)
        z2 = -4.0 * b * (1.0 - br2) / (1.0 + br2) ** 2
        return z, z1, z2
    s = np.log(r)
    z, zs, zss = eval_log_radius(profile, s)
    return z, zs / r, (zss - zs) / (r * r)


def profile_residual(profile: Profile, r, scaled: bool = True):
    """Residual of -z'' - z'/r = e^z.

    With ``scaled`` (default) the equation is multiplied by r^2, giving
    -z_ss - e^(2s + z) in log-radius; this stays at rounding level for r
    across many decades, while the unscaled residual inherits the r^(-2)
    growth of each term.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be > 0")
    if scaled:
        s = np.log(r)
        z, _, zss = eval_log_radius(profile, s)
        return -zss - np.exp(2.0 * s + z)
    z, z1, z2 = eval_profile(profile, r)
    return -z2 - z1 / r - np.exp(z)


def phi_of_profile(profile: Profile, R):
    """Scaled density R^2 e^z(R) = 2 a^2 w/(1 + w)^2."""
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise DomainError("R must be >= 0")
    with np.errstate(divide="ignore"):
        lw = math.log(profile.b) + profile.a * np.log(R)
    sig = _sigmoid(lw)
    return 2.0 * profile.a**2 * sig * (1.0 - sig)


def profile_mass(profile: Profile, tol: float = 1e-10) -> float:
    """int_0^inf e^z r dr, computed as int e^(2s+z) ds over the real line."""
    if not (0 < tol <= 1e-6):
        raise DomainError("tol must lie in (0, 1e-6]")

    def dens(s):
        return float(phi_of_profile(profile, math.exp(s))) if s < 700 else 0.0

    sp = profile.s_peak
    total, err = 0.0, 0.0
    for lo, hi in ((-np.inf, sp), (sp, np.inf)):
        val, e = integrate.quad(dens, lo, hi, epsabs=tol * 0.1, epsrel=tol * 0.1, limit=200)
        total += val
        err += e
    if err > tol * max(1.0, abs(total)):
        raise ConvergenceError(f"mass quadrature error {err:.2e} exceeds {tol:.1e}")
    return total


def profile_table(profile: Profile, s_grid) -> str:
    """CSV dump with columns s, z, dz/dr and the scaled residual."""
    s = np.asarray(s_grid, dtype=float)
    r = np.exp(s)
    z, z1, _ = eval_profile(profile, r)
    res = profile_residual(profile, r)
    buf = io.StringIO()
    buf.write("s,z,zprime,residual\n")
    for row in zip(s, np.atleast_1d(z), np.atleast_1d(z1), np.atleast_1d(res)):
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


# -- envelope curves ---------------------------------------------------------


@dataclass(frozen=True)
class UBeta:
    """U(r) = (beta log(1/r))^(1/p)."""

    beta: float
    p: float

    s_max = 0.0

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s > 0):
            raise DomainError("U_beta is defined for s <= 0")
        return (self.beta * -s) ** (1.0 / self.p)


@dataclass(frozen=True)
class VL:
    """V(r) = {2 log(1/r) - kappa log(2 log(1/r)) + L}^(1/p), kappa = 1 - (1-m)/p."""

    L: float
    p: float
    m: float

    @property
    def kappa(self) -> float:
        return 1.0 - (1.0 - self.m) / self.p

    s_max = -0.5  # exclusive: 2 log(1/r) must exceed 1

    def value(self, s):
        s = np.asarray(s, dtype=float)
        two = -2.0 * s
        if np.any(two <= 1):
            raise DomainError("V_L needs 2 log(1/r) > 1")
        brace = two - self.kappa * np.log(two) + self.L
        if np.any(brace < 0):
            raise DomainError("V_L brace is negative")
        return brace ** (1.0 / self.p)


class Tabulated:
    """Monotone cubic interpolation of samples (s_i, u_i) in log-radius."""

    def __init__(self, s, u):
        s = np.asarray(s, dtype=float)
        u = np.asarray(u, dtype=float)
        order = np.argsort(s)
        s, u = s[order], u[order]
        keep = np.concatenate(([True], np.diff(s) > 0))
        self.s, self.u = s[keep], u[keep]
        if self.s.size < 2:
            raise DomainError("need at least two distinct samples")
        self._pchip = PchipInterpolator(self.s, self.u, extrapolate=False)
        self.s_min, self.s_max = float(self.s[0]), float(self.s[-1])

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < self.s[0]) or np.any(s > self.s[-1]):
            raise DomainError("outside the tabulated range")
        return self._pchip(s)


Curve = Union[UBeta, VL, Tabulated]


def eval_curve(curve, s):
    out = curve.value(s)
    return float(out) if np.ndim(out) == 0 else out
