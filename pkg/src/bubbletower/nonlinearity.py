"""Nonlinearities f(t) = h(t) exp(t**p), evaluated in log space.

Three families are supported:

* ``UnitH``     h = 1
* ``PowerExp``  h(t) = t**m exp(alpha t**q) for t >= t_join
* ``H4``        f(t) = 4(p-1)/p**2 t**(1-2p) exp(t**p) for t >= tau0

Below ``t_join`` the closed form is replaced by a degree-5 polynomial that
matches f, f', f'' at ``t_join`` and has (f, f', f'')(0) = (f(t_join)/2, 0, 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate

from .errors import DomainError, RangeError

DEFAULT_RTOL = 1e-10
# largest t**p for which f itself (not log f) is representable
DIRECT_RANGE = 700.0
LOG_RANGE = 1e8


@dataclass(frozen=True)
class UnitH:
    pass


@dataclass(frozen=True)
class PowerExp:
    m: float
    alpha: float = 0.0
    q: float = 1.0


@dataclass(frozen=True)
class H4:
    tau0: float = 1.0


Variant = Union[UnitH, PowerExp, H4]


@dataclass(frozen=True)
class LogValue:
    """A real number stored as sign * exp(log_abs)."""

    log_abs: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.log_abs != -math.inf:
            object.__setattr__(self, "log_abs", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf


@dataclass(frozen=True)
class NonlinearitySpec:
    p: float
    variant: Variant = field(default_factory=UnitH)
    t_join: float | None = None
    _blend: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        p = float(self.p)
        if not (math.isfinite(p) and p > 0):
            raise DomainError(f"p must be a positive finite number, got {self.p!r}")
        object.__setattr__(self, "p", p)
        v = self.variant
        if isinstance(v, UnitH):
            default_join = 0.0
        elif isinstance(v, PowerExp):
            if not (0 < v.q < p):
                raise DomainError(f"PowerExp needs 0 < q < p, got q={v.q}, p={p}")
            default_join = 1.0
        elif isinstance(v, H4):
            if v.tau0 <= 0:
                raise DomainError("H4 needs tau0 > 0")
            if p <= 2:
                raise DomainError("H4 needs p > 2")
            default_join = float(v.tau0)
        else:
            raise DomainError(f"unknown variant {v!r}")
        tj = default_join if self.t_join is None else float(self.t_join)
        if tj < 0:
            raise DomainError("t_join must be >= 0")
        if isinstance(v, H4) and tj != v.tau0:
            raise DomainError("H4 joins exactly at tau0")
        if isinstance(v, PowerExp) and v.m < 0 and tj <= 0:
            raise DomainError("PowerExp with m < 0 needs t_join > 0")
        object.__setattr__(self, "t_join", tj)
        if tj > 0:
            object.__setattr__(self, "_blend", self._make_blend())

    # -- closed form pieces ------------------------------------------------
    def _log_h(self, t: float) -> float:
        v = self.variant
        if isinstance(v, UnitH):
            return 0.0
        if isinstance(v, PowerExp):
            lt = math.log(t) if t > 0 else -math.inf
            return (v.m * lt if v.m != 0 else 0.0) + v.alpha * t**v.q
        c = 4.0 * (self.p - 1.0) / self.p**2
        return math.log(c) + (1.0 - 2.0 * self.p) * math.log(t)

    def _dlog_h(self, t: float) -> float:
        v = self.variant
        if isinstance(v, UnitH):
            return 0.0
        if isinstance(v, PowerExp):
            return v.m / t + v.alpha * v.q * t ** (v.q - 1.0)
        return (1.0 - 2.0 * self.p) / t

    def _d2log_h(self, t: float) -> float:
        v = self.variant
        if isinstance(v, UnitH):
            return 0.0
        if isinstance(v, PowerExp):
            return -v.m / t**2 + v.alpha * v.q * (v.q - 1.0) * t ** (v.q - 2.0)
        return -(1.0 - 2.0 * self.p) / t**2

    def _closed(self, t: float) -> tuple[float, float, float]:
        """(log f, (log f)', (log f)'') from the closed form."""
        p = self.p
        g = self._log_h(t) + t**p
        if t == 0:
            return g, math.nan, math.nan
        g1 = self._dlog_h(t) + p * t ** (p - 1.0)
        g2 = self._d2log_h(t) + p * (p - 1.0) * t ** (p - 2.0)
        return g, g1, g2

    def _make_blend(self) -> tuple:
        tj = self.t_join
        if tj**self.p > DIRECT_RANGE:
            raise DomainError("t_join too large for a direct-space blend")
        g, g1, g2 = self._closed(tj)
        f0 = math.exp(g)
        f1 = f0 * g1
        f2 = f0 * (g2 + g1 * g1)
        mat = np.array(
            [
                [tj**3, tj**4, tj**5],
                [3 * tj**2, 4 * tj**3, 5 * tj**4],
                [6 * tj, 12 * tj**2, 20 * tj**3],
            ]
        )
        c345 = np.linalg.solve(mat, [f0 / 2.0, f1, f2])
        coef = (f0 / 2.0, 0.0, 0.0, *map(float, c345))
        grid = np.linspace(0.0, tj, 1000)
        if np.min(np.polynomial.polynomial.polyval(grid, coef)) < 0:
            raise DomainError("C2 blend below t_join dips below zero; choose other parameters")
        return coef

    def _poly(self, t: float, der: int = 0) -> float:
        c = self._blend
        if der == 0:
            return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))))
        if der == 1:
            return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])))
        return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]))

    # -- fast paths used by the integrators ----------------------------------
    def log_f(self, t: float) -> float:
        """log f(t) without validation.

        Negative arguments only occur when an integrator steps across u = 0;
        there f is continued by the polynomial blend, by the analytic formula
        (UnitH with integer p), or by the constant f(0).
        """
        if t >= self.t_join and t > 0:
            return self._log_h(t) + t**self.p
        if self._blend:
            val = self._poly(t)
            if val <= 0:
                val = self._blend[0]
            return math.log(val)
        if t >= 0:
            return self._log_h(t) + t**self.p
        if isinstance(self.variant, UnitH) and float(self.p).is_integer():
            return t ** int(self.p)
        return self.log_f(0.0)

    def dlog_f(self, t: float) -> float:
        """(log f)'(t) for t >= 0; nan where it is singular."""
        if self._blend and t < self.t_join:
            return self._poly(t, 1) / self._poly(t)
        if t <= 0:
            if isinstance(self.variant, UnitH) and self.p >= 1:
                return 1.0 if self.p == 1 else 0.0
            return math.nan
        return self._closed(t)[1]

    def log_f_array(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.array([self.log_f(float(x)) for x in t.ravel()]).reshape(t.shape)

    @property
    def m_exponent(self) -> float:
        """The power m with f(t) ~ c t**m exp(t**p) at infinity (alpha = 0)."""
        v = self.variant
        if isinstance(v, UnitH):
            return 0.0
        if isinstance(v, PowerExp):
            return float(v.m)
        return 1.0 - 2.0 * self.p

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        v = self.variant
        out: dict = {"p": self.p, "variant": type(v).__name__}
        if isinstance(v, PowerExp):
            out.update(m=v.m, alpha=v.alpha, q=v.q, t_join=self.t_join)
        elif isinstance(v, H4):
            out.update(tau0=v.tau0)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NonlinearitySpec":
        d = dict(d)
        try:
            p = d.pop("p")
            name = d.pop("variant", "UnitH")
        except KeyError as exc:
            raise DomainError(f"missing key {exc}") from None
        allowed = {"UnitH": set(), "PowerExp": {"m", "alpha", "q", "t_join"}, "H4": {"tau0"}}
        if name not in allowed:
            raise DomainError(f"unknown variant {name!r}")
        extra = set(d) - allowed[name]
        if extra:
            raise DomainError(f"unknown keys for {name}: {sorted(extra)}")
        if name == "UnitH":
            return cls(p, UnitH())
        if name == "H4":
            return cls(p, H4(float(d.get("tau0", 1.0))))
        if "m" not in d:
            raise DomainError("PowerExp needs m")
        t_join = d.pop("t_join", None)
        return cls(p, PowerExp(**{k: float(x) for k, x in d.items()}), t_join)


def unit_h(p: float) -> NonlinearitySpec:
    return NonlinearitySpec(p, UnitH())


def power_exp(p: float, m: float, alpha: float = 0.0, q: float = 1.0, t_join: float | None = None) -> NonlinearitySpec:
    return NonlinearitySpec(p, PowerExp(m, alpha, q), t_join)


def h4(p: float, tau0: float = 1.0) -> NonlinearitySpec:
    return NonlinearitySpec(p, H4(tau0))


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t must be finite and >= 0, got {t}")
    return t


def eval_log_f(spec: NonlinearitySpec, t: float) -> LogValue:
    t = _check_t(t)
    if t**spec.p > LOG_RANGE:
        raise RangeError("t**p beyond the supported log-space range")
    lf = spec.log_f(t)
    if lf == -math.inf:
        return LogValue(-math.inf, 0)
    return LogValue(lf, 1)


def eval_log_f_prime(spec: NonlinearitySpec, t: float) -> LogValue:
    """log |f'(t)| with sign, via f' = p t^(p-1) h (1 + h'/(p t^(p-1) h)) e^(t^p)."""
    t = _check_t(t)
    if spec._blend and t < spec.t_join:
        return LogValue.from_float(spec._poly(t, 1))
    p = spec.p
    if t == 0:
        if isinstance(spec.variant, UnitH):
            if p == 1:
                return LogValue(0.0, 1)
            if p > 1:
                return LogValue(-math.inf, 0)
        raise DomainError("f' is singular at t = 0 for this spec")
    lead = p * t ** (p - 1.0)
    g1 = lead * (1.0 + spec._dlog_h(t) / lead)
    if g1 == 0:
        return LogValue(-math.inf, 0)
    return LogValue(spec.log_f(t) + math.log(abs(g1)), 1 if g1 > 0 else -1)


def eval_F(spec: NonlinearitySpec, t: float, rtol: float = DEFAULT_RTOL) -> float:
    """F(t) = int_0^t f(s) ds by adaptive quadrature."""
    t = _check_t(t)
    if t**spec.p > DIRECT_RANGE:
        raise RangeError(f"f overflows direct representation at t={t} (t**p > {DIRECT_RANGE})")
    if t == 0:
        return 0.0

    def f(s):
        return math.exp(spec.log_f(s))

    cuts = [0.0]
    if 0 < spec.t_join < t:
        cuts.append(spec.t_join)
    cuts.append(t)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
    return total


@dataclass(frozen=True)
class H1Report:
    t: np.ndarray
    ratio: np.ndarray
    decaying: bool


def check_H1(spec: NonlinearitySpec, t_grid) -> H1Report:
    """Ratios h'(t) / (t^(p-1) h(t)) on a grid, flagging failure to decay."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be positive and increasing")
    p = spec.p
    out = np.empty_like(t)
    for i, x in enumerate(t):
        if spec._blend and x < spec.t_join:
            dlogf = spec._poly(x, 1) / spec._poly(x)
            out[i] = (dlogf - p * x ** (p - 1)) / x ** (p - 1)
        else:
            out[i] = spec._dlog_h(x) / x ** (p - 1)
    mag = np.abs(out)
    decaying = bool(np.all(np.isfinite(out)) and np.all(np.diff(mag) <= 0))
    return H1Report(t, out, decaying)
