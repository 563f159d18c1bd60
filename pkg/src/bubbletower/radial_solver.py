"""Radial shooting for -u'' - u'/r = lambda f(u) in the log-radius s = log r.

In s the equation reads u_ss = -q with q = exp(2s + log lambda + log f(u)),
so the forcing is assembled as a single exponent and nothing overflows
even when f(u) ~ e^(u^p) is far beyond double range. Alongside (u, v = u_s)
the integrator carries

    A = int_0^r lambda f(u) t dt          A_s = q
    M = int_0^r p u^(p-1) lambda f(u) t dt M_s = p u^(p-1) q
    W = int_0^r lambda f(u) t log t dt    W_s = s q

The Pohozaev balance v^2 = 4B - 2 lambda F(u) r^2, B = int_0^r lambda F(u) t dt,
is checked on demand: B is integrated afterwards along the dense solution with
F evaluated directly. Carrying lambda F(u) inside the ODE would require it to
fall from F(mu) ~ e^(mu^p) to 0, which cancels away all precision.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import DOP853, OdeSolution

from .errors import DomainError, NoZeroError, NonMonotoneError, RangeError, StepLimitError
from .nonlinearity import DIRECT_RANGE, LOG_RANGE, NonlinearitySpec, eval_F

EXP_CAP = 700.0
COLUMNS = ("u", "v", "A", "M", "W")


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    s_start_offset: float = 6.0
    max_steps: int = 100_000
    dense_output: bool = True
    n_forced_samples: int = 2048
    s_max: float = 30.0  # give up the zero search beyond r = e^s_max

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_steps < 10_000:
            raise DomainError("max_steps must be at least 10^4")
        if self.n_forced_samples < 0:
            raise DomainError("n_forced_samples must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOptions":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown solver options: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class RadialSolution:
    spec: NonlinearitySpec
    mu: float
    lam: float
    scaled: bool
    s: np.ndarray
    y: np.ndarray  # rows follow COLUMNS
    termination: str  # "HitZero" | "ReachedBoundary"
    s_bar: float | None
    n_steps: int
    dense: OdeSolution | None = field(default=None, repr=False, compare=False)
    s_shift: float = 0.0  # dense output is queried at s + s_shift

    @property
    def u(self) -> np.ndarray:
        return self.y[0]

    @property
    def v(self) -> np.ndarray:
        return self.y[1]

    @property
    def A(self) -> np.ndarray:
        return self.y[2]

    @property
    def M(self) -> np.ndarray:
        return self.y[3]

    @property
    def W(self) -> np.ndarray:
        return self.y[4]

    @property
    def pohozaev_in_range(self) -> bool:
        return self.mu**self.spec.p <= DIRECT_RANGE

    def state(self, s) -> np.ndarray:
        """Interpolated state at log-radius s (within the integrated range)."""
        if self.dense is None:
            raise DomainError("solution was computed without dense output")
        out = np.array(self.dense(np.asarray(s, dtype=float) + self.s_shift))
        if self.s_shift and out.ndim:
            # W depends on the origin of s; see to_unit_disc
            out[4] = out[4] - self.s_shift * out[2]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("s,u,duds,A,M,W\n")
        for row in zip(self.s, *self.y[:5]):
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class ShotResult:
    mu: float
    s_bar: float
    lambda_of_mu: float
    solution: RadialSolution


def log_gamma0(spec: NonlinearitySpec, lam: float, mu: float) -> float:
    """log of the inner length scale (p lambda mu^(p-1) f(mu))^(-1/2)."""
    return -0.5 * (math.log(spec.p) + math.log(lam) + (spec.p - 1.0) * math.log(mu) + spec.log_f(mu))


def _series_start(spec: NonlinearitySpec, lam: float, mu: float, s0: float) -> np.ndarray:
    p = spec.p
    eps = math.exp(2.0 * s0 + math.log(lam) + spec.log_f(mu))  # lambda f(mu) r0^2
    g1 = spec.dlog_f(mu)
    if not math.isfinite(g1):
        g1 = 0.0
    u0 = mu - eps / 4.0 + eps * eps * g1 / 64.0
    v0 = -eps / 2.0 + eps * eps * g1 / 16.0
    A0 = -v0
    M0 = p * mu ** (p - 1.0) * eps / 2.0
    W0 = eps * (s0 / 2.0 - 0.25)
    return np.array([u0, v0, A0, M0, W0])


def _make_rhs(spec: NonlinearitySpec, lam: float):
    log_f = spec.log_f
    loglam = math.log(lam)
    p = spec.p
    exp = math.exp

    def rhs(s, y):
        u, v = y[0], y[1]
        e = 2.0 * s + loglam + log_f(u)
        q = exp(e if e < EXP_CAP else EXP_CAP)
        if u > 0:
            pu = p * u ** (p - 1.0)
        else:
            pu = p if p == 1.0 else 0.0
        return np.array([v, -q, q, pu * q, s * q])

    return rhs


def march(rhs, s0: float, y0: np.ndarray, s_end: float, opts: SolverOptions, to_zero: bool):
    """Step DOP853 from s0 toward s_end with a decreasing first component.

    With ``to_zero`` the march ends at the first root of y[0], located by
    bisection on the step's dense output. Returns the merged samples (accepted
    steps plus ``opts.n_forced_samples`` uniform points), the piecewise dense
    solution, the root (or None) and the number of steps.
    """
    solver = DOP853(rhs, s0, y0, s_end, rtol=opts.rel_tol, atol=opts.abs_tol)
    ts, ys, interps = [s0], [np.asarray(y0, dtype=float)], []
    s_bar = None
    n = 0
    while solver.status == "running":
        if n >= opts.max_steps:
            raise StepLimitError(f"no termination after {n} steps (s={solver.t:.6g})")
        msg = solver.step()
        if solver.status == "failed":
            raise StepLimitError(f"integrator failed: {msg}")
        n += 1
        yn = solver.y
        if yn[1] > 0:
            raise NonMonotoneError(f"solution increases at s={solver.t:.6g}")
        dense = solver.dense_output()
        interps.append(dense)
        if to_zero and yn[0] <= 0:
            lo, hi = solver.t_old, solver.t
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                um = dense(mid)[0]
                if abs(um) < opts.abs_tol:
                    lo = hi = mid
                    break
                if um > 0:
                    lo = mid
                else:
                    hi = mid
            s_bar = 0.5 * (lo + hi)
            ts.append(s_bar)
            ys.append(dense(s_bar))
            break
        ts.append(solver.t)
        ys.append(yn.copy())
    if to_zero and s_bar is None:
        raise NoZeroError(f"no zero up to s={s_end}")

    ode_sol = OdeSolution(np.array(ts), interps)
    s_arr = np.array(ts)
    y_arr = np.array(ys).T
    if opts.n_forced_samples:
        sf = np.linspace(s0, ts[-1], opts.n_forced_samples)
        s_arr = np.concatenate([s_arr, sf[1:-1]])
        y_arr = np.concatenate([y_arr, ode_sol(sf[1:-1])], axis=1)
        order = np.argsort(s_arr, kind="stable")
        s_arr, y_arr = s_arr[order], y_arr[:, order]
        keep = np.concatenate(([True], np.diff(s_arr) > 0))
        s_arr, y_arr = s_arr[keep], y_arr[:, keep]
    return s_arr, y_arr, ode_sol, s_bar, n


def integrate_radial(
    spec: NonlinearitySpec,
    lam: float,
    mu: float,
    stop: str = "radius_one",
    opts: SolverOptions | None = None,
) -> RadialSolution:
    """Integrate from the series start near r = 0.

    ``stop`` is ``"radius_one"`` (end at s = 0) or ``"first_zero"`` (end at the
    first root of u, searched up to s = opts.s_max).
    """
    opts = opts or SolverOptions()
    lam, mu = float(lam), float(mu)
    if not (mu > 0 and math.isfinite(mu)):
        raise DomainError("mu must be positive and finite")
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError("lambda must be positive and finite")
    if mu**spec.p > LOG_RANGE:
        raise RangeError("mu^p exceeds the log-space range")
    if stop not in ("radius_one", "first_zero"):
        raise DomainError(f"unknown stop condition {stop!r}")
    s_end = 0.0 if stop == "radius_one" else opts.s_max

    # inner scale; also never start where lambda f(mu) r^2 is not small
    scale = min(log_gamma0(spec, lam, mu), -0.5 * (math.log(lam) + spec.log_f(mu)))
    s0 = min(scale, s_end) - opts.s_start_offset
    y0 = _series_start(spec, lam, mu, s0)
    rhs = _make_rhs(spec, lam)
    s_arr, y_arr, ode_sol, s_bar, n = march(rhs, s0, y0, s_end, opts, stop == "first_zero")
    termination = "HitZero" if s_bar is not None else "ReachedBoundary"
    du = np.diff(y_arr[0])
    if np.any(du > 1e-14 * np.maximum(1.0, np.abs(y_arr[0, 1:]))):
        raise NonMonotoneError("stored samples of u are not decreasing")

    return RadialSolution(
        spec=spec,
        mu=mu,
        lam=lam,
        scaled=(stop == "first_zero"),
        s=s_arr,
        y=y_arr,
        termination=termination,
        s_bar=s_bar,
        n_steps=n,
        dense=ode_sol if opts.dense_output else None,
    )


def shoot_first_zero(spec: NonlinearitySpec, mu: float, opts: SolverOptions | None = None) -> ShotResult:
    """Solve the lambda = 1 problem to its first zero; lambda(mu) = e^(2 s_bar)."""
    sol = integrate_radial(spec, 1.0, mu, "first_zero", opts)
    return ShotResult(mu=sol.mu, s_bar=sol.s_bar, lambda_of_mu=math.exp(2.0 * sol.s_bar), solution=sol)


def to_unit_disc(shot: ShotResult) -> RadialSolution:
    """Rescale a shot to the unit disc: sigma = s - s_bar, lambda = lambda(mu).

    A and M are scale invariant; W picks up -s_bar A because log r shifts.
    """
    sol, sb = shot.solution, shot.s_bar
    y = sol.y.copy()
    y[4] = y[4] - sb * y[2]
    return replace(sol, lam=shot.lambda_of_mu, scaled=False, s=sol.s - sb, y=y, s_shift=sol.s_shift + sb)


def identity_residuals(sol: RadialSolution, i: int, j: int) -> tuple[float, float]:
    """(res_id0 at sample i, res_id2 between samples i <= j).

    res_id0 = -u_s - A; res_id2 is the two-point Green identity written with
    the stored accumulators.
    """
    if not 0 <= i <= j < sol.s.size:
        raise DomainError("need sample indices 0 <= i <= j < n")
    s, t = sol.s[i], sol.s[j]
    u, A, W = sol.u, sol.A, sol.W
    res0 = -sol.v[i] - A[i]
    dA = A[j] - A[i]
    res2 = u[i] - u[j] - (t - s) * A[i] - (t * dA - (W[j] - W[i]))
    return float(res0), float(res2)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _pohozaev_B(sol: RadialSolution, targets: np.ndarray) -> np.ndarray:
    """B = int_0^r lambda F(u) t dt at the log-radii ``targets``.

    Series value at the first sample, then 10-point Gauss-Legendre on every
    accepted step of the dense solution (split at the targets).
    """
    spec, lam = sol.spec, sol.lam
    s0 = float(sol.s[0])
    eps = math.exp(2.0 * s0 + math.log(lam) + spec.log_f(sol.mu))
    B0 = 0.5 * eps * eval_F(spec, sol.mu) / math.exp(spec.log_f(sol.mu)) - eps * eps / 16.0
    steps = np.asarray(sol.dense.ts) - sol.s_shift
    nodes = np.unique(np.concatenate([steps[(steps > s0) & (steps < targets.max())], targets, [s0]]))
    cum = np.empty(nodes.size)
    cum[0] = B0
    for k in range(1, nodes.size):
        a, b = nodes[k - 1], nodes[k]
        x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
        u = np.maximum(sol.state(x)[0], 0.0)
        vals = [lam * eval_F(spec, ui) * math.exp(2.0 * xi) for ui, xi in zip(u, x)]
        cum[k] = cum[k - 1] + 0.5 * (b - a) * float(np.dot(_GL_W, vals))
    return cum[np.searchsorted(nodes, targets)]


def pohozaev_residuals(sol: RadialSolution, indices) -> np.ndarray:
    """v^2 - (4B - 2 lambda F(u) r^2) at the given sample indices."""
    if not sol.pohozaev_in_range:
        raise RangeError("F(mu) is not representable in direct range")
    if sol.dense is None:
        raise DomainError("the Pohozaev check needs dense output")
    idx = np.atleast_1d(np.asarray(indices)) % sol.s.size
    s = sol.s[idx]
    B = _pohozaev_B(sol, s)
    F = np.array([eval_F(sol.spec, max(float(x), 0.0)) for x in sol.u[idx]])
    return sol.v[idx] ** 2 - (4.0 * B - 2.0 * sol.lam * F * np.exp(2.0 * s))


def pohozaev_residual(sol: RadialSolution, i: int) -> float:
    return float(pohozaev_residuals(sol, [i])[0])


def pohozaev_check(sol: RadialSolution, i: int = -1) -> float | None:
    """Like pohozaev_residual, but None ("not checked") when F is out of range."""
    try:
        return pohozaev_residual(sol, i)
    except RangeError:
        return None


def gelfand_oracle(mu: float) -> float:
    """lambda for which u = 2 log((1+b)/(1+b r^2)) with u(0) = mu solves -Lap u = lambda e^u."""
    if not mu > 0:
        raise DomainError("mu must be positive")
    b = math.expm1(mu / 2.0)
    return 8.0 * b / (1.0 + b) ** 2


def lambda_error_estimate(spec: NonlinearitySpec, mu: float, opts: SolverOptions | None = None) -> tuple[float, float]:
    """(lambda(mu), error estimate) with the estimate |lambda(tol) - lambda(10 tol)|."""
    opts = opts or SolverOptions()
    fine = shoot_first_zero(spec, mu, replace(opts, n_forced_samples=0))
    coarse = shoot_first_zero(
        spec, mu, replace(opts, n_forced_samples=0, rel_tol=10 * opts.rel_tol, abs_tol=10 * opts.abs_tol)
    )
    return fine.lambda_of_mu, abs(fine.lambda_of_mu - coarse.lambda_of_mu)
