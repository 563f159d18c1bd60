"""Singular solution, bifurcation diagram lambda(mu) and its oscillation.

For the H4 nonlinearity the function U(r) = (2 log(1/r))^(1/p) solves
-U'' - U'/r = f(U) exactly wherever U >= tau0, i.e. for r <= R0 = e^(-tau0^p/2).
Continuing it outward to its first zero R* gives the singular solution of
the scaled problem, and lambda* = R*^2 is the value around which lambda(mu)
oscillates.
"""
from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import OdeSolution
from scipy.optimize import brentq, minimize_scalar

from .bubble_analysis import count_intersections, detect_bubbles
from .errors import BubbleTowerError, DomainError, NoBubblesError
from .nonlinearity import H4, NonlinearitySpec
from .radial_solver import EXP_CAP, SolverOptions, march, shoot_first_zero
from .recurrence import compute_recurrence

MU_POWER_CEILING = 300.0
CLOSED_FORM_SPAN = 60.0  # log-radius span of closed-form samples below R0


@dataclass(frozen=True)
class SingularSolution:
    spec: NonlinearitySpec
    s_R0: float
    s_bar_star: float
    s: np.ndarray
    U: np.ndarray
    dUds: np.ndarray
    dense: OdeSolution = field(repr=False, compare=False)
    name: str = "singular"

    @property
    def R0(self) -> float:
        return math.exp(self.s_R0)

    @property
    def R_bar_star(self) -> float:
        return math.exp(self.s_bar_star)

    @property
    def lambda_star(self) -> float:
        return math.exp(2.0 * self.s_bar_star)

    def _eval(self, s, col: int):
        s = np.asarray(s, dtype=float)
        if np.any(s > self.s_bar_star + 1e-12):
            raise DomainError("beyond the zero of the singular solution")
        p = self.spec.p
        core = s <= self.s_R0
        with np.errstate(invalid="ignore", divide="ignore"):
            closed = (-2.0 * s) ** (1.0 / p)
            if col == 1:
                closed = -2.0 / (p * closed ** (p - 1.0))
        outer = np.clip(s, self.s_R0, self.s_bar_star)
        num = np.asarray(self.dense(outer))[col]
        return np.where(core, closed, num)

    def value(self, s):
        return self._eval(s, 0)

    def slope(self, s):
        return self._eval(s, 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("s,U,dUds\n")
        for row in zip(self.s, self.U, self.dUds):
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        return buf.getvalue()


def _tau0(spec: NonlinearitySpec) -> float:
    if not isinstance(spec.variant, H4):
        raise DomainError("the singular solution is built for the H4 nonlinearity")
    return spec.variant.tau0


def build_singular_solution(spec: NonlinearitySpec, opts: SolverOptions | None = None) -> SingularSolution:
    """Closed form up to R0, then the lambda = 1 equation out to the first zero."""
    opts = opts or SolverOptions()
    tau0 = _tau0(spec)
    p = spec.p
    s_R0 = -(tau0**p) / 2.0
    log_f = spec.log_f

    def rhs(s, y):
        e = 2.0 * s + log_f(y[0])
        return np.array([y[1], -math.exp(e if e < EXP_CAP else EXP_CAP)])

    y0 = np.array([tau0, -2.0 / (p * tau0 ** (p - 1.0))])
    s_out, y_out, dense, s_bar, _ = march(rhs, s_R0, y0, opts.s_max, opts, True)
    n_core = max(opts.n_forced_samples // 4, 16)
    s_core = np.linspace(s_R0 - CLOSED_FORM_SPAN, s_R0, n_core)[:-1]
    U_core = (-2.0 * s_core) ** (1.0 / p)
    return SingularSolution(
        spec=spec,
        s_R0=s_R0,
        s_bar_star=float(s_bar),
        s=np.concatenate([s_core, s_out]),
        U=np.concatenate([U_core, y_out[0]]),
        dUds=np.concatenate([-2.0 / (p * U_core ** (p - 1.0)), y_out[1]]),
        dense=dense,
    )


def singular_core_residual(sing: SingularSolution, s) -> np.ndarray:
    """r^2 (-U'' - U'/r - f(U)) = -U_ss - e^(2s) f(U) on the closed-form core.

    Uses the analytic U_ss = -4(p-1)/(p^2 U^(2p-1)).
    """
    s = np.asarray(s, dtype=float)
    if np.any(s > sing.s_R0):
        raise DomainError("closed form holds only up to R0")
    p = sing.spec.p
    U = (-2.0 * s) ** (1.0 / p)
    Uss = -4.0 * (p - 1.0) / (p * p * U ** (2.0 * p - 1.0))
    lf = np.array([sing.spec.log_f(float(x)) for x in np.atleast_1d(U)]).reshape(U.shape)
    return -Uss - np.exp(2.0 * s + lf)


# -- bifurcation diagram ------------------------------------------------------


@dataclass(frozen=True)
class DiagramRow:
    mu: float
    lam: float
    Z: int | None
    bubbles: int | None
    status: str


@dataclass(frozen=True)
class Diagram:
    spec: NonlinearitySpec
    rows: tuple[DiagramRow, ...]
    lambda_star: float | None

    @property
    def ok_rows(self) -> list[DiagramRow]:
        return [r for r in self.rows if r.status == "ok"]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.ok_rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("mu,lambda,Z,bubbles\n")
        for r in self.rows:
            z = "" if r.Z is None else str(r.Z)
            b = "" if r.bubbles is None else str(r.bubbles)
            buf.write(f"{r.mu:.17g},{r.lam:.17g},{z},{b}\n")
        return buf.getvalue()

    def summary(self, crossings: "CrossingReport | None" = None) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "lambda_star": self.lambda_star,
            "points": [{"mu": r.mu, "status": r.status} for r in self.rows],
        }
        if crossings is not None:
            out["crossings"] = {"count": crossings.count, "mu": list(crossings.mus)}
        return out

    def summary_json(self, crossings=None) -> str:
        return json.dumps(self.summary(crossings), indent=2, sort_keys=True)


def _point(args) -> DiagramRow:
    spec, mu, opts, sing = args
    if mu**spec.p > MU_POWER_CEILING:
        return DiagramRow(mu, math.nan, None, None, "beyond_ceiling")
    try:
        shot = shoot_first_zero(spec, mu, opts)
    except BubbleTowerError as exc:
        return DiagramRow(mu, math.nan, None, None, exc.code)
    Z = None
    if sing is not None:
        sol = shot.solution
        hi = min(shot.s_bar, sing.s_bar_star)
        Z = count_intersections(sol, sing, (sol.s[0], hi - 1e-9)).count
    table = compute_recurrence(spec.p, 8) if spec.p > 2 else None
    try:
        nb = len(detect_bubbles(shot, table))
    except NoBubblesError:
        nb = 0
    return DiagramRow(mu, shot.lambda_of_mu, Z, nb, "ok")


def _evaluate(spec, mus, opts, sing, jobs: int) -> list[DiagramRow]:
    tasks = [(spec, float(m), opts, sing) for m in mus]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point, tasks))
    return [_point(t) for t in tasks]


def trace_diagram(
    spec: NonlinearitySpec,
    mu_grid,
    opts: SolverOptions | None = None,
    refine_dx: float | None = 0.05,
    jobs: int = 1,
    singular: SingularSolution | None = None,
) -> Diagram:
    """lambda(mu), Z(mu) and bubble counts on a grid, refined near lambda = lambda*.

    For H4 the singular solution is built (unless supplied) and used both as
    the reference lambda* and as the curve for the intersection counts.
    Midpoints are inserted wherever lambda - lambda* changes sign between
    neighbours until their spacing drops below ``refine_dx``.
    """
    opts = opts or SolverOptions()
    mus = [float(m) for m in mu_grid]
    if not mus or any(b <= a for a, b in zip(mus[:-1], mus[1:])):
        raise DomainError("mu grid must be nonempty and increasing")
    # the dense interpolants are not needed across processes; keep payload small
    opts = replace(opts, n_forced_samples=min(opts.n_forced_samples, 512))
    if singular is None and isinstance(spec.variant, H4):
        singular = build_singular_solution(spec, opts)
    lam_star = singular.lambda_star if singular is not None else None
    rows = {r.mu: r for r in _evaluate(spec, mus, opts, singular, jobs)}

    while lam_star is not None and refine_dx:
        ordered = [rows[m] for m in sorted(rows)]
        good = [r for r in ordered if r.status == "ok"]
        new = []
        for a, b in zip(good[:-1], good[1:]):
            if (a.lam - lam_star) * (b.lam - lam_star) < 0 and b.mu - a.mu > refine_dx:
                new.append(0.5 * (a.mu + b.mu))
        if not new:
            break
        for r in _evaluate(spec, new, opts, singular, jobs):
            rows[r.mu] = r
    return Diagram(spec, tuple(rows[m] for m in sorted(rows)), lam_star)


@dataclass(frozen=True)
class CrossingReport:
    count: int
    mus: tuple[float, ...]


def count_lambda_crossings(
    diagram: Diagram,
    lambda_star: float | None = None,
    opts: SolverOptions | None = None,
    max_shots: int = 20,
    refine: bool = True,
) -> CrossingReport:
    """Strict sign changes of lambda(mu) - lambda*, each located by bisection in mu."""
    lam_star = diagram.lambda_star if lambda_star is None else lambda_star
    if lam_star is None:
        raise DomainError("no reference lambda*")
    good = diagram.ok_rows
    opts = replace(opts or SolverOptions(), n_forced_samples=0)
    mus = []
    for a, b in zip(good[:-1], good[1:]):
        ga, gb = a.lam - lam_star, b.lam - lam_star
        if ga * gb >= 0:
            continue
        lo, hi = a.mu, b.mu
        if refine:
            for _ in range(max_shots):
                mid = 0.5 * (lo + hi)
                gm = shoot_first_zero(diagram.spec, mid, opts).lambda_of_mu - lam_star
                if gm == 0:
                    lo = hi = mid
                    break
                if (gm > 0) == (ga > 0):
                    lo = mid
                else:
                    hi = mid
            mus.append(0.5 * (lo + hi))
        else:
            mus.append(lo + (hi - lo) * ga / (ga - gb))
    return CrossingReport(len(mus), tuple(mus))


# -- Kaplan bound ---------------------------------------------------------------


def bessel_j0(x: float, terms: int = 60) -> float:
    """J0 by its ascending series sum (-1)^k (x/2)^(2k) / (k!)^2."""
    q = -(x * x) / 4.0
    term, total = 1.0, 1.0
    for k in range(1, terms):
        term *= q / (k * k)
        total += term
    return total


def bessel_j0_first_zero() -> float:
    return brentq(bessel_j0, 2.0, 3.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class KaplanReport:
    c: float
    t_min: float
    Lambda1: float
    bound: float | None
    max_lambda: float | None
    h2_holds: bool
    ok: bool | None


def h2_infimum(spec: NonlinearitySpec, t_max: float = 50.0) -> tuple[float, float]:
    """inf f(t)/t over (0, t_max]: log-spaced grid, then a bounded polish."""
    t = np.geomspace(1e-8, t_max, 20001)
    lr = spec.log_f_array(t) - np.log(t)
    i = int(np.argmin(lr))
    if i == 0 and lr[0] < lr[np.searchsorted(t, 1e-4)] - 1.0:
        # still falling at the left end of the grid: the infimum is the t -> 0 limit, 0
        return 0.0, 0.0
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    best_t, best = t[i], lr[i]
    if hi > lo:
        res = minimize_scalar(lambda x: spec.log_f(x) - math.log(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best:
            best_t, best = float(res.x), float(res.fun)
    return math.exp(best), float(best_t)


def kaplan_check(spec: NonlinearitySpec, lambdas=None, tol: float = 1e-8) -> KaplanReport:
    """lambda <= Lambda1 / c with c = inf f(t)/t, when that infimum is positive."""
    L1 = bessel_j0_first_zero() ** 2
    c, tm = h2_infimum(spec)
    h2 = c > 1e-12
    if isinstance(lambdas, Diagram):
        lambdas = lambdas.column("lam")
    lam_max = None if lambdas is None or len(lambdas) == 0 else float(np.max(lambdas))
    bound = L1 / c if h2 else None
    ok = None if (bound is None or lam_max is None) else bool(lam_max <= bound * (1 + tol))
    return KaplanReport(c, tm, L1, bound, lam_max, h2, ok)
