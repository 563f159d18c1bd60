"""Concentration structure of a computed radial solution.

The scaled density phi = p lambda r^2 u^(p-1) f(u) has one peak per bubble,
and psi = -p r u^(p-1) u' = p u^(p-1) A is its integrated counterpart. The
peaks of phi, their basins (between neighbouring phi-minima) and the crossing
pattern of u against the envelope curves U_beta describe the tower.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoBubblesError
from .profiles import Curve, Tabulated, UBeta, VL
from .radial_solver import RadialSolution, ShotResult, to_unit_disc
from .recurrence import RecurrenceTable

DEFAULT_MIN_PHI = 0.05
GRID_POINTS = 16384


@dataclass(frozen=True)
class Comparison:
    value: float
    target: float
    rel_gap: float

    @classmethod
    def of(cls, value: float, target: float) -> "Comparison":
        return cls(float(value), float(target), abs(value - target) / abs(target))


@dataclass(frozen=True)
class BubbleReport:
    k: int
    s_k: float
    u_k: float
    ratio: float
    phi_k: float
    psi_k: float
    energy_pM: float
    energy_E: float
    loc_stat: float
    basin: tuple[float, float]
    in_asymptotic_range: bool  # u_k above the point where f takes its closed form
    targets: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OscillationRow:
    k: int
    top_beta: Comparison
    valley_s: float | None
    valley_beta: Comparison | None


@dataclass(frozen=True)
class IntersectionReport:
    curve: str
    zeros: tuple[float, ...]
    tangencies: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.zeros)


def unit_solution(sol) -> RadialSolution:
    """The unit-disc form of a shot, a scaled solution, or a unit-disc solution."""
    if isinstance(sol, ShotResult):
        return to_unit_disc(sol)
    if sol.scaled:
        if sol.s_bar is None:
            raise DomainError("scaled solution without a zero cannot be put on the unit disc")
        return to_unit_disc(ShotResult(sol.mu, sol.s_bar, math.exp(2 * sol.s_bar), sol))
    return sol


def _log_phi(sol: RadialSolution, s, u):
    p = sol.spec.p
    s = np.atleast_1d(np.asarray(s, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.full(s.shape, -np.inf)
    pos = u > 0
    lf = np.array([sol.spec.log_f(x) for x in u[pos]])
    out[pos] = math.log(p) + math.log(sol.lam) + 2.0 * s[pos] + (p - 1.0) * np.log(u[pos]) + lf
    return out


def _psi(sol: RadialSolution, u, A):
    p = sol.spec.p
    u = np.asarray(u, dtype=float)
    return p * np.where(u > 0, np.abs(u) ** (p - 1.0), 0.0) * A


def compute_phi_psi(sol: RadialSolution, s=None):
    """(s, phi, psi) on the stored samples, or on ``s`` via dense output."""
    if s is None:
        s, u, A = sol.s, sol.u, sol.A
    else:
        s = np.asarray(s, dtype=float)
        st = sol.state(s)
        u, A = st[0], st[2]
    return s, np.exp(_log_phi(sol, s, u)), _psi(sol, u, A)


def phi_psi_csv(sol: RadialSolution) -> str:
    s, phi, psi = compute_phi_psi(sol)
    buf = io.StringIO()
    buf.write("s,phi,psi\n")
    for row in zip(s, phi, psi):
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return buf.getvalue()


def _grid(sol: RadialSolution, n: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(sol.s[0], sol.s[-1], n)


def _targets(table: RecurrenceTable | None, k: int, p: float) -> dict:
    if table is None:
        # below the supercritical regime only the regular bubble is expected
        return {"phi": 2.0, "ratio": 1.0, "energy_pM": 4.0, "psi": 2.0} if k == 0 else {}
    if k > table.K:
        return {}
    row = table[k]
    return {
        "phi": row.a**2 / 2.0,
        "ratio": row.delta,
        "energy_pM": 2.0 * row.a,
        "psi": 2.0,
        "loc_stat": row.delta**p / 2.0,
    }


def detect_bubbles(
    sol,
    table: RecurrenceTable | None = None,
    min_phi: float = DEFAULT_MIN_PHI,
    n_grid: int = GRID_POINTS,
) -> list[BubbleReport]:
    """Peaks of phi above ``min_phi``, ordered by log-radius, with basin energies."""
    sol = unit_solution(sol)
    p, mu = sol.spec.p, sol.mu
    s = _grid(sol, n_grid)
    st = sol.state(s)
    lphi = _log_phi(sol, s, st[0])
    if not np.max(lphi) >= math.log(min_phi):
        raise NoBubblesError(f"max phi = {math.exp(np.max(lphi)):.3g} below {min_phi}")

    inner = lphi[1:-1]
    is_peak = (inner > lphi[:-2]) & (inner >= lphi[2:]) & (inner >= math.log(min_phi))
    peaks = np.nonzero(is_peak)[0] + 1
    h = s[1] - s[0]
    s_peaks = []
    for i in peaks:
        l0, l1, l2 = lphi[i - 1], lphi[i], lphi[i + 1]
        den = l0 - 2.0 * l1 + l2
        off = 0.5 * h * (l0 - l2) / den if np.isfinite(den) and den < 0 else 0.0
        s_peaks.append(s[i] + float(np.clip(off, -h, h)))

    edges = [0]
    for i, j in zip(peaks[:-1], peaks[1:]):
        edges.append(i + int(np.argmin(lphi[i : j + 1])))
    edges.append(s.size - 1)

    reports = []
    for k, sk in enumerate(s_peaks):
        u_k, _, A_k, _, _ = sol.state(sk)
        lo, hi = edges[k], edges[k + 1]
        dM = st[3, hi] - st[3, lo]
        dA = st[2, hi] - st[2, lo]
        phi_k = float(np.exp(_log_phi(sol, sk, u_k))[0])
        psi_k = float(_psi(sol, u_k, A_k))
        rep = BubbleReport(
            k=k,
            s_k=float(sk),
            u_k=float(u_k),
            ratio=float(u_k / mu),
            phi_k=phi_k,
            psi_k=psi_k,
            energy_pM=float(dM),
            energy_E=float(p * mu ** (p - 1.0) * dA),
            loc_stat=float(-sk / mu**p),
            basin=(float(s[lo]), float(s[hi])),
            in_asymptotic_range=bool(u_k >= sol.spec.t_join),
            targets={},
        )
        values = {"phi": rep.phi_k, "ratio": rep.ratio, "energy_pM": rep.energy_pM, "psi": rep.psi_k, "loc_stat": rep.loc_stat}
        tg = {name: Comparison.of(values[name], t) for name, t in _targets(table, k, p).items()}
        object.__setattr__(rep, "targets", tg)
        reports.append(rep)
    return reports


def oscillation_report(sol, table: RecurrenceTable | None = None, bubbles=None) -> list[OscillationRow]:
    """u^p / log(1/r) at each phi-peak and at the u/mu = delta_k* crossing."""
    sol = unit_solution(sol)
    p, mu = sol.spec.p, sol.mu
    if bubbles is None:
        bubbles = detect_bubbles(sol, table)
    top_target = 2.0 if p > 2 else 4.0 / p
    rows = []
    for b in bubbles:
        top = Comparison.of(b.u_k**p / -b.s_k, top_target) if b.s_k < 0 else None
        vs, vb = None, None
        if table is not None and b.k < table.K:
            row = table[b.k]
            level = row.delta_star * mu
            s_lo, s_hi = b.s_k, sol.s[-1]

            def gap(x):
                return float(sol.state(x)[0]) - level

            if gap(s_lo) > 0 > gap(s_hi):
                vs = brentq(gap, s_lo, s_hi, xtol=1e-12)
                if vs < 0:
                    vb = Comparison.of(level**p / -vs, row.beta_star)
        rows.append(OscillationRow(b.k, top, vs, vb))
    return rows


def curve_name(curve) -> str:
    if isinstance(curve, UBeta):
        return f"UBeta(beta={curve.beta:g},p={curve.p:g})"
    if isinstance(curve, VL):
        return f"VL(L={curve.L:g},p={curve.p:g},m={curve.m:g})"
    if isinstance(curve, Tabulated):
        return "Tabulated"
    return getattr(curve, "name", type(curve).__name__)


def count_intersections(
    sol: RadialSolution,
    curve: Curve,
    s_interval: tuple[float, float] | None = None,
    n_grid: int = GRID_POINTS,
    abs_tol: float = 1e-12,
) -> IntersectionReport:
    """Strict sign changes of u(s) - U(s) on a dense grid, refined to 1e-10 in s."""
    lo, hi = (sol.s[0], sol.s[-1]) if s_interval is None else s_interval
    lo, hi = max(lo, sol.s[0]), min(hi, sol.s[-1])
    if not lo < hi:
        raise DomainError("empty intersection interval")
    grid = np.union1d(np.linspace(lo, hi, n_grid), sol.s[(sol.s >= lo) & (sol.s <= hi)])
    diff = sol.state(grid)[0] - np.asarray(curve.value(grid))
    sgn = np.sign(diff)
    sgn[np.abs(diff) < abs_tol] = 0

    def fn(x):
        return float(sol.state(x)[0] - curve.value(x))

    zeros, tangencies = [], []
    last_i, last_sign = None, 0
    for i, sg in enumerate(sgn):
        if sg == 0:
            continue
        if last_sign and sg != last_sign:
            zeros.append(brentq(fn, grid[last_i], grid[i], xtol=1e-10))
        elif last_sign and i > last_i + 1:
            tangencies.append(float(np.mean(grid[last_i + 1 : i])))
        last_i, last_sign = i, sg
    return IntersectionReport(curve_name(curve), tuple(float(z) for z in zeros), tuple(tangencies))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


def analysis_report(sol, table: RecurrenceTable | None = None, curves=(), min_phi: float = DEFAULT_MIN_PHI) -> dict:
    """Bubbles, oscillation and intersections of one solution as plain data."""
    unit = unit_solution(sol)
    bubbles = detect_bubbles(unit, table, min_phi)
    osc = oscillation_report(unit, table, bubbles)
    inter = []
    for c in curves:
        lo = max(unit.s[0], getattr(c, "s_min", -math.inf))
        hi = min(unit.s[-1], getattr(c, "s_max", math.inf) - 1e-9)
        inter.append(count_intersections(unit, c, (lo, hi)))
    out = {
        "mu": unit.mu,
        "lambda": unit.lam,
        "p": unit.spec.p,
        "bubbles": [asdict(b) for b in bubbles],
        "oscillation": [asdict(o) for o in osc],
        "intersections": [dict(curve=r.curve, zeros=list(r.zeros), count=r.count, tangencies=list(r.tangencies)) for r in inter],
    }
    return _jsonable(out)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
