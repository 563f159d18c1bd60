"""The acceptance suite: eleven numbered criteria plus the artifacts they produce.

Each ``criterion_N`` takes a :class:`Suite` (a memo of shared runs) and returns
a :class:`CriterionResult` holding every individual check with its value and
threshold. :func:`run_all` evaluates the whole suite and writes plot-ready
artifacts; nothing time-dependent goes into the artifact directory, so two
runs produce identical bytes.
"""
from __future__ import annotations

import filecmp
import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import recurrence as rec
from .bifurcation import build_singular_solution, count_lambda_crossings, kaplan_check, trace_diagram
from .bubble_analysis import analysis_report, detect_bubbles, oscillation_report, report_json, unit_solution
from .nonlinearity import h4, unit_h
from .profiles import phi_of_profile, profile_mass, profile_residual, profile_table, regular0, singular, tilde0
from .radial_solver import (
    SolverOptions,
    gelfand_oracle,
    identity_residuals,
    integrate_radial,
    pohozaev_residuals,
    shoot_first_zero,
)

GELFAND_MUS = (0.5, 1.0, 2.0 * math.log(2.0), 2.0, 3.0, 4.0)
TOWER_MUS = (4.0, 5.0, 6.0)
DIAGRAM_GRID = tuple(np.linspace(2.0, 6.0, 17))


@dataclass
class Check:
    name: str
    value: object
    bound: object
    passed: bool


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value, bound, passed) -> None:
        self.checks.append(Check(name, value, bound, bool(passed)))

    def line(self) -> str:
        failed = [c.name for c in self.checks if not c.passed]
        tail = "" if not failed else "  failed: " + ", ".join(failed)
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}{tail}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [dict(name=c.name, value=_plain(c.value), bound=_plain(c.bound), passed=c.passed) for c in self.checks],
        }


def _plain(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


class Suite:
    """Memo of the runs shared between criteria."""

    def __init__(self, jobs: int = 1, opts: SolverOptions | None = None):
        self.jobs = jobs
        self.opts = opts or SolverOptions()
        self._shots: dict = {}
        self._extra: dict = {}
        rec.clear_caches()

    def shot(self, spec, mu: float):
        key = (spec, float(mu))
        if key not in self._shots:
            self._shots[key] = shoot_first_zero(spec, mu, self.opts)
        return self._shots[key]

    def memo(self, key, fn):
        if key not in self._extra:
            self._extra[key] = fn()
        return self._extra[key]

    def singular(self):
        return self.memo("singular", lambda: build_singular_solution(h4(3.0), self.opts))

    def diagram(self):
        return self.memo(
            "diagram",
            lambda: trace_diagram(h4(3.0), DIAGRAM_GRID, self.opts, refine_dx=0.05, jobs=self.jobs, singular=self.singular()),
        )

    def crossings(self):
        return self.memo("crossings", lambda: count_lambda_crossings(self.diagram(), opts=self.opts))

    def gelfand_radius_one(self):
        return self.memo(
            "gelfand_r1",
            lambda: [integrate_radial(unit_h(1.0), gelfand_oracle(mu), mu, "radius_one", self.opts) for mu in (1.0, 2.0 * math.log(2.0))],
        )

    def all_runs(self):
        """Every solution used anywhere in the suite, in unit-disc form."""
        runs = [unit_solution(self.shot(unit_h(1.0), mu)) for mu in GELFAND_MUS]
        runs += [unit_solution(self.shot(h4(3.0), mu)) for mu in TOWER_MUS]
        runs += self.gelfand_radius_one()
        return runs


# -- criteria --------------------------------------------------------------------


def criterion_1(suite: Suite) -> CriterionResult:
    res = CriterionResult(1, "recurrence identity delta_k^(p-1) sum E_i = 2 + a_k")
    rec.clear_caches()
    t0 = time.perf_counter()
    worst = 0.0
    for p in (2.1, 2.5, 3.0, 4.0, 6.0, 10.0):
        table = rec.compute_recurrence(p, 200)
        err = float(np.max(table.identity_residuals()))
        worst = max(worst, err)
        res.add(f"p={p:g} max relative defect", err, 1e-10, err < 1e-10)
    elapsed = time.perf_counter() - t0
    res.add("runtime below 1 s", elapsed < 1.0, True, elapsed < 1.0)
    return res


def criterion_2(suite: Suite) -> CriterionResult:
    res = CriterionResult(2, "recurrence golden values")
    t3, t4 = rec.compute_recurrence(3.0, 4), rec.compute_recurrence(4.0, 4)
    hat = rec.compute_hat_recurrence(4)
    golden = [
        ("delta_1(3)", t3[1].delta, 0.3660254),
        ("a_1(3)", t3[1].a, 1.4641016),
        ("delta_1(4)", t4[1].delta, 0.5436890),
        ("a_1(4)", t4[1].a, 1.3571490),
        ("c_hat_1", hat[1].c_hat, 0.203188),
        ("a_hat_1", hat[1].a_hat, 1.187249),
    ]
    for name, value, target in golden:
        res.add(f"{name} vs {target}", value, target, abs(value - target) < 1e-6)
    return res


def criterion_3(suite: Suite) -> CriterionResult:
    res = CriterionResult(3, "monotone a_k, d_k and tail law k(1-d_k) ~ 3/(p-2)")
    for p in (3.0, 4.0, 6.0):
        table = rec.compute_recurrence(p, 200)
        a, d = table.column("a"), table.column("d")[1:]
        res.add(f"p={p:g} a_k strictly decreasing", True, True, np.all(np.diff(a) < 0))
        res.add(f"p={p:g} d_k strictly increasing", True, True, np.all(np.diff(d) > 0))
        tail = 200 * (1.0 - table[200].d)
        target = 3.0 / (p - 2.0)
        res.add(f"p={p:g} 200(1-d_200) within 25% of {target:g}", tail, target, abs(tail - target) < 0.25 * target)
    return res


def criterion_4(suite: Suite) -> CriterionResult:
    res = CriterionResult(4, "profile residuals, masses and density maxima")
    r = np.geomspace(1e-6, 1e6, 2001)
    a1 = rec.compute_recurrence(3.0, 2)[1].a
    families = [("Regular0", regular0()), ("Tilde0", tilde0())] + [
        (f"SingularA(a={a:.6g})", singular(a)) for a in (0.25, 0.5, 1.0, a1, 1.9)
    ]
    for name, prof in families:
        worst = float(np.max(np.abs(profile_residual(prof, r))))
        res.add(f"{name} residual on [1e-6, 1e6]", worst, 1e-10, worst < 1e-10)
        mass = profile_mass(prof, 1e-10)
        res.add(f"{name} mass", mass, prof.mass, abs(mass - prof.mass) < 1e-8)
        # golden-section search of the density maximum
        best = minimize_scalar(lambda s: -float(phi_of_profile(prof, math.exp(s))), bracket=(prof.s_peak - 1, prof.s_peak + 1), method="golden", tol=1e-10)
        target = prof.a**2 / 2.0
        res.add(f"{name} max density", -best.fun, target, abs(-best.fun - target) < 1e-10)
    at = float(phi_of_profile(regular0(), 2.0 * math.sqrt(2.0)))
    res.add("Regular0 density at R = 2 sqrt 2", at, 2.0, abs(at - 2.0) < 1e-10)
    return res


def criterion_5(suite: Suite) -> CriterionResult:
    res = CriterionResult(5, "Gelfand oracle lambda = 8b/(1+b)^2 and fold at 2 log 2")
    for mu in GELFAND_MUS:
        lam = suite.shot(unit_h(1.0), mu).lambda_of_mu
        exact = gelfand_oracle(mu)
        rel = abs(lam / exact - 1.0)
        res.add(f"mu={mu:.6g} relative error", rel, 1e-6, rel < 1e-6)
    fast = SolverOptions(n_forced_samples=0)
    best = minimize_scalar(
        lambda m: -shoot_first_zero(unit_h(1.0), m, fast).lambda_of_mu, bounds=(1.0, 2.0), method="bounded", options={"xatol": 1e-7}
    )
    lam_max = -best.fun
    res.add("max lambda over mu", lam_max, 2.0, abs(lam_max - 2.0) < 1e-6)
    # lambda is quadratic at the fold, so its location is only resolved to ~sqrt(1e-10)
    res.add("argmax mu vs 2 log 2", float(best.x), 2.0 * math.log(2.0), abs(best.x - 2.0 * math.log(2.0)) < 1e-3)
    at = suite.shot(unit_h(1.0), 2.0 * math.log(2.0)).lambda_of_mu
    res.add("lambda(2 log 2)", at, 2.0, abs(at - 2.0) < 1e-6)
    return res


def criterion_6(suite: Suite) -> CriterionResult:
    res = CriterionResult(6, "Green identities and Pohozaev balance on every run")
    rng = np.random.default_rng(20240611)
    for sol in suite.all_runs():
        tag = f"{sol.spec.to_dict()['variant']} p={sol.spec.p:g} mu={sol.mu:.6g}"
        id0 = max(abs(identity_residuals(sol, i, i)[0]) / (1.0 + sol.A[i]) for i in range(sol.s.size))
        res.add(f"{tag} id0", id0, 1e-8, id0 < 1e-8)
        pairs = np.sort(rng.integers(0, sol.s.size, size=(100, 2)), axis=1)
        id2 = max(abs(identity_residuals(sol, int(i), int(j))[1]) / (1.0 + abs(sol.u[i])) for i, j in pairs)
        res.add(f"{tag} id2", id2, 1e-7, id2 < 1e-7)
        if sol.pohozaev_in_range:
            idx = list(range(0, sol.s.size, max(sol.s.size // 40, 1))) + [sol.s.size - 1]
            poh = float(np.max(np.abs(pohozaev_residuals(sol, idx))))
            res.add(f"{tag} Pohozaev", poh, 1e-7, poh < 1e-7)
    return res


def criterion_7(suite: Suite) -> CriterionResult:
    res = CriterionResult(7, "bubble tower at p=3, H4, mu=6")
    t0 = time.perf_counter()
    table = rec.compute_recurrence(3.0)
    bubbles = detect_bubbles(suite.shot(h4(3.0), 6.0), table)
    osc = oscillation_report(suite.shot(h4(3.0), 6.0), table, bubbles)
    b0 = bubbles[0]
    res.add("phi_0 in [1.6, 2.05]", b0.phi_k, [1.6, 2.05], 1.6 <= b0.phi_k <= 2.05)
    res.add("psi_0 in [1.7, 2.3]", b0.psi_k, [1.7, 2.3], 1.7 <= b0.psi_k <= 2.3)
    top = osc[0].top_beta.value
    res.add("top_beta_0 in [1.6, 2.2]", top, [1.6, 2.2], 1.6 <= top <= 2.2)
    res.add("bubble 1 detected", len(bubbles), 2, len(bubbles) >= 2)
    if len(bubbles) >= 2:
        b1 = bubbles[1]
        d1, phi1 = table[1].delta, table[1].a ** 2 / 2.0
        res.add("u_1/mu within 20% of delta_1", b1.ratio, d1, abs(b1.ratio - d1) < 0.2 * d1)
        res.add("phi_1 within 30% of a_1^2/2", b1.phi_k, phi1, abs(b1.phi_k - phi1) < 0.3 * phi1)
    gaps = [abs(detect_bubbles(suite.shot(h4(3.0), mu), table)[0].phi_k - 2.0) for mu in TOWER_MUS]
    res.add("|phi_0 - 2| nonincreasing over mu = 4, 5, 6", gaps, "nonincreasing", all(np.diff(gaps) <= 0))
    elapsed = time.perf_counter() - t0
    res.add("runtime below 1 min", elapsed < 60.0, True, elapsed < 60.0)
    return res


def criterion_8(suite: Suite) -> CriterionResult:
    res = CriterionResult(8, "subcritical contrast at p=1, mu=4")
    shot = suite.shot(unit_h(1.0), 4.0)
    bubbles = detect_bubbles(shot)
    res.add("exactly one bubble", len(bubbles), 1, len(bubbles) == 1)
    unit = unit_solution(shot)
    total = float(unit.spec.p * unit.mu ** (unit.spec.p - 1.0) * unit.A[-1])
    res.add("normalized energy within 25% of 4", total, 4.0, abs(total - 4.0) < 1.0)
    top = oscillation_report(shot, None, bubbles)[0].top_beta.value
    res.add("top_beta within 20% of 4/p", top, 4.0, abs(top - 4.0) < 0.8)
    return res


def criterion_9(suite: Suite) -> CriterionResult:
    res = CriterionResult(9, "oscillation of lambda(mu) around lambda* and growth of Z")
    t0 = time.perf_counter()
    diagram = suite.diagram()
    cross = suite.crossings()
    res.add("sign changes of lambda - lambda* on [2, 6]", cross.count, 2, cross.count >= 2)
    Z = diagram.column("Z")
    res.add("Z nondecreasing", True, True, np.all(np.diff(Z) >= 0))
    res.add("max Z", float(np.max(Z)), 3, np.max(Z) >= 3)
    kap = kaplan_check(diagram.spec, diagram)
    res.add("Kaplan bound", kap.max_lambda, kap.bound, bool(kap.ok))
    elapsed = time.perf_counter() - t0
    res.add("runtime below 5 min", elapsed < 300.0, True, elapsed < 300.0)
    return res


def criterion_10(suite: Suite) -> CriterionResult:
    res = CriterionResult(10, "limits p -> infinity and p -> 2")
    r50 = rec.compute_recurrence(50.0, 2)[1]
    hat = rec.compute_hat_recurrence(2)[1]
    da = abs(r50.a - hat.a_hat)
    dc = abs(math.exp(49.0 * r50.log_delta) - hat.c_hat)
    res.add("|a_1(50) - a_hat_1|", da, 0.02, da < 0.02)
    res.add("|delta_1(50)^49 - c_hat_1|", dc, 0.02, dc < 0.02)
    a = rec.compute_recurrence(2.005, 2)[1].a
    d = rec.compute_recurrence(2.05, 2)[1].delta
    res.add("a_1(2.005) > 1.98", a, 1.98, a > 1.98)
    res.add("delta_1(2.05) < 0.05", d, 0.05, d < 0.05)
    return res


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


# -- artifacts -------------------------------------------------------------------


def write_artifacts(suite: Suite, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "recurrence_p3.csv").write_text(rec.compute_recurrence(3.0, 64).to_csv())
    hat = rec.compute_hat_recurrence(64)
    (out / "hat_recurrence.csv").write_text(
        "k,c_hat,a_hat,beta_hat_star\n" + "".join(f"{h.k},{h.c_hat:.17g},{h.a_hat:.17g},{h.beta_hat_star:.17g}\n" for h in hat)
    )
    grid = np.arange(-400, 401) * 0.025
    for name, prof in (("regular0", regular0()), ("tilde0", tilde0()), ("singular_a1", singular(rec.compute_recurrence(3.0, 2)[1].a))):
        (out / f"profile_{name}.csv").write_text(profile_table(prof, grid))
    (out / "singular_h4_p3.csv").write_text(suite.singular().to_csv())
    diagram = suite.diagram()
    (out / "diagram_h4_p3.csv").write_text(diagram.to_csv())
    (out / "diagram_h4_p3.json").write_text(diagram.summary_json(suite.crossings()))
    shot6 = suite.shot(h4(3.0), 6.0)
    (out / "solution_h4_p3_mu6.csv").write_text(unit_solution(shot6).to_csv())
    (out / "bubbles_h4_p3_mu6.json").write_text(report_json(analysis_report(shot6, rec.compute_recurrence(3.0))))
    (out / "bubbles_unith_p1_mu4.json").write_text(report_json(analysis_report(suite.shot(unit_h(1.0), 4.0))))


def evaluate(suite: Suite, echo=None) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        r = fn(suite)
        results.append(r)
        if echo:
            echo(r.line())
    return results


def run_suite(out_dir, jobs: int = 1, echo=None) -> list[CriterionResult]:
    """Criteria 1-10 plus their artifacts in ``out_dir`` (no determinism rerun)."""
    out = Path(out_dir)
    suite = Suite(jobs=jobs)
    results = evaluate(suite, echo)
    write_artifacts(suite, out)
    (out / "verify.json").write_text(json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n")
    return results


def compare_dirs(a, b) -> list[str]:
    """Names of files that differ (or exist on one side only)."""
    a, b = Path(a), Path(b)
    names = sorted({p.name for p in a.iterdir()} | {p.name for p in b.iterdir()})
    return [n for n in names if not ((a / n).exists() and (b / n).exists() and filecmp.cmp(a / n, b / n, shallow=False))]


def criterion_11(out_dir, jobs: int = 1, reference=None) -> CriterionResult:
    """Rerun the suite from scratch into a scratch directory and compare bytes."""
    res = CriterionResult(11, "determinism: byte-identical artifacts on rerun")
    with tempfile.TemporaryDirectory() as tmp:
        run_suite(tmp, jobs=jobs)
        diff = compare_dirs(out_dir, tmp)
    res.add("differing artifact files", diff, [], not diff)
    return res


def run_all(out_dir, jobs: int = 1, echo=None) -> list[CriterionResult]:
    results = run_suite(out_dir, jobs, echo)
    r11 = criterion_11(out_dir, jobs)
    if echo:
        echo(r11.line())
    return results + [r11]
