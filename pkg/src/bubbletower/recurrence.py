"""Bubble characterization sequences (delta_k, a_k) and their p -> infinity limits.

Each step solves for the ratio d_k = delta_k / delta_{k-1}, the nontrivial root
in (0, 1) of

    g(x) = c (1 - x) - 1 + x**p,      c = 2p / (2 + a_{k-1}),

and sets a_k = 2 - d_k**(p-1) (2 + a_{k-1}). The trivial root x = 1 is
divided out and the remaining equation is solved in y = log(1/x):

    q(y) = c - (1 - e^{-p y}) / (1 - e^{-y}) = 0.

q is increasing with q(0+) = c - p < 0 and q(inf) = c - 1 > 0, so the root is
bracketed. Working in y keeps full precision both when d_k is tiny (p near 2)
and when d_k**(p-1) is the natural unknown (large p): the latter is just
exp(-(p-1) y).

delta_k is stored through its logarithm so deep tables never underflow.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

DEFAULT_K = 64
DEFAULT_TOL = 1e-12
_BISECT_WIDTH = 1e-12
_NEWTON_STEPS = 5


@dataclass(frozen=True)
class RecurrenceRow:
    k: int
    log_delta: float
    a: float
    d: float  # nan at k = 0
    p: float

    @property
    def delta(self) -> float:
        return math.exp(self.log_delta)

    @property
    def log_E(self) -> float:
        return math.log(2.0 * self.a) - (self.p - 1.0) * self.log_delta

    @property
    def E(self) -> float:
        return math.exp(self.log_E)

    @property
    def star_factor(self) -> float:
        return 1.0 - self.a / (2.0 * (self.p - 1.0))

    @property
    def delta_star(self) -> float:
        return self.star_factor * self.delta

    @property
    def beta_star(self) -> float:
        return (2.0 + self.a) * self.star_factor ** (self.p - 1.0)


@dataclass(frozen=True)
class RecurrenceTable:
    p: float
    rows: tuple[RecurrenceRow, ...]
    tol: float

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, k: int) -> RecurrenceRow:
        return self.rows[k]

    @property
    def K(self) -> int:
        return len(self.rows) - 1

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def identity_residuals(self) -> np.ndarray:
        """Relative defect of delta_k**(p-1) * sum_{i<=k} E_i = 2 + a_k, per row."""
        p = self.p
        out = np.empty(len(self.rows))
        log_d = self.column("log_delta")
        a = self.column("a")
        for k in range(len(self.rows)):
            terms = 2.0 * a[: k + 1] * np.exp((p - 1.0) * (log_d[k] - log_d[: k + 1]))
            out[k] = abs(math.fsum(terms) - (2.0 + a[k])) / (2.0 + a[k])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,delta,a,d,E,delta_star,beta_star\n")
        for r in self.rows:
            vals = (r.delta, r.a, r.d, r.E, r.delta_star, r.beta_star)
            buf.write(f"{r.k}," + ",".join(f"{v:.17g}" for v in vals) + "\n")
        return buf.getvalue()


def _solve_increasing(q, dq, lo: float, hi: float, tol: float) -> float:
    """Root of an increasing function bracketed by q(lo) < 0 < q(hi)."""
    while hi - lo > _BISECT_WIDTH * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if q(mid) < 0:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    r = q(y)
    for _ in range(_NEWTON_STEPS):
        if r == 0:
            break
        slope = dq(y)
        if not (slope > 0):
            break
        y_new = y - r / slope
        if not (lo <= y_new <= hi):
            break
        r_new = q(y_new)
        if abs(r_new) >= abs(r):
            break
        y, r = y_new, r_new
    if not abs(r) < tol:
        raise ConvergenceError(f"root residual {abs(r):.3e} did not reach {tol:.1e}")
    return y


def _expand_bracket(q, lo: float) -> float:
    hi = 1.0
    while q(hi) <= 0:
        hi *= 2.0
        if hi > 1e6:
            raise ConvergenceError("failed to bracket the root")
    return max(hi, lo)


def solve_ratio(p: float, a_prev: float, tol: float = DEFAULT_TOL) -> float:
    """y = log(1/d) for the nontrivial root d in (0, 1) of the ratio equation."""
    c = 2.0 * p / (2.0 + a_prev)
    if not (1.0 < c < p):
        raise DomainError(f"no root in (0,1): c={c}, p={p}")

    def q(y):
        return c - math.expm1(-p * y) / math.expm1(-y)

    def dq(y):
        n = math.expm1(-p * y)
        dd = math.expm1(-y)
        return (p * math.exp(-p * y) * dd - n * math.exp(-y)) / (dd * dd)

    # near y = 0, q ~ (c - p) + p(p-1)/2 y; shrink lo until q(lo) < 0
    lo = min(1e-8, (p - c) / (p * (p - 1.0)))
    while q(lo) >= 0:
        lo *= 0.5
    hi = _expand_bracket(q, lo)
    return _solve_increasing(q, dq, lo, hi, tol)


def _check_args(K: int, tol: float):
    if int(K) != K or K < 1:
        raise DomainError("K must be a positive integer")
    if not (0 < tol <= 1e-6):
        raise DomainError("tol must lie in (0, 1e-6]")


@lru_cache(maxsize=64)
def _build(p: float, K: int, tol: float) -> RecurrenceTable:
    rows = [RecurrenceRow(0, 0.0, 2.0, math.nan, p)]
    log_delta, a = 0.0, 2.0
    for k in range(1, K + 1):
        y = solve_ratio(p, a, tol)
        a = 2.0 - math.exp(-(p - 1.0) * y) * (2.0 + a)
        log_delta -= y
        rows.append(RecurrenceRow(k, log_delta, a, math.exp(-y), p))
    return RecurrenceTable(p, tuple(rows), tol)


def compute_recurrence(p: float, K: int = DEFAULT_K, tol: float = DEFAULT_TOL) -> RecurrenceTable:
    """Rows k = 0..K of the bubble recurrence for exponent p > 2."""
    p = float(p)
    if not p > 2:
        raise DomainError(f"the recurrence needs p > 2, got {p}")
    _check_args(K, tol)
    return _build(p, int(K), float(tol))


def beta_k(table: RecurrenceTable, k: int, delta: float) -> float:
    """The oscillation envelope beta_k(delta) on [delta_{k+1}, delta_k]."""
    if not (0 <= k < table.K):
        raise DomainError(f"table has no rows {k} and {k + 1}")
    row, nxt = table[k], table[k + 1]
    slack = 10.0 * table.tol
    ratio = delta / row.delta
    if not (nxt.d * (1 - slack) <= ratio <= 1 + slack):
        raise DomainError(f"delta={delta} outside [{nxt.delta}, {row.delta}]")
    return beta_k_ratio(table.p, row.a, ratio)


def beta_k_ratio(p: float, a: float, ratio: float) -> float:
    return 2.0 * (2.0 + a) * ratio**p / (2.0 + a - 2.0 * p * (1.0 - ratio))


# -- p -> infinity limit ------------------------------------------------------


@dataclass(frozen=True)
class HatRow:
    k: int
    log_c_hat: float
    a_hat: float

    @property
    def c_hat(self) -> float:
        return math.exp(self.log_c_hat)

    @property
    def beta_hat_star(self) -> float:
        return (2.0 + self.a_hat) * math.exp(-self.a_hat / 2.0)


def solve_hat_ratio(a_prev: float, tol: float = DEFAULT_TOL) -> float:
    """y = log(1/x) for the root of c log(1/x) - 1 + x = 0, c = 2/(2 + a_prev)."""
    c = 2.0 / (2.0 + a_prev)
    if not (0.0 < c < 1.0):
        raise DomainError(f"no root in (0,1): c={c}")

    def q(y):
        return c + math.expm1(-y) / y

    def dq(y):
        return -(math.exp(-y) * y + math.expm1(-y)) / (y * y)

    lo = min(1e-8, 1.0 - c)
    while q(lo) >= 0:
        lo *= 0.5
    hi = _expand_bracket(q, lo)
    return _solve_increasing(q, dq, lo, hi, tol)


@lru_cache(maxsize=16)
def _build_hat(K: int, tol: float) -> tuple[HatRow, ...]:
    rows = [HatRow(0, 0.0, 2.0)]
    log_c, a = 0.0, 2.0
    for k in range(1, K + 1):
        y = solve_hat_ratio(a, tol)
        a = 2.0 - math.exp(-y) * (2.0 + a)
        log_c -= y
        rows.append(HatRow(k, log_c, a))
    return tuple(rows)


def compute_hat_recurrence(K: int = DEFAULT_K, tol: float = DEFAULT_TOL) -> list[HatRow]:
    _check_args(K, tol)
    return list(_build_hat(int(K), float(tol)))


@dataclass(frozen=True)
class LimitReport:
    k: int
    p: np.ndarray
    a: np.ndarray
    delta_pow: np.ndarray  # delta_k(p)**(p-1)
    d: np.ndarray
    a_hat: float
    c_hat: float
    hat_trend_ok: bool  # |a_k(p) - a_hat_k| shrinks as p grows
    two_trend_ok: bool  # a_k(p) climbs toward 2 as p decreases to 2


def limit_convergence_report(k: int, p_grid) -> LimitReport:
    """Trend of (a_k, delta_k**(p-1), d_k) across p, compared with both limits."""
    if k < 1:
        raise DomainError("k must be >= 1")
    ps = np.array(sorted(float(x) for x in p_grid))
    if ps.size == 0 or np.any(ps <= 2):
        raise DomainError("all p must exceed 2")
    a = np.empty_like(ps)
    dp = np.empty_like(ps)
    d = np.empty_like(ps)
    for i, p in enumerate(ps):
        row = compute_recurrence(p, max(k, 1))[k]
        a[i] = row.a
        dp[i] = math.exp((p - 1.0) * row.log_delta)
        d[i] = row.d
    hat = compute_hat_recurrence(max(k, 1))[k]
    gap = np.abs(a - hat.a_hat)
    return LimitReport(
        k=k,
        p=ps,
        a=a,
        delta_pow=dp,
        d=d,
        a_hat=hat.a_hat,
        c_hat=hat.c_hat,
        hat_trend_ok=bool(np.all(np.diff(gap) <= 0)),
        two_trend_ok=bool(np.all(np.diff(a) <= 0)),
    )


def clear_caches() -> None:
    """Drop memoized tables (used to make repeated runs fully independent)."""
    _build.cache_clear()
    _build_hat.cache_clear()
