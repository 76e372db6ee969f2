"""Exact linear-programming oracle over the transportation polytope.

A small dense two-phase tableau simplex with Bland's rule. It is deliberately
independent of the closed-form bounds so that the two can be checked against
each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .bounds import ArrayLike, _pair, sign_matrix
from .errors import Infeasible, OrdiboundError, Unbounded

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
MAX_ITER = 50_000


@dataclass(frozen=True)
class TransportProblem:
    supplies: np.ndarray
    demands: np.ndarray
    costs: np.ndarray
    sense: Literal["maximize", "minimize"] = "maximize"

    def __post_init__(self):
        s = np.asarray(self.supplies, dtype=float).ravel()
        d = np.asarray(self.demands, dtype=float).ravel()
        c = np.asarray(self.costs, dtype=float)
        if c.shape != (s.size, d.size):
            raise Infeasible(f"cost matrix shape {c.shape} does not match ({s.size}, {d.size})")
        if np.any(s < 0) or np.any(d < 0):
            raise Infeasible("supplies and demands must be nonnegative")
        if abs(s.sum() - d.sum()) > FEAS_TOL:
            raise Infeasible(f"total supply {float(s.sum())!r} != total demand {float(d.sum())!r}")
        if not np.all(np.isfinite(c)):
            raise Infeasible("costs must be finite")
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"unknown sense {self.sense!r}")
        object.__setattr__(self, "supplies", s)
        object.__setattr__(self, "demands", d)
        object.__setattr__(self, "costs", c)


@dataclass(frozen=True)
class TransportSolution:
    plan: np.ndarray
    objective: float
    iterations: int


class _Tableau:
    """Constraint rows ``[A | b]`` plus a reduced-cost row for a maximization."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int]):
        self.T = np.hstack([A, b[:, None]])
        self.basis = basis
        self.iterations = 0

    def reduced_costs(self, c: np.ndarray) -> np.ndarray:
        return c[self.basis] @ self.T[:, :-1] - c

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        others = np.abs(T[:, col]) > 0
        others[row] = False
        T[others] -= np.outer(T[others, col], T[row])
        self.basis[row] = col
        self.iterations += 1

    def run(self, c: np.ndarray, allowed: int) -> None:
        """Maximize ``c @ x`` over columns ``0..allowed-1`` with Bland's rule."""
        while True:
            if self.iterations > MAX_ITER:
                raise Unbounded("simplex iteration limit exceeded")
            r = self.reduced_costs(c)[:allowed]
            entering = np.flatnonzero(r < -PIVOT_TOL)
            if entering.size == 0:
                return
            col = int(entering[0])
            column = self.T[:, col]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                raise Unbounded("LP unbounded; impossible on a transportation polytope")
            ratios = self.T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL]
            # Bland: among tied rows, leave the basic variable with smallest index.
            row = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(row, col)


def _constraints(n_rows: int, n_cols: int, s: np.ndarray, d: np.ndarray):
    # x is the row-major flattening of the plan. The last column-sum constraint
    # is implied by the others plus the totals, so it is dropped.
    n = n_rows * n_cols
    A = np.zeros((n_rows + n_cols - 1, n))
    for k in range(n_rows):
        A[k, k * n_cols : (k + 1) * n_cols] = 1.0
    for l in range(n_cols - 1):
        A[n_rows + l, l::n_cols] = 1.0
    b = np.concatenate([s, d[:-1]])
    return A, b


def solve_transport(problem: TransportProblem) -> TransportSolution:
    s, d, C = problem.supplies, problem.demands, problem.costs
    n_rows, n_cols = C.shape
    n = n_rows * n_cols
    A, b = _constraints(n_rows, n_cols, s, d)
    m = A.shape[0]

    # Phase 1: artificial basis, maximize -sum(artificials).
    tab = _Tableau(np.hstack([A, np.eye(m)]), b.copy(), list(range(n, n + m)))
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    tab.run(c1, n + m)
    if tab.T[:, -1] @ (np.array(tab.basis) >= n) > FEAS_TOL:
        raise Infeasible("no feasible plan for the given marginals")

    # Drive remaining (zero-level) artificials out of the basis.
    keep = []
    for i in range(m):
        if tab.basis[i] < n:
            keep.append(i)
            continue
        cand = np.flatnonzero(np.abs(tab.T[i, :n]) > PIVOT_TOL)
        if cand.size:
            tab.pivot(i, int(cand[0]))
            keep.append(i)
    if len(keep) < m:
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[i] for i in keep]
    tab.T = np.hstack([tab.T[:, :n], tab.T[:, -1:]])

    # Phase 2.
    c = C.ravel().astype(float)
    if problem.sense == "minimize":
        c = -c
    tab.run(c, n)
    if np.any(tab.reduced_costs(c) < -PIVOT_TOL):
        raise Unbounded("optimality certificate failed")

    x = np.zeros(n)
    x[tab.basis] = tab.T[:, -1]
    x[np.abs(x) < 1e-12] = 0.0
    x = np.maximum(x, 0.0)
    plan = x.reshape(n_rows, n_cols)
    return TransportSolution(
        plan=plan, objective=float(np.sum(C * plan)), iterations=tab.iterations
    )


def lp_gamma_bounds(p1: ArrayLike, p0: ArrayLike) -> tuple[float, float]:
    """Extremes of gamma over all couplings of ``p1`` and ``p0``, by LP."""
    a, b = _pair(p1, p0)
    S = sign_matrix(a.shape[0])
    hi = solve_transport(TransportProblem(a, b, S, "maximize")).objective
    lo = solve_transport(TransportProblem(a, b, S, "minimize")).objective
    return lo, hi


def oracle_sweep(trials: int, max_categories: int = 8, seed: int = 0,
                 min_categories: int = 2, attainment: bool = True) -> dict:
    """Compare closed-form bounds with the LP on random marginal pairs.

    ``trials`` pairs are drawn for every ``J`` in ``min_categories..max_categories``.
    With ``attainment`` the constructed coupling is validated on each pair too.
    """
    from .attainment import _fill, validate_attainment
    from .bounds import gamma_lower, gamma_upper
    from .simulate import random_marginal_pairs

    per_j = {}
    worst = {"upper": 0.0, "lower": 0.0, "attainment": 0.0}
    failures = 0
    for J in range(min_categories, max_categories + 1):
        dev_u = dev_l = dev_a = 0.0
        for p1, p0 in random_marginal_pairs(seed, trials, J):
            lo, hi = lp_gamma_bounds(p1, p0)
            up, _ = gamma_upper(p1, p0)
            low, _ = gamma_lower(p1, p0)
            du, dl = abs(hi - up), abs(lo - low)
            dev_u, dev_l = max(dev_u, du), max(dev_l, dl)
            bad = du > FEAS_TOL or dl > FEAS_TOL
            if attainment:
                try:
                    P, _ = _fill(p1, p0)
                except OrdiboundError:
                    bad, dev_a = True, np.inf
                else:
                    rep = validate_attainment(P, p1, p0, up)
                    dev_a = max(dev_a, rep.row_max_dev, rep.col_max_dev, abs(rep.gamma - up),
                                max(0.0, -rep.min_entry))
                    bad = bad or not rep.ok
            failures += bad
        per_j[str(J)] = {"max_dev_upper": dev_u, "max_dev_lower": dev_l,
                         "max_dev_attainment": dev_a}
        worst["upper"] = max(worst["upper"], dev_u)
        worst["lower"] = max(worst["lower"], dev_l)
        worst["attainment"] = max(worst["attainment"], dev_a)
    return {
        "trials_per_J": trials,
        "categories": [min_categories, max_categories],
        "seed": seed,
        "tolerance": FEAS_TOL,
        "max_dev_upper": worst["upper"],
        "max_dev_lower": worst["lower"],
        "max_dev_attainment": worst["attainment"] if attainment else None,
        "failures": int(failures),
        "per_J": per_j,
        "passed": failures == 0,
    }
