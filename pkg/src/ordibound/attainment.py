"""Construct a coupling of two ordinal marginals whose gamma equals the upper bound.

The construction follows the tuple ``(j1, m1)`` that first attains the minimum
``delta_jm``. Three triangular sub-blocks are filled, a handful of entries
around column ``j1 - 1`` are set to balance the rows, and the remaining
upper-right block is completed with an independent coupling of the leftover
row and column mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import ArrayLike, JointMatrix, _pair, gamma_of_joint, gamma_upper, range_sum
from .errors import ConstructionInvalid, DominanceViolated, FillInfeasible

DUST = 1e-12
CHECK_TOL = 1e-9


def _clamp(v):
    """Snap values in ``[-1e-12, 0)`` to exactly zero."""
    if np.ndim(v) == 0:
        return 0.0 if -DUST <= v < 0 else float(v)
    v = np.array(v, dtype=float)
    v[(v < 0) & (v >= -DUST)] = 0.0
    return v


@dataclass(frozen=True)
class TriangularFill:
    matrix: np.ndarray
    slack: np.ndarray  # unused row capacity (variant A) or column capacity (variant B)


def _greedy_a(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    # Column l takes its demand from rows l, l+1, ... in order. Later columns
    # can only use later rows, so consuming the earliest rows first is optimal.
    n = x.size
    A = np.zeros((n, n))
    cap = x.copy()
    unmet = 0.0
    for l in range(n):
        need = y[l]
        for k in range(l, n):
            if need <= 0:
                break
            take = min(cap[k], need)
            if take > 0:
                A[k, l] = take
                cap[k] -= take
                need -= take
        unmet = max(unmet, need)
    return A, unmet


def _triangular_lp(x: np.ndarray, y: np.ndarray, exact_cols: bool) -> np.ndarray | None:
    # Feasibility fallback through the transport oracle: a slack column (or
    # row) absorbs unused capacity and cells above the diagonal cost -1, so a
    # zero optimum certifies a lower-triangular fill.
    from .transport import TransportProblem, solve_transport

    n = x.size
    forbid = -np.triu(np.ones((n, n)), 1)
    if exact_cols:
        slack = x.sum() - y.sum()
        supplies, demands = x, np.append(y, max(slack, 0.0))
        cost = np.hstack([forbid, np.zeros((n, 1))])
    else:
        slack = y.sum() - x.sum()
        supplies, demands = np.append(x, max(slack, 0.0)), y
        cost = np.vstack([forbid, np.zeros((1, n))])
    if slack < -DUST:
        return None
    supplies = supplies * (demands.sum() / supplies.sum()) if supplies.sum() > 0 else supplies
    sol = solve_transport(TransportProblem(supplies, demands, cost, "maximize"))
    if sol.objective < -CHECK_TOL:
        return None
    return np.tril(sol.plan[:n, :n])


def triangular_fill_a(x, y) -> TriangularFill:
    """Lower-triangular nonnegative matrix with column sums ``y`` and row sums <= ``x``.

    Requires suffix dominance: ``sum(x[s:]) >= sum(y[s:])`` for every ``s``.
    """
    x = _clamp(np.asarray(x, dtype=float))
    y = _clamp(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise DominanceViolated("x and y must be vectors of equal length")
    if np.any(x < 0) or np.any(y < 0):
        raise DominanceViolated("x and y must be nonnegative")
    gap = np.cumsum(x[::-1])[::-1] - np.cumsum(y[::-1])[::-1]
    if np.any(gap < -DUST):
        s = int(np.argmax(gap < -DUST))
        raise DominanceViolated(
            f"suffix at s={s}: {float(x[s:].sum())!r} < {float(y[s:].sum())!r}"
        )
    A, unmet = _greedy_a(x, y)
    if unmet > DUST:
        A = _triangular_lp(x, y, exact_cols=True)
        if A is None:
            raise FillInfeasible("no lower-triangular fill meets the column demands")
    # Absorb rounding so the column sums are exact to working precision.
    for l in range(y.size):
        resid = y[l] - A[:, l].sum()
        if resid != 0.0:
            k = l + int(np.argmax(A[l:, l])) if A[l:, l].any() else l
            A[k, l] = max(A[k, l] + resid, 0.0)
    return TriangularFill(A, _clamp(x - A.sum(axis=1)))


def triangular_fill_b(x, y) -> TriangularFill:
    """Lower-triangular nonnegative matrix with row sums ``x`` and column sums <= ``y``.

    Requires prefix dominance: ``sum(x[:s+1]) <= sum(y[:s+1])`` for every ``s``.
    Rows are processed top to bottom, each drawing from columns ``0..k`` in order.
    """
    x = _clamp(np.asarray(x, dtype=float))
    y = _clamp(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise DominanceViolated("x and y must be vectors of equal length")
    if np.any(x < 0) or np.any(y < 0):
        raise DominanceViolated("x and y must be nonnegative")
    gap = np.cumsum(y) - np.cumsum(x)
    if np.any(gap < -DUST):
        s = int(np.argmax(gap < -DUST))
        raise DominanceViolated(
            f"prefix at s={s}: {float(x[: s + 1].sum())!r} > {float(y[: s + 1].sum())!r}"
        )
    n = x.size
    B = np.zeros((n, n))
    cap = y.copy()
    unmet = 0.0
    for k in range(n):
        need = x[k]
        for l in range(k + 1):
            if need <= 0:
                break
            take = min(cap[l], need)
            if take > 0:
                B[k, l] = take
                cap[l] -= take
                need -= take
        unmet = max(unmet, need)
    if unmet > DUST:
        B = _triangular_lp(x, y, exact_cols=False)
        if B is None:
            raise FillInfeasible("no lower-triangular fill meets the row demands")
    for k in range(n):
        resid = x[k] - B[k].sum()
        if resid != 0.0:
            l = int(np.argmax(B[k, : k + 1])) if B[k, : k + 1].any() else k
            B[k, l] = max(B[k, l] + resid, 0.0)
    return TriangularFill(B, _clamp(y - B.sum(axis=0)))


@dataclass(frozen=True)
class AttainmentPlan:
    j1: int
    m1: int
    lambda1: float
    q_row_adjusted: np.ndarray
    q_col_adjusted: np.ndarray
    leftover_mass: float = 0.0


def build_plan(p1: ArrayLike, p0: ArrayLike) -> AttainmentPlan:
    a, b = _pair(p1, p0)
    J = a.size
    _, (j1, m1) = gamma_upper(a, b)
    lam = range_sum(a, j1, j1 + m1 - 1) - range_sum(b, j1 - 1, j1 + m1 - 2)
    q_row = a.copy()
    q_col = b.copy()
    if j1 > 1:
        q_row[j1 - 1] = a[j1 - 1] + min(0.0, lam)
    if m1 > 1:
        q_row[j1 + m1 - 1] = a[j1 + m1 - 1] - max(0.0, lam)
    if j1 + m1 < J:
        q_col[j1 + m1 - 1] = b[j1 + m1 - 1] - max(0.0, lam)
    return AttainmentPlan(
        j1=j1,
        m1=m1,
        lambda1=lam,
        q_row_adjusted=np.maximum(_clamp(q_row), 0.0),
        q_col_adjusted=np.maximum(_clamp(q_col), 0.0),
    )


def _fill(p1: np.ndarray, p0: np.ndarray) -> tuple[np.ndarray, AttainmentPlan]:
    J = p1.size
    plan = build_plan(p1, p0)
    j1, m1, lam = plan.j1, plan.m1, plan.lambda1
    q_row, q_col = plan.q_row_adjusted, plan.q_col_adjusted
    P = np.zeros((J, J))
    top = j1 + m1 - 1  # last row of the middle band

    # (I) rows 1..j1-1 against columns 0..j1-2.
    if j1 > 1:
        f = triangular_fill_a(q_row[1:j1], p0[0 : j1 - 1])
        P[1:j1, 0 : j1 - 1] = f.matrix
    # (II) rows j1+1..top against columns j1..top-1.
    if m1 > 1:
        f = triangular_fill_a(q_row[j1 + 1 : top + 1], p0[j1:top])
        P[j1 + 1 : top + 1, j1:top] = f.matrix
    # (III) rows top+1..J-1 against columns top..J-2.
    if j1 + m1 < J:
        f = triangular_fill_b(p1[top + 1 : J], q_col[top : J - 1])
        P[top + 1 : J, top : J - 1] = f.matrix
    # (IV)
    P[top, top] = max(0.0, lam)
    # (V) balance rows j1..top through column j1-1.
    for k in range(j1, top + 1):
        P[k, j1 - 1] = _clamp(p1[k] - P[k, j1:].sum())
    # (VI)
    P[j1 - 1, j1 - 1] = _clamp(p0[j1 - 1] - P[j1 : top + 1, j1 - 1].sum())
    # (VII) independent coupling of the leftover mass, normalized by its total.
    rows = _clamp(p1[:j1] - P[:j1, :top].sum(axis=1))
    cols = _clamp(p0[top:] - P[j1:, top:].sum(axis=0))
    rows = np.maximum(rows, 0.0)
    cols = np.maximum(cols, 0.0)
    mass = 0.5 * (rows.sum() + cols.sum())
    if mass > DUST:
        P[:j1, top:] = np.outer(rows, cols) / mass
    return P, AttainmentPlan(j1, m1, lam, q_row, q_col, float(mass))


@dataclass(frozen=True)
class ValidationReport:
    nonnegative: bool
    min_entry: float
    rows_ok: bool
    row_max_dev: float
    cols_ok: bool
    col_max_dev: float
    gamma: float
    expected_gamma: float
    gamma_ok: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.rows_ok and self.cols_ok and self.gamma_ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "nonnegative": self.nonnegative,
            "min_entry": self.min_entry,
            "rows_ok": self.rows_ok,
            "row_max_dev": self.row_max_dev,
            "cols_ok": self.cols_ok,
            "col_max_dev": self.col_max_dev,
            "gamma": self.gamma,
            "expected_gamma": self.expected_gamma,
            "gamma_ok": self.gamma_ok,
            "failures": list(self.failures),
        }


def validate_attainment(P, p1, p0, expected_gamma: float, tol: float = CHECK_TOL) -> ValidationReport:
    """Check a candidate coupling; never raises on a bad matrix."""
    M = np.asarray(P.entries if isinstance(P, JointMatrix) else P, dtype=float)
    a = np.asarray(p1.probs if hasattr(p1, "probs") else p1, dtype=float)
    b = np.asarray(p0.probs if hasattr(p0, "probs") else p0, dtype=float)
    failures = []
    min_entry = float(M.min()) if M.size else 0.0
    nonneg = min_entry >= 0.0
    if not nonneg:
        failures.append(f"negative entry {float(min_entry)!r}")
    if M.shape != (a.size, b.size):
        failures.append(f"shape {M.shape} does not match marginals")
        return ValidationReport(nonneg, min_entry, False, np.inf, False, np.inf,
                                np.nan, float(expected_gamma), False, failures)
    row_dev = float(np.max(np.abs(M.sum(axis=1) - a)))
    col_dev = float(np.max(np.abs(M.sum(axis=0) - b)))
    rows_ok, cols_ok = row_dev <= tol, col_dev <= tol
    if not rows_ok:
        failures.append(f"row sums off by {float(row_dev)!r}")
    if not cols_ok:
        failures.append(f"column sums off by {float(col_dev)!r}")
    g = float(np.sum(np.tril(M, -1)) - np.sum(np.triu(M, 1)))
    gamma_ok = abs(g - expected_gamma) <= tol
    if not gamma_ok:
        failures.append(f"gamma {float(g)!r} != expected {float(expected_gamma)!r}")
    return ValidationReport(nonneg, min_entry, rows_ok, row_dev, cols_ok, col_dev,
                            g, float(expected_gamma), gamma_ok, failures)


def construct_with_plan(p1: ArrayLike, p0: ArrayLike) -> tuple[JointMatrix, AttainmentPlan]:
    a, b = _pair(p1, p0)
    P, plan = _fill(a, b)
    target, _ = gamma_upper(a, b)
    report = validate_attainment(P, a, b, target)
    if not report.ok:
        raise ConstructionInvalid("; ".join(report.failures))
    return JointMatrix(P), plan


def construct_attaining_matrix(p1: ArrayLike, p0: ArrayLike) -> JointMatrix:
    return construct_with_plan(p1, p0)[0]


def construct_lower_attaining_matrix(p1: ArrayLike, p0: ArrayLike) -> JointMatrix:
    """Coupling attaining the lower bound, by swapping arms and transposing."""
    a, b = _pair(p1, p0)
    return JointMatrix(construct_attaining_matrix(b, a).entries.T)


__all__ = [
    "AttainmentPlan",
    "TriangularFill",
    "ValidationReport",
    "build_plan",
    "construct_attaining_matrix",
    "construct_lower_attaining_matrix",
    "construct_with_plan",
    "gamma_of_joint",
    "triangular_fill_a",
    "triangular_fill_b",
    "validate_attainment",
]
