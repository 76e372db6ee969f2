"""Closed-form sharp bounds on the relative treatment effect for ordinal outcomes.

Notation used throughout the package: categories are ``0 .. J-1``;
``p1`` is the treated-arm marginal (row sums ``p_{k+}`` of the joint matrix)
and ``p0`` the control-arm marginal (column sums ``p_{+l}``). The relative
treatment effect of a coupling ``P`` is

    gamma(P) = sum_{k > l} P[k, l] - sum_{k < l} P[k, l].

For a fixed pair of marginals, gamma ranges over ``[gamma_lower, gamma_upper]``
where ``gamma_upper = min delta_jm`` and ``gamma_lower = max xi_jm`` over the
lexicographically ordered tuple set ``{(j, m): 1 <= j <= J-1, 1 <= m <= J-j}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidJointMatrix,
    MarginalShapeMismatch,
    NegativeMass,
    NotAProbabilityVector,
    TooFewCategories,
)

# Validation band before renormalization.
SUM_TOL = 1e-6
# Minimizing tuples are compared with this slack so floating-point noise in
# the last ulp cannot reorder exact ties.
TIE_TOL = 1e-12
JOINT_TOL = 1e-9


@dataclass(frozen=True)
class MarginalDistribution:
    """Probability vector over ``J`` ordered categories for one arm."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def J(self) -> int:
        return int(self.probs.shape[0])

    def __len__(self) -> int:
        return self.J

    def __getitem__(self, k):
        return self.probs[k]

    def tolist(self) -> list[float]:
        return [float(v) for v in self.probs]


ArrayLike = Union[MarginalDistribution, Sequence[float], np.ndarray]


class TupleIndex(NamedTuple):
    j: int
    m: int


def validate_marginal(raw) -> MarginalDistribution:
    """Check a raw vector and renormalize it to an exact probability vector.

    Vectors whose sum is within ``1e-6`` of one are rescaled; anything further
    away is rejected rather than silently normalized.
    """
    if isinstance(raw, MarginalDistribution):
        return raw
    arr = np.asarray(raw, dtype=float).ravel()
    if arr.shape[0] < 2:
        raise TooFewCategories(f"need at least 2 categories, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NotAProbabilityVector("non-finite entry in probability vector")
    if np.any(arr < 0):
        k = int(np.argmax(arr < 0))
        raise NegativeMass(f"negative probability {float(arr[k])!r} at category {k}")
    total = arr.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise NotAProbabilityVector(f"entries sum to {float(total)!r}, not 1")
    return MarginalDistribution(arr / total)


def _pair(p1: ArrayLike, p0: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    a = validate_marginal(p1).probs
    b = validate_marginal(p0).probs
    if a.shape != b.shape:
        raise MarginalShapeMismatch(
            f"treated marginal has {a.shape[0]} categories, control has {b.shape[0]}"
        )
    return a, b


def range_sum(v: np.ndarray, lo: int, hi: int) -> float:
    """``sum(v[lo..hi])`` inclusive; an empty range (``lo > hi``) gives 0."""
    lo = max(lo, 0)
    hi = min(hi, len(v) - 1)
    if lo > hi:
        return 0.0
    return float(np.sum(v[lo : hi + 1]))


def tuple_set(J: int) -> Iterator[TupleIndex]:
    """All ``(j, m)`` tuples for ``J`` categories, in lexicographic order."""
    for j in range(1, J):
        for m in range(1, J - j + 1):
            yield TupleIndex(j, m)


def _check_tuple(J: int, t) -> TupleIndex:
    j, m = int(t[0]), int(t[1])
    if not (1 <= j <= J - 1 and 1 <= m <= J - j):
        raise IndexOutOfRange(f"tuple (j={j}, m={m}) invalid for J={J}")
    return TupleIndex(j, m)


def delta_jm(p1: ArrayLike, p0: ArrayLike, t) -> float:
    a, b = _pair(p1, p0)
    J = a.shape[0]
    j, m = _check_tuple(J, t)
    return (
        range_sum(a, j, J - 1)
        + range_sum(a, j + m, J - 1)
        + range_sum(b, 0, j - 2)
        - range_sum(b, j + m - 1, J - 1)
    )


def xi_jm(p1: ArrayLike, p0: ArrayLike, t) -> float:
    a, b = _pair(p1, p0)
    J = a.shape[0]
    j, m = _check_tuple(J, t)
    return (
        range_sum(a, j + m - 1, J - 1)
        - range_sum(b, j, J - 1)
        - range_sum(b, j + m, J - 1)
        - range_sum(a, 0, j - 2)
    )


def distributional_effect(p1: ArrayLike, p0: ArrayLike, j: int) -> float:
    """Difference of survivor functions, ``pr{Y(1) >= j} - pr{Y(0) >= j}``."""
    a, b = _pair(p1, p0)
    J = a.shape[0]
    if not 1 <= j <= J - 1:
        raise IndexOutOfRange(f"j={j} outside 1..{J - 1}")
    return range_sum(a, j, J - 1) - range_sum(b, j, J - 1)


def delta_jm_survivor_form(p1: ArrayLike, p0: ArrayLike, t) -> float:
    """``delta_jm`` rewritten around the distributional effect."""
    a, b = _pair(p1, p0)
    J = a.shape[0]
    j, m = _check_tuple(J, t)
    return (
        distributional_effect(a, b, j)
        + range_sum(b, 0, j - 2)
        + range_sum(a, j + m, J - 1)
        + range_sum(b, j, j + m - 2)
    )


def xi_jm_survivor_form(p1: ArrayLike, p0: ArrayLike, t) -> float:
    a, b = _pair(p1, p0)
    J = a.shape[0]
    j, m = _check_tuple(J, t)
    return (
        distributional_effect(a, b, j)
        - range_sum(a, 0, j - 2)
        - range_sum(b, j + m, J - 1)
        - range_sum(a, j, j + m - 2)
    )


def delta_table(p1: ArrayLike, p0: ArrayLike) -> dict[TupleIndex, float]:
    a, b = _pair(p1, p0)
    return {t: delta_jm(a, b, t) for t in tuple_set(a.shape[0])}


def xi_table(p1: ArrayLike, p0: ArrayLike) -> dict[TupleIndex, float]:
    a, b = _pair(p1, p0)
    return {t: xi_jm(a, b, t) for t in tuple_set(a.shape[0])}


def _first_min(table: dict[TupleIndex, float]) -> tuple[float, TupleIndex]:
    best = min(table.values())
    for t, v in table.items():
        if v <= best + TIE_TOL:
            return best, t
    raise AssertionError("unreachable")


def gamma_upper(p1: ArrayLike, p0: ArrayLike) -> tuple[float, TupleIndex]:
    """Sharp upper bound and the first tuple attaining it."""
    return _first_min(delta_table(p1, p0))


def gamma_lower(p1: ArrayLike, p0: ArrayLike) -> tuple[float, TupleIndex]:
    """Sharp lower bound and the first tuple attaining it."""
    neg = {t: -v for t, v in xi_table(p1, p0).items()}
    value, t = _first_min(neg)
    return -value, t


def sign_matrix(J: int) -> np.ndarray:
    """``sign(k - l)`` for ``k, l`` in ``0..J-1``."""
    idx = np.arange(J)
    return np.sign(idx[:, None] - idx[None, :]).astype(float)


def gamma_independent(p1: ArrayLike, p0: ArrayLike) -> float:
    a, b = _pair(p1, p0)
    return float(a @ sign_matrix(a.shape[0]) @ b)


# ---------------------------------------------------------------------------
# Joint matrices


@dataclass(frozen=True)
class JointMatrix:
    entries: np.ndarray

    def __post_init__(self):
        P = np.array(self.entries, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise InvalidJointMatrix(f"expected a square J x J matrix, got shape {P.shape}")
        if not np.all(np.isfinite(P)):
            raise InvalidJointMatrix("non-finite entry")
        if np.any(P < 0):
            raise InvalidJointMatrix(f"negative entry {float(P.min())!r}")
        if abs(P.sum() - 1.0) > JOINT_TOL:
            raise InvalidJointMatrix(f"entries sum to {float(P.sum())!r}")
        P.setflags(write=False)
        object.__setattr__(self, "entries", P)

    @property
    def J(self) -> int:
        return int(self.entries.shape[0])

    @property
    def treated(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def control(self) -> np.ndarray:
        return self.entries.sum(axis=0)


def _entries(P) -> np.ndarray:
    if isinstance(P, JointMatrix):
        return P.entries
    return JointMatrix(P).entries


def gamma_of_joint(P) -> float:
    M = _entries(P)
    return float(np.sum(np.tril(M, -1)) - np.sum(np.triu(M, 1)))


def tau_eta_gamma(P) -> tuple[float, float, float]:
    """``tau = pr{Y(1) >= Y(0)}``, ``eta = pr{Y(1) > Y(0)}`` and gamma."""
    M = _entries(P)
    tau = float(np.sum(np.tril(M)))
    eta = float(np.sum(np.tril(M, -1)))
    return tau, eta, gamma_of_joint(M)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class BoundsReport:
    gamma_lower: float
    gamma_independent: float
    gamma_upper: float
    argmin_upper: TupleIndex | None = None
    argmax_lower: TupleIndex | None = None
    delta_table: dict = field(default_factory=dict)
    xi_table: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def tab(d):
            return {f"{t[0]},{t[1]}": float(v) for t, v in d.items()}

        return {
            "gamma_lower": float(self.gamma_lower),
            "gamma_independent": float(self.gamma_independent),
            "gamma_upper": float(self.gamma_upper),
            "argmin_upper": list(self.argmin_upper) if self.argmin_upper else None,
            "argmax_lower": list(self.argmax_lower) if self.argmax_lower else None,
            "delta_table": tab(self.delta_table),
            "xi_table": tab(self.xi_table),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundsReport":
        def untab(x):
            out = {}
            for key, v in x.items():
                j, m = key.split(",")
                out[TupleIndex(int(j), int(m))] = float(v)
            return out

        return cls(
            gamma_lower=float(d["gamma_lower"]),
            gamma_independent=float(d["gamma_independent"]),
            gamma_upper=float(d["gamma_upper"]),
            argmin_upper=TupleIndex(*d["argmin_upper"]) if d.get("argmin_upper") else None,
            argmax_lower=TupleIndex(*d["argmax_lower"]) if d.get("argmax_lower") else None,
            delta_table=untab(d.get("delta_table", {})),
            xi_table=untab(d.get("xi_table", {})),
        )


def sharp_bounds(p1: ArrayLike, p0: ArrayLike) -> BoundsReport:
    a, b = _pair(p1, p0)
    deltas = delta_table(a, b)
    xis = xi_table(a, b)
    upper, t_up = _first_min(deltas)
    neg_lower, t_lo = _first_min({t: -v for t, v in xis.items()})
    return BoundsReport(
        gamma_lower=-neg_lower,
        gamma_independent=gamma_independent(a, b),
        gamma_upper=upper,
        argmin_upper=t_up,
        argmax_lower=t_lo,
        delta_table=deltas,
        xi_table=xis,
    )


# ---------------------------------------------------------------------------
# Batched evaluation for per-unit and per-replicate work


def _suffix(p: np.ndarray) -> np.ndarray:
    # S[..., k] = sum_{r >= k} p[..., r], with a trailing zero at index J.
    rev = np.cumsum(p[..., ::-1], axis=-1)[..., ::-1]
    return np.concatenate([rev, np.zeros(p.shape[:-1] + (1,))], axis=-1)


def _prefix(p: np.ndarray) -> np.ndarray:
    # C[..., i + 1] = sum_{r <= i} p[..., r]; C[..., 0] = 0 encodes empty sums.
    return np.concatenate([np.zeros(p.shape[:-1] + (1,)), np.cumsum(p, axis=-1)], axis=-1)


def _tuple_arrays(J: int) -> tuple[np.ndarray, np.ndarray]:
    ts = list(tuple_set(J))
    return np.array([t.j for t in ts]), np.array([t.m for t in ts])


def batch_delta(P1: np.ndarray, P0: np.ndarray) -> np.ndarray:
    """``delta_jm`` for stacked marginals of shape ``(..., J)``.

    Returns shape ``(..., n_tuples)`` with tuples in lexicographic order.
    """
    P1 = np.asarray(P1, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    J = P1.shape[-1]
    j, m = _tuple_arrays(J)
    S1, S0, C0 = _suffix(P1), _suffix(P0), _prefix(P0)
    return S1[..., j] + S1[..., j + m] + C0[..., j - 1] - S0[..., j + m - 1]


def batch_xi(P1: np.ndarray, P0: np.ndarray) -> np.ndarray:
    P1 = np.asarray(P1, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    J = P1.shape[-1]
    j, m = _tuple_arrays(J)
    S1, S0, C1 = _suffix(P1), _suffix(P0), _prefix(P1)
    return S1[..., j + m - 1] - S0[..., j] - S0[..., j + m] - C1[..., j - 1]


def batch_bounds(P1: np.ndarray, P0: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(gamma_lower, gamma_independent, gamma_upper)`` for stacked marginals."""
    P1 = np.asarray(P1, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    S = sign_matrix(P1.shape[-1])
    indep = np.einsum("...k,kl,...l->...", P1, S, P0)
    return batch_xi(P1, P0).max(axis=-1), indep, batch_delta(P1, P0).min(axis=-1)
