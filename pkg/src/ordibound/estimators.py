"""Estimated marginals and plug-in bounds from unit-level data.

Designs:

* ``cre`` - completely randomized experiment, arm-wise sample proportions;
* ``ipw`` - Hajek-weighted proportions with a logistic propensity score;
* ``outcome_regression`` - per-arm proportional-odds fits averaged over all units;
* ``covariate_sharpened`` - bounds computed per unit from the fitted
  conditional marginals, then averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .bounds import BoundsReport, MarginalDistribution, batch_bounds, sharp_bounds
from .errors import DataError, EmptyArm, MissingCovariates
from .glm import (
    DesignMatrix,
    LogisticModel,
    ProportionalOddsModel,
    fit_logistic,
    fit_proportional_odds,
    predict_category_probs,
    predict_propensity,
)

Design = Literal["cre", "ipw", "outcome_regression", "covariate_sharpened"]
DESIGNS: tuple[str, ...] = ("cre", "ipw", "outcome_regression", "covariate_sharpened")


class UnitRecord(NamedTuple):
    z: int
    y: int
    x: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Dataset:
    """Unit-level data held column-wise.

    ``z`` is the 0/1 treatment indicator, ``y`` the observed category and
    ``X`` an optional ``(N, d)`` covariate matrix.
    """

    z: np.ndarray
    y: np.ndarray
    J: int
    X: np.ndarray | None = None
    covariate_names: tuple[str, ...] | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=int).ravel()
        y = np.asarray(self.y, dtype=int).ravel()
        if z.shape != y.shape:
            raise DataError(f"{z.size} treatment values for {y.size} outcomes")
        if not np.all((z == 0) | (z == 1)):
            raise DataError("treatment indicator must be 0 or 1")
        if self.J < 2:
            raise DataError(f"need J >= 2 categories, got {self.J}")
        if y.size and (y.min() < 0 or y.max() >= self.J):
            raise DataError(f"outcomes must lie in 0..{self.J - 1}")
        if not z.any() or z.all():
            raise EmptyArm("both treatment arms must be non-empty")
        X = self.X
        if X is not None:
            X = np.asarray(X, dtype=float)
            if X.ndim == 1:
                X = X[:, None]
            if X.shape[0] != z.size:
                raise DataError(f"{X.shape[0]} covariate rows for {z.size} units")
            if X.shape[1] == 0:
                X = None
        names = self.covariate_names
        if X is not None:
            if names is None:
                names = tuple(f"x{i}" for i in range(X.shape[1]))
            names = tuple(names)
            if len(names) != X.shape[1]:
                raise DataError(f"{len(names)} covariate names for {X.shape[1]} columns")
        else:
            names = None
        for arr in (z, y) + ((X,) if X is not None else ()):
            arr.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "covariate_names", names)

    @property
    def N(self) -> int:
        return int(self.z.size)

    @property
    def has_covariates(self) -> bool:
        return self.X is not None

    @property
    def records(self) -> list[UnitRecord]:
        xs = [tuple(map(float, r)) for r in self.X] if self.X is not None else [None] * self.N
        return [UnitRecord(int(a), int(b), x) for a, b, x in zip(self.z, self.y, xs)]

    @classmethod
    def from_records(cls, records: Sequence[UnitRecord], J: int | None = None,
                     covariate_names=None) -> "Dataset":
        z = [r.z for r in records]
        y = [r.y for r in records]
        has_x = [r.x is not None for r in records]
        if any(has_x) and not all(has_x):
            raise DataError("covariates present for some units but not others")
        X = np.array([r.x for r in records], dtype=float) if all(has_x) and records else None
        if X is not None and len({len(r.x) for r in records}) != 1:
            raise DataError("covariate length differs across units")
        return cls(z, y, J if J is not None else max(y) + 1, X, covariate_names)

    @classmethod
    def from_counts(cls, treated_counts, control_counts) -> "Dataset":
        t = np.asarray(treated_counts, dtype=int)
        c = np.asarray(control_counts, dtype=int)
        J = t.size
        y = np.concatenate([np.repeat(np.arange(J), t), np.repeat(np.arange(J), c)])
        z = np.concatenate([np.ones(t.sum(), int), np.zeros(c.sum(), int)])
        return cls(z, y, J)

    def take(self, idx) -> "Dataset":
        X = self.X[idx] if self.X is not None else None
        return Dataset(self.z[idx], self.y[idx], self.J, X, self.covariate_names)

    def covariates(self, names: Sequence[str] | None = None) -> DesignMatrix:
        if self.X is None:
            raise MissingCovariates("this design needs covariates but the dataset has none")
        if names is None:
            return DesignMatrix(self.X, names=self.covariate_names)
        missing = [n for n in names if n not in self.covariate_names]
        if missing:
            raise MissingCovariates(f"unknown covariates: {', '.join(missing)}")
        cols = [self.covariate_names.index(n) for n in names]
        return DesignMatrix(self.X[:, cols], names=tuple(names))

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.bincount(self.y[self.z == 1], minlength=self.J)
        c = np.bincount(self.y[self.z == 0], minlength=self.J)
        return t, c


@dataclass(frozen=True)
class EstimatorConfig:
    design: Design = "cre"
    propensity_covariates: tuple[str, ...] | None = None
    outcome_covariates: tuple[str, ...] | None = None

    def __post_init__(self):
        design = self.design.replace("-", "_")
        if design not in DESIGNS:
            raise DataError(f"unknown design {self.design!r}; choose from {', '.join(DESIGNS)}")
        object.__setattr__(self, "design", design)
        for name in ("propensity_covariates", "outcome_covariates"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))

    def check(self, data: Dataset) -> None:
        if self.design != "cre" and not data.has_covariates:
            raise MissingCovariates(f"design {self.design!r} requires covariates")

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "propensity_covariates": list(self.propensity_covariates) if self.propensity_covariates else None,
            "outcome_covariates": list(self.outcome_covariates) if self.outcome_covariates else None,
        }


# ---------------------------------------------------------------------------
# Marginals


def _normalize(w: np.ndarray) -> MarginalDistribution:
    return MarginalDistribution(w / w.sum())


def estimate_marginals_cre(data: Dataset) -> tuple[MarginalDistribution, MarginalDistribution]:
    t, c = data.counts()
    if t.sum() == 0 or c.sum() == 0:
        raise EmptyArm("both arms need at least one unit")
    return _normalize(t.astype(float)), _normalize(c.astype(float))


def estimate_marginals_ipw(data: Dataset, model: LogisticModel, covariates=None):
    """Hajek-normalized inverse-propensity-weighted category proportions."""
    e = predict_propensity(model, data.covariates(covariates))
    return _ipw_from_propensity(data, e)


def _ipw_from_propensity(data: Dataset, e: np.ndarray):
    w1 = data.z / e
    w0 = (1 - data.z) / (1 - e)
    if w1.sum() <= 0 or w0.sum() <= 0:
        raise EmptyArm("both arms need positive total weight")
    p1 = np.bincount(data.y, weights=w1, minlength=data.J)
    p0 = np.bincount(data.y, weights=w0, minlength=data.J)
    return _normalize(p1), _normalize(p0)


def estimate_marginals_outcome_regression(data: Dataset, m1: ProportionalOddsModel,
                                          m0: ProportionalOddsModel, covariates=None):
    """Average fitted category probabilities over all ``N`` units, per arm model."""
    X = data.covariates(covariates)
    return (_normalize(predict_category_probs(m1, X).mean(axis=0)),
            _normalize(predict_category_probs(m0, X).mean(axis=0)))


# ---------------------------------------------------------------------------
# Bounds


def estimate_bounds_plugin(p1hat, p0hat) -> BoundsReport:
    return sharp_bounds(p1hat, p0hat)


def estimate_bounds_covariate_sharpened(data: Dataset, m1: ProportionalOddsModel,
                                        m0: ProportionalOddsModel, covariates=None) -> BoundsReport:
    """Average of per-unit conditional bounds.

    Per-unit minimizing tuples differ across units and are not reported.
    """
    X = data.covariates(covariates)
    lo, ind, up = conditional_bounds(predict_category_probs(m1, X), predict_category_probs(m0, X))
    return BoundsReport(float(lo.mean()), float(ind.mean()), float(up.mean()))


def conditional_bounds(P1: np.ndarray, P0: np.ndarray):
    """Per-row ``(gamma_lower, gamma_independent, gamma_upper)``."""
    return batch_bounds(P1, P0)


def fit_propensity(data: Dataset, config: EstimatorConfig) -> LogisticModel:
    return fit_logistic(data.covariates(config.propensity_covariates), data.z)


def fit_outcome_models(data: Dataset, config: EstimatorConfig):
    X = data.covariates(config.outcome_covariates)
    treated = data.z == 1
    m1 = fit_proportional_odds(X.take(treated), data.y[treated], data.J)
    m0 = fit_proportional_odds(X.take(~treated), data.y[~treated], data.J)
    return m1, m0


def estimate_marginals(data: Dataset, config: EstimatorConfig):
    config.check(data)
    if config.design == "cre":
        return estimate_marginals_cre(data)
    if config.design == "ipw":
        return estimate_marginals_ipw(data, fit_propensity(data, config), config.propensity_covariates)
    m1, m0 = fit_outcome_models(data, config)
    return estimate_marginals_outcome_regression(data, m1, m0, config.outcome_covariates)


def estimate_bounds(data: Dataset, config: EstimatorConfig) -> BoundsReport:
    """Run the whole estimation pipeline for ``config.design``."""
    config.check(data)
    if config.design == "covariate_sharpened":
        m1, m0 = fit_outcome_models(data, config)
        return estimate_bounds_covariate_sharpened(data, m1, m0, config.outcome_covariates)
    p1, p0 = estimate_marginals(data, config)
    return estimate_bounds_plugin(p1, p0)


def point_pair(data: Dataset, config: EstimatorConfig) -> tuple[float, float]:
    """``(gamma_I, gamma_U)`` only; the hot path for bootstrap replicates."""
    config.check(data)
    if config.design == "covariate_sharpened":
        m1, m0 = fit_outcome_models(data, config)
        X = data.covariates(config.outcome_covariates)
        _, ind, up = batch_bounds(predict_category_probs(m1, X), predict_category_probs(m0, X))
        return float(ind.mean()), float(up.mean())
    p1, p0 = estimate_marginals(data, config)
    _, ind, up = batch_bounds(p1.probs, p0.probs)
    return float(ind), float(up)
