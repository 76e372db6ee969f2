"""Maximum-likelihood fits for the nuisance models: a logistic propensity
model and a proportional-odds (cumulative logit) outcome model.

Both fits use Newton-Raphson with step-halving on internally standardized
covariates; coefficients are reported on the original covariate scale.

Proportional-odds convention: ``pr(Y <= j | x) = expit(alpha_j - x @ beta)``,
so a larger ``x @ beta`` shifts mass toward higher categories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit

from .errors import DegenerateDesign, DimensionMismatch, Separation, SingleCategory

RIDGE = 1e-10
GRAD_TOL = 1e-8
MAX_ITER = 100
MAX_HALVINGS = 30
MAX_COEF_NORM = 1e6
PROPENSITY_CLIP = 1e-6
# Spacing of pinned cutpoints for unobserved end categories (expit(-40) ~ 4e-18).
END_GAP = 40.0


@dataclass(frozen=True)
class DesignMatrix:
    """Covariate values ``(N, d)``; the intercept column is implied, not stored."""

    values: np.ndarray
    includes_intercept: bool = True
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.values, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DimensionMismatch(f"design must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DegenerateDesign("non-finite covariate value")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def intercept_only(cls, n: int) -> "DesignMatrix":
        return cls(np.zeros((n, 0)))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def augmented(self) -> np.ndarray:
        if self.includes_intercept:
            return np.hstack([np.ones((self.N, 1)), self.values])
        return np.array(self.values)

    def take(self, idx) -> "DesignMatrix":
        return DesignMatrix(self.values[idx], self.includes_intercept, self.names)


def _as_design(X) -> DesignMatrix:
    return X if isinstance(X, DesignMatrix) else DesignMatrix(X)


def _check_rank(X: DesignMatrix, extra: int) -> None:
    if X.N < X.d + extra:
        raise DegenerateDesign(f"{X.N} rows for {X.d + extra} parameters")


def _standardize(X: np.ndarray, center: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0) if center else np.zeros(X.shape[1])
    scale = X.std(axis=0) if center else np.sqrt(np.mean(X**2, axis=0))
    scale = np.where(scale > 0, scale, 1.0)
    return (X - mean) / scale, mean, scale


@dataclass
class _Trace:
    loglik: list[float] = field(default_factory=list)


def _newton(f, theta0: np.ndarray, what: str, check=None):
    """Maximize ``f(theta) -> (loglik, grad, hess)``.

    Returns ``(theta, loglik, grad_norm, iterations, trace)``. ``check`` is
    called with the current state and may raise ``Separation``.
    """
    theta = theta0.astype(float)
    ll, g, H = f(theta)
    trace = _Trace([ll])
    polish = 0
    for it in range(1, MAX_ITER + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= GRAD_TOL * (1.0 + abs(ll)):
            # A couple of extra full Newton steps cost little and take the
            # quadratic convergence down to rounding level.
            if polish == 2 or gnorm == 0.0:
                return theta, ll, gnorm, it - 1, trace
            polish += 1
        negH = -H + RIDGE * np.eye(theta.size)
        shift = 0.0
        while True:
            try:
                L = np.linalg.cholesky(negH + shift * np.eye(theta.size))
                break
            except np.linalg.LinAlgError:
                # Not negative definite: fall back to a Levenberg-shifted step.
                shift = max(2 * shift, 1e-8 * (1 + np.abs(np.diag(negH)).max()))
                if shift > 1e12:
                    raise DegenerateDesign(f"{what}: Hessian is singular")
        step = np.linalg.solve(L.T, np.linalg.solve(L, g))
        if not np.all(np.isfinite(step)):
            raise DegenerateDesign(f"{what}: Newton step is not finite")
        if polish:
            cand = theta + step
            ll_new, g_new, H_new = f(cand)
            # At the optimum the log-likelihood is flat to rounding, so only
            # the gradient has to improve.
            if not (np.isfinite(ll_new) and ll_new >= ll - 1e-12 * (1.0 + abs(ll))
                    and np.linalg.norm(g_new) < np.linalg.norm(g)):
                return theta, ll, gnorm, it - 1, trace
            theta, ll, g, H = cand, ll_new, g_new, H_new
            trace.loglik.append(ll)
            continue
        t = 1.0
        for _ in range(MAX_HALVINGS):
            cand = theta + t * step
            ll_new, g_new, H_new = f(cand)
            if np.isfinite(ll_new) and ll_new >= ll:
                break
            t *= 0.5
        else:
            raise Separation(f"{what}: step-halving failed to increase the likelihood")
        theta, ll, g, H = cand, ll_new, g_new, H_new
        trace.loglik.append(ll)
        if np.linalg.norm(theta) > MAX_COEF_NORM:
            raise Separation(f"{what}: coefficients diverging (norm > {MAX_COEF_NORM:g})")
        if check is not None:
            check(theta)
    gnorm = float(np.linalg.norm(g))
    return theta, ll, gnorm, MAX_ITER, trace


# ---------------------------------------------------------------------------
# Logistic regression


def logistic_loglik(coef: np.ndarray, X: np.ndarray, z: np.ndarray) -> float:
    eta = X @ coef
    return float(np.sum(z * log_expit(eta) + (1 - z) * log_expit(-eta)))


def logistic_score(coef: np.ndarray, X: np.ndarray, z: np.ndarray) -> np.ndarray:
    return X.T @ (z - expit(X @ coef))


def logistic_hessian(coef: np.ndarray, X: np.ndarray) -> np.ndarray:
    mu = expit(X @ coef)
    return -(X * (mu * (1 - mu))[:, None]).T @ X


@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    final_gradient_norm: float
    loglik: float
    includes_intercept: bool = True
    loglik_trace: tuple[float, ...] = ()


def fit_logistic(X, z) -> LogisticModel:
    X = _as_design(X)
    z = np.asarray(z, dtype=float).ravel()
    if z.size != X.N:
        raise DimensionMismatch(f"{z.size} treatment indicators for {X.N} rows")
    if not np.all((z == 0) | (z == 1)):
        raise DimensionMismatch("treatment indicator must be 0/1")
    if z.min() == z.max():
        raise Separation("only one treatment class present")
    _check_rank(X, int(X.includes_intercept))

    Xs, mean, scale = _standardize(X.values, center=X.includes_intercept)
    A = np.hstack([np.ones((X.N, 1)), Xs]) if X.includes_intercept else Xs

    def f(c):
        return logistic_loglik(c, A, z), logistic_score(c, A, z), logistic_hessian(c, A)

    def check(c):
        mu = expit(A @ c)
        if np.all(np.abs(z - mu) < 1e-6):
            raise Separation("logistic: covariates perfectly separate the classes")

    c0 = np.zeros(A.shape[1])
    if X.includes_intercept:
        zbar = z.mean()
        c0[0] = np.log(zbar / (1 - zbar))
    c, ll, gnorm, iters, trace = _newton(f, c0, "logistic", check)
    converged = gnorm <= GRAD_TOL * (1.0 + abs(ll))

    if X.includes_intercept:
        slopes = c[1:] / scale
        coef = np.concatenate([[c[0] - slopes @ mean], slopes])
    else:
        coef = c / scale
    return LogisticModel(coef, converged, iters, gnorm, ll, X.includes_intercept, tuple(trace.loglik))


def predict_propensity(model: LogisticModel, X, clip: float = PROPENSITY_CLIP) -> np.ndarray:
    X = _as_design(X)
    A = X.augmented() if model.includes_intercept else np.asarray(X.values)
    if A.shape[1] != model.coefficients.size:
        raise DimensionMismatch(
            f"model has {model.coefficients.size} coefficients, design has {A.shape[1]} columns"
        )
    return np.clip(expit(A @ model.coefficients), clip, 1 - clip)


# ---------------------------------------------------------------------------
# Proportional odds


def cutpoints_from_params(theta: np.ndarray, J: int) -> np.ndarray:
    """Cutpoints from ``(alpha_0, log-increments...)``."""
    return theta[0] + np.concatenate([[0.0], np.cumsum(np.exp(theta[1 : J - 1]))])


def params_from_cutpoints(alpha: np.ndarray) -> np.ndarray:
    return np.concatenate([[alpha[0]], np.log(np.diff(alpha))])


def _po_parts(alpha: np.ndarray, beta: np.ndarray, X: np.ndarray, y: np.ndarray):
    # Upper and lower cumulative-logit arguments for each unit's observed
    # category; +/-inf at the ends so that F = 1 / 0 and f = 0.
    J = alpha.size + 1
    eta = X @ beta
    ext = np.concatenate([[-np.inf], alpha, [np.inf]])
    a = ext[y + 1] - eta
    b = ext[y] - eta
    Fa, Fb = expit(a), expit(b)
    fa, fb = Fa * (1 - Fa), Fb * (1 - Fb)
    # pi = F(a) - F(b), computed as expit(-b) - expit(-a) when both tails are
    # small to limit cancellation.
    pi = np.where(b > 0, expit(-b) - expit(-a), Fa - Fb)
    return J, a, b, Fa, Fb, fa, fb, pi


def po_loglik_natural(alpha, beta, X, y) -> float:
    *_, pi = _po_parts(np.asarray(alpha, float), np.asarray(beta, float), X, y)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(pi)))


def _po_natural_derivs(alpha, beta, X, y):
    J, a, b, Fa, Fb, fa, fb, pi = _po_parts(alpha, beta, X, y)
    N, d = X.shape
    K = J - 1
    with np.errstate(divide="ignore"):
        ll = float(np.sum(np.log(pi)))
    # Directions of a and b in (alpha, beta) space.
    DA = np.zeros((N, K + d))
    DB = np.zeros((N, K + d))
    upper = y <= K - 1
    lower = y >= 1
    DA[np.flatnonzero(upper), y[upper]] = 1.0
    DB[np.flatnonzero(lower), y[lower] - 1] = 1.0
    DA[upper, K:] = -X[upper]
    DB[lower, K:] = -X[lower]
    la = np.where(upper, fa / pi, 0.0)
    lb = np.where(lower, -fb / pi, 0.0)
    dfa = fa * (1 - 2 * Fa)
    dfb = fb * (1 - 2 * Fb)
    laa = np.where(upper, dfa / pi - (fa / pi) ** 2, 0.0)
    lbb = np.where(lower, -dfb / pi - (fb / pi) ** 2, 0.0)
    lab = np.where(upper & lower, fa * fb / pi**2, 0.0)
    g = DA.T @ la + DB.T @ lb
    H = (DA * laa[:, None]).T @ DA + (DB * lbb[:, None]).T @ DB
    cross = (DA * lab[:, None]).T @ DB
    H += cross + cross.T
    return ll, g, H


def po_loglik(theta: np.ndarray, X: np.ndarray, y: np.ndarray, J: int) -> float:
    """Log-likelihood in the unconstrained ``(alpha_0, log-increments, beta)`` parameters."""
    theta = np.asarray(theta, float)
    return po_loglik_natural(cutpoints_from_params(theta, J), theta[J - 1 :], X, y)


def po_score(theta: np.ndarray, X: np.ndarray, y: np.ndarray, J: int) -> np.ndarray:
    return _po_derivs(np.asarray(theta, float), X, y, J)[1]


def _po_derivs(theta, X, y, J):
    K = J - 1
    alpha = cutpoints_from_params(theta, J)
    beta = theta[K:]
    ll, g_nat, H_nat = _po_natural_derivs(alpha, beta, X, y)
    # Chain rule through alpha_j = alpha_0 + sum_{i <= j} exp(u_i).
    d = beta.size
    G = np.zeros((K + d, K + d))
    G[:K, 0] = 1.0
    inc = np.exp(theta[1:K])
    for i in range(1, K):
        G[i:K, i] = inc[i - 1]
    G[K:, K:] = np.eye(d)
    g = G.T @ g_nat
    H = G.T @ H_nat @ G
    tail = np.cumsum(g_nat[:K][::-1])[::-1]  # sum_{j >= i} dl/dalpha_j
    for i in range(1, K):
        H[i, i] += tail[i] * inc[i - 1]
    return ll, g, H


@dataclass(frozen=True)
class ProportionalOddsModel:
    cutpoints: np.ndarray
    slopes: np.ndarray
    converged: bool
    iterations: int
    loglik: float = float("nan")
    final_gradient_norm: float = float("nan")
    loglik_trace: tuple[float, ...] = ()

    @property
    def J(self) -> int:
        return self.cutpoints.size + 1


def fit_proportional_odds(X, y, J: int) -> ProportionalOddsModel:
    X = _as_design(X)
    y = np.asarray(y).ravel()
    if y.size != X.N:
        raise DimensionMismatch(f"{y.size} outcomes for {X.N} rows")
    if J < 2:
        raise SingleCategory("need J >= 2")
    y = y.astype(int)
    if y.min() < 0 or y.max() >= J:
        raise DimensionMismatch(f"outcomes must lie in 0..{J - 1}")
    if np.unique(y).size < 2:
        raise SingleCategory(f"all outcomes equal {y[0]}")
    _check_rank(X, 1)

    # Unobserved categories at either end have MLE probability zero, which
    # would send cutpoints to -/+inf. Fit on the observed range and pin the
    # outer cutpoints far enough out that their probabilities vanish.
    lo, hi = int(y.min()), int(y.max())
    if lo > 0 or hi < J - 1:
        inner = fit_proportional_odds(X, y - lo, hi - lo + 1)
        below = inner.cutpoints[0] - END_GAP * np.arange(lo, 0, -1)
        above = inner.cutpoints[-1] + END_GAP * np.arange(1, J - 1 - hi + 1)
        return ProportionalOddsModel(
            cutpoints=np.concatenate([below, inner.cutpoints, above]),
            slopes=inner.slopes,
            converged=inner.converged,
            iterations=inner.iterations,
            loglik=inner.loglik,
            final_gradient_norm=inner.final_gradient_norm,
            loglik_trace=inner.loglik_trace,
        )

    Xs, mean, scale = _standardize(X.values, center=True)
    K = J - 1
    counts = np.bincount(y, minlength=J).astype(float)
    # Start from smoothed marginal cumulative logits with zero slopes.
    cum = np.cumsum(counts + 0.5)[:K] / (counts.sum() + 0.5 * J)
    alpha0 = np.log(cum / (1 - cum))
    theta0 = np.concatenate([params_from_cutpoints(alpha0), np.zeros(X.d)])

    def f(theta):
        with np.errstate(divide="ignore", invalid="ignore"):
            return _po_derivs(theta, Xs, y, J)

    def check(theta):
        alpha = cutpoints_from_params(theta, J)
        *_, pi = _po_parts(alpha, theta[K:], Xs, y)
        if X.d and np.all(pi > 1 - 1e-6):
            raise Separation("proportional odds: covariates perfectly predict the outcome")

    theta, ll, gnorm, iters, trace = _newton(f, theta0, "proportional odds", check)
    converged = gnorm <= GRAD_TOL * (1.0 + abs(ll))
    alpha_s = cutpoints_from_params(theta, J)
    beta_s = theta[K:]
    slopes = beta_s / scale
    cutpoints = alpha_s + slopes @ mean
    return ProportionalOddsModel(
        cutpoints=cutpoints,
        slopes=slopes,
        converged=converged,
        iterations=iters,
        loglik=ll,
        final_gradient_norm=gnorm,
        loglik_trace=tuple(trace.loglik),
    )


def predict_category_probs(model: ProportionalOddsModel, X) -> np.ndarray:
    X = _as_design(X)
    if X.d != model.slopes.size:
        raise DimensionMismatch(f"model has {model.slopes.size} slopes, design has {X.d} covariates")
    eta = X.values @ model.slopes
    F = expit(model.cutpoints[None, :] - eta[:, None])
    F = np.maximum.accumulate(F, axis=1)
    cdf = np.hstack([np.zeros((X.N, 1)), F, np.ones((X.N, 1))])
    probs = np.clip(np.diff(cdf, axis=1), 0.0, None)
    return probs / probs.sum(axis=1, keepdims=True)


def design_from_columns(columns: Sequence[np.ndarray], names=None) -> DesignMatrix:
    if not columns:
        raise DimensionMismatch("no covariate columns given")
    return DesignMatrix(np.column_stack(columns), names=names)
