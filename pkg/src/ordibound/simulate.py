"""Random instances and synthetic datasets for checks and experiments."""

from __future__ import annotations

import numpy as np

from .estimators import Dataset


def random_marginal(rng: np.random.Generator, J: int) -> np.ndarray:
    """Dirichlet draw with a random concentration; sometimes sparse.

    Sparse vectors (exact zeros) exercise the empty-category edge cases of the
    closed forms and the construction.
    """
    conc = rng.choice([0.2, 1.0, 5.0])
    p = rng.dirichlet(np.full(J, conc))
    if rng.random() < 0.25:
        p[rng.random(J) < 0.4] = 0.0
        if p.sum() == 0:
            p[rng.integers(J)] = 1.0
    return p / p.sum()


def random_marginal_pairs(seed: int, n: int, J: int):
    rng = np.random.default_rng([seed, J])
    return [(random_marginal(rng, J), random_marginal(rng, J)) for _ in range(n)]


def random_joint(rng: np.random.Generator, J: int) -> np.ndarray:
    P = rng.dirichlet(np.full(J * J, rng.choice([0.3, 1.0]))).reshape(J, J)
    return P / P.sum()


def sample_cre(rng: np.random.Generator, joint: np.ndarray, N: int, p_treat: float = 0.5) -> Dataset:
    """Draw ``(Y(1), Y(0))`` pairs from ``joint`` and randomize treatment."""
    J = joint.shape[0]
    while True:
        cells = rng.choice(J * J, size=N, p=joint.ravel())
        y1, y0 = np.divmod(cells, J)
        z = (rng.random(N) < p_treat).astype(int)
        if 0 < z.sum() < N:
            return Dataset(z, np.where(z == 1, y1, y0), J)


def sample_confounded(rng: np.random.Generator, N: int, J: int = 3,
                      beta1=(1.0, -0.5, 1.5), beta0=(0.3, -0.5, 1.5),
                      cut=(-0.5, 1.0)) -> tuple[Dataset, np.ndarray]:
    """Observational data with covariates ``(age, male, rural)``.

    Outcomes follow proportional-odds models per arm and ``rural`` lowers the
    treatment probability. Returns the dataset and the true propensities.
    """
    age = rng.normal(0.0, 1.0, N)
    male = (rng.random(N) < 0.6).astype(float)
    rural = (rng.random(N) < 0.4).astype(float)
    X = np.column_stack([age, male, rural])
    e = 1.0 / (1.0 + np.exp(-(0.4 + 0.3 * age - 1.6 * rural)))
    z = (rng.random(N) < e).astype(int)
    cut = np.asarray(cut, dtype=float)[: J - 1]
    lat1 = X @ np.asarray(beta1) + rng.logistic(size=N)
    lat0 = X @ np.asarray(beta0) + rng.logistic(size=N)
    y1 = np.searchsorted(cut, lat1)
    y0 = np.searchsorted(cut, lat0)
    y = np.where(z == 1, y1, y0)
    return Dataset(z, y, J, X, ("age", "male", "rural")), e


def confounded_truth(J: int = 3, beta1=(1.0, -0.5, 1.5), beta0=(0.3, -0.5, 1.5),
                     cut=(-0.5, 1.0), n: int = 400_000, seed: int = 12345) -> tuple[np.ndarray, np.ndarray]:
    """Population marginals of ``Y(1)`` and ``Y(0)`` under :func:`sample_confounded`.

    Exact conditional category probabilities averaged over a large covariate
    draw, so the only error is the covariate Monte Carlo (about 1e-3).
    """
    rng = np.random.default_rng(seed)
    X = np.column_stack([
        rng.normal(0.0, 1.0, n),
        (rng.random(n) < 0.6).astype(float),
        (rng.random(n) < 0.4).astype(float),
    ])
    cut = np.asarray(cut, dtype=float)[: J - 1]

    def marg(beta):
        F = 1.0 / (1.0 + np.exp(-(cut[None, :] - (X @ np.asarray(beta))[:, None])))
        cdf = np.hstack([np.zeros((n, 1)), F, np.ones((n, 1))])
        return np.diff(cdf, axis=1).mean(axis=0)

    return marg(beta1), marg(beta0)


def karolinska_like(seed: int = 0, N: int = 158) -> Dataset:
    """158-unit synthetic stand-in for the cardia cancer study design.

    Three survival categories, covariates age (years), male and rural, with
    rural patients less likely to attend a high-volume hospital. The numbers
    are invented; only the structure mirrors the real study.
    """
    rng = np.random.default_rng(seed)
    while True:
        age = rng.normal(68.0, 10.0, N)
        male = (rng.random(N) < 0.7).astype(float)
        rural = (rng.random(N) < 0.45).astype(float)
        e = 1.0 / (1.0 + np.exp(-(0.8 - 1.6 * rural - 0.01 * (age - 68.0))))
        z = (rng.random(N) < e).astype(int)
        eta = -0.03 * (age - 68.0) - 0.2 * male - 0.3 * rural + 0.25 * z
        lat = eta + rng.logistic(size=N)
        y = np.searchsorted(np.array([0.6, 1.8]), lat)
        ok = 0 < z.sum() < N and all(np.unique(y[z == a]).size == 3 for a in (0, 1))
        if ok:
            X = np.column_stack([age, male, rural])
            return Dataset(z, y, 3, X, ("age", "male", "rural"))


def truth_coupling(p1: np.ndarray, p0: np.ndarray, weight: float) -> np.ndarray:
    """``(1 - weight) * independent + weight * upper-attaining`` coupling.

    ``weight = 0`` places the true gamma at ``gamma_I``, ``weight = 1`` at
    ``gamma_U``; intermediate weights interpolate linearly.
    """
    from .attainment import construct_attaining_matrix

    upper = construct_attaining_matrix(p1, p0).entries
    return (1.0 - weight) * np.outer(p1, p0) + weight * upper


def coverage_experiment(p1, p0, weight: float = 0.0, datasets: int = 500, N: int = 500,
                        B: int = 2000, alpha: float = 0.05, seed: int = 0) -> dict:
    """Fraction of bootstrap intervals covering the true gamma of a known joint."""
    from .bootstrap import bootstrap_interval
    from .bounds import gamma_of_joint

    p1 = np.asarray(p1, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    joint = truth_coupling(p1, p0, weight)
    truth = gamma_of_joint(joint)
    covered = 0
    widths = []
    for r in range(datasets):
        data = sample_cre(np.random.default_rng([seed, r]), joint, N)
        rep = bootstrap_interval(data, alpha=alpha, B=B, seed=seed * 1_000_003 + r)
        covered += rep.lower <= truth <= rep.upper
        widths.append(rep.upper - rep.lower)
    return {
        "true_gamma": truth,
        "weight": weight,
        "datasets": datasets,
        "N": N,
        "B": B,
        "alpha": alpha,
        "coverage": covered / datasets,
        "mean_width": float(np.mean(widths)),
    }
