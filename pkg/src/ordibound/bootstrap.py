"""Nonparametric bootstrap interval covering the bound pair ``[gamma_I, gamma_U]``.

The threshold ``z*`` is the smallest ``z >= 0`` such that, in at least a
``1 - alpha`` fraction of replicates, ``gamma_I* - z <= gamma_I`` and
``gamma_U <= gamma_U* + z`` hold together. Writing
``d_b = max(gamma_I*_b - gamma_I, gamma_U - gamma_U*_b)`` this is the
``ceil((1 - alpha) B)``-th order statistic of ``d``, floored at zero.

Replicate ``b`` draws its resample from a Philox stream keyed by
``(seed, b)``, so results do not depend on how replicates are scheduled.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import batch_bounds
from .errors import DataError, OrdiboundError, TooFewReplicates
from .estimators import Dataset, EstimatorConfig, point_pair

DEFAULT_B = 2000
DEFAULT_ALPHA = 0.05
MIN_USABLE_FRACTION = 0.9
THREADS_ENV = "ORDIBOUND_THREADS"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class IntervalReport:
    lower: float
    upper: float
    alpha: float
    z_star: float
    B: int
    seed: int
    gamma_independent: float
    gamma_upper: float
    replicate_summary: dict
    failed_replicates: int = 0

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "alpha": self.alpha,
            "z_star": self.z_star,
            "B": self.B,
            "seed": self.seed,
            "gamma_independent": self.gamma_independent,
            "gamma_upper": self.gamma_upper,
            "replicate_summary": dict(self.replicate_summary),
            "failed_replicates": self.failed_replicates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalReport":
        return cls(**{k: d[k] for k in (
            "lower", "upper", "alpha", "z_star", "B", "seed", "gamma_independent",
            "gamma_upper", "replicate_summary", "failed_replicates")})


def replicate_rng(seed: int, b: int) -> np.random.Generator:
    """Independent generator for replicate ``b``; a pure function of ``(seed, b)``."""
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, b & _MASK64]))


def resample_indices(seed: int, b: int, n: int) -> np.ndarray:
    return replicate_rng(seed, b).integers(0, n, size=n)


def threshold(d: np.ndarray, alpha: float) -> float:
    """``max(0, d_(k))`` with ``k = ceil((1 - alpha) * len(d))`` (1-based)."""
    d = np.sort(np.asarray(d, dtype=float))
    k = math.ceil((1 - alpha) * d.size - 1e-9)
    k = min(max(k, 1), d.size)
    return max(0.0, float(d[k - 1]))


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DataError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return n if n > 0 else (os.cpu_count() or 1)


def _cre_replicates(data: Dataset, seed: int, B: int) -> np.ndarray:
    # All CRE replicates are cheap: resample, count, and evaluate the bounds
    # for every replicate in one batched call.
    J, N = data.J, data.N
    code = data.y + J * data.z  # 0..J-1 control, J..2J-1 treated
    counts = np.empty((B, 2 * J))
    for b in range(B):
        counts[b] = np.bincount(code[resample_indices(seed, b, N)], minlength=2 * J)
    n0 = counts[:, :J].sum(axis=1)
    n1 = counts[:, J:].sum(axis=1)
    out = np.full((B, 2), np.nan)
    ok = (n0 > 0) & (n1 > 0)
    P1 = counts[ok, J:] / n1[ok, None]
    P0 = counts[ok, :J] / n0[ok, None]
    _, ind, up = batch_bounds(P1, P0)
    out[ok, 0], out[ok, 1] = ind, up
    return out


def _one_replicate(data: Dataset, config: EstimatorConfig, seed: int, b: int):
    idx = resample_indices(seed, b, data.N)
    try:
        return point_pair(data.take(idx), config)
    except OrdiboundError:
        return (np.nan, np.nan)


def bootstrap_replicates(data: Dataset, config: EstimatorConfig, B: int, seed: int,
                         threads: int | None = None) -> np.ndarray:
    """``(B, 2)`` array of ``(gamma_I*, gamma_U*)``; failed replicates are NaN."""
    if config.design == "cre":
        return _cre_replicates(data, seed, B)
    threads = _threads() if threads is None else threads
    if threads <= 1:
        rows = [_one_replicate(data, config, seed, b) for b in range(B)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda b: _one_replicate(data, config, seed, b), range(B)))
    return np.array(rows, dtype=float).reshape(B, 2)


def bootstrap_interval(data: Dataset, config: EstimatorConfig | None = None,
                       alpha: float = DEFAULT_ALPHA, B: int = DEFAULT_B, seed: int = 0,
                       threads: int | None = None) -> IntervalReport:
    config = config or EstimatorConfig()
    if not 0 < alpha < 1:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    if B < 100:
        raise DataError(f"need B >= 100 replicates, got {B}")
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise DataError("seed must be a 64-bit unsigned integer")

    g_ind, g_up = point_pair(data, config)
    reps = bootstrap_replicates(data, config, B, seed, threads)
    good = np.all(np.isfinite(reps), axis=1)
    failed = int(B - good.sum())
    if good.sum() < MIN_USABLE_FRACTION * B:
        raise TooFewReplicates(f"{failed} of {B} bootstrap refits failed")
    r = reps[good]
    d = np.maximum(r[:, 0] - g_ind, g_up - r[:, 1])
    z = threshold(d, alpha)
    summary = {
        "mean_gamma_independent": float(r[:, 0].mean()),
        "sd_gamma_independent": float(r[:, 0].std(ddof=1)),
        "mean_gamma_upper": float(r[:, 1].mean()),
        "sd_gamma_upper": float(r[:, 1].std(ddof=1)),
    }
    return IntervalReport(
        lower=g_ind - z,
        upper=g_up + z,
        alpha=float(alpha),
        z_star=z,
        B=int(B),
        seed=seed,
        gamma_independent=g_ind,
        gamma_upper=g_up,
        replicate_summary=summary,
        failed_replicates=failed,
    )


__all__ = [
    "IntervalReport",
    "bootstrap_interval",
    "bootstrap_replicates",
    "replicate_rng",
    "resample_indices",
    "threshold",
]
