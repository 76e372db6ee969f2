"""Independent reference computations used by the tests.

Nothing here imports the package, so agreement is a genuine cross-check.
"""

import numpy as np
from scipy.optimize import linprog


def three_category_forms(p1, p0):
    """The six hand-derived expressions for J = 3, keyed by ``(kind, j, m)``.

    ``("delta", 1, 2)`` is ``p1[1] + p1[2] - p0[2]``; see
    :func:`printed_delta_12` for the variant that circulates in print.
    """
    a, b = p1, p0
    return {
        ("delta", 1, 1): a[1] + 2 * a[2] - b[1] - b[2],
        ("delta", 1, 2): a[1] + a[2] - b[2],
        ("delta", 2, 1): a[2] - b[2] + b[0],
        ("xi", 1, 1): a[1] + a[2] - b[1] - 2 * b[2],
        ("xi", 1, 2): a[2] - b[1] - b[2],
        ("xi", 2, 1): a[2] - b[2] - a[0],
    }


def printed_delta_12(p1, p0):
    """``p1[2] - p0[2] + p0[1]``: off from the correct form by ``p1[1] - p0[1]``."""
    return p1[2] - p0[2] + p0[1]


def gamma_by_loops(P):
    P = np.asarray(P, dtype=float)
    J = P.shape[0]
    g = 0.0
    for k in range(J):
        for l in range(J):
            if k > l:
                g += P[k, l]
            elif k < l:
                g -= P[k, l]
    return g


def scipy_gamma_bounds(p1, p0):
    """Extremes of gamma over couplings via scipy's HiGHS solver."""
    J = len(p1)
    idx = np.arange(J)
    c = np.sign(idx[:, None] - idx[None, :]).ravel().astype(float)
    A = np.zeros((2 * J, J * J))
    for k in range(J):
        A[k, k * J : (k + 1) * J] = 1.0
        A[J + k, k::J] = 1.0
    b = np.concatenate([p1, p0])
    hi = -linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs").fun
    lo = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs").fun
    return lo, hi


def numeric_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def survivor(p):
    """``S[k] = sum_{r >= k} p[r]`` with ``S[J] = 0``."""
    p = np.asarray(p, dtype=float)
    return np.append(np.cumsum(p[::-1])[::-1], 0.0)
