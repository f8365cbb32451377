"""Quadratic minimization over the probability simplex.

Used as an independent check on closed-form hull means: the minimizer is
searched by accelerated projected gradient from several seeded starts.
"""

from typing import Optional, Tuple

import numpy as np

from ..utils.log import logger
from ..utils.rng import make_generator

MAX_ITER = 10_000
RESTARTS = 8
STEP_TOL = 1e-15


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of v onto {c : c >= 0, sum(c) = 1}.

    Sort-and-threshold: with u sorted descending, rho is the last index where
    u_rho > (sum_{i <= rho} u_i - 1) / (rho + 1), and the threshold is that ratio.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = v.shape[1]
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ratios = css / np.arange(1, n + 1)
    positive = u > ratios
    rho = n - 1 - np.argmax(positive[:, ::-1], axis=1)
    theta = ratios[np.arange(v.shape[0]), rho]
    return np.maximum(v - theta[:, None], 0.0)


def minimize_on_simplex(
    Q: np.ndarray,
    b: np.ndarray,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
    starts: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float, int]:
    """Minimize c^T Q c - 2 b^T c over the simplex; Q symmetric positive semidefinite.

    All starts run together as rows of one array. Step is 1 / (2 lambda_max(Q));
    momentum is reset per row whenever the step and the momentum disagree.
    Returns (best coefficients, best objective, iterations used).
    """
    n = Q.shape[0]
    if starts is None:
        rng = make_generator(seed)
        starts = np.vstack([np.full(n, 1.0 / n), rng.dirichlet(np.ones(n), size=max(restarts - 1, 0))])
    x = project_simplex(starts)
    lam = float(np.linalg.eigvalsh(Q)[-1])
    if lam <= 0.0:
        values = np.einsum("ij,jk,ik->i", x, Q, x) - 2.0 * x @ b
        k = int(np.argmin(values))
        return x[k], float(values[k]), 0
    step = 1.0 / (2.0 * lam)
    y = x.copy()
    t = np.ones(x.shape[0])
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (y @ Q - b)
        x_new = project_simplex(y - step * grad)
        restart = np.sum((y - x_new) * (x_new - x), axis=1) > 0.0
        t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum = (t - 1.0) / t_new
        momentum[restart] = 0.0
        t_new[restart] = 1.0
        moved = float(np.max(np.abs(x_new - x)))
        y = x_new + momentum[:, None] * (x_new - x)
        x, t = x_new, t_new
        if moved < STEP_TOL:
            break
    values = np.einsum("ij,jk,ik->i", x, Q, x) - 2.0 * x @ b
    k = int(np.argmin(values))
    logger.debug("minimize_on_simplex: n=%d, %d starts, %d iterations", n, x.shape[0], it)
    return x[k], float(values[k]), it
