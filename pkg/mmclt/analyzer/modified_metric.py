"""The measure-dependent metric d_eta(x, y) = ||d(x, .) - d(y, .)||_{L2(eta)}."""

import math
from typing import List, Tuple

import numpy as np

from ..errors import PseudoMetricWarning, SpaceMismatchError, warn_hypothesis
from ..models import FiniteMetricSpace, InjectivityMargin, ModifiedMetricSpace, ProbabilityMeasure
from ..utils.log import logger
from .measure import ball_positivity_check

COLLAPSE_TOL = 1e-12
BOUND_SLACK = 1e-12


def weighted_l2(diff: np.ndarray, weights: np.ndarray) -> float:
    """sqrt(sum_z w_z diff_z^2); every L2(eta) distance in the package goes through here."""
    return math.sqrt(float(np.dot(diff * diff, weights)))


def _check_same_space(space: FiniteMetricSpace, measure: ProbabilityMeasure) -> None:
    if measure.n != space.n or measure.space_id != space.space_id:
        raise SpaceMismatchError(f"measure {measure.measure_id} does not live on space {space.space_id}")


def build_d_eta(space: FiniteMetricSpace, measure: ProbabilityMeasure) -> ModifiedMetricSpace:
    _check_same_space(space, measure)
    d, w = space.dist, measure.weights
    n = space.n
    dist_eta = np.zeros((n, n))
    collapsed: List[Tuple[int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            value = weighted_l2(d[i] - d[j], w)
            dist_eta[i, j] = dist_eta[j, i] = value
            if value <= COLLAPSE_TOL:
                collapsed.append((i, j))
    positive = ball_positivity_check(space, measure).ok
    if collapsed:
        warn_hypothesis(
            PseudoMetricWarning(
                collapsed,
                f"d_eta is only a pseudo-metric: {len(collapsed)} pairs collapse, first {collapsed[0]}",
            )
        )
    logger.debug("build_d_eta: n=%d, collapsed=%d, ball_positive=%s", n, len(collapsed), positive)
    return ModifiedMetricSpace(
        base=space, measure=measure, dist_eta=dist_eta, collapsed_pairs=collapsed, ball_positive=positive
    )


def l2_norm_embedded(space: FiniteMetricSpace, measure: ProbabilityMeasure, i: int) -> float:
    _check_same_space(space, measure)
    return weighted_l2(space.dist[i], measure.weights)


def _ball_mass(mm: ModifiedMetricSpace, x: int, eps: float) -> float:
    return float(mm.measure.weights[mm.base.dist[x] < eps].sum())


def injectivity_margin(mm: ModifiedMetricSpace) -> InjectivityMargin:
    """Smallest off-diagonal d_eta, plus the injectivity bound at eps = d(x, y) / 4 for that pair.

    The bound reads d_eta(x, y)^2 >= eps^2 * eta(B_eps(x)) with B_eps an open
    ball, up to BOUND_SLACK.
    """
    n = mm.base.n
    if n == 1:
        return InjectivityMargin(min_distance=math.inf, pair=None)
    iu, ju = np.triu_indices(n, k=1)
    k = int(np.argmin(mm.dist_eta[iu, ju]))
    x, y = int(iu[k]), int(ju[k])
    eps = mm.base.dist[x, y] / 4.0
    mass = _ball_mass(mm, x, eps)
    lhs = float(mm.dist_eta[x, y]) ** 2
    rhs = eps * eps * mass
    return InjectivityMargin(
        min_distance=float(mm.dist_eta[x, y]),
        pair=(x, y),
        eps=eps,
        ball_mass=mass,
        lhs=lhs,
        rhs=rhs,
        bound_ok=lhs >= rhs - BOUND_SLACK,
    )


def injectivity_bound_violations(mm: ModifiedMetricSpace) -> List[Tuple[int, int, float]]:
    """Ordered pairs (x, y, shortfall) where d_eta(x, y)^2 < (d/4)^2 * eta(B_{d/4}(x)) - BOUND_SLACK."""
    out = []
    n = mm.base.n
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            eps = mm.base.dist[x, y] / 4.0
            shortfall = eps * eps * _ball_mass(mm, x, eps) - float(mm.dist_eta[x, y]) ** 2
            if shortfall > BOUND_SLACK:
                out.append((x, y, shortfall))
    return out


def contraction_excess(mm: ModifiedMetricSpace) -> float:
    """max over pairs of d_eta - d; nonpositive up to rounding."""
    return float(np.max(mm.dist_eta - mm.base.dist))


def d_eta_to_json(mm: ModifiedMetricSpace) -> dict:
    return {
        "n": mm.base.n,
        "dist": mm.dist_eta.tolist(),
        "labels": mm.base.labels,
        "measure_hash": mm.measure_hash,
        "collapsed_pairs": [list(p) for p in mm.collapsed_pairs],
    }
