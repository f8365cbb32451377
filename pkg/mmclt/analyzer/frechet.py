"""Frechet functions and means on the point set and on the convex hull of its embedding.

The Frechet function is f(p) = sum_z w_z d(p, z)^2 with no 1/2 factor.
All near-minimizers within a relative tolerance are reported.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import MeasureError, SpaceMismatchError
from ..models import (
    ClosestPointResult,
    EmbeddedFunction,
    FiniteMetricSpace,
    FrechetResult,
    GradientCheck,
    HullMeanResult,
    HullPoint,
    MetricChoice,
    ModifiedMetricSpace,
    ProbabilityMeasure,
    SampleBatch,
)
from ..utils.log import logger
from ..utils.rng import make_generator
from .measure import empirical_coefficients, require_ball_positivity
from .modified_metric import build_d_eta
from .simplex import MAX_ITER, RESTARTS, minimize_on_simplex

TIE_TOL = 1e-9


def _distance_matrix(
    space: FiniteMetricSpace, metric_choice: MetricChoice, modified: Optional[ModifiedMetricSpace]
) -> np.ndarray:
    if metric_choice == "d":
        return space.dist
    if modified is None:
        raise ValueError("metric_choice 'd_eta' needs a ModifiedMetricSpace (see build_d_eta)")
    if modified.base.space_id != space.space_id:
        raise SpaceMismatchError("modified metric was built on a different space")
    return modified.dist_eta


def frechet_values(dist: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (dist * dist) @ weights


def tied_minimizers(values: np.ndarray, tol: float = TIE_TOL) -> List[int]:
    vmin = float(values.min())
    return [int(i) for i in np.flatnonzero(values <= vmin + tol * abs(vmin))]


def _result(values: np.ndarray, tol: float, metric_choice: MetricChoice) -> FrechetResult:
    mins = tied_minimizers(values, tol)
    return FrechetResult(
        minimizers=mins,
        min_value=float(values.min()),
        values=values,
        unique=len(mins) == 1,
        metric_choice=metric_choice,
    )


def frechet_function(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    p: int,
    metric_choice: MetricChoice = "d",
    modified: Optional[ModifiedMetricSpace] = None,
) -> float:
    d = _distance_matrix(space, metric_choice, modified)
    return float(frechet_values(d, measure.weights)[p])


def population_frechet_mean(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    metric_choice: MetricChoice = "d",
    tol: float = TIE_TOL,
    modified: Optional[ModifiedMetricSpace] = None,
) -> FrechetResult:
    d = _distance_matrix(space, metric_choice, modified)
    return _result(frechet_values(d, measure.weights), tol, metric_choice)


def sample_frechet_mean(
    space: FiniteMetricSpace,
    batch: SampleBatch,
    metric_choice: MetricChoice = "d",
    tol: float = TIE_TOL,
    modified: Optional[ModifiedMetricSpace] = None,
) -> FrechetResult:
    if batch.m == 0:
        raise MeasureError("sample Frechet mean of an empty batch")
    if batch.n_points != space.n:
        raise SpaceMismatchError(f"batch indexes {batch.n_points} points, space has {space.n}")
    d = _distance_matrix(space, metric_choice, modified)
    return _result(frechet_values(d, empirical_coefficients(batch.indices, space.n)), tol, metric_choice)


def frechet_variance(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    metric_choice: MetricChoice = "d",
    modified: Optional[ModifiedMetricSpace] = None,
) -> float:
    return population_frechet_mean(space, measure, metric_choice, modified=modified).min_value


# ----------------------------------------------------------------- hull means


def batch_objective(items: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """(1/m) sum_i ||X_i - Y||^2 in L2(weights); items is m x n."""
    diff = items - y[None, :]
    return float(np.mean((diff * diff) @ weights))


def _coefficients(space: FiniteMetricSpace, item: Union[HullPoint, EmbeddedFunction]) -> np.ndarray:
    if item.space_id != space.space_id:
        raise SpaceMismatchError(f"item lives on space {item.space_id}, expected {space.space_id}")
    if isinstance(item, HullPoint):
        return item.weights
    if item.source is None:
        raise ValueError("embedded function has no source point, so its hull coefficients are unknown")
    c = np.zeros(space.n)
    c[item.source] = 1.0
    return c


def empirical_hull_mean(embedded: np.ndarray, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(coefficients, values) of the average of the embedded rows picked by a sample."""
    coeffs = empirical_coefficients(indices, embedded.shape[0])
    return coeffs, coeffs @ embedded


def hull_oracle(
    space: FiniteMetricSpace,
    items: np.ndarray,
    weights: np.ndarray,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
) -> Tuple[np.ndarray, float]:
    """Best batch objective found by projected gradient over hull coefficients."""
    return hull_oracle_matrix(space.dist, items, weights, seed=seed, restarts=restarts, max_iter=max_iter)


def hull_oracle_matrix(
    F: np.ndarray,
    items: np.ndarray,
    weights: np.ndarray,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
) -> Tuple[np.ndarray, float]:
    """hull_oracle over the rows of F, which need not be distance rows of a metric."""
    Fw = F * weights[None, :]
    Q = Fw @ F.T
    b = Fw @ items.mean(axis=0)
    coeffs, _, _ = minimize_on_simplex(Q, b, seed=seed, restarts=restarts, max_iter=max_iter)
    return coeffs, batch_objective(items, coeffs @ F, weights)


def hull_sample_mean(
    space: FiniteMetricSpace,
    items: Sequence[Union[HullPoint, EmbeddedFunction]],
    measure: ProbabilityMeasure,
    oracle: bool = True,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
) -> HullMeanResult:
    """Coordinate-wise average of embedded points, which minimizes the L2 sum of squares over the hull."""
    if not items:
        raise MeasureError("hull mean of an empty batch")
    if measure.n != space.n:
        raise SpaceMismatchError("measure and space sizes differ")
    coeffs = np.mean([_coefficients(space, it) for it in items], axis=0)
    mean = HullPoint(weights=coeffs, values=coeffs @ space.dist, space_id=space.space_id)
    X = np.vstack([it.values for it in items])
    value = batch_objective(X, mean.values, measure.weights)
    if not oracle:
        return HullMeanResult(mean=mean, frechet_value=value)
    _, oracle_value = hull_oracle(space, X, measure.weights, seed=seed, restarts=restarts, max_iter=max_iter)
    logger.debug("hull_sample_mean: m=%d, objective %.12g, oracle %.12g", len(items), value, oracle_value)
    return HullMeanResult(mean=mean, frechet_value=value, oracle_value=oracle_value, oracle_gap=oracle_value - value)


def hull_population_mean(space: FiniteMetricSpace, measure: ProbabilityMeasure) -> HullPoint:
    """Center of mass sum_x eta_x f_x of the embedded points."""
    if measure.n != space.n:
        raise SpaceMismatchError("measure and space sizes differ")
    w = measure.weights
    return HullPoint(weights=w, values=w @ space.dist, space_id=space.space_id)


def _center_of_mass_objective(p: np.ndarray, embedded: np.ndarray, weights: np.ndarray) -> float:
    diff = p[None, :] - embedded
    return float(weights @ ((diff * diff) @ weights))


def center_of_mass_gradient_check(
    space: FiniteMetricSpace, measure: ProbabilityMeasure, probes: int = 5, seed: int = 0, h: float = 1e-5
) -> GradientCheck:
    """Compare central differences of F(p) = sum_x eta_x ||p - f_x||^2 with 2 (p - mu).

    Partial derivatives are divided by eta_z to express the gradient in the
    L2(eta) inner product; coordinates with eta_z = 0 are skipped.
    """
    w = measure.weights
    mu = hull_population_mean(space, measure).values
    support = measure.support
    rng = make_generator(seed)

    def fd_gradient(p: np.ndarray) -> np.ndarray:
        grad = np.zeros(support.size)
        for k, z in enumerate(support):
            up, down = p.copy(), p.copy()
            up[z] += h
            down[z] -= h
            grad[k] = (
                _center_of_mass_objective(up, space.dist, w) - _center_of_mass_objective(down, space.dist, w)
            ) / (2.0 * h * w[z])
        return grad

    worst = 0.0
    for _ in range(probes):
        p = rng.dirichlet(np.ones(space.n)) @ space.dist
        exact = 2.0 * (p - mu)[support]
        scale = max(float(np.max(np.abs(exact))), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(fd_gradient(p) - exact))) / scale)
    stationary = float(np.max(np.abs(fd_gradient(mu))))
    return GradientCheck(probes=probes, max_relative_error=worst, stationary_norm=stationary)


def closest_point_to_hull_mean(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    tol: float = TIE_TOL,
    batch: Optional[SampleBatch] = None,
    modified: Optional[ModifiedMetricSpace] = None,
) -> ClosestPointResult:
    """Frechet minimizers under d_eta versus the points whose d_eta rows are closest to their mean.

    mu0 minimizes sum_y a_y d_eta(x, y)^2, with a = eta, or the empirical
    weights of the batch when one is given. closest minimizes the L2(eta)
    distance from the d_eta row of x to the a-average of the rows.
    embedded_minimizers minimizes sum_y a_y ||row_x - row_y||^2 in L2(eta); it
    always equals closest and is kept as a cross-check.
    """
    require_ball_positivity(space, measure)
    mm = modified if modified is not None else build_d_eta(space, measure)
    E = mm.dist_eta
    eta = measure.weights
    avg = eta if batch is None else empirical_coefficients(batch.indices, space.n)

    if batch is None:
        mu0 = population_frechet_mean(space, measure, "d_eta", tol, modified=mm).minimizers
    else:
        mu0 = sample_frechet_mean(space, batch, "d_eta", tol, modified=mm).minimizers

    mean = avg @ E
    diff = E - mean[None, :]
    to_mean = (diff * diff) @ eta
    closest = tied_minimizers(to_mean, tol)

    sq = np.empty((space.n, space.n))
    for x in range(space.n):
        rows = E[x][None, :] - E
        sq[x] = (rows * rows) @ eta
    embedded = tied_minimizers(sq @ avg, tol)

    coincide = bool(set(mu0) & set(closest))
    if not coincide:
        logger.info("closest point %s differs from the d_eta Frechet minimizers %s", closest, mu0)
    return ClosestPointResult(
        mu0=mu0,
        closest=closest,
        coincide=coincide,
        embedded_minimizers=embedded,
        closest_distance=float(np.sqrt(max(to_mean[closest[0]], 0.0))),
    )
