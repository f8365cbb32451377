"""Probability measures on finite metric spaces and i.i.d. sampling."""

from typing import Mapping, Optional, Sequence, Union

import numpy as np

from ..errors import HypothesisWarning, MeasureError, warn_hypothesis
from ..models import BallPositivityResult, FiniteMetricSpace, ProbabilityMeasure, SampleBatch
from ..utils.io import load_weights
from ..utils.log import logger
from ..utils.rng import make_generator


def uniform_measure(space: FiniteMetricSpace) -> ProbabilityMeasure:
    return ProbabilityMeasure(weights=np.full(space.n, 1.0 / space.n), space_id=space.space_id)


def measure_from_weights(space: FiniteMetricSpace, raw) -> ProbabilityMeasure:
    w = np.asarray(raw, dtype=float)
    if w.ndim != 1 or w.size != space.n:
        raise MeasureError(f"expected {space.n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise MeasureError("weights must be finite")
    if np.any(w < 0):
        raise MeasureError(f"negative weight at index {int(np.argmax(w < 0))}")
    total = float(w.sum())
    if total <= 0.0:
        raise MeasureError("weights sum to zero")
    return ProbabilityMeasure(weights=w / total, space_id=space.space_id)


def delta_measure(space: FiniteMetricSpace, i: int) -> ProbabilityMeasure:
    w = np.zeros(space.n)
    w[i] = 1.0
    return ProbabilityMeasure(weights=w, space_id=space.space_id)


def empirical_measure(space: FiniteMetricSpace, batch: SampleBatch) -> ProbabilityMeasure:
    if batch.m == 0:
        raise MeasureError("empty batch has no empirical measure")
    return ProbabilityMeasure(weights=empirical_coefficients(batch.indices, space.n), space_id=space.space_id)


def empirical_coefficients(indices: np.ndarray, n_points: int) -> np.ndarray:
    """Frequencies of each point in a sample; also the hull coefficients of its mean."""
    return np.bincount(indices, minlength=n_points) / len(indices)


def default_eps_grid(space: FiniteMetricSpace) -> list:
    """Half the smallest pairwise distance: balls are singletons, so positivity means full support."""
    if space.n == 1:
        return [1.0]
    off = space.dist[~np.eye(space.n, dtype=bool)]
    return [float(off.min()) / 2.0]


def ball_positivity_check(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    eps_grid: Optional[Sequence[float]] = None,
) -> BallPositivityResult:
    """Check that every open ball B_eps(x) = {z : d(x, z) < eps} has positive mass.

    Points are scanned in index order; the first failing point is reported
    with the largest eps on the grid at which its ball is still null.
    """
    grid = list(default_eps_grid(space) if eps_grid is None else eps_grid)
    if not grid or any(e <= 0 for e in grid):
        raise MeasureError("eps grid must be non-empty and positive")
    w = measure.weights
    min_mass = 1.0
    failure = None
    for x in range(space.n):
        row = space.dist[x]
        for eps in sorted(grid, reverse=True):
            mass = float(w[row < eps].sum())
            min_mass = min(min_mass, mass)
            if mass <= 0.0 and failure is None:
                failure = (x, float(eps))
    if failure is None:
        return BallPositivityResult(ok=True, min_mass=min_mass)
    return BallPositivityResult(ok=False, point=failure[0], eps=failure[1], min_mass=min_mass)


def require_ball_positivity(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    eps_grid: Optional[Sequence[float]] = None,
) -> BallPositivityResult:
    """Run the ball-positivity check and warn (without raising) on failure."""
    result = ball_positivity_check(space, measure, eps_grid)
    if not result.ok:
        warn_hypothesis(
            HypothesisWarning(
                "ball-positivity",
                f"ball of radius {result.eps:g} around point {result.point} has zero measure",
                {"point": result.point, "eps": result.eps},
            )
        )
    return result


def sample_iid(measure: ProbabilityMeasure, m: int, seed: int) -> SampleBatch:
    """Draw m indices i.i.d. from the measure by inverse CDF on the cumulative weights.

    The generator is numpy's Philox seeded with `seed`, so (seed, m, weights)
    fixes the batch. Zero-weight atoms are never drawn.
    """
    if m < 1:
        raise MeasureError(f"sample size must be at least 1, got {m}")
    cdf = np.cumsum(measure.weights)
    cdf = cdf / cdf[-1]
    u = make_generator(seed).random(m)
    indices = np.searchsorted(cdf, u, side="right")
    return SampleBatch(indices=indices, n_points=measure.n, seed=int(seed), measure_id=measure.measure_id)


PointMap = Union[Sequence[Optional[int]], Mapping[int, int]]


def pushforward(measure: ProbabilityMeasure, point_map: PointMap, target_n: Optional[int] = None,
                target_space_id: Optional[str] = None) -> ProbabilityMeasure:
    """Push the measure through an index map: weight(j) = sum of weights of the preimages of j."""
    if isinstance(point_map, Mapping):
        lookup = dict(point_map)
    else:
        lookup = {i: t for i, t in enumerate(point_map) if t is not None}
    n_out = target_n if target_n is not None else max(list(lookup.values()) + [measure.n - 1]) + 1
    out = np.zeros(n_out)
    for i in measure.support:
        i = int(i)
        if i not in lookup:
            raise MeasureError(f"map undefined on index {i}, which carries weight {measure.weights[i]:g}")
        target = int(lookup[i])
        if not 0 <= target < n_out:
            raise MeasureError(f"index {i} maps outside [0, {n_out})")
        out[target] += measure.weights[i]
    logger.debug("pushforward: %d atoms onto %d points", len(measure.support), n_out)
    return ProbabilityMeasure(weights=out, space_id=target_space_id or measure.space_id)


# ------------------------------------------------------------------------ I/O


def load_measure(space: FiniteMetricSpace, path) -> ProbabilityMeasure:
    return measure_from_weights(space, load_weights(path))


def measure_to_json(measure: ProbabilityMeasure) -> dict:
    return {"weights": measure.weights.tolist()}
