"""Kuratowski embedding x -> f_x = d(x, .) and convex combinations of its image.

Embedded functions are evaluated on the space's own points, so the full
image of the embedding is the distance matrix itself (row x is f_x).
"""

from typing import Mapping, Sequence, Union

import numpy as np

from ..errors import SpaceMismatchError
from ..models import EmbeddedFunction, FiniteMetricSpace, HullPoint, TwoDiameterCheck, WEIGHT_SUM_TOL
from .metric_core import diameter


def embedding_matrix(space: FiniteMetricSpace) -> np.ndarray:
    return space.dist


def embed_point(space: FiniteMetricSpace, i: int) -> EmbeddedFunction:
    return EmbeddedFunction(values=space.dist[i], space_id=space.space_id, source=int(i))


def _same_space(f, g) -> None:
    if f.space_id != g.space_id or f.values.shape != g.values.shape:
        raise SpaceMismatchError(f"functions live on different spaces ({f.space_id} vs {g.space_id})")


def sup_distance(f: Union[EmbeddedFunction, HullPoint], g: Union[EmbeddedFunction, HullPoint]) -> float:
    _same_space(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def lipschitz_constant(f: Union[EmbeddedFunction, HullPoint], space: FiniteMetricSpace) -> float:
    """Largest ratio |f(t) - f(s)| / d(t, s) over pairs t != s."""
    if f.space_id != space.space_id:
        raise SpaceMismatchError("function and space do not match")
    if space.n < 2:
        return 0.0
    diff = np.abs(f.values[:, None] - f.values[None, :])
    off = ~np.eye(space.n, dtype=bool)
    return float(np.max(diff[off] / space.dist[off]))


def hull_point(space: FiniteMetricSpace, coeffs: Union[Mapping[int, float], Sequence[float], np.ndarray]) -> HullPoint:
    """Convex combination sum_x c_x f_x from a sparse {index: weight} map or a dense vector."""
    if isinstance(coeffs, Mapping):
        w = np.zeros(space.n)
        for i, c in coeffs.items():
            if not 0 <= int(i) < space.n:
                raise SpaceMismatchError(f"coefficient index {i} outside [0, {space.n})")
            w[int(i)] += float(c)
    else:
        w = np.asarray(coeffs, dtype=float)
        if w.shape != (space.n,):
            raise SpaceMismatchError(f"expected {space.n} coefficients, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError(f"negative hull coefficient at index {int(np.argmax(w < 0))}")
    if abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"hull coefficients sum to {float(w.sum())!r}, not 1")
    return HullPoint(weights=w, values=w @ space.dist, space_id=space.space_id)


def hull_cache_error(space: FiniteMetricSpace, h: HullPoint) -> float:
    """Largest entrywise gap between the cached values and a fresh recomputation."""
    fresh = sum(float(c) * space.dist[i] for i, c in h.coeffs.items())
    return float(np.max(np.abs(np.asarray(fresh) - h.values)))


def isometry_error(space: FiniteMetricSpace) -> float:
    """max over pairs of |sup_z |d(x,z) - d(y,z)| - d(x,y)|."""
    d = space.dist
    worst = 0.0
    for x in range(space.n):
        sup = np.max(np.abs(d[x][None, :] - d), axis=1)
        worst = max(worst, float(np.max(np.abs(sup - d[x]))))
    return worst


def two_diameter_check(space: FiniteMetricSpace, h: HullPoint, slack: float = 1e-12) -> TwoDiameterCheck:
    gaps = np.max(np.abs(space.dist - h.values[None, :]), axis=1)
    nearest = int(np.argmin(gaps))
    bound = 2.0 * diameter(space)
    dist_to_image = float(gaps[nearest])
    return TwoDiameterCheck(
        dist_to_image=dist_to_image, nearest_point=nearest, bound=bound, ok=dist_to_image <= bound + slack
    )
