"""Finite metric spaces, metric-axiom validation and the cone example.

The cone is the open cone x^2 + y^2 = z^2 of height one, minus a line,
parametrized by (u, v) in (0, 1) x (0, 2*pi). Unrolled, it is a flat sector
of radius sqrt(2) and opening angle sqrt(2)*pi; geodesic distances are
computed in that sector with wrap-around.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..errors import MetricAxiomError, MetricInputError
from ..models import ConePoint, FiniteMetricSpace, MetricValidationReport
from ..utils.io import load_matrix
from ..utils.log import logger
from ..utils.rng import make_generator

SQRT2 = math.sqrt(2.0)
CONE_TOTAL_ANGLE = SQRT2 * math.pi
DEFAULT_TOL = 1e-9


def _as_square(dist) -> np.ndarray:
    try:
        arr = np.asarray(dist, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MetricInputError(f"distance matrix is not numeric: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise MetricInputError(f"distance matrix must be square and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise MetricInputError(f"distance matrix has a NaN or infinite entry at {bad}")
    return arr


def validate_metric(dist, tol: float = DEFAULT_TOL) -> MetricValidationReport:
    """Check the metric axioms on a square matrix.

    A triangle violation (i, j, k, excess) means
    dist[i][j] > dist[i][k] + dist[k][j] + tol, with excess the amount by which
    the left side exceeds the right side.
    """
    d = _as_square(dist)
    n = d.shape[0]
    symmetric = bool(np.all(np.abs(d - d.T) <= tol))
    off = ~np.eye(n, dtype=bool)
    identity_ok = bool(np.all(np.abs(np.diag(d)) <= tol) and np.all(d[off] > 0.0))

    violations: List[Tuple[int, int, int, float]] = []
    dt = d.T
    for i in range(n):
        # excess[j, k] = d[i, j] - d[i, k] - d[k, j]
        excess = d[i][:, None] - d[i][None, :] - dt
        for j, k in np.argwhere(excess > tol):
            violations.append((i, int(j), int(k), float(excess[j, k])))
    max_excess = max((v[3] for v in violations), default=0.0)
    if violations:
        logger.debug("validate_metric: %d triangle violations, max excess %.3g", len(violations), max_excess)
    return MetricValidationReport(
        n=n,
        tol=tol,
        symmetric=symmetric,
        identity_ok=identity_ok,
        triangle_violations=violations,
        max_excess=max_excess,
    )


def make_space(dist, labels: Optional[Sequence[str]] = None, tol: float = DEFAULT_TOL) -> FiniteMetricSpace:
    """Validated space; raises MetricAxiomError (unwrapped) when the axioms fail."""
    d = _as_square(dist)
    if labels is not None and len(labels) != d.shape[0]:
        raise MetricInputError(f"{len(labels)} labels given for {d.shape[0]} points")
    report = validate_metric(d, tol)
    if not report.ok:
        raise MetricAxiomError(
            f"matrix is not a metric: symmetric={report.symmetric}, identity_ok={report.identity_ok}, "
            f"triangle violations {report.triangle_violations[:3]}"
        )
    return FiniteMetricSpace.model_validate(
        {"n": d.shape[0], "dist": d, "labels": list(labels) if labels is not None else None, "tol": tol},
        context={"axioms_checked": True},
    )


def euclidean_space(points, labels: Optional[Sequence[str]] = None) -> FiniteMetricSpace:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise MetricInputError("points must be a non-empty list of equal-length vectors")
    if not np.all(np.isfinite(pts)):
        raise MetricInputError("points must have finite coordinates")
    n = pts.shape[0]
    dist = squareform(pdist(pts, metric="euclidean")) if n > 1 else np.zeros((1, 1))
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] == 0.0):
        i, j = (int(a) for a in np.argwhere((dist == 0.0) & off)[0])
        raise MetricInputError(f"points {i} and {j} coincide")
    return make_space(dist, labels)


def random_euclidean_space(n: int, dim: int = 2, seed: int = 0) -> FiniteMetricSpace:
    """n points drawn uniformly from the unit cube [0, 1]^dim."""
    rng = make_generator(seed)
    return euclidean_space(rng.random((n, dim)))


def unit_square_grid(nx: int, ny: int) -> FiniteMetricSpace:
    """Evenly spaced nx x ny grid of cell centers in [0, 1]^2."""
    xs = (np.arange(nx) + 0.5) / nx
    ys = (np.arange(ny) + 0.5) / ny
    pts = np.array([(x, y) for x in xs for y in ys])
    return euclidean_space(pts)


def diameter(space: FiniteMetricSpace) -> float:
    return float(space.dist.max())


# ----------------------------------------------------------------------- cone


def cone_sector_coords(p: ConePoint) -> Tuple[float, float]:
    """Sector coordinates (r, theta) = (sqrt(2) u, v / sqrt(2))."""
    return SQRT2 * p.u, p.v / SQRT2


def sector_to_cone(r: float, theta: float) -> ConePoint:
    return ConePoint(u=r / SQRT2, v=SQRT2 * theta)


def cone_surface_point(p: ConePoint) -> Tuple[float, float, float]:
    """Position of p on x^2 + y^2 = z^2 in R^3, scaled by 1/sqrt(2)."""
    s = p.u / SQRT2
    return s * math.cos(p.v), s * math.sin(p.v), s


def _unrolled_distance(r1, t1, r2, t2):
    dtheta = np.abs(np.asarray(t1) - np.asarray(t2))
    dtheta = np.minimum(dtheta, CONE_TOTAL_ANGLE - dtheta)
    # (r1 - r2)^2 + 4 r1 r2 sin^2(dtheta / 2) is the law of cosines without cancellation
    chord = np.sqrt((r1 - r2) ** 2 + 4.0 * r1 * r2 * np.sin(dtheta / 2.0) ** 2)
    return np.where(dtheta <= math.pi, chord, r1 + r2)


def cone_geodesic_distance(p: ConePoint, q: ConePoint) -> float:
    rp, tp = cone_sector_coords(p)
    rq, tq = cone_sector_coords(q)
    return float(_unrolled_distance(rp, tp, rq, tq))


def cone_grid(n_u: int, n_v: int) -> List[ConePoint]:
    """Grid points offset half a step from the boundary, u-major order."""
    if n_u < 2 or n_v < 3:
        raise MetricInputError(f"cone grid needs n_u >= 2 and n_v >= 3, got {n_u} x {n_v}")
    us = (np.arange(n_u) + 0.5) / n_u
    vs = 2.0 * math.pi * (np.arange(n_v) + 0.5) / n_v
    return [ConePoint(u=float(u), v=float(v)) for u in us for v in vs]


def make_cone_space(n_u: int, n_v: int) -> FiniteMetricSpace:
    """Cone grid of n_u radial rings by n_v angular positions; index = i_u * n_v + i_v."""
    pts = cone_grid(n_u, n_v)
    coords = np.array([cone_sector_coords(p) for p in pts])
    r, t = coords[:, 0], coords[:, 1]
    dist = _unrolled_distance(r[:, None], t[:, None], r[None, :], t[None, :])
    dist = (dist + dist.T) / 2.0
    np.fill_diagonal(dist, 0.0)
    labels = [f"u{iu}v{iv}" for iu in range(n_u) for iv in range(n_v)]
    logger.debug("make_cone_space: %d x %d grid", n_u, n_v)
    return make_space(dist, labels)


def cone_rotation(n_u: int, n_v: int, steps: int = 1) -> np.ndarray:
    """Index permutation shifting every ring of the cone grid by `steps` angular positions."""
    iu, iv = np.divmod(np.arange(n_u * n_v), n_v)
    return iu * n_v + (iv + steps) % n_v


# ------------------------------------------------------------------------ I/O


def load_space(path, tol: float = DEFAULT_TOL) -> FiniteMetricSpace:
    dist, labels = load_matrix(path)
    return make_space(dist, labels, tol)


def space_to_json(space: FiniteMetricSpace) -> dict:
    return {"n": space.n, "dist": space.dist.tolist(), "labels": space.labels}
