"""Covering numbers, metric entropy and the entropy integral.

Covers use closed balls {z : d(c, z) <= eps} around chosen points of the
space. The greedy cover is the smaller of a farthest-point cover and a
greedy set cover; the exact cover is a branch-and-bound set-cover search.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import CoveringSearchTooLarge
from ..models import CoveringReport, DoublingCheck, DyadicCoverRow, DyadicSeries, EntropyCurve, FiniteMetricSpace
from ..utils.log import logger
from .metric_core import diameter

EXACT_MAX_N = 24
CONVENTION = "closed balls of radius eps around chosen points"


def min_pairwise_distance(space: FiniteMetricSpace) -> float:
    if space.n == 1:
        return 0.0
    return float(space.dist[~np.eye(space.n, dtype=bool)].min())


def covers(dist: np.ndarray, eps: float, centers: Sequence[int]) -> bool:
    """True when every point lies within eps of some center."""
    if len(centers) == 0:
        return False
    return bool(np.all(dist[list(centers)].min(axis=0) <= eps))


def _farthest_point_cover(dist: np.ndarray, eps: float) -> List[int]:
    centers = [0]
    reach = dist[0].copy()
    while reach.max() > eps:
        c = int(np.argmax(reach))
        centers.append(c)
        reach = np.minimum(reach, dist[c])
    return centers


def _greedy_set_cover(dist: np.ndarray, eps: float) -> List[int]:
    balls = dist <= eps
    uncovered = np.ones(dist.shape[0], dtype=bool)
    centers = []
    while uncovered.any():
        gain = balls[:, uncovered].sum(axis=1)
        c = int(np.argmax(gain))
        centers.append(c)
        uncovered &= ~balls[c]
    return centers


def _greedy_centers(dist: np.ndarray, eps: float) -> List[int]:
    fps = _farthest_point_cover(dist, eps)
    gsc = _greedy_set_cover(dist, eps)
    return fps if len(fps) <= len(gsc) else gsc


def covering_number_greedy(space: FiniteMetricSpace, eps: float) -> CoveringReport:
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    centers = _greedy_centers(space.dist, eps)
    return CoveringReport(eps=float(eps), n_cover=len(centers), method="greedy", centers=centers)


def covering_number_exact(space: FiniteMetricSpace, eps: float, max_n: int = EXACT_MAX_N) -> CoveringReport:
    """Minimum cover by branch and bound on the lowest uncovered point."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = space.n
    if n > max_n:
        raise CoveringSearchTooLarge(
            f"exact covering search is limited to {max_n} points (space has {n}); use covering_number_greedy"
        )
    balls = space.dist <= eps
    masks = [sum(1 << int(j) for j in np.flatnonzero(balls[i])) for i in range(n)]
    full = (1 << n) - 1
    largest = max(bin(m).count("1") for m in masks)
    # candidates that can cover point j, best coverage first
    by_point = [sorted(np.flatnonzero(balls[:, j]).tolist(), key=lambda c: -bin(masks[c]).count("1")) for j in range(n)]

    best = _greedy_centers(space.dist, eps)

    def search(covered: int, chosen: List[int]) -> None:
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        remaining = n - bin(covered).count("1")
        if len(chosen) + math.ceil(remaining / largest) >= len(best):
            return
        free = ~covered & full
        j = (free & -free).bit_length() - 1
        for c in by_point[j]:
            chosen.append(c)
            search(covered | masks[c], chosen)
            chosen.pop()

    search(0, [])
    return CoveringReport(eps=float(eps), n_cover=len(best), method="exact", centers=sorted(best))


def default_entropy_grid(space: FiniteMetricSpace, cells: int = 256) -> List[float]:
    """Evenly spaced decreasing grid from the diameter down to the smallest pairwise distance."""
    if space.n == 1:
        return [1.0]
    top, floor = diameter(space), min_pairwise_distance(space)
    if top <= floor:
        return [top]
    return [float(e) for e in np.linspace(top, floor, cells + 1)]


def entropy_integral(space: FiniteMetricSpace, grid: Optional[Sequence[float]] = None) -> EntropyCurve:
    """Left-endpoint estimate of the integral of sqrt(log N(eps)).

    Cells are clipped below at the smallest pairwise distance; the part
    under it is bounded by sqrt(log n) times that distance and reported as
    `floor_remainder`. Covers are computed from the smallest eps upward and
    a smaller-eps cover is reused when it beats the fresh greedy one, which
    keeps the counts non-increasing in eps.
    """
    grid = list(default_entropy_grid(space) if grid is None else grid)
    if not grid or any(e <= 0 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be a non-empty strictly decreasing list of positive eps")

    reports: List[CoveringReport] = [None] * len(grid)
    carried: Optional[List[int]] = None
    for idx in range(len(grid) - 1, -1, -1):
        eps = grid[idx]
        centers = _greedy_centers(space.dist, eps)
        if carried is not None and len(carried) < len(centers):
            centers = carried
        carried = centers
        reports[idx] = CoveringReport(eps=float(eps), n_cover=len(centers), method="greedy", centers=list(centers))
    values = [r.n_cover for r in reports]

    floor = min_pairwise_distance(space)
    integral = 0.0
    for i in range(len(grid) - 1):
        upper, lower = grid[i], max(grid[i + 1], floor)
        if upper <= lower or values[i] == 1:
            continue
        integral += math.sqrt(math.log(values[i])) * (upper - lower)
    ones = [e for e, v in zip(grid, values) if v == 1]
    remainder = math.sqrt(math.log(space.n)) * floor if space.n > 1 else 0.0
    logger.debug("entropy_integral: %d grid points, estimate %.6g + floor %.6g", len(grid), integral, remainder)
    return EntropyCurve(
        grid=[float(e) for e in grid],
        values=values,
        covers=reports,
        integral_estimate=integral,
        floor_eps=floor,
        floor_remainder=remainder,
        cutoff_eps=min(ones) if ones else None,
        convention=CONVENTION,
    )


def curve_rows(curve: EntropyCurve) -> List[Tuple[float, int, float, float]]:
    """(eps, n_cover, sqrt_log, cell_contribution) per grid point; the last cell is empty."""
    rows = []
    for i, (eps, n_cover) in enumerate(zip(curve.grid, curve.values)):
        sqrt_log = math.sqrt(math.log(n_cover))
        if i + 1 < len(curve.grid):
            lower = max(curve.grid[i + 1], curve.floor_eps)
            contribution = sqrt_log * max(eps - lower, 0.0)
        else:
            contribution = 0.0
        rows.append((eps, n_cover, sqrt_log, contribution))
    return rows


# ------------------------------------------------------------- dyadic covers


def dyadic_bound_partial_sums(N: float, M: float, k_max: int) -> DyadicSeries:
    """Partial sums of sum_k sqrt((k + 2) log M + log N) 2^(-k-1) for k = 0..k_max."""
    if N < 1 or M < 1 or k_max < 1:
        raise ValueError(f"need N >= 1, M >= 1, k_max >= 1 (got {N}, {M}, {k_max})")
    k = np.arange(k_max + 1)
    terms = np.sqrt((k + 2) * math.log(M) + math.log(N)) * 0.5 ** (k + 1)
    sums = np.cumsum(terms)
    tail = float(sums[k_max] - sums[max(k_max - 10, 0)])
    return DyadicSeries(N=N, M=M, partial_sums=sums.tolist(), tail=tail)


def _doubling(space: FiniteMetricSpace) -> Tuple[int, int, float]:
    if space.n == 1:
        return 1, 1, 1.0
    scale = 2.0 / diameter(space)
    scaled = space.dist * scale
    N = len(_greedy_centers(scaled, 1.0))
    M = 1
    for x in range(space.n):
        ball = np.flatnonzero(scaled[x] <= 1.0)
        sub = scaled[np.ix_(ball, ball)]
        M = max(M, len(_greedy_centers(sub, 0.5)))
    return N, M, scale


def doubling_constant(space: FiniteMetricSpace) -> Tuple[int, int]:
    """(N, M) after rescaling to diameter 2.

    N is the greedy count of radius-1 balls covering the space; M is the
    largest greedy count of radius-1/2 balls needed to cover any radius-1 ball.
    """
    N, M, _ = _doubling(space)
    return N, M


def dyadic_cover_check(space: FiniteMetricSpace, k_max: int = 4) -> DoublingCheck:
    """Compare measured greedy counts at 2^-k (rescaled units) with N * M^(k+1)."""
    N, M, scale = _doubling(space)
    rows = []
    for k in range(k_max + 1):
        eps = 0.5**k / scale
        measured = len(_greedy_centers(space.dist, eps))
        bound = float(N) * float(M) ** (k + 1)
        rows.append(DyadicCoverRow(k=k, eps=eps, measured=measured, bound=bound, ok=measured <= bound))
    return DoublingCheck(N=N, M=M, scale=scale, rows=rows)
