"""L^p(eta) distances between embedded points and their explicit equivalence.

For x != y, the exceptional set S_xy(D) = {z : |d(x,z) - d(y,z)| <= D d(x,y)}
controls how far d_p can drop below d_p'. With C the largest exceptional
mass over all pairs, D (1 - C)^(1/p) d_p' <= d_p <= d_p' whenever C < 1.
"""

import math
from typing import List, Optional, Sequence

import numpy as np

from ..errors import HypothesisError
from ..models import (
    FiniteMetricSpace,
    LpAssumptionEstimate,
    NestingViolation,
    ProbabilityMeasure,
    SandwichReport,
    SandwichRow,
    SandwichViolation,
)
from ..utils.log import logger
from .modified_metric import weighted_l2

DEFAULT_D_GRID = (0.05, 0.1, 0.2, 0.3, 0.5)
SANDWICH_SLACK = 1e-12


def _check_p(p: float) -> None:
    if not (p >= 1.0):
        raise ValueError(f"p must lie in [1, inf], got {p}")


def _dp(diff: np.ndarray, weights: np.ndarray, support: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(diff[support]))) if support.size else 0.0
    if p == 2.0:
        return weighted_l2(diff, weights)
    return float(np.dot(np.abs(diff) ** p, weights)) ** (1.0 / p)


def dp_distance(space: FiniteMetricSpace, measure: ProbabilityMeasure, p: float, x: int, y: int) -> float:
    """||f_x - f_y||_{L^p(eta)}; for p = inf the max is over the support of eta."""
    _check_p(p)
    return _dp(space.dist[x] - space.dist[y], measure.weights, measure.support, p)


def dp_matrix(space: FiniteMetricSpace, measure: ProbabilityMeasure, p: float) -> np.ndarray:
    """d_p pulled back to a (pseudo-)metric on the points."""
    _check_p(p)
    n = space.n
    out = np.zeros((n, n))
    w, support = measure.weights, measure.support
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = _dp(space.dist[i] - space.dist[j], w, support, p)
    return out


def _check_D(D: float) -> None:
    if not 0.0 < D < 1.0:
        raise ValueError(f"D must lie in (0, 1), got {D}")


def exceptional_set_mass(space: FiniteMetricSpace, measure: ProbabilityMeasure, D: float, x: int, y: int) -> float:
    _check_D(D)
    if x == y:
        raise ValueError("exceptional set needs x != y")
    gap = np.abs(space.dist[x] - space.dist[y])
    return float(measure.weights[gap <= D * space.dist[x, y]].sum())


def _pair_masses(space: FiniteMetricSpace, weights: np.ndarray, D: float) -> np.ndarray:
    """masses[x, y] = eta(S_xy(D)); the diagonal is left at zero."""
    n = space.n
    d = space.dist
    masses = np.zeros((n, n))
    for x in range(n):
        gap = np.abs(d[x][None, :] - d)
        inside = gap <= D * d[x][:, None]
        masses[x] = inside @ weights
        masses[x, x] = 0.0
    return masses


def _estimate(space: FiniteMetricSpace, measure: ProbabilityMeasure, D: float) -> LpAssumptionEstimate:
    _check_D(D)
    if space.n == 1:
        return LpAssumptionEstimate(D=D, C=0.0, worst_pair=None, holds=True, margin=1.0)
    masses = _pair_masses(space, measure.weights, D)
    x, y = np.unravel_index(int(np.argmax(masses)), masses.shape)
    C = min(float(masses[x, y]), 1.0)
    pair = (int(min(x, y)), int(max(x, y)))
    return LpAssumptionEstimate(D=D, C=C, worst_pair=pair, holds=C < 1.0, margin=1.0 - C)


def estimate_assumption_constants(
    space: FiniteMetricSpace, measure: ProbabilityMeasure, D_grid: Sequence[float] = DEFAULT_D_GRID
) -> List[LpAssumptionEstimate]:
    """C(D) = max over pairs of the exceptional-set mass, one estimate per D."""
    out = [_estimate(space, measure, float(D)) for D in D_grid]
    for est in out:
        logger.debug("D=%.4g: C=%.6g worst=%s holds=%s", est.D, est.C, est.worst_pair, est.holds)
    return out


def largest_feasible_D(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    c_max: float = 0.9,
    tol: float = 1e-6,
    lo: float = 1e-6,
) -> Optional[LpAssumptionEstimate]:
    """Bisection for the largest D with C(D) <= c_max; None when even D = lo exceeds it."""
    if not 0.0 <= c_max < 1.0:
        raise ValueError(f"c_max must lie in [0, 1), got {c_max}")
    best = _estimate(space, measure, lo)
    if best.C > c_max:
        return None
    hi = 1.0 - 1e-12
    top = _estimate(space, measure, hi)
    if top.C <= c_max:
        return top
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        est = _estimate(space, measure, mid)
        if est.C <= c_max:
            lo, best = mid, est
        else:
            hi = mid
    return best


def check_sandwich(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    p: float,
    p_prime: float,
    est: LpAssumptionEstimate,
    keep_rows: bool = True,
) -> SandwichReport:
    """Evaluate D (1 - C)^(1/p) d_p' <= d_p <= d_p' on every pair x < y."""
    if not est.holds:
        raise HypothesisError(f"assumption fails at D={est.D}: C={est.C} is not below 1")
    _check_p(p)
    if not p < p_prime:
        raise ValueError(f"need p < p_prime, got {p} and {p_prime}")
    lower_constant = est.D * (1.0 - est.C) ** (1.0 / p)
    dp = dp_matrix(space, measure, p)
    dq = dp_matrix(space, measure, p_prime)
    rows: List[SandwichRow] = []
    violations: List[SandwichViolation] = []
    for x in range(space.n):
        for y in range(x + 1, space.n):
            lower = lower_constant * dq[x, y]
            if lower - dp[x, y] > SANDWICH_SLACK:
                violations.append(SandwichViolation(x=x, y=y, kind="lower", excess=float(lower - dp[x, y])))
            if dp[x, y] - dq[x, y] > SANDWICH_SLACK:
                violations.append(SandwichViolation(x=x, y=y, kind="upper", excess=float(dp[x, y] - dq[x, y])))
            if keep_rows:
                rows.append(
                    SandwichRow(
                        x=x,
                        y=y,
                        d_p=float(dp[x, y]),
                        d_p_prime=float(dq[x, y]),
                        lower_bound=float(lower),
                        slack=float(min(dp[x, y] - lower, dq[x, y] - dp[x, y])),
                    )
                )
    return SandwichReport(
        p=p,
        p_prime=p_prime,
        D=est.D,
        C=est.C,
        lower_constant=lower_constant,
        violations=violations,
        max_violation=max((v.excess for v in violations), default=0.0),
        rows=rows,
    )


def nesting_check(
    space: FiniteMetricSpace, measure: ProbabilityMeasure, D: float, p: float, p_prime: float
) -> List[NestingViolation]:
    """Points z in K^p_D(x, y) but not in K^p'_D(x, y), using the pulled-back metrics.

    K^p_D(x, y) = {z : |d_p(x, z) - d_p(y, z)| <= D d_p(x, y)}. Violations are
    findings, not failures.
    """
    _check_D(D)
    if p_prime < p:
        raise ValueError(f"need p <= p_prime, got {p} and {p_prime}")
    dp = dp_matrix(space, measure, p)
    dq = dp_matrix(space, measure, p_prime)
    out: List[NestingViolation] = []
    for x in range(space.n):
        for y in range(x + 1, space.n):
            in_p = np.abs(dp[x] - dp[y]) <= D * dp[x, y]
            in_q = np.abs(dq[x] - dq[y]) <= D * dq[x, y]
            out.extend(NestingViolation(x=x, y=y, z=int(z)) for z in np.flatnonzero(in_p & ~in_q))
    if out:
        logger.info("nesting_check: %d points outside the larger-p set (D=%g, p=%g, p'=%g)", len(out), D, p, p_prime)
    return out
