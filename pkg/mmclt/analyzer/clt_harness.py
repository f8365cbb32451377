"""Seeded Monte Carlo checks of the central limit theorems for embedded samples.

Each replicate draws n indices, averages the embedded rows through their
empirical hull coefficients and forms Z = sqrt(n) (mean - m) with m the
exact mean. Per sample size the harness reports the empirical covariance of
Z against the exact limit covariance, normality p-values of fixed linear
projections tested against N(0, a^T Cov a), and centering diagnostics in
the chosen norm.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import HypothesisError, SpaceMismatchError
from ..models import (
    CltConfig,
    CltReport,
    CltSizeSummary,
    FiniteMetricSpace,
    ModifiedMetricSpace,
    ProbabilityMeasure,
    TransportReport,
)
from ..utils.log import logger
from ..utils.rng import make_generator, spawn_seeds
from .frechet import batch_objective, empirical_hull_mean, hull_oracle_matrix
from .measure import empirical_coefficients, sample_iid
from .modified_metric import build_d_eta, weighted_l2
from .normality import anderson_darling_test, ks_test

PROJECTION_STREAM = 0
VARIANCE_FLOOR = 1e-12


def _embedded(
    space: FiniteMetricSpace, measure: ProbabilityMeasure, metric_choice: str, modified: Optional[ModifiedMetricSpace]
) -> Tuple[np.ndarray, Optional[ModifiedMetricSpace]]:
    if measure.n != space.n:
        raise SpaceMismatchError("measure and space sizes differ")
    if metric_choice == "d":
        return space.dist, modified
    mm = modified if modified is not None else build_d_eta(space, measure)
    return mm.dist_eta, mm


def exact_limit_covariance(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    metric_choice: str = "d",
    modified: Optional[ModifiedMetricSpace] = None,
) -> np.ndarray:
    """Cov[s, t] = sum_x eta_x (f_x(s) - m(s)) (f_x(t) - m(t)) with m = sum_x eta_x f_x."""
    E, _ = _embedded(space, measure, metric_choice, modified)
    return _covariance(E, measure.weights)


def _covariance(E: np.ndarray, w: np.ndarray) -> np.ndarray:
    centered = E - (w @ E)[None, :]
    cov = (centered * w[:, None]).T @ centered
    return (cov + cov.T) / 2.0


def projection_matrix(n_points: int, n_projections: int, seed: int) -> np.ndarray:
    """Rows are linear functionals: coordinate evaluations first, then seeded random unit vectors."""
    n_coord = min(math.ceil(n_projections / 2), n_points)
    coords = np.unique((np.arange(n_coord) * n_points) // n_coord)
    rows = [np.eye(n_points)[s] for s in coords]
    rng = make_generator(spawn_seeds(seed, 1, stream=PROJECTION_STREAM)[0])
    while len(rows) < n_projections:
        v = rng.standard_normal(n_points)
        rows.append(v / np.linalg.norm(v))
    return np.vstack(rows)


def _norm(v: np.ndarray, norm_choice: str, w: np.ndarray) -> float:
    if norm_choice == "sup":
        return float(np.max(np.abs(v)))
    return weighted_l2(v, w)


class _Replicates:
    """Draws replicate statistics for one sample size; one derived seed per replicate."""

    def __init__(self, E: np.ndarray, measure: ProbabilityMeasure, mode: str, base: Optional[np.ndarray] = None):
        self.E = E
        self.measure = measure
        self.mode = mode
        self.base = base
        self.m = measure.weights @ E

    def draw(self, n: int, seed: int) -> Tuple[np.ndarray, Optional[bool], np.ndarray]:
        indices = sample_iid(self.measure, n, seed).indices
        root_n = math.sqrt(n)
        if self.mode == "scaled_sum":
            coeffs = empirical_coefficients(indices, self.E.shape[0])
            return root_n * (coeffs @ self.E - self.m), None, indices
        if self.mode == "frechet_mean":
            coeffs, values = empirical_hull_mean(self.E, indices)
            z = root_n * (values - self.m)
            same = bool(np.array_equal(z, root_n * (empirical_coefficients(indices, self.E.shape[0]) @ self.E - self.m)))
            return z, same, indices
        # transport: average in the base embedding, then carry the hull coefficients across
        coeffs, _ = empirical_hull_mean(self.base, indices)
        return root_n * (coeffs @ self.E - self.m), None, indices


def _oracle_gap(E: np.ndarray, indices: np.ndarray, w: np.ndarray, seed: int) -> float:
    """Objective of the coordinate mean minus the best objective the hull search finds."""
    X = E[indices]
    value = batch_objective(X, empirical_coefficients(indices, E.shape[0]) @ E, w)
    _, oracle_value = hull_oracle_matrix(E, X, w, seed=seed)
    return value - oracle_value


def _draw_all(reps: _Replicates, n: int, seeds: Sequence[int], workers: int):
    if workers <= 1:
        return [reps.draw(n, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: reps.draw(n, s), seeds))


def _summarize(
    n: int, Z: np.ndarray, cov: np.ndarray, A: np.ndarray, config: CltConfig, w: np.ndarray
) -> CltSizeSummary:
    R = Z.shape[0]
    emp = Z.T @ Z / R
    emp = (emp + emp.T) / 2.0
    frob = float(np.linalg.norm(emp - cov))
    cov_norm = float(np.linalg.norm(cov))
    if cov_norm > 0.0:
        rel = frob / cov_norm
    else:
        rel = 0.0 if frob == 0.0 else math.inf

    trace = float(np.trace(cov))
    floor = VARIANCE_FLOOR * max(trace, 0.0)
    projected = Z @ A.T
    p_values: List[Optional[float]] = []
    ks_values: List[Optional[float]] = []
    for j, a in enumerate(A):
        var = float(a @ cov @ a)
        if var <= floor:
            p_values.append(None)
            ks_values.append(None)
            continue
        p_values.append(anderson_darling_test(projected[:, j], var))
        ks_values.append(ks_test(projected[:, j], var))
    tested = [p for p in p_values if p is not None]
    passing = sum(p >= config.level for p in tested) / len(tested) if tested else None

    zbar = Z.mean(axis=0)
    mean_norm = _norm(zbar, config.norm_choice, w)
    if config.norm_choice == "sup":
        threshold = 3.0 * math.sqrt(max(trace, 0.0) / R)
    else:
        threshold = 3.0 * math.sqrt(max(float(np.diag(cov) @ w), 0.0) / R)
    return CltSizeSummary(
        n=n,
        empirical_covariance=emp,
        frobenius_error=frob,
        relative_frobenius_error=rel,
        min_eigenvalue=float(np.linalg.eigvalsh(emp)[0]),
        p_values=p_values,
        ks_p_values=ks_values,
        tested_projections=len(tested),
        skipped_projections=len(p_values) - len(tested),
        fraction_passing=passing,
        mean_norm=mean_norm,
        centering_threshold=threshold,
        centered_ok=mean_norm <= threshold,
        average_statistic_norm=float(np.mean([_norm(z, config.norm_choice, w) for z in Z])),
    )


INTERPRETATIONS = {
    "scaled_sum": "Z = sqrt(n) (sample mean - m) of the embedded samples",
    "frechet_mean": (
        "Z = sqrt(n) (S_n - m) with S_n the hull Frechet mean; an argmin is unchanged by a 1/sqrt(n) "
        "prefactor, so the uncentered reading would be S_n itself and degenerate"
    ),
    "transport": (
        "Z = sqrt(n) (T(S_n) - m) with S_n averaged in the d-embedding and T carrying hull coefficients "
        "to the d_eta-embedding"
    ),
}
NORM_READINGS = {
    "sup": "read in C(K) with the sup norm",
    "l2": "read in L2(K, eta)",
}


def _run(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    config: CltConfig,
    mode: str,
    modified: Optional[ModifiedMetricSpace] = None,
) -> CltReport:
    E, _ = _embedded(space, measure, config.metric_choice, modified)
    w = measure.weights
    cov = _covariance(E, w)
    A = projection_matrix(space.n, config.n_projections, config.seed)
    reps = _Replicates(E, measure, mode, base=space.dist)

    per_n: List[CltSizeSummary] = []
    gaps: List[float] = []
    identical: List[bool] = []
    oracle_gaps: List[float] = []
    for n in config.n_list:
        seeds = spawn_seeds(config.seed, config.replicates, stream=n)
        draws = _draw_all(reps, n, seeds, config.workers)
        Z = np.vstack([d[0] for d in draws])
        identical.extend(d[1] for d in draws if d[1] is not None)
        if mode == "frechet_mean":
            for _, _, indices in draws[: config.oracle_replicates]:
                gap = _oracle_gap(E, indices, w, config.seed)
                gaps.append(abs(gap))
                oracle_gaps.append(gap)
        summary = _summarize(n, Z, cov, A, config, w)
        logger.info(
            "clt n=%d: rel frobenius %.4f, passing %s, centered %s",
            n,
            summary.relative_frobenius_error,
            summary.fraction_passing,
            summary.centered_ok,
        )
        per_n.append(summary)

    return CltReport(
        config=config,
        exact_covariance=cov,
        per_n=per_n,
        frechet_equals_mean_max_gap=max(gaps) if gaps else None,
        scaled_sum_identical=all(identical) if identical else None,
        oracle_max_gap=max(oracle_gaps) if oracle_gaps else None,
        interpretation=f"{INTERPRETATIONS[mode]}, {NORM_READINGS[config.norm_choice]}; "
        "projection agreement is empirical indistinguishability only",
    )


def run_clt_experiment(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    config: CltConfig,
    modified: Optional[ModifiedMetricSpace] = None,
) -> CltReport:
    if config.statistic == "frechet_mean":
        return run_frechet_clt_experiment(space, measure, config, modified)
    return _run(space, measure, config, "scaled_sum", modified)


def run_frechet_clt_experiment(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    config: CltConfig,
    modified: Optional[ModifiedMetricSpace] = None,
) -> CltReport:
    """Same replicates as run_clt_experiment, with the statistic formed from hull Frechet means.

    For the first oracle_replicates replicates per sample size the hull mean
    objective is compared with an independent projected-gradient minimizer;
    frechet_equals_mean_max_gap is the largest absolute objective difference.
    Also records whether Z matched the scaled sum exactly.
    """
    if config.statistic != "frechet_mean":
        config = config.model_copy(update={"statistic": "frechet_mean"})
    return _run(space, measure, config, "frechet_mean", modified)


def run_sup_vs_l2_transport(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    config: CltConfig,
    modified: Optional[ModifiedMetricSpace] = None,
) -> TransportReport:
    """Carry the d-embedding to the d_eta-embedding and compare distances and statistics.

    For each generator pair the sup-distance of the d_eta rows, d_eta itself
    and the L2(eta) distance of the d rows must agree. The L2(eta) distance of
    the d_eta rows is compared with d and reported as claimed_isometry_gap.
    """
    mm = modified if modified is not None else build_d_eta(space, measure)
    if not mm.is_metric:
        raise HypothesisError(
            f"d_eta collapses {len(mm.collapsed_pairs)} pairs; transport needs every ball to have positive "
            "measure so that distinct points stay distinct"
        )
    E_eta = mm.dist_eta
    w = measure.weights
    transport_error = 0.0
    claimed_gap = 0.0
    pairs = 0
    for x in range(space.n):
        for y in range(x + 1, space.n):
            sup_eta = float(np.max(np.abs(E_eta[x] - E_eta[y])))
            l2_d = weighted_l2(space.dist[x] - space.dist[y], w)
            transport_error = max(transport_error, abs(sup_eta - E_eta[x, y]), abs(E_eta[x, y] - l2_d))
            claimed_gap = max(claimed_gap, abs(space.dist[x, y] - weighted_l2(E_eta[x] - E_eta[y], w)))
            pairs += 1

    eta_config = config.model_copy(update={"metric_choice": "d_eta", "statistic": "scaled_sum"})
    transported = _run(space, measure, eta_config, "transport", mm)
    direct = _run(space, measure, eta_config, "scaled_sum", mm)
    identical = all(
        np.array_equal(a.empirical_covariance, b.empirical_covariance)
        and a.p_values == b.p_values
        and a.mean_norm == b.mean_norm
        for a, b in zip(transported.per_n, direct.per_n)
    )
    logger.info("transport: max error %.3g over %d pairs, claimed isometry gap %.3g", transport_error, pairs, claimed_gap)
    return TransportReport(
        max_transport_error=transport_error,
        pairs_checked=pairs,
        claimed_isometry_gap=claimed_gap,
        statistic_report=transported,
        statistics_identical=identical,
    )


def covariance_error_ladder(
    space: FiniteMetricSpace,
    measure: ProbabilityMeasure,
    n: int,
    ladder: Sequence[int] = (100, 400, 1600, 6400),
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    metric_choice: str = "d",
) -> List[Tuple[int, float]]:
    """(replicates, relative Frobenius error averaged over the seed family) per rung."""
    E, _ = _embedded(space, measure, metric_choice, None)
    cov = _covariance(E, measure.weights)
    cov_norm = float(np.linalg.norm(cov))
    reps = _Replicates(E, measure, "scaled_sum")
    out = []
    for R in ladder:
        errors = []
        for s in seeds:
            Z = np.vstack([reps.draw(n, seed)[0] for seed in spawn_seeds(s, R, stream=n)])
            emp = Z.T @ Z / R
            errors.append(float(np.linalg.norm((emp + emp.T) / 2.0 - cov)) / cov_norm if cov_norm else 0.0)
        out.append((int(R), float(np.mean(errors))))
    return out
