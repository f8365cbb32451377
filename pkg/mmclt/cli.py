import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analyzer import clt_harness, embedding, entropy, frechet, lp_compare, metric_core, modified_metric
from .analyzer.measure import load_measure, require_ball_positivity, uniform_measure
from .analyzer.settings import Settings, load_settings
from .errors import HypothesisError, MetricAxiomError
from .models import CltConfig, FiniteMetricSpace, ProbabilityMeasure, RunConfig
from .reporter.csv_out import (
    ASSUMPTION_HEADER,
    CSV_COLUMNS_HELP,
    ENTROPY_HEADER,
    FRECHET_HEADER,
    PROJECTION_HEADER,
    SANDWICH_HEADER,
    VALIDATION_HEADER,
    render_csv,
    write_csv,
)
from .reporter.json_out import dumps, envelope
from .reporter.md_report import write_cone_demo_markdown
from .utils.io import atomic_write_text, load_matrix, sha256_file
from .utils.log import logger, setup_logging

try:
    from rich.console import Console
    from rich.table import Table
    _HAS_RICH = True
except Exception:
    Console = None
    Table = None
    _HAS_RICH = False

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

CsvTable = Tuple[Optional[List[str]], List[Sequence[Any]]]


class Outcome:
    """What a subcommand hands back for emission."""

    def __init__(self, result: Dict[str, Any], code: int = EXIT_OK, table: Optional[CsvTable] = None):
        self.result = result
        self.code = code
        self.table = table


def _summary(title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    if not _HAS_RICH:
        for row in rows:
            logger.info("%s: %s", title, dict(zip(columns, row)))
        return
    table = Table(title=title)
    for c in columns:
        table.add_column(c)
    for row in rows:
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    Console(stderr=True).print(table)


def _load_space(args, settings: Settings) -> FiniteMetricSpace:
    logger.info("Loading space: %s", str(args.input))
    return metric_core.load_space(args.input, settings.tolerances.metric)


def _load_measure(args, space: FiniteMetricSpace) -> ProbabilityMeasure:
    if getattr(args, "measure", None) is None:
        return uniform_measure(space)
    logger.info("Loading measure: %s", str(args.measure))
    return load_measure(space, args.measure)


# ---------------------------------------------------------------- subcommands


def cmd_validate(args, settings: Settings) -> Outcome:
    dist, _ = load_matrix(args.input)
    report = metric_core.validate_metric(dist, settings.tolerances.metric)
    if not report.ok:
        logger.error(
            "not a metric: symmetric=%s identity_ok=%s, %d triangle violations, first %s",
            report.symmetric,
            report.identity_ok,
            len(report.triangle_violations),
            report.triangle_violations[:3],
        )
    _summary(
        "validate",
        ["n", "symmetric", "identity_ok", "violations", "max_excess"],
        [[report.n, report.symmetric, report.identity_ok, len(report.triangle_violations), report.max_excess]],
    )
    result = {"ok": report.ok, "report": report}
    return Outcome(result, EXIT_OK if report.ok else EXIT_FAILED, (VALIDATION_HEADER, report.triangle_violations))


def cmd_embed(args, settings: Settings) -> Outcome:
    space = _load_space(args, settings)
    measure = _load_measure(args, space)
    lips = [embedding.lipschitz_constant(embedding.embed_point(space, i), space) for i in range(space.n)]
    hull = frechet.hull_population_mean(space, measure)
    tol = settings.tolerances.metric
    two = embedding.two_diameter_check(space, hull, slack=tol + 1e-12)
    iso = embedding.isometry_error(space)
    result = {
        "n": space.n,
        "diameter": metric_core.diameter(space),
        "isometry_error": iso,
        "lipschitz_constants": lips,
        "max_lipschitz": max(lips),
        "two_diameter": two,
        "hull_cache_error": embedding.hull_cache_error(space, hull),
    }
    # a triangle excess of tol moves distance rows by tol and slopes by tol over the shortest pair
    positive = space.dist[space.dist > 0.0]
    shortest = float(positive.min()) if positive.size else 1.0
    ok = iso <= tol + 1e-12 and max(lips) <= 1.0 + 1e-12 + tol / shortest and two.ok
    _summary(
        "embed",
        ["n", "isometry_error", "max_lipschitz", "dist_to_image", "2*diameter"],
        [[space.n, iso, max(lips), two.dist_to_image, two.bound]],
    )
    return Outcome(result, EXIT_OK if ok else EXIT_FAILED, (None, embedding.embedding_matrix(space).tolist()))


def cmd_entropy(args, settings: Settings) -> Outcome:
    space = _load_space(args, settings)
    cfg = settings.entropy
    grid = entropy.default_entropy_grid(space, args.cells or cfg.grid_cells)
    curve = entropy.entropy_integral(space, grid)
    check = entropy.dyadic_cover_check(space, cfg.dyadic_k_max)
    series = entropy.dyadic_bound_partial_sums(check.N, check.M, cfg.series_k_max)
    exact = None
    if args.exact:
        exact = [
            entropy.covering_number_exact(space, row.eps, cfg.exact_max_n).model_dump() for row in check.rows
        ]
    logger.info("entropy integral estimate %.6g, resolution-floor remainder %.6g", curve.integral_estimate,
                curve.floor_remainder)
    _summary(
        "entropy",
        ["integral_estimate", "floor_remainder", "floor_eps", "cutoff_eps", "N", "M"],
        [[curve.integral_estimate, curve.floor_remainder, curve.floor_eps, curve.cutoff_eps, check.N, check.M]],
    )
    result = {
        "curve": curve.model_dump(exclude={"covers"}),
        "total": curve.total,
        "doubling": {"N": check.N, "M": check.M, "scale": check.scale},
        "dyadic_check": check,
        "dyadic_series": series,
        "exact_covers": exact,
    }
    return Outcome(result, EXIT_OK if check.ok else EXIT_FAILED, (ENTROPY_HEADER, entropy.curve_rows(curve)))


def cmd_frechet(args, settings: Settings) -> Outcome:
    space = _load_space(args, settings)
    measure = _load_measure(args, space)
    tol = settings.tolerances.tie
    mm = modified_metric.build_d_eta(space, measure) if args.metric == "d_eta" else None
    res = frechet.population_frechet_mean(space, measure, args.metric, tol, modified=mm)
    hull = frechet.hull_population_mean(space, measure)
    grad = frechet.center_of_mass_gradient_check(
        space, measure, probes=settings.frechet.gradient_probes, seed=args.seed
    )
    closest = frechet.closest_point_to_hull_mean(space, measure, tol, modified=mm)
    logger.info("Frechet minimizers %s (min value %.12g)", res.minimizers, res.min_value)
    _summary(
        "frechet",
        ["minimizers", "labels", "min_value", "unique"],
        [[res.minimizers, [space.label(i) for i in res.minimizers], res.min_value, res.unique]],
    )
    result = {
        "metric_choice": args.metric,
        "minimizers": res.minimizers,
        "labels": [space.label(i) for i in res.minimizers],
        "min_value": res.min_value,
        "unique": res.unique,
        "values": res.values if args.with_values else None,
        "two_diameter": embedding.two_diameter_check(space, hull),
        "gradient_check": grad,
        "closest_point": closest.model_dump(),
    }
    mins = set(res.minimizers)
    rows = [(i, space.label(i), float(v), i in mins) for i, v in enumerate(res.values)]
    return Outcome(result, EXIT_OK, (FRECHET_HEADER, rows))


def _parse_floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    return [float(t) for t in text.split(",") if t.strip()]


def cmd_lp_check(args, settings: Settings) -> Outcome:
    space = _load_space(args, settings)
    measure = _load_measure(args, space)
    d_grid = _parse_floats(args.d_grid) or settings.lp.d_grid
    estimates = lp_compare.estimate_assumption_constants(space, measure, d_grid)
    _summary(
        "assumption constants",
        ASSUMPTION_HEADER,
        [[e.D, e.C, *(e.worst_pair or (None, None)), e.holds, e.margin] for e in estimates],
    )
    holding = [e for e in estimates if e.holds]
    largest = lp_compare.largest_feasible_D(space, measure, settings.lp.c_max) if args.largest_d else None
    chosen = largest or (max(holding, key=lambda e: e.D) if holding else None)

    dp = {str(p): lp_compare.dp_matrix(space, measure, p) for p in (1.0, 2.0, float("inf"))}
    holder_excess = max(
        float(np.max(dp["1.0"] - dp["2.0"])), float(np.max(dp["2.0"] - dp["inf"])), 0.0
    )
    result: Dict[str, Any] = {
        "estimates": estimates,
        "largest_feasible": largest,
        "chosen": chosen,
        "holder_excess": holder_excess,
        "sandwich": [],
        "nesting": [],
    }
    if chosen is None:
        logger.error("the exceptional-set assumption fails for every D in %s", d_grid)
        return Outcome(result, EXIT_FAILED, (SANDWICH_HEADER, []))

    failed = holder_excess > 1e-12
    table_rows: List[Sequence[Any]] = []
    for p, q in settings.lp.p_pairs:
        report = lp_compare.check_sandwich(space, measure, p, q, chosen)
        failed = failed or not report.ok
        if not table_rows:
            table_rows = [(r.x, r.y, r.d_p, r.d_p_prime, r.lower_bound, r.slack) for r in report.rows]
        result["sandwich"].append(report.model_dump(exclude={"rows"}))
        nest = lp_compare.nesting_check(space, measure, chosen.D, p, q)
        result["nesting"].append({"p": p, "p_prime": q, "D": chosen.D, "violations": nest})
        _summary(
            f"sandwich p={p:g}, p'={q:g}",
            ["D", "C", "lower_constant", "violations", "nesting_findings"],
            [[chosen.D, chosen.C, report.lower_constant, len(report.violations), len(nest)]],
        )
    return Outcome(result, EXIT_FAILED if failed else EXIT_OK, (SANDWICH_HEADER, table_rows))


def _clt_config(args, settings: Settings) -> CltConfig:
    updates: Dict[str, Any] = {}
    for flag, field in (
        ("metric", "metric_choice"),
        ("norm", "norm_choice"),
        ("statistic", "statistic"),
        ("replicates", "replicates"),
        ("seed", "seed"),
        ("projections", "n_projections"),
        ("workers", "workers"),
        ("oracle_replicates", "oracle_replicates"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[field] = value
    if args.n_list:
        updates["n_list"] = [int(float(v)) for v in args.n_list.split(",") if v.strip()]
    return CltConfig.model_validate({**settings.clt.model_dump(), **updates})


def _projection_rows(report) -> List[Sequence[Any]]:
    rows = []
    for summary in report.per_n:
        for j, (p, ks) in enumerate(zip(summary.p_values, summary.ks_p_values)):
            rows.append((summary.n, j, p, ks))
    return rows


def _clt_failed(report, config: CltConfig) -> bool:
    for summary in report.per_n:
        if summary.fraction_passing is not None and summary.fraction_passing < config.pass_threshold:
            return True
    gap = report.frechet_equals_mean_max_gap
    return gap is not None and gap > 1e-8


def cmd_clt(args, settings: Settings) -> Outcome:
    space = _load_space(args, settings)
    measure = _load_measure(args, space)
    config = _clt_config(args, settings)
    if args.transport:
        require_ball_positivity(space, measure)
        transport = clt_harness.run_sup_vs_l2_transport(space, measure, config)
        report = transport.statistic_report
        result: Dict[str, Any] = {"transport": transport}
        failed = transport.max_transport_error > 1e-12 or not transport.statistics_identical
    else:
        report = clt_harness.run_clt_experiment(space, measure, config)
        result = {"report": report}
        failed = False
    failed = failed or _clt_failed(report, config)
    _summary(
        "clt",
        ["n", "rel_frobenius", "min_eigenvalue", "passing", "skipped", "centered"],
        [
            [s.n, s.relative_frobenius_error, s.min_eigenvalue, s.fraction_passing, s.skipped_projections,
             s.centered_ok]
            for s in report.per_n
        ],
    )
    return Outcome(result, EXIT_FAILED if failed else EXIT_OK, (PROJECTION_HEADER, _projection_rows(report)))


def cmd_cone_demo(args, settings: Settings) -> Outcome:
    demo = settings.cone_demo
    nu = args.nu or demo.nu
    nv = args.nv or demo.nv
    seed = demo.seed if args.seed is None else args.seed
    logger.info("Building cone grid %d x %d", nu, nv)
    space = metric_core.make_cone_space(nu, nv)
    measure = uniform_measure(space)
    tol = settings.tolerances.tie

    res = frechet.population_frechet_mean(space, measure, "d", tol)
    rotation = metric_core.cone_rotation(nu, nv, 1)
    rotated = sorted(int(rotation[i]) for i in res.minimizers)
    logger.info("Frechet minimizers: %d points (unique=%s)", len(res.minimizers), res.unique)

    mm = modified_metric.build_d_eta(space, measure)
    margin = modified_metric.injectivity_margin(mm)
    closest = frechet.closest_point_to_hull_mean(space, measure, tol, modified=mm)
    hull = frechet.hull_population_mean(space, measure)

    config = CltConfig(
        n_list=demo.clt_n_list,
        replicates=demo.clt_replicates,
        seed=seed,
        n_projections=settings.clt.n_projections,
        level=settings.clt.level,
    )
    clt = clt_harness.run_clt_experiment(space, measure, config)
    clt_rows = [
        {
            "n": s.n,
            "relative_frobenius_error": s.relative_frobenius_error,
            "fraction_passing": s.fraction_passing,
            "centered_ok": s.centered_ok,
        }
        for s in clt.per_n
    ]
    result = {
        "n_u": nu,
        "n_v": nv,
        "n_points": space.n,
        "seed": seed,
        "frechet": {
            "minimizers": res.minimizers,
            "labels": [space.label(i) for i in res.minimizers],
            "min_value": res.min_value,
            "unique": res.unique,
            "rotation_invariant": rotated == res.minimizers,
        },
        "collapsed_pairs": len(mm.collapsed_pairs),
        "injectivity": margin.model_dump(),
        "closest_point": closest.model_dump(),
        "two_diameter": embedding.two_diameter_check(space, hull),
        "clt": clt_rows,
    }
    _summary(
        "cone-demo",
        ["points", "minimizers", "rotation_invariant", "coincide", "d_eta_margin"],
        [[space.n, len(res.minimizers), rotated == res.minimizers, closest.coincide, margin.min_distance]],
    )
    if args.markdown:
        write_cone_demo_markdown(args.markdown, result)
    return Outcome(result, EXIT_OK)


COMMANDS = {
    "validate": cmd_validate,
    "embed": cmd_embed,
    "entropy": cmd_entropy,
    "frechet": cmd_frechet,
    "lp-check": cmd_lp_check,
    "clt": cmd_clt,
    "cone-demo": cmd_cone_demo,
}


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML settings file (defaults: config/defaults.yaml values)")
    common.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    common.add_argument("--out", type=Path, help="report path; stdout when omitted")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="report format")
    common.add_argument("--csv", type=Path, help="also write the subcommand's CSV table here")

    parser = argparse.ArgumentParser(prog="mmclt", epilog=CSV_COLUMNS_HELP)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_space(p, measure=True):
        p.add_argument("--input", required=True, type=Path, help="distance matrix (.csv or .json)")
        if measure:
            p.add_argument("--measure", type=Path, help="weights JSON {\"weights\": [...]}; uniform when omitted")
        return p

    with_space(sub.add_parser("validate", parents=[common], help="check the metric axioms"), measure=False)
    with_space(sub.add_parser("embed", parents=[common], help="Kuratowski embedding diagnostics"))

    ent = with_space(sub.add_parser("entropy", parents=[common], help="covering numbers and entropy integral"),
                     measure=False)
    ent.add_argument("--cells", type=int, help="grid cells between diameter and smallest distance")
    ent.add_argument("--exact", action="store_true", help="also run exact set cover at the dyadic radii")

    fr = with_space(sub.add_parser("frechet", parents=[common], help="Frechet means and the closest-point relation"))
    fr.add_argument("--metric", choices=["d", "d_eta"], default="d")
    fr.add_argument("--seed", type=int, default=0)
    fr.add_argument("--with-values", action="store_true", help="include the full Frechet value landscape")

    lp = with_space(sub.add_parser("lp-check", parents=[common], help="L^p equivalence constants and checks"))
    lp.add_argument("--d-grid", help="comma-separated D values in (0, 1)")
    lp.add_argument("--largest-d", action="store_true", help="bisect for the largest D with C(D) <= c_max")

    clt = with_space(sub.add_parser("clt", parents=[common], help="Monte Carlo CLT run"))
    clt.add_argument("--metric", choices=["d", "d_eta"])
    clt.add_argument("--norm", choices=["sup", "l2"])
    clt.add_argument("--statistic", choices=["scaled_sum", "frechet_mean"])
    clt.add_argument("--n-list", help="comma-separated increasing sample sizes")
    clt.add_argument("--replicates", type=int)
    clt.add_argument("--seed", type=int)
    clt.add_argument("--projections", type=int)
    clt.add_argument("--workers", type=int)
    clt.add_argument("--oracle-replicates", type=int,
                     help="frechet_mean replicates per size checked against the hull search")
    clt.add_argument("--transport", action="store_true", help="compare the d and d_eta embeddings")

    cone = sub.add_parser("cone-demo", parents=[common], help="end-to-end run on the cone grid")
    cone.add_argument("--nu", type=int)
    cone.add_argument("--nv", type=int)
    cone.add_argument("--seed", type=int)
    cone.add_argument("--markdown", type=Path, help="also write a Markdown summary")
    return parser


def _run_config(args, settings: Settings) -> RunConfig:
    inputs = [p for p in (getattr(args, "input", None), getattr(args, "measure", None), args.config) if p]
    seed = getattr(args, "seed", None)
    return RunConfig(
        subcommand=args.command,
        inputs=inputs,
        output=args.out,
        seed=seed if seed is not None else 0,
        tolerances=settings.tolerances.model_dump(),
        format=args.format,
    )


def emit_report(args, run_cfg: RunConfig, settings: Settings, outcome: Outcome) -> None:
    inputs = {str(p): sha256_file(p) for p in run_cfg.inputs}
    seed = outcome.result.get("seed", run_cfg.seed)
    env = envelope(args.command, {"run": run_cfg, "settings": settings}, seed, inputs, outcome.result)
    if args.format == "csv":
        if outcome.table is None:
            raise ValueError(f"{args.command} has no CSV output")
        header, rows = outcome.table
        text = render_csv(rows, header)
    else:
        text = dumps(env)
    if args.out:
        atomic_write_text(args.out, text)
        logger.info("Wrote %s", str(args.out))
    else:
        sys.stdout.write(text)
    if args.csv and outcome.table is not None:
        header, rows = outcome.table
        write_csv(args.csv, rows, header)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR

    setup_logging(args.log_level)
    try:
        settings = load_settings(args.config)
        run_cfg = _run_config(args, settings)
        outcome = COMMANDS[args.command](args, settings)
        emit_report(args, run_cfg, settings, outcome)
        return outcome.code
    except (MetricAxiomError, HypothesisError) as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
    except (OSError, ValueError, RuntimeError) as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
