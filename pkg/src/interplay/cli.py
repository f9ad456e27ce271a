"""Command-line entry point.

Exit codes: 0 success, 1 internal failure, 2 bad input or configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harness, reports
from .cache import ConfigError
from .config import ConfigFileError, RunConfig, default_workers, load_config, parse_float_list
from .configspace import WayConfig, training_set
from .predictor import DataError, PredictorMode
from .simulator import STATS_COLUMNS, simulate
from .trace import TraceParseError, WorkloadSpecError

log = logging.getLogger("interplay")

INPUT_ERRORS = (ConfigError, DataError, TraceParseError, WorkloadSpecError, FileNotFoundError)


def _load(args) -> RunConfig:
    cfg = load_config(args.config, seed=args.seed)
    if getattr(args, "pd_threshold", None) is not None:
        cfg.pd_threshold = args.pd_threshold
    if getattr(args, "error_thresholds", None) is not None:
        cfg.error_thresholds = parse_float_list(args.error_thresholds)
    if getattr(args, "predictor_mode", None) is not None:
        cfg.mode = PredictorMode(args.predictor_mode)
    cfg.workers = args.workers if args.workers is not None else default_workers(cfg.workers)
    return cfg.check()


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.out) if args.out else cfg.out


def cmd_gen(args) -> int:
    cfg = _load(args)
    out = Path(args.out) if args.out else cfg.out / "traces"
    generated = [w for w in cfg.workloads if w.spec is not None]
    if not generated:
        raise ConfigFileError("no generated workloads in config")
    out.mkdir(parents=True, exist_ok=True)
    for w in generated:
        path = out / f"{w.name}.trace"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            n = w.load().dump(fh)
        print(f"{w.name}: {n} records -> {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    results = []
    for w in cfg.workloads:
        trace = w.load()
        if args.mode == "training":
            r = harness.run_training_sweep(trace, cfg.params, workload=w.name, workers=cfg.workers)
        else:
            r = harness.run_exhaustive_sweep(trace, cfg.params, workload=w.name, workers=cfg.workers)
        results.append(r)
        print(f"{w.name}: {r.simulation_count} simulations in {r.wall_seconds:.3f} s")
    reports.write_stats_csv(out / "stats.csv", results)
    reports.write_json(
        out / "summary.json",
        {
            "sweep": {
                "mode": args.mode,
                "space": list(cfg.space.ways),
                "simulations": {r.workload: r.simulation_count for r in results},
                "total_simulations": sum(r.simulation_count for r in results),
                "wall_seconds": {r.workload: r.wall_seconds for r in results},
                "total_wall_seconds": sum(r.wall_seconds for r in results),
                "workers": cfg.workers,
            }
        },
    )
    print(f"wrote {out / 'stats.csv'}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    w = cfg.workload(args.workload)
    way_cfg = WayConfig.parse(args.cfg) if args.cfg else cfg.params.baseline()
    stats = simulate(w.load(), cfg.params, way_cfg)
    print(",".join(STATS_COLUMNS))
    print(",".join(str(v) for v in stats.to_row(way_cfg.label)))
    return 0


def cmd_predict(args) -> int:
    cfg = _load(args)
    space = cfg.space
    stats = reports.read_stats_csv(args.stats)
    preds = {}
    for name, result in stats.items():
        for c in training_set(space):
            if c.label not in result.stats:
                raise DataError(f"workload {name!r}: stats are missing training configuration {c.label}")
        preds[name] = harness.predict_all(space, result, cfg.mode, include_training=args.include_training)
    out = _out_dir(args, cfg)
    reports.write_predictions_csv(out / "predictions.csv", preds)
    total = sum(len(p) for p in preds.values())
    print(f"{total} predictions ({cfg.mode.value}) -> {out / 'predictions.csv'}")
    return 0


def _validate_artifacts(cfg: RunConfig, args, predictions, oracle, out: Path) -> tuple[harness.ValidationReport, dict]:
    report = harness.validate(predictions, oracle, cfg.error_thresholds)
    baseline = cfg.params.baseline().label
    training = reports.read_stats_csv(args.training) if getattr(args, "training", None) else oracle
    oracle_policy = harness.policy_analysis(harness.oracle_cpis(oracle), cfg.pd_threshold, baseline)
    model_policy = harness.policy_analysis(harness.model_cpis(training, predictions), cfg.pd_threshold, baseline)
    reports.write_pd_plotdata(out / "plotdata_pd.csv", oracle_policy, model_policy)
    reports.write_scatter_plotdata(out / "plotdata_scatter.csv", report)
    reports.write_l2_plotdata(out / "plotdata_l2.csv", report)
    space = cfg.space
    policy = {
        "oracle": oracle_policy.to_dict(),
        "model": model_policy.to_dict(),
        "agreement": sorted(oracle_policy.flagged) == sorted(model_policy.flagged),
    }
    counts = {
        "workloads": len(predictions),
        "training_per_workload": space.training_count,
        "exhaustive_per_workload": space.full_count,
        "count_ratio": harness.count_ratio(space),
    }
    return report, {"validation": report.to_dict(), "policy": policy, "simulation_counts": counts}


def cmd_validate(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    predictions = reports.read_predictions_csv(args.predictions)
    oracle = reports.read_stats_csv(args.oracle)
    report, summary = _validate_artifacts(cfg, args, predictions, oracle, out)
    modes = sorted({p.mode.value for ps in predictions.values() for p in ps})
    summary["mode"] = modes[0] if len(modes) == 1 else modes
    if args.training_summary and args.oracle_summary:
        t = reports.read_json(args.training_summary)["sweep"]["total_wall_seconds"]
        o = reports.read_json(args.oracle_summary)["sweep"]["total_wall_seconds"]
        summary["timing"] = {"training_seconds": t, "exhaustive_seconds": o, "wall_clock_ratio": o / t if t else None}
    reports.write_predictions_csv(out / "predictions.csv", predictions, report)
    reports.write_json(out / "summary.json", summary)

    s = report.summary
    print(f"rows: {len(report.rows)}  clamped: {s['clamp_count']}")
    for t in report.thresholds:
        key = f"{t:g}"
        print(f"accuracy@{key}%: {s['accuracy_pct'][key]:.1f}%  (linear only: {report.linear_summary['accuracy_pct'][key]:.1f}%)")
    print(f"mean |error|: {s['mean_abs_error_pct']:.3f}%  max |error|: {s['max_abs_error_pct']:.3f}%")
    p = summary["policy"]
    print(
        f"flagged at PD>{cfg.pd_threshold:g}%: oracle {p['oracle']['flagged_count']}/{p['oracle']['configs']}, "
        f"model {p['model']['flagged_count']}/{p['model']['configs']}"
    )
    return 0


def cmd_report(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    predictions = reports.read_predictions_csv(args.predictions)
    oracle = reports.read_stats_csv(args.oracle)
    _validate_artifacts(cfg, args, predictions, oracle, out)
    print(f"plot data -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI run configuration")
    common.add_argument("--out", help="output directory (default: [run] out)")
    common.add_argument("--workers", type=int, help="parallel simulations (default: $INTERPLAY_WORKERS or [run] workers)")
    common.add_argument("--seed", type=int, help="override [run] seed")

    thresholds = argparse.ArgumentParser(add_help=False)
    thresholds.add_argument("--pd-threshold", type=float, help="performance-degradation flag threshold, percent")
    thresholds.add_argument("--error-thresholds", help="comma-separated error thresholds, percent (e.g. 5,2,1)")

    mode = argparse.ArgumentParser(add_help=False)
    mode.add_argument("--mode", dest="predictor_mode", choices=[m.value for m in PredictorMode],
                      help="predictor arithmetic (default: [run] mode)")

    p = argparse.ArgumentParser(prog="interplay", description="Way-disabling CPI prediction and validation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="write synthetic traces for generated workloads")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("sweep", parents=[common], help="simulate the training set or the whole space")
    s.add_argument("--mode", choices=["training", "exhaustive"], default="training")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("simulate", parents=[common], help="simulate one configuration, print one stats row")
    s.add_argument("--workload", help="workload name (default: first)")
    s.add_argument("--cfg", help="configuration label L2_DL1_IL1 (default: baseline)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("predict", parents=[common, mode], help="predict CPI from training stats")
    s.add_argument("--stats", required=True, help="stats.csv covering the training set")
    s.add_argument("--include-training", action="store_true", help="also predict training configurations")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("validate", parents=[common, thresholds], help="compare predictions with exhaustive stats")
    s.add_argument("--predictions", required=True)
    s.add_argument("--oracle", required=True, help="exhaustive stats.csv")
    s.add_argument("--training", help="training stats.csv (default: taken from the oracle)")
    s.add_argument("--training-summary", help="summary.json of the training sweep, for wall-clock ratio")
    s.add_argument("--oracle-summary", help="summary.json of the exhaustive sweep, for wall-clock ratio")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("report", parents=[common, thresholds], help="regenerate plot data from existing CSVs")
    s.add_argument("--predictions", required=True)
    s.add_argument("--oracle", required=True)
    s.add_argument("--training")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        log.exception("internal failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
