"""
Command-line entry point.

    pam-evolution run --task nguyen5 --strategy pam_rt --seed 3 --out-dir runs/n5_s3
    pam-evolution aggregate runs/n5_s* --out-dir runs/n5_summary
    pam-evolution oracle-sweep --task nguyen12 --seeds 0 1 2 3 4 --out-dir runs/sweep
    pam-evolution hillclimb-check --surface --out-dir runs/hillclimb
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config.logging_config import setup_logging
from .config.settings import (
    ExperimentConfig,
    PredictorMode,
    RuntimeSettings,
    StrategyKind,
    TaskName,
    load_experiment_config,
    load_runtime_settings,
)
from .exceptions import PamEvolutionError
from .tools.run_store import RunStore
from .workflows.aggregate import aggregate, checkpoints_csv, thresholds_csv
from .workflows.experiments import (
    HILLCLIMB_ACCURACIES,
    HILLCLIMB_QS,
    ablate_predictor,
    ablation_csv,
    hill_climb_surface,
    hillclimb_check,
    hillclimb_csv,
    run_counterfactual,
    surface_csv,
    write_ablation,
)
from .workflows.runner import run
from .workflows.sweep import ORACLE_ACCURACIES, oracle_sweep, sweep_csv


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out-dir", type=str)
    parser.add_argument("--task", choices=[t.value for t in TaskName])
    parser.add_argument("--strategy", choices=[s.value for s in StrategyKind])
    parser.add_argument("--predictor", choices=[m.value for m in PredictorMode])
    parser.add_argument(
        "--oracle-accuracy", type=float,
        help="use a noisy oracle of this accuracy instead of the learned predictor",
    )
    parser.add_argument("--fec", action=argparse.BooleanOptionalAction, default=None,
                        help="functional-equivalence cache")
    parser.add_argument("--samples", type=int, help="total children to evaluate")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--max-attempts", type=int)


def build_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted-key config overrides from the experiment flags."""
    mode = args.predictor
    if args.oracle_accuracy is not None and mode is None:
        mode = PredictorMode.NOISY_ORACLE.value
    return {
        "seed": args.seed,
        "out_dir": args.out_dir,
        "task": args.task,
        "fec": args.fec,
        "total_samples": args.samples,
        "strategy.kind": args.strategy,
        "strategy.epsilon": args.epsilon,
        "strategy.max_attempts": args.max_attempts,
        "predictor.mode": mode,
        "predictor.accuracy": args.oracle_accuracy,
    }


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    return load_experiment_config(args.config, build_overrides(args))


def _cmd_run(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    summary = run(experiment_config(args), resume=args.resume)
    print(json.dumps(summary.summary, indent=2, sort_keys=True))
    return 0


def _cmd_aggregate(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    report = aggregate(args.run_dirs, args.checkpoints, args.thresholds)
    out_dir = args.out_dir or Path(args.run_dirs[0]).parent
    store = RunStore(out_dir)
    store.write_all_sync({
        "aggregate.csv": checkpoints_csv(report.checkpoints),
        "thresholds.csv": thresholds_csv(report.thresholds),
    })
    print(checkpoints_csv(report.checkpoints), end="")
    return 0


def _cmd_ablate(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    config = experiment_config(args)
    report = ablate_predictor(
        config,
        dataset_size=args.dataset_size,
        epochs=args.epochs,
        training_seeds=args.training_seeds,
        layers=args.layers or (),
    )
    write_ablation(report, config.out_dir)
    print(ablation_csv(report.rows), end="")
    return 0


def _cmd_sweep(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    rows = oracle_sweep(
        experiment_config(args),
        accuracies=args.accuracies,
        seeds=args.seeds,
        baseline=args.baseline,
        max_parallel=args.max_parallel or settings.max_parallel_runs,
    )
    print(sweep_csv(rows), end="")
    return 0


def _cmd_hillclimb(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    rows = hillclimb_check(args.qs, args.accuracies, args.max_attempts, args.trials, args.seed)
    artifacts = {"hillclimb.csv": hillclimb_csv(rows)}
    if args.surface:
        artifacts["surface.csv"] = surface_csv(hill_climb_surface())
    out_dir = args.out_dir or settings.runs_dir / "hillclimb"
    RunStore(out_dir).write_all_sync(artifacts)
    print(artifacts["hillclimb.csv"], end="")
    return 0


def _cmd_counterfactual(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    report = run_counterfactual(experiment_config(args), args.fanout)
    print(json.dumps({
        "steps": len(report.records),
        "accuracy_at_half": report.accuracy_at_half,
        "base_positive_rate": report.base_positive_rate,
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pam-evolution",
        description="Predictor-guided regularized evolution for symbolic regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p)
    p.add_argument("--resume", action="store_true", help="continue from the run's checkpoint")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("aggregate", help="mean best fitness with +/-2 SE bands over runs")
    p.add_argument("run_dirs", nargs="+", type=Path)
    p.add_argument("--checkpoints", nargs="+", type=int)
    p.add_argument("--thresholds", nargs="+", type=float, default=[0.9])
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(handler=_cmd_aggregate)

    p = sub.add_parser("ablate-predictor", help="binary vs regression head accuracy")
    _add_experiment_flags(p)
    p.add_argument("--dataset-size", type=int, default=10_000)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--training-seeds", type=int, default=3)
    p.add_argument("--layers", nargs="+", type=int, help="extra encoder depths for the binary head")
    p.set_defaults(handler=_cmd_ablate)

    p = sub.add_parser("oracle-sweep", help="noisy-oracle accuracy sweep")
    _add_experiment_flags(p)
    p.add_argument("--accuracies", nargs="+", type=float, default=list(ORACLE_ACCURACIES))
    p.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2, 3, 4])
    p.add_argument("--baseline", action=argparse.BooleanOptionalAction, default=True,
                   help="include vanilla evolution")
    p.add_argument("--max-parallel", type=int)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("hillclimb-check", help="closed-form vs Monte Carlo hill-climb rate")
    p.add_argument("--qs", nargs="+", type=float, default=list(HILLCLIMB_QS))
    p.add_argument("--accuracies", nargs="+", type=float, default=list(HILLCLIMB_ACCURACIES))
    p.add_argument("--max-attempts", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--surface", action="store_true", help="also write the dense closed-form surface")
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(handler=_cmd_hillclimb)

    p = sub.add_parser("counterfactual", help="score extra children of every parent against it")
    _add_experiment_flags(p)
    p.add_argument("--fanout", type=int, default=64)
    p.set_defaults(handler=_cmd_counterfactual)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_runtime_settings()
        setup_logging(settings.log_level, settings.log_file, settings.debug_mode, settings.json_logs)
        return args.handler(args, settings)
    except PamEvolutionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
