"""
Command-line front end.

Results are printed to stdout as JSON, each with the resolved run config
echoed under "config"; logs go to stderr. Exit codes: 0 success, 1 usage
error, 2 estimator error, 3 moment-operator size cap exceeded.
"""
import yaml

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List

from .estimators.base import EstimatorError
from .log_handler import LogHandler
from .quantum import MomentCapError
from .runtime import RuntimeContext, env_seed, load_config_file
from .utils import split_list_parameter
from .validation import EnsembleSpec, NoiseConfig, RunConfig
from .workflow import CommandWorkflow

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ESTIMATOR = 2
EXIT_MOMENT_CAP = 3

GEN_PARAMS = ["n", "d", "s", "theta", "table", "base", "eps_b", "members_per_center"]

class UsageError(ValueError):
    pass

class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)

def parse_metric(metric: str, k: int | None) -> tuple[str, int | None]:
    """Accept 'mmd-2' as shorthand for metric 'mmd' with k=2."""
    head, _, tail = metric.rpartition("-")
    if head and tail.isdigit():
        if k is not None and k != int(tail):
            raise UsageError(f"Metric {metric!r} conflicts with --k {k}")
        return head, int(tail)
    return metric, k

def parse_key_values(items: List[str] | None) -> Dict[str, Any]:
    """key=value pairs; values are parsed as YAML scalars or lists."""
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"Expected key=value. Got {item!r}")
        params[key.strip().replace("-", "_")] = yaml.safe_load(value)
    return params

def parse_int_list(values: List[str] | None) -> List[int]:
    try:
        return [int(v) for v in split_list_parameter(values) or []]
    except ValueError as e:
        raise UsageError(f"Expected integers. Got {values}") from e

def _noise(args) -> NoiseConfig | None:
    if args.eps_b is None and args.lambda_b is None:
        return None
    return NoiseConfig(model=args.noise_model, eps_b=args.eps_b or 0.0, lambda_b=args.lambda_b or 0.0)

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmetric", description="Distances between quantum state ensembles and their sample complexity.")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging.")
    parser.add_argument("--app-config", help="Application config YAML (default: $QMETRIC_CONFIG or config/config.yaml).")
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Generate an ensemble file.")
    gen.add_argument("generator", help="Registered generator name.")
    gen.add_argument("--n", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--s", type=float)
    gen.add_argument("--theta", type=float)
    gen.add_argument("--weights", nargs="+", help="Basis weights, space or comma separated.")
    gen.add_argument("--table", help="Fidelity table CSV (fidelity-table generator).")
    gen.add_argument("--base", help="Base generator of eps-ball.")
    gen.add_argument("--eps-b", type=float)
    gen.add_argument("--members-per-center", type=int)
    gen.add_argument("--param", action="append", help="Extra generator parameter key=value.")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--output", "-o", required=True)

    dist = subparsers.add_parser("dist", help="Exact distance between two ensemble files.")
    dist.add_argument("first")
    dist.add_argument("second")
    dist.add_argument("--metric", required=True, help="mmd (with --k), mmd-<k>, or wasserstein.")
    dist.add_argument("--k", type=int)
    dist.add_argument("--cross-check", action="store_true", help="Also compute MMD through moment operators.")

    estimate = subparsers.add_parser("estimate", help="Estimate a distance from simulated SWAP-test samples.")
    estimate.add_argument("first")
    estimate.add_argument("second")
    estimate.add_argument("--metric", required=True, help="Registered estimator id, e.g. mmd, wasserstein.")
    estimate.add_argument("--k", type=int)
    estimate.add_argument("--budget", "-M", type=int, default=0)
    estimate.add_argument("--seed", type=int)
    estimate.add_argument("--noise-model", choices=["eps-ball", "depolarizing"], default="eps-ball")
    estimate.add_argument("--eps-b", type=float)
    estimate.add_argument("--lambda-b", type=float)
    estimate.add_argument("--option", action="append", help="Extra estimator option key=value.")
    estimate.add_argument("--output-dir", default="output")
    estimate.add_argument("--replay", help="Estimate from a saved sample CSV instead of sampling.")

    sweep = subparsers.add_parser("sweep", help="Minimal sample budgets over N and their log-log slope.")
    sweep.add_argument("--config", help="Sweep config YAML.")
    sweep.add_argument("--metric")
    sweep.add_argument("--k", type=int)
    sweep.add_argument("--generator", action="append", help="Generator name; give one pair generator or two.")
    sweep.add_argument("--n-values", nargs="+")
    sweep.add_argument("--epsilon", type=float)
    sweep.add_argument("--delta", type=float)
    sweep.add_argument("--repetitions", "-K", type=int)
    sweep.add_argument("--trials", "-T", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--output-dir")

    bounds = subparsers.add_parser("bounds", help="Analytic sample bounds side by side.")
    bounds.add_argument("--n-values", "--n", nargs="+", required=True)
    bounds.add_argument("--k", type=int, required=True)
    bounds.add_argument("--epsilon", type=float, default=0.1)
    bounds.add_argument("--delta", type=float, default=1.0 / 3.0)
    bounds.add_argument("--output", "-o", help="Also write the table as CSV.")

    hard = subparsers.add_parser("hard", help="MMD-k across k on the phase hard instance.")
    hard.add_argument("--n", type=int, required=True)
    hard.add_argument("--eta", type=float, help="Also report the order-N moment-matched pair with this amplitude.")
    hard.add_argument("--alpha", type=float, default=0.5)
    return parser

def resolve_sweep(args) -> RunConfig:
    """Flags over the sweep file; ComplexityConfig defaults fill the rest later."""
    values: Dict[str, Any] = load_config_file(args.config) if args.config else {}
    values["command"] = "sweep"
    overrides = {
        "metric": args.metric,
        "k": args.k,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "repetitions": args.repetitions,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "output_dir": args.output_dir,
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    if args.n_values:
        values["n_values"] = parse_int_list(args.n_values)
    if args.generator:
        values["ensembles"] = [{"generator": name} for name in args.generator]
    values.setdefault("seed", env_seed())
    if values.get("metric"):
        values["metric"], values["k"] = parse_metric(values["metric"], values.get("k"))
    return RunConfig(**values)

def _emit(config: RunConfig, result: Any):
    json.dump({"config": config.model_dump(), "result": result}, sys.stdout, indent=2)
    sys.stdout.write("\n")

def run_command(args, workflow: CommandWorkflow) -> int:
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = env_seed()

    if args.command == "gen":
        params = {name: getattr(args, name) for name in GEN_PARAMS if getattr(args, name) is not None}
        if args.weights:
            params["weights"] = [float(w) for w in split_list_parameter(args.weights)]
        if args.table is not None:
            params["path"] = params.pop("table")
        params.update(parse_key_values(args.param))
        spec = EnsembleSpec(generator=args.generator, params=params)
        run = RunConfig(command="gen", ensembles=[spec], seed=seed, output_dir=str(Path(args.output).parent))
        _emit(run, workflow.run_gen(spec, seed, args.output))

    elif args.command == "dist":
        metric, k = parse_metric(args.metric, args.k)
        first, second = workflow.load_pair(args.first, args.second)
        report = workflow.run_dist(first, second, metric, k, cross_check=args.cross_check)
        run = RunConfig(
            command="dist",
            metric=metric,
            k=k,
            ensembles=[EnsembleSpec(path=args.first), EnsembleSpec(path=args.second)],
            seed=seed,
            options={"cross_check": args.cross_check},
        )
        _emit(run, report.model_dump())

    elif args.command == "estimate":
        metric, k = parse_metric(args.metric, args.k)
        noise = _noise(args)
        options = parse_key_values(args.option)
        run = RunConfig(
            command="estimate",
            metric=metric,
            k=k,
            ensembles=[EnsembleSpec(path=args.first), EnsembleSpec(path=args.second)],
            budget=args.budget,
            noise=noise,
            seed=seed,
            output_dir=args.output_dir,
            options={**options, **({"replay": args.replay} if args.replay else {})},
        )
        first, second = workflow.load_pair(args.first, args.second)
        report, path = workflow.run_estimate(
            first, second, metric, k, args.budget, seed, args.output_dir,
            noise=noise, options=options, replay=args.replay,
        )
        _emit(run, {**report.model_dump(), "samples": None if path is None else str(path)})

    elif args.command == "sweep":
        run = resolve_sweep(args)
        curve = workflow.run_sweep_sync(run)
        _emit(run, curve.summary().model_dump())

    elif args.command == "bounds":
        n_values = parse_int_list(args.n_values)
        table = workflow.run_bounds(n_values, args.k, args.epsilon, args.delta, args.output)
        run = RunConfig(command="bounds", k=args.k, epsilon=args.epsilon, delta=args.delta, n_values=n_values, seed=seed)
        _emit(run, table.to_dict(orient="records"))

    elif args.command == "hard":
        result = workflow.run_hard(args.n, args.eta, args.alpha)
        run = RunConfig(command="hard", n_values=[args.n], seed=seed, options={"eta": args.eta, "alpha": args.alpha})
        _emit(run, result)

    return EXIT_OK

def main(argv: List[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE

    LogHandler.from_env().start_logger(verbose=args.verbose)
    logger.info(f"Running {args.command}")
    try:
        runtime = RuntimeContext.from_config_file(args.app_config) if args.app_config else RuntimeContext.from_env()
        code = run_command(args, CommandWorkflow(runtime))
    except MomentCapError as e:
        logger.error(str(e))
        return EXIT_MOMENT_CAP
    except EstimatorError as e:
        logger.error(str(e))
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return EXIT_ESTIMATOR
    except (ValueError, FileNotFoundError, yaml.YAMLError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    logger.info(f"Finished {args.command}")
    return code
