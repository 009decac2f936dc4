"""
Command line interface for LayerAgg.

Every subcommand prints a JSON report to stdout (or ``--report``). Exit
codes: 0 on success, 1 for invalid input, 2 for runtime failures.
"""

import json
import sys
import time
import numpy as np

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Dict, List, NoReturn, Optional, Sequence

from data.synth import NuisanceScope, SynthSpec, SynthTask, bayes_accuracy, collision_ceiling, generate
from heads.head import HeadKind
from interfaces.core import backward, fit, forward
from interfaces.params import init_params
from interfaces.spec import InterfaceKind, InterfaceSpec, Normalization, hierconv_plan, output_dim, param_count
from interfaces.stack import LayerStack
from numerics.tensor import make_prng
from trainer.bundle import load_bundle, save_bundle
from trainer.experiment import DEFAULT_KINDS, ExperimentConfig, run_experiment
from trainer.gradcheck import gradcheck_suite
from trainer.optim import OptimizerKind
from trainer.training import TrainConfig, evaluate, train
from utils.errors import ConfigurationError, ExecutionError, ValidationError
from utils.logging_config import get_logger, init_logging
from utils.settings_manager import get_setting

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

INTERFACE_CHOICES = [kind.value for kind in InterfaceKind]


class UsageError(Exception):
    """Raised instead of exiting when argument parsing fails."""
    pass


class CliArgumentParser(ArgumentParser):
    """ArgumentParser that reports bad usage through an exception."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_interface_options(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--interface",
        type=str,
        required=True,
        choices=INTERFACE_CHOICES,
        help="Interface design"
    )
    parser.add_argument(
        "--groups",
        type=int,
        default=get_setting("group_count", 2),
        help="Group count for group-ws"
    )
    parser.add_argument(
        "--heads",
        type=int,
        default=get_setting("cls_heads", 4),
        help="Attention heads for cls-pool"
    )
    parser.add_argument(
        "--ffn",
        type=int,
        default=None,
        help="Feed-forward width for cls-pool (default 2048 at D=768, else round(8D/3))"
    )
    parser.add_argument(
        "--pca-k",
        type=int,
        default=None,
        help="Components per layer for pca-concat (default ceil(D/L))"
    )
    parser.add_argument(
        "--normalize",
        type=str,
        default=Normalization.SOFTMAX.value,
        choices=[n.value for n in Normalization],
        help="Layer-weight normalization for the weighted-sum kinds"
    )


def _add_report_option(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--report",
        type=str,
        default=None,
        help="Write the JSON report here instead of stdout"
    )


def _interface_spec(args: Namespace) -> InterfaceSpec:
    return InterfaceSpec(
        kind=InterfaceKind(args.interface),
        normalize=Normalization(args.normalize),
        num_groups=args.groups,
        heads=args.heads,
        ffn_dim=args.ffn,
        pca_k=args.pca_k,
    )


def create_argument_parser() -> ArgumentParser:
    """Create and configure argument parser for command line interface."""
    parser = CliArgumentParser(
        prog="layeragg",
        description="Layer aggregation interfaces over frozen upstream features"
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    synth = subparsers.add_parser("synth", help="Generate a synthetic dataset")
    synth.add_argument("--task", type=str, required=True, choices=["collision", "layer-select"], help="Synthetic task")
    synth.add_argument("--out", type=str, required=True, help="Output directory")
    synth.add_argument("--n", type=int, default=get_setting("synth_n", 2000), help="Utterance count")
    synth.add_argument("--layers", type=int, default=get_setting("synth_layers", 13), help="Layer count L")
    synth.add_argument("--dim", type=int, default=get_setting("synth_dim", 8), help="Feature dimension D")
    synth.add_argument("--frames", type=int, default=get_setting("synth_frames", 20), help="Frames per utterance T")
    synth.add_argument("--margin", type=float, default=get_setting("synth_margin", 1.0), help="Class margin m")
    synth.add_argument("--nuisance", type=float, default=get_setting("synth_nuisance", 5.0), help="Nuisance standard deviation")
    synth.add_argument("--noise", type=float, default=None, help="Noise standard deviation (task default if omitted)")
    synth.add_argument("--seed", type=int, default=get_setting("seed", 0), help="Random seed")
    synth.add_argument(
        "--signal-layers",
        type=str,
        default=None,
        help="Comma-separated signal layers (two for collision, one for layer-select)"
    )
    synth.add_argument(
        "--nuisance-scope",
        type=str,
        default=NuisanceScope.UTTERANCE.value,
        choices=[s.value for s in NuisanceScope],
        help="Draw the shared nuisance once per utterance or once per frame"
    )
    _add_report_option(synth)

    train_parser = subparsers.add_parser("train", help="Train an interface and head")
    train_parser.add_argument("--train-manifest", type=str, required=True, help="Training manifest")
    train_parser.add_argument("--test-manifest", type=str, required=True, help="Test manifest")
    _add_interface_options(train_parser)
    train_parser.add_argument("--head", type=str, default=HeadKind.UTTERANCE.value, choices=[k.value for k in HeadKind], help="Head granularity")
    train_parser.add_argument("--head-hidden", type=int, default=0, help="Hidden width of the head (0 for linear)")
    train_parser.add_argument("--classes", type=int, default=2, help="Number of classes")
    train_parser.add_argument("--epochs", type=int, default=get_setting("epochs", 30), help="Training epochs")
    train_parser.add_argument("--lr", type=float, default=get_setting("learning_rate", 1e-3), help="Learning rate")
    train_parser.add_argument("--batch", type=int, default=get_setting("batch_size", 32), help="Utterances per batch")
    train_parser.add_argument("--seed", type=int, default=get_setting("seed", 0), help="Random seed")
    train_parser.add_argument(
        "--optimizer",
        type=str,
        default=get_setting("optimizer", "adam"),
        choices=[k.value for k in OptimizerKind],
        help="Optimizer"
    )
    train_parser.add_argument("--model", type=str, default=None, help="Write the trained LIM bundle here")
    train_parser.add_argument("--timing", action="store_true", help="Include wall-clock time in the report")
    _add_report_option(train_parser)

    eval_parser = subparsers.add_parser("eval", help="Evaluate a trained bundle")
    eval_parser.add_argument("--manifest", type=str, required=True, help="Manifest to score")
    eval_parser.add_argument("--model", type=str, required=True, help="LIM bundle")
    _add_report_option(eval_parser)

    params = subparsers.add_parser("params", help="Report trainable parameter counts")
    _add_interface_options(params)
    params.add_argument("--layers", type=int, required=True, help="Layer count L")
    params.add_argument("--dim", type=int, required=True, help="Feature dimension D")
    _add_report_option(params)

    gradcheck = subparsers.add_parser("gradcheck", help="Finite-difference gradient check")
    _add_interface_options(gradcheck)
    gradcheck.add_argument("--layers", type=int, default=5, help="Layer count L")
    gradcheck.add_argument("--dim", type=int, default=8, help="Feature dimension D")
    gradcheck.add_argument("--frames", type=int, default=7, help="Frame count T")
    gradcheck.add_argument("--seed", type=int, default=get_setting("seed", 0), help="Random seed")
    gradcheck.add_argument("--tol", type=float, default=get_setting("gradcheck_tol", 1e-4), help="Relative tolerance")
    _add_report_option(gradcheck)

    bench = subparsers.add_parser("bench", help="Time forward and backward passes")
    _add_interface_options(bench)
    bench.add_argument("--layers", type=int, required=True, help="Layer count L")
    bench.add_argument("--dim", type=int, required=True, help="Feature dimension D")
    bench.add_argument("--frames", type=int, required=True, help="Frame count T")
    bench.add_argument("--iters", type=int, default=get_setting("bench_iters", 20), help="Iterations")
    bench.add_argument("--seed", type=int, default=get_setting("seed", 0), help="Random seed")
    _add_report_option(bench)

    experiment = subparsers.add_parser("experiment", help="Run the collision experiment")
    experiment.add_argument("--out", type=str, required=True, help="Output directory")
    experiment.add_argument(
        "--interfaces",
        type=str,
        default=",".join(kind.value for kind in DEFAULT_KINDS),
        help="Comma-separated interface kinds"
    )
    experiment.add_argument("--layers", type=int, nargs="+", default=[get_setting("synth_layers", 13)], help="Layer counts")
    experiment.add_argument("--epochs", type=int, default=get_setting("epochs", 30), help="Training epochs")
    experiment.add_argument("--n", type=int, default=get_setting("synth_n", 2000), help="Utterance count")
    experiment.add_argument("--seed", type=int, default=get_setting("seed", 0), help="Random seed")
    experiment.add_argument("--no-ablation", action="store_true", help="Skip the parameter-matched weighted sum")
    _add_report_option(experiment)

    return parser


def _parse_int_list(text: str, flag: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"{flag} expects comma-separated integers, got '{text}'") from e


def run_synth(args: Namespace) -> Dict:
    task = SynthTask.from_name(args.task)
    overrides = dict(
        n=args.n,
        num_layers=args.layers,
        dim=args.dim,
        num_frames=args.frames,
        margin=args.margin,
        nuisance_sigma=args.nuisance,
        seed=args.seed,
        nuisance_scope=NuisanceScope(args.nuisance_scope),
    )
    if args.noise is not None:
        overrides["noise_sigma"] = args.noise
    if args.signal_layers is not None:
        overrides["signal_layers"] = tuple(_parse_int_list(args.signal_layers, "--signal-layers"))
    spec = SynthSpec.defaults(task, **overrides)
    manifest = generate(spec, args.out)
    train_count = int(round(len(manifest) * spec.train_fraction))
    report = {
        "spec": spec.to_dict(),
        "out": str(Path(args.out)),
        "records": len(manifest),
        "train_records": train_count,
        "test_records": len(manifest) - train_count,
        "positives": sum(r.utt_label for r in manifest.records),
        "bayes_accuracy": bayes_accuracy(spec),
    }
    if task is SynthTask.COLLISION:
        report["weighted_sum_ceiling"] = collision_ceiling(spec)
    return report


def run_train(args: Namespace) -> Dict:
    config = TrainConfig(
        interface=_interface_spec(args),
        head_kind=HeadKind(args.head),
        num_classes=args.classes,
        train_manifest=args.train_manifest,
        test_manifest=args.test_manifest,
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        optimizer=OptimizerKind(args.optimizer),
        seed=args.seed,
        head_hidden=args.head_hidden,
    )
    report, bundle = train(config)
    if args.model:
        save_bundle(bundle, args.model)
    return report.to_dict(include_timing=args.timing)


def run_eval(args: Namespace) -> Dict:
    bundle = load_bundle(args.model)
    return evaluate(bundle, args.manifest).to_dict()


def run_params(args: Namespace) -> Dict:
    spec = _interface_spec(args).resolve(args.layers, args.dim)
    report = {
        "interface": spec.kind.value,
        "layers": args.layers,
        "dim": args.dim,
        "param_count": param_count(spec, args.layers, args.dim),
        "output_dim": output_dim(spec, args.layers, args.dim),
    }
    if spec.kind is InterfaceKind.HIER_CONV:
        depth, schedule = hierconv_plan(args.layers, spec.conv_kernel, spec.conv_stride, spec.conv_padding)
        report["depth"] = depth
        report["schedule"] = schedule
    return report


def run_gradcheck(args: Namespace) -> Dict:
    spec = _interface_spec(args)
    results = gradcheck_suite(
        [spec], num_layers=args.layers, num_frames=args.frames, dim=args.dim, seeds=[args.seed], tol=args.tol
    )
    return {
        "passed": all(r.passed for r in results),
        "tol": args.tol,
        "results": [r.to_dict() for r in results],
    }


def run_bench(args: Namespace) -> Dict:
    if args.iters < 1:
        raise ConfigurationError(f"--iters must be >= 1, got {args.iters}")
    rng = make_prng(args.seed)
    interface = init_params(_interface_spec(args), args.layers, args.dim, rng)
    stack = LayerStack(rng.standard_normal((args.layers, args.frames, args.dim)))
    fit(interface, [stack])
    grad_out = np.ones((args.frames, output_dim(interface.spec, args.layers, args.dim)))

    started = time.perf_counter()
    for _ in range(args.iters):
        _, cache = forward(interface, stack)
        backward(interface, cache, grad_out)
    total = time.perf_counter() - started
    return {
        "interface": interface.kind.value,
        "iterations": args.iters,
        "total_seconds": total,
        "frames_per_second": args.iters * args.frames / total if total > 0 else None,
    }


def run_experiment_command(args: Namespace) -> Dict:
    try:
        kinds = [InterfaceKind(name.strip()) for name in args.interfaces.split(",") if name.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Unknown interface in '{args.interfaces}'") from e
    frame = run_experiment(ExperimentConfig(
        out_dir=args.out,
        kinds=kinds,
        layer_counts=args.layers,
        epochs=args.epochs,
        n=args.n,
        seed=args.seed,
        matched_ablation=not args.no_ablation,
    ))
    return {"out": str(Path(args.out)), "rows": json.loads(frame.to_json(orient="records"))}


COMMANDS = {
    "synth": run_synth,
    "train": run_train,
    "eval": run_eval,
    "params": run_params,
    "gradcheck": run_gradcheck,
    "bench": run_bench,
    "experiment": run_experiment_command,
}


def emit_report(report: Dict, path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote report to {path}")
    else:
        sys.stdout.write(text + "\n")


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    Returns:
        Process exit code
    """
    parser = create_argument_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_VALIDATION
    except SystemExit as e:
        return int(e.code or 0)

    log_file = get_setting("log_file") or None
    init_logging(get_setting("log_level", "WARNING"), log_file)

    try:
        report = COMMANDS[args.command](args)
        emit_report(report, args.report)
    except ValidationError as e:
        logger.error(f"{args.command}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION
    except ExecutionError as e:
        logger.error(f"{args.command}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RUNTIME
    except FileNotFoundError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RUNTIME

    if args.command == "gradcheck" and not report["passed"]:
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    """Main entry point for the command line interface."""
    sys.exit(dispatch())
