# -*- coding: utf-8 -*-
"""
``simam`` command-line entry point.

Subcommands: ``train``, ``eval``, ``ablate``, ``cost``, ``verify`` and
``gen-synth``. Exit codes: 0 success, 1 verification failure, 2 usage or
config error, 3 data error, 4 training divergence.
"""
import argparse
import csv
import dataclasses
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import settings
from .attention import cost_table, render_cost_table
from .data import generate_synthetic, load_splits
from .errors import ConfigError, DataError, SimamError, TrainingDiverged, VerificationFailed
from .nn import build, cost_report, load_architecture
from .training import (
    build_for_run,
    evaluate,
    load_checkpoint,
    load_run_config,
    resolve_architecture,
    train,
    write_run_snapshot,
)
from .verification import assert_passed, run_suite, write_report

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (7e-1, 7e-2, 7e-3, 7e-4, 7e-5)
ABLATION_COLUMNS = ("lambda", "accuracy", "params_M", "flops_G", "best", "status")
STATUS_OK = "ok"
STATUS_DIVERGED = "diverged"
STATUS_FAILED = "failed"

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4


def configure_logging(verbose=0, quiet=False):
    level = settings.LOG_LEVEL
    if verbose:
        level = "DEBUG"
    elif quiet:
        level = "WARNING"
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
    )


def _prepare_out(path, overwrite):
    """Refuse to write into a non-empty directory unless `overwrite`."""
    if path is None:
        raise ConfigError("--out is required")
    path = Path(path)
    if path.exists() and any(path.iterdir()) and not overwrite:
        raise ConfigError(f"{path} is not empty; pass --overwrite to reuse it")
    return path


def _data_root(args, manifest="manifest.csv"):
    if args.data is None:
        raise ConfigError("--data is required")
    root = Path(args.data)
    if not (root / manifest).is_file():
        raise ConfigError(f"no {manifest} under {root}")
    return root


def _run_config(args):
    run = load_run_config(args.config or "desk_train")
    train_cfg = run.train
    if args.seed is not None:
        train_cfg = dataclasses.replace(train_cfg, seed=args.seed)
    if args.lam:
        if len(args.lam) != 1:
            raise ConfigError("train takes a single --lambda value")
        train_cfg = dataclasses.replace(train_cfg, lam=args.lam[0])
    if getattr(args, "epochs", None):
        train_cfg = dataclasses.replace(train_cfg, epochs=args.epochs)
    return dataclasses.replace(run, train=train_cfg)


def cmd_train(args):
    root = _data_root(args)
    out = _prepare_out(args.out, args.overwrite)
    run = _run_config(args)
    config = resolve_architecture(run)
    train_data, test_data = load_splits(root)

    net = build_for_run(run, config)
    write_run_snapshot(out, run, config)
    result = train(net, train_data, test_data, run.train, out_dir=out)

    print(
        f"best test accuracy {result.best_accuracy!r} at epoch {result.best_epoch}; "
        f"artifacts in {out}"
    )
    return EXIT_OK


def cmd_eval(args):
    root = _data_root(args)
    net, _ = load_checkpoint(args.checkpoint)
    train_data, test_data = load_splits(root)
    data = test_data if args.split == "test" else train_data
    result = evaluate(net, data, batch_size=args.batch_size)
    print(f"accuracy {result.accuracy!r} loss {result.loss!r} ({result.count} images)")
    return EXIT_OK


def _ablation_run(job):
    """One ablation training run; returns `(label, accuracy, status, detail)`."""
    label, run, config, root, out = job
    try:
        train_data, test_data = load_splits(root)
        net = build_for_run(run, config)
        write_run_snapshot(out, run, config)
        result = train(net, train_data, test_data, run.train, out_dir=out)
        return label, result.best_accuracy, STATUS_OK, None
    except TrainingDiverged as exc:
        return label, None, STATUS_DIVERGED, str(exc)
    except Exception as exc:
        return label, None, STATUS_FAILED, f"{type(exc).__name__}: {exc}"


def _mark_best(rows):
    """Index of the highest-accuracy lambda row; ties go to the smallest lambda."""
    candidates = [
        (-row["accuracy"], row["lambda"], i)
        for i, row in enumerate(rows)
        if row["accuracy"] is not None and row["lambda"] is not None
    ]
    return min(candidates)[2] if candidates else None


def cmd_ablate(args):
    root = _data_root(args)
    out = _prepare_out(args.out, args.overwrite)
    lambdas = list(args.lam or DEFAULT_LAMBDAS)
    if not lambdas or any(lam <= 0 for lam in lambdas):
        raise ConfigError(f"ablation lambdas must be positive, got {lambdas}")

    base = _run_config(argparse.Namespace(**{**vars(args), "lam": None}))
    architecture = resolve_architecture(base)
    report = cost_report(build(architecture, dtype="float32"), architecture.input_size)

    jobs = []
    for lam in lambdas:
        run = dataclasses.replace(base, train=dataclasses.replace(base.train, lam=lam))
        jobs.append((lam, run, architecture.with_lambda(lam), root, out / f"lambda_{lam:g}"))
    if args.no_simam:
        jobs.append((None, base, architecture.without_simam(), root, out / "baseline"))

    out.mkdir(parents=True, exist_ok=True)
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            outcomes = list(pool.map(_ablation_run, jobs))
    else:
        outcomes = [_ablation_run(job) for job in jobs]

    rows = []
    for label, accuracy, status, detail in outcomes:
        if status != STATUS_OK:
            logger.warning("ablation run lambda=%s %s: %s", label, status, detail)
        rows.append({"lambda": label, "accuracy": accuracy, "status": status})
    best = _mark_best(rows)

    # parameters and MACs do not depend on lambda; the baseline has equal counts
    table = out / "ablation.csv"
    with open(table, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ABLATION_COLUMNS)
        for i, row in enumerate(rows):
            writer.writerow(
                [
                    "none" if row["lambda"] is None else f"{row['lambda']:g}",
                    "" if row["accuracy"] is None else repr(row["accuracy"]),
                    f"{report.params_m:.3f}",
                    f"{report.macs_g:.3f}",
                    "*" if i == best else "",
                    row["status"],
                ]
            )
    print(table.read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_cost(args):
    config = load_architecture(args.config or "efficientnet_b4")
    input_hw = args.input_hw or config.input_size
    net = build(config, dtype="float32")
    report = cost_report(net, input_hw)

    rows = cost_table(args.channels, args.reduction, args.kernel)
    lines = [
        render_cost_table(rows, fmt=args.format),
        "",
        f"architecture {config.name or args.config} at {input_hw}x{input_hw}",
        f"  parameters      {report.params} ({report.params_m:.2f} M)",
        f"  MACs            {report.macs} ({report.macs_g:.3f} G, headline FLOPs)",
        f"  2 x MACs        {report.flops} ({report.flops / 1e9:.3f} G)",
        f"  SimAM ops       {report.simam_ops}",
        f"  norm ops        {report.norm_ops}",
        f"  activation ops  {report.activation_ops}",
    ]
    if args.trace:
        lines.append("")
        for trace in net.shape_trace(input_hw):
            lines.append(
                f"  stage {trace.index} {trace.operator.value:<13} "
                f"{trace.input_shape} -> {trace.output_shape}"
            )
    text = "\n".join(lines) + "\n"
    print(text, end="")

    if args.out:
        out = _prepare_out(args.out, args.overwrite)
        out.mkdir(parents=True, exist_ok=True)
        (out / "attention_costs.csv").write_text(
            render_cost_table(rows, fmt="csv"), encoding="utf-8"
        )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["params", "params_M", "macs", "flops_G", "flops_2x_G", "input_hw"])
        writer.writerow(
            [
                report.params,
                f"{report.params_m:.3f}",
                report.macs,
                f"{report.macs_g:.3f}",
                f"{report.flops / 1e9:.3f}",
                input_hw,
            ]
        )
        (out / "architecture_cost.csv").write_text(buffer.getvalue(), encoding="utf-8")
    return EXIT_OK


def cmd_verify(args):
    results = run_suite(seed=args.seed or 0, quick=args.quick)
    if args.out:
        out = _prepare_out(args.out, args.overwrite)
        out.mkdir(parents=True, exist_ok=True)
        write_report(results, out / "verification.csv")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    assert_passed(results)
    return EXIT_OK


def cmd_gen_synth(args):
    out = _prepare_out(args.out, args.overwrite)
    train_data, test_data = generate_synthetic(
        out,
        num_classes=args.classes,
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        image_size=args.size,
        seed=args.seed or 0,
    )
    print(f"wrote {len(train_data)} train / {len(test_data)} test images to {out}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="single source of randomness")
    common.add_argument("--config", default=None, help="shipped config name or path")
    common.add_argument("--data", default=None, help="dataset root holding manifest.csv")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument(
        "--lambda", dest="lam", type=float, nargs="+", default=None, help="SimAM lambda value(s)"
    )
    common.add_argument("--overwrite", action="store_true", help="reuse a non-empty --out")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="count", default=0)
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="simam",
        description="Parameter-free SimAM attention in an EfficientNet-style classifier",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("train", parents=[common], help="train a network")
    p.add_argument("--epochs", type=int, default=None, help="override the configured epochs")
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    p.add_argument("checkpoint", help="path to a .ckpt archive")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("ablate", parents=[common], help="train once per lambda")
    p.add_argument("--epochs", type=int, default=None, help="override the configured epochs")
    p.add_argument("--no-simam", action="store_true", help="add a baseline row without SimAM")
    p.add_argument("--parallel", type=int, default=1, help="concurrent training runs")
    p.set_defaults(handler=cmd_ablate)

    p = commands.add_parser("cost", parents=[common], help="parameter and MAC accounting")
    p.add_argument("--input-hw", type=int, default=None)
    p.add_argument("-C", "--channels", type=int, default=256)
    p.add_argument("-r", "--reduction", type=int, default=16)
    p.add_argument("-K", "--kernel", type=int, default=3)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--trace", action="store_true", help="print the per-stage shape trace")
    p.set_defaults(handler=cmd_cost)

    p = commands.add_parser("verify", parents=[common], help="run the oracle suite")
    p.add_argument("--quick", action="store_true", help="fewer random trials")
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser("gen-synth", parents=[common], help="write the synthetic dataset")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--train-per-class", type=int, default=300)
    p.add_argument("--test-per-class", type=int, default=60)
    p.add_argument("--size", type=int, default=64)
    p.set_defaults(handler=cmd_gen_synth)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        return args.handler(args)
    except VerificationFailed as exc:
        logger.error("%s", exc)
        return EXIT_VERIFICATION
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except DataError as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except TrainingDiverged as exc:
        logger.error("%s (last finite weights: %s)", exc, exc.checkpoint_path)
        return EXIT_DIVERGED
    except SimamError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
