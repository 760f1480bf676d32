# -*- coding: utf-8 -*-
"""
Epoch loop: cross-entropy training with a seeded data order and augmentation
stream, per-epoch evaluation, a CSV metrics log and best/final checkpoints.
"""
import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .. import schema, settings
from ..data import AugmentationConfig, BatchLoader
from ..errors import ConfigError, DataError, NonFiniteError, TrainingDiverged
from ..nn import build, load_architecture
from ..tensor import GradTape, backward
from ..tensor import functional as F
from .checkpoints import save_checkpoint
from .optimizers import OptimizerConfig, make_optimizer
from .schedulers import SchedulerConfig, lr_at

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ("epoch", "step", "lr", "train_loss", "train_acc", "test_acc")
METRICS_FILE = "metrics.csv"
BEST_CHECKPOINT = "best.ckpt"
FINAL_CHECKPOINT = "final.ckpt"
LAST_FINITE_CHECKPOINT = "last_finite.ckpt"


@dataclass(frozen=True)
class TrainRunConfig:
    epochs: int = 80
    batch_size: int = 32
    seed: int = 0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    augmentation: AugmentationConfig = field(default_factory=AugmentationConfig)
    #: overrides the lambda of every SimAM insertion when set
    lam: Optional[float] = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lam is not None and not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lambda must be a positive number, got {self.lam}")


@dataclass(frozen=True)
class RunConfig:
    #: shipped architecture name or a path (relative paths resolve against the run config)
    architecture: str = "desk_scale"
    train: TrainRunConfig = field(default_factory=TrainRunConfig)
    #: input resolution; defaults to the architecture's input_size
    image_size: Optional[int] = None
    dtype: str = settings.TRAIN_DTYPE

    def __post_init__(self):
        if self.image_size is not None and self.image_size < 8:
            raise ConfigError(f"image_size must be >= 8, got {self.image_size}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype}")


def load_run_config(name_or_path):
    path = schema.resolve_path(name_or_path)
    run = schema.load(RunConfig, path)
    local = path.parent / run.architecture
    if local.is_file():
        run = RunConfig(str(local.resolve()), run.train, run.image_size, run.dtype)
    return run


def resolve_architecture(run):
    config = load_architecture(run.architecture)
    if run.image_size is not None:
        config = dataclasses.replace(config, input_size=run.image_size)
    if run.train.lam is not None:
        config = config.with_lambda(run.train.lam)
    return config


def build_for_run(run, config=None):
    config = config if config is not None else resolve_architecture(run)
    return build(config, seed=run.train.seed, dtype=run.dtype)


@dataclass
class EpochRecord:
    epoch: int
    step: int
    lr: float
    train_loss: float
    train_acc: float
    test_acc: float

    def row(self):
        return [
            self.epoch,
            self.step,
            repr(self.lr),
            repr(self.train_loss),
            repr(self.train_acc),
            repr(self.test_acc),
        ]


@dataclass
class TrainResult:
    history: List[EpochRecord]
    best_epoch: int
    best_accuracy: float
    best_checkpoint: Optional[Path] = None
    final_checkpoint: Optional[Path] = None
    metrics_path: Optional[Path] = None


@dataclass
class Evaluation:
    accuracy: float
    loss: float
    count: int


def predict(logits):
    """Arg-max class per row; ties resolve to the lowest class index."""
    return np.argmax(np.asarray(logits), axis=1)


def accuracy(logits, labels):
    labels = np.asarray(labels)
    if not labels.size:
        raise DataError("accuracy of an empty prediction set")
    return float(np.mean(predict(logits) == labels))


def evaluate(net, data, batch_size=32, image_size=None, dtype=None):
    """Accuracy and mean cross-entropy of `net` on `data`, in eval mode."""
    if not len(data):
        raise DataError("cannot evaluate on an empty dataset")
    image_size = image_size or net.config.input_size
    was_training = net.training
    net.eval()
    correct = 0
    total_loss = 0.0
    try:
        loader = BatchLoader(
            data,
            batch_size,
            image_size,
            shuffle=False,
            dtype=dtype or net.dtype,
        )
        for x, y in loader:
            logits = net(x)
            total_loss += F.cross_entropy(logits, y).item() * len(y)
            correct += int(np.sum(predict(logits.data) == y))
    finally:
        net.train(was_training)
    return Evaluation(correct / len(data), total_loss / len(data), len(data))


def _check_labels(net, *datasets):
    num_classes = net.config.num_classes
    for data in datasets:
        if data is not None and len(data) and data.labels.max() >= num_classes:
            raise DataError(
                f"dataset label {data.labels.max()} does not fit a "
                f"{num_classes}-class network"
            )


def _metrics_writer(path):
    f = open(path, "w", newline="", encoding="utf-8")
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(METRICS_COLUMNS)
    f.flush()
    return f, writer


def train(net, train_data, test_data, cfg, out_dir=None, image_size=None):
    """
    Train `net` in place for `cfg.epochs` epochs.

    With `out_dir`, appends one row per epoch to ``metrics.csv`` and keeps
    ``best.ckpt`` (highest test accuracy, earliest epoch on ties) and
    ``final.ckpt``. Non-finite values in the forward pass or the weights stop the
    run, store the last finite weights in ``last_finite.ckpt`` and raise
    `TrainingDiverged`.
    """
    if not len(train_data):
        raise DataError("training set is empty")
    _check_labels(net, train_data, test_data)
    image_size = image_size or net.config.input_size
    out_dir = Path(out_dir) if out_dir is not None else None

    optimizer = make_optimizer(cfg.optimizer, net.parameters())
    scheduler = cfg.scheduler
    lr0 = cfg.optimizer.lr0

    metrics_file = writer = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_file, writer = _metrics_writer(out_dir / METRICS_FILE)

    history = []
    best = None
    best_path = final_path = None
    step = 0
    try:
        for epoch in range(cfg.epochs):
            net.train()
            loader = BatchLoader(
                train_data,
                cfg.batch_size,
                image_size,
                seed=cfg.seed,
                epoch=epoch,
                augmentation=cfg.augmentation,
                dtype=net.dtype,
            )
            total_loss = 0.0
            correct = 0
            lr = lr_at(scheduler, epoch, lr0)
            for x, y in loader:
                if scheduler.per_step:
                    lr = lr_at(scheduler, step, lr0)
                optimizer.lr = lr
                snapshot = net.state_dict() if out_dir is not None else None

                optimizer.zero_grad()
                try:
                    with GradTape() as tape:
                        logits = net(x)
                        loss = F.cross_entropy(logits, y)
                except NonFiniteError as exc:
                    _diverged(net, snapshot, out_dir, epoch, step, cause=exc)
                value = loss.item()
                if not math.isfinite(value):
                    _diverged(net, snapshot, out_dir, epoch, step)

                backward(loss, tape)
                optimizer.step()
                if not _all_finite(net):
                    _diverged(net, snapshot, out_dir, epoch, step)
                step += 1
                total_loss += value * len(y)
                correct += int(np.sum(predict(logits.data) == y))
                logger.debug("epoch %d step %d lr %g loss %.6f", epoch, step, lr, value)

            test_acc = (
                evaluate(net, test_data, cfg.batch_size, image_size).accuracy
                if test_data is not None and len(test_data)
                else float("nan")
            )
            record = EpochRecord(
                epoch=epoch,
                step=step,
                lr=lr,
                train_loss=total_loss / len(train_data),
                train_acc=correct / len(train_data),
                test_acc=test_acc,
            )
            history.append(record)
            logger.info(
                "epoch %d/%d lr %.3g loss %.4f train_acc %.4f test_acc %.4f",
                epoch + 1,
                cfg.epochs,
                record.lr,
                record.train_loss,
                record.train_acc,
                record.test_acc,
            )

            score = record.test_acc if math.isfinite(record.test_acc) else record.train_acc
            improved = best is None or score > best[1]
            if improved:
                best = (epoch, score)
            if writer is not None:
                writer.writerow(record.row())
                metrics_file.flush()
                if improved:
                    best_path = save_checkpoint(
                        out_dir / BEST_CHECKPOINT, net, epoch, step, vars(record)
                    )

        if out_dir is not None:
            final_path = save_checkpoint(
                out_dir / FINAL_CHECKPOINT, net, cfg.epochs - 1, step, vars(history[-1])
            )
    finally:
        if metrics_file is not None:
            metrics_file.close()

    return TrainResult(
        history=history,
        best_epoch=best[0],
        best_accuracy=best[1],
        best_checkpoint=best_path,
        final_checkpoint=final_path,
        metrics_path=out_dir / METRICS_FILE if out_dir is not None else None,
    )


def _all_finite(net):
    return all(np.all(np.isfinite(p.data)) for p in net.parameters())


def _diverged(net, snapshot, out_dir, epoch, step, cause=None):
    path = None
    if out_dir is not None and snapshot is not None:
        net.load_state_dict(snapshot)
        path = save_checkpoint(out_dir / LAST_FINITE_CHECKPOINT, net, epoch, step)
    detail = f" ({cause})" if cause is not None else ""
    logger.error("training became non-finite at epoch %d step %d%s", epoch, step, detail)
    raise TrainingDiverged(
        f"training became non-finite at epoch {epoch}, step {step}{detail}",
        checkpoint_path=path,
    ) from cause


def write_run_snapshot(out_dir, run, config):
    """``config.json`` and ``architecture.json`` reproducing the run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "architecture.json").write_text(schema.dumps(config), encoding="utf-8")
    snapshot = RunConfig("architecture.json", run.train, run.image_size, run.dtype)
    (out_dir / "config.json").write_text(schema.dumps(snapshot), encoding="utf-8")
