from .checkpoints import CheckpointState, load_checkpoint, save_checkpoint
from .engine import (
    METRICS_COLUMNS,
    EpochRecord,
    Evaluation,
    RunConfig,
    TrainResult,
    TrainRunConfig,
    accuracy,
    build_for_run,
    evaluate,
    load_run_config,
    predict,
    resolve_architecture,
    train,
    write_run_snapshot,
)
from .optimizers import SGD, Adam, OptimizerConfig, OptimizerKind, make_optimizer
from .schedulers import SchedulerConfig, SchedulerKind, lr_at

__all__ = [
    "CheckpointState",
    "load_checkpoint",
    "save_checkpoint",
    "METRICS_COLUMNS",
    "EpochRecord",
    "Evaluation",
    "RunConfig",
    "TrainResult",
    "TrainRunConfig",
    "accuracy",
    "build_for_run",
    "evaluate",
    "load_run_config",
    "predict",
    "resolve_architecture",
    "train",
    "write_run_snapshot",
    "SGD",
    "Adam",
    "OptimizerConfig",
    "OptimizerKind",
    "make_optimizer",
    "SchedulerConfig",
    "SchedulerKind",
    "lr_at",
]
