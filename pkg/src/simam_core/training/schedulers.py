# -*- coding: utf-8 -*-
import math
from dataclasses import dataclass
from enum import Enum

from ..errors import ConfigError


class SchedulerKind(Enum):
    COSINE = "CosineAnnealing"
    STEP = "Step"


@dataclass(frozen=True)
class SchedulerConfig:
    kind: SchedulerKind = SchedulerKind.COSINE
    #: cosine period in optimizer steps
    t_max: int = 21000
    eta_min: float = 1e-7
    #: step decay period in epochs
    step_size: int = 20
    gamma: float = 0.1

    def __post_init__(self):
        if self.kind is SchedulerKind.COSINE and self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.kind is SchedulerKind.STEP and self.step_size <= 0:
            raise ConfigError(f"step_size must be positive, got {self.step_size}")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.eta_min < 0:
            raise ConfigError(f"eta_min must be >= 0, got {self.eta_min}")

    @property
    def per_step(self):
        """Cosine advances every optimizer step, step decay every epoch."""
        return self.kind is SchedulerKind.COSINE


def lr_at(scheduler, t, lr0):
    """
    Learning rate at position `t`: the optimizer step for cosine annealing,
    the 0-based epoch for step decay. Cosine stays at `eta_min` past `t_max`.
    """
    if lr0 <= 0:
        raise ConfigError(f"initial learning rate must be positive, got {lr0}")
    if t < 0:
        raise ValueError(f"schedule position must be >= 0, got {t}")

    if scheduler.kind is SchedulerKind.COSINE:
        if scheduler.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {scheduler.t_max}")
        t = min(t, scheduler.t_max)
        c = 0.5 * (1.0 + math.cos(math.pi * t / scheduler.t_max))
        return lr0 * c + scheduler.eta_min * (1.0 - c)

    decays = t // scheduler.step_size
    return lr0 / (1.0 / scheduler.gamma) ** decays
