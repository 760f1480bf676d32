# -*- coding: utf-8 -*-
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from ..errors import ConfigError


class OptimizerKind(Enum):
    SGD = "SGD"
    ADAM = "Adam"


@dataclass(frozen=True)
class OptimizerConfig:
    kind: OptimizerKind = OptimizerKind.ADAM
    lr0: float = 1e-3
    momentum: float = 0.9
    #: L2 penalty of the SGD update; BN affine parameters and biases are exempt
    weight_decay: float = 1e-4
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be positive, got {self.lr0}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not all(0 <= b < 1 for b in self.betas):
            raise ConfigError(f"betas must be in [0, 1), got {self.betas}")


class Optimizer:
    def __init__(self, params, lr):
        self.params = list(params)
        self.lr = lr
        self.steps = 0

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.steps += 1
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            # a fresh array per update; earlier snapshots of p.data stay valid
            p.data = (p.data - self._update(i, p)).astype(p.dtype)

    def _update(self, i, p):
        raise NotImplementedError


class SGD(Optimizer):
    """Heavy-ball SGD; weight decay skips parameters created with decay=False."""

    def __init__(self, params, lr, momentum=0.9, weight_decay=1e-4):
        super().__init__(params, lr)
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = [None] * len(self.params)

    def _update(self, i, p):
        g = p.grad.astype(np.float64)
        if self.weight_decay and getattr(p, "decay", True):
            g = g + self.weight_decay * p.data
        if self.velocity[i] is None:
            self.velocity[i] = g
        else:
            self.velocity[i] = self.momentum * self.velocity[i] + g
        return self.lr * self.velocity[i]


class Adam(Optimizer):
    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8):
        super().__init__(params, lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.m = [np.zeros(p.shape) for p in self.params]
        self.v = [np.zeros(p.shape) for p in self.params]

    def _update(self, i, p):
        g = p.grad.astype(np.float64)
        self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
        self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * np.square(g)
        m_hat = self.m[i] / (1 - self.beta1**self.steps)
        v_hat = self.v[i] / (1 - self.beta2**self.steps)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(config, params):
    if config.kind is OptimizerKind.SGD:
        return SGD(params, config.lr0, config.momentum, config.weight_decay)
    return Adam(params, config.lr0, config.betas, config.eps)
