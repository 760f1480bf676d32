# -*- coding: utf-8 -*-
"""
Trainable-module plumbing shared by layers, attention modules and networks.

Modules are dataclasses; parameters and sub-modules are discovered from the
instance attributes in definition order, so enumeration is deterministic.
"""
from collections import Counter, OrderedDict

import numpy as np

from .tensor import Tensor


class Parameter(Tensor):
    """A trainable leaf tensor. `decay` marks it for optimizer weight decay."""

    def __init__(self, data, decay=True, name=None, dtype=None):
        super().__init__(data, requires_grad=True, name=name, dtype=dtype)
        self.decay = decay


class Module:
    #: attribute names holding non-trainable arrays saved with the weights
    buffer_names = ()

    training = True

    def __call__(self, x):
        return self.forward(x)

    def forward(self, x):
        raise NotImplementedError

    def cost(self, shape):
        """
        Static cost of one forward pass on an input of `shape` (N, C, H, W).

        Returns `(output_shape, counts)` where `counts` is a Counter with keys
        `macs`, `simam`, `norm` and `activation`.
        """
        raise NotImplementedError

    def children(self):
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{i}", item

    def named_parameters(self, prefix=""):
        for name, value in vars(self).items():
            if isinstance(value, Parameter):
                yield prefix + name, value
        for name, child in self.children():
            yield from child.named_parameters(prefix=f"{prefix}{name}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix=""):
        for name in self.buffer_names:
            yield prefix + name, getattr(self, name)
        for name, child in self.children():
            yield from child.named_buffers(prefix=f"{prefix}{name}.")

    def num_parameters(self):
        return sum(p.size for p in self.parameters())

    def train(self, mode=True):
        self.training = mode
        for _, child in self.children():
            child.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def state_dict(self):
        state = OrderedDict()
        for name, param in self.named_parameters():
            state[name] = param.data
        for name, buffer in self.named_buffers():
            state[name] = np.asarray(buffer)
        return state

    def load_state_dict(self, state):
        expected = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        missing = sorted((set(expected) | set(buffers)) - set(state))
        if missing:
            raise KeyError(f"state is missing {', '.join(missing)}")

        for name, param in expected.items():
            value = np.asarray(state[name])
            if value.shape != param.shape:
                raise ValueError(
                    f"{name}: stored shape {value.shape}, expected {param.shape}"
                )
            param.data = value.astype(param.dtype)

        for name in buffers:
            owner, attr = self._resolve(name)
            setattr(owner, attr, np.asarray(state[name], dtype=np.float64))

    def _resolve(self, dotted):
        owner = self
        *path, attr = dotted.split(".")
        for part in path:
            owner = owner[int(part)] if part.isdigit() else getattr(owner, part)
        return owner, attr


def zero_counts():
    return Counter(macs=0, simam=0, norm=0, activation=0)
