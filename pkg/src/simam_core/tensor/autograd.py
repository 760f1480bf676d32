# -*- coding: utf-8 -*-
"""
Dense tensors and a reverse-mode gradient tape.

Ops in `functional` compute their value eagerly with numpy and, while a
`GradTape` is open, record a closure mapping the output gradient to one
gradient per input. `backward` replays the innermost tape in reverse.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from ..errors import ShapeError
from ..settings import DEFAULT_DTYPE

_TAPES = []


class Tensor:
    """
    N-dimensional array with a gradient flag. Four-dimensional tensors follow
    the N x C x H x W layout; classifier activations are N x K.
    """

    def __init__(self, data, requires_grad=False, name=None, dtype=None):
        data = np.asarray(data)
        if dtype is not None:
            data = data.astype(dtype, copy=False)
        elif not np.issubdtype(data.dtype, np.floating):
            data = data.astype(DEFAULT_DTYPE)
        self.data = data
        self.requires_grad = requires_grad
        self.name = name
        self.grad = None
        self.op = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return self.op is None

    def numpy(self):
        return self.data

    def item(self):
        return self.data.item()

    def detach(self):
        return Tensor(self.data, name=self.name)

    def sum(self):
        from . import functional as F

        return F.sum(self)

    def mean(self):
        from . import functional as F

        return F.mean(self)

    def __add__(self, other):
        from . import functional as F

        return F.elementwise("add", self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import functional as F

        return F.elementwise("sub", self, other)

    def __rsub__(self, other):
        from . import functional as F

        return F.elementwise("add", F.elementwise("neg", self), other)

    def __mul__(self, other):
        from . import functional as F

        return F.elementwise("mul", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from . import functional as F

        return F.elementwise("div", self, other)

    def __neg__(self):
        from . import functional as F

        return F.elementwise("neg", self)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        label = f"{self.name}, " if self.name else ""
        return f"Tensor({label}shape={self.shape}, dtype={self.dtype}{flag})"


@dataclass
class TapeEntry:
    op: str
    inputs: Tuple
    output: Tensor
    backward: Callable


@dataclass
class GradTape:
    """
    Ordered record of the differentiable ops executed while the tape is open.

    Usage::

        with GradTape() as tape:
            loss = F.cross_entropy(net(x), labels)
        grads = backward(loss, tape)
    """

    entries: List[TapeEntry] = field(default_factory=list)

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _TAPES.remove(self)

    def __len__(self):
        return len(self.entries)

    def record(self, op, inputs, output, backward_fn):
        self.entries.append(TapeEntry(op, tuple(inputs), output, backward_fn))

    def backward(self, loss):
        return backward(loss, self)


def active_tape():
    return _TAPES[-1] if _TAPES else None


def record(op, inputs, output, backward_fn):
    """Attach `output` to the active tape when any input needs a gradient."""
    tape = active_tape()
    if tape is None:
        return output
    if not any(t is not None and t.requires_grad for t in inputs):
        return output

    output.requires_grad = True
    output.op = op
    tape.record(op, inputs, output, backward_fn)
    return output


def backward(loss, tape):
    """
    Replay `tape` backwards from the scalar `loss`.

    Returns a dict mapping every tensor that requires a gradient and that
    `loss` depends on to its gradient (an array of the tensor's shape). Leaf
    tensors also receive it as `.grad`.
    """
    if loss.size != 1:
        raise ShapeError(f"loss must be a scalar, got shape {loss.shape}")

    grads = {id(loss): np.ones_like(loss.data)}
    tensors = {id(loss): loss}

    for entry in reversed(tape.entries):
        upstream = grads.get(id(entry.output))
        if upstream is None:
            continue

        input_grads = entry.backward(upstream)
        for tensor, grad in zip(entry.inputs, input_grads):
            if tensor is None or grad is None or not tensor.requires_grad:
                continue
            if grad.shape != tensor.shape:
                raise ShapeError(
                    f"{entry.op}: gradient shape {grad.shape} does not match "
                    f"input shape {tensor.shape}"
                )
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = grad
                tensors[key] = tensor

    result = {}
    for key, tensor in tensors.items():
        if not tensor.requires_grad:
            continue
        result[tensor] = grads[key]
        if tensor.is_leaf:
            tensor.grad = grads[key]
    return result
