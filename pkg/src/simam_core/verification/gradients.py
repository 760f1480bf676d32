# -*- coding: utf-8 -*-
"""Central finite differences checked against the autograd engine."""
import logging
from dataclasses import dataclass

import numpy as np

from ..tensor import GradTape, Tensor, backward

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4


def finite_diff_grad(f, x, h=DEFAULT_STEP):
    """``(f(x + h e_i) - f(x - h e_i)) / 2h`` for every coordinate of `x`."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for index in np.ndindex(*x.shape):
        original = x[index]
        x[index] = original + h
        upper = float(f(x))
        x[index] = original - h
        lower = float(f(x))
        x[index] = original
        grad[index] = (upper - lower) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    """``max |a - n| / max(1, |a|)``, the figure all gradient checks bound."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if not analytic.size:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))


@dataclass
class GradientCheck:
    name: str
    max_error: float
    tolerance: float
    checked: int

    @property
    def passed(self):
        return bool(self.max_error < self.tolerance)


def check_function(name, fn, inputs, h=DEFAULT_STEP, tolerance=1e-4):
    """
    Compare `backward` with finite differences for every input of `fn`.

    `fn` maps tensors to a scalar tensor; `inputs` are arrays, evaluated in
    double precision.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in inputs]
    tensors = [Tensor(a, requires_grad=True, dtype="float64") for a in arrays]
    with GradTape() as tape:
        loss = fn(*tensors)
    grads = backward(loss, tape)

    worst = 0.0
    checked = 0
    for i, tensor in enumerate(tensors):

        def f(value, i=i):
            args = [
                Tensor(value if j == i else a, dtype="float64")
                for j, a in enumerate(arrays)
            ]
            return fn(*args).item()

        numeric = finite_diff_grad(f, arrays[i], h)
        analytic = grads.get(tensor, np.zeros_like(arrays[i]))
        worst = max(worst, relative_error(analytic, numeric))
        checked += arrays[i].size

    result = GradientCheck(name, worst, tolerance, checked)
    logger.debug("gradient check %s: max error %.3g over %d entries", name, worst, checked)
    return result


def check_module(name, module, x, loss_fn, h=DEFAULT_STEP, tolerance=1e-4):
    """Gradient check of `loss_fn(module(x))` with respect to `x` and every parameter."""
    x = np.asarray(x, dtype=np.float64)
    params = module.parameters()
    x_tensor = Tensor(x, requires_grad=True, dtype="float64")
    with GradTape() as tape:
        loss = loss_fn(module(x_tensor))
    grads = backward(loss, tape)

    worst = relative_error(
        grads.get(x_tensor, np.zeros_like(x)),
        finite_diff_grad(lambda v: loss_fn(module(Tensor(v, dtype="float64"))).item(), x, h),
    )
    checked = x.size
    for param in params:
        analytic = grads.get(param, np.zeros(param.shape))
        original = param.data

        def f(value, param=param):
            param.data = value
            return loss_fn(module(Tensor(x, dtype="float64"))).item()

        try:
            numeric = finite_diff_grad(f, original, h)
        finally:
            param.data = original
        worst = max(worst, relative_error(analytic, numeric))
        checked += param.size

    return GradientCheck(name, worst, tolerance, checked)


def check_sampled_parameters(
    name, net, x, loss_fn, count=50, rng=None, h=DEFAULT_STEP, tolerance=1e-3
):
    """
    Gradient check on `count` randomly chosen parameter entries of `net`.

    Entries are drawn uniformly over all trainable scalars.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    x = np.asarray(x, dtype=np.float64)
    named = list(net.named_parameters())
    sizes = np.array([p.size for _, p in named])
    offsets = np.cumsum(sizes)

    with GradTape() as tape:
        loss = loss_fn(net(Tensor(x, dtype="float64")))
    grads = backward(loss, tape)

    flat = rng.choice(int(offsets[-1]), size=min(count, int(offsets[-1])), replace=False)
    worst = 0.0
    for position in np.sort(flat):
        k = int(np.searchsorted(offsets, position, side="right"))
        _, param = named[k]
        local = int(position - (offsets[k] - sizes[k]))
        index = np.unravel_index(local, param.shape)
        original = param.data

        values = []
        for sign in (1.0, -1.0):
            shifted = original.copy()
            shifted[index] += sign * h
            param.data = shifted
            values.append(loss_fn(net(Tensor(x, dtype="float64"))).item())
        param.data = original

        numeric = (values[0] - values[1]) / (2.0 * h)
        analytic = grads.get(param, np.zeros(param.shape))[index]
        worst = max(worst, relative_error(analytic, numeric))

    return GradientCheck(name, worst, tolerance, len(flat))
