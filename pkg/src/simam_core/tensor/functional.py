# -*- coding: utf-8 -*-
"""
Differentiable ops on `Tensor`.

Binary ops require equal shapes; the only implicit broadcast is against a
Python or numpy scalar. Channel-wise broadcasts are explicit ops
(`channel_scale`, `batch_norm`).
"""
import numbers

import numpy as np

from ..errors import ShapeError
from .autograd import Tensor, record

UNARY_KINDS = ("neg", "sigmoid", "relu", "silu", "exp", "log", "square")
BINARY_KINDS = ("add", "sub", "mul", "div")


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _sigmoid(z):
    # tanh form is overflow-free and gives exactly 1/2 at 0
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _is_scalar(value):
    return isinstance(value, numbers.Number) or (
        isinstance(value, np.ndarray) and value.ndim == 0
    )


def elementwise(kind, a, b=None):
    """
    Entry-wise application of `kind` to `a` (and `b` for binary kinds).

    `b` is either a tensor of the same shape as `a` or a scalar.
    """
    a = as_tensor(a)

    if kind in UNARY_KINDS:
        if b is not None:
            raise ValueError(f"{kind} takes a single operand")
        return _unary(kind, a)

    if kind not in BINARY_KINDS:
        raise ValueError(f"unknown elementwise op: {kind}")

    if _is_scalar(b):
        return _binary_scalar(kind, a, float(b))

    b = as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"{kind}: shape mismatch {a.shape} vs {b.shape}")
    return _binary(kind, a, b)


def _unary(kind, a):
    x = a.data
    if kind == "neg":
        y = -x

        def grad_fn(g):
            return (-g,)

    elif kind == "sigmoid":
        y = _sigmoid(x)

        def grad_fn(g):
            return (g * y * (1.0 - y),)

    elif kind == "relu":
        y = np.maximum(x, 0.0)

        def grad_fn(g):
            return (g * (x > 0),)

    elif kind == "silu":
        s = _sigmoid(x)
        y = x * s

        def grad_fn(g):
            return (g * s * (1.0 + x * (1.0 - s)),)

    elif kind == "exp":
        y = np.exp(x)

        def grad_fn(g):
            return (g * y,)

    elif kind == "log":
        y = np.log(x)

        def grad_fn(g):
            return (g / x,)

    else:
        y = x * x

        def grad_fn(g):
            return (2.0 * g * x,)

    return record(kind, (a,), Tensor(y), grad_fn)


def _binary(kind, a, b):
    x, z = a.data, b.data
    if kind == "add":
        y = x + z

        def grad_fn(g):
            return g, g

    elif kind == "sub":
        y = x - z

        def grad_fn(g):
            return g, -g

    elif kind == "mul":
        y = x * z

        def grad_fn(g):
            return g * z, g * x

    else:
        y = x / z

        def grad_fn(g):
            return g / z, -g * x / (z * z)

    return record(kind, (a, b), Tensor(y), grad_fn)


def _binary_scalar(kind, a, s):
    x = a.data
    if kind == "add":
        y, scale = x + s, 1.0
    elif kind == "sub":
        y, scale = x - s, 1.0
    elif kind == "mul":
        y, scale = x * s, s
    else:
        y, scale = x / s, 1.0 / s

    def grad_fn(g):
        return (g * scale,)

    return record(kind, (a,), Tensor(y.astype(x.dtype, copy=False)), grad_fn)


def add(a, b):
    return elementwise("add", a, b)


def sub(a, b):
    return elementwise("sub", a, b)


def mul(a, b):
    return elementwise("mul", a, b)


def div(a, b):
    return elementwise("div", a, b)


def sigmoid(x):
    return elementwise("sigmoid", x)


def relu(x):
    return elementwise("relu", x)


def silu(x):
    return elementwise("silu", x)


def sum(x):
    x = as_tensor(x)
    shape, dtype = x.shape, x.dtype

    def grad_fn(g):
        return (np.full(shape, g, dtype=dtype),)

    return record("sum", (x,), Tensor(x.data.sum(dtype=np.float64), dtype=dtype), grad_fn)


def mean(x):
    x = as_tensor(x)
    shape, dtype, size = x.shape, x.dtype, x.size

    def grad_fn(g):
        return (np.full(shape, g / size, dtype=dtype),)

    return record("mean", (x,), Tensor(x.data.mean(dtype=np.float64), dtype=dtype), grad_fn)


def _check_4d(x, op):
    if x.ndim != 4:
        raise ShapeError(f"{op}: expected an N x C x H x W tensor, got {x.shape}")


def channel_moments(x):
    """
    Per (n, c) mean and biased variance over the H*W spatial positions.

    Returns two N x C tensors. Accumulation is done in double precision.
    """
    x = as_tensor(x)
    _check_4d(x, "channel_moments")
    N, C, H, W = x.shape
    M = H * W
    if M < 1:
        raise ShapeError(f"channel_moments: empty spatial extent {x.shape}")

    data = x.data.astype(np.float64)
    mu = data.mean(axis=(2, 3))
    centered = data - mu[:, :, None, None]
    var = (centered * centered).mean(axis=(2, 3))

    mean_out = Tensor(mu, dtype=x.dtype)
    var_out = Tensor(var, dtype=x.dtype)

    def grad_mean(g):
        return (np.broadcast_to(g[:, :, None, None] / M, x.shape).astype(x.dtype),)

    def grad_var(g):
        grad = (2.0 / M) * g[:, :, None, None] * centered
        return (grad.astype(x.dtype),)

    record("channel_mean", (x,), mean_out, grad_mean)
    record("channel_var", (x,), var_out, grad_var)
    return mean_out, var_out


def _window(xp, i, j, stride, out_h, out_w):
    return xp[
        :,
        :,
        i : i + stride * (out_h - 1) + 1 : stride,
        j : j + stride * (out_w - 1) + 1 : stride,
    ]


def conv_output_size(size, kernel, stride, padding):
    return (size + 2 * padding - kernel) // stride + 1


def conv2d(x, weight, bias=None, stride=1, padding=None, groups=1):
    """
    2-D cross-correlation, N x C x H x W input, O x C/groups x k x k weight.

    `padding` defaults to floor(k / 2) ("same" resolution at stride 1).
    """
    x, weight = as_tensor(x), as_tensor(weight)
    bias = None if bias is None else as_tensor(bias)
    _check_4d(x, "conv2d")

    N, C, H, W = x.shape
    O, Cg, kh, kw = weight.shape
    if groups < 1 or C % groups or O % groups or Cg != C // groups:
        raise ShapeError(
            f"conv2d: input {x.shape} and weight {weight.shape} are "
            f"inconsistent with groups={groups}"
        )
    if bias is not None and bias.shape != (O,):
        raise ShapeError(f"conv2d: bias shape {bias.shape}, expected ({O},)")
    if padding is None:
        padding = kh // 2

    out_h = conv_output_size(H, kh, stride, padding)
    out_w = conv_output_size(W, kw, stride, padding)
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"conv2d: kernel {kh}x{kw} larger than padded input {x.shape}")

    p = padding
    dtype = np.result_type(x.data, weight.data)
    # windows accumulate in double whatever the storage dtype
    xp = np.pad(x.data.astype(np.float64, copy=False), ((0, 0), (0, 0), (p, p), (p, p)))
    w = weight.data.astype(np.float64, copy=False)
    depthwise = groups == C and Cg == 1

    out = np.zeros((N, O, out_h, out_w), dtype=np.float64)
    if depthwise:
        mult = O // C
        w_flat = w[:, 0]
        for i in range(kh):
            for j in range(kw):
                win = _window(xp, i, j, stride, out_h, out_w)
                if mult > 1:
                    win = np.repeat(win, mult, axis=1)
                out += win * w_flat[:, i, j][None, :, None, None]
    else:
        og = O // groups
        for grp in range(groups):
            cs, os_ = slice(grp * Cg, (grp + 1) * Cg), slice(grp * og, (grp + 1) * og)
            for i in range(kh):
                for j in range(kw):
                    win = _window(xp[:, cs], i, j, stride, out_h, out_w)
                    out[:, os_] += np.tensordot(
                        win, w[os_, :, i, j], axes=([1], [1])
                    ).transpose(0, 3, 1, 2)

    if bias is not None:
        out += bias.data[None, :, None, None]

    def grad_fn(g):
        g = np.asarray(g, dtype=np.float64)
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(w)
        if depthwise:
            mult = O // C
            for i in range(kh):
                for j in range(kw):
                    win = _window(xp, i, j, stride, out_h, out_w)
                    if mult > 1:
                        win = np.repeat(win, mult, axis=1)
                    gw[:, 0, i, j] = (g * win).sum(axis=(0, 2, 3))
                    contrib = g * w[:, 0, i, j][None, :, None, None]
                    if mult > 1:
                        contrib = contrib.reshape(N, C, mult, out_h, out_w).sum(axis=2)
                    _window(gxp, i, j, stride, out_h, out_w)[...] += contrib
        else:
            og = O // groups
            for grp in range(groups):
                cs, os_ = slice(grp * Cg, (grp + 1) * Cg), slice(grp * og, (grp + 1) * og)
                g_grp = g[:, os_]
                for i in range(kh):
                    for j in range(kw):
                        win = _window(xp[:, cs], i, j, stride, out_h, out_w)
                        gw[os_, :, i, j] = np.tensordot(
                            g_grp, win, axes=([0, 2, 3], [0, 2, 3])
                        )
                        _window(gxp[:, cs], i, j, stride, out_h, out_w)[...] += np.tensordot(
                            g_grp, w[os_, :, i, j], axes=([1], [0])
                        ).transpose(0, 3, 1, 2)

        gx = gxp[:, :, p : p + H, p : p + W].astype(x.data.dtype)
        gb = None if bias is None else g.sum(axis=(0, 2, 3)).astype(bias.data.dtype)
        return gx, gw.astype(weight.data.dtype), gb

    return record("conv2d", (x, weight, bias), Tensor(out.astype(dtype, copy=False)), grad_fn)


def batch_norm(
    x,
    gamma,
    beta,
    running_mean,
    running_var,
    training,
    momentum=0.1,
    eps=1e-5,
):
    """
    Per-channel batch normalization.

    Returns `(output, (running_mean, running_var))`; in training mode the
    running statistics are the updated ones (unbiased variance), in eval mode
    the given ones are returned unchanged and the op is affine in `x`.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    _check_4d(x, "batch_norm")
    N, C, H, W = x.shape
    if gamma.shape != (C,) or beta.shape != (C,):
        raise ShapeError(
            f"batch_norm: affine shapes {gamma.shape}/{beta.shape} for {C} channels"
        )

    data = x.data
    if training:
        M = N * H * W
        mu = data.mean(axis=(0, 2, 3), dtype=np.float64)
        var = data.var(axis=(0, 2, 3), dtype=np.float64)
        unbiased = var * M / max(M - 1, 1)
        new_mean = (1.0 - momentum) * running_mean + momentum * mu
        new_var = (1.0 - momentum) * running_var + momentum * unbiased
    else:
        mu, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var

    inv_std = (1.0 / np.sqrt(var + eps)).astype(data.dtype)
    xhat = (data - mu.astype(data.dtype)[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma.data[None, :, None, None] * xhat + beta.data[None, :, None, None]

    def grad_fn(g):
        gbeta = g.sum(axis=(0, 2, 3))
        ggamma = (g * xhat).sum(axis=(0, 2, 3))
        gxhat = g * gamma.data[None, :, None, None]
        if training:
            M = N * H * W
            gx = (
                inv_std[None, :, None, None]
                / M
                * (
                    M * gxhat
                    - gxhat.sum(axis=(0, 2, 3))[None, :, None, None]
                    - xhat * (gxhat * xhat).sum(axis=(0, 2, 3))[None, :, None, None]
                )
            )
        else:
            gx = gxhat * inv_std[None, :, None, None]
        return gx, ggamma, gbeta

    output = record("batch_norm", (x, gamma, beta), Tensor(out), grad_fn)
    return output, (np.asarray(new_mean), np.asarray(new_var))


def global_avg_pool(x):
    """N x C x H x W -> N x C."""
    x = as_tensor(x)
    _check_4d(x, "global_avg_pool")
    N, C, H, W = x.shape
    out = x.data.mean(axis=(2, 3))

    def grad_fn(g):
        return (np.broadcast_to(g[:, :, None, None] / (H * W), x.shape).copy(),)

    return record("global_avg_pool", (x,), Tensor(out), grad_fn)


def channel_scale(x, gate):
    """Multiply every spatial position of channel (n, c) by gate[n, c]."""
    x, gate = as_tensor(x), as_tensor(gate)
    _check_4d(x, "channel_scale")
    if gate.shape != x.shape[:2]:
        raise ShapeError(f"channel_scale: gate {gate.shape} for input {x.shape}")
    out = x.data * gate.data[:, :, None, None]

    def grad_fn(g):
        return g * gate.data[:, :, None, None], (g * x.data).sum(axis=(2, 3))

    return record("channel_scale", (x, gate), Tensor(out), grad_fn)


def linear(x, weight, bias=None):
    """N x F input, O x F weight, optional O bias."""
    x, weight = as_tensor(x), as_tensor(weight)
    bias = None if bias is None else as_tensor(bias)
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"linear: input {x.shape} and weight {weight.shape}")
    out = x.data @ weight.data.T
    if bias is not None:
        out = out + bias.data[None, :]

    def grad_fn(g):
        gb = None if bias is None else g.sum(axis=0)
        return g @ weight.data, g.T @ x.data, gb

    return record("linear", (x, weight, bias), Tensor(out), grad_fn)


def _log_softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits):
    logits = as_tensor(logits)
    p = np.exp(_log_softmax(logits.data))

    def grad_fn(g):
        return (p * (g - (g * p).sum(axis=1, keepdims=True)),)

    return record("softmax", (logits,), Tensor(p), grad_fn)


def cross_entropy(logits, labels):
    """Mean negative log-likelihood of integer `labels` under softmax(logits)."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"cross_entropy: logits {logits.shape}, labels {labels.shape}")
    n, k = logits.shape
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"cross_entropy: labels outside [0, {k})")

    log_p = _log_softmax(logits.data.astype(np.float64))
    rows = np.arange(n)
    loss = -log_p[rows, labels].mean()

    def grad_fn(g):
        grad = np.exp(log_p)
        grad[rows, labels] -= 1.0
        return ((g * grad / n).astype(logits.dtype),)

    return record("cross_entropy", (logits,), Tensor(loss, dtype=logits.dtype), grad_fn)
