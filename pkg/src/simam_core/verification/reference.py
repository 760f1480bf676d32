# -*- coding: utf-8 -*-
"""Slow loop implementations the vectorized ops are compared against."""
import math

import numpy as np


def naive_conv2d(x, weight, bias=None, stride=1, padding=0, groups=1):
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    N, C, H, W = x.shape
    K, Cg, kh, kw = weight.shape
    out_h = (H + 2 * padding - kh) // stride + 1
    out_w = (W + 2 * padding - kw) // stride + 1
    per_group = K // groups
    out = np.zeros((N, K, out_h, out_w))

    for n in range(N):
        for k in range(K):
            g = k // per_group
            for i in range(out_h):
                for j in range(out_w):
                    acc = 0.0 if bias is None else float(bias[k])
                    for c in range(Cg):
                        for u in range(kh):
                            for v in range(kw):
                                row = i * stride + u - padding
                                col = j * stride + v - padding
                                if 0 <= row < H and 0 <= col < W:
                                    acc += weight[k, c, u, v] * x[n, g * Cg + c, row, col]
                    out[n, k, i, j] = acc
    return out


def naive_channel_moments(x):
    x = np.asarray(x, dtype=np.float64)
    N, C, H, W = x.shape
    mean = np.zeros((N, C))
    var = np.zeros((N, C))
    for n in range(N):
        for c in range(C):
            values = [x[n, c, i, j] for i in range(H) for j in range(W)]
            mu = math.fsum(values) / len(values)
            mean[n, c] = mu
            var[n, c] = math.fsum((v - mu) ** 2 for v in values) / len(values)
    return mean, var


def reference_attention_weights(x, lam):
    """
    Per-neuron ``sigmoid(1 / e*)`` from all-neuron channel statistics.

    Accepts lambda = 0; a constant channel then takes the limit energy 2.
    """
    x = np.asarray(x, dtype=np.float64)
    mean, var = naive_channel_moments(x)
    N, C, H, W = x.shape
    weights = np.zeros_like(x)
    for n in range(N):
        for c in range(C):
            constant = np.ptp(x[n, c]) == 0.0
            for i in range(H):
                for j in range(W):
                    d = x[n, c, i, j] - mean[n, c]
                    if lam == 0 and constant:
                        e = 2.0
                    else:
                        e = 4.0 * (var[n, c] + lam) / (d * d + 2.0 * var[n, c] + 2.0 * lam)
                    weights[n, c, i, j] = 1.0 / (1.0 + math.exp(-1.0 / e))
    return weights


def reference_refine(x, lam):
    return np.asarray(x, dtype=np.float64) * reference_attention_weights(x, lam)
