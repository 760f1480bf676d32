# -*- coding: utf-8 -*-
"""
Literal single-neuron energy problems.

A problem is one channel of `M` values with a target neuron `n`; the other
`M - 1` neurons provide the excluding-n statistics (mean ``alpha``, variance
``beta_sq`` with divisor ``M - 1``). The energy of a linear transform
``(w, b)`` is

    mean_i (y_o - (w q_i + b))^2 + (y_t - (w n + b))^2 + lam w^2

with labels ``y_t = +1`` for the target and ``y_o = -1`` for the others.
Nothing here reuses the production attention code.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from ..errors import DegenerateProblem, ShapeError


@dataclass(frozen=True)
class NeuronProblem:
    values: Tuple[float, ...]
    target: int
    lam: float = 0.0
    label_target: float = 1.0
    label_other: float = -1.0

    def __post_init__(self):
        if len(self.values) < 2:
            raise ShapeError(f"a neuron problem needs M >= 2 values, got {len(self.values)}")
        if not 0 <= self.target < len(self.values):
            raise ShapeError(f"target {self.target} outside 0..{len(self.values) - 1}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")

    @classmethod
    def from_array(cls, values, target, lam=0.0):
        return cls(tuple(float(v) for v in np.ravel(values)), int(target), float(lam))

    @property
    def M(self):
        return len(self.values)

    @property
    def n(self):
        return self.values[self.target]

    @cached_property
    def others(self):
        q = np.asarray(self.values, dtype=np.float64)
        return np.delete(q, self.target)

    @property
    def is_constant(self):
        return float(np.ptp(self.values)) == 0.0

    @property
    def alpha(self):
        return float(self.others.mean())

    @property
    def beta_sq(self):
        q = self.others
        return float(np.mean((q - q.mean()) ** 2))


@dataclass(frozen=True)
class NeuronTransform:
    w: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.w) and np.isfinite(self.b)):
            raise ValueError(f"transform must be finite, got ({self.w}, {self.b})")


def energy(prob, t):
    q = prob.others
    others = np.mean((prob.label_other - (t.w * q + t.b)) ** 2)
    target = (prob.label_target - (t.w * prob.n + t.b)) ** 2
    return float(others + target + prob.lam * t.w**2)


def energy_gradient(prob, t):
    """Analytic (dE/dw, dE/db) of the literal energy."""
    q = prob.others
    r_o = prob.label_other - (t.w * q + t.b)
    r_t = prob.label_target - (t.w * prob.n + t.b)
    dw = np.mean(-2.0 * q * r_o) - 2.0 * prob.n * r_t + 2.0 * prob.lam * t.w
    db = np.mean(-2.0 * r_o) - 2.0 * r_t
    return float(dw), float(db)


def _denominator(d, beta_sq, lam):
    return d * d + 2.0 * beta_sq + 2.0 * lam


def closed_form(prob):
    """
    Exact minimizer of `energy`:

        w = 2 D (n - alpha) / ((n - alpha)^2 + 2 beta_sq + 2 lam)
        b = (y_t + y_o) / 2 - w (n + alpha) / 2

    with ``D = (y_t - y_o) / 2``, i.e. ``w = 2(n - alpha) / (...)`` and
    ``b = -(n + alpha) w / 2`` for the +1 / -1 labels.
    """
    d = prob.n - prob.alpha
    den = _denominator(d, prob.beta_sq, prob.lam)
    if den == 0.0 or (prob.lam == 0.0 and prob.is_constant):
        raise DegenerateProblem(
            "energy has no unique minimizer: lambda = 0 and all neurons equal"
        )
    half_gap = 0.5 * (prob.label_target - prob.label_other)
    w = 2.0 * half_gap * d / den
    b = 0.5 * (prob.label_target + prob.label_other) - 0.5 * w * (prob.n + prob.alpha)
    return NeuronTransform(w, b)


def minimal_energy(d, beta_sq, lam, half_gap=1.0):
    """``4 D^2 (beta_sq + lam) / (d^2 + 2 beta_sq + 2 lam)``, the value at the minimizer."""
    den = _denominator(d, beta_sq, lam)
    if den == 0.0:
        raise DegenerateProblem("minimal energy undefined for lambda = 0 on a constant channel")
    return 4.0 * half_gap * half_gap * (beta_sq + lam) / den


def all_neuron_energy(prob):
    """
    The estimate computed with statistics over all `M` neurons (target
    included, divisor `M`), as the attention layer does. A constant channel
    takes the limit value 2 at lambda = 0.
    """
    q = np.asarray(prob.values, dtype=np.float64)
    mu = q.mean()
    var = np.mean((q - mu) ** 2)
    d = prob.n - mu
    if prob.lam == 0.0 and prob.is_constant:
        return 2.0
    return minimal_energy(d, var, prob.lam)


@dataclass
class ConsistencyReport:
    exact: float
    all_neuron: float

    @property
    def relative_gap(self):
        scale = max(abs(self.exact), np.finfo(np.float64).tiny)
        return abs(self.all_neuron - self.exact) / scale


def min_energy_consistency(prob):
    """Exact minimal energy against the all-neuron estimate for one neuron."""
    exact = energy(prob, closed_form(prob))
    return ConsistencyReport(exact=exact, all_neuron=all_neuron_energy(prob))


def channel_energies(values, lam):
    """Exact and all-neuron minimal energies of every neuron of a channel."""
    values = np.ravel(values)
    exact = np.empty(values.size)
    estimate = np.empty(values.size)
    for i in range(values.size):
        report = min_energy_consistency(NeuronProblem.from_array(values, i, lam))
        exact[i] = report.exact
        estimate[i] = report.all_neuron
    return exact, estimate


def channel_gap(values, lam):
    """Mean relative gap between the two energy estimates over a channel."""
    exact, estimate = channel_energies(values, lam)
    return float(np.mean(np.abs(estimate - exact) / np.maximum(np.abs(exact), 1e-300)))


def ranking_agreement(values, lam):
    """True when both estimates order the neurons identically by importance 1/e."""
    exact, estimate = channel_energies(values, lam)
    return bool(
        np.array_equal(
            np.argsort(-1.0 / exact, kind="stable"),
            np.argsort(-1.0 / estimate, kind="stable"),
        )
    )


def hessian(prob):
    q = prob.others
    return 2.0 * np.array(
        [
            [np.mean(q * q) + prob.n**2 + prob.lam, np.mean(q) + prob.n],
            [np.mean(q) + prob.n, 2.0],
        ]
    )


def gradient_descent(prob, tol=1e-13, max_steps=200_000):
    """
    Minimize `energy` by gradient descent from (0, 0) with step ``1 / L``,
    ``L`` the largest Hessian eigenvalue. Independent of `closed_form`.
    """
    step = 1.0 / np.linalg.eigvalsh(hessian(prob))[-1]
    w = b = 0.0
    for _ in range(max_steps):
        dw, db = energy_gradient(prob, NeuronTransform(w, b))
        w, b = w - step * dw, b - step * db
        if max(abs(dw), abs(db)) * step < tol:
            break
    return NeuronTransform(w, b)


def random_search(prob, draws=10_000, rng=None, radius=None):
    """Best of `draws` uniform (w, b) candidates and its energy."""
    rng = rng if rng is not None else np.random.default_rng(0)
    if radius is None:
        spread = max(abs(v) for v in prob.values) + 1.0
        radius = (4.0, 4.0 * spread)
    w = rng.uniform(-radius[0], radius[0], size=draws)
    b = rng.uniform(-radius[1], radius[1], size=draws)
    q = prob.others
    residual = prob.label_other - (w[:, None] * q[None, :] + b[:, None])
    values = (
        np.mean(residual**2, axis=1)
        + (prob.label_target - (w * prob.n + b)) ** 2
        + prob.lam * w**2
    )
    best = int(np.argmin(values))
    return NeuronTransform(float(w[best]), float(b[best])), float(values[best])


def random_problem(rng, M, lam):
    values = rng.normal(0.0, 1.0, size=M)
    return NeuronProblem.from_array(values, rng.integers(M), lam)
