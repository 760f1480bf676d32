# -*- coding: utf-8 -*-
"""
The oracle suite run by ``simam verify``: every check compares a production
code path with an independent reference and reports one CSV row.
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..attention import (
    AttentionCostSpec,
    AttentionKind,
    EnergyParams,
    SELayer,
    param_count,
    simam_energy,
    simam_refine,
)
from ..errors import VerificationFailed
from ..nn import MBConv, MBConvSpec, build, count_params, load_architecture
from ..tensor import functional as F
from .gradients import check_function, check_module, check_sampled_parameters
from .neurons import (
    channel_gap,
    closed_form,
    energy,
    energy_gradient,
    gradient_descent,
    random_problem,
    random_search,
    ranking_agreement,
)
from .reference import naive_channel_moments, naive_conv2d, reference_attention_weights

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("check", "passed", "value", "threshold", "detail")
LAMBDAS = (0.0, 7e-4, 7e-1)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def row(self):
        return [self.name, int(self.passed), repr(self.value), repr(self.threshold), self.detail]


def _below(name, value, threshold, detail=""):
    return CheckResult(name, bool(value < threshold), float(value), threshold, detail)


def _at_least(name, value, threshold, detail=""):
    return CheckResult(name, bool(value >= threshold), float(value), threshold, detail)


@dataclass
class ClosedFormVerifier:
    """Gradient descent on the literal energy recovers the closed form."""

    trials: int = 500
    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 1])
        worst_delta = worst_grad = 0.0
        for i in range(self.trials):
            prob = random_problem(rng, int(rng.integers(4, 257)), LAMBDAS[i % len(LAMBDAS)])
            exact = closed_form(prob)
            found = gradient_descent(prob)
            worst_delta = max(worst_delta, abs(exact.w - found.w), abs(exact.b - found.b))
            worst_grad = max(worst_grad, *map(abs, energy_gradient(prob, exact)))
        detail = f"{self.trials} problems, M in 4..256"
        return [
            _below("closed_form_vs_gradient_descent", worst_delta, 1e-3, detail),
            _below("first_order_conditions", worst_grad, 1e-8, detail),
        ]


@dataclass
class RandomSearchVerifier:
    """No random candidate beats the closed form."""

    trials: int = 20
    draws: int = 10_000
    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 2])
        margin = math.inf
        for i in range(self.trials):
            lam = LAMBDAS[1 + i % 2]
            prob = random_problem(rng, int(rng.integers(4, 65)), lam)
            best = energy(prob, closed_form(prob))
            _, found = random_search(prob, self.draws, rng)
            margin = min(margin, found - best)
        return [
            _at_least(
                "closed_form_optimality",
                margin,
                -1e-9,
                f"{self.trials} problems x {self.draws} draws",
            )
        ]


@dataclass
class ConsistencyVerifier:
    """The all-neuron estimate ranks neurons like the exact energies."""

    trials: int = 200
    gap_size: int = 256
    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 3])
        agreed = 0
        for _ in range(self.trials):
            values = rng.normal(size=int(rng.integers(16, 65)))
            agreed += ranking_agreement(values, 7e-4)
        gap = channel_gap(rng.normal(size=self.gap_size), 7e-4)
        return [
            _at_least("ranking_agreement", agreed / self.trials, 0.95, f"{self.trials} channels"),
            _below("estimate_gap", gap, 0.05, f"M={self.gap_size}, mean relative gap"),
        ]


@dataclass
class AttentionLawVerifier:
    """Closed-form properties of the attention map itself."""

    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 4])
        results = []

        constant = np.full((2, 3, 4, 4), 1.7)
        worst = 0.0
        for lam in (1e-4, 7e-4, 0.7, 5.0):
            params = EnergyParams(lam=lam)
            e_star = simam_energy(constant, params).e_star.data
            refined = simam_refine(constant, params).data
            expected = constant / (1.0 + math.exp(-0.5))
            worst = max(worst, np.max(np.abs(e_star - 2.0)), np.max(np.abs(refined - expected)))
        results.append(_below("constant_channel", worst, 1e-12))

        x = rng.normal(size=(2, 3, 5, 5))
        base = simam_energy(x).weights.data
        shifted = simam_energy(x + rng.normal(size=(2, 3, 1, 1))).weights.data
        results.append(_below("shift_invariance", np.max(np.abs(base - shifted)), 1e-12))

        scaled = reference_attention_weights(3.5 * x, 0.0)
        results.append(
            _below(
                "scale_invariance",
                np.max(np.abs(reference_attention_weights(x, 0.0) - scaled)),
                1e-9,
                "lambda = 0",
            )
        )

        reference = reference_attention_weights(x, 7e-4)
        results.append(_below("attention_vs_loop", np.max(np.abs(base - reference)), 1e-12))

        mean, var = F.channel_moments(x)
        loop_mean, loop_var = naive_channel_moments(x)
        results.append(
            _below(
                "channel_moments_vs_loop",
                max(np.max(np.abs(mean.data - loop_mean)), np.max(np.abs(var.data - loop_var))),
                1e-12,
            )
        )
        return results


@dataclass
class ConvolutionVerifier:
    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 5])
        worst = 0.0
        for groups, stride in ((1, 1), (2, 2), (4, 1)):
            x = rng.normal(size=(1, 4, 8, 8))
            w = rng.normal(size=(4, 4 // groups, 3, 3))
            b = rng.normal(size=4)
            fast = F.conv2d(x, w, b, stride=stride, padding=1, groups=groups).data
            slow = naive_conv2d(x, w, b, stride=stride, padding=1, groups=groups)
            worst = max(worst, np.max(np.abs(fast - slow)))
        return [_below("conv2d_vs_loop", worst, 1e-10, "groups 1/2/4")]


@dataclass
class GradientVerifier:
    """Backward passes against central finite differences."""

    sampled_parameters: int = 50
    seed: int = 0

    def verify(self):
        rng = np.random.default_rng([self.seed, 6])
        params = EnergyParams(lam=7e-4)
        results = []

        checks = [
            check_function(
                "grad_simam_refine",
                lambda x: F.sum(F.mul(simam_refine(x, params), simam_refine(x, params))),
                [rng.normal(size=(2, 3, 4, 4))],
            ),
            check_function(
                "grad_conv_simam_cross_entropy",
                lambda x, w: F.cross_entropy(
                    F.global_avg_pool(simam_refine(F.conv2d(x, w), params)), [1]
                ),
                [rng.normal(size=(1, 4, 6, 6)), rng.normal(size=(4, 4, 3, 3))],
            ),
            check_module(
                "grad_se_layer",
                SELayer(8, reduction=4, rng=rng),
                rng.normal(size=(2, 8, 3, 3)),
                lambda out: F.sum(F.mul(out, out)),
            ),
            check_module(
                "grad_mbconv_simam",
                MBConv(
                    MBConvSpec(4, 4, expansion=6, kernel=3, simam_after_dw=True), rng=rng
                ),
                rng.normal(size=(2, 4, 5, 5)),
                lambda out: F.sum(F.mul(out, out)),
            ),
        ]

        net = build(load_architecture("desk_scale"), seed=self.seed, dtype="float64")
        size = net.config.input_size
        checks.append(
            check_sampled_parameters(
                "grad_desk_network",
                net,
                rng.normal(size=(1, 3, size, size)),
                lambda logits: F.cross_entropy(logits, [3]),
                count=self.sampled_parameters,
                rng=rng,
            )
        )

        for check in checks:
            results.append(
                _below(check.name, check.max_error, check.tolerance, f"{check.checked} entries")
            )
        return results


@dataclass
class AccountingVerifier:
    """Parameter-freeness of SimAM and the attention cost formulas."""

    def verify(self):
        results = []
        for name in ("desk_scale", "efficientnet_b4"):
            config = load_architecture(name)
            with_simam = count_params(build(config, dtype="float32"))
            without = count_params(build(config.without_simam(), dtype="float32"))
            delta = abs(with_simam - without)
            results.append(
                CheckResult(f"parameter_free_{name}", delta == 0, float(delta), 0.0)
            )

        mismatches = 0
        for C in (16, 64, 256):
            for r in (4, 16):
                layer = SELayer(C, reduction=r)
                spec = AttentionCostSpec(AttentionKind.SE, C, r=r)
                mismatches += layer.num_parameters() != param_count(spec)
        results.append(CheckResult("se_enumeration", mismatches == 0, float(mismatches), 0.0))
        return results


@dataclass
class VerificationSuite:
    seed: int = 0
    quick: bool = False
    verifiers: List[object] = field(default=None)

    def __post_init__(self):
        if self.verifiers is None:
            scale = 10 if self.quick else 1
            self.verifiers = [
                ClosedFormVerifier(trials=500 // scale, seed=self.seed),
                RandomSearchVerifier(trials=max(2, 20 // scale), seed=self.seed),
                ConsistencyVerifier(trials=200 // scale, seed=self.seed),
                AttentionLawVerifier(seed=self.seed),
                ConvolutionVerifier(seed=self.seed),
                GradientVerifier(sampled_parameters=50 // scale, seed=self.seed),
                AccountingVerifier(),
            ]

    def run(self):
        results = []
        for verifier in self.verifiers:
            for result in verifier.verify():
                level = logging.INFO if result.passed else logging.ERROR
                logger.log(
                    level,
                    "%-34s %s value=%.3g threshold=%.3g",
                    result.name,
                    "ok  " if result.passed else "FAIL",
                    result.value,
                    result.threshold,
                )
                results.append(result)
        return results


def run_suite(seed=0, quick=False):
    return VerificationSuite(seed=seed, quick=quick).run()


def write_report(results, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for result in results:
            writer.writerow(result.row())
    return path


def assert_passed(results):
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise VerificationFailed(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    return results
