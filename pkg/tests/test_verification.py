import csv

import numpy as np
import pytest

from simam_core.errors import DegenerateProblem, ShapeError, VerificationFailed
from simam_core.verification import (
    CheckResult,
    NeuronProblem,
    NeuronTransform,
    VerificationSuite,
    all_neuron_energy,
    assert_passed,
    channel_gap,
    closed_form,
    energy,
    energy_gradient,
    finite_diff_grad,
    gradient_descent,
    min_energy_consistency,
    minimal_energy,
    random_problem,
    random_search,
    ranking_agreement,
    relative_error,
    write_report,
)
from simam_core.verification.neurons import hessian
from simam_core.verification.suite import (
    AccountingVerifier,
    AttentionLawVerifier,
    ClosedFormVerifier,
    ConsistencyVerifier,
    ConvolutionVerifier,
    RandomSearchVerifier,
)

GOLDEN = NeuronProblem((1.0, 2.0, 3.0, 4.0), target=3)


def test_energy_of_the_zero_transform():
    assert energy(GOLDEN, NeuronTransform(0.0, 0.0)) == 2.0


def test_two_neuron_problem_is_solved_exactly():
    prob = NeuronProblem((0.0, 1.0), target=1)
    assert energy(prob, NeuronTransform(2.0, -1.0)) == 0.0
    t = closed_form(prob)
    assert (t.w, t.b) == pytest.approx((2.0, -1.0))


def test_golden_problem():
    assert GOLDEN.alpha == 2.0
    assert GOLDEN.beta_sq == pytest.approx(2.0 / 3.0)
    t = closed_form(GOLDEN)
    assert t.w == pytest.approx(0.75)
    assert t.b == pytest.approx(-2.25)
    assert energy(GOLDEN, t) == pytest.approx(0.5)
    assert minimal_energy(2.0, 2.0 / 3.0, 0.0) == pytest.approx(0.5)


def test_neuron_at_the_mean_gets_no_weight():
    prob = NeuronProblem((1.0, 3.0, 2.0), target=2, lam=7e-4)
    t = closed_form(prob)
    assert t.w == 0.0
    assert energy(prob, t) == pytest.approx(2.0)


def test_constant_channel_without_regularizer():
    prob = NeuronProblem((1.5, 1.5, 1.5), target=0)
    with pytest.raises(DegenerateProblem):
        closed_form(prob)
    assert all_neuron_energy(prob) == 2.0
    # any lambda > 0 makes the minimizer unique again
    regularized = NeuronProblem((1.5, 1.5, 1.5), target=0, lam=1e-3)
    assert closed_form(regularized).w == 0.0


@pytest.mark.parametrize(
    "kwargs,error",
    [
        (dict(values=(1.0,), target=0), ShapeError),
        (dict(values=(1.0, 2.0), target=2), ShapeError),
        (dict(values=(1.0, 2.0), target=0, lam=-1.0), ValueError),
        (dict(values=(1.0, 2.0), target=0, lam=float("nan")), ValueError),
    ],
)
def test_problem_validation(kwargs, error):
    with pytest.raises(error):
        NeuronProblem(**kwargs)


def test_transform_must_be_finite():
    with pytest.raises(ValueError):
        NeuronTransform(float("inf"), 0.0)


@pytest.mark.parametrize("lam", [0.0, 7e-4, 0.7])
def test_gradient_descent_agrees_with_closed_form(lam):
    rng = np.random.default_rng(9)
    for _ in range(5):
        prob = random_problem(rng, int(rng.integers(4, 33)), lam)
        exact = closed_form(prob)
        found = gradient_descent(prob)
        assert abs(found.w - exact.w) < 1e-6
        assert abs(found.b - exact.b) < 1e-6
        assert max(map(abs, energy_gradient(prob, exact))) < 1e-8


def test_energy_gradient_matches_finite_differences(rng):
    prob = random_problem(rng, 12, 0.7)
    point = np.array([0.3, -0.4])

    def f(p):
        return energy(prob, NeuronTransform(p[0], p[1]))

    numeric = finite_diff_grad(f, point)
    assert relative_error(energy_gradient(prob, NeuronTransform(*point)), numeric) < 1e-8


def test_hessian_is_the_gradient_difference(rng):
    prob = random_problem(rng, 10, 7e-4)
    origin = np.array(energy_gradient(prob, NeuronTransform(0.0, 0.0)))
    along_w = np.array(energy_gradient(prob, NeuronTransform(1.0, 0.0))) - origin
    along_b = np.array(energy_gradient(prob, NeuronTransform(0.0, 1.0))) - origin
    assert np.allclose(np.column_stack([along_w, along_b]), hessian(prob))


def test_random_search_never_beats_closed_form(rng):
    for lam in (7e-4, 0.7):
        prob = random_problem(rng, 16, lam)
        best = energy(prob, closed_form(prob))
        _, found = random_search(prob, draws=5000, rng=rng)
        assert found >= best - 1e-9


def test_consistency_report(rng):
    prob = random_problem(rng, 32, 7e-4)
    report = min_energy_consistency(prob)
    assert report.exact == pytest.approx(energy(prob, closed_form(prob)))
    assert report.relative_gap < 0.5


def test_ranking_agreement_on_random_channels(rng):
    for _ in range(20):
        assert ranking_agreement(rng.normal(size=int(rng.integers(16, 65))), 7e-4)


def test_estimate_gap_shrinks_with_channel_size(rng):
    assert channel_gap(rng.normal(size=256), 7e-4) < 0.05


def test_check_result_row():
    row = CheckResult("shift_invariance", True, 1e-13, 1e-12, "note").row()
    assert row == ["shift_invariance", 1, "1e-13", "1e-12", "note"]


def test_write_report(tmp_path):
    results = [
        CheckResult("a", True, 0.0, 1.0),
        CheckResult("b", False, 2.0, 1.0, "too large"),
    ]
    path = write_report(results, tmp_path / "verification.csv")
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["check", "passed", "value", "threshold", "detail"]
    assert [r[0] for r in rows[1:]] == ["a", "b"]
    assert rows[2][1] == "0"


def test_assert_passed_names_the_failures():
    ok = [CheckResult("a", True, 0.0, 1.0)]
    assert assert_passed(ok) is ok
    with pytest.raises(VerificationFailed, match="closed_form_optimality"):
        assert_passed(ok + [CheckResult("closed_form_optimality", False, -1.0, -1e-9)])


@pytest.mark.parametrize(
    "verifier",
    [
        ClosedFormVerifier(trials=12),
        RandomSearchVerifier(trials=2, draws=2000),
        ConsistencyVerifier(trials=10),
        AttentionLawVerifier(),
        ConvolutionVerifier(),
    ],
    ids=lambda v: type(v).__name__,
)
def test_quick_verifiers_pass(verifier):
    results = verifier.verify()
    assert results
    assert all(r.passed for r in results), [r for r in results if not r.passed]


@pytest.mark.slow
def test_accounting_verifier():
    assert all(r.passed for r in AccountingVerifier().verify())


@pytest.mark.slow
def test_quick_suite_passes():
    results = VerificationSuite(seed=0, quick=True).run()
    names = [r.name for r in results]
    assert len(names) == len(set(names))
    assert_passed(results)
