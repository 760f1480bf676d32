from .gradients import (
    GradientCheck,
    check_function,
    check_module,
    check_sampled_parameters,
    finite_diff_grad,
    relative_error,
)
from .neurons import (
    ConsistencyReport,
    NeuronProblem,
    NeuronTransform,
    all_neuron_energy,
    channel_energies,
    channel_gap,
    closed_form,
    energy,
    energy_gradient,
    gradient_descent,
    min_energy_consistency,
    minimal_energy,
    random_problem,
    random_search,
    ranking_agreement,
)
from .reference import (
    naive_channel_moments,
    naive_conv2d,
    reference_attention_weights,
    reference_refine,
)
from .suite import CheckResult, VerificationSuite, assert_passed, run_suite, write_report

__all__ = [
    "GradientCheck",
    "check_function",
    "check_module",
    "check_sampled_parameters",
    "finite_diff_grad",
    "relative_error",
    "ConsistencyReport",
    "NeuronProblem",
    "NeuronTransform",
    "all_neuron_energy",
    "channel_energies",
    "channel_gap",
    "closed_form",
    "energy",
    "energy_gradient",
    "gradient_descent",
    "min_energy_consistency",
    "minimal_energy",
    "random_problem",
    "random_search",
    "ranking_agreement",
    "naive_channel_moments",
    "naive_conv2d",
    "reference_attention_weights",
    "reference_refine",
    "CheckResult",
    "VerificationSuite",
    "assert_passed",
    "run_suite",
    "write_report",
]
