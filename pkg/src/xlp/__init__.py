"""Attribution-based explanations for linear and integer-linear programs.

The package couples a deterministic two-phase simplex solver (with two
pivot rules on purpose) to four attribution methods - saliency, gradient
times input, integrated gradients and structure occlusion - over the
objective and solution maps of an LP/ILP, plus executable diagnostics for
the sensitivity/completeness/implementation-invariance properties.
"""

from .attribution import (
    Attribution,
    Baseline,
    attribute,
    gradient_times_input,
    granger_causal_effects,
    integrated_gradients,
    make_baseline,
    occlusion,
    saliency,
)
from .gradients import (
    FdResult,
    GradientBundle,
    finite_difference_oracle,
    ilp_relaxation_gradients,
    objective_gradients,
    solution_jacobians,
)
from .model import (
    MeaningfulStructure,
    Problem,
    StandardProblem,
    build_problem,
    mask_structure,
    parse_problem,
    serialize_problem,
    to_standard_form,
)
from .problems import build_knapsack, build_max_flow, build_shortest_path, case
from .properties import (
    Probe,
    PropertyReport,
    check_sensitivity_part1,
    check_sensitivity_part2,
    completeness_residual,
    implementation_invariance_report,
)
from .solver import (
    IlpSolution,
    LpSolution,
    multiplicity_probe,
    solve,
    solve_ilp,
    solve_lp,
    solve_problem,
    verify_kkt,
)

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "Baseline",
    "FdResult",
    "GradientBundle",
    "IlpSolution",
    "LpSolution",
    "MeaningfulStructure",
    "Probe",
    "Problem",
    "PropertyReport",
    "StandardProblem",
    "attribute",
    "build_knapsack",
    "build_max_flow",
    "build_problem",
    "build_shortest_path",
    "case",
    "check_sensitivity_part1",
    "check_sensitivity_part2",
    "completeness_residual",
    "finite_difference_oracle",
    "gradient_times_input",
    "granger_causal_effects",
    "ilp_relaxation_gradients",
    "implementation_invariance_report",
    "integrated_gradients",
    "make_baseline",
    "mask_structure",
    "multiplicity_probe",
    "objective_gradients",
    "occlusion",
    "parse_problem",
    "saliency",
    "serialize_problem",
    "solution_jacobians",
    "solve",
    "solve_ilp",
    "solve_lp",
    "solve_problem",
    "to_standard_form",
    "verify_kkt",
]
