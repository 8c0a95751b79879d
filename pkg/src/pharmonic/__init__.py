"""p-harmonic functions and quasiminimizer diagnostics on weighted metric
graphs and the weighted real line."""

__version__ = "0.1.0"

from .errors import PharmonicError
from .weights import (
    Weight,
    WeightSegment,
    arctan_type_weight,
    constant_weight,
    exponential_weight,
    power_weight,
    weight_from_config,
)
from .line import (
    LineFunction,
    LiouvilleVerdict,
    ap_estimate,
    classify_liouville,
    conjugate_integral,
    dirichlet_solve_line,
    halfline_growth_diagnostic,
    line_energy,
    p_harmonic_on_line,
    piecewise_linear,
)
from .graphs import (
    GraphFunction,
    MetricGraph,
    RootedBinaryTree,
    bounded_tree_function,
    build_binary_tree,
    build_grid_graph,
    build_path_graph,
    build_strip_graph,
    coordinate_function,
    graph_energy,
    p_laplacian_residual,
    p_laplacian_residuals,
    paper_tree_function,
    strip_comparison_function,
    tree_energy_limit,
    tree_energy_partial_sum,
)
from .solver import solve_dirichlet
from .geometry import (
    AnnulusNet,
    Ball,
    ChainOfBalls,
    ChainSearchFailure,
    GrowthExponents,
    annular_chain,
    ball_mass,
    chainability_audit,
    doubling_report,
    volume_growth_fit,
)
from .quasimin import (
    GrowthReport,
    QuasiminReport,
    ball_supports,
    caccioppoli_check,
    growth_report,
    oscillation_estimate_check,
    quasimin_ratio,
    weak_max_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
