"""Data-driven certification and localization of black-box network outputs
under random input uncertainty.

Given a network, an input distribution, and a linear safe set, the package
fits, from samples, a cover of the reachable outputs that simultaneously
localizes them and certifies a high-probability lower bound on their
safety level.
"""

from .assess import (
    AssessmentConfig,
    AssessmentReport,
    RowResult,
    assess,
    config_from_dict,
    load_report,
    sweep_lambda,
)
from .distributions import (
    Gaussian,
    InputDistribution,
    Mixture,
    Product,
    UniformNormBall,
    load_distribution,
    sample,
    uniform_ball_sampler,
)
from .geometry import (
    HalfSpace,
    NormBall,
    NormSpec,
    Regularizer,
    approx_robustness,
    approx_robustness_oracle,
    contains,
    dual_norm,
    fit_pca_qnorm,
    volume_penalty,
)
from .model import Layer, NetworkModel, load_model, random_relu_network
from .safeset import Row, SafeSet, load_safeset, safety_level
from .scenario import (
    CoverClass,
    ScenarioProblem,
    ScenarioSolution,
    SolverOptions,
    sample_size,
    solve,
    solve_half_space,
    solve_norm_ball,
)
from .validate import (
    CoverageEstimate,
    empirical_min_safety,
    estimate_coverage,
    estimate_prl,
    quantile_lower,
)

__version__ = "0.1.0"

__all__ = [
    "AssessmentConfig",
    "AssessmentReport",
    "CoverClass",
    "CoverageEstimate",
    "Gaussian",
    "HalfSpace",
    "InputDistribution",
    "Layer",
    "Mixture",
    "NetworkModel",
    "NormBall",
    "NormSpec",
    "Product",
    "Regularizer",
    "Row",
    "RowResult",
    "SafeSet",
    "ScenarioProblem",
    "ScenarioSolution",
    "SolverOptions",
    "UniformNormBall",
    "approx_robustness",
    "approx_robustness_oracle",
    "assess",
    "config_from_dict",
    "contains",
    "dual_norm",
    "empirical_min_safety",
    "estimate_coverage",
    "estimate_prl",
    "fit_pca_qnorm",
    "load_distribution",
    "load_model",
    "load_report",
    "load_safeset",
    "quantile_lower",
    "random_relu_network",
    "sample",
    "sample_size",
    "safety_level",
    "solve",
    "solve_half_space",
    "solve_norm_ball",
    "sweep_lambda",
    "uniform_ball_sampler",
    "volume_penalty",
]
