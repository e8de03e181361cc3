"""Simulation and statistical verification of amnesic step-reinforced random walks.

A step-reinforced random walk repeats, with probability p, one of its past
steps (the remembered index is drawn with weights that favour recent times
when the memory-weight family grows), and otherwise takes a fresh i.i.d.
step.  This package simulates such walks, computes their exact two-martingale
decomposition and quadratic variation per trajectory, evaluates the
closed-form diffusive-limit covariances, and verifies the limit behaviour by
reproducible Monte Carlo.
"""

__version__ = "0.1.0"

from reinforced_walk.memory import (
    MemorySpec,
    PrefixWeights,
    build_prefix,
    bojanic_ratio,
    estimate_rv_index,
    mu,
    parse_memory_spec,
    sample_memory_index,
)
from reinforced_walk.walk import (
    Regime,
    StepModel,
    Trajectory,
    WalkConfig,
    parse_step_model,
    regime_classify,
    simulate,
    standardized_path,
)
from reinforced_walk.martingale import (
    DeterministicSequences,
    MartingaleTransform,
    build_sequences,
    empirical_un_ratio,
    martingale_transform,
    quadratic_variation,
)
from reinforced_walk.limits import (
    CovarianceParams,
    LimitMatrices,
    coefficient_signs,
    covariance_params,
    nrbm_cov,
    theoretical_cov,
    vt_decomposition,
    vt_matrix,
)
from reinforced_walk.verify import (
    EnsembleSpec,
    VerificationReport,
    run_ensemble,
)

__all__ = [
    "MemorySpec",
    "PrefixWeights",
    "build_prefix",
    "bojanic_ratio",
    "estimate_rv_index",
    "mu",
    "parse_memory_spec",
    "sample_memory_index",
    "Regime",
    "StepModel",
    "Trajectory",
    "WalkConfig",
    "parse_step_model",
    "regime_classify",
    "simulate",
    "standardized_path",
    "DeterministicSequences",
    "MartingaleTransform",
    "build_sequences",
    "empirical_un_ratio",
    "martingale_transform",
    "quadratic_variation",
    "CovarianceParams",
    "LimitMatrices",
    "coefficient_signs",
    "covariance_params",
    "nrbm_cov",
    "theoretical_cov",
    "vt_decomposition",
    "vt_matrix",
    "EnsembleSpec",
    "VerificationReport",
    "run_ensemble",
    "__version__",
]
