"""Asymmetric mutual information toolkit.

Bandwidth-free density estimation via the empirical characteristic function,
copula-based MI and entropy plug-ins, the entropy ratio / AMI / delta
statistics with data-splitting inference, a permutation independence test,
and reproducible synthetic benchmark generators.
"""

from .grid import (
    DensityEstimate,
    FrequencyGrid,
    GridConfig,
    density_at,
    integrate_box,
)
from .ecf import (
    EcfGrid,
    FilterMask,
    FixedPointResult,
    TransformKernelGrid,
    build_filter,
    ecf_eval,
    fixed_point_iterate,
    transform_kernel,
)
from .density import (
    SelfConsistentDensity,
    SilvermanKDE,
    baseline_kde_fit,
    sce_fit,
)
from .copula import (
    PseudoObservations,
    ecdf_transform,
    fit_copula_density,
    pseudo_observations,
    transform_with_reference,
)
from .estimators import (
    AmiEstimator,
    AmiReport,
    SplitConfig,
    SplitFit,
    ami_delta,
    asymptotic_se,
    entropy_ratio,
    full_pipeline,
    plugin_entropy,
    plugin_mi,
    split,
    variance_components,
)
from .inference import (
    AsymmetryTestResult,
    PermutationTestResult,
    asymmetry_test,
    permutation_independence_test,
)
from .synthgen import (
    CopulaSpec,
    MarginalSpec,
    PatternSpec,
    gen_copula_sample,
    gen_pattern,
    marginal_quantile,
    sample_copula,
)

__version__ = "0.1.0"

__all__ = [
    "GridConfig", "FrequencyGrid", "DensityEstimate", "density_at", "integrate_box",
    "EcfGrid", "FilterMask", "TransformKernelGrid", "FixedPointResult",
    "ecf_eval", "build_filter", "transform_kernel", "fixed_point_iterate",
    "sce_fit", "baseline_kde_fit", "SelfConsistentDensity", "SilvermanKDE",
    "PseudoObservations", "ecdf_transform", "transform_with_reference",
    "pseudo_observations", "fit_copula_density",
    "SplitConfig", "SplitFit", "AmiReport", "split", "plugin_mi", "plugin_entropy",
    "entropy_ratio", "ami_delta", "variance_components", "asymptotic_se",
    "full_pipeline", "AmiEstimator",
    "PermutationTestResult", "AsymmetryTestResult",
    "permutation_independence_test", "asymmetry_test",
    "PatternSpec", "MarginalSpec", "CopulaSpec",
    "gen_pattern", "sample_copula", "marginal_quantile", "gen_copula_sample",
    "__version__",
]
