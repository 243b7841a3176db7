"""Fiducial inference for a single binomial proportion or Poisson rate.

Draws come from a two-stage sampler: a primary uniform value first, then a
parameter value from the likelihood-weighted slice of parameter values that
reproduce the observed count under that primary value.
"""

import warnings

__version__ = "0.1.0"

# numba probes for TBB and warns when the installed one is too old; the
# OpenMP/workqueue fallback is fine
warnings.filterwarnings("ignore", message="The TBB threading layer")

from .analysis import (
    ConvergenceReport,
    Histogram,
    KsReport,
    SensitivityReport,
    convergence_study,
    histogram,
    ks_distance,
    sensitivity_sweep,
)
from .densities import (
    ConditionalSliceDensity,
    GpdDescriptor,
    LpdDescriptor,
    ReferencePosterior,
    build_slice,
    lpd_eval,
    posterior_cdf,
    posterior_pdf,
    reference_posterior,
    slice_cdf,
    slice_pdf,
    slice_quantile,
    slice_sample,
)
from .errors import (
    ConditionViolated,
    DomainError,
    DrawFailure,
    EmptySample,
    EmptySupport,
    FiducialError,
    MaxIterExceeded,
    NonBracketing,
    NonFinite,
    NormalizerUnderflow,
    SolverFailure,
)
from .model import DiscreteSamplingScenario, ParameterDomain, PrimaryRvSpec, cdf, forward_map, pmf
from .numerics import Bracket, Tolerance, bisect_monotone, integrate_adaptive, reg_inc_beta, reg_lower_gamma
from .preimage import (
    ArgumentKind,
    PostDataSupport,
    PreimageInterval,
    check_condition_2a,
    check_condition_2b,
    classify_argument,
    post_data_support,
    preimage_interval,
)
from .sampler import FiducialSample, SamplerConfig, draw_fiducial, fiducial_pdf_numeric, numeric_fiducial_cdf

__all__ = [
    "ArgumentKind",
    "Bracket",
    "ConditionViolated",
    "ConditionalSliceDensity",
    "ConvergenceReport",
    "DiscreteSamplingScenario",
    "DomainError",
    "DrawFailure",
    "EmptySample",
    "EmptySupport",
    "FiducialError",
    "FiducialSample",
    "GpdDescriptor",
    "Histogram",
    "KsReport",
    "LpdDescriptor",
    "MaxIterExceeded",
    "NonBracketing",
    "NonFinite",
    "NormalizerUnderflow",
    "ParameterDomain",
    "PostDataSupport",
    "PreimageInterval",
    "PrimaryRvSpec",
    "ReferencePosterior",
    "SamplerConfig",
    "SensitivityReport",
    "SolverFailure",
    "Tolerance",
    "bisect_monotone",
    "build_slice",
    "cdf",
    "check_condition_2a",
    "check_condition_2b",
    "classify_argument",
    "convergence_study",
    "draw_fiducial",
    "fiducial_pdf_numeric",
    "forward_map",
    "histogram",
    "integrate_adaptive",
    "ks_distance",
    "lpd_eval",
    "numeric_fiducial_cdf",
    "pmf",
    "post_data_support",
    "posterior_cdf",
    "posterior_pdf",
    "preimage_interval",
    "reference_posterior",
    "reg_inc_beta",
    "reg_lower_gamma",
    "sensitivity_sweep",
    "slice_cdf",
    "slice_pdf",
    "slice_quantile",
    "slice_sample",
]
