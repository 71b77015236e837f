"""Convergence-speed analysis of the Arimoto-Blahut algorithm.

The package solves for capacity-achieving input distributions, classifies
the input symbols at the optimum, computes the Jacobian and Hessian of the
update map there, and predicts (and measures) whether the iteration
converges exponentially or at rate ``1/N``.
"""

from .analysis import (
    DerivativeTensors,
    EigenvalueCollisionError,
    SingularBlockError,
    SpectralReport,
    bmax_tests,
    derivative_tensors,
    hessian,
    jacobian,
    spectral_report,
)
from .arimoto import (
    FixedPointReport,
    IterationSettings,
    ab_step,
    analyze_at,
    extended_F,
    solve_capacity,
)
from .catalog import channel_names, get_channel, identity_channel, stated_optimum
from .channel import (
    ChannelError,
    ChannelMatrix,
    MatrixParseError,
    divergences,
    kuhn_tucker_check,
    mutual_information,
    output_distribution,
    parse_matrix,
    read_matrix,
)
from .recurrence import (
    ReducedModel,
    build_reduced_model,
    canonical_iterate,
    scalar_logistic,
    second_order_iterate,
)
from .speed import (
    ConvergenceTrace,
    RegimePrediction,
    fit_empirical_rate,
    mi_gap_rate,
    predict_regime,
    run_trace,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelError",
    "ChannelMatrix",
    "ConvergenceTrace",
    "DerivativeTensors",
    "EigenvalueCollisionError",
    "FixedPointReport",
    "IterationSettings",
    "MatrixParseError",
    "ReducedModel",
    "RegimePrediction",
    "SingularBlockError",
    "SpectralReport",
    "ab_step",
    "analyze_at",
    "bmax_tests",
    "build_reduced_model",
    "canonical_iterate",
    "channel_names",
    "derivative_tensors",
    "divergences",
    "extended_F",
    "fit_empirical_rate",
    "get_channel",
    "hessian",
    "identity_channel",
    "jacobian",
    "kuhn_tucker_check",
    "mi_gap_rate",
    "mutual_information",
    "output_distribution",
    "parse_matrix",
    "predict_regime",
    "read_matrix",
    "run_trace",
    "scalar_logistic",
    "second_order_iterate",
    "solve_capacity",
    "spectral_report",
    "stated_optimum",
]
