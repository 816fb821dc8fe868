"""q-calculus kernel regression: q-kernels, estimators, theory and Monte Carlo checks."""

from .errors import (
    DegenerateVariance,
    DivergentSeries,
    DomainError,
    InvalidDensity,
    NonFiniteEvaluation,
    ParameterError,
    PositivityViolation,
    QKernelError,
    TruncationIncomplete,
)
from .qcore import (
    QParam,
    SeriesPolicy,
    q_exp_big,
    q_exp_small,
    q_factorial,
    q_gauss_series,
    q_number,
    q_pochhammer,
    sup_norm,
    tsallis_exp,
    tsallis_ln,
)
from .qcalc import jackson_integral, jackson_integral_improper, q_derivative, q_derivative_iter, q_taylor
from .kernels import QKernel, make_kernel, make_q_gaussian, make_q_poly
from .estim import EstimatorConfig, EstimateSet, Sample, estimate_gamma, estimate_regression, sup_error

__version__ = "0.1.0"
