"""Symbolic-numeric engine for Colombeau generalized functions."""

from .algebra import (
    GenNumber,
    GenPoint,
    Net,
    combine,
    compose,
    const_net,
    derive,
    dilate,
    equals,
    eval_point,
    moderateness,
    negligibility,
    nonneg_consistent,
    strictly_positive,
    translate,
    zero_net,
)
from .analysis import TestFunction, associate, integrate_abs, pair
from .asymptotics import CompactSet, DecayVerdict, EpsGrid, fit_order, sample_sup
from .defaults import DEFAULTS
from .embedding import Mollifier, build_mollifier, embed
from .errors import (
    CBoundednessViolation,
    DifferentiationError,
    DimensionMismatch,
    EpsnetError,
    EvaluationError,
    ExprSyntaxError,
    GridMismatch,
    InsufficientData,
    MollifierError,
    PreconditionViolated,
    ScenarioError,
    UnknownIdentifier,
)
from .expr import derivative, evaluate_array
from .homogeneity import (
    HomogeneityQuery,
    associative_homogeneity,
    euler_associated,
    euler_strong,
    homogeneous_extension,
    polynomial_coefficients,
    radial_factorization_check,
    scaling_invariance,
    strong_homogeneity,
    tempered_check,
    tempered_representative,
    translation_invariance,
    weak_homogeneity,
)
from .parse import parse
from .zerodiv import build_witness, find_small_windows, zero_divisor_verdict

__version__ = "0.1.0"
