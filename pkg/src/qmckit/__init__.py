"""Numerics for q-hypergeometric equations of degree 2 and their q-middle convolutions."""
from .errors import QMCError
from .jackson import QParams
from .qmc import MatrixTuple, qconvolve, qmiddle_convolve, reduce_to_scalar
from .qseries import Truncation, qpoch_finite, qpoch_infinite, qappell_phi1, rphi, theta_q
from .solutions import SolutionFamily, Tag, eval_solution
from .variant import ScalarQDiffEq, VariantParams

__all__ = [
    "MatrixTuple",
    "QMCError",
    "QParams",
    "ScalarQDiffEq",
    "SolutionFamily",
    "Tag",
    "Truncation",
    "VariantParams",
    "eval_solution",
    "qappell_phi1",
    "qconvolve",
    "qmiddle_convolve",
    "qpoch_finite",
    "qpoch_infinite",
    "reduce_to_scalar",
    "rphi",
    "theta_q",
]
