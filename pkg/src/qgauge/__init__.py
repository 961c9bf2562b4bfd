"""Exact symbolic calculus for graded manifolds with Q-structures."""

from .scalar import Scalar, Poly, ZeroDivisorError, EvaluationPole
from .graded import (
    Chart,
    Derivation,
    GradedCoordinate,
    Superfunction,
    apply,
    commutator,
    degree_of,
    derived_bracket,
    is_q_structure,
    mul,
)

__all__ = [
    "Scalar",
    "Poly",
    "ZeroDivisorError",
    "EvaluationPole",
    "Chart",
    "Derivation",
    "GradedCoordinate",
    "Superfunction",
    "apply",
    "commutator",
    "degree_of",
    "derived_bracket",
    "is_q_structure",
    "mul",
]

__version__ = "0.1.0"
