"""jetsym: symbolic verification of Lie, conditional and hidden symmetries of PDEs."""

from .spaces import Coordinate, JetSpace, declare_space
from .expr import AppliedFunction, Expression, FunctionBinding
from .dsl import parse_expression, parse_vector_field, print_expression
from .jets import contract, total_derivative
from .fields import ProlongedField, VectorField, prolong

__version__ = "0.1.0"

__all__ = [
    "AppliedFunction",
    "Coordinate",
    "Expression",
    "FunctionBinding",
    "JetSpace",
    "ProlongedField",
    "VectorField",
    "contract",
    "declare_space",
    "parse_expression",
    "parse_vector_field",
    "print_expression",
    "prolong",
    "total_derivative",
]
