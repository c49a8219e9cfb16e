"""Generate, solve and certify constrained Horn clause systems for transition systems."""
from .certify import check_model, oracle
from .generate import SchemaConfig, generate
from .horn import emit_smtlib, parse_smtlib_horn
from .model import Refuted, Solved, Unknown, format_model, parse_model
from .program import load_program, parse_program
from .solve import Budget, solve

__version__ = "0.1.0"

__all__ = [
    "Budget", "Refuted", "SchemaConfig", "Solved", "Unknown", "check_model", "emit_smtlib",
    "format_model", "generate", "load_program", "oracle", "parse_model", "parse_program",
    "parse_smtlib_horn", "solve",
]
