"""Solvers for the recursion-only fragment and the portfolio driver."""
from .bmc import SymbolicUnroller, bmc, make_unroller
from .budget import Budget, Deadline, unlimited
from .ground import GroundEngine, is_ground_solvable
from .hull import affine_equalities, hull_formula
from .intervals import kleene_intervals
from .portfolio import HornSolver, certify_model, solve
from .templates import farkas_templates, grid_atoms

__all__ = [
    "Budget", "Deadline", "GroundEngine", "HornSolver", "SymbolicUnroller", "affine_equalities",
    "bmc", "certify_model", "farkas_templates", "grid_atoms", "hull_formula",
    "is_ground_solvable", "kleene_intervals", "make_unroller", "solve", "unlimited",
]
