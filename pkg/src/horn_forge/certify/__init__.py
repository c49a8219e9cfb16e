"""Certificate checking and the brute-force ground-truth oracle."""
from .check import (ClauseReport, certify_model, check_clause, check_closed_set,
                    check_derivation, check_evidence, check_lasso, check_model, derived_fact,
                    ground_points, model_holds)
from .oracle import OracleVerdict, oracle

__all__ = [
    "ClauseReport", "OracleVerdict", "certify_model", "check_clause", "check_closed_set",
    "check_derivation", "check_evidence", "check_lasso", "check_model", "derived_fact",
    "ground_points", "model_holds", "oracle",
]
