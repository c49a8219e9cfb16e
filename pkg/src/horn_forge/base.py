"""Estimator plumbing shared by generators and solvers.

Generators are transformers (``TransitionSystem -> HornSystem``), solvers are
estimators whose ``fit`` consumes a Horn system and leaves fitted attributes
with a trailing underscore, so both compose with scikit-learn utilities such
as ``Pipeline``, ``clone`` and ``get_params``.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import InputError, UnsupportedFragment
from .horn import HornSystem, well_formed
from .program import TransitionSystem, validate_for

__all__ = [
    "BaseEstimator", "TransformerMixin", "check_horn_system", "check_is_fitted",
    "check_transition_system",
]


def check_transition_system(ts, schema: str | None = None, *, bounded: bool = False
                            ) -> TransitionSystem:
    if not isinstance(ts, TransitionSystem):
        raise InputError(f"expected a TransitionSystem, got {type(ts).__name__}")
    if schema is not None:
        missing = validate_for(ts, schema)
        if missing:
            raise InputError(f"missing roles: {', '.join(missing)}")
    if bounded and not ts.is_bounded:
        loose = [v.name for v in ts.vars if not (v.is_int and v.bounds is not None)]
        raise InputError(f"variables without integer bounds: {', '.join(loose)}")
    return ts


def check_horn_system(hs, *, allow_exists: bool = True, allow_wf: bool = True) -> HornSystem:
    if not isinstance(hs, HornSystem):
        raise InputError(f"expected a HornSystem, got {type(hs).__name__}")
    diags = well_formed(hs)
    if diags:
        raise InputError("ill-formed Horn system: " + "; ".join(diags))
    if not allow_exists and hs.has_exists:
        raise UnsupportedFragment("existential clause heads are not supported here")
    if not allow_wf and hs.wf_marks:
        raise UnsupportedFragment("well-foundedness marks are not supported here")
    return hs
