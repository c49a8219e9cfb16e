"""Horn clause intermediate representation and SMT-LIB2 interop."""
from .ir import (FALSE_HEAD, Clause, ExistsHead, FalseHead, HornSystem, PredicateAtom,
                 PredicateSymbol, WfMark, format_system, well_formed)
from .smtlib import emit_smtlib, isomorphic, parse_smtlib_horn

__all__ = [
    "FALSE_HEAD", "Clause", "ExistsHead", "FalseHead", "HornSystem", "PredicateAtom",
    "PredicateSymbol", "WfMark", "emit_smtlib", "format_system", "isomorphic",
    "parse_smtlib_horn", "well_formed",
]
