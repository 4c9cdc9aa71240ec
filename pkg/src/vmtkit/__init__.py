"""Toolkit for VMT-LIB transition systems: parsing, checking and format conversion."""
from .bmc import bmc_invariant, bmc_lasso_live, unroll
from .errors import Diagnostic, VmtError
from .ltl import ltl_to_vmt, parse_ltl
from .model import (
    PropertyKind,
    TransitionSystem,
    VmtDocument,
    check_text,
    load_vmt,
    print_vmt,
    validate,
)
from .oracle import DomainBounds, check_invariant_explicit, check_live_explicit
from .solver import find_solver

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "DomainBounds",
    "PropertyKind",
    "TransitionSystem",
    "VmtDocument",
    "VmtError",
    "bmc_invariant",
    "bmc_lasso_live",
    "check_invariant_explicit",
    "check_live_explicit",
    "check_text",
    "find_solver",
    "load_vmt",
    "ltl_to_vmt",
    "parse_ltl",
    "print_vmt",
    "unroll",
    "validate",
]
