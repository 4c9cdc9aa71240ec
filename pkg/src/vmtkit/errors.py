"""Exception hierarchy and diagnostics.

Every error carries a stable ``code`` (the class name) used in golden files
and CLI output, plus an optional source position.
"""
from __future__ import annotations

from dataclasses import dataclass


class VmtError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2

    def __init__(self, message: str = "", pos: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_diagnostic(self) -> "Diagnostic":
        line, col = self.pos if self.pos else (0, 0)
        return Diagnostic(self.code, "error", self.message, line, col)


# -- syntax ------------------------------------------------------------------

class UnbalancedParens(VmtError):
    pass


class MalformedToken(VmtError):
    pass


class DisallowedCommand(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"command '{name}' is not allowed in VMT-LIB", pos)
        self.name = name


class MalformedCommand(VmtError):
    pass


# -- elaboration ---------------------------------------------------------------

class SortMismatch(VmtError):
    def __init__(self, symbol: str, expected, found, pos=None):
        super().__init__(f"'{symbol}': expected sort {expected}, found {found}", pos)
        self.symbol = symbol
        self.expected = expected
        self.found = found


class UnknownSymbol(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"unknown symbol '{name}'", pos)
        self.name = name


class UnknownSort(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"unknown sort '{name}'", pos)
        self.name = name


class DuplicateDeclaration(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"symbol '{name}' declared twice", pos)
        self.name = name


class RecursiveDefinition(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"definition of '{name}' is recursive", pos)
        self.name = name


# -- transition system extraction ------------------------------------------------

class NextTargetUndeclared(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f":next target '{name}' is not a declared variable", pos)
        self.name = name


class NextNotInjective(VmtError):
    def __init__(self, v1: str, v2: str, target: str, pos=None):
        super().__init__(f"'{v1}' and '{v2}' share the same :next variable '{target}'", pos)
        self.v1, self.v2, self.target = v1, v2, target


class NextSortMismatch(VmtError):
    def __init__(self, current: str, next_: str, pos=None):
        super().__init__(f"'{current}' and its next '{next_}' have different sorts", pos)
        self.current, self.next = current, next_


class NextInvalid(VmtError):
    """Malformed :next usage (non-variable subject, self pairing, chains)."""


class DuplicatePropertyIndex(VmtError):
    def __init__(self, idx: int, pos=None):
        super().__init__(f"property index {idx} used more than once", pos)
        self.idx = idx


class NonBooleanAnnotation(VmtError):
    def __init__(self, attr: str, sort, pos=None):
        super().__init__(f"{attr} annotates a term of sort {sort}, expected Bool", pos)
        self.attr, self.sort = attr, sort


class BadAnnotation(VmtError):
    """Annotation with a missing or ill-formed value."""


class MixedStateVersions(VmtError):
    pass


class PropertyNotFound(VmtError):
    pass


# -- oracle ------------------------------------------------------------------------

class UnsupportedForOracle(VmtError):
    pass


class DomainOverflow(VmtError):
    pass


# -- bmc / solver --------------------------------------------------------------------

class QuantifiedSystem(VmtError):
    pass


class EqualityUnsupported(VmtError):
    pass


class SolverFailure(VmtError):
    exit_code = 3


class SolverNotFound(SolverFailure):
    pass


class SolverError(SolverFailure):
    def __init__(self, message: str, transcript: str = "", returncode: int | None = None):
        super().__init__(message)
        self.transcript = transcript
        self.returncode = returncode


class ParseModelError(SolverFailure):
    pass


class UnknownResult(VmtError):
    exit_code = 4

    def __init__(self, k: int):
        super().__init__(f"solver returned unknown at bound {k}")
        self.k = k


# -- converters ----------------------------------------------------------------------

class LivePropertyUnsupported(VmtError):
    def __init__(self, idx: int):
        super().__init__(f"property {idx} is a live property; only invariants are supported")
        self.idx = idx


class UnsupportedSort(VmtError):
    def __init__(self, sort, pos=None):
        super().__init__(f"sort {sort} is not supported by this converter", pos)
        self.sort = sort


class UnsupportedSymbol(VmtError):
    def __init__(self, name: str, pos=None):
        super().__init__(f"symbol '{name}' is not supported by this converter", pos)
        self.name = name


class MalformedBtor(VmtError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}", (lineno, 1))
        self.lineno = lineno
        self.reason = reason


class UnsupportedNode(VmtError):
    def __init__(self, kind: str, lineno: int = 0):
        super().__init__(f"unsupported BTOR2 node '{kind}'", (lineno, 1) if lineno else None)
        self.kind = kind


# -- ltl -------------------------------------------------------------------------------

class LtlSyntaxError(VmtError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}", (1, position + 1))
        self.position = position


class AtomNotBoolean(VmtError):
    pass


class AtomUsesInput(VmtError):
    def __init__(self, name: str):
        super().__init__(f"LTL atom mentions input variable '{name}'")
        self.name = name


class AtomUsesNextVar(VmtError):
    def __init__(self, name: str):
        super().__init__(f"LTL atom mentions next-state variable '{name}'")
        self.name = name


class IndexInUse(VmtError):
    def __init__(self, idx: int):
        super().__init__(f"property index {idx} is already in use")
        self.idx = idx


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    message: str
    line: int = 0
    col: int = 0

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.code}: {self.message}"
