"""One-shot sessions with an external SMT solver over the text protocol."""
from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseModelError, SolverError, SolverFailure, SolverNotFound, VmtError
from .sexpr import Atom, SList, SExpr, read_all, print_sexpr
from .sexpr import BINARY, DECIMAL, HEXADECIMAL, NUMERAL
from .terms import Sort

ENV_VAR = "VMTKIT_SOLVER"
DEFAULT_TIMEOUT = 300.0


@dataclass
class SolverHandle:
    command: list[str]
    logic: str | None = None
    timeout: float | None = DEFAULT_TIMEOUT
    transcript: list[str] = field(default_factory=list)

    @property
    def command_line(self) -> str:
        return shlex.join(self.command)


@dataclass
class SolverResult:
    status: str  # "sat", "unsat" or "unknown"
    values: dict[str, SExpr] = field(default_factory=dict)
    output: str = ""

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def fallback_command() -> list[str]:
    """The bundled Boolean-only solver."""
    return [sys.executable, "-m", "vmtkit.dpll"]


def find_solver(cmd: str | None = None, logic: str | None = None) -> SolverHandle:
    """Resolve the solver command.

    Order: explicit flag, then $VMTKIT_SOLVER, then ``z3 -in`` on PATH, then
    the bundled Boolean-only fallback (which answers ``unknown`` beyond
    propositional logic).
    """
    line = cmd or os.environ.get(ENV_VAR)
    if line:
        argv = shlex.split(line)
        if not argv:
            raise SolverNotFound("empty solver command")
        return SolverHandle(argv, logic)
    if shutil.which("z3"):
        return SolverHandle(["z3", "-in"], logic)
    return SolverHandle(fallback_command(), logic)


def solve(handle: SolverHandle, script: str) -> SolverResult:
    """Run ``script`` in a fresh solver process and parse the answer."""
    handle.transcript.append(script)
    try:
        proc = subprocess.run(
            handle.command, input=script, capture_output=True, text=True,
            timeout=handle.timeout,
        )
    except FileNotFoundError as e:
        raise SolverNotFound(f"cannot run solver '{handle.command[0]}'") from e
    except PermissionError as e:
        raise SolverNotFound(f"cannot run solver '{handle.command[0]}': {e}") from e
    except subprocess.TimeoutExpired as e:
        raise SolverError(f"solver timed out after {handle.timeout}s", transcript=script) from e
    out = proc.stdout
    handle.transcript.append(out)
    return parse_response(out, script, proc.returncode, proc.stderr)


def parse_response(out: str, script: str = "", returncode: int = 0, stderr: str = "") -> SolverResult:
    try:
        items = read_all(out)
    except VmtError:
        items = None
    if not items or not isinstance(items[0], Atom) or items[0].text not in ("sat", "unsat", "unknown"):
        detail = (out.strip() or stderr.strip() or "no output")[:200]
        raise SolverError(f"unexpected solver output: {detail}", transcript=script,
                          returncode=returncode)
    status = items[0].text
    if status != "sat":
        # get-value after unsat legitimately produces an error response
        return SolverResult(status, {}, out)
    values: dict[str, SExpr] = {}
    for item in items[1:]:
        if isinstance(item, SList) and item.head_symbol() == "error":
            raise SolverError(f"solver reported {print_sexpr(item)}", transcript=script,
                              returncode=returncode)
        if not isinstance(item, SList):
            raise ParseModelError(f"unexpected value response '{print_sexpr(item)}'")
        for pair in item:
            if not (isinstance(pair, SList) and len(pair) == 2 and isinstance(pair[0], Atom)):
                raise ParseModelError(f"malformed value binding '{print_sexpr(pair)}'")
            values[pair[0].text] = pair[1]
    return SolverResult(status, values, out)


@dataclass(frozen=True)
class ArrayValue:
    """Array model value as a default plus finitely many stored entries."""

    default: object
    entries: tuple[tuple[object, object], ...] = ()

    def lookup(self, i):
        for k, v in reversed(self.entries):
            if k == i:
                return v
        return self.default


@dataclass(frozen=True)
class RawValue:
    """Model value kept as solver text (e.g. uninterpreted sort elements)."""

    text: str


def parse_value(e: SExpr, sort: Sort):
    """Convert a get-value response term into a Python value of ``sort``."""
    if sort.is_bool:
        if isinstance(e, Atom) and e.text in ("true", "false"):
            return e.text == "true"
    elif sort.name == "Int":
        v = _number(e)
        if v is not None and v.denominator == 1:
            return int(v)
    elif sort.name == "Real":
        v = _number(e)
        if v is not None:
            return v
    elif sort.is_bv:
        if isinstance(e, Atom) and e.kind == BINARY:
            return int(e.text[2:], 2)
        if isinstance(e, Atom) and e.kind == HEXADECIMAL:
            return int(e.text[2:], 16)
        if isinstance(e, SList) and len(e) == 3 and e[0].is_symbol("_") and e[1].text.startswith("bv"):
            return int(e[1].text[2:])
    elif sort.is_array:
        return _array_value(e, sort)
    else:
        return RawValue(print_sexpr(e))
    raise ParseModelError(f"cannot read {sort} value from '{print_sexpr(e)}'")


def _number(e: SExpr) -> Fraction | None:
    if isinstance(e, Atom) and e.kind in (NUMERAL, DECIMAL):
        return Fraction(e.text)
    if isinstance(e, SList) and e.head_symbol() == "-" and len(e) == 2:
        v = _number(e[1])
        return -v if v is not None else None
    if isinstance(e, SList) and e.head_symbol() == "/" and len(e) == 3:
        a, b = _number(e[1]), _number(e[2])
        if a is not None and b:
            return a / b
    return None


def _array_value(e: SExpr, sort: Sort):
    idx, elem = sort.args
    if isinstance(e, SList) and len(e) == 2 and isinstance(e[0], SList) and e[0].head_symbol() == "as":
        return ArrayValue(parse_value(e[1], elem))
    if isinstance(e, SList) and e.head_symbol() == "store" and len(e) == 4:
        base = _array_value(e[1], sort)
        if isinstance(base, ArrayValue):
            return ArrayValue(base.default, base.entries + ((parse_value(e[2], idx), parse_value(e[3], elem)),))
    return RawValue(print_sexpr(e))


def check_available(handle: SolverHandle) -> bool:
    try:
        return solve(handle, "(check-sat)\n").status == "sat"
    except SolverFailure:
        return False
