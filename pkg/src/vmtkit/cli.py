"""Command-line interface: ``vmtkit <subcommand> FILE [options]``.

Exit codes: 0 success or no counterexample up to the bound, 1 counterexample
found, 2 input or validation error, 3 solver or environment error, 4 unknown.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .errors import PropertyNotFound, VmtError
from .model import PropertyKind, VmtDocument, load_vmt, print_vmt, validate
from .smtlib import elaborate, parse_script

EXIT_OK, EXIT_CEX, EXIT_INPUT, EXIT_SOLVER, EXIT_UNKNOWN = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}", EXIT_INPUT)


def _int_bounds(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got '{text}'") from None
    if not sep or lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"expected LO:HI with LO <= HI, got '{text}'")
    return lo_i, hi_i


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got '{text}'") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got '{text}'")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vmtkit", description="Parse, check, convert and verify VMT-LIB files.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def cmd(name: str, help_: str, prop: bool = False, bound: int | None = None, solver: bool = False):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("input", help="input file, or - for standard input")
        sp.add_argument("-o", "--output", help="output file (default: standard output)")
        sp.add_argument("-v", "--verbose", action="store_true", help="print solver transcripts and details")
        if prop:
            sp.add_argument("-p", "--property", type=int, help="property index (default: lowest of the relevant kind)")
        if bound is not None:
            sp.add_argument("-k", "--bound", type=_nonneg, default=bound, help=f"maximal bound (default {bound})")
        if solver:
            sp.add_argument("--solver-cmd", help="solver command line reading SMT-LIB on standard input "
                                                  "(default: $VMTKIT_SOLVER, else 'z3 -in')")
        return sp

    cmd("check", "Parse and validate; print diagnostics.")
    cmd("print", "Print the normalized VMT-LIB form.")
    cmd("bmc", "Bounded model checking of an invariant property.", prop=True, bound=10, solver=True)
    cmd("live", "Lasso search for a live property counterexample.", prop=True, bound=10, solver=True)
    sim = cmd("sim", "Explicit-state check on finite domains.", prop=True, bound=20)
    sim.add_argument("--int-bounds", type=_int_bounds, default=(0, 7), metavar="LO:HI",
                     help="domain of every Int variable (default 0:7)")
    cmd("to-horn", "Convert an invariant property to constrained Horn clauses.", prop=True)
    cmd("to-btor", "Convert to BTOR2.")
    cmd("from-btor", "Convert BTOR2 to VMT-LIB.")
    cmd("to-nuxmv", "Convert to the SMV language.")
    ltl = cmd("ltl-compile", "Compile an LTL formula into a live property on a product system.")
    grp = ltl.add_mutually_exclusive_group(required=True)
    grp.add_argument("-f", "--formula", help="LTL formula text")
    grp.add_argument("--formula-file", help="file containing the LTL formula")
    ltl.add_argument("-i", "--index", type=_nonneg, help="index of the new live property (default: next free)")
    return p


# ---------------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise CliError(f"cannot read '{path}': {e}", EXIT_INPUT) from e


def _write(args, text: str, out) -> None:
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            raise CliError(f"cannot write '{args.output}': {e}", EXIT_INPUT) from e
    else:
        out.write(text)


def _name(args) -> str:
    return "<stdin>" if args.input == "-" else args.input


def _load(args, err) -> VmtDocument:
    doc = load_vmt(_read(args.input))
    diags = validate(doc)
    errors = [d for d in diags if d.is_error]
    for d in diags:
        if d.is_error or args.verbose:
            err.write(d.format(_name(args)) + "\n")
    if errors:
        raise CliError(f"{_name(args)}: {len(errors)} validation error(s)", EXIT_INPUT)
    return doc


def _property(doc: VmtDocument, idx: int | None, kind: PropertyKind):
    if idx is None:
        return doc.default_property(kind)
    p = doc.property(idx)
    if p.kind is not kind:
        raise PropertyNotFound(f"property {idx} is a {p.kind} property, expected {kind}")
    return p


def format_value(v, sort=None) -> str:
    from .solver import ArrayValue, RawValue
    from .terms import format_value as fmt

    if isinstance(v, RawValue):
        return v.text
    if isinstance(v, ArrayValue):
        parts = [f"default {format_value(v.default)}"]
        parts += [f"{format_value(i)} -> {format_value(x)}" for i, x in v.entries]
        return "[" + ", ".join(parts) + "]"
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if sort is not None:
        return fmt(v, sort)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def format_trace(doc: VmtDocument, states: list[dict], inputs: list[dict], loop: int | None = None) -> str:
    """``step i:`` blocks with ``name = value`` lines; inputs belong to the step they leave."""
    sorts = doc.variable_sorts()
    lines = []
    for i, s in enumerate(states):
        lines.append(f"step {i}:")
        for name, v in s.items():
            lines.append(f"  {name} = {format_value(v, sorts.get(name))}")
        if i < len(inputs):
            for name, v in inputs[i].items():
                lines.append(f"  {name} = {format_value(v, sorts.get(name))}")
    if loop is not None:
        lines.append(f"loop-start: {loop}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def _cmd_check(args, out, err) -> int:
    doc = load_vmt(_read(args.input))
    diags = validate(doc)
    for d in diags:
        err.write(d.format(_name(args)) + "\n")
    return EXIT_INPUT if any(d.is_error for d in diags) else EXIT_OK


def _cmd_print(args, out, err) -> int:
    _write(args, print_vmt(_load(args, err)), out)
    return EXIT_OK


def _solver(args, doc):
    from .solver import find_solver

    return find_solver(args.solver_cmd, doc.logic)


def _cmd_bmc(args, out, err) -> int:
    from .bmc import bmc_invariant

    doc = _load(args, err)
    p = _property(doc, args.property, PropertyKind.INVARIANT)
    handle = _solver(args, doc)
    try:
        trace = bmc_invariant(doc, p, args.bound, handle)
    finally:
        if args.verbose:
            err.write("\n".join(handle.transcript) + "\n")
    if trace is None:
        _write(args, f"no counterexample up to bound {args.bound} for invariant property {p.index}\n", out)
        return EXIT_OK
    text = f"counterexample for invariant property {p.index} at bound {trace.k}\n"
    _write(args, text + format_trace(doc, trace.states, trace.inputs), out)
    return EXIT_CEX


def _cmd_live(args, out, err) -> int:
    from .bmc import bmc_lasso_live

    doc = _load(args, err)
    p = _property(doc, args.property, PropertyKind.LIVE)
    handle = _solver(args, doc)
    try:
        lasso = bmc_lasso_live(doc, p, args.bound, handle)
    finally:
        if args.verbose:
            err.write("\n".join(handle.transcript) + "\n")
    if lasso is None:
        _write(args, f"no lasso counterexample up to bound {args.bound} for live property {p.index}\n", out)
        return EXIT_OK
    t = lasso.trace
    text = f"lasso counterexample for live property {p.index} at bound {t.k}\n"
    _write(args, text + format_trace(doc, t.states, t.inputs, lasso.loop), out)
    return EXIT_CEX


def _cmd_sim(args, out, err) -> int:
    from .oracle import DomainBounds, check_invariant_explicit, check_live_explicit

    doc = _load(args, err)
    bounds = DomainBounds(args.int_bounds)
    if args.property is None:
        if not doc.properties:
            raise PropertyNotFound("document has no properties")
        p = min(doc.properties, key=lambda q: q.index)
    else:
        p = doc.property(args.property)
    if p.kind is PropertyKind.INVARIANT:
        res = check_invariant_explicit(doc, p, bounds, args.bound)
        if res.counterexample is None:
            how = "reachable set exhausted" if res.exhausted else f"search stopped at depth {args.bound}"
            _write(args, f"no counterexample for invariant property {p.index} ({how}, "
                         f"{res.reachable} states)\n", out)
            return EXIT_OK
        path = res.counterexample
        text = f"counterexample for invariant property {p.index} at depth {len(path) - 1}\n"
        _write(args, text + format_trace(doc, path.states, path.inputs), out)
        return EXIT_CEX
    lasso = check_live_explicit(doc, p, bounds)
    if lasso is None:
        _write(args, f"no lasso counterexample for live property {p.index} on the bounded instance\n", out)
        return EXIT_OK
    text = f"lasso counterexample for live property {p.index}\n"
    _write(args, text + format_trace(doc, lasso.stem.states, lasso.stem.inputs, lasso.loop_start), out)
    return EXIT_CEX


def _cmd_to_horn(args, out, err) -> int:
    from .converters.horn import vmt_to_horn

    doc = _load(args, err)
    idx = args.property
    if idx is None:
        idx = doc.default_property(PropertyKind.INVARIANT).index
    _write(args, vmt_to_horn(doc, idx).render(), out)
    return EXIT_OK


def _cmd_to_btor(args, out, err) -> int:
    from .converters.btor import vmt_to_btor

    _write(args, vmt_to_btor(_load(args, err)).render(), out)
    return EXIT_OK


def _cmd_from_btor(args, out, err) -> int:
    from .converters.btor import btor_to_vmt

    _write(args, print_vmt(btor_to_vmt(_read(args.input))), out)
    return EXIT_OK


def _cmd_to_nuxmv(args, out, err) -> int:
    from .converters.smv import vmt_to_nuxmv

    _write(args, vmt_to_nuxmv(_load(args, err)), out)
    return EXIT_OK


def _cmd_ltl(args, out, err) -> int:
    from .ltl import ltl_to_vmt, parse_ltl
    from .model import extract

    text = _read(args.input)
    st, defs = elaborate(parse_script(text))
    doc = extract((st, defs))
    diags = [d for d in validate(doc) if d.is_error]
    for d in diags:
        err.write(d.format(_name(args)) + "\n")
    if diags:
        return EXIT_INPUT
    formula = args.formula if args.formula is not None else _read(args.formula_file).strip()
    phi = parse_ltl(formula, doc, st)
    idx = args.index
    if idx is None:
        idx = max((p.index for p in doc.properties), default=-1) + 1
    _write(args, print_vmt(ltl_to_vmt(doc, phi, idx)), out)
    return EXIT_OK


COMMANDS = {
    "check": _cmd_check, "print": _cmd_print, "bmc": _cmd_bmc, "live": _cmd_live,
    "sim": _cmd_sim, "to-horn": _cmd_to_horn, "to-btor": _cmd_to_btor,
    "from-btor": _cmd_from_btor, "to-nuxmv": _cmd_to_nuxmv, "ltl-compile": _cmd_ltl,
}


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = None
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out, err)
    except CliError as e:
        err.write(f"error: {e}\n")
        return e.code
    except SystemExit as e:
        # --help and --version exit through argparse
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT
    except VmtError as e:
        err.write(e.to_diagnostic().format(_name(args) if args else "<input>") + "\n")
        transcript = getattr(e, "transcript", "")
        if transcript and args is not None and args.verbose:
            err.write(transcript + "\n")
        return e.exit_code
    except RecursionError:
        err.write("error: input nesting is too deep\n")
        return EXIT_INPUT
    except KeyboardInterrupt:
        err.write("interrupted\n")
        return EXIT_SOLVER
    except Exception as e:  # keep the exit-code contract total
        err.write(f"internal error: {type(e).__name__}: {e}\n")
        return EXIT_SOLVER


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))
