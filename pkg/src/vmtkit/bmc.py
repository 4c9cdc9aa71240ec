"""Bounded model checking by unrolling, discharged one bound at a time."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseModelError, QuantifiedSystem, UnknownResult
from .model import PropertyKind, PropertySpec, TransitionSystem, VmtDocument
from .oracle import FinitePath, Lasso
from .sexpr import quote_symbol
from .solver import SolverHandle, parse_value, solve
from .terms import (
    BOOL,
    Apply,
    Sort,
    Term,
    Var,
    conjuncts,
    has_quantifier,
    map_apply,
    mk_and,
    mk_eq,
    mk_not,
    mk_or,
    rename_vars,
    sorts_in,
    subterms,
    to_smtlib,
)

LOOP_SELECTOR = "loopsel"


def escape(name: str) -> str:
    """Double every ``@`` so that escaped names never contain a lone ``@``."""
    return name.replace("@", "@@")


def timed(base: str, frame: int) -> str:
    return f"{escape(base)}@{frame}"


def untimed(name: str) -> tuple[str, int]:
    """Inverse of :func:`timed`."""
    i = len(name)
    while i > 0 and name[i - 1].isdigit():
        i -= 1
    head = name[:i]
    if not head.endswith("@") or i == len(name):
        raise ValueError(f"not a timed name: {name}")
    # count the trailing run of '@': odd length means the last one is the separator
    j = len(head)
    while j > 0 and head[j - 1] == "@":
        j -= 1
    if (len(head) - j) % 2 == 0:
        raise ValueError(f"not a timed name: {name}")
    return head[:-1].replace("@@", "@"), int(name[i:])


@dataclass
class Unrolling:
    k: int
    frames: list[dict[str, str]]
    formula: Term
    symbols: dict[str, Sort] = field(default_factory=dict)


@dataclass
class Trace:
    k: int
    states: list[dict]
    inputs: list[dict]

    def to_path(self) -> FinitePath:
        return FinitePath(self.states, self.inputs)


@dataclass
class LassoTrace:
    """``states[k]`` equals ``states[loop]``; the loop is frames loop..k-1."""

    trace: Trace
    loop: int

    def to_lasso(self) -> Lasso:
        t = self.trace
        return Lasso(FinitePath(t.states[:-1], t.inputs), self.loop)


def _system(ts: TransitionSystem | VmtDocument) -> TransitionSystem:
    return ts.system if isinstance(ts, VmtDocument) else ts


def _rigid(t: Term) -> Term:
    return map_apply(t, lambda a, args: Apply(escape(a.fn), args, a.sort))


def frame_map(ts: TransitionSystem, i: int) -> dict[str, str]:
    m = {s.current: timed(s.current, i) for s in ts.states}
    m.update({s.next: timed(s.current, i + 1) for s in ts.states})
    m.update({n: timed(n, i) for n, _ in ts.inputs})
    return m


def at_frame(t: Term, ts: TransitionSystem, i: int) -> Term:
    m = frame_map(ts, i)
    return _rigid(rename_vars(t, m.get))


def _check_qf(*terms: Term) -> None:
    for t in terms:
        if has_quantifier(t):
            raise QuantifiedSystem("quantified initial, transition or property formulas are not supported")


def unroll(ts: TransitionSystem | VmtDocument, k: int) -> Unrolling:
    """I@0 and T@0 .. T@k-1 with fresh input copies per frame."""
    if k < 0:
        raise ValueError("bound must be non-negative")
    ts = _system(ts)
    _check_qf(ts.init, ts.trans)
    parts = [at_frame(ts.init, ts, 0)]
    parts += [at_frame(ts.trans, ts, i) for i in range(k)]
    symbols: dict[str, Sort] = {}
    for i in range(k + 1):
        for s in ts.states:
            symbols[timed(s.current, i)] = s.sort
        if i < k:
            for n, srt in ts.inputs:
                symbols[timed(n, i)] = srt
    frames = [frame_map(ts, i) for i in range(k + 1)]
    return Unrolling(k, frames, mk_and(parts), symbols)


def _declarations(symbols: dict[str, Sort], formulas: list[Term]) -> list[str]:
    user_sorts: dict[str, int] = {}
    funs: dict[str, tuple] = {}
    for srt in symbols.values():
        _collect_sorts(srt, user_sorts)
    for f in formulas:
        for s in sorts_in(f):
            _collect_sorts(s, user_sorts)
        for st in subterms(f):
            if isinstance(st, Apply) and st.fn not in funs:
                funs[st.fn] = (tuple(a.sort for a in st.args), st.sort)
                for a in st.args:
                    _collect_sorts(a.sort, user_sorts)
    out = [f"(declare-sort {quote_symbol(n)} {a})" for n, a in sorted(user_sorts.items())]
    for name, (args, srt) in funs.items():
        out.append(f"(declare-fun {quote_symbol(name)} ({' '.join(map(str, args))}) {srt})")
    for name, srt in symbols.items():
        out.append(f"(declare-fun {quote_symbol(name)} () {srt})")
    return out


def _collect_sorts(s: Sort, acc: dict[str, int]) -> None:
    if not s.is_builtin:
        acc.setdefault(s.name, len(s.args))
    for a in s.args:
        _collect_sorts(a, acc)


def build_script(symbols: dict[str, Sort], assertions: list[Term], logic: str | None) -> str:
    lines = ["(set-option :produce-models true)"]
    if logic:
        lines.append(f"(set-logic {logic})")
    lines += _declarations(symbols, assertions)
    for a in assertions:
        for c in conjuncts(a):
            lines.append(f"(assert {to_smtlib(c)})")
    lines.append("(check-sat)")
    if symbols:
        lines.append("(get-value (" + " ".join(quote_symbol(n) for n in symbols) + "))")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def _run(handle: SolverHandle, symbols, assertions, k: int):
    res = solve(handle, build_script(symbols, assertions, handle.logic))
    if res.status == "unknown":
        raise UnknownResult(k)
    if res.status == "unsat":
        return None
    values = {}
    for name, srt in symbols.items():
        if name not in res.values:
            raise ParseModelError(f"solver model lacks a value for '{name}'")
        values[name] = parse_value(res.values[name], srt)
    return values


def _trace(ts: TransitionSystem, k: int, values: dict) -> Trace:
    states = [{s.current: values[timed(s.current, i)] for s in ts.states} for i in range(k + 1)]
    inputs = [{n: values[timed(n, i)] for n, _ in ts.inputs} for i in range(k)]
    return Trace(k, states, inputs)


def _require(p: PropertySpec, kind: PropertyKind) -> None:
    if p.kind is not kind:
        raise ValueError(f"property {p.index} is not a {kind} property")


def bmc_invariant(ts, p: PropertySpec, k_max: int, solver: SolverHandle, k_min: int = 0) -> Trace | None:
    """Smallest-bound path ending in a state violating ``p``; None if none up to ``k_max``."""
    _require(p, PropertyKind.INVARIANT)
    ts = _system(ts)
    _check_qf(p.formula)
    for k in range(k_min, k_max + 1):
        u = unroll(ts, k)
        bad = mk_not(at_frame(p.formula, ts, k))
        values = _run(solver, u.symbols, [u.formula, bad], k)
        if values is not None:
            return _trace(ts, k, values)
    return None


def lasso_constraint(ts: TransitionSystem, p: PropertySpec, k: int) -> tuple[Term, dict[str, Sort]]:
    sels = [Var(f"{LOOP_SELECTOR}@l{l}", BOOL) for l in range(k)]
    parts = [mk_or(sels)]
    for i in range(k):
        for j in range(i + 1, k):
            parts.append(mk_not(mk_and(sels[i], sels[j])))
    bad = [mk_not(at_frame(p.formula, ts, j)) for j in range(k)]
    for l in range(k):
        eqs = [mk_eq(Var(timed(s.current, k), s.sort), Var(timed(s.current, l), s.sort)) for s in ts.states]
        parts.append(mk_or(mk_not(sels[l]), mk_and(mk_and(eqs), mk_or(bad[l:]))))
    return mk_and(parts), {s.name: BOOL for s in sels}


def bmc_lasso_live(ts, p: PropertySpec, k_max: int, solver: SolverHandle, k_min: int = 1) -> LassoTrace | None:
    """Lasso of at most ``k_max`` steps whose loop visits a state violating ``p``.

    Bounds below ``k_min`` are skipped; a lasso of length k can always be padded
    by unrolling its loop, so one query at a large enough k decides existence.
    """
    _require(p, PropertyKind.LIVE)
    ts = _system(ts)
    _check_qf(p.formula)
    for k in range(max(k_min, 1), k_max + 1):
        u = unroll(ts, k)
        loop, sel_syms = lasso_constraint(ts, p, k)
        symbols = dict(u.symbols)
        symbols.update(sel_syms)
        values = _run(solver, symbols, [u.formula, loop], k)
        if values is not None:
            chosen = [l for l in range(k) if values[f"{LOOP_SELECTOR}@l{l}"]]
            return LassoTrace(_trace(ts, k, values), chosen[0])
    return None
