"""Transition systems and properties extracted from VMT-LIB annotations."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .errors import (
    BadAnnotation,
    Diagnostic,
    DuplicatePropertyIndex,
    MixedStateVersions,
    NextInvalid,
    NextNotInjective,
    NextSortMismatch,
    NextTargetUndeclared,
    NonBooleanAnnotation,
    PropertyNotFound,
    VmtError,
)
from .sexpr import NUMERAL, SYMBOL, Atom, quote_symbol
from .smtlib import (
    Command,
    FunDecl,
    FunDef,
    SortDecl,
    SymbolTable,
    elaborate,
    expand_defines,
    parse_script,
)
from .terms import (
    BOOL,
    TRUE,
    Annotated,
    App,
    Sort,
    Term,
    Var,
    applied_functions,
    free_vars,
    rename_vars,
    to_smtlib,
)


class PropertyKind(enum.Enum):
    INVARIANT = "invar-property"
    LIVE = "live-property"

    def __str__(self) -> str:
        return "invariant" if self is PropertyKind.INVARIANT else "live"


@dataclass(frozen=True)
class StateVariable:
    current: str
    next: str
    sort: Sort

    @property
    def current_var(self) -> Var:
        return Var(self.current, self.sort)

    @property
    def next_var(self) -> Var:
        return Var(self.next, self.sort)


@dataclass(frozen=True)
class TransitionSystem:
    states: tuple[StateVariable, ...]
    inputs: tuple[tuple[str, Sort], ...]
    init: Term = TRUE
    trans: Term = TRUE

    @property
    def current_names(self) -> set[str]:
        return {s.current for s in self.states}

    @property
    def next_names(self) -> set[str]:
        return {s.next for s in self.states}

    @property
    def input_names(self) -> set[str]:
        return {n for n, _ in self.inputs}

    def next_of(self) -> dict[str, str]:
        return {s.current: s.next for s in self.states}

    def current_of(self) -> dict[str, str]:
        return {s.next: s.current for s in self.states}


@dataclass(frozen=True)
class PropertySpec:
    kind: PropertyKind
    index: int
    formula: Term


@dataclass(frozen=True)
class VmtDocument:
    system: TransitionSystem
    properties: tuple[PropertySpec, ...] = ()
    sorts: tuple[SortDecl, ...] = ()
    functions: tuple[FunDecl, ...] = ()
    logic: str | None = None
    symbol_order: tuple[str, ...] = ()
    # provenance, not part of structural identity
    positions: dict = field(default_factory=dict, compare=False, repr=False)
    unused_defines: tuple[str, ...] = field(default=(), compare=False, repr=False)
    warnings: tuple[Diagnostic, ...] = field(default=(), compare=False, repr=False)

    def property(self, index: int) -> PropertySpec:
        for p in self.properties:
            if p.index == index:
                return p
        raise PropertyNotFound(f"no property with index {index}")

    def default_property(self, kind: PropertyKind) -> PropertySpec:
        """Lowest-index property of the given kind."""
        cands = sorted((p for p in self.properties if p.kind is kind), key=lambda p: p.index)
        if not cands:
            raise PropertyNotFound(f"document has no {kind} property")
        return cands[0]

    def symbols(self) -> set[str]:
        names = set(self.symbol_order)
        names |= {s.current for s in self.system.states} | {s.next for s in self.system.states}
        names |= self.system.input_names
        names |= {f.name for f in self.functions}
        return names

    def variable_sorts(self) -> dict[str, Sort]:
        out = {}
        for s in self.system.states:
            out[s.current] = s.sort
            out[s.next] = s.sort
        out.update(dict(self.system.inputs))
        return out


# ---------------------------------------------------------------------------
# extraction


def _chain(body: Term) -> tuple[Term, list[tuple[str, object]]]:
    attrs: list = []
    while isinstance(body, Annotated):
        attrs.extend(body.attrs)
        body = body.term
    return body, attrs


def _index_value(attr: str, val, pos) -> int:
    if isinstance(val, Atom) and val.kind == NUMERAL:
        return int(val.text)
    raise BadAnnotation(f"{attr} requires a non-negative integer index", pos)


def extract(commands: list[Command] | tuple[SymbolTable, list]) -> VmtDocument:
    """Build a VmtDocument from parsed (or already elaborated) commands."""
    if isinstance(commands, tuple):
        st, defs = commands
    else:
        st, defs = elaborate(commands)
    cache: dict = {}
    pairs: dict[str, tuple[str, tuple]] = {}
    inits: list[Term] = []
    transs: list[Term] = []
    props: list[PropertySpec] = []
    positions: dict = {}
    annotated: list[str] = []
    variables = {d.name: d for d in st.variables()}

    for d in defs:
        inner, attrs = _chain(d.body)
        ours = [(k, v) for k, v in attrs if k in (":next", ":init", ":trans", ":invar-property", ":live-property")]
        if not ours:
            continue
        if d.params:
            raise BadAnnotation(f"annotated definition '{d.name}' must not take parameters", d.pos)
        annotated.append(d.name)
        for k, v in ours:
            if k == ":next":
                if not (isinstance(inner, Var) and inner.name in variables):
                    raise NextInvalid(":next must annotate a declared variable", d.pos)
                if not (isinstance(v, Atom) and v.kind == SYMBOL):
                    raise BadAnnotation(":next requires a symbol", d.pos)
                target = v.text
                if target not in variables:
                    raise NextTargetUndeclared(target, d.pos)
                prev = pairs.get(inner.name)
                if prev is not None and prev[0] != target:
                    raise NextInvalid(f"'{inner.name}' has two :next variables", d.pos)
                pairs[inner.name] = (target, d.pos)
                continue
            if inner.sort != BOOL:
                raise NonBooleanAnnotation(k, inner.sort, d.pos)
            term = expand_defines(inner, st, cache)
            if k in (":init", ":trans"):
                if v is not None and not (isinstance(v, Atom) and v.is_symbol("true")):
                    raise BadAnnotation(f"{k} accepts only the dummy value true", d.pos)
                if k == ":init":
                    inits.append(term)
                    positions.setdefault("init", d.pos)
                else:
                    transs.append(term)
                    positions.setdefault("trans", d.pos)
            else:
                idx = _index_value(k, v, d.pos)
                if any(p.index == idx for p in props):
                    raise DuplicatePropertyIndex(idx, d.pos)
                kind = PropertyKind(k[1:])
                props.append(PropertySpec(kind, idx, term))
                positions[("property", idx)] = d.pos

    # pairing checks
    by_target: dict[str, str] = {}
    for cur, (nxt, pos) in pairs.items():
        if cur == nxt:
            raise NextInvalid(f"'{cur}' is its own next variable", pos)
        if variables[cur].sort != variables[nxt].sort:
            raise NextSortMismatch(cur, nxt, pos)
        if nxt in by_target:
            raise NextNotInjective(by_target[nxt], cur, nxt, pos)
        by_target[nxt] = cur
    for cur, (nxt, pos) in pairs.items():
        if cur in by_target:
            raise NextInvalid(f"'{cur}' is used both as a current and as a next variable", pos)
        positions[("next", cur)] = pos

    order = tuple(variables)
    states = tuple(
        StateVariable(name, pairs[name][0], variables[name].sort) for name in order if name in pairs
    )
    inputs = tuple((name, variables[name].sort) for name in order if name not in pairs and name not in by_target)
    system = TransitionSystem(states, inputs, _conj(inits), _conj(transs))

    reached = set(annotated)
    work = list(annotated)
    while work:
        name = work.pop()
        for f in applied_functions(st.funs[name].body):
            if f not in reached and isinstance(st.funs.get(f), FunDef):
                reached.add(f)
                work.append(f)
    unused = tuple(d.name for d in defs if d.name not in reached)
    for d in defs:
        positions.setdefault(("define", d.name), d.pos)

    return VmtDocument(
        system=system,
        properties=tuple(props),
        sorts=tuple(s for s in st.sorts.values() if isinstance(s, SortDecl)),
        functions=tuple(st.functions()),
        logic=st.logic,
        symbol_order=order,
        positions=positions,
        unused_defines=unused,
        warnings=tuple(st.warnings),
    )


def _conj(ts: list[Term]) -> Term:
    if not ts:
        return TRUE
    if len(ts) == 1:
        return ts[0]
    return App("and", tuple(ts), BOOL)


def load_vmt(text: str) -> VmtDocument:
    return extract(parse_script(text))


# ---------------------------------------------------------------------------
# validation


def _diag(doc: VmtDocument, code: str, msg: str, key=None, severity: str = "error") -> Diagnostic:
    line, col = doc.positions.get(key, (0, 0)) if key is not None else (0, 0)
    return Diagnostic(code, severity, msg, line, col)


def validate(doc: VmtDocument) -> list[Diagnostic]:
    """All well-formedness violations of ``doc`` (empty list means well-formed)."""
    out: list[Diagnostic] = list(doc.warnings)
    ts = doc.system
    cur, nxt, inp = ts.current_names, ts.next_names, ts.input_names
    rigid = {f.name for f in doc.functions}

    seen_targets: dict[str, str] = {}
    for s in ts.states:
        key = ("next", s.current)
        if s.current == s.next:
            out.append(_diag(doc, "NextInvalid", f"'{s.current}' is its own next variable", key))
        if s.next in seen_targets:
            out.append(_diag(doc, "NextNotInjective",
                             f"'{seen_targets[s.next]}' and '{s.current}' share next '{s.next}'", key))
        seen_targets[s.next] = s.current
    if len(cur) != len(ts.states):
        out.append(_diag(doc, "NextInvalid", "a variable has two :next partners"))
    for name in sorted((cur | nxt) & inp):
        out.append(_diag(doc, "SymbolRoleConflict", f"'{name}' is both a state variable and an input"))
    for name in sorted(cur & nxt):
        out.append(_diag(doc, "NextInvalid", f"'{name}' is both a current and a next variable"))

    if ts.init.sort != BOOL:
        out.append(_diag(doc, "NonBooleanAnnotation", "init is not Boolean", "init"))
    for name in sorted(free_vars(ts.init)):
        if name in nxt:
            out.append(_diag(doc, "InitUsesNextVar", f"init mentions next-state variable '{name}'", "init"))
        elif name in inp:
            out.append(_diag(doc, "InitUsesInput", f"init mentions input variable '{name}'", "init"))
        elif name not in cur and name not in rigid:
            out.append(_diag(doc, "UnknownSymbol", f"init mentions unknown symbol '{name}'", "init"))
    if ts.trans.sort != BOOL:
        out.append(_diag(doc, "NonBooleanAnnotation", "trans is not Boolean", "trans"))
    for name in sorted(free_vars(ts.trans)):
        if name not in cur and name not in nxt and name not in inp and name not in rigid:
            out.append(_diag(doc, "UnknownSymbol", f"trans mentions unknown symbol '{name}'", "trans"))

    indices: set[int] = set()
    for p in doc.properties:
        key = ("property", p.index)
        if p.index < 0:
            out.append(_diag(doc, "BadAnnotation", f"negative property index {p.index}", key))
        if p.index in indices:
            out.append(_diag(doc, "DuplicatePropertyIndex", f"property index {p.index} used more than once", key))
        indices.add(p.index)
        if p.formula.sort != BOOL:
            out.append(_diag(doc, "NonBooleanAnnotation", f"property {p.index} is not Boolean", key))
        for name in sorted(free_vars(p.formula)):
            if name in inp:
                out.append(_diag(doc, "PropertyUsesInput",
                                 f"property {p.index} mentions input variable '{name}'", key))
            elif name in nxt:
                out.append(_diag(doc, "PropertyUsesNextVar",
                                 f"property {p.index} mentions next-state variable '{name}'", key))
            elif name not in cur and name not in rigid:
                out.append(_diag(doc, "UnknownSymbol",
                                 f"property {p.index} mentions unknown symbol '{name}'", key))

    if not doc.properties:
        out.append(Diagnostic("NoProperties", "warning", "document defines no properties"))
    for name in doc.unused_defines:
        out.append(_diag(doc, "UnusedDefinition",
                         f"definition '{name}' is not reachable from any annotation",
                         ("define", name), "warning"))
    return out


def check_text(text: str) -> list[Diagnostic]:
    """Parse, extract and validate; errors are reported as diagnostics."""
    try:
        doc = load_vmt(text)
    except VmtError as e:
        return [e.to_diagnostic()]
    return validate(doc)


# ---------------------------------------------------------------------------
# priming


def prime(t: Term, doc: VmtDocument | TransitionSystem) -> Term:
    ts = doc.system if isinstance(doc, VmtDocument) else doc
    fv = free_vars(t)
    if fv & ts.next_names:
        raise MixedStateVersions(f"term already mentions next-state variables: {to_smtlib(t)}")
    m = ts.next_of()
    return rename_vars(t, m.get)


def unprime(t: Term, doc: VmtDocument | TransitionSystem) -> Term:
    ts = doc.system if isinstance(doc, VmtDocument) else doc
    fv = free_vars(t)
    if fv & ts.current_names:
        raise MixedStateVersions(f"term mentions current-state variables: {to_smtlib(t)}")
    m = ts.current_of()
    return rename_vars(t, m.get)


# ---------------------------------------------------------------------------
# printing


def _fresh_name(base: str, taken: set[str]) -> str:
    name = base
    i = 1
    while name in taken:
        name = f"{base}_{i}"
        i += 1
    taken.add(name)
    return name


def print_vmt(doc: VmtDocument) -> str:
    """Render ``doc`` as a VMT-LIB script ending in ``(assert true)``."""
    lines: list[str] = []
    if doc.logic:
        lines.append(f"(set-logic {quote_symbol(doc.logic)})")
    for s in doc.sorts:
        lines.append(f"(declare-sort {quote_symbol(s.name)} {s.arity})")
    for f in doc.functions:
        lines.append(f"(declare-fun {quote_symbol(f.name)} ({' '.join(map(str, f.arg_sorts))}) {f.sort})")
    sorts = doc.variable_sorts()
    order = [n for n in doc.symbol_order if n in sorts]
    order += [n for n in sorts if n not in order]
    for name in order:
        lines.append(f"(declare-fun {quote_symbol(name)} () {sorts[name]})")
    taken = doc.symbols()
    for s in doc.system.states:
        d = _fresh_name(f"sv.{s.current}", taken)
        lines.append(f"(define-fun {quote_symbol(d)} () {s.sort} (! {quote_symbol(s.current)} :next {quote_symbol(s.next)}))")
    d = _fresh_name("init", taken)
    lines.append(f"(define-fun {quote_symbol(d)} () Bool (! {to_smtlib(doc.system.init)} :init))")
    d = _fresh_name("trans", taken)
    lines.append(f"(define-fun {quote_symbol(d)} () Bool (! {to_smtlib(doc.system.trans)} :trans))")
    for p in doc.properties:
        d = _fresh_name(f"p{p.index}", taken)
        lines.append(f"(define-fun {quote_symbol(d)} () Bool (! {to_smtlib(p.formula)} :{p.kind.value} {p.index}))")
    lines.append("(assert true)")
    return "\n".join(lines) + "\n"


def with_properties(doc: VmtDocument, props) -> VmtDocument:
    return replace(doc, properties=tuple(props))
