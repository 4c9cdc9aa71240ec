"""Transition system plus one invariant property to constrained Horn clauses."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import LivePropertyUnsupported, QuantifiedSystem, UnsupportedSymbol
from ..model import PropertyKind, VmtDocument
from ..sexpr import quote_symbol
from ..terms import BOOL, FALSE, Apply, Sort, Term, Var, has_quantifier, mk_and, mk_not, to_smtlib


@dataclass
class HornScript:
    predicate: str
    params: list[tuple[str, Sort]]
    sorts: list[tuple[str, int]]
    clauses: list[tuple[list[tuple[str, Sort]], Term, Term]]  # (bound vars, body, head)

    def render(self) -> str:
        lines = ["(set-logic HORN)"]
        lines += [f"(declare-sort {quote_symbol(n)} {a})" for n, a in self.sorts]
        arg_sorts = " ".join(str(s) for _, s in self.params)
        lines.append(f"(declare-fun {quote_symbol(self.predicate)} ({arg_sorts}) Bool)")
        for bound, body, head in self.clauses:
            clause = f"(=> {to_smtlib(body)} {to_smtlib(head)})"
            if bound:
                decls = " ".join(f"({quote_symbol(n)} {s})" for n, s in bound)
                clause = f"(forall ({decls}) {clause})"
            lines.append(f"(assert {clause})")
        lines.append("(check-sat)")
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.render()


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def vmt_to_horn(doc: VmtDocument, idx: int) -> HornScript:
    """Init, step and safety clauses over one reachability predicate."""
    prop = doc.property(idx)
    if prop.kind is not PropertyKind.INVARIANT:
        raise LivePropertyUnsupported(idx)
    ts = doc.system
    for t in (ts.init, ts.trans, prop.formula):
        if has_quantifier(t):
            raise QuantifiedSystem("quantified formulas cannot be converted to Horn clauses")
    if doc.functions:
        raise UnsupportedSymbol(doc.functions[0].name)
    pred = fresh_name("Inv", doc.symbols())
    cur = [(s.current, s.sort) for s in ts.states]
    nxt = [(s.next, s.sort) for s in ts.states]
    inputs = list(ts.inputs)

    def app(vars_: list[tuple[str, Sort]]) -> Term:
        return Apply(pred, tuple(Var(n, s) for n, s in vars_), BOOL)

    clauses = [
        (cur, ts.init, app(cur)),
        (cur + inputs + nxt, mk_and(app(cur), ts.trans), app(nxt)),
        (cur, mk_and(app(cur), mk_not(prop.formula)), FALSE),
    ]
    sorts = [(d.name, d.arity) for d in doc.sorts]
    return HornScript(pred, cur, sorts, clauses)
