"""LTL properties compiled to a live property on a tableau product.

The negated formula is put in negation normal form and turned into a
symbolic tableau with one Boolean state variable per X-subformula. The
fairness conditions of its U-subformulas are merged by a counter, and the
resulting live property fails exactly on fair paths of the product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    AtomNotBoolean,
    AtomUsesInput,
    AtomUsesNextVar,
    IndexInUse,
    LtlSyntaxError,
)
from .model import PropertyKind, PropertySpec, StateVariable, TransitionSystem, VmtDocument
from .sexpr import SYMBOL, Atom
from .smtlib import Elaborator, FunDecl, FunDef, SortDecl, SymbolTable, elaborate_term, expand_defines
from .terms import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    Term,
    Var,
    free_vars,
    int_const,
    mk_and,
    mk_eq,
    mk_implies,
    mk_ite,
    mk_not,
    mk_or,
    rename_vars,
)

UNARY = ("not", "X", "F", "G")
BINARY = ("and", "or", "implies", "U", "R")


@dataclass(frozen=True)
class LtlFormula:
    op: str
    args: tuple["LtlFormula", ...] = ()
    atom: Term | None = None

    def __str__(self) -> str:
        if self.op == "atom":
            return str(self.atom)
        if self.op == "not":
            return f"!{_paren(self.args[0])}"
        if self.op in ("X", "F", "G"):
            return f"{self.op} {_paren(self.args[0])}"
        sym = {"and": "&", "or": "|", "implies": "->", "U": "U", "R": "R"}[self.op]
        return f"{_paren(self.args[0])} {sym} {_paren(self.args[1])}"

    def subformulas(self):
        yield self
        for a in self.args:
            yield from a.subformulas()

    def depth(self) -> int:
        return 1 + max((a.depth() for a in self.args), default=0)


def _paren(f: LtlFormula) -> str:
    return str(f) if f.op == "atom" or f.op in UNARY else f"({f})"


def Atom_(t: Term) -> LtlFormula:
    return LtlFormula("atom", (), t)


def Not(f): return LtlFormula("not", (f,))
def And(a, b): return LtlFormula("and", (a, b))
def Or(a, b): return LtlFormula("or", (a, b))
def Implies(a, b): return LtlFormula("implies", (a, b))
def Next(f): return LtlFormula("X", (f,))
def Finally(f): return LtlFormula("F", (f,))
def Globally(f): return LtlFormula("G", (f,))
def Until(a, b): return LtlFormula("U", (a, b))
def Release(a, b): return LtlFormula("R", (a, b))


LTL_TRUE = Atom_(TRUE)
LTL_FALSE = Atom_(FALSE)


# ---------------------------------------------------------------------------
# parsing

_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~@$%^*_-+=<>.?/")
_KEYWORDS = {"X", "F", "G", "U", "R"}


def symbol_table(doc: VmtDocument) -> SymbolTable:
    """A symbol table declaring the sorts, functions and variables of ``doc``."""
    st = SymbolTable(logic=doc.logic)
    for s in doc.sorts:
        st.sorts[s.name] = SortDecl(s.name, s.arity)
    for f in doc.functions:
        st.funs[f.name] = f
    for name, srt in doc.variable_sorts().items():
        st.funs[name] = FunDecl(name, (), srt)
    return st


class _Parser:
    def __init__(self, text: str, st: SymbolTable):
        self.text = text
        self.i = 0
        self.st = st

    def error(self, msg: str, pos: int | None = None):
        raise LtlSyntaxError(msg, self.i if pos is None else pos)

    def ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek_word(self, i: int) -> str | None:
        j = i
        if j < len(self.text) and self.text[j] == "|":
            k = self.text.find("|", j + 1)
            return None if k < 0 else self.text[j + 1:k]
        while j < len(self.text) and self.text[j] in _WORD_CHARS:
            if self.text.startswith("->", j):
                break
            j += 1
        return self.text[i:j] or None

    def word(self) -> str:
        start = self.i
        if self.text[self.i] == "|":
            k = self.text.find("|", self.i + 1)
            if k < 0:
                self.error("unterminated quoted symbol")
            self.i = k + 1
            return self.text[start + 1:k]
        w = self.peek_word(self.i)
        if not w:
            self.error(f"unexpected character '{self.text[self.i]}'")
        self.i += len(w)
        return w

    def at(self, s: str) -> bool:
        self.ws()
        return self.text.startswith(s, self.i)

    def at_keyword(self, kw: str) -> bool:
        self.ws()
        return self.peek_word(self.i) == kw and not self.text.startswith("|", self.i)

    def parse(self) -> LtlFormula:
        f = self.implies()
        self.ws()
        if self.i != len(self.text):
            self.error("unexpected trailing input")
        return f

    def implies(self) -> LtlFormula:
        left = self.disj()
        if self.at("->"):
            self.i += 2
            return Implies(left, self.implies())
        return left

    def disj(self) -> LtlFormula:
        f = self.conj()
        while self.at("|"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> LtlFormula:
        f = self.until()
        while self.at("&"):
            self.i += 1
            f = And(f, self.until())
        return f

    def until(self) -> LtlFormula:
        left = self.unary()
        for kw, ctor in (("U", Until), ("R", Release)):
            if self.at_keyword(kw):
                self.i += 1
                return ctor(left, self.until())
        return left

    def unary(self) -> LtlFormula:
        self.ws()
        if self.i >= len(self.text):
            self.error("unexpected end of formula")
        if self.text[self.i] == "!":
            self.i += 1
            return Not(self.unary())
        for kw, ctor in (("X", Next), ("F", Finally), ("G", Globally)):
            if self.at_keyword(kw):
                self.i += 1
                return ctor(self.unary())
        return self.primary()

    def primary(self) -> LtlFormula:
        self.ws()
        start = self.i
        c = self.text[self.i]
        if c == "(":
            if self._is_grouping(self.i + 1):
                self.i += 1
                f = self.implies()
                if not self.at(")"):
                    self.error("expected ')'")
                self.i += 1
                return f
            end = self._sexpr_end(self.i)
            src = self.text[self.i:end]
            self.i = end
            return Atom_(self._elaborate(src, start))
        if c in ")&" or self.text.startswith("->", self.i):
            self.error(f"unexpected '{c}'")
        w = self.word()
        if w in _KEYWORDS:
            self.error(f"operator '{w}' used as an atom", start)
        if w in ("true", "false"):
            return LTL_TRUE if w == "true" else LTL_FALSE
        return Atom_(self._elaborate_symbol(w, start))

    def _is_grouping(self, i: int) -> bool:
        while i < len(self.text) and self.text[i].isspace():
            i += 1
        if i >= len(self.text) or self.text[i] in "(!":
            return True
        w = self.peek_word(i)
        if w is None:
            return True
        if w in _KEYWORDS or w in ("true", "false"):
            return True
        entry = self.st.lookup(w)
        if isinstance(entry, FunDecl):
            return not entry.arg_sorts
        if isinstance(entry, FunDef):
            return not entry.params
        return False

    def _sexpr_end(self, i: int) -> int:
        depth = 0
        while i < len(self.text):
            c = self.text[i]
            if c == "|":
                k = self.text.find("|", i + 1)
                if k < 0:
                    self.error("unterminated quoted symbol", i)
                i = k
            elif c == '"':
                k = self.text.find('"', i + 1)
                if k < 0:
                    self.error("unterminated string", i)
                i = k
            elif c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        self.error("unbalanced parentheses in atom")

    def _elaborate(self, src: str, pos: int) -> Term:
        return expand_defines(elaborate_term(src, self.st), self.st)

    def _elaborate_symbol(self, name: str, pos: int) -> Term:
        t = Elaborator(self.st).term(Atom(SYMBOL, name, (1, pos + 1)))
        return expand_defines(t, self.st)


def parse_ltl(text: str, doc: VmtDocument, symtab: SymbolTable | None = None) -> LtlFormula:
    """Parse an LTL formula whose atoms are terms over the state of ``doc``.

    Operators: ``!``, ``&``, ``|``, ``->``, ``X``, ``F``, ``G``, ``U``, ``R``.
    Unary operators bind tightest, then ``U``/``R`` (right-associative), then
    ``&``, ``|`` and ``->``. An atom is a bare Boolean symbol or a
    parenthesized SMT-LIB term such as ``(> x 10)``.
    """
    st = symtab or symbol_table(doc)
    f = _Parser(text, st).parse()
    check_atoms(f, doc)
    return f


def check_atoms(f: LtlFormula, doc: VmtDocument) -> None:
    ts = doc.system
    for g in f.subformulas():
        if g.op != "atom":
            continue
        if g.atom.sort != BOOL:
            raise AtomNotBoolean(f"LTL atom {g.atom} has sort {g.atom.sort}, expected Bool")
        fv = free_vars(g.atom)
        for n in sorted(fv):
            if n in ts.input_names:
                raise AtomUsesInput(n)
            if n in ts.next_names:
                raise AtomUsesNextVar(n)


# ---------------------------------------------------------------------------
# negation normal form


def nnf(f: LtlFormula, negate: bool = False) -> LtlFormula:
    """Negations on atoms only; F and G become U and R."""
    op, a = f.op, f.args
    if op == "atom":
        return Not(f) if negate else f
    if op == "not":
        return nnf(a[0], not negate)
    if op in ("and", "or"):
        flip = {"and": "or", "or": "and"}[op] if negate else op
        return LtlFormula(flip, (nnf(a[0], negate), nnf(a[1], negate)))
    if op == "implies":
        if negate:
            return And(nnf(a[0]), nnf(a[1], True))
        return Or(nnf(a[0], True), nnf(a[1]))
    if op == "X":
        return Next(nnf(a[0], negate))
    if op == "F":
        if negate:
            return Release(LTL_FALSE, nnf(a[0], True))
        return Until(LTL_TRUE, nnf(a[0]))
    if op == "G":
        if negate:
            return Until(LTL_TRUE, nnf(a[0], True))
        return Release(LTL_FALSE, nnf(a[0]))
    if op == "U":
        if negate:
            return Release(nnf(a[0], True), nnf(a[1], True))
        return Until(nnf(a[0]), nnf(a[1]))
    if op == "R":
        if negate:
            return Until(nnf(a[0], True), nnf(a[1], True))
        return Release(nnf(a[0]), nnf(a[1]))
    raise ValueError(f"unknown LTL operator {op}")


def is_nnf(f: LtlFormula) -> bool:
    for g in f.subformulas():
        if g.op in ("F", "G", "implies"):
            return False
        if g.op == "not" and g.args[0].op != "atom":
            return False
    return True


# ---------------------------------------------------------------------------
# tableau


@dataclass
class Tableau:
    variables: list[tuple[str, LtlFormula]] = field(default_factory=list)  # (name, alpha) for X alpha
    init: Term = TRUE
    trans: list[Term] = field(default_factory=list)
    fairness: list[Term] = field(default_factory=list)

    @property
    def state_vars(self) -> list[StateVariable]:
        return [StateVariable(n, f"{n}.next", BOOL) for n, _ in self.variables]


class _TableauBuilder:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.vars: dict[LtlFormula, str] = {}
        self.order: list[LtlFormula] = []

    def var(self, alpha: LtlFormula) -> Var:
        name = self.vars.get(alpha)
        if name is None:
            name = f"{self.prefix}x{len(self.vars)}"
            self.vars[alpha] = name
            self.order.append(alpha)
        return Var(name, BOOL)

    def enc(self, f: LtlFormula) -> Term:
        op, a = f.op, f.args
        if op == "atom":
            return f.atom
        if op == "not":
            return mk_not(self.enc(a[0]))
        if op == "and":
            return mk_and(self.enc(a[0]), self.enc(a[1]))
        if op == "or":
            return mk_or(self.enc(a[0]), self.enc(a[1]))
        if op == "X":
            return self.var(a[0])
        if op == "U":
            return mk_or(self.enc(a[1]), mk_and(self.enc(a[0]), self.var(f)))
        if op == "R":
            return mk_and(self.enc(a[1]), mk_or(self.enc(a[0]), self.var(f)))
        raise ValueError(f"formula is not in negation normal form: {f}")


def build_tableau(psi: LtlFormula, doc: VmtDocument | None = None, prefix: str | None = None) -> Tableau:
    """Symbolic tableau of an NNF formula; primed terms use ``doc``'s next variables."""
    if prefix is None:
        prefix = fresh_prefix(doc.symbols() if doc else set())
    b = _TableauBuilder(prefix)
    init = b.enc(psi)
    nexts = dict(doc.system.next_of()) if doc else {}
    trans = []
    done = 0
    while done < len(b.order):
        alpha = b.order[done]
        v = b.vars[alpha]
        body = b.enc(alpha)
        primed = rename_vars(body, lambda n: nexts.get(n) or (f"{n}.next" if n.startswith(prefix) else None))
        trans.append(mk_eq(Var(v, BOOL), primed))
        done += 1
    fairness = []
    seen = set()
    for g in psi.subformulas():
        if g.op == "U" and g not in seen:
            seen.add(g)
            fairness.append(mk_or(b.enc(g.args[1]), mk_not(b.var(g))))
    return Tableau([(b.vars[a], a) for a in b.order], init, trans, fairness)


def count_until(psi: LtlFormula) -> int:
    return len({g for g in psi.subformulas() if g.op == "U"})


def fresh_prefix(taken: set[str], base: str = "_ltl") -> str:
    i = 0
    while True:
        prefix = f"{base}{i or ''}."
        if not any(n.startswith(prefix) for n in taken):
            return prefix
        i += 1


# ---------------------------------------------------------------------------
# degeneralization


@dataclass
class DegeneralizedMonitor:
    states: list[StateVariable]
    init: Term
    trans: Term
    wrap: Term
    p_live: Term
    n: int


def _bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n + 1)))


def degeneralize(fairness: list[Term], prefix: str = "_ltl.", use_int: bool = True) -> DegeneralizedMonitor:
    """Counter that reaches n after seeing every fairness term in order, then resets."""
    n = len(fairness)
    if n == 0:
        return DegeneralizedMonitor([], TRUE, TRUE, TRUE, FALSE, 0)
    if use_int:
        c = Var(f"{prefix}c", INT)
        cn = Var(f"{prefix}c.next", INT)
        nxt: Term = c
        for j in reversed(range(n)):
            nxt = mk_ite(mk_and(mk_eq(c, int_const(j)), fairness[j]), int_const(j + 1), nxt)
        nxt = mk_ite(mk_eq(c, int_const(n)), int_const(0), nxt)
        sv = [StateVariable(c.name, cn.name, INT)]
        init = mk_eq(c, int_const(0))
        trans = mk_eq(cn, nxt)
        wrap = mk_eq(c, int_const(n))
        return DegeneralizedMonitor(sv, init, trans, wrap, mk_not(wrap), n)
    m = _bits(n)
    cur = [Var(f"{prefix}c{i}", BOOL) for i in range(m)]
    nxt_v = [Var(f"{prefix}c{i}.next", BOOL) for i in range(m)]

    def value(vs, j: int) -> Term:
        return mk_and([v if (j >> i) & 1 else mk_not(v) for i, v in enumerate(vs)])

    parts = []
    for j in range(n):
        parts.append(mk_implies(mk_and(value(cur, j), fairness[j]), value(nxt_v, j + 1)))
        parts.append(mk_implies(mk_and(value(cur, j), mk_not(fairness[j])), value(nxt_v, j)))
    parts.append(mk_implies(value(cur, n), value(nxt_v, 0)))
    sv = [StateVariable(v.name, w.name, BOOL) for v, w in zip(cur, nxt_v)]
    wrap = value(cur, n)
    return DegeneralizedMonitor(sv, value(cur, 0), mk_and(parts), wrap, mk_not(wrap), n)


# ---------------------------------------------------------------------------
# product


def uses_arithmetic(doc: VmtDocument) -> bool:
    def arith(s) -> bool:
        return s.is_arith or any(arith(a) for a in s.args)

    if any(arith(s) for s in doc.variable_sorts().values()):
        return True
    return any(arith(f.sort) or any(arith(a) for a in f.arg_sorts) for f in doc.functions)


def ltl_to_vmt(doc: VmtDocument, phi: LtlFormula, new_idx: int) -> VmtDocument:
    """Product of ``doc`` with the tableau of the negation of ``phi``.

    The added live property ``new_idx`` holds iff every path of ``doc``
    satisfies ``phi``.
    """
    if any(p.index == new_idx for p in doc.properties):
        raise IndexInUse(new_idx)
    check_atoms(phi, doc)
    prefix = fresh_prefix(doc.symbols())
    psi = nnf(phi, negate=True)
    tab = build_tableau(psi, doc, prefix)
    mon = degeneralize(tab.fairness, prefix, use_int=uses_arithmetic(doc))
    ts = doc.system
    states = ts.states + tuple(tab.state_vars) + tuple(mon.states)
    init = mk_and(ts.init, tab.init, mon.init)
    trans = mk_and(ts.trans, *tab.trans, mon.trans)
    system = TransitionSystem(states, ts.inputs, init, trans)
    new_names = []
    for s in list(tab.state_vars) + mon.states:
        new_names += [s.current, s.next]
    prop = PropertySpec(PropertyKind.LIVE, new_idx, mon.p_live)
    return VmtDocument(
        system=system,
        properties=doc.properties + (prop,),
        sorts=doc.sorts,
        functions=doc.functions,
        logic=doc.logic,
        symbol_order=doc.symbol_order + tuple(new_names),
    )
