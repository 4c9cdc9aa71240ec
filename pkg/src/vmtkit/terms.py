"""Sorts and sort-annotated terms.

Terms are immutable trees. Theory operators are ``App`` nodes; applications
of declared (uninterpreted) functions and of ``define-fun`` macros are
``Apply`` nodes; declared constants and bound variables are ``Var`` nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from .sexpr import SExpr, print_sexpr, quote_symbol


@dataclass(frozen=True)
class Sort:
    name: str
    args: tuple["Sort", ...] = ()
    indices: tuple[int, ...] = ()

    @property
    def is_bool(self) -> bool:
        return self.name == "Bool" and not self.args

    @property
    def is_bv(self) -> bool:
        return self.name == "BitVec" and len(self.indices) == 1

    @property
    def is_array(self) -> bool:
        return self.name == "Array" and len(self.args) == 2

    @property
    def is_arith(self) -> bool:
        return self.name in ("Int", "Real") and not self.args

    @property
    def width(self) -> int:
        return self.indices[0]

    @property
    def is_builtin(self) -> bool:
        return self.name in ("Bool", "Int", "Real", "BitVec", "Array")

    def __str__(self) -> str:
        base = quote_symbol(self.name)
        if self.indices:
            base = "(_ " + base + " " + " ".join(map(str, self.indices)) + ")"
        if self.args:
            return "(" + base + " " + " ".join(str(a) for a in self.args) + ")"
        return base

    def __repr__(self) -> str:
        return f"Sort({self})"


BOOL = Sort("Bool")
INT = Sort("Int")
REAL = Sort("Real")


def bv_sort(width: int) -> Sort:
    return Sort("BitVec", (), (width,))


def array_sort(index: Sort, elem: Sort) -> Sort:
    return Sort("Array", (index, elem))


class Term:
    """Base class; concrete subclasses are frozen dataclasses with a ``sort``."""

    __slots__ = ()
    sort: Sort

    def __str__(self) -> str:
        return to_smtlib(self)


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const(Term):
    value: object  # bool | int | Fraction (BitVec values are unsigned ints)
    sort: Sort


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple[Term, ...]
    sort: Sort
    indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class Apply(Term):
    fn: str
    args: tuple[Term, ...]
    sort: Sort


@dataclass(frozen=True)
class Let(Term):
    bindings: tuple[tuple[str, Term], ...]
    body: Term
    sort: Sort


@dataclass(frozen=True)
class Quant(Term):
    kind: str  # "forall" | "exists"
    params: tuple[tuple[str, Sort], ...]
    body: Term
    sort: Sort = BOOL


@dataclass(frozen=True)
class Annotated(Term):
    term: Term
    attrs: tuple[tuple[str, SExpr | None], ...]
    sort: Sort


TermLike = Union[Var, Const, App, Apply, Let, Quant, Annotated]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


def int_const(v: int) -> Const:
    return Const(v, INT)


def bv_const(v: int, width: int) -> Const:
    return Const(v % (1 << width), bv_sort(width))


# -- smart constructors (light simplification on constants only) ----------------

def mk_not(t: Term) -> Term:
    if isinstance(t, Const):
        return FALSE if t.value else TRUE
    if isinstance(t, App) and t.op == "not":
        return t.args[0]
    return App("not", (t,), BOOL)


def mk_and(*ts: Term | Iterable[Term]) -> Term:
    flat: list[Term] = []
    for t in _flatten_args(ts):
        if isinstance(t, App) and t.op == "and":
            flat.extend(t.args)
        elif t == TRUE:
            continue
        elif t == FALSE:
            return FALSE
        else:
            flat.append(t)
    flat = _dedup(flat)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), BOOL)


def mk_or(*ts: Term | Iterable[Term]) -> Term:
    flat: list[Term] = []
    for t in _flatten_args(ts):
        if isinstance(t, App) and t.op == "or":
            flat.extend(t.args)
        elif t == FALSE:
            continue
        elif t == TRUE:
            return TRUE
        else:
            flat.append(t)
    flat = _dedup(flat)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), BOOL)


def mk_implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    if b == FALSE:
        return mk_not(a)
    return App("=>", (a, b), BOOL)


def mk_eq(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    if a.sort.is_bool:
        if a == TRUE:
            return b
        if b == TRUE:
            return a
        if a == FALSE:
            return mk_not(b)
        if b == FALSE:
            return mk_not(a)
    return App("=", (a, b), BOOL)


def mk_ite(c: Term, a: Term, b: Term) -> Term:
    if c == TRUE:
        return a
    if c == FALSE:
        return b
    if a == b:
        return a
    return App("ite", (c, a, b), a.sort)


def _flatten_args(ts) -> Iterable[Term]:
    for t in ts:
        if isinstance(t, Term):
            yield t
        else:
            yield from t


def _dedup(ts: list[Term]) -> list[Term]:
    seen = set()
    out = []
    for t in ts:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def conjuncts(t: Term) -> list[Term]:
    """Top-level conjuncts of ``t`` (annotations stripped)."""
    t = strip_annotations_top(t)
    if isinstance(t, App) and t.op == "and":
        out = []
        for a in t.args:
            out.extend(conjuncts(a))
        return out
    if t == TRUE:
        return []
    return [t]


def strip_annotations_top(t: Term) -> Term:
    while isinstance(t, Annotated):
        t = t.term
    return t


# -- traversal -----------------------------------------------------------------------

def free_vars(t: Term) -> set[str]:
    """Names of free ``Var`` occurrences."""
    out: set[str] = set()
    _free_vars(t, frozenset(), out)
    return out


def _free_vars(t: Term, bound: frozenset, out: set) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            out.add(t.name)
    elif isinstance(t, (App, Apply)):
        for a in t.args:
            _free_vars(a, bound, out)
    elif isinstance(t, Let):
        for _, v in t.bindings:
            _free_vars(v, bound, out)
        _free_vars(t.body, bound | {n for n, _ in t.bindings}, out)
    elif isinstance(t, Quant):
        _free_vars(t.body, bound | {n for n, _ in t.params}, out)
    elif isinstance(t, Annotated):
        _free_vars(t.term, bound, out)


def applied_functions(t: Term) -> set[str]:
    out: set[str] = set()
    for s in subterms(t):
        if isinstance(s, Apply):
            out.add(s.fn)
    return out


def subterms(t: Term) -> Iterable[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, (App, Apply)):
            stack.extend(s.args)
        elif isinstance(s, Let):
            stack.extend(v for _, v in s.bindings)
            stack.append(s.body)
        elif isinstance(s, Quant):
            stack.append(s.body)
        elif isinstance(s, Annotated):
            stack.append(s.term)


def has_quantifier(t: Term) -> bool:
    return any(isinstance(s, Quant) for s in subterms(t))


def sorts_in(t: Term) -> set[Sort]:
    return {s.sort for s in subterms(t)}


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Capture-avoiding substitution of free variables by name."""
    if not mapping:
        return t
    range_vars: set[str] = set()
    for v in mapping.values():
        range_vars |= free_vars(v)
    return _subst(t, dict(mapping), range_vars)


def _fresh(base: str, avoid: set[str]) -> str:
    i = 0
    while f"{base}!{i}" in avoid:
        i += 1
    return f"{base}!{i}"


def _subst(t: Term, m: dict, range_vars: set) -> Term:
    if isinstance(t, Var):
        return m.get(t.name, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        args = tuple(_subst(a, m, range_vars) for a in t.args)
        return t if args == t.args else App(t.op, args, t.sort, t.indices)
    if isinstance(t, Apply):
        args = tuple(_subst(a, m, range_vars) for a in t.args)
        return t if args == t.args else Apply(t.fn, args, t.sort)
    if isinstance(t, Annotated):
        return Annotated(_subst(t.term, m, range_vars), t.attrs, t.sort)
    if isinstance(t, Let):
        vals = tuple((n, _subst(v, m, range_vars)) for n, v in t.bindings)
        inner = {k: v for k, v in m.items() if k not in {n for n, _ in vals}}
        renamed = []
        for n, v in vals:
            if n in range_vars and inner:
                new = _fresh(n, range_vars | free_vars(t.body))
                inner[n] = Var(new, v.sort)
                renamed.append((new, v))
            else:
                renamed.append((n, v))
        return Let(tuple(renamed), _subst(t.body, inner, range_vars), t.sort)
    if isinstance(t, Quant):
        inner = {k: v for k, v in m.items() if k not in {n for n, _ in t.params}}
        params = []
        for n, s in t.params:
            if n in range_vars and inner:
                new = _fresh(n, range_vars | free_vars(t.body))
                inner[n] = Var(new, s)
                params.append((new, s))
            else:
                params.append((n, s))
        return Quant(t.kind, tuple(params), _subst(t.body, inner, range_vars), t.sort)
    raise TypeError(f"not a term: {t!r}")


def rename_vars(t: Term, fn: Callable[[str], str | None]) -> Term:
    """Rename free variables: ``fn(name)`` returns the new name or None to keep."""
    mapping = {}
    for v in free_var_terms(t):
        new = fn(v.name)
        if new is not None and new != v.name:
            mapping[v.name] = Var(new, v.sort)
    return substitute(t, mapping)


def free_var_terms(t: Term) -> set[Var]:
    out: set[Var] = set()
    names = free_vars(t)
    for s in subterms(t):
        if isinstance(s, Var) and s.name in names:
            out.add(s)
    return out


def map_apply(t: Term, fn: Callable[[Apply, tuple[Term, ...]], Term]) -> Term:
    """Bottom-up rewrite of ``Apply`` nodes (``fn`` receives rewritten args)."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, App):
        return App(t.op, tuple(map_apply(a, fn) for a in t.args), t.sort, t.indices)
    if isinstance(t, Apply):
        return fn(t, tuple(map_apply(a, fn) for a in t.args))
    if isinstance(t, Annotated):
        return Annotated(map_apply(t.term, fn), t.attrs, t.sort)
    if isinstance(t, Let):
        return Let(tuple((n, map_apply(v, fn)) for n, v in t.bindings), map_apply(t.body, fn), t.sort)
    if isinstance(t, Quant):
        return Quant(t.kind, t.params, map_apply(t.body, fn), t.sort)
    raise TypeError(f"not a term: {t!r}")


def inline_lets(t: Term) -> Term:
    """Replace let-bound variables by their definitions."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, App):
        return App(t.op, tuple(inline_lets(a) for a in t.args), t.sort, t.indices)
    if isinstance(t, Apply):
        return Apply(t.fn, tuple(inline_lets(a) for a in t.args), t.sort)
    if isinstance(t, Annotated):
        return Annotated(inline_lets(t.term), t.attrs, t.sort)
    if isinstance(t, Let):
        body = inline_lets(t.body)
        return substitute(body, {n: inline_lets(v) for n, v in t.bindings})
    if isinstance(t, Quant):
        return Quant(t.kind, t.params, inline_lets(t.body), t.sort)
    raise TypeError(f"not a term: {t!r}")


# -- printing ----------------------------------------------------------------------------

def format_value(value, sort: Sort) -> str:
    """SMT-LIB literal for a constant value."""
    if sort.is_bool:
        return "true" if value else "false"
    if sort.is_bv:
        return "#b" + format(int(value), f"0{sort.width}b")
    if sort.name == "Int":
        v = int(value)
        return str(v) if v >= 0 else f"(- {-v})"
    if sort.name == "Real":
        return _format_real(Fraction(value))
    if isinstance(value, tuple):
        return "(" + " ".join(str(v) for v in value) + ")"
    return str(value)


def _format_real(v: Fraction) -> str:
    if v < 0:
        return f"(- {_format_real(-v)})"
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"(/ {v.numerator}.0 {v.denominator}.0)"
    digits = max(twos, fives)
    scaled = v * (10 ** digits)
    s = str(scaled.numerator)
    if digits == 0:
        return s + ".0"
    s = s.rjust(digits + 1, "0")
    return s[:-digits] + "." + s[-digits:]


def to_smtlib(t: Term) -> str:
    parts: list[str] = []
    _emit(t, parts)
    return "".join(parts)


def _emit(t: Term, out: list[str]) -> None:
    if isinstance(t, Var):
        out.append(quote_symbol(t.name))
    elif isinstance(t, Const):
        out.append(format_value(t.value, t.sort))
    elif isinstance(t, App):
        if t.op == "const":
            out.append(f"((as const {t.sort}) ")
            _emit(t.args[0], out)
            out.append(")")
            return
        head = t.op
        if t.indices:
            head = "(_ " + t.op + " " + " ".join(map(str, t.indices)) + ")"
        out.append("(" + head)
        for a in t.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")
    elif isinstance(t, Apply):
        if not t.args:
            out.append(quote_symbol(t.fn))
            return
        out.append("(" + quote_symbol(t.fn))
        for a in t.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")
    elif isinstance(t, Let):
        out.append("(let (")
        for i, (n, v) in enumerate(t.bindings):
            if i:
                out.append(" ")
            out.append("(" + quote_symbol(n) + " ")
            _emit(v, out)
            out.append(")")
        out.append(") ")
        _emit(t.body, out)
        out.append(")")
    elif isinstance(t, Quant):
        out.append(f"({t.kind} (")
        out.append(" ".join(f"({quote_symbol(n)} {s})" for n, s in t.params))
        out.append(") ")
        _emit(t.body, out)
        out.append(")")
    elif isinstance(t, Annotated):
        out.append("(! ")
        _emit(t.term, out)
        for k, v in t.attrs:
            out.append(" " + k)
            if v is not None:
                out.append(" " + print_sexpr(v))
        out.append(")")
    else:
        raise TypeError(f"not a term: {t!r}")
