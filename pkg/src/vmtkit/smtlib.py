"""Parsing and elaboration of the SMT-LIB subset allowed in VMT-LIB files.

``parse_script`` turns text into a list of commands (define-fun bodies stay
as S-expressions); ``elaborate`` sort-checks them against a symbol table and
produces ``FunDef`` records with typed bodies; ``expand_defines`` inlines
macro applications.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import (
    Diagnostic,
    DisallowedCommand,
    DuplicateDeclaration,
    MalformedCommand,
    RecursiveDefinition,
    SortMismatch,
    UnknownSort,
    UnknownSymbol,
)
from .sexpr import (
    BINARY,
    DECIMAL,
    HEXADECIMAL,
    KEYWORD,
    NUMERAL,
    STRING,
    SYMBOL,
    Atom,
    SExpr,
    SList,
    print_sexpr,
    quote_symbol,
    read_all,
)
from .terms import (
    BOOL,
    INT,
    REAL,
    Annotated,
    App,
    Apply,
    Const,
    Let,
    Quant,
    Sort,
    Term,
    Var,
    applied_functions,
    array_sort,
    bv_sort,
    substitute,
)

ALLOWED_COMMANDS = (
    "set-logic", "set-option", "declare-sort", "define-sort",
    "declare-fun", "define-fun",
)

# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class SetLogic:
    name: str
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class SetOption:
    name: str
    value: SExpr | None = None
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class DeclareSort:
    name: str
    arity: int = 0
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class DefineSort:
    name: str
    params: tuple[str, ...]
    body: Sort
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class DeclareFun:
    name: str
    arg_sorts: tuple[Sort, ...]
    sort: Sort
    const: bool = False  # written as declare-const
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class DefineFun:
    name: str
    params: tuple[tuple[str, Sort], ...]
    sort: Sort
    body: SExpr
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class TrailingAssertTrue:
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


Command = Union[SetLogic, SetOption, DeclareSort, DefineSort, DeclareFun, DefineFun, TrailingAssertTrue]


def parse_script(text: str) -> list[Command]:
    """Parse VMT-LIB text into commands, enforcing the command whitelist."""
    exprs = read_all(text)
    commands: list[Command] = []
    for i, e in enumerate(exprs):
        if not isinstance(e, SList) or not e.items:
            raise MalformedCommand("expected a command", e.pos)
        head = e.head_symbol()
        if head is None:
            raise MalformedCommand("command name must be a symbol", e.pos)
        if head == "assert":
            if len(e) == 2 and isinstance(e[1], Atom) and e[1].is_symbol("true"):
                if i != len(exprs) - 1:
                    raise DisallowedCommand("assert", e.pos)
                commands.append(TrailingAssertTrue(e.pos))
                continue
            raise DisallowedCommand("assert", e.pos)
        if head not in ALLOWED_COMMANDS and head != "declare-const":
            raise DisallowedCommand(head, e.pos)
        commands.append(_parse_command(head, e))
    return commands


def _sym(e: SExpr, what: str) -> str:
    if isinstance(e, Atom) and e.kind == SYMBOL:
        return e.text
    raise MalformedCommand(f"expected {what}", e.pos)


def _numeral(e: SExpr, what: str) -> int:
    if isinstance(e, Atom) and e.kind == NUMERAL:
        return int(e.text)
    raise MalformedCommand(f"expected {what}", e.pos)


def parse_sort(e: SExpr) -> Sort:
    """Syntactic sort; aliases and user sorts are resolved during elaboration."""
    if isinstance(e, Atom):
        return Sort(_sym(e, "a sort"))
    if not e.items:
        raise MalformedCommand("empty sort", e.pos)
    head = e.items[0]
    if isinstance(head, SList):
        if head.head_symbol() == "_" and len(head) >= 3:
            name = _sym(head[1], "sort name")
            idx = tuple(_numeral(x, "sort index") for x in head.items[2:])
            return Sort(name, tuple(parse_sort(x) for x in e.items[1:]), idx)
        raise MalformedCommand("malformed sort", e.pos)
    if head.is_symbol("_"):
        if len(e) < 3:
            raise MalformedCommand("malformed indexed sort", e.pos)
        return Sort(_sym(e[1], "sort name"), (), tuple(_numeral(x, "sort index") for x in e.items[2:]))
    if len(e) < 2:
        raise MalformedCommand("malformed sort application", e.pos)
    return Sort(_sym(head, "sort name"), tuple(parse_sort(x) for x in e.items[1:]))


def _sorted_vars(e: SExpr) -> tuple[tuple[str, Sort], ...]:
    if not isinstance(e, SList):
        raise MalformedCommand("expected a parameter list", e.pos)
    out = []
    for p in e.items:
        if not isinstance(p, SList) or len(p) != 2:
            raise MalformedCommand("expected (name sort)", p.pos)
        out.append((_sym(p[0], "parameter name"), parse_sort(p[1])))
    return tuple(out)


def _parse_command(head: str, e: SList) -> Command:
    args = e.items[1:]
    pos = e.pos
    if head == "set-logic":
        if len(args) != 1:
            raise MalformedCommand("set-logic takes one argument", pos)
        return SetLogic(_sym(args[0], "logic name"), pos)
    if head == "set-option":
        if not args or not (isinstance(args[0], Atom) and args[0].kind == KEYWORD) or len(args) > 2:
            raise MalformedCommand("set-option expects a keyword and an optional value", pos)
        return SetOption(args[0].text, args[1] if len(args) == 2 else None, pos)
    if head == "declare-sort":
        if len(args) not in (1, 2):
            raise MalformedCommand("declare-sort expects a name and an arity", pos)
        arity = _numeral(args[1], "arity") if len(args) == 2 else 0
        return DeclareSort(_sym(args[0], "sort name"), arity, pos)
    if head == "define-sort":
        if len(args) != 3 or not isinstance(args[1], SList):
            raise MalformedCommand("define-sort expects name, parameters and body", pos)
        params = tuple(_sym(p, "sort parameter") for p in args[1].items)
        return DefineSort(_sym(args[0], "sort name"), params, parse_sort(args[2]), pos)
    if head == "declare-const":
        if len(args) != 2:
            raise MalformedCommand("declare-const expects a name and a sort", pos)
        return DeclareFun(_sym(args[0], "symbol"), (), parse_sort(args[1]), True, pos)
    if head == "declare-fun":
        if len(args) != 3 or not isinstance(args[1], SList):
            raise MalformedCommand("declare-fun expects name, argument sorts and result sort", pos)
        return DeclareFun(_sym(args[0], "symbol"), tuple(parse_sort(s) for s in args[1].items),
                          parse_sort(args[2]), False, pos)
    if head == "define-fun":
        if len(args) != 4:
            raise MalformedCommand("define-fun expects name, parameters, sort and body", pos)
        return DefineFun(_sym(args[0], "symbol"), _sorted_vars(args[1]), parse_sort(args[2]), args[3], pos)
    raise DisallowedCommand(head, pos)


def print_command(c: Command) -> str:
    if isinstance(c, SetLogic):
        return f"(set-logic {quote_symbol(c.name)})"
    if isinstance(c, SetOption):
        return f"(set-option {c.name}" + ("" if c.value is None else " " + print_sexpr(c.value)) + ")"
    if isinstance(c, DeclareSort):
        return f"(declare-sort {quote_symbol(c.name)} {c.arity})"
    if isinstance(c, DefineSort):
        params = " ".join(quote_symbol(p) for p in c.params)
        return f"(define-sort {quote_symbol(c.name)} ({params}) {c.body})"
    if isinstance(c, DeclareFun):
        if c.const:
            return f"(declare-const {quote_symbol(c.name)} {c.sort})"
        return f"(declare-fun {quote_symbol(c.name)} ({' '.join(map(str, c.arg_sorts))}) {c.sort})"
    if isinstance(c, DefineFun):
        params = " ".join(f"({quote_symbol(n)} {s})" for n, s in c.params)
        return f"(define-fun {quote_symbol(c.name)} ({params}) {c.sort} {print_sexpr(c.body)})"
    if isinstance(c, TrailingAssertTrue):
        return "(assert true)"
    raise TypeError(c)


def print_script(commands: list[Command]) -> str:
    return "".join(print_command(c) + "\n" for c in commands)


# ---------------------------------------------------------------------------
# Symbol table


@dataclass(frozen=True)
class SortDecl:
    name: str
    arity: int


@dataclass(frozen=True)
class SortAlias:
    name: str
    params: tuple[str, ...]
    body: Sort


@dataclass(frozen=True)
class FunDecl:
    name: str
    arg_sorts: tuple[Sort, ...]
    sort: Sort
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[tuple[str, Sort], ...]
    sort: Sort
    body: Term
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass
class SymbolTable:
    logic: str | None = None
    options: list[tuple[str, SExpr | None]] = field(default_factory=list)
    sorts: dict[str, Union[SortDecl, SortAlias]] = field(default_factory=dict)
    funs: dict[str, Union[FunDecl, FunDef]] = field(default_factory=dict)
    warnings: list[Diagnostic] = field(default_factory=list)

    def lookup(self, name: str):
        return self.funs.get(name)

    def declare(self, name: str, entry, pos=None) -> None:
        if name in self.funs or name in _THEORY_SYMBOLS:
            raise DuplicateDeclaration(name, pos)
        self.funs[name] = entry

    def variables(self) -> list[FunDecl]:
        """Declared 0-ary functions in declaration order."""
        return [d for d in self.funs.values() if isinstance(d, FunDecl) and not d.arg_sorts]

    def functions(self) -> list[FunDecl]:
        """Declared functions of arity >= 1 (rigid uninterpreted symbols)."""
        return [d for d in self.funs.values() if isinstance(d, FunDecl) and d.arg_sorts]

    def defines(self) -> list[FunDef]:
        return [d for d in self.funs.values() if isinstance(d, FunDef)]

    def resolve_sort(self, s: Sort, bound: dict[str, Sort] | None = None, pos=None) -> Sort:
        if bound and s.name in bound and not s.args and not s.indices:
            return bound[s.name]
        if s.name in ("Bool", "Int", "Real"):
            if s.args or s.indices:
                raise UnknownSort(str(s), pos)
            return s
        if s.name == "BitVec":
            if s.args or len(s.indices) != 1 or s.indices[0] < 1:
                raise MalformedCommand(f"invalid bit-vector sort {s}", pos)
            return s
        if s.name == "Array":
            if len(s.args) != 2 or s.indices:
                raise UnknownSort(str(s), pos)
            return array_sort(self.resolve_sort(s.args[0], bound, pos), self.resolve_sort(s.args[1], bound, pos))
        entry = self.sorts.get(s.name)
        if entry is None or s.indices:
            raise UnknownSort(s.name, pos)
        args = tuple(self.resolve_sort(a, bound, pos) for a in s.args)
        if isinstance(entry, SortDecl):
            if len(args) != entry.arity:
                raise UnknownSort(f"{s.name} expects {entry.arity} argument(s)", pos)
            return Sort(s.name, args)
        if len(args) != len(entry.params):
            raise UnknownSort(f"{s.name} expects {len(entry.params)} argument(s)", pos)
        return self.resolve_sort(entry.body, dict(zip(entry.params, args)), pos)


# ---------------------------------------------------------------------------
# Elaboration

_CORE_BOOL = {"and", "or", "xor", "=>"}
_ARITH_NARY = {"+", "-", "*"}
_ARITH_CMP = {"<", "<=", ">", ">="}
_BV_UNARY = {"bvnot", "bvneg"}
_BV_BINARY = {
    "bvand", "bvor", "bvxor", "bvnand", "bvnor", "bvxnor", "bvadd", "bvsub", "bvmul",
    "bvudiv", "bvurem", "bvsdiv", "bvsrem", "bvsmod", "bvshl", "bvlshr", "bvashr",
}
_BV_ASSOC = {"bvand", "bvor", "bvxor", "bvadd", "bvmul"}
_BV_CMP = {"bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"}
_BV_INDEXED = {"extract", "zero_extend", "sign_extend", "rotate_left", "rotate_right", "repeat"}

_THEORY_SYMBOLS = (
    {"true", "false", "not", "=", "distinct", "ite", "div", "mod", "abs", "/",
     "to_real", "to_int", "is_int", "select", "store", "concat", "bvcomp"}
    | _CORE_BOOL | _ARITH_NARY | _ARITH_CMP | _BV_UNARY | _BV_BINARY | _BV_CMP
)


def _coerce_arith(op: str, args: list[Term], pos) -> list[Term]:
    """Numeral constants adapt to Real when mixed with Real operands."""
    sorts = {a.sort for a in args}
    if sorts == {INT, REAL}:
        args = [Const(Fraction(a.value), REAL) if a.sort == INT and isinstance(a, Const) else a for a in args]
        for a in args:
            if a.sort != REAL:
                raise SortMismatch(op, REAL, a.sort, pos)
    return args


class Elaborator:
    def __init__(self, st: SymbolTable):
        self.st = st

    def term(self, e: SExpr, scope: dict[str, Term] | None = None) -> Term:
        return self._term(e, scope or {})

    def _term(self, e: SExpr, scope: dict[str, Term]) -> Term:
        if isinstance(e, Atom):
            return self._atom(e, scope)
        if not e.items:
            raise MalformedCommand("empty application", e.pos)
        head = e.items[0]
        if isinstance(head, Atom) and head.kind == SYMBOL:
            name = head.text
            if name == "!":
                return self._annotated(e, scope)
            if name == "let":
                return self._let(e, scope)
            if name in ("forall", "exists"):
                return self._quant(e, scope)
            if name == "_":
                return self._indexed_const(e)
            if name == "as":
                if len(e) != 3:
                    raise MalformedCommand("malformed 'as'", e.pos)
                t = self._term(e[1], scope)
                s = self.st.resolve_sort(parse_sort(e[2]), pos=e.pos)
                if t.sort != s:
                    raise SortMismatch(print_sexpr(e[1]), s, t.sort, e.pos)
                return t
            args = [self._term(a, scope) for a in e.items[1:]]
            return self._apply(name, args, e.pos, scope)
        if isinstance(head, SList):
            hname = head.head_symbol()
            if hname == "_" and len(head) >= 3:
                op = _sym(head[1], "indexed operator")
                idx = tuple(_numeral(x, "index") for x in head.items[2:])
                args = [self._term(a, scope) for a in e.items[1:]]
                return self._indexed(op, idx, args, e.pos)
            if hname == "as" and len(head) == 3 and isinstance(head[1], Atom) and head[1].is_symbol("const"):
                s = self.st.resolve_sort(parse_sort(head[2]), pos=head.pos)
                if not s.is_array or len(e) != 2:
                    raise MalformedCommand("malformed constant array", e.pos)
                v = self._term(e[1], scope)
                if v.sort != s.args[1]:
                    raise SortMismatch("const", s.args[1], v.sort, e.pos)
                return App("const", (v,), s)
        raise MalformedCommand(f"cannot apply {print_sexpr(head)}", e.pos)

    def _atom(self, a: Atom, scope) -> Term:
        if a.kind == NUMERAL:
            return Const(int(a.text), INT)
        if a.kind == DECIMAL:
            return Const(Fraction(a.text), REAL)
        if a.kind == HEXADECIMAL:
            digits = a.text[2:]
            return Const(int(digits, 16), bv_sort(4 * len(digits)))
        if a.kind == BINARY:
            digits = a.text[2:]
            return Const(int(digits, 2), bv_sort(len(digits)))
        if a.kind in (STRING, KEYWORD):
            raise MalformedCommand(f"unexpected {a.kind} literal", a.pos)
        name = a.text
        if name in scope:
            return scope[name]
        if name == "true":
            return Const(True, BOOL)
        if name == "false":
            return Const(False, BOOL)
        return self._apply(name, [], a.pos, scope)

    def _apply(self, name: str, args: list[Term], pos, scope) -> Term:
        entry = self.st.lookup(name)
        if entry is not None:
            if isinstance(entry, FunDecl):
                expected = entry.arg_sorts
            else:
                expected = tuple(s for _, s in entry.params)
            if len(args) != len(expected):
                raise SortMismatch(name, f"{len(expected)} argument(s)", f"{len(args)}", pos)
            args = [_coerce_to(a, s) for a, s in zip(args, expected)]
            for a, s in zip(args, expected):
                if a.sort != s:
                    raise SortMismatch(name, s, a.sort, pos)
            if isinstance(entry, FunDecl) and not args:
                return Var(name, entry.sort)
            return Apply(name, tuple(args), entry.sort)
        if name in _THEORY_SYMBOLS:
            return self._theory(name, args, pos)
        raise UnknownSymbol(name, pos)

    def _theory(self, op: str, args: list[Term], pos) -> Term:
        n = len(args)

        def need(count_ok: bool):
            if not count_ok:
                raise SortMismatch(op, "valid arity", f"{n} argument(s)", pos)

        def all_sort(s: Sort):
            for a in args:
                if a.sort != s:
                    raise SortMismatch(op, s, a.sort, pos)

        if op in ("true", "false"):
            need(n == 0)
            return Const(op == "true", BOOL)
        if op == "not":
            need(n == 1)
            all_sort(BOOL)
            return App(op, tuple(args), BOOL)
        if op in _CORE_BOOL:
            need(n >= 2 or (n == 1 and op in ("and", "or")))
            all_sort(BOOL)
            return App(op, tuple(args), BOOL)
        if op in ("=", "distinct"):
            need(n >= 2)
            if any(a.sort.is_arith for a in args):
                args = _coerce_arith(op, args, pos)
            s = args[0].sort
            all_sort(s)
            return App(op, tuple(args), BOOL)
        if op == "ite":
            need(n == 3)
            if args[0].sort != BOOL:
                raise SortMismatch(op, BOOL, args[0].sort, pos)
            a, b = args[1], args[2]
            if a.sort.is_arith and b.sort.is_arith:
                a, b = _coerce_arith(op, [a, b], pos)
            if a.sort != b.sort:
                raise SortMismatch(op, a.sort, b.sort, pos)
            return App(op, (args[0], a, b), a.sort)
        if op in _ARITH_NARY or op in _ARITH_CMP:
            need(n >= 2 or (n == 1 and op == "-"))
            args = _coerce_arith(op, args, pos)
            s = args[0].sort
            if not s.is_arith:
                raise SortMismatch(op, "Int or Real", s, pos)
            all_sort(s)
            return App(op, tuple(args), BOOL if op in _ARITH_CMP else s)
        if op == "/":
            need(n >= 2)
            args = [Const(Fraction(a.value), REAL) if isinstance(a, Const) and a.sort == INT else a for a in args]
            all_sort(REAL)
            return App(op, tuple(args), REAL)
        if op in ("div", "mod"):
            need(n == 2 if op == "mod" else n >= 2)
            all_sort(INT)
            return App(op, tuple(args), INT)
        if op == "abs":
            need(n == 1)
            all_sort(INT)
            return App(op, tuple(args), INT)
        if op == "to_real":
            need(n == 1)
            all_sort(INT)
            return App(op, tuple(args), REAL)
        if op in ("to_int", "is_int"):
            need(n == 1)
            all_sort(REAL)
            return App(op, tuple(args), INT if op == "to_int" else BOOL)
        if op == "select":
            need(n == 2)
            a, i = args
            if not a.sort.is_array:
                raise SortMismatch(op, "Array", a.sort, pos)
            i = _coerce_to(i, a.sort.args[0])
            if i.sort != a.sort.args[0]:
                raise SortMismatch(op, a.sort.args[0], i.sort, pos)
            return App(op, (a, i), a.sort.args[1])
        if op == "store":
            need(n == 3)
            a, i, v = args
            if not a.sort.is_array:
                raise SortMismatch(op, "Array", a.sort, pos)
            i = _coerce_to(i, a.sort.args[0])
            v = _coerce_to(v, a.sort.args[1])
            if i.sort != a.sort.args[0]:
                raise SortMismatch(op, a.sort.args[0], i.sort, pos)
            if v.sort != a.sort.args[1]:
                raise SortMismatch(op, a.sort.args[1], v.sort, pos)
            return App(op, (a, i, v), a.sort)
        # bit-vectors
        for a in args:
            if not a.sort.is_bv:
                raise SortMismatch(op, "BitVec", a.sort, pos)
        if op in _BV_UNARY:
            need(n == 1)
            return App(op, tuple(args), args[0].sort)
        if op in _BV_BINARY:
            need(n == 2 or (n > 2 and op in _BV_ASSOC))
            all_sort(args[0].sort)
            return App(op, tuple(args), args[0].sort)
        if op in _BV_CMP:
            need(n == 2)
            all_sort(args[0].sort)
            return App(op, tuple(args), BOOL)
        if op == "bvcomp":
            need(n == 2)
            all_sort(args[0].sort)
            return App(op, tuple(args), bv_sort(1))
        if op == "concat":
            need(n >= 2)
            return App(op, tuple(args), bv_sort(sum(a.sort.width for a in args)))
        raise UnknownSymbol(op, pos)

    def _indexed(self, op: str, idx: tuple[int, ...], args: list[Term], pos) -> Term:
        if op not in _BV_INDEXED:
            raise UnknownSymbol(f"(_ {op} ...)", pos)
        if len(args) != 1 or not args[0].sort.is_bv:
            raise SortMismatch(op, "one BitVec argument", ", ".join(str(a.sort) for a in args), pos)
        w = args[0].sort.width
        if op == "extract":
            if len(idx) != 2 or not (w > idx[0] >= idx[1] >= 0):
                raise SortMismatch(op, f"indices within width {w}", f"{idx}", pos)
            s = bv_sort(idx[0] - idx[1] + 1)
        elif len(idx) != 1:
            raise MalformedCommand(f"{op} takes one index", pos)
        elif op in ("zero_extend", "sign_extend"):
            s = bv_sort(w + idx[0])
        elif op == "repeat":
            if idx[0] < 1:
                raise MalformedCommand("repeat count must be positive", pos)
            s = bv_sort(w * idx[0])
        else:
            s = bv_sort(w)
        return App(op, tuple(args), s, idx)

    def _indexed_const(self, e: SList) -> Term:
        if len(e) == 3 and isinstance(e[1], Atom) and e[1].kind == SYMBOL and e[1].text.startswith("bv"):
            digits = e[1].text[2:]
            if digits.isdigit():
                w = _numeral(e[2], "bit-width")
                if w < 1:
                    raise MalformedCommand("bit-width must be positive", e.pos)
                return Const(int(digits) % (1 << w), bv_sort(w))
        raise MalformedCommand(f"unsupported indexed term {print_sexpr(e)}", e.pos)

    def _annotated(self, e: SList, scope) -> Term:
        if len(e) < 3:
            raise MalformedCommand("annotation without attributes", e.pos)
        inner = self._term(e[1], scope)
        attrs = []
        items = e.items[2:]
        i = 0
        while i < len(items):
            k = items[i]
            if not (isinstance(k, Atom) and k.kind == KEYWORD):
                raise MalformedCommand("expected an attribute keyword", k.pos)
            val = None
            if i + 1 < len(items) and not (isinstance(items[i + 1], Atom) and items[i + 1].kind == KEYWORD):
                val = items[i + 1]
                i += 1
            attrs.append((k.text, val))
            i += 1
        return Annotated(inner, tuple(attrs), inner.sort)

    def _let(self, e: SList, scope) -> Term:
        if len(e) != 3 or not isinstance(e[1], SList) or not e[1].items:
            raise MalformedCommand("malformed let", e.pos)
        bindings = []
        for b in e[1].items:
            if not isinstance(b, SList) or len(b) != 2:
                raise MalformedCommand("malformed let binding", b.pos)
            bindings.append((_sym(b[0], "binder"), self._term(b[1], scope)))
        inner = dict(scope)
        for n, v in bindings:
            inner[n] = Var(n, v.sort)
        body = self._term(e[2], inner)
        return Let(tuple(bindings), body, body.sort)

    def _quant(self, e: SList, scope) -> Term:
        if len(e) != 3:
            raise MalformedCommand("malformed quantifier", e.pos)
        params = tuple((n, self.st.resolve_sort(s, pos=e.pos)) for n, s in _sorted_vars(e[1]))
        if not params:
            raise MalformedCommand("quantifier without variables", e.pos)
        inner = dict(scope)
        for n, s in params:
            inner[n] = Var(n, s)
        body = self._term(e[2], inner)
        if body.sort != BOOL:
            raise SortMismatch(e[0].text, BOOL, body.sort, e.pos)
        return Quant(e[0].text, params, body)


def _coerce_to(t: Term, s: Sort) -> Term:
    if s == REAL and t.sort == INT and isinstance(t, Const):
        return Const(Fraction(t.value), REAL)
    return t


def elaborate(commands: list[Command]) -> tuple[SymbolTable, list[FunDef]]:
    """Sort-check commands; returns the symbol table and the typed define-funs."""
    st = SymbolTable()
    el = Elaborator(st)
    defs: list[FunDef] = []
    for c in commands:
        if isinstance(c, SetLogic):
            st.logic = c.name
        elif isinstance(c, SetOption):
            st.options.append((c.name, c.value))
        elif isinstance(c, DeclareSort):
            if c.name in st.sorts or Sort(c.name).is_builtin:
                raise DuplicateDeclaration(c.name, c.pos)
            st.sorts[c.name] = SortDecl(c.name, c.arity)
        elif isinstance(c, DefineSort):
            if c.name in st.sorts or Sort(c.name).is_builtin:
                raise DuplicateDeclaration(c.name, c.pos)
            if not c.params:
                st.resolve_sort(c.body, pos=c.pos)
            else:
                st.warnings.append(Diagnostic(
                    "ParametricSortAlias", "warning",
                    f"parametric sort alias '{c.name}'", c.pos[0], c.pos[1]))
            st.sorts[c.name] = SortAlias(c.name, c.params, c.body)
        elif isinstance(c, DeclareFun):
            args = tuple(st.resolve_sort(s, pos=c.pos) for s in c.arg_sorts)
            st.declare(c.name, FunDecl(c.name, args, st.resolve_sort(c.sort, pos=c.pos), c.pos), c.pos)
        elif isinstance(c, DefineFun):
            params = tuple((n, st.resolve_sort(s, pos=c.pos)) for n, s in c.params)
            sort = st.resolve_sort(c.sort, pos=c.pos)
            # registered before the body so a self-reference elaborates and can
            # be reported as recursion rather than as an unknown symbol
            placeholder = FunDef(c.name, params, sort, Const(True, BOOL), c.pos)
            st.declare(c.name, placeholder, c.pos)
            scope = {n: Var(n, s) for n, s in params}
            body = _coerce_to(el.term(c.body, scope), sort)
            if body.sort != sort:
                raise SortMismatch(c.name, sort, body.sort, c.pos)
            if c.name in applied_functions(body):
                raise RecursiveDefinition(c.name, c.pos)
            fd = FunDef(c.name, params, sort, body, c.pos)
            st.funs[c.name] = fd
            defs.append(fd)
    return st, defs


def elaborate_term(e: SExpr | str, st: SymbolTable) -> Term:
    """Elaborate a single term (given as text or S-expression) against ``st``."""
    if isinstance(e, str):
        items = read_all(e)
        if len(items) != 1:
            raise MalformedCommand("expected exactly one term", (1, 1))
        e = items[0]
    return Elaborator(st).term(e)


def strip_annotations(t: Term) -> Term:
    if isinstance(t, Annotated):
        return strip_annotations(t.term)
    if isinstance(t, App):
        return App(t.op, tuple(strip_annotations(a) for a in t.args), t.sort, t.indices)
    if isinstance(t, Apply):
        return Apply(t.fn, tuple(strip_annotations(a) for a in t.args), t.sort)
    if isinstance(t, Let):
        return Let(tuple((n, strip_annotations(v)) for n, v in t.bindings), strip_annotations(t.body), t.sort)
    if isinstance(t, Quant):
        return Quant(t.kind, t.params, strip_annotations(t.body), t.sort)
    return t


def expand_defines(t: Term, st: SymbolTable, _cache: dict | None = None) -> Term:
    """Inline every define-fun application; annotations are dropped."""
    cache = {} if _cache is None else _cache
    return _expand(t, st, cache, [])


def _expand(t: Term, st: SymbolTable, cache: dict, active: list[str]) -> Term:
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Annotated):
        return _expand(t.term, st, cache, active)
    if isinstance(t, App):
        return App(t.op, tuple(_expand(a, st, cache, active) for a in t.args), t.sort, t.indices)
    if isinstance(t, Let):
        return Let(tuple((n, _expand(v, st, cache, active)) for n, v in t.bindings),
                   _expand(t.body, st, cache, active), t.sort)
    if isinstance(t, Quant):
        return Quant(t.kind, t.params, _expand(t.body, st, cache, active), t.sort)
    if isinstance(t, Apply):
        args = tuple(_expand(a, st, cache, active) for a in t.args)
        entry = st.lookup(t.fn)
        if not isinstance(entry, FunDef):
            return Apply(t.fn, args, t.sort)
        if t.fn in active:
            raise RecursiveDefinition(t.fn, entry.pos)
        body = cache.get(t.fn)
        if body is None:
            active.append(t.fn)
            body = _expand(entry.body, st, cache, active)
            active.pop()
            cache[t.fn] = body
        return substitute(body, {n: a for (n, _), a in zip(entry.params, args)})
    raise TypeError(f"not a term: {t!r}")
