"""Transition system to a single SMV ``main`` module."""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import UnsupportedSort, UnsupportedSymbol
from ..model import PropertyKind, VmtDocument
from ..terms import Annotated, App, Apply, Const, Let, Quant, Sort, Term, Var, inline_lets

KEYWORDS = frozenset("""
MODULE DEFINE MDEFINE CONSTANTS VAR IVAR FROZENVAR INIT TRANS INVAR SPEC CTLSPEC LTLSPEC
PSLSPEC COMPUTE NAME INVARSPEC FAIRNESS JUSTICE COMPASSION ISA ASSIGN CONSTRAINT SIMPWFF
CTLWFF LTLWFF PSLWFF COMPWFF IN MIN MAX MIRROR PRED PREDICATES process array of boolean
integer real word word1 bool signed unsigned extend resize sizeof uwconst swconst EX AX EF
AF EG AG E F O G H X Y Z A U S V T BU EBF ABF EBG ABG case esac mod next init union in xor
xnor self TRUE FALSE count abs max min toint floor
""".split())

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$#]*\Z")

_BINARY = {
    "and": "&", "or": "|", "=>": "->", "xor": "xor", "=": "=", "<": "<", "<=": "<=",
    ">": ">", ">=": ">=", "+": "+", "*": "*", "-": "-", "/": "/",
    "bvadd": "+", "bvsub": "-", "bvmul": "*", "bvand": "&", "bvor": "|", "bvxor": "xor",
    "bvudiv": "/", "bvurem": "mod", "bvshl": "<<", "bvlshr": ">>", "bvult": "<",
    "bvule": "<=", "bvugt": ">", "bvuge": ">=", "concat": "::",
}
_SIGNED_CMP = {"bvslt": "<", "bvsle": "<=", "bvsgt": ">", "bvsge": ">="}


def smv_sort(s: Sort) -> str:
    if s.is_bool:
        return "boolean"
    if s.name == "Int" and not s.args:
        return "integer"
    if s.name == "Real" and not s.args:
        return "real"
    if s.is_bv:
        return f"word[{s.width}]"
    raise UnsupportedSort(s)


class _Names:
    """Injective map from VMT symbols to SMV identifiers."""

    def __init__(self, names: list[str]):
        self.map: dict[str, str] = {}
        taken: set[str] = set()
        for n in names:
            if _IDENT.match(n) and n not in KEYWORDS:
                self.map[n] = n
                taken.add(n)
        for n in names:
            if n in self.map:
                continue
            base = re.sub(r"[^A-Za-z0-9_$#]", "_", n) or "_"
            if not (base[0].isalpha() or base[0] == "_"):
                base = "_" + base
            cand, i = base, 0
            while cand in taken or cand in KEYWORDS:
                i += 1
                cand = f"{base}_{i}"
            self.map[n] = cand
            taken.add(cand)

    def renamed(self) -> list[tuple[str, str]]:
        return [(k, v) for k, v in self.map.items() if k != v]


class _Printer:
    def __init__(self, names: dict[str, str], next_of: dict[str, str]):
        self.names = names
        self.cur_of_next = next_of

    def expr(self, t: Term) -> str:
        if isinstance(t, Var):
            if t.name in self.cur_of_next:
                return f"next({self.names[self.cur_of_next[t.name]]})"
            if t.name not in self.names:
                raise UnsupportedSymbol(t.name)
            return self.names[t.name]
        if isinstance(t, Const):
            return self._const(t)
        if isinstance(t, Annotated):
            return self.expr(t.term)
        if isinstance(t, Let):
            return self.expr(inline_lets(t))
        if isinstance(t, Quant):
            raise UnsupportedSymbol(t.kind)
        if isinstance(t, Apply):
            raise UnsupportedSymbol(t.fn)
        return self._app(t)

    def sub(self, t: Term) -> str:
        s = self.expr(t)
        if isinstance(t, App) and t.op not in ("ite", "extract", "zero_extend", "sign_extend", "to_real", "abs"):
            return f"({s})"
        if isinstance(t, Const) and s.startswith("-"):
            return f"({s})"
        return s

    def _const(self, t: Const) -> str:
        s = t.sort
        if s.is_bool:
            return "TRUE" if t.value else "FALSE"
        if s.is_bv:
            return f"0ud{s.width}_{t.value}"
        if s.name == "Real":
            v = Fraction(t.value)
            if v.denominator == 1:
                return f"{v.numerator}.0"
            return f"f'{v.numerator}/{v.denominator}"
        return str(t.value)

    def _app(self, t: App) -> str:
        op, args = t.op, t.args
        if op == "not" or op == "bvnot":
            return f"!{self.sub(args[0])}"
        if op == "ite":
            return f"case {self.expr(args[0])} : {self.expr(args[1])}; TRUE : {self.expr(args[2])}; esac"
        if op == "distinct":
            pairs = [f"{self.sub(a)} != {self.sub(b)}" for i, a in enumerate(args) for b in args[i + 1:]]
            return " & ".join(f"({p})" for p in pairs) if len(pairs) > 1 else pairs[0]
        if op == "-" and len(args) == 1 or op == "bvneg":
            return f"-{self.sub(args[0])}"
        if op in ("=", "<", "<=", ">", ">=", "bvult", "bvule", "bvugt", "bvuge") and len(args) > 2:
            sym = _BINARY[op]
            return " & ".join(f"({self.sub(a)} {sym} {self.sub(b)})" for a, b in zip(args, args[1:]))
        if op == "=>" and len(args) > 2:
            out = self.sub(args[-1])
            for a in reversed(args[:-1]):
                out = f"({self.sub(a)} -> {out})"
            return out[1:-1]
        if op in _BINARY:
            return f" {_BINARY[op]} ".join(self.sub(a) for a in args)
        if op in _SIGNED_CMP:
            return f"signed({self.expr(args[0])}) {_SIGNED_CMP[op]} signed({self.expr(args[1])})"
        if op == "bvashr":
            return f"unsigned(signed({self.expr(args[0])}) >> {self.sub(args[1])})"
        if op == "extract":
            return f"{self.sub(args[0])}[{t.indices[0]}:{t.indices[1]}]"
        if op == "zero_extend":
            return f"extend({self.expr(args[0])}, {t.indices[0]})"
        if op == "sign_extend":
            return f"unsigned(extend(signed({self.expr(args[0])}), {t.indices[0]}))"
        if op == "to_real":
            return self.expr(args[0])
        if op == "abs":
            return f"abs({self.expr(args[0])})"
        raise UnsupportedSymbol(op)


def vmt_to_nuxmv(doc: VmtDocument) -> str:
    """Render ``doc`` as SMV text; identifiers are sanitized with the mapping in comments."""
    ts = doc.system
    if doc.functions:
        raise UnsupportedSymbol(doc.functions[0].name)
    decls = [(s.current, s.sort) for s in ts.states] + list(ts.inputs)
    sorts = {n: smv_sort(s) for n, s in decls}
    names = _Names([n for n, _ in decls])
    pr = _Printer(names.map, ts.current_of())
    lines = ["MODULE main"]
    for vmt_name, smv_name in names.renamed():
        lines.append(f"-- {smv_name} is |{vmt_name}|")
    for s in ts.states:
        lines.append(f"VAR {names.map[s.current]} : {sorts[s.current]};")
    for n, _ in ts.inputs:
        lines.append(f"IVAR {names.map[n]} : {sorts[n]};")
    lines.append(f"INIT {pr.expr(ts.init)};")
    lines.append(f"TRANS {pr.expr(ts.trans)};")
    for p in doc.properties:
        if p.kind is PropertyKind.INVARIANT:
            lines.append(f"-- invar-property {p.index}")
            lines.append(f"INVARSPEC {pr.expr(p.formula)}")
        else:
            body = pr.expr(p.formula)
            # temporal prefixes bind loosely in some readers; keep operands explicit
            if isinstance(p.formula, App):
                body = f"({body})"
            lines.append(f"-- live-property {p.index}")
            lines.append(f"LTLSPEC F G {body}")
    return "\n".join(lines) + "\n"
