"""Conversion between transition systems and the BTOR2 word-level format.

Towards BTOR2, Booleans become 1-bit vectors. A conjunct ``(= v.next e)``
becomes a ``next`` line, and ``(= v c)`` with constant ``c`` becomes an
``init`` line. Residual init and transition conjuncts are turned into
``constraint`` lines: a ``started`` register (0 then 1) and one register
per variable holding its previous value let the constraint at step i check
the step from i-1 to i, so a counterexample may end in a deadlock state.

From BTOR2, 1-bit nodes become Bool terms; they are bridged into
bit-vector positions with ``ite`` and back with an equality against ``#b1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    LivePropertyUnsupported,
    MalformedBtor,
    UnsupportedNode,
    UnsupportedSort,
    UnsupportedSymbol,
)
from ..model import PropertyKind, PropertySpec, StateVariable, TransitionSystem, VmtDocument
from ..terms import (
    BOOL,
    FALSE,
    TRUE,
    Annotated,
    App,
    Apply,
    Const,
    Let,
    Quant,
    Sort,
    Term,
    Var,
    array_sort,
    bv_const,
    bv_sort,
    conjuncts,
    free_vars,
    inline_lets,
    mk_and,
    mk_eq,
    mk_not,
    mk_or,
    substitute,
)


@dataclass
class BtorLine:
    nid: int
    kind: str
    args: list = field(default_factory=list)
    symbol: str | None = None

    def render(self) -> str:
        parts = [str(self.nid), self.kind, *map(str, self.args)]
        if self.symbol:
            parts.append(self.symbol)
        return " ".join(parts)


@dataclass
class Btor2Document:
    lines: list[BtorLine] = field(default_factory=list)

    def render(self) -> str:
        return "".join(l.render() + "\n" for l in self.lines)

    def __str__(self) -> str:
        return self.render()


# ---------------------------------------------------------------------------
# VMT -> BTOR2

_BV_OPS = {
    "bvnot": "not", "bvneg": "neg", "bvand": "and", "bvor": "or", "bvxor": "xor",
    "bvnand": "nand", "bvnor": "nor", "bvxnor": "xnor", "bvadd": "add", "bvsub": "sub",
    "bvmul": "mul", "bvudiv": "udiv", "bvurem": "urem", "bvsdiv": "sdiv", "bvsrem": "srem",
    "bvsmod": "smod", "bvshl": "sll", "bvlshr": "srl", "bvashr": "sra", "bvult": "ult",
    "bvule": "ulte", "bvugt": "ugt", "bvuge": "ugte", "bvslt": "slt", "bvsle": "slte",
    "bvsgt": "sgt", "bvsge": "sgte", "concat": "concat", "bvcomp": "eq",
}


def _fresh(base: str, taken: set[str]) -> str:
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    taken.add(name)
    return name


def _btor_symbol(name: str) -> str:
    return "".join("_" if ch.isspace() or ch == ";" else ch for ch in name)


class _Builder:
    def __init__(self):
        self.doc = Btor2Document()
        self.sorts: dict[tuple, int] = {}
        self.nodes: dict[tuple, int] = {}

    def emit(self, kind: str, args: list, symbol: str | None = None) -> int:
        nid = len(self.doc.lines) + 1
        self.doc.lines.append(BtorLine(nid, kind, list(args), symbol))
        return nid

    def sort(self, s: Sort) -> int:
        if s.is_bool:
            key = ("bitvec", 1)
        elif s.is_bv:
            key = ("bitvec", s.width)
        elif s.is_array:
            key = ("array", self.sort(s.args[0]), self.sort(s.args[1]))
        else:
            raise UnsupportedSort(s)
        if key not in self.sorts:
            self.sorts[key] = self.emit("sort", list(key))
        return self.sorts[key]

    def node(self, kind: str, sort: Sort, *args) -> int:
        sid = self.sort(sort)
        key = (kind, sid, args)
        if key not in self.nodes:
            self.nodes[key] = self.emit(kind, [sid, *args])
        return self.nodes[key]


class _Encoder:
    def __init__(self, b: _Builder, leaves: dict[str, int]):
        self.b = b
        self.leaves = leaves
        self.cache: dict[Term, int] = {}

    def enc(self, t: Term) -> int:
        r = self.cache.get(t)
        if r is None:
            r = self._enc(t)
            self.cache[t] = r
        return r

    def _enc(self, t: Term) -> int:
        b = self.b
        if isinstance(t, Var):
            if t.name not in self.leaves:
                raise UnsupportedSymbol(t.name)
            return self.leaves[t.name]
        if isinstance(t, Const):
            if t.sort.is_bool:
                return b.node("constd", BOOL, 1 if t.value else 0)
            if t.sort.is_bv:
                return b.node("constd", t.sort, int(t.value))
            raise UnsupportedSort(t.sort)
        if isinstance(t, Annotated):
            return self.enc(t.term)
        if isinstance(t, Let):
            return self.enc(inline_lets(t))
        if isinstance(t, Quant):
            raise UnsupportedSymbol(t.kind)
        if isinstance(t, Apply):
            raise UnsupportedSymbol(t.fn)
        return self._app(t)

    def _fold(self, kind: str, sort: Sort, args) -> int:
        acc = self.enc(args[0])
        for a in args[1:]:
            acc = self.b.node(kind, sort, acc, self.enc(a))
        return acc

    def _app(self, t: App) -> int:
        b, op, args = self.b, t.op, t.args
        if op == "not":
            return b.node("not", BOOL, self.enc(args[0]))
        if op in ("and", "or", "xor"):
            return self._fold(op, BOOL, args)
        if op == "=>":
            acc = self.enc(args[-1])
            for a in reversed(args[:-1]):
                acc = b.node("implies", BOOL, self.enc(a), acc)
            return acc
        if op in ("=", "distinct"):
            kind = "eq" if op == "=" else "neq"
            pairs = list(zip(args, args[1:])) if op == "=" else [
                (x, y) for i, x in enumerate(args) for y in args[i + 1:]]
            nodes = [b.node(kind, BOOL, self.enc(x), self.enc(y)) for x, y in pairs]
            acc = nodes[0]
            for n in nodes[1:]:
                acc = b.node("and", BOOL, acc, n)
            return acc
        if op == "ite":
            return b.node("ite", t.sort, self.enc(args[0]), self.enc(args[1]), self.enc(args[2]))
        if op == "select":
            return b.node("read", t.sort, self.enc(args[0]), self.enc(args[1]))
        if op == "store":
            return b.node("write", t.sort, self.enc(args[0]), self.enc(args[1]), self.enc(args[2]))
        if op == "extract":
            return b.node("slice", t.sort, self.enc(args[0]), *t.indices)
        if op == "zero_extend":
            return b.node("uext", t.sort, self.enc(args[0]), t.indices[0])
        if op == "sign_extend":
            return b.node("sext", t.sort, self.enc(args[0]), t.indices[0])
        if op in ("rotate_left", "rotate_right"):
            w = args[0].sort.width
            amount = b.node("constd", args[0].sort, t.indices[0] % w)
            return b.node("rol" if op == "rotate_left" else "ror", t.sort, self.enc(args[0]), amount)
        if op == "repeat":
            x = self.enc(args[0])
            w = args[0].sort.width
            acc = x
            for i in range(2, t.indices[0] + 1):
                acc = b.node("concat", bv_sort(w * i), acc, x)
            return acc
        if op in _BV_OPS:
            kind = _BV_OPS[op]
            if kind in ("add", "mul", "and", "or", "xor", "concat") and len(args) > 2:
                if kind == "concat":
                    acc, width = self.enc(args[0]), args[0].sort.width
                    for a in args[1:]:
                        width += a.sort.width
                        acc = b.node("concat", bv_sort(width), acc, self.enc(a))
                    return acc
                return self._fold(kind, t.sort, args)
            return b.node(kind, t.sort, *(self.enc(a) for a in args))
        raise UnsupportedSymbol(op)


def _definition(c: Term, var: str) -> Term | None:
    if isinstance(c, App) and c.op == "=" and len(c.args) == 2:
        for lhs, rhs in ((c.args[0], c.args[1]), (c.args[1], c.args[0])):
            if isinstance(lhs, Var) and lhs.name == var:
                return rhs
    if isinstance(c, Var) and c.name == var and c.sort.is_bool:
        return TRUE
    if isinstance(c, App) and c.op == "not" and isinstance(c.args[0], Var) and c.args[0].name == var:
        return FALSE
    return None


def vmt_to_btor(doc: VmtDocument) -> Btor2Document:
    ts = doc.system
    for p in doc.properties:
        if p.kind is not PropertyKind.INVARIANT:
            raise LivePropertyUnsupported(p.index)
    if doc.functions:
        raise UnsupportedSymbol(doc.functions[0].name)
    b = _Builder()
    for s in ts.states:
        b.sort(s.sort)
    for _, srt in ts.inputs:
        b.sort(srt)
    nexts = ts.next_of()
    next_names = set(nexts.values())

    # split transition conjuncts into next functions and residual constraints
    next_fn: dict[str, Term] = {}
    residual_trans: list[Term] = []
    for c in conjuncts(inline_lets(ts.trans)):
        used = False
        for s in ts.states:
            if s.current in next_fn:
                continue
            rhs = _definition(c, s.next)
            if rhs is not None and not (free_vars(rhs) & next_names):
                next_fn[s.current] = rhs
                used = True
                break
        if not used:
            residual_trans.append(c)
    init_val: dict[str, Term] = {}
    residual_init: list[Term] = []
    for c in conjuncts(inline_lets(ts.init)):
        used = False
        for s in ts.states:
            rhs = _definition(c, s.current)
            if s.current not in init_val and isinstance(rhs, Const):
                init_val[s.current] = rhs
                used = True
                break
        if not used:
            residual_init.append(c)

    taken = set(doc.symbols())
    leaves: dict[str, int] = {}
    for s in ts.states:
        leaves[s.current] = b.emit("state", [b.sort(s.sort)], _btor_symbol(s.current))
    for s in ts.states:
        if s.current not in next_fn:
            leaves[s.next] = b.emit("input", [b.sort(s.sort)], _btor_symbol(s.next))
    for n, srt in ts.inputs:
        leaves[n] = b.emit("input", [b.sort(srt)], _btor_symbol(n))

    # registers for the residual constraints
    prev: dict[str, str] = {}
    started = None
    if residual_trans or residual_init:
        started_name = _fresh("started", taken)
        started = b.emit("state", [b.sort(BOOL)], started_name)
        sorts = doc.variable_sorts()
        cur_of = ts.current_of()
        for c in residual_trans:
            for v in sorted(free_vars(c)):
                if v in cur_of or v in prev:
                    continue
                prev[v] = _fresh(f"prev.{v}", taken)
                leaves[prev[v]] = b.emit("state", [b.sort(sorts[v])], _btor_symbol(prev[v]))

    enc = _Encoder(b, leaves)
    for s in ts.states:
        if s.current in init_val:
            b.emit("init", [b.sort(s.sort), leaves[s.current], enc.enc(init_val[s.current])])
    if started is not None:
        b.emit("init", [b.sort(BOOL), started, enc.enc(FALSE)])
    for s in ts.states:
        nxt = enc.enc(next_fn[s.current]) if s.current in next_fn else leaves[s.next]
        b.emit("next", [b.sort(s.sort), leaves[s.current], nxt])
    if started is not None:
        b.emit("next", [b.sort(BOOL), started, enc.enc(TRUE)])
        sorts = doc.variable_sorts()
        for v, pv in prev.items():
            b.emit("next", [b.sort(sorts[v]), leaves[pv], leaves[v]])
        cur_of = ts.current_of()
        started_var = Var(started_name, BOOL)
        enc.leaves[started_name] = started
        shift = {v: Var(pv, sorts[v]) for v, pv in prev.items()}
        shift.update({n: Var(c, sorts[n]) for n, c in cur_of.items()})
        for c in residual_init:
            b.emit("constraint", [enc.enc(mk_or(started_var, c))])
        for c in residual_trans:
            b.emit("constraint", [enc.enc(mk_or(mk_not(started_var), substitute(c, shift)))])
    for p in doc.properties:
        b.emit("bad", [enc.enc(mk_not(p.formula))])
    return b.doc


# ---------------------------------------------------------------------------
# BTOR2 -> VMT

_UNSUPPORTED = {"justice", "fair", "output", "uaddo", "saddo", "sdivo", "umulo", "smulo",
                "usubo", "ssubo"}
_BIN_BV = {
    "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "udiv": "bvudiv", "urem": "bvurem",
    "sdiv": "bvsdiv", "srem": "bvsrem", "smod": "bvsmod", "sll": "bvshl", "srl": "bvlshr",
    "sra": "bvashr", "and": "bvand", "or": "bvor", "xor": "bvxor", "nand": "bvnand",
    "nor": "bvnor", "xnor": "bvxnor",
}
_CMP = {
    "ult": "bvult", "ulte": "bvule", "ugt": "bvugt", "ugte": "bvuge", "slt": "bvslt",
    "slte": "bvsle", "sgt": "bvsgt", "sgte": "bvsge",
}
_BOOL_BIN = {"and", "or", "xor", "nand", "nor", "xnor", "iff", "implies"}
_ARITY = {"not": 1, "inc": 1, "dec": 1, "neg": 1, "redor": 1, "redand": 1, "redxor": 1,
          "ite": 3, "write": 3}


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MalformedBtor(lineno, f"expected {what}, found '{tok}'") from None


def _b2bv(t: Term) -> Term:
    """Bool to 1-bit vector."""
    if isinstance(t, Const) and t.sort.is_bool:
        return bv_const(1 if t.value else 0, 1)
    if t.sort.is_bool:
        return App("ite", (t, bv_const(1, 1), bv_const(0, 1)), bv_sort(1))
    return t


def _bv2b(t: Term) -> Term:
    if isinstance(t, Const) and t.sort == bv_sort(1):
        return TRUE if t.value else FALSE
    if t.sort == bv_sort(1):
        return App("=", (t, bv_const(1, 1)), BOOL)
    return t


class _Reader:
    def __init__(self):
        self.sorts: dict[int, Sort] = {}
        self.nodes: dict[int, Term] = {}
        self.states: list[tuple[int, str]] = []
        self.inputs: list[tuple[str, Sort]] = []
        self.init: list[Term] = []
        self.next: dict[int, Term] = {}
        self.constraints: list[Term] = []
        self.bads: list[Term] = []
        self.taken: set[str] = set()
        self.last_id = 0

    def scalar(self, sid: int, lineno: int) -> Sort:
        """VMT sort of a node of BTOR2 sort ``sid`` (width 1 is Bool)."""
        s = self._sort(sid, lineno)
        return BOOL if s == bv_sort(1) else s

    def _sort(self, sid: int, lineno: int) -> Sort:
        if sid not in self.sorts:
            raise MalformedBtor(lineno, f"unknown sort id {sid}")
        return self.sorts[sid]

    def ref(self, tok: str, lineno: int) -> Term:
        n = _int(tok, lineno, "node id")
        if abs(n) not in self.nodes:
            raise MalformedBtor(lineno, f"reference to undefined node {abs(n)}")
        t = self.nodes[abs(n)]
        if n < 0:
            t = mk_not(t) if t.sort.is_bool else App("bvnot", (t,), t.sort)
        return t

    def name(self, sym: str | None, default: str) -> str:
        return _fresh(sym or default, self.taken)

    def line(self, lineno: int, toks: list[str]) -> None:
        nid = _int(toks[0], lineno, "node id")
        if nid <= self.last_id:
            raise MalformedBtor(lineno, f"node id {nid} is not increasing")
        self.last_id = nid
        if len(toks) < 2:
            raise MalformedBtor(lineno, "missing node kind")
        kind, rest = toks[1], toks[2:]
        if kind in _UNSUPPORTED:
            raise UnsupportedNode(kind, lineno)

        def need(n: int) -> None:
            if len(rest) < n:
                raise MalformedBtor(lineno, f"'{kind}' expects {n} operands")

        if kind == "sort":
            need(2)
            if rest[0] == "bitvec":
                w = _int(rest[1], lineno, "width")
                if w < 1:
                    raise MalformedBtor(lineno, "bit-vector width must be positive")
                self.sorts[nid] = bv_sort(w)
            elif rest[0] == "array":
                need(3)
                i = self._sort(_int(rest[1], lineno, "sort id"), lineno)
                e = self._sort(_int(rest[2], lineno, "sort id"), lineno)
                self.sorts[nid] = array_sort(i, e)
            else:
                raise MalformedBtor(lineno, f"unknown sort kind '{rest[0]}'")
            return
        if kind in ("state", "input"):
            need(1)
            srt = self.scalar(_int(rest[0], lineno, "sort id"), lineno)
            name = self.name(rest[1] if len(rest) > 1 else None, f"{kind[0]}{nid}")
            self.nodes[nid] = Var(name, srt)
            if kind == "state":
                self.states.append((nid, name))
            else:
                self.inputs.append((name, srt))
            return
        if kind in ("init", "next"):
            need(3)
            srt = self.scalar(_int(rest[0], lineno, "sort id"), lineno)
            sid = _int(rest[1], lineno, "state id")
            if not any(n == sid for n, _ in self.states):
                raise MalformedBtor(lineno, f"node {sid} is not a state")
            val = self.ref(rest[2], lineno)
            target = self.nodes[sid]
            if target.sort != srt:
                raise MalformedBtor(lineno, f"sort mismatch in '{kind}'")
            val = self._coerce(val, srt, lineno)
            if kind == "init":
                self.init.append(mk_eq(target, val))
            else:
                if sid in self.next:
                    raise MalformedBtor(lineno, f"second 'next' for state {sid}")
                self.next[sid] = val
            return
        if kind in ("constraint", "bad"):
            need(1)
            cond = _bv2b(self.ref(rest[0], lineno))
            if not cond.sort.is_bool:
                raise MalformedBtor(lineno, f"'{kind}' needs a 1-bit operand")
            (self.constraints if kind == "constraint" else self.bads).append(cond)
            return
        need(1)
        srt = self._sort(_int(rest[0], lineno, "sort id"), lineno)
        self.nodes[nid] = self._coerce(self._op(kind, srt, rest[1:], lineno), self.scalar(int(rest[0]), lineno), lineno)

    def _coerce(self, t: Term, want: Sort, lineno: int) -> Term:
        if t.sort == want:
            return t
        if want.is_bool and t.sort == bv_sort(1):
            return _bv2b(t)
        if want == bv_sort(1) and t.sort.is_bool:
            return _b2bv(t)
        raise MalformedBtor(lineno, f"expected sort {want}, found {t.sort}")

    def _op(self, kind: str, srt: Sort, ops: list[str], lineno: int) -> Term:
        w = srt.width if srt.is_bv else None
        if kind in ("const", "constd", "consth"):
            if not ops:
                raise MalformedBtor(lineno, f"'{kind}' needs a value")
            base = {"const": 2, "constd": 10, "consth": 16}[kind]
            try:
                v = int(ops[0], base)
            except ValueError:
                raise MalformedBtor(lineno, f"bad constant '{ops[0]}'") from None
            return bv_const(v % (1 << w), w)
        if kind in ("zero", "one", "ones"):
            v = {"zero": 0, "one": 1, "ones": (1 << w) - 1}[kind]
            return bv_const(v, w)
        def arity(n: int) -> None:
            if len(ops) < n:
                raise MalformedBtor(lineno, f"'{kind}' expects {n} operands")

        if kind == "slice":
            arity(3)
            a = _b2bv(self.ref(ops[0], lineno))
            u, l = _int(ops[1], lineno, "index"), _int(ops[2], lineno, "index")
            return App("extract", (a,), bv_sort(u - l + 1), (u, l))
        if kind in ("uext", "sext"):
            arity(2)
            a = _b2bv(self.ref(ops[0], lineno))
            n = _int(ops[1], lineno, "width")
            if n == 0:
                return a
            op = "zero_extend" if kind == "uext" else "sign_extend"
            return App(op, (a,), bv_sort(a.sort.width + n), (n,))
        args = [self.ref(tok, lineno) for tok in ops[:_ARITY.get(kind, 2)]]
        if kind == "not":
            arity(1)
            a = args[0]
            return mk_not(a) if a.sort.is_bool else App("bvnot", (a,), a.sort)
        if kind in ("inc", "dec", "neg"):
            arity(1)
            a = _b2bv(args[0])
            if kind == "neg":
                return App("bvneg", (a,), a.sort)
            op = "bvadd" if kind == "inc" else "bvsub"
            return App(op, (a, bv_const(1, a.sort.width)), a.sort)
        if kind in ("redor", "redand", "redxor"):
            arity(1)
            a = _b2bv(args[0])
            aw = a.sort.width
            if kind == "redor":
                return App("distinct", (a, bv_const(0, aw)), BOOL)
            if kind == "redand":
                return App("=", (a, bv_const((1 << aw) - 1, aw)), BOOL)
            bits = [_bv2b(App("extract", (a,), bv_sort(1), (i, i))) for i in range(aw)]
            return bits[0] if aw == 1 else App("xor", tuple(bits), BOOL)
        if kind in ("eq", "neq", "iff"):
            arity(2)
            x, y = args
            if x.sort.is_bool or y.sort.is_bool:
                x, y = _bv2b(x), _bv2b(y)
            t = App("=", (x, y), BOOL)
            return mk_not(t) if kind == "neq" else t
        if kind in _BOOL_BIN and srt == bv_sort(1):
            arity(2)
            x, y = (_bv2b(a) for a in args)
            if kind == "implies":
                return App("=>", (x, y), BOOL)
            base = {"nand": "and", "nor": "or", "xnor": "xor"}.get(kind, kind)
            t = App(base, (x, y), BOOL)
            return mk_not(t) if base != kind else t
        if kind in _BIN_BV:
            arity(2)
            x, y = (_b2bv(a) for a in args)
            return App(_BIN_BV[kind], (x, y), x.sort)
        if kind in _CMP:
            arity(2)
            x, y = (_b2bv(a) for a in args)
            return App(_CMP[kind], (x, y), BOOL)
        if kind in ("rol", "ror"):
            arity(2)
            x, y = (_b2bv(a) for a in args)
            xw = x.sort.width
            r = App("bvurem", (y, bv_const(xw % (1 << xw), xw)), x.sort)
            back = App("bvsub", (bv_const(xw % (1 << xw), xw), r), x.sort)
            first, second = ("bvshl", "bvlshr") if kind == "rol" else ("bvlshr", "bvshl")
            return App("bvor", (App(first, (x, r), x.sort), App(second, (x, back), x.sort)), x.sort)
        if kind == "concat":
            arity(2)
            x, y = (_b2bv(a) for a in args)
            return App("concat", (x, y), bv_sort(x.sort.width + y.sort.width))
        if kind == "ite":
            arity(3)
            c = _bv2b(args[0])
            want = BOOL if srt == bv_sort(1) else srt
            return App("ite", (c, self._coerce(args[1], want, lineno), self._coerce(args[2], want, lineno)), want)
        if kind == "read":
            arity(2)
            arr, i = args
            return App("select", (arr, _b2bv(i)), arr.sort.args[1])
        if kind == "write":
            arity(3)
            arr, i, v = args
            return App("store", (arr, _b2bv(i), _b2bv(v)), arr.sort)
        raise UnsupportedNode(kind, lineno)

    def document(self) -> VmtDocument:
        states = []
        trans = []
        cur_of = {}
        for nid, name in self.states:
            v = self.nodes[nid]
            nname = _fresh(f"{name}.next", self.taken)
            states.append(StateVariable(name, nname, v.sort))
            cur_of[name] = Var(nname, v.sort)
            # states without a next line keep their value
            trans.append(App("=", (cur_of[name], self.next.get(nid, v)), BOOL))
        init = list(self.init)
        input_names = {n for n, _ in self.inputs}
        for c in self.constraints:
            trans.append(c)
            if not (free_vars(c) & input_names):
                # also constrain the successor so the last state of a path is covered
                init.append(c)
                trans.append(substitute(c, cur_of))
        props = []
        for i, bad in enumerate(self.bads):
            if free_vars(bad) & input_names:
                raise UnsupportedNode("bad over inputs")
            props.append(PropertySpec(PropertyKind.INVARIANT, i, mk_not(bad)))
        ts = TransitionSystem(tuple(states), tuple(self.inputs), mk_and(init), mk_and(trans))
        order = [s.current for s in states] + [s.next for s in states] + [n for n, _ in self.inputs]
        return VmtDocument(ts, tuple(props), symbol_order=tuple(order))


def btor_to_vmt(text: str) -> VmtDocument:
    r = _Reader()
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split(";", 1)[0].strip()
        if not body:
            continue
        r.line(lineno, body.split())
    return r.document()
