"""Explicit-state reference semantics on finite-domain instances.

Terms are compiled to Python expressions. Successor and initial-state
enumeration is done by generated nested loops that test each conjunct of
the relation as soon as all of its variables are bound, and that compute
a variable directly when a conjunct defines it as ``(= v e)``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .errors import DomainOverflow, UnsupportedForOracle
from .model import PropertyKind, PropertySpec, TransitionSystem, VmtDocument
from .terms import (
    Annotated,
    App,
    Apply,
    Const,
    Let,
    Quant,
    Sort,
    Term,
    Var,
    conjuncts,
    free_vars,
)

MAX_BV_WIDTH = 8
MAX_DOMAIN = 1 << 12


@dataclass(frozen=True)
class DomainBounds:
    """Finite domains: Bool and BitVec are complete, Int uses an interval."""

    int_range: tuple[int, int] = (0, 7)
    overrides: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        for lo, hi in [self.int_range, *self.overrides.values()]:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    def domain(self, name: str, sort: Sort) -> tuple:
        if sort.is_bool:
            return (False, True)
        if sort.name == "Int":
            lo, hi = self.overrides.get(name, self.int_range)
            return tuple(range(lo, hi + 1))
        if sort.is_bv:
            if sort.width > MAX_BV_WIDTH:
                raise UnsupportedForOracle(f"bit-vector width {sort.width} > {MAX_BV_WIDTH} for '{name}'")
            return tuple(range(1 << sort.width))
        if sort.is_array:
            idx = _index_domain(sort.args[0])
            elems = self.domain(name, sort.args[1])
            if len(elems) ** len(idx) > MAX_DOMAIN:
                raise UnsupportedForOracle(f"array domain of '{name}' is too large")
            return tuple(itertools.product(elems, repeat=len(idx)))
        raise UnsupportedForOracle(f"sort {sort} of '{name}' has no finite domain")


def _index_domain(s: Sort) -> tuple:
    if s.is_bool:
        return (False, True)
    if s.is_bv and s.width <= MAX_BV_WIDTH:
        return tuple(range(1 << s.width))
    raise UnsupportedForOracle(f"array index sort {s} is not supported")


@dataclass
class FinitePath:
    states: list[dict]
    inputs: list[dict]

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class Lasso:
    """``stem.states[-1]`` moves with ``stem.inputs[-1]`` back to ``stem.states[loop_start]``."""

    stem: FinitePath
    loop_start: int

    @property
    def loop(self) -> list[dict]:
        return self.stem.states[self.loop_start:]


@dataclass
class ExplicitResult:
    counterexample: FinitePath | None
    exhausted: bool
    reachable: int = 0


# ---------------------------------------------------------------------------
# runtime helpers for compiled code


def _ediv(a, b):
    if b == 0:
        raise UnsupportedForOracle("integer division by zero")
    q = a // b if b > 0 else -(a // -b)
    if a - b * q < 0:
        q += 1 if b < 0 else -1
    return q


def _emod(a, b):
    if b == 0:
        raise UnsupportedForOracle("integer modulo by zero")
    return a - b * _ediv(a, b)


def _rdiv(a, b):
    if b == 0:
        raise UnsupportedForOracle("real division by zero")
    return Fraction(a) / b


def _to_int(a):
    return a.numerator // a.denominator


def _signed(v, w):
    return v - (1 << w) if v >> (w - 1) else v


def _sdiv(a, b, w):
    m = (1 << w) - 1
    sa, sb = _signed(a, w), _signed(b, w)
    if sb == 0:
        return 1 if sa < 0 else m
    q = abs(sa) // abs(sb)
    return (-q if (sa < 0) != (sb < 0) else q) & m


def _srem(a, b, w):
    m = (1 << w) - 1
    sa, sb = _signed(a, w), _signed(b, w)
    if sb == 0:
        return a
    r = abs(sa) % abs(sb)
    return (-r if sa < 0 else r) & m


def _smod(a, b, w):
    m = (1 << w) - 1
    sa, sb = _signed(a, w), _signed(b, w)
    if sb == 0:
        return a
    r = sa % abs(sb)
    if r and sb < 0:
        r += sb
    return r & m


def _ashr(a, b, w):
    if b >= w:
        return (1 << w) - 1 if a >> (w - 1) else 0
    return (_signed(a, w) >> b) & ((1 << w) - 1)


def _rotl(a, n, w):
    n %= w
    return ((a << n) | (a >> (w - n))) & ((1 << w) - 1)


def _sext(a, w, n):
    return (a | (((1 << n) - 1) << w)) if a >> (w - 1) else a


def _store(arr, i, v):
    lst = list(arr)
    lst[i] = v
    return tuple(lst)


def _distinct(*xs):
    return len(set(xs)) == len(xs)


def _one(v, dom):
    return (v,) if v in dom else ()


_RUNTIME = {
    "_F": Fraction, "_ediv": _ediv, "_emod": _emod, "_rdiv": _rdiv, "_to_int": _to_int,
    "_signed": _signed, "_sdiv": _sdiv, "_srem": _srem, "_smod": _smod, "_ashr": _ashr,
    "_rotl": _rotl, "_sext": _sext, "_store": _store, "_distinct": _distinct, "_one": _one,
}


# ---------------------------------------------------------------------------
# term compiler


class _Compiler:
    def __init__(self, slots: Mapping[str, str]):
        self.slots = dict(slots)
        self.counter = 0

    def expr(self, t: Term, env: Mapping[str, str]) -> str:
        if isinstance(t, Var):
            if t.name in env:
                return env[t.name]
            if t.name in self.slots:
                return self.slots[t.name]
            raise UnsupportedForOracle(f"no value for symbol '{t.name}'")
        if isinstance(t, Const):
            return self._const(t)
        if isinstance(t, Annotated):
            return self.expr(t.term, env)
        if isinstance(t, Let):
            names, vals = [], []
            inner = dict(env)
            for n, v in t.bindings:
                self.counter += 1
                py = f"_l{self.counter}"
                names.append(py)
                vals.append(self.expr(v, env))
                inner[n] = py
            return f"(lambda {', '.join(names)}: {self.expr(t.body, inner)})({', '.join(vals)})"
        if isinstance(t, Quant):
            raise UnsupportedForOracle("quantifiers")
        if isinstance(t, Apply):
            raise UnsupportedForOracle(f"uninterpreted function '{t.fn}'")
        if isinstance(t, App):
            return self._app(t, env)
        raise TypeError(t)

    def _const(self, t: Const) -> str:
        if t.sort.is_bool:
            return "True" if t.value else "False"
        if t.sort.name == "Real":
            v = Fraction(t.value)
            return f"_F({v.numerator}, {v.denominator})"
        return repr(int(t.value))

    def _app(self, t: App, env) -> str:
        op = t.op
        a = [self.expr(x, env) for x in t.args]
        if op == "not":
            return f"(not {a[0]})"
        if op == "and":
            return "(" + " and ".join(a) + ")"
        if op == "or":
            return "(" + " or ".join(a) + ")"
        if op == "=>":
            out = a[-1]
            for x in reversed(a[:-1]):
                out = f"((not {x}) or {out})"
            return out
        if op == "xor":
            out = a[0]
            for x in a[1:]:
                out = f"({out} != {x})"
            return out
        if op == "=":
            return "(" + " == ".join(a) + ")"
        if op == "distinct":
            if len(a) == 2:
                return f"({a[0]} != {a[1]})"
            return f"_distinct({', '.join(a)})"
        if op == "ite":
            return f"({a[1]} if {a[0]} else {a[2]})"
        if op in ("<", "<=", ">", ">="):
            return "(" + f" {op} ".join(a) + ")"
        if op == "+":
            return "(" + " + ".join(a) + ")"
        if op == "*":
            return "(" + " * ".join(a) + ")"
        if op == "-":
            if len(a) == 1:
                return f"(-{a[0]})"
            return "(" + " - ".join(a) + ")"
        if op == "div":
            out = a[0]
            for x in a[1:]:
                out = f"_ediv({out}, {x})"
            return out
        if op == "mod":
            return f"_emod({a[0]}, {a[1]})"
        if op == "abs":
            return f"abs({a[0]})"
        if op == "/":
            out = a[0]
            for x in a[1:]:
                out = f"_rdiv({out}, {x})"
            return out
        if op == "to_real":
            return f"_F({a[0]})"
        if op == "to_int":
            return f"_to_int({a[0]})"
        if op == "is_int":
            return f"({a[0]}.denominator == 1)"
        if op == "select":
            if not t.args[0].sort.is_array:
                raise UnsupportedForOracle("select on non-array")
            _index_domain(t.args[0].sort.args[0])
            return f"{a[0]}[{a[1]}]"
        if op == "store":
            _index_domain(t.args[0].sort.args[0])
            return f"_store({a[0]}, {a[1]}, {a[2]})"
        if op == "const":
            n = len(_index_domain(t.sort.args[0]))
            return f"(({a[0]},) * {n})"
        return self._bv(t, a)

    def _bv(self, t: App, a: list[str]) -> str:
        op = t.op
        w = t.args[0].sort.width
        m = (1 << w) - 1
        if op == "bvnot":
            return f"({a[0]} ^ {m})"
        if op == "bvneg":
            return f"((-{a[0]}) & {m})"
        if op in ("bvand", "bvor", "bvxor"):
            sym = {"bvand": "&", "bvor": "|", "bvxor": "^"}[op]
            return "(" + f" {sym} ".join(a) + ")"
        if op in ("bvnand", "bvnor", "bvxnor"):
            sym = {"bvnand": "&", "bvnor": "|", "bvxnor": "^"}[op]
            return f"(({a[0]} {sym} {a[1]}) ^ {m})"
        if op in ("bvadd", "bvmul"):
            sym = "+" if op == "bvadd" else "*"
            return "((" + f" {sym} ".join(a) + f") & {m})"
        if op == "bvsub":
            return f"(({a[0]} - {a[1]}) & {m})"
        if op == "bvudiv":
            return f"(({a[0]} // {a[1]}) if {a[1]} else {m})"
        if op == "bvurem":
            return f"(({a[0]} % {a[1]}) if {a[1]} else {a[0]})"
        if op in ("bvsdiv", "bvsrem", "bvsmod"):
            return f"_{op[2:]}({a[0]}, {a[1]}, {w})"
        if op == "bvshl":
            return f"((({a[0]} << {a[1]}) & {m}) if {a[1]} < {w} else 0)"
        if op == "bvlshr":
            return f"({a[0]} >> {a[1]})"
        if op == "bvashr":
            return f"_ashr({a[0]}, {a[1]}, {w})"
        if op in ("bvult", "bvule", "bvugt", "bvuge"):
            sym = {"bvult": "<", "bvule": "<=", "bvugt": ">", "bvuge": ">="}[op]
            return f"({a[0]} {sym} {a[1]})"
        if op in ("bvslt", "bvsle", "bvsgt", "bvsge"):
            sym = {"bvslt": "<", "bvsle": "<=", "bvsgt": ">", "bvsge": ">="}[op]
            return f"(_signed({a[0]}, {w}) {sym} _signed({a[1]}, {w}))"
        if op == "bvcomp":
            return f"(1 if {a[0]} == {a[1]} else 0)"
        if op == "concat":
            out, acc = a[-1], t.args[-1].sort.width
            for x, arg in zip(reversed(a[:-1]), reversed(t.args[:-1])):
                out = f"(({x} << {acc}) | {out})"
                acc += arg.sort.width
            return out
        if op == "extract":
            i, j = t.indices
            return f"(({a[0]} >> {j}) & {(1 << (i - j + 1)) - 1})"
        if op == "zero_extend":
            return a[0]
        if op == "sign_extend":
            return f"_sext({a[0]}, {w}, {t.indices[0]})"
        if op == "rotate_left":
            return f"_rotl({a[0]}, {t.indices[0]}, {w})"
        if op == "rotate_right":
            return f"_rotl({a[0]}, {w - (t.indices[0] % w)}, {w})"
        if op == "repeat":
            out = a[0]
            for _ in range(t.indices[0] - 1):
                out = f"(({out} << {w}) | {a[0]})"
            return out
        raise UnsupportedForOracle(f"operator '{op}'")


@lru_cache(maxsize=4096)
def _compile_fn(t: Term, params: tuple[tuple[str, ...], ...]):
    """Compile ``t`` into a function taking one tuple per name group."""
    slots = {}
    for g, names in enumerate(params):
        for i, n in enumerate(names):
            slots.setdefault(n, f"_a{g}[{i}]")
    body = _Compiler(slots).expr(t, {})
    args = ", ".join(f"_a{g}" for g in range(len(params)))
    return eval(f"lambda {args}: {body}", dict(_RUNTIME))


def evaluate(
    t: Term,
    state: Mapping[str, object] | None = None,
    inputs: Mapping[str, object] | None = None,
    next_state: Mapping[str, object] | None = None,
    ts: TransitionSystem | VmtDocument | None = None,
    bounds: DomainBounds | None = None,
):
    """Value of ``t`` under the given assignments.

    ``next_state`` is keyed by current-state names when ``ts`` is given
    (values are then bound to the corresponding next-state symbols).
    """
    if isinstance(ts, VmtDocument):
        ts = ts.system
    env: dict[str, object] = {}
    env.update(state or {})
    env.update(inputs or {})
    if next_state:
        nxt = ts.next_of() if ts is not None else {}
        for k, v in next_state.items():
            env[nxt.get(k, k)] = v
    if bounds is not None and ts is not None:
        sorts = {s.current: s.sort for s in ts.states}
        sorts.update(dict(ts.inputs))
        cur_of = ts.current_of()
        for k, v in env.items():
            base = cur_of.get(k, k)
            if base in sorts and v not in bounds.domain(base, sorts[base]):
                raise DomainOverflow(f"value {v!r} of '{k}' is outside its domain")
    missing = free_vars(t) - env.keys()
    if missing:
        raise UnsupportedForOracle(f"no value for symbol(s) {sorted(missing)}")
    names = tuple(sorted(env))
    fn = _compile_fn(t, (names,))
    return fn(tuple(env[n] for n in names))


# ---------------------------------------------------------------------------
# enumerators


def _build_enumerator(conjs: list[Term], fixed: list[str], loop: list[str],
                      domains: dict[str, tuple], out_groups: list[list[str]]):
    """Generate ``f(fixed_tuple) -> list`` enumerating all loop-var assignments
    satisfying every conjunct; each result is a tuple of tuples per out group."""
    loop_set = set(loop)
    info = []
    for c in conjs:
        fv = free_vars(c)
        unknown = fv - loop_set - set(fixed)
        if unknown:
            raise UnsupportedForOracle(f"no value for symbol(s) {sorted(unknown)}")
        info.append((c, fv & loop_set))

    def definition(c: Term):
        if isinstance(c, App) and c.op == "=" and len(c.args) == 2:
            for lhs, rhs in ((c.args[0], c.args[1]), (c.args[1], c.args[0])):
                if isinstance(lhs, Var) and lhs.name in loop_set and lhs.name not in free_vars(rhs):
                    return lhs.name, rhs
        return None

    defs = [(i, definition(c)) for i, (c, _) in enumerate(info)]
    bound: set[str] = set()
    order: list[tuple[str, Term | None, int | None]] = []
    remaining = list(loop)
    while remaining:
        pick = None
        for i, d in defs:
            if d and d[0] in remaining and (free_vars(d[1]) & loop_set) <= bound:
                pick = (d[0], d[1], i)
                break
        if pick is None:
            def score(v):
                done = sum(1 for c, fv in info if v in fv and fv <= bound | {v})
                return (-done, len(domains[v]), remaining.index(v))
            v = min(remaining, key=score)
            pick = (v, None, None)
        order.append(pick)
        remaining.remove(pick[0])
        bound.add(pick[0])

    local = {n: f"v{i}" for i, n in enumerate(loop)}
    slots = {n: f"f[{i}]" for i, n in enumerate(fixed)}
    slots.update(local)
    comp = _Compiler(slots)
    glob = dict(_RUNTIME)
    lines = ["def _enum(f):", "    out = []"]
    indent = "    "
    emitted: set[int] = set()
    done: set[str] = set()
    for i, (c, fv) in enumerate(info):
        if not fv:
            lines.append(f"{indent}if not {comp.expr(c, {})}: return out")
            emitted.add(i)
    for k, (v, rhs, di) in enumerate(order):
        glob[f"D{k}"] = domains[v]
        if rhs is not None:
            glob[f"S{k}"] = frozenset(domains[v])
            lines.append(f"{indent}for {local[v]} in _one({comp.expr(rhs, {})}, S{k}):")
            emitted.add(di)
        else:
            lines.append(f"{indent}for {local[v]} in D{k}:")
        indent += "    "
        done.add(v)
        for i, (c, fv) in enumerate(info):
            if i not in emitted and fv <= done:
                lines.append(f"{indent}if not {comp.expr(c, {})}: continue")
                emitted.add(i)
    res = ", ".join("(" + "".join(f"{local[n]}, " for n in g) + ")" for g in out_groups)
    lines.append(f"{indent}out.append(({res},))")
    lines.append("    return out")
    exec("\n".join(lines), glob)
    return glob["_enum"]


class ExplicitSystem:
    """Finite-domain instance of a transition system with compiled relations."""

    def __init__(self, ts: TransitionSystem | VmtDocument, bounds: DomainBounds | None = None):
        if isinstance(ts, VmtDocument):
            if ts.functions:
                raise UnsupportedForOracle(f"uninterpreted function '{ts.functions[0].name}'")
            ts = ts.system
        self.ts = ts
        self.bounds = bounds or DomainBounds()
        self.cur = [s.current for s in ts.states]
        self.nxt = [s.next for s in ts.states]
        self.inp = [n for n, _ in ts.inputs]
        doms: dict[str, tuple] = {}
        for s in ts.states:
            doms[s.current] = doms[s.next] = self.bounds.domain(s.current, s.sort)
        for n, srt in ts.inputs:
            doms[n] = self.bounds.domain(n, srt)
        self.domains = doms
        self._init = _build_enumerator(conjuncts(ts.init), [], self.cur, doms, [self.cur])
        self._succ = _build_enumerator(conjuncts(ts.trans), self.cur, self.inp + self.nxt, doms,
                                       [self.inp, self.nxt])
        self._succ_cache: dict[tuple, list] = {}

    def initial_states(self) -> list[tuple]:
        return [r[0] for r in self._init(())]

    def successors(self, s: tuple) -> list[tuple[tuple, tuple]]:
        r = self._succ_cache.get(s)
        if r is None:
            r = self._succ(s)
            self._succ_cache[s] = r
        return r

    def predicate(self, t: Term):
        fn = _compile_fn(t, (tuple(self.cur),))
        return fn

    def state_dict(self, s: tuple) -> dict:
        return dict(zip(self.cur, s))

    def input_dict(self, y: tuple) -> dict:
        return dict(zip(self.inp, y))


def successors(ts, s: Mapping[str, object], bounds: DomainBounds | None = None) -> set:
    """All (input assignment, successor state) pairs of state ``s``."""
    es = ExplicitSystem(ts, bounds)
    st = tuple(s[n] for n in es.cur)
    return {
        (tuple(sorted(es.input_dict(y).items())), tuple(sorted(es.state_dict(n).items())))
        for y, n in es.successors(st)
    }


def _check_kind(p: PropertySpec, kind: PropertyKind) -> None:
    if p.kind is not kind:
        raise ValueError(f"property {p.index} is not a {kind} property")


def check_invariant_explicit(ts, p: PropertySpec, bounds: DomainBounds | None = None,
                             max_depth: int = 10, system: ExplicitSystem | None = None) -> ExplicitResult:
    """Breadth-first search for a shortest path to a state violating ``p``."""
    _check_kind(p, PropertyKind.INVARIANT)
    es = system or ExplicitSystem(ts, bounds)
    holds = es.predicate(p.formula)
    parent: dict[tuple, tuple | None] = {}
    frontier = []
    for s in es.initial_states():
        if s not in parent:
            parent[s] = None
            frontier.append(s)
    depth = 0
    while True:
        for s in frontier:
            if not holds(s):
                return ExplicitResult(_path_to(es, parent, s), False, len(parent))
        if not frontier:
            return ExplicitResult(None, True, len(parent))
        if depth == max_depth:
            return ExplicitResult(None, False, len(parent))
        depth += 1
        nxt = []
        for s in frontier:
            for y, n in es.successors(s):
                if n not in parent:
                    parent[n] = (s, y)
                    nxt.append(n)
        frontier = nxt


def _path_to(es: ExplicitSystem, parent: dict, s: tuple) -> FinitePath:
    states, inputs = [s], []
    while parent[s] is not None:
        prev, y = parent[s]
        states.append(prev)
        inputs.append(y)
        s = prev
    states.reverse()
    inputs.reverse()
    return FinitePath([es.state_dict(x) for x in states], [es.input_dict(y) for y in inputs])


def reachable_graph(es: ExplicitSystem) -> tuple[dict, list[tuple]]:
    """BFS parents and discovery order of all reachable states."""
    parent: dict[tuple, tuple | None] = {}
    order: list[tuple] = []
    queue = deque()
    for s in es.initial_states():
        if s not in parent:
            parent[s] = None
            order.append(s)
            queue.append(s)
    while queue:
        s = queue.popleft()
        for y, n in es.successors(s):
            if n not in parent:
                parent[n] = (s, y)
                order.append(n)
                queue.append(n)
    return parent, order


def _cycle_through(es: ExplicitSystem, s: tuple) -> list[tuple[tuple, tuple]] | None:
    """Shortest cycle s -> ... -> s as a list of (input, state) steps."""
    back: dict[tuple, tuple | None] = {}
    queue = deque()
    for y, n in es.successors(s):
        if n == s:
            return [(y, s)]
        if n not in back:
            back[n] = (s, y)
            queue.append(n)
    while queue:
        u = queue.popleft()
        for y, n in es.successors(u):
            if n == s:
                steps = [(y, s)]
                while u != s:
                    prev, yy = back[u]
                    steps.append((yy, u))
                    u = prev
                steps.reverse()
                return steps
            if n not in back:
                back[n] = (u, y)
                queue.append(n)
    return None


def check_live_explicit(ts, p: PropertySpec, bounds: DomainBounds | None = None,
                        system: ExplicitSystem | None = None) -> Lasso | None:
    """A reachable cycle visiting a state violating ``p``, or None."""
    _check_kind(p, PropertyKind.LIVE)
    es = system or ExplicitSystem(ts, bounds)
    holds = es.predicate(p.formula)
    parent, order = reachable_graph(es)
    for s in order:
        if holds(s):
            continue
        cycle = _cycle_through(es, s)
        if cycle is None:
            continue
        stem = _path_to(es, parent, s)
        loop_start = len(stem.states) - 1
        states = stem.states + [es.state_dict(n) for _, n in cycle[:-1]]
        inputs = stem.inputs + [es.input_dict(y) for y, _ in cycle]
        return Lasso(FinitePath(states, inputs), loop_start)
    return None


def replay_path(ts: TransitionSystem, path: FinitePath) -> bool:
    """True iff ``path`` starts in an initial state and follows the relation."""
    if not path.states:
        return False
    if not evaluate(ts.init, path.states[0]):
        return False
    for i in range(len(path.states) - 1):
        if not evaluate(ts.trans, path.states[i], path.inputs[i], path.states[i + 1], ts=ts):
            return False
    return True


def replay_lasso(ts: TransitionSystem, lasso: Lasso, p: PropertySpec) -> bool:
    """Lasso closes, follows the relation, and violates ``p`` inside the loop."""
    st = lasso.stem
    if not replay_path(ts, FinitePath(st.states, st.inputs[:-1])):
        return False
    if not evaluate(ts.trans, st.states[-1], st.inputs[-1], st.states[lasso.loop_start], ts=ts):
        return False
    return any(not evaluate(p.formula, s) for s in lasso.loop)
