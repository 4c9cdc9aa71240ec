"""Shared test utilities: random Boolean systems, an explicit LTL checker and a
BTOR2 well-formedness checker. None of these reuse toolkit code paths, so they
can serve as independent oracles."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

# ---------------------------------------------------------------------------
# Boolean expressions as nested tuples: ("var", name) | ("const", bool) |
# ("not", e) | ("and", e1, e2) | ("or", e1, e2) | ("xor", e1, e2) | ("ite", c, a, b)


def bool_expr(rng: random.Random, names: list[str], depth: int) -> tuple:
    if depth == 0 or rng.random() < 0.25:
        if not names or rng.random() < 0.1:
            return ("const", rng.random() < 0.5)
        return ("var", rng.choice(names))
    op = rng.choice(["not", "and", "or", "xor", "ite"])
    if op == "not":
        return ("not", bool_expr(rng, names, depth - 1))
    if op == "ite":
        return ("ite",) + tuple(bool_expr(rng, names, depth - 1) for _ in range(3))
    return (op, bool_expr(rng, names, depth - 1), bool_expr(rng, names, depth - 1))


def to_smt(e: tuple) -> str:
    if e[0] == "var":
        return e[1]
    if e[0] == "const":
        return "true" if e[1] else "false"
    return "(" + " ".join([e[0]] + [to_smt(a) for a in e[1:]]) + ")"


def eval_expr(e: tuple, env: dict) -> bool:
    op = e[0]
    if op == "var":
        return env[e[1]]
    if op == "const":
        return e[1]
    if op == "not":
        return not eval_expr(e[1], env)
    if op == "and":
        return eval_expr(e[1], env) and eval_expr(e[2], env)
    if op == "or":
        return eval_expr(e[1], env) or eval_expr(e[2], env)
    if op == "xor":
        return eval_expr(e[1], env) != eval_expr(e[2], env)
    if op == "ite":
        return eval_expr(e[2], env) if eval_expr(e[1], env) else eval_expr(e[3], env)
    raise ValueError(op)


@dataclass
class BoolSystem:
    """Random Boolean transition system with a native successor function.

    State variables either get a functional update ``v' = f`` or are left to
    the extra ``relations`` over current, next and input variables.
    """

    nvars: int
    ninputs: int
    init: tuple
    updates: dict = field(default_factory=dict)
    relations: list = field(default_factory=list)
    prop: tuple = ("const", True)

    @property
    def names(self) -> list[str]:
        return [f"v{i}" for i in range(self.nvars)]

    @property
    def inputs(self) -> list[str]:
        return [f"i{i}" for i in range(self.ninputs)]

    def to_vmt(self, kind: str = "invar-property", idx: int = 0) -> str:
        lines = []
        for n in self.names:
            lines.append(f"(declare-fun {n} () Bool)")
            lines.append(f"(declare-fun {n}.next () Bool)")
            lines.append(f"(define-fun sv.{n} () Bool (! {n} :next {n}.next))")
        for n in self.inputs:
            lines.append(f"(declare-fun {n} () Bool)")
        lines.append(f"(define-fun init () Bool (! {to_smt(self.init)} :init))")
        conj = [f"(= {n}.next {to_smt(f)})" for n, f in self.updates.items()]
        conj += [to_smt(r) for r in self.relations]
        trans = "(and " + " ".join(conj) + ")" if conj else "true"
        lines.append(f"(define-fun trans () Bool (! {trans} :trans))")
        lines.append(f"(define-fun p () Bool (! {to_smt(self.prop)} :{kind} {idx}))")
        return "\n".join(lines) + "\n"

    def states(self) -> list[tuple]:
        return list(itertools.product([False, True], repeat=self.nvars))

    def env(self, s: tuple) -> dict:
        return dict(zip(self.names, s))

    def initial(self) -> list[tuple]:
        return [s for s in self.states() if eval_expr(self.init, self.env(s))]

    def successors(self, s: tuple) -> set[tuple]:
        out = set()
        cur = self.env(s)
        for ins in itertools.product([False, True], repeat=self.ninputs):
            env = dict(cur)
            env.update(zip(self.inputs, ins))
            for t in self.states():
                full = dict(env)
                full.update({f"{n}.next": v for n, v in zip(self.names, t)})
                if all(eval_expr(f, env) == full[f"{n}.next"] for n, f in self.updates.items()) and \
                        all(eval_expr(r, full) for r in self.relations):
                    out.add(t)
        return out

    def graph(self) -> tuple[list[tuple], dict[tuple, set[tuple]]]:
        """Initial states and the successor map restricted to reachable states."""
        init = self.initial()
        succ: dict[tuple, set[tuple]] = {}
        work = list(init)
        while work:
            s = work.pop()
            if s in succ:
                continue
            succ[s] = self.successors(s)
            work.extend(succ[s])
        return init, succ

    def min_violation_depth(self) -> int | None:
        """BFS depth of the nearest reachable state violating ``prop``."""
        frontier = self.initial()
        seen = set(frontier)
        depth = 0
        while frontier:
            if any(not eval_expr(self.prop, self.env(s)) for s in frontier):
                return depth
            nxt = []
            for s in frontier:
                for t in self.successors(s):
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
            frontier = nxt
            depth += 1
        return None

    def has_bad_cycle(self) -> bool:
        """Reachable cycle through a state violating ``prop`` (FG prop fails)."""
        init, succ = self.graph()
        for b in succ:
            if eval_expr(self.prop, self.env(b)):
                continue
            seen, work = set(), list(succ[b])
            while work:
                s = work.pop()
                if s == b:
                    return True
                if s not in seen:
                    seen.add(s)
                    work.extend(succ[s])
        return False


def random_bool_system(rng: random.Random, max_vars: int = 4, max_inputs: int = 2,
                       nvars: int | None = None) -> BoolSystem:
    n = nvars if nvars is not None else rng.randint(1, max_vars)
    m = rng.randint(0, max_inputs)
    names = [f"v{i}" for i in range(n)]
    inputs = [f"i{i}" for i in range(m)]
    sys_ = BoolSystem(n, m, bool_expr(rng, names, 2))
    for v in names:
        if rng.random() < 0.75:
            sys_.updates[v] = bool_expr(rng, names + inputs, 3)
    rel_names = names + inputs + [f"{v}.next" for v in names if v not in sys_.updates]
    for _ in range(rng.randint(0, 2)):
        sys_.relations.append(bool_expr(rng, rel_names, 2))
    sys_.prop = bool_expr(rng, names, 3)
    return sys_


# ---------------------------------------------------------------------------
# LTL formulas as nested tuples: ("ap", name) | ("true",) | ("false",) |
# ("not", f) | ("X", f) | ("F", f) | ("G", f) | ("and"|"or"|"implies"|"U"|"R", f, g)

LTL_UNARY = ("not", "X", "F", "G")
LTL_BINARY = ("and", "or", "implies", "U", "R")


def ltl_text(f: tuple) -> str:
    op = f[0]
    if op == "ap":
        return f[1]
    if op in ("true", "false"):
        return op
    if op == "not":
        return f"!({ltl_text(f[1])})"
    if op in ("X", "F", "G"):
        return f"{op} ({ltl_text(f[1])})"
    sym = {"and": "&", "or": "|", "implies": "->", "U": "U", "R": "R"}[op]
    return f"({ltl_text(f[1])}) {sym} ({ltl_text(f[2])})"


def ltl_formulas(atoms: list[str], depth: int) -> list[tuple]:
    """Every formula of depth at most ``depth`` (atoms have depth 1)."""
    levels = [[("ap", a) for a in atoms]]
    for _ in range(depth - 1):
        below = [f for lvl in levels for f in lvl]
        top = levels[-1]
        top_set = set(top)
        new = [(op, f) for op in LTL_UNARY for f in top]
        for op in LTL_BINARY:
            for f in below:
                for g in below:
                    if f in top_set or g in top_set:
                        new.append((op, f, g))
        levels.append(new)
    return [f for lvl in levels for f in lvl]


def _closure(f: tuple, acc: list) -> None:
    if f in acc:
        return
    for a in f[1:]:
        if isinstance(a, tuple):
            _closure(a, acc)
    acc.append(f)


def ltl_holds_somewhere_fairly(sys_: BoolSystem, phi: tuple) -> bool:
    """True iff some infinite path of ``sys_`` from an initial state satisfies ``phi``.

    Explicit product of the state graph with closure atoms: each node guesses
    the truth of every temporal subformula; edges enforce the one-step
    expansion laws and fairness demands that every pending eventuality is
    eventually fulfilled inside the chosen strongly connected component.
    """
    cl: list = []
    _closure(phi, cl)
    temporal = [g for g in cl if g[0] in ("X", "F", "G", "U", "R")]
    init, succ = sys_.graph()

    def value(g, s, guess):
        op = g[0]
        if op == "ap":
            return s[int(g[1][1:])]
        if op == "true":
            return True
        if op == "false":
            return False
        if op == "not":
            return not value(g[1], s, guess)
        if op == "and":
            return value(g[1], s, guess) and value(g[2], s, guess)
        if op == "or":
            return value(g[1], s, guess) or value(g[2], s, guess)
        if op == "implies":
            return (not value(g[1], s, guess)) or value(g[2], s, guess)
        return guess[g]

    nodes = []
    for s in succ:
        for bits in itertools.product([False, True], repeat=len(temporal)):
            guess = dict(zip(temporal, bits))
            ok = True
            for g in temporal:
                # local consistency of the guess with the current state
                if g[0] == "G" and guess[g] and not value(g[1], s, guess):
                    ok = False
                if g[0] == "F" and not guess[g] and value(g[1], s, guess):
                    ok = False
                if g[0] == "U":
                    p, q = value(g[1], s, guess), value(g[2], s, guess)
                    if q and not guess[g] or (not p and not q and guess[g]):
                        ok = False
                if g[0] == "R":
                    p, q = value(g[1], s, guess), value(g[2], s, guess)
                    if not q and guess[g] or (p and q and not guess[g]):
                        ok = False
            if ok:
                nodes.append((s, bits))

    def edge_ok(a, b) -> bool:
        (s, ba), (t, bb) = a, b
        ga, gb = dict(zip(temporal, ba)), dict(zip(temporal, bb))
        for g in temporal:
            op = g[0]
            if op == "X":
                if ga[g] != value(g[1], t, gb):
                    return False
            elif op == "F":
                if not value(g[1], s, ga) and ga[g] != gb[g]:
                    return False
            elif op == "G":
                if value(g[1], s, ga) and ga[g] != gb[g]:
                    return False
            elif op == "U":
                p, q = value(g[1], s, ga), value(g[2], s, ga)
                if p and not q and ga[g] != gb[g]:
                    return False
            elif op == "R":
                p, q = value(g[1], s, ga), value(g[2], s, ga)
                if q and not p and ga[g] != gb[g]:
                    return False
        return True

    by_state: dict = {}
    for n in nodes:
        by_state.setdefault(n[0], []).append(n)
    edges = {n: [m for t in succ[n[0]] for m in by_state.get(t, []) if edge_ok(n, m)] for n in nodes}
    starts = [n for n in nodes if n[0] in init and value(phi, n[0], dict(zip(temporal, n[1])))]

    reach, work = set(), list(starts)
    while work:
        n = work.pop()
        if n not in reach:
            reach.add(n)
            work.extend(edges[n])

    # eventualities: a true F or U and a false G or R each promise a witness
    def fulfilled(g, n) -> bool:
        guess = dict(zip(temporal, n[1]))
        if g[0] == "F":
            return not guess[g] or value(g[1], n[0], guess)
        if g[0] == "U":
            return not guess[g] or value(g[2], n[0], guess)
        if g[0] == "G":
            return guess[g] or not value(g[1], n[0], guess)
        return guess[g] or not value(g[2], n[0], guess)

    evs = [g for g in temporal if g[0] != "X"]
    for comp in _sccs({n: [m for m in edges[n] if m in reach] for n in reach}):
        if len(comp) == 1:
            (n,) = comp
            if n not in edges[n]:
                continue
        if all(any(fulfilled(g, n) for n in comp) for g in evs):
            return True
    return False


def _sccs(graph: dict) -> list[set]:
    index: dict = {}
    low: dict = {}
    stack: list = []
    on: set = set()
    out: list[set] = []
    counter = itertools.count()
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(graph[w])))
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on.discard(w)
                        comp.add(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


# ---------------------------------------------------------------------------
# BTOR2 well-formedness


_BTOR_UNARY = {"not", "inc", "dec", "neg", "redand", "redor", "redxor"}
_BTOR_BINARY_SAME = {"and", "nand", "nor", "or", "xnor", "xor", "add", "mul", "sdiv", "udiv",
                     "smod", "srem", "urem", "sub", "sll", "sra", "srl", "rol", "ror"}
_BTOR_CMP = {"eq", "neq", "sgt", "sgte", "slt", "slte", "ugt", "ugte", "ult", "ulte", "iff", "implies"}


def btor2_problems(text: str) -> list[str]:
    """Well-formedness violations: id order, dangling references, sort agreement."""
    problems: list[str] = []
    sorts: dict[int, tuple] = {}
    nodes: dict[int, tuple] = {}
    states: set[int] = set()
    last = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].split()
        if not line:
            continue
        try:
            nid = int(line[0])
        except ValueError:
            problems.append(f"{lineno}: bad id")
            continue
        if nid <= last:
            problems.append(f"{lineno}: id {nid} not increasing")
        last = max(last, nid)
        kind, rest = line[1], line[2:]

        def ref(tok):
            i = int(tok)
            if abs(i) not in nodes:
                problems.append(f"{lineno}: undefined node {tok}")
                return None
            return nodes[abs(i)]

        def sort(tok):
            i = int(tok)
            if i not in sorts:
                problems.append(f"{lineno}: undefined sort {tok}")
                return None
            return sorts[i]

        if kind == "sort":
            if rest[0] == "bitvec":
                sorts[nid] = ("bv", int(rest[1]))
            elif rest[0] == "array":
                sorts[nid] = ("array", sort(rest[1]), sort(rest[2]))
            else:
                problems.append(f"{lineno}: unknown sort kind")
            continue
        if kind in ("bad", "constraint", "fair", "output"):
            a = ref(rest[0])
            if kind != "output" and a is not None and a != ("bv", 1):
                problems.append(f"{lineno}: {kind} needs a 1-bit argument")
            continue
        if kind in ("init", "next"):
            s, st, v = sort(rest[0]), ref(rest[1]), ref(rest[2])
            if int(rest[1]) not in states:
                problems.append(f"{lineno}: {kind} target is not a state")
            if s is not None and (st != s or v != s):
                problems.append(f"{lineno}: {kind} sort mismatch")
            continue
        s = sort(rest[0])
        if kind in ("state", "input"):
            if kind == "state":
                states.add(nid)
        elif kind in ("zero", "one", "ones", "const", "constd", "consth"):
            pass
        elif kind in _BTOR_UNARY:
            a = ref(rest[1])
            want = ("bv", 1) if kind.startswith("red") else a
            if s != want:
                problems.append(f"{lineno}: {kind} sort mismatch")
        elif kind in _BTOR_BINARY_SAME:
            a, b = ref(rest[1]), ref(rest[2])
            if not (a == b == s):
                problems.append(f"{lineno}: {kind} sort mismatch")
        elif kind in _BTOR_CMP:
            a, b = ref(rest[1]), ref(rest[2])
            if a != b or s != ("bv", 1):
                problems.append(f"{lineno}: {kind} sort mismatch")
        elif kind == "ite":
            c, a, b = ref(rest[1]), ref(rest[2]), ref(rest[3])
            if c != ("bv", 1) or not (a == b == s):
                problems.append(f"{lineno}: ite sort mismatch")
        elif kind == "concat":
            a, b = ref(rest[1]), ref(rest[2])
            if a and b and s != ("bv", a[1] + b[1]):
                problems.append(f"{lineno}: concat width mismatch")
        elif kind == "slice":
            a = ref(rest[1])
            hi, lo = int(rest[2]), int(rest[3])
            if a and not (a[1] > hi >= lo >= 0 and s == ("bv", hi - lo + 1)):
                problems.append(f"{lineno}: slice out of range")
        elif kind in ("uext", "sext"):
            a = ref(rest[1])
            if a and s != ("bv", a[1] + int(rest[2])):
                problems.append(f"{lineno}: extension width mismatch")
        elif kind == "read":
            arr, idx = ref(rest[1]), ref(rest[2])
            if arr and (arr[0] != "array" or arr[1] != idx or arr[2] != s):
                problems.append(f"{lineno}: read sort mismatch")
        elif kind == "write":
            arr, idx, val = ref(rest[1]), ref(rest[2]), ref(rest[3])
            if arr != s or not arr or arr[1] != idx or arr[2] != val:
                problems.append(f"{lineno}: write sort mismatch")
        else:
            problems.append(f"{lineno}: unknown operator {kind}")
        nodes[nid] = s
    return problems
