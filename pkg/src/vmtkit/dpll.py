"""Minimal Boolean SMT-LIB solver used when no external solver is installed.

Reads a script on standard input and answers ``check-sat`` and
``get-value`` for propositional formulas over declared Bool constants. Any
other theory makes ``check-sat`` answer ``unknown``. Run as
``python -m vmtkit.dpll``.
"""
from __future__ import annotations

import sys

from .errors import VmtError
from .sexpr import Atom, SList, SExpr, print_sexpr, read_all


class Unsupported(Exception):
    pass


class Cnf:
    """Tseitin encoding with structural sharing of gates."""

    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.gates: dict[tuple, int] = {}
        self.true = self.new()
        self.clauses.append([self.true])

    def new(self) -> int:
        self.nvars += 1
        return self.nvars

    def gate(self, kind: str, args: tuple[int, ...]) -> int:
        key = (kind, args)
        if key in self.gates:
            return self.gates[key]
        g = self.new()
        if kind == "and":
            for a in args:
                self.clauses.append([-g, a])
            self.clauses.append([g] + [-a for a in args])
        elif kind == "or":
            for a in args:
                self.clauses.append([g, -a])
            self.clauses.append([-g] + list(args))
        elif kind == "xor":
            a, b = args
            self.clauses += [[-g, a, b], [-g, -a, -b], [g, -a, b], [g, a, -b]]
        elif kind == "ite":
            c, a, b = args
            self.clauses += [[-g, -c, a], [-g, c, b], [g, -c, -a], [g, c, -b]]
        self.gates[key] = g
        return g


class Translator:
    def __init__(self, cnf: Cnf, symbols: dict[str, int]):
        self.cnf = cnf
        self.symbols = symbols

    def lit(self, e: SExpr, env: dict[str, int]) -> int:
        cnf = self.cnf
        if isinstance(e, Atom):
            if e.text == "true":
                return cnf.true
            if e.text == "false":
                return -cnf.true
            if e.text in env:
                return env[e.text]
            if e.text in self.symbols:
                return self.symbols[e.text]
            raise Unsupported(f"unknown symbol {e.text}")
        head = e.head_symbol()
        if head == "let":
            inner = dict(env)
            for b in e[1]:
                inner[b[0].text] = self.lit(b[1], env)
            return self.lit(e[2], inner)
        if head == "!":
            return self.lit(e[1], env)
        args = [self.lit(a, env) for a in e.items[1:]]
        if head == "not":
            return -args[0]
        if head == "and":
            return cnf.gate("and", tuple(args))
        if head == "or":
            return cnf.gate("or", tuple(args))
        if head == "=>":
            acc = args[-1]
            for a in reversed(args[:-1]):
                acc = cnf.gate("or", (-a, acc))
            return acc
        if head == "xor":
            acc = args[0]
            for a in args[1:]:
                acc = cnf.gate("xor", (acc, a))
            return acc
        if head == "=":
            eqs = [-cnf.gate("xor", (a, b)) for a, b in zip(args, args[1:])]
            return eqs[0] if len(eqs) == 1 else cnf.gate("and", tuple(eqs))
        if head == "distinct":
            if len(args) > 2:
                return -cnf.true
            return cnf.gate("xor", (args[0], args[1]))
        if head == "ite":
            return cnf.gate("ite", tuple(args))
        raise Unsupported(f"operator {head}")


def dpll(nvars: int, clauses: list[list[int]]) -> dict[int, bool] | None:
    """Satisfying assignment or None; two watched literals, chronological backtracking."""
    value: list[int] = [0] * (nvars + 1)  # 0 unassigned, 1 true, -1 false
    watches: dict[int, list[int]] = {}
    cls = []
    units = []
    for c in clauses:
        c = list(dict.fromkeys(c))
        if any(-l in c for l in c):
            continue
        if not c:
            return None
        if len(c) == 1:
            units.append(c[0])
            continue
        i = len(cls)
        cls.append(c)
        watches.setdefault(c[0], []).append(i)
        watches.setdefault(c[1], []).append(i)
    trail: list[int] = []
    levels: list[tuple[int, int]] = []  # (trail length, decision literal)

    def val(l: int) -> int:
        v = value[abs(l)]
        return v if l > 0 else -v

    def assign(l: int) -> None:
        value[abs(l)] = 1 if l > 0 else -1
        trail.append(l)

    def propagate(start: int) -> bool:
        i = start
        while i < len(trail):
            false_lit = -trail[i]
            i += 1
            ws = watches.get(false_lit, [])
            j = 0
            while j < len(ws):
                ci = ws[j]
                c = cls[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if val(c[0]) == 1:
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if val(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        ws[j] = ws[-1]
                        ws.pop()
                        break
                else:
                    if val(c[0]) == -1:
                        return False
                    if val(c[0]) == 0:
                        assign(c[0])
                    j += 1
        return True

    for u in units:
        if val(u) == -1:
            return None
        if val(u) == 0:
            assign(u)
    if not propagate(0):
        return None
    while True:
        var = next((v for v in range(1, nvars + 1) if value[v] == 0), None)
        if var is None:
            return {v: value[v] == 1 for v in range(1, nvars + 1)}
        levels.append((len(trail), var))
        assign(var)
        while not propagate(levels[-1][0]):
            # flip the most recent decision that has not been flipped yet
            while levels and levels[-1][1] < 0:
                size, _ = levels.pop()
                for l in trail[size:]:
                    value[abs(l)] = 0
                del trail[size:]
            if not levels:
                return None
            size, lit = levels.pop()
            for l in trail[size:]:
                value[abs(l)] = 0
            del trail[size:]
            levels.append((size, -lit))
            assign(-lit)


def run(text: str, out=sys.stdout) -> None:
    cnf = Cnf()
    symbols: dict[str, int] = {}
    tr = Translator(cnf, symbols)
    unsupported = None
    model: dict[int, bool] | None = None
    status = None
    try:
        commands = read_all(text)
    except VmtError as e:
        out.write(f'(error "{e}")\n')
        return
    for cmd in commands:
        if not isinstance(cmd, SList) or not cmd.head_symbol():
            out.write('(error "malformed command")\n')
            continue
        head = cmd.head_symbol()
        try:
            if head in ("set-option", "set-logic", "set-info"):
                continue
            if head in ("declare-fun", "declare-const"):
                sort = cmd[-1]
                arity_ok = head == "declare-const" or (isinstance(cmd[2], SList) and len(cmd[2]) == 0)
                if not (arity_ok and isinstance(sort, Atom) and sort.text == "Bool"):
                    raise Unsupported("only Bool constants are supported")
                symbols[cmd[1].text] = cnf.new()
            elif head == "assert":
                cnf.clauses.append([tr.lit(cmd[1], {})])
            elif head == "check-sat":
                if unsupported:
                    status = "unknown"
                else:
                    model = dpll(cnf.nvars, cnf.clauses)
                    status = "sat" if model is not None else "unsat"
                out.write(status + "\n")
            elif head == "get-value":
                if status != "sat":
                    out.write('(error "model is not available")\n')
                    continue
                pairs = []
                for t in cmd[1]:
                    l = tr.lit(t, {})
                    v = model.get(abs(l), False) if l > 0 else not model.get(abs(l), False)
                    pairs.append(f"({print_sexpr(t)} {'true' if v else 'false'})")
                out.write("(" + " ".join(pairs) + ")\n")
            elif head == "exit":
                break
            else:
                raise Unsupported(f"command {head}")
        except Unsupported as e:
            unsupported = str(e)
            if head not in ("declare-fun", "declare-const", "assert"):
                out.write(f'(error "{e}")\n')
        except (IndexError, AttributeError):
            out.write(f'(error "malformed {head}")\n')


def main() -> None:
    run(sys.stdin.read())
    sys.stdout.flush()


if __name__ == "__main__":
    main()
