"""S-expression reader and printer for SMT-LIB 2 concrete syntax."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import MalformedToken, UnbalancedParens

SYMBOL = "symbol"
KEYWORD = "keyword"
NUMERAL = "numeral"
DECIMAL = "decimal"
HEXADECIMAL = "hexadecimal"
BINARY = "binary"
STRING = "string"

_SYMBOL_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/"
)
_DELIMS = set(" \t\r\n();\"|")

# Reserved words that must be quoted when used as symbol names.
RESERVED = frozenset(
    ["!", "_", "as", "let", "exists", "forall", "match", "par",
     "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING"]
)


@dataclass(frozen=True)
class Atom:
    kind: str
    text: str
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)
    quoted: bool = field(default=False, compare=False, repr=False)

    def is_symbol(self, name: str | None = None) -> bool:
        return self.kind == SYMBOL and (name is None or self.text == name)

    def __str__(self) -> str:
        return print_sexpr(self)


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    def head_symbol(self) -> str | None:
        if self.items and isinstance(self.items[0], Atom) and self.items[0].kind == SYMBOL:
            return self.items[0].text
        return None

    def __str__(self) -> str:
        return print_sexpr(self)


SExpr = Union[Atom, SList]


def sym(name: str) -> Atom:
    return Atom(SYMBOL, name, quoted=quote_symbol(name) != name)


def slist(*items: SExpr) -> SList:
    return SList(tuple(items))


def _tokens(text: str) -> Iterator[tuple[str, str, tuple[int, int]]]:
    """Yield (kind, text, pos); kind is '(' , ')' or an atom kind."""
    i, n = 0, len(text)
    line, line_start = 1, 0
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        pos = (line, i - line_start + 1)
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "(" or c == ")":
            yield c, c, pos
            i += 1
            continue
        if c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise MalformedToken("unterminated quoted symbol", pos)
            body = text[i + 1:j]
            if "\\" in body:
                raise MalformedToken("backslash in quoted symbol", pos)
            nl = body.count("\n")
            if nl:
                line += nl
                line_start = i + 1 + body.rfind("\n") + 1
            yield "quoted", body, pos
            i = j + 1
            continue
        if c == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise MalformedToken("unterminated string literal", pos)
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        buf.append('"')
                        j += 2
                        continue
                    break
                if text[j] == "\n":
                    line += 1
                    line_start = j + 1
                buf.append(text[j])
                j += 1
            yield STRING, "".join(buf), pos
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in _DELIMS:
            j += 1
        word = text[i:j]
        i = j
        yield _classify(word, pos), word, pos


def _classify(word: str, pos) -> str:
    if word.startswith("#x"):
        if len(word) > 2 and all(ch in "0123456789abcdefABCDEF" for ch in word[2:]):
            return HEXADECIMAL
        raise MalformedToken(f"bad hexadecimal literal '{word}'", pos)
    if word.startswith("#b"):
        if len(word) > 2 and all(ch in "01" for ch in word[2:]):
            return BINARY
        raise MalformedToken(f"bad binary literal '{word}'", pos)
    if word[0].isdigit():
        whole, dot, frac = word.partition(".")
        if not whole.isdigit() or (len(whole) > 1 and whole[0] == "0"):
            raise MalformedToken(f"bad numeric literal '{word}'", pos)
        if not dot:
            return NUMERAL
        if frac.isdigit():
            return DECIMAL
        raise MalformedToken(f"bad decimal literal '{word}'", pos)
    if word[0] == ":":
        if len(word) > 1 and all(ch in _SYMBOL_CHARS for ch in word[1:]):
            return KEYWORD
        raise MalformedToken(f"bad keyword '{word}'", pos)
    if all(ch in _SYMBOL_CHARS for ch in word):
        return SYMBOL
    raise MalformedToken(f"unexpected characters in '{word}'", pos)


def read_all(text: str) -> list[SExpr]:
    """Parse every top-level S-expression in ``text``."""
    out: list[SExpr] = []
    stack: list[tuple[tuple[int, int], list[SExpr]]] = []
    for kind, word, pos in _tokens(text):
        if kind == "(":
            stack.append((pos, []))
        elif kind == ")":
            if not stack:
                raise UnbalancedParens("unexpected ')'", pos)
            start, items = stack.pop()
            node = SList(tuple(items), start)
            (stack[-1][1] if stack else out).append(node)
        elif kind == "quoted":
            node = Atom(SYMBOL, word, pos, True)
            (stack[-1][1] if stack else out).append(node)
        else:
            node = Atom(kind, word, pos)
            (stack[-1][1] if stack else out).append(node)
    if stack:
        raise UnbalancedParens("missing ')' for list opened here", stack[-1][0])
    return out


def read_one(text: str) -> SExpr:
    items = read_all(text)
    if len(items) != 1:
        raise MalformedToken(f"expected one S-expression, found {len(items)}", (1, 1))
    return items[0]


def quote_symbol(name: str) -> str:
    if (
        name
        and not name[0].isdigit()
        and all(ch in _SYMBOL_CHARS for ch in name)
        and name not in RESERVED
    ):
        return name
    return f"|{name}|"


def print_atom(a: Atom) -> str:
    if a.kind == SYMBOL:
        # reserved words stay bare: they are structure, not user symbols
        bare = a.text and not a.text[0].isdigit() and all(ch in _SYMBOL_CHARS for ch in a.text)
        if a.quoted or not bare:
            return f"|{a.text}|"
        return a.text
    if a.kind == STRING:
        return '"' + a.text.replace('"', '""') + '"'
    return a.text


def print_sexpr(e: SExpr) -> str:
    if isinstance(e, Atom):
        return print_atom(e)
    return "(" + " ".join(print_sexpr(x) for x in e.items) + ")"
