"""Regex DSL: abstract syntax, prefix-notation parsing/printing, and rendering.

Concrete syntax is prefix notation, e.g. ``and(startwith(<C0>),endwith(rep(<num>,4)))``.
Character classes are written ``<num>``, ``<let>`` ...; any other bracketed text is a
constant (``<.>`` is the single character ``.``, ``<C0>`` is the string ``C0``).
"""
from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterator, Union

CLASS_NAMES = ("let", "cap", "low", "num", "any", "spec", "null")

UNARY = ("startwith", "endwith", "contain", "not", "optional", "star", "notcc")
BINARY = ("concat", "and", "or")
COUNTED = {"rep": 1, "repatleast": 1, "reprange": 2}
LEAVES = ("class", "char", "string", "const", "hole")
OPERATORS = UNARY + BINARY + tuple(COUNTED)

ALIASES = {"repeat": "rep", "repeatatleast": "repatleast", "repeatrange": "reprange"}

# Placeholder used by ``anonymize`` for integer parameters.
ANON_INT = "int"
# Untyped count hole in a partial regex.
COUNT_HOLE = "?"

Param = Union[int, str]


class DSLSyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class Node:
    """One regex AST node.

    ``value`` holds the class name for ``class`` nodes, the literal text for
    ``char``/``string`` nodes and the nonterminal label (or None) for holes.
    ``params`` holds the integer counts of rep/repatleast/reprange; a string
    entry marks either an anonymized integer or a count hole.
    """

    kind: str
    children: tuple["Node", ...] = ()
    value: str | None = None
    params: tuple[Param, ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind, n = self.kind, len(self.children)
        if kind in UNARY or kind in COUNTED:
            if n != 1:
                raise ValueError(f"{kind} takes exactly one sub-regex, got {n}")
        elif kind in BINARY:
            if n != 2:
                raise ValueError(f"{kind} takes exactly two sub-regexes, got {n}")
        elif kind in LEAVES:
            if n:
                raise ValueError(f"{kind} is a leaf")
        else:
            raise ValueError(f"unknown node kind {kind!r}")
        want = COUNTED.get(kind, 0)
        if len(self.params) != want:
            raise ValueError(f"{kind} takes {want} integer parameter(s), got {len(self.params)}")
        for p in self.params:
            if isinstance(p, bool) or not isinstance(p, (int, str)):
                raise ValueError(f"bad parameter {p!r}")
            if isinstance(p, int) and p < 0:
                raise ValueError(f"negative count {p}")
        if kind == "reprange":
            k1, k2 = self.params
            if isinstance(k1, int) and isinstance(k2, int) and not k1 < k2:
                raise ValueError(f"reprange needs k1 < k2, got {k1},{k2}")
        if kind == "class" and self.value not in CLASS_NAMES:
            raise ValueError(f"unknown character class {self.value!r}")
        if kind == "char" and (not isinstance(self.value, str) or len(self.value) != 1):
            raise ValueError("char constant must be exactly one symbol")
        if kind == "string" and (not isinstance(self.value, str) or len(self.value) < 2):
            raise ValueError("string constant must have at least two symbols")
        object.__setattr__(self, "_hash", hash((kind, self.children, self.value, self.params)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return print_dsl(self)

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAVES


# ---------------------------------------------------------------- builders

def cls(name: str) -> Node:
    return Node("class", value=name)


def lit(text: str) -> Node:
    """Constant literal: a ``char`` node for one symbol, else a ``string`` node."""
    if not text:
        raise ValueError("empty constant")
    return Node("char" if len(text) == 1 else "string", value=text)


def op(kind: str, *args) -> Node:
    """Build an operator node; trailing ints are the count parameters."""
    kind = ALIASES.get(kind, kind)
    subs = [a for a in args if isinstance(a, Node)]
    params = tuple(a for a in args if not isinstance(a, Node))
    if kind in BINARY and len(subs) > 2:
        return Node(kind, (subs[0], op(kind, *subs[1:])))
    return Node(kind, tuple(subs), params=params)


def hole(label: str | None = None) -> Node:
    return Node("hole", value=label)


# ----------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(<[^<>]+>)|([A-Za-z_][A-Za-z_0-9]*)|(\d+)|([(),?]))")


def tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append(m.group(m.lastindex))
        pos = m.end()
    return tokens


def _token_positions(text: str) -> list[int]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        out.append(m.start(m.lastindex))
        pos = m.end()
    return out


def leaf_from_token(tok: str, holes: bool = False) -> Node | None:
    """Interpret a single token as a leaf node, or None if it is not one."""
    if tok.startswith("<") and tok.endswith(">"):
        inner = tok[1:-1]
        return cls(inner) if inner in CLASS_NAMES else lit(inner)
    if tok == "const":
        return Node("const")
    if tok == COUNT_HOLE:
        return hole()
    if holes and tok[:1].isupper():
        return hole(tok)
    return None


class _Parser:
    def __init__(self, tokens: list[str], positions: list[int] | None, holes: bool):
        self.tokens = tokens
        self.positions = positions
        self.i = 0
        self.holes = holes

    def pos(self) -> int | None:
        if self.positions is None:
            return self.i
        if self.i < len(self.positions):
            return self.positions[self.i]
        return self.positions[-1] + 1 if self.positions else 0

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise DSLSyntaxError("unexpected end of input", self.pos())
        if expected is not None and tok != expected:
            raise DSLSyntaxError(f"expected {expected!r}, found {tok!r}", self.pos())
        self.i += 1
        return tok

    def param(self) -> Param:
        tok = self.take()
        if tok.isdigit():
            return int(tok)
        if tok in (ANON_INT, COUNT_HOLE) or (self.holes and tok[:1].isupper()):
            return tok
        raise DSLSyntaxError(f"expected an integer, found {tok!r}", self.pos() - 1 if isinstance(self.pos(), int) else None)

    def expr(self) -> Node:
        start = self.pos()
        tok = self.take()
        leaf = leaf_from_token(tok, self.holes)
        if leaf is not None:
            return leaf
        kind = ALIASES.get(tok, tok)
        if kind not in OPERATORS:
            raise DSLSyntaxError(f"unknown operator {tok!r}", start)
        self.take("(")
        subs = [self.expr()]
        if kind in BINARY:
            self.take(",")
            subs.append(self.expr())
            while self.peek() == ",":
                self.take(",")
                subs.append(self.expr())
        params = []
        for _ in range(COUNTED.get(kind, 0)):
            self.take(",")
            params.append(self.param())
        if self.peek() == "," and kind not in BINARY:
            raise DSLSyntaxError(f"too many arguments for {kind}", self.pos())
        self.take(")")
        try:
            return op(kind, *subs, *params)
        except ValueError as exc:
            raise DSLSyntaxError(str(exc), start) from None


def parse_dsl(text: str, holes: bool = False) -> Node:
    """Parse prefix-notation DSL text into a :class:`Node`.

    With ``holes=True`` capitalized identifiers are read as typed holes, which is
    how grammar productions are written.
    """
    tokens = tokenize(text)
    if not tokens:
        raise DSLSyntaxError("empty input", 0)
    parser = _Parser(tokens, _token_positions(text), holes)
    node = parser.expr()
    if parser.peek() is not None:
        raise DSLSyntaxError(f"trailing input {parser.peek()!r}", parser.pos())
    return node


# ---------------------------------------------------------------- printing

def print_dsl(node: Node) -> str:
    return "".join(dsl_tokens(node))


def dsl_tokens(node: Node) -> list[str]:
    """Pre-order token sequence of the canonical (binary) DSL form."""
    out: list[str] = []
    _emit(node, out)
    return out


def _emit(node: Node, out: list[str]) -> None:
    k = node.kind
    if k == "class":
        out.append(f"<{node.value}>")
    elif k in ("char", "string"):
        out.append(f"<{node.value}>")
    elif k == "const":
        out.append("const")
    elif k == "hole":
        out.append(node.value or COUNT_HOLE)
    else:
        out.extend((k, "("))
        for i, c in enumerate(node.children):
            if i:
                out.append(",")
            _emit(c, out)
        for p in node.params:
            out.extend((",", str(p)))
        out.append(")")


# ------------------------------------------------------ standard rendering

STANDARD_CLASSES = {
    "let": "[A-Za-z]",
    "cap": "[A-Z]",
    "low": "[a-z]",
    "num": "[0-9]",
    "any": ".",
    "spec": "[-,;.+:!@#_$%&*=^]",
    "null": "∅",
}

_META = set(".+*?^$&|~{}()[]\\")

# precedence levels of rendered fragments
_ALT, _SEQ, _UNARY, _ATOM = 1, 2, 3, 4


def _escape(ch: str) -> str:
    return "\\" + ch if ch in _META else ch


def to_standard_regex(node: Node) -> str:
    """Render in standard regex notation (``~`` complement, ``&`` intersection)."""
    return _render(node)[0]


def _wrap(frag: tuple[str, int], level: int) -> str:
    text, prec = frag
    return text if prec >= level else f"({text})"


def _render(node: Node) -> tuple[str, int]:
    k = node.kind
    if k == "class":
        return STANDARD_CLASSES[node.value], _ATOM
    if k == "char":
        return _escape(node.value), _ATOM
    if k == "string":
        return "".join(_escape(c) for c in node.value), _SEQ
    if k in ("const", "hole"):
        raise ValueError(f"cannot render a {k} node as a standard regex")
    subs = [_render(c) for c in node.children]
    if k == "startwith":
        return _wrap(subs[0], _SEQ) + ".*", _SEQ
    if k == "endwith":
        return ".*" + _wrap(subs[0], _SEQ), _SEQ
    if k == "contain":
        return ".*" + _wrap(subs[0], _SEQ) + ".*", _SEQ
    if k == "not":
        return "~" + _wrap(subs[0], _ATOM), _UNARY
    if k == "notcc":
        body = _class_body(node.children[0])
        if body is None:
            return "(.&~" + _wrap(subs[0], _ATOM) + ")", _ATOM
        return "[^" + body + "]", _ATOM
    if k == "optional":
        return _wrap(subs[0], _ATOM) + "?", _UNARY
    if k == "star":
        return _wrap(subs[0], _ATOM) + "*", _UNARY
    if k == "concat":
        return _wrap(subs[0], _SEQ) + _wrap(subs[1], _SEQ), _SEQ
    if k == "and":
        return _wrap(subs[0], _ATOM) + "&" + _wrap(subs[1], _ATOM), _ALT
    if k == "or":
        a, b = (_wrap(s, _ALT) if c.kind != "and" else f"({s[0]})"
                for s, c in zip(subs, node.children))
        return a + "|" + b, _ALT
    body = _wrap(subs[0], _ATOM)
    if k == "rep":
        return f"{body}{{{node.params[0]}}}", _UNARY
    if k == "repatleast":
        return f"{body}{{{node.params[0]},}}", _UNARY
    if k == "reprange":
        return f"{body}{{{node.params[0]},{node.params[1]}}}", _UNARY
    raise ValueError(f"unknown node kind {k!r}")


def _class_body(node: Node) -> str | None:
    """Bracket-expression body for a notcc argument, or None if it is not a plain set."""
    if node.kind == "class":
        if node.value in ("any", "null"):
            return None
        return STANDARD_CLASSES[node.value][1:-1]
    if node.kind == "char":
        return "\\" + node.value if node.value in "]\\^-" else node.value
    if node.kind == "or":
        parts = [_class_body(c) for c in node.children]
        return None if None in parts else "".join(parts)
    return None


# ----------------------------------------------------------------- metrics

def ast_metrics(node: Node) -> dict[str, int]:
    """Node count (terminals included) and depth (root counts as 1)."""
    if not node.children:
        return {"size": 1, "depth": 1}
    subs = [ast_metrics(c) for c in node.children]
    return {"size": 1 + sum(s["size"] for s in subs), "depth": 1 + max(s["depth"] for s in subs)}


def anonymize(node: Node) -> Node:
    """Replace constants with ``const`` and integer parameters with ``int``."""
    if node.kind in ("char", "string"):
        return Node("const")
    if not node.children:
        return node
    return Node(node.kind, tuple(anonymize(c) for c in node.children), node.value,
                tuple(ANON_INT for _ in node.params))


# -------------------------------------------------------------- tree paths

Path = tuple[int, ...]


def iter_paths(node: Node, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    yield path, node
    for i, c in enumerate(node.children):
        yield from iter_paths(c, path + (i,))


def get_at(node: Node, path: Path) -> Node:
    for i in path:
        node = node.children[i]
    return node


def replace_at(node: Node, path: Path, new: Node) -> Node:
    if not path:
        return new
    i = path[0]
    kids = list(node.children)
    kids[i] = replace_at(kids[i], path[1:], new)
    return Node(node.kind, tuple(kids), node.value, node.params)


@lru_cache(maxsize=200_000)
def has_holes(node: Node) -> bool:
    if node.kind == "hole":
        return True
    if any(isinstance(p, str) and p != ANON_INT for p in node.params):
        return True
    return any(has_holes(c) for c in node.children)


def literal_chars(node: Node) -> set[str]:
    """Literal text mentioned by constants in the tree."""
    out: set[str] = set()
    for _, n in iter_paths(node):
        if n.kind in ("char", "string"):
            out.update(n.value)
    return out
