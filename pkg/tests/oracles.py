"""Reference implementations that share no code with the automaton module.

Membership is decided directly from the operator definitions by recursion
over substrings, and languages are enumerated by brute force over all short
strings. Slow, but simple enough to trust.
"""
from __future__ import annotations

import itertools
import random
import string
from functools import lru_cache

from regexfoundry.dsl import Node, cls, hole, iter_paths, lit, op, replace_at

SPEC = "-,;.+:!@#_$%&*=^"


def class_chars(name: str, sigma: str) -> set[str]:
    table = {
        "cap": set(string.ascii_uppercase),
        "low": set(string.ascii_lowercase),
        "let": set(string.ascii_letters),
        "num": set(string.digits),
        "spec": set(SPEC),
        "any": set(sigma),
        "null": set(),
    }
    return table[name] & set(sigma)


def member(node: Node, s: str, sigma: str) -> bool:
    """Whether ``s`` belongs to L(node), with Sigma* taken over ``sigma``."""
    if any(c not in sigma for c in s):
        return False
    return _member(node, s, sigma)


@lru_cache(maxsize=None)
def _member(node: Node, s: str, sigma: str) -> bool:
    k = node.kind
    if k == "class":
        return len(s) == 1 and s in class_chars(node.value, sigma)
    if k == "char":
        return s == node.value
    if k == "string":
        return s == node.value
    a = node.children[0]
    if k == "startwith":
        return any(_member(a, s[:i], sigma) for i in range(len(s) + 1))
    if k == "endwith":
        return any(_member(a, s[i:], sigma) for i in range(len(s) + 1))
    if k == "contain":
        return any(_member(a, s[i:j], sigma) for i in range(len(s) + 1) for j in range(i, len(s) + 1))
    if k == "not":
        return not _member(a, s, sigma)
    if k == "notcc":
        return len(s) == 1 and not _member(a, s, sigma)
    if k == "optional":
        return s == "" or _member(a, s, sigma)
    if k == "star":
        return s == "" or any(_member(a, s[:i], sigma) and _member(node, s[i:], sigma)
                              for i in range(1, len(s) + 1))
    if k == "concat":
        b = node.children[1]
        return any(_member(a, s[:i], sigma) and _member(b, s[i:], sigma) for i in range(len(s) + 1))
    if k == "and":
        return _member(a, s, sigma) and _member(node.children[1], s, sigma)
    if k == "or":
        return _member(a, s, sigma) or _member(node.children[1], s, sigma)
    if k in ("rep", "repatleast", "reprange"):
        lo = node.params[0]
        hi = node.params[0] if k == "rep" else None if k == "repatleast" else node.params[1]
        return _times(a, s, lo, hi, sigma)
    raise ValueError(k)


@lru_cache(maxsize=None)
def _times(a: Node, s: str, lo: int, hi: int | None, sigma: str) -> bool:
    """s is a concatenation of n words of L(a) for some lo <= n <= hi."""
    if s == "" and lo == 0:
        return True
    if hi == 0:
        return False
    nlo, nhi = max(lo - 1, 0), None if hi is None else hi - 1
    # a first word may be empty; then the rest must still use at most hi - 1 words
    return any(_member(a, s[:i], sigma) and _times(a, s[i:], nlo, nhi, sigma)
               for i in range(0 if lo else 1, len(s) + 1))


def strings_upto(sigma: str, n: int):
    for length in range(n + 1):
        for t in itertools.product(sigma, repeat=length):
            yield "".join(t)


def language(node: Node, sigma: str, n: int) -> frozenset[str]:
    return frozenset(s for s in strings_upto(sigma, n) if member(node, s, sigma))


# --------------------------------------------------------- random ASTs

def random_ast(rng: random.Random, sigma: str, depth: int = 3, kmax: int = 3) -> Node:
    """Any DSL tree of at most ``depth`` levels over constants in ``sigma``."""
    if depth <= 1 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return cls(rng.choice(("let", "cap", "low", "num", "spec", "any")))
        return lit(rng.choice(sigma) if rng.random() < 0.8 else "".join(rng.choices(sigma, k=2)))
    kind = rng.choice(("startwith", "endwith", "contain", "not", "optional", "star", "notcc",
                       "concat", "and", "or", "rep", "repatleast", "reprange"))
    sub = lambda: random_ast(rng, sigma, depth - 1, kmax)
    if kind in ("concat", "and", "or"):
        return op(kind, sub(), sub())
    if kind == "rep":
        return op(kind, sub(), rng.randint(0, kmax))
    if kind == "repatleast":
        return op(kind, sub(), rng.randint(0, kmax))
    if kind == "reprange":
        k1 = rng.randint(0, kmax - 1)
        return op(kind, sub(), k1, rng.randint(k1 + 1, kmax))
    return op(kind, sub())


def depth_of(node: Node) -> int:
    return 1 + max((depth_of(c) for c in node.children), default=0)


def trees_upto_depth2(terminals: list[Node], kmax: int = 2) -> list[Node]:
    """Every tree of depth <= 2 over ``terminals`` with counts up to ``kmax``."""
    out = list(terminals)
    for t in terminals:
        for kind in ("startwith", "endwith", "contain", "not", "optional", "star", "notcc"):
            out.append(op(kind, t))
        for k in range(kmax + 1):
            out.append(op("rep", t, k))
            out.append(op("repatleast", t, k))
        for k1 in range(kmax):
            for k2 in range(k1 + 1, kmax + 1):
                out.append(op("reprange", t, k1, k2))
    for a in terminals:
        for b in terminals:
            for kind in ("concat", "and", "or"):
                out.append(op(kind, a, b))
    return out


# ----------------------------------------------------- partial trees

TERMINALS = [lit("a"), lit("0"), cls("num"), cls("any")]
FILLERS = trees_upto_depth2(TERMINALS, kmax=2)


def completions(node: Node, kmax: int = 3):
    """Every way to fill the holes of ``node``: subtrees of depth <= 2, counts up to ``kmax``."""
    if node.kind == "hole":
        yield from FILLERS
        return
    kid_options = [list(completions(c, kmax)) for c in node.children]

    def params():
        if node.kind == "reprange":
            k1, k2 = node.params
            for a in ([k1] if isinstance(k1, int) else range(kmax)):
                for b in ([k2] if isinstance(k2, int) else range(a + 1, kmax + 1)):
                    if a < b:
                        yield (a, b)
        elif node.params:
            p = node.params[0]
            yield from ([(p,)] if isinstance(p, int) else [(k,) for k in range(kmax + 1)])
        else:
            yield ()

    def kids(i):
        if i == len(kid_options):
            yield ()
            return
        for c in kid_options[i]:
            for rest in kids(i + 1):
                yield (c,) + rest

    for ks in kids(0):
        for ps in params():
            yield Node(node.kind, ks, node.value, ps)


def make_partial(rng: random.Random, sigma: str) -> Node:
    """A small tree with one expression hole and possibly one count hole."""
    ast = random_ast(rng, sigma, depth=3, kmax=3)
    paths = [p for p, _ in iter_paths(ast)]
    ast = replace_at(ast, rng.choice(paths), hole())
    counted = [(p, n) for p, n in iter_paths(ast) if n.kind in ("rep", "repatleast", "reprange")]
    if counted and rng.random() < 0.5:
        path, n = rng.choice(counted)
        i = rng.randrange(len(n.params))
        params = tuple("?" if j == i else p for j, p in enumerate(n.params))
        ast = replace_at(ast, path, Node(n.kind, n.children, n.value, params))
    return ast


# -------------------------------------------- language-preserving rewrites

def _rewrite_here(rng: random.Random, x: Node) -> Node:
    any_star = op("star", cls("any"))
    k = x.kind
    options = [op("or", x, x), op("and", x, x), op("not", op("not", x))]
    if k in ("or", "and"):
        options.append(op(k, x.children[1], x.children[0]))
    if k == "star":
        options.append(op("star", x))
    if k == "repatleast" and x.params[0] == 0:
        options.append(op("star", x.children[0]))
    if k == "contain":
        options.append(op("concat", any_star, op("concat", x.children[0], any_star)))
    if k == "startwith":
        options.append(op("concat", x.children[0], any_star))
    if k == "endwith":
        options.append(op("concat", any_star, x.children[0]))
    if k == "optional":
        options.append(op("or", x.children[0], op("rep", x.children[0], 0)))
    if k == "reprange":
        a, (k1, k2) = x.children[0], x.params
        rest = op("rep", a, k2) if k2 == k1 + 1 else op("reprange", a, k1 + 1, k2)
        options.append(op("or", op("rep", a, k1), rest))
    return rng.choice(options)


def rewrite_equivalent(rng: random.Random, node: Node) -> Node:
    """``node`` with one subtree replaced by a textbook equivalent form."""
    path, sub = rng.choice(list(iter_paths(node)))
    return replace_at(node, path, _rewrite_here(rng, sub))
