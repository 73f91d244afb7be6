"""Over- and under-approximations of partially built regexes.

A partial regex is a tree whose unexpanded positions are holes: expression
holes stand for any subtree, count holes for any integer parameter. The
over-approximation contains every completion's language and the
under-approximation is contained in every completion's language, so a partial
regex whose over-approximation misses a positive example, or whose
under-approximation accepts a negative one, can be pruned.

Holes are filled according to polarity: inside an odd number of ``not``/``notcc``
operators the roles of "as large as possible" and "as small as possible" swap.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import automaton as fa
from .automaton import Alphabet, DEFAULT_ALPHABET, Dfa, compile_regex
from .dsl import (ALIASES, BINARY, COUNT_HOLE, COUNTED, OPERATORS, Node, dsl_tokens, has_holes,
                  hole, leaf_from_token, print_dsl)

NEGATING = ("not", "notcc")
GRAMMAR_COUNT = "K"   # count slot of a grammar production: any integer >= 1


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def flip(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


class PrefixError(ValueError):
    """A token sequence that is not a prefix of any well-formed DSL term."""

    def __init__(self, message: str, index: int, token: str | None):
        super().__init__(f"{message} (token {index}: {token!r})")
        self.index = index
        self.token = token


def _is_count_hole(p) -> bool:
    return isinstance(p, str)


@dataclass(frozen=True)
class PartialRegex:
    """A regex tree that may contain expression holes and count holes."""

    node: Node

    @property
    def complete(self) -> bool:
        return not has_holes(self.node)

    def tokens(self) -> list[str]:
        return dsl_tokens(self.node)

    def holes(self) -> list[tuple[tuple[int, ...], Polarity]]:
        """Paths of expression holes and nodes with count holes, with polarity."""
        out = []

        def walk(n: Node, path, pol: Polarity):
            if n.kind == "hole" or any(_is_count_hole(p) for p in n.params):
                out.append((path, pol))
            child_pol = pol.flip() if n.kind in NEGATING else pol
            for i, c in enumerate(n.children):
                walk(c, path + (i,), child_pol)

        walk(self.node, (), Polarity.POSITIVE)
        return out

    def __str__(self):
        return print_dsl(self.node)


# ----------------------------------------------------------- token prefixes

def from_token_prefix(tokens: Iterable[str]) -> PartialRegex:
    """Build the partial regex for a pre-order token prefix.

    Anything not yet read becomes a hole, e.g. ``and ( startwith ( <cap> ) ,``
    gives ``and(startwith(<cap>),?)``.
    """
    toks = list(tokens)
    pos = 0

    def fail(msg: str, i: int):
        raise PrefixError(msg, i, toks[i] if i < len(toks) else None)

    def expect(sym: str) -> bool:
        nonlocal pos
        if pos >= len(toks):
            return False
        if toks[pos] != sym:
            fail(f"expected {sym!r}", pos)
        pos += 1
        return True

    def expr() -> Node:
        nonlocal pos
        if pos >= len(toks):
            return hole()
        tok = toks[pos]
        if tok == COUNT_HOLE:
            fail("count hole in expression position", pos)
        try:
            leaf = leaf_from_token(tok)
        except ValueError:
            fail("malformed leaf", pos)
        if leaf is not None:
            pos += 1
            return leaf
        kind = ALIASES.get(tok, tok)
        if kind not in OPERATORS:
            fail("unknown operator", pos)
        start = pos
        pos += 1
        n_sub = 2 if kind in BINARY else 1
        subs: list[Node] = []
        params: list = []
        if expect("("):
            subs.append(expr())
            for _ in range(n_sub - 1):
                subs.append(expr() if expect(",") else hole())
            for _ in range(COUNTED.get(kind, 0)):
                if expect(",") and pos < len(toks):
                    tok = toks[pos]
                    if not tok.isdigit():
                        fail("expected an integer", pos)
                    params.append(int(tok))
                    pos += 1
                else:
                    params.append(COUNT_HOLE)
            expect(")")
        subs += [hole()] * (n_sub - len(subs))
        params += [COUNT_HOLE] * (COUNTED.get(kind, 0) - len(params))
        try:
            return Node(kind, tuple(subs), None, tuple(params))
        except ValueError as exc:
            fail(str(exc), start)

    node = expr()
    if pos < len(toks):
        fail("trailing token after a complete term", pos)
    return PartialRegex(node)


# ------------------------------------------------------------ approximation

@lru_cache(maxsize=100_000)
def erase_labels(node: Node, keep: frozenset = frozenset()) -> Node:
    """Drop hole labels (except those in ``keep``) so equal shapes share cache entries.

    Grammar count slots keep their ``K`` name because they exclude zero.
    """
    if node.kind == "hole":
        return hole() if node.value is not None and node.value not in keep else node
    if not node.children and not node.params:
        return node
    params = tuple(p if not _is_count_hole(p) or p == GRAMMAR_COUNT else COUNT_HOLE for p in node.params)
    kids = tuple(erase_labels(c, keep) for c in node.children)
    if params == node.params and all(a is b for a, b in zip(kids, node.children)):
        return node
    return Node(node.kind, kids, node.value, params)


class ApproxCache:
    """Memo of approximation automata, keyed by label-erased subtree and direction.

    A cache is not thread safe; give each search thread its own.
    """

    def __init__(self, alphabet: Alphabet = DEFAULT_ALPHABET, max_states: int = fa.MAX_STATES,
                 max_entries: int = 200_000, hole_words: Mapping[str, Iterable[str]] | None = None):
        self.alphabet = alphabet
        # labelled holes that can only become one of finitely many words
        self.hole_words = {label: tuple(sorted(set(words))) for label, words in (hole_words or {}).items()}
        self._keep = frozenset(self.hole_words)
        for words in self.hole_words.values():
            for w in words:
                if not w or any(c not in alphabet.index for c in w):
                    raise ValueError(f"hole word {w!r} is not a non-empty string over the alphabet")
        self.max_states = max_states
        self.max_entries = max_entries
        self._memo: dict[tuple[Node, bool], Dfa] = {}
        self._span_memo: dict[str, dict] = {}
        self._kills: dict[tuple[str, bool], int] = {}
        self.hits = 0
        self.misses = 0

    def approx(self, node: Node, big: bool) -> Dfa:
        """Superset (``big``) or subset approximation of every completion of ``node``."""
        return self._approx(erase_labels(node, self._keep), big)

    def _approx(self, node: Node, big: bool) -> Dfa:
        key = (node, big)
        got = self._memo.get(key)
        if got is not None:
            self.hits += 1
            return got
        self.misses += 1
        d = self._build(node, big)
        if len(self._memo) >= self.max_entries:
            self._memo.clear()
        self._memo[key] = d
        return d

    def _build(self, node: Node, big: bool) -> Dfa:
        a = self.alphabet
        if node.kind == "hole":
            if not big:
                return fa.empty_dfa(a)
            if node.value in self.hole_words:
                return self._words_dfa(node.value)
            return fa.universal_dfa(a)
        if not has_holes(node):
            return compile_regex(node, a, self.max_states)
        child_big = (not big) if node.kind in NEGATING else big
        subs = [self._approx(c, child_big) for c in node.children]
        params = node.params
        if any(_is_count_hole(p) for p in params):
            return self._counted(node, subs[0], big)
        quick = _shortcut(node.kind, subs, a)
        if quick is not None:
            return quick
        return fa.apply_operator(node, subs, self.max_states, params)

    def _words_dfa(self, label: str) -> Dfa:
        words = self.hole_words[label]
        d = fa.charset_dfa(self.alphabet, "".join(w for w in words if len(w) == 1))
        for w in words:
            if len(w) > 1:
                d = fa.union(d, fa.string_dfa(self.alphabet, w), self.max_states)
        return d

    def _counted(self, node: Node, sub: Dfa, big: bool) -> Dfa:
        lo, hi = _count_window(node, big)
        if lo is None:
            return fa.empty_dfa(self.alphabet)
        return fa.repeat_dfa(sub, lo, hi, self.max_states)

    # ---- the same approximations evaluated on one string

    def accepts(self, node: Node, big: bool, s: str) -> bool:
        """Whether the ``big``/small approximation of ``node`` accepts ``s``.

        Agrees with ``approx(node, big).accepts(s)`` but never builds an
        automaton: it tracks which substrings of ``s`` each subtree matches.
        """
        return self._accepts(erase_labels(node, self._keep), big, s)

    def _accepts(self, node: Node, big: bool, s: str) -> bool:
        memo = self._span_memo.get(s)
        if memo is None:
            if any(c not in self.alphabet.index for c in s):
                return False
            if len(self._span_memo) > 256:
                self._span_memo.clear()
            memo = self._span_memo[s] = {}
        return bool(_span_rows(self, memo, node, big, s)[0] >> len(s) & 1)

    def decided(self, node: Node, pos: Sequence[str], neg: Sequence[str]) -> int:
        """How many examples every completion of ``node`` already gets right."""
        node = erase_labels(node, self._keep)
        return (sum(self._accepts(node, False, s) for s in pos)
                + sum(not self._accepts(node, True, s) for s in neg))

    def feasible(self, node: Node, pos: Sequence[str], neg: Sequence[str]) -> bool:
        """Some completion of ``node`` may accept ``pos`` and reject ``neg``.

        Strings that ruled out earlier trees are tried first, since the same
        few examples tend to do most of the pruning.
        """
        node = erase_labels(node, self._keep)
        checks = [(s, True) for s in pos] + [(s, False) for s in neg]
        checks.sort(key=lambda c: -self._kills.get(c, 0))
        for s, positive in checks:
            if self._accepts(node, positive, s) != positive:
                self._kills[(s, positive)] = self._kills.get((s, positive), 0) + 1
                return False
        return True


def _count_window(node: Node, big: bool) -> tuple[int | None, int | None]:
    """Repetition bounds ``(lo, hi)`` approximating a node with count holes.

    ``lo`` is None when the approximation is the empty language and ``hi`` is
    None when it is unbounded.
    """
    kind, params = node.kind, node.params
    # grammar slots hold positive integers; a bare count hole may also be 0
    lo = 1 if any(p == GRAMMAR_COUNT for p in params) else 0
    first, last = params[0], params[-1]
    if big:
        if kind == "reprange" and isinstance(first, int):
            return first, None
        if kind == "reprange" and isinstance(last, int):
            return (None, None) if last <= lo else (lo, last)
        return lo, None
    # smallest language every completion contains
    if kind == "reprange" and isinstance(first, int):
        return first, first + 1
    if kind == "reprange" and isinstance(last, int):
        return (None, None) if last - 1 < lo else (last - 1, last)
    return None, None


def _span_rows(cache: ApproxCache, memo: dict, node: Node, big: bool, s: str) -> tuple[int, ...]:
    """Row ``i`` has bit ``j`` set when the approximation matches ``s[i:j]``."""
    key = (node, big)
    got = memo.get(key)
    if got is None:
        child_big = (not big) if node.kind in NEGATING else big
        subs = [_span_rows(cache, memo, c, child_big, s) for c in node.children]
        got = _rows_one(cache, node, big, s, subs)
        if len(memo) >= cache.max_entries:
            memo.clear()
        memo[key] = got
    return got


@lru_cache(maxsize=256)
def _suffix_masks(n: int) -> tuple[int, ...]:
    full = (1 << (n + 1)) - 1
    return tuple(full & ~((1 << i) - 1) for i in range(n + 1))


def _rows_one(cache: ApproxCache, node: Node, big: bool, s: str, subs: list) -> tuple[int, ...]:
    n = len(s)
    ge = _suffix_masks(n)
    kind = node.kind
    if kind == "hole":
        if not big:
            return (0,) * (n + 1)
        words = cache.hole_words.get(node.value)
        if words is None:
            return ge
        return tuple(sum(1 << (i + len(w)) for w in words if s.startswith(w, i)) for i in range(n + 1))
    if kind in ("class", "char"):
        chars = cache.alphabet.chars_of(node)
        return tuple((1 << (i + 1)) if i < n and s[i] in chars else 0 for i in range(n + 1))
    if kind == "string":
        w = node.value
        return tuple((1 << (i + len(w))) if s.startswith(w, i) else 0 for i in range(n + 1))
    a = subs[0]
    if kind in COUNTED:
        params = node.params
        if any(_is_count_hole(p) for p in params):
            lo, hi = _count_window(node, big)
            if lo is None:
                return (0,) * (n + 1)
        elif kind == "rep":
            lo = hi = params[0]
        elif kind == "repatleast":
            lo, hi = params[0], None
        else:
            lo, hi = params
        return _repeat(a, lo, hi, n)
    if kind == "concat":
        return _compose(a, subs[1], n)
    if kind == "and":
        return tuple(x & y for x, y in zip(a, subs[1]))
    if kind == "or":
        return tuple(x | y for x, y in zip(a, subs[1]))
    if kind == "not":
        return tuple(g & ~x for g, x in zip(ge, a))
    if kind == "optional":
        return tuple(x | (1 << i) for i, x in enumerate(a))
    if kind == "star":
        return _repeat(a, 0, None, n)
    if kind == "notcc":
        return tuple((1 << (i + 1)) if i < n and not a[i] >> (i + 1) & 1 else 0 for i in range(n + 1))
    if kind == "startwith":
        return tuple(ge[_lowest(x)] if x else 0 for x in a)
    if kind == "endwith":
        out, acc = [0] * (n + 1), 0
        for i in range(n, -1, -1):
            acc |= a[i]
            out[i] = acc
        return tuple(out)
    if kind == "contain":
        out, best = [0] * (n + 1), None
        for i in range(n, -1, -1):
            if a[i]:
                low = _lowest(a[i])
                best = low if best is None else min(best, low)
            out[i] = ge[best] if best is not None else 0
        return tuple(out)
    raise ValueError(f"unknown operator {kind!r}")


def _lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@lru_cache(maxsize=200_000)
def _compose(a, b, n: int) -> tuple[int, ...]:
    out = []
    for i in range(n + 1):
        acc = 0
        for j in _bits(a[i]):
            acc |= b[j]
        out.append(acc)
    return tuple(out)


@lru_cache(maxsize=50_000)
def _repeat(a, lo: int, hi: int | None, n: int) -> tuple[int, ...]:
    power = tuple(1 << i for i in range(n + 1))
    for _ in range(lo):
        power = _compose(power, a, n)
    if hi is None:
        # closure of one-or-more non-empty steps, built right to left
        star = [0] * (n + 1)
        for i in range(n, -1, -1):
            acc = 1 << i
            for j in _bits(a[i] & ~(1 << i)):
                acc |= star[j]
            star[i] = acc
        return _compose(power, tuple(star), n)
    out = power
    for _ in range(hi - lo):
        power = _compose(power, a, n)
        out = tuple(x | y for x, y in zip(out, power))
    return out


def _shortcut(kind: str, subs: list[Dfa], a: Alphabet) -> Dfa | None:
    """Exact results for operators applied to the empty or universal language."""
    empty = [fa.is_empty(d) for d in subs]
    full = [fa.is_universal(d) for d in subs]
    if kind in ("concat", "and", "startwith", "endwith", "contain") and any(empty):
        return fa.empty_dfa(a)
    if kind in ("startwith", "endwith", "contain", "star", "optional") and full[0]:
        return subs[0]
    if kind == "concat":
        nullable = [0 in d.accept for d in subs]
        if (full[0] and nullable[1]) or (full[1] and nullable[0]):
            return fa.universal_dfa(a)
    if kind == "or":
        if any(full):
            return fa.universal_dfa(a)
        if empty[0]:
            return subs[1]
        if empty[1]:
            return subs[0]
    if kind == "and":
        if full[0]:
            return subs[1]
        if full[1]:
            return subs[0]
    if kind == "optional" and empty[0]:
        return fa.epsilon_dfa(a)
    if kind == "not" and (empty[0] or full[0]):
        return fa.universal_dfa(a) if empty[0] else fa.empty_dfa(a)
    return None


_default_caches: dict[Alphabet, ApproxCache] = {}


def _cache_for(alphabet: Alphabet, cache: ApproxCache | None) -> ApproxCache:
    if cache is not None:
        return cache
    if alphabet not in _default_caches:
        _default_caches[alphabet] = ApproxCache(alphabet)
    return _default_caches[alphabet]


def _node(p: PartialRegex | Node) -> Node:
    return p.node if isinstance(p, PartialRegex) else p


def over_approx(p: PartialRegex | Node, alphabet: Alphabet = DEFAULT_ALPHABET,
                cache: ApproxCache | None = None) -> Dfa:
    """A DFA whose language contains that of every completion of ``p``."""
    return _cache_for(alphabet, cache).approx(_node(p), True)


def under_approx(p: PartialRegex | Node, alphabet: Alphabet = DEFAULT_ALPHABET,
                 cache: ApproxCache | None = None) -> Dfa:
    """A DFA whose language is contained in that of every completion of ``p``."""
    return _cache_for(alphabet, cache).approx(_node(p), False)


def feasible(p: PartialRegex | Node, pos: Iterable[str] = (), neg: Iterable[str] = (),
             alphabet: Alphabet = DEFAULT_ALPHABET, cache: ApproxCache | None = None) -> bool:
    """False only when no completion of ``p`` can be consistent with the examples."""
    return _cache_for(alphabet, cache).feasible(_node(p), list(pos), list(neg))


def token_prefixes(ast: Node) -> list[PartialRegex]:
    """Partial regexes for every pre-order token prefix of ``ast`` (empty to full)."""
    toks = dsl_tokens(ast)
    return [from_token_prefix(toks[:i]) for i in range(len(toks) + 1)]
