"""Deterministic automata over a partitioned character alphabet.

Transitions are stored per *block*: a set of symbols that every state treats the
same way. Binary operations refine the two operands' partitions to a common one,
and every constructed automaton is minimized and canonically numbered, so two
automata for the same language over the same alphabet are structurally identical.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Iterable

from .dsl import Node

SPEC_CHARS = "-,;.+:!@#_$%&*=^"
CAPS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
LOWS = "abcdefghijklmnopqrstuvwxyz"
DIGITS = "0123456789"

MAX_STATES = 100_000


class StateLimitError(RuntimeError):
    """Raised when a construction would exceed the configured state cap."""


class EmptyLanguageError(ValueError):
    pass


class InfeasibleWindowError(ValueError):
    """No accepted string has a length inside the requested window."""


class Alphabet:
    """Ordered symbol set with the DSL's named character classes."""

    def __init__(self, symbols: str):
        if len(set(symbols)) != len(symbols):
            raise ValueError("alphabet symbols must be distinct")
        if not symbols:
            raise ValueError("empty alphabet")
        self.symbols = symbols
        self.index = {c: i for i, c in enumerate(symbols)}
        cap = "".join(c for c in symbols if c in CAPS)
        low = "".join(c for c in symbols if c in LOWS)
        self.classes = {
            "cap": cap,
            "low": low,
            "let": "".join(c for c in symbols if c in CAPS or c in LOWS),
            "num": "".join(c for c in symbols if c in DIGITS),
            "spec": "".join(c for c in symbols if c in SPEC_CHARS),
            "any": symbols,
            "null": "",
        }

    def __eq__(self, other):
        return isinstance(other, Alphabet) and other.symbols == self.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __repr__(self):
        return f"Alphabet({self.symbols!r})"

    def chars_of(self, node: Node) -> str:
        """Symbols matched by a class or constant-character node."""
        if node.kind == "class":
            return self.classes[node.value]
        if node.kind == "char":
            if node.value not in self.index:
                raise ValueError(f"constant {node.value!r} is outside the alphabet")
            return node.value
        raise ValueError(f"{node.kind} node is not a single-symbol set")

    def sort(self, chars: Iterable[str]) -> str:
        return "".join(sorted(set(chars), key=self.index.__getitem__))


DEFAULT_ALPHABET = Alphabet(CAPS + LOWS + DIGITS + SPEC_CHARS)
# Small alphabet with every class represented; used for brute-force checks.
REDUCED_ALPHABET = Alphabet("Aab01-")


@dataclass(frozen=True, eq=False)
class Dfa:
    """Total DFA. ``delta[state][block]`` is the successor; the start state is 0."""

    alphabet: Alphabet
    blocks: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]
    accept: frozenset[int]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def block_of(self) -> dict[str, int]:
        m = self._cache.get("block_of")
        if m is None:
            m = {c: i for i, b in enumerate(self.blocks) for c in b}
            self._cache["block_of"] = m
        return m

    def accepts(self, s: str) -> bool:
        m, delta, q = self.block_of, self.delta, 0
        for c in s:
            b = m.get(c)
            if b is None:
                return False
            q = delta[q][b]
        return q in self.accept

    def key(self) -> tuple:
        """Canonical form; equal keys iff equal languages (same alphabet)."""
        return (self.alphabet.symbols, self.blocks, self.delta, tuple(sorted(self.accept)))

    def __repr__(self):
        return f"Dfa(states={self.n_states}, blocks={len(self.blocks)}, accept={sorted(self.accept)})"


def matches(d: Dfa, s: str) -> bool:
    return d.accepts(s)


# ------------------------------------------------------------ construction

def _explore(start: Hashable, n_blocks: int, step: Callable, accepting: Callable, cap: int):
    ids = {start: 0}
    keys = [start]
    rows = []
    i = 0
    while i < len(keys):
        k = keys[i]
        row = []
        for b in range(n_blocks):
            t = step(k, b)
            j = ids.get(t)
            if j is None:
                j = len(keys)
                if j >= cap:
                    raise StateLimitError(f"automaton exceeds {cap} states")
                ids[t] = j
                keys.append(t)
            row.append(j)
        rows.append(row)
        i += 1
    return rows, frozenset(i for i, k in enumerate(keys) if accepting(k))


def _refine(alphabet: Alphabet, *partitions: tuple[str, ...]):
    """Common refinement of several block partitions, plus index maps into each."""
    return _refine_cached(alphabet, partitions)


@lru_cache(maxsize=50_000)
def _refine_cached(alphabet: Alphabet, partitions: tuple[tuple[str, ...], ...]):
    maps = [{c: i for i, b in enumerate(p) for c in b} for p in partitions]
    groups: dict[tuple, list[str]] = {}
    for c in alphabet.symbols:
        groups.setdefault(tuple(m[c] for m in maps), []).append(c)
    blocks = tuple("".join(v) for v in groups.values())
    index_maps = [tuple(k[j] for k in groups) for j in range(len(maps))]
    return blocks, index_maps


def minimize(alphabet: Alphabet, blocks, rows, accept) -> Dfa:
    """Minimize by iterated partition refinement, merge equivalent blocks, renumber."""
    # reachable part, renumbered densely
    idx = {0: 0}
    order = [0]
    for q in order:
        for t in rows[q]:
            if t not in idx:
                idx[t] = len(order)
                order.append(t)
    table = [[idx[t] for t in rows[q]] for q in order]
    # blocks whose columns agree behave identically; merge before refining
    cols: dict[tuple, list[int]] = {}
    for b, col in enumerate(zip(*table)):
        cols.setdefault(col, []).append(b)
    groups = list(cols.values())
    table = [[row[g[0]] for g in groups] for row in table]
    cls = [1 if q in accept else 0 for q in order]
    n_cls = len(set(cls))
    while True:
        sigs: dict[tuple, int] = {}
        get = cls.__getitem__
        cls = [sigs.setdefault((c,) + tuple(map(get, row)), len(sigs)) for c, row in zip(cls, table)]
        if len(sigs) == n_cls:
            break
        n_cls = len(sigs)
    # quotient automaton indexed by class
    rep: dict[int, int] = {}
    for i, c in enumerate(cls):
        rep.setdefault(c, i)
    qrows = {c: [cls[t] for t in table[i]] for c, i in rep.items()}
    qacc = {c for c, i in rep.items() if order[i] in accept}
    # merge blocks again on the quotient
    keys = sorted(qrows)
    cols2: dict[tuple, list[int]] = {}
    for g in range(len(groups)):
        cols2.setdefault(tuple(qrows[c][g] for c in keys), []).append(g)
    merged = []
    for gs in cols2.values():
        chars = alphabet.sort("".join(blocks[b] for g in gs for b in groups[g]))
        merged.append((chars, gs[0]))
    merged.sort(key=lambda x: alphabet.index[x[0][0]])
    new_blocks = tuple(m[0] for m in merged)
    pick = [m[1] for m in merged]
    # canonical numbering by BFS in block order
    start = cls[0]
    num = {start: 0}
    queue = [start]
    for c in queue:
        for g in pick:
            t = qrows[c][g]
            if t not in num:
                num[t] = len(num)
                queue.append(t)
    delta = [None] * len(num)
    for c, i in num.items():
        delta[i] = tuple(num[qrows[c][g]] for g in pick)
    return Dfa(alphabet, new_blocks, tuple(delta), frozenset(num[c] for c in qacc))


def _finish(alphabet, blocks, start, step, accepting, cap) -> Dfa:
    rows, acc = _explore(start, len(blocks), step, accepting, cap)
    return minimize(alphabet, blocks, rows, acc)


def empty_dfa(alphabet: Alphabet = DEFAULT_ALPHABET) -> Dfa:
    return Dfa(alphabet, (alphabet.symbols,), ((0,),), frozenset())


def universal_dfa(alphabet: Alphabet = DEFAULT_ALPHABET) -> Dfa:
    return Dfa(alphabet, (alphabet.symbols,), ((0,),), frozenset({0}))


def epsilon_dfa(alphabet: Alphabet = DEFAULT_ALPHABET) -> Dfa:
    return Dfa(alphabet, (alphabet.symbols,), ((1,), (1,)), frozenset({0}))


def charset_dfa(alphabet: Alphabet, chars: str) -> Dfa:
    """Language of single symbols drawn from ``chars``."""
    inside = alphabet.sort(chars)
    if not inside:
        return empty_dfa(alphabet)
    rest = alphabet.sort(set(alphabet.symbols) - set(inside))
    blocks = tuple(b for b in sorted((inside, rest), key=lambda b: alphabet.index[b[0]] if b else 1 << 30) if b)
    rows = [[1 if blk == inside else 2 for blk in blocks], [2] * len(blocks), [2] * len(blocks)]
    return minimize(alphabet, blocks, rows, frozenset({1}))


def string_dfa(alphabet: Alphabet, text: str) -> Dfa:
    for c in text:
        if c not in alphabet.index:
            raise ValueError(f"constant {c!r} is outside the alphabet")
    distinct = alphabet.sort(text)
    rest = alphabet.sort(set(alphabet.symbols) - set(distinct))
    blocks = tuple(sorted(list(distinct) + ([rest] if rest else []), key=lambda b: alphabet.index[b[0]]))
    n = len(text)
    rows = []
    for i in range(n):
        rows.append([i + 1 if blk == text[i] else n + 1 for blk in blocks])
    rows.append([n + 1] * len(blocks))
    rows.append([n + 1] * len(blocks))
    return minimize(alphabet, blocks, rows, frozenset({n}))


def _check(d1: Dfa, d2: Dfa) -> None:
    if d1.alphabet != d2.alphabet:
        raise ValueError("automata are over different alphabets")


def product(d1: Dfa, d2: Dfa, combine: Callable[[bool, bool], bool], max_states: int = MAX_STATES) -> Dfa:
    _check(d1, d2)
    blocks, (m1, m2) = _refine(d1.alphabet, d1.blocks, d2.blocks)
    t1, t2, a1, a2 = d1.delta, d2.delta, d1.accept, d2.accept

    def step(k, b):
        return (t1[k[0]][m1[b]], t2[k[1]][m2[b]])

    return _finish(d1.alphabet, blocks, (0, 0), step,
                   lambda k: combine(k[0] in a1, k[1] in a2), max_states)


def intersect(d1: Dfa, d2: Dfa, max_states: int = MAX_STATES) -> Dfa:
    return product(d1, d2, lambda a, b: a and b, max_states)


def union(d1: Dfa, d2: Dfa, max_states: int = MAX_STATES) -> Dfa:
    return product(d1, d2, lambda a, b: a or b, max_states)


def difference(d1: Dfa, d2: Dfa, max_states: int = MAX_STATES) -> Dfa:
    return product(d1, d2, lambda a, b: a and not b, max_states)


def shortest_difference(d1: Dfa, d2: Dfa, max_states: int = MAX_STATES) -> str | None:
    """A shortest string accepted by ``d1`` but not ``d2``, or None.

    Explores the product breadth-first and stops at the first witness, so it
    is much cheaper than building ``difference`` when one exists early.
    """
    _check(d1, d2)
    blocks, (m1, m2) = _refine(d1.alphabet, d1.blocks, d2.blocks)
    t1, t2, a1, a2 = d1.delta, d2.delta, d1.accept, d2.accept
    parent: dict[tuple[int, int], tuple | None] = {(0, 0): None}
    queue = [(0, 0)]
    for k in queue:
        if k[0] in a1 and k[1] not in a2:
            out = []
            while parent[k] is not None:
                k, b = parent[k]
                out.append(blocks[b][0])
            return "".join(reversed(out))
        for b in range(len(blocks)):
            t = (t1[k[0]][m1[b]], t2[k[1]][m2[b]])
            if t not in parent:
                if len(parent) >= max_states:
                    raise StateLimitError(f"product exceeds {max_states} states")
                parent[t] = (k, b)
                queue.append(t)
    return None


@lru_cache(maxsize=20_000)
def complement(d: Dfa) -> Dfa:
    acc = frozenset(range(d.n_states)) - d.accept
    return minimize(d.alphabet, d.blocks, d.delta, acc)


def concat_dfa(d1: Dfa, d2: Dfa, max_states: int = MAX_STATES) -> Dfa:
    _check(d1, d2)
    blocks, (m1, m2) = _refine(d1.alphabet, d1.blocks, d2.blocks)
    t1, t2, a1, a2 = d1.delta, d2.delta, d1.accept, d2.accept

    memo: dict = {}

    def step(k, b):
        p, s = k
        p2 = t1[p][m1[b]]
        key = (s, m2[b], p2 in a1)
        nxt = memo.get(key)
        if nxt is None:
            b2 = key[1]
            found = {t2[q][b2] for q in s}
            if key[2]:
                found.add(0)
            nxt = memo[key] = frozenset(found)
        return (p2, nxt)

    start = (0, frozenset({0}) if 0 in a1 else frozenset())
    return _finish(d1.alphabet, blocks, start, step, lambda k: not a2.isdisjoint(k[1]), max_states)


@lru_cache(maxsize=20_000)
def star_dfa(d: Dfa, max_states: int = MAX_STATES) -> Dfa:
    t, acc = d.delta, d.accept

    def step(k, b):
        src = (0,) if k is None else k
        nxt = {t[q][b] for q in src}
        if not acc.isdisjoint(nxt):
            nxt.add(0)
        return frozenset(nxt)

    return _finish(d.alphabet, d.blocks, None, step,
                   lambda k: k is None or not acc.isdisjoint(k), max_states)


@lru_cache(maxsize=20_000)
def optional_dfa(d: Dfa, max_states: int = MAX_STATES) -> Dfa:
    return union(d, epsilon_dfa(d.alphabet), max_states)


@lru_cache(maxsize=20_000)
def power_dfa(d: Dfa, k: int, max_states: int = MAX_STATES) -> Dfa:
    out = epsilon_dfa(d.alphabet)
    for _ in range(k):
        out = concat_dfa(out, d, max_states)
    return out


@lru_cache(maxsize=20_000)
def repeat_dfa(d: Dfa, k1: int, k2: int | None = None, max_states: int = MAX_STATES) -> Dfa:
    """Between ``k1`` and ``k2`` repetitions (``k2=None`` means unbounded)."""
    if k2 is not None and k2 < k1:
        return empty_dfa(d.alphabet)
    head = power_dfa(d, k1, max_states)
    if k2 is None:
        return concat_dfa(head, star_dfa(d, max_states), max_states)
    if k2 == k1:
        return head
    return concat_dfa(head, power_dfa(optional_dfa(d, max_states), k2 - k1, max_states), max_states)


def single_symbols(d: Dfa) -> str:
    """Symbols ``c`` such that the one-symbol string ``c`` is accepted."""
    row = d.delta[0]
    return "".join(b for i, b in enumerate(d.blocks) if row[i] in d.accept)


# ------------------------------------------------------------------ compile

def compile_regex(node: Node, alphabet: Alphabet = DEFAULT_ALPHABET, max_states: int = MAX_STATES) -> Dfa:
    """Compile a hole-free regex AST to its minimal DFA."""
    return _compile(node, alphabet, max_states)


@lru_cache(maxsize=100_000)
def _compile(node: Node, alphabet: Alphabet, cap: int) -> Dfa:
    k = node.kind
    if k == "class":
        return charset_dfa(alphabet, alphabet.classes[node.value])
    if k == "char":
        return charset_dfa(alphabet, alphabet.chars_of(node))
    if k == "string":
        return string_dfa(alphabet, node.value)
    if k in ("const", "hole"):
        raise ValueError(f"cannot compile a {k} node")
    for p in node.params:
        if not isinstance(p, int):
            raise ValueError(f"cannot compile non-integer parameter {p!r}")
    subs = [_compile(c, alphabet, cap) for c in node.children]
    return apply_operator(node, subs, cap)


def apply_operator(node: Node, subs: list[Dfa], cap: int = MAX_STATES, params=None) -> Dfa:
    """Combine already-compiled operands according to ``node.kind``."""
    k = node.kind
    params = node.params if params is None else params
    if k in ("startwith", "endwith", "contain"):
        anything = universal_dfa(subs[0].alphabet)
        if k == "startwith":
            return concat_dfa(subs[0], anything, cap)
        if k == "endwith":
            return concat_dfa(anything, subs[0], cap)
        return concat_dfa(concat_dfa(anything, subs[0], cap), anything, cap)
    if k == "not":
        return complement(subs[0])
    if k == "notcc":
        d = subs[0]
        return charset_dfa(d.alphabet, set(d.alphabet.symbols) - set(single_symbols(d)))
    if k == "optional":
        return optional_dfa(subs[0], cap)
    if k == "star":
        return star_dfa(subs[0], cap)
    if k == "concat":
        return concat_dfa(subs[0], subs[1], cap)
    if k == "and":
        return intersect(subs[0], subs[1], cap)
    if k == "or":
        return union(subs[0], subs[1], cap)
    if k == "rep":
        return power_dfa(subs[0], params[0], cap)
    if k == "repatleast":
        return repeat_dfa(subs[0], params[0], None, cap)
    if k == "reprange":
        return repeat_dfa(subs[0], params[0], params[1], cap)
    raise ValueError(f"unknown operator {k!r}")


# ------------------------------------------------------------------ queries

def is_empty(d: Dfa) -> bool:
    # minimized and reachable: the language is empty iff no state accepts
    return not d.accept


def is_universal(d: Dfa) -> bool:
    return d.n_states == 1 and 0 in d.accept


def equivalent(d1: Dfa, d2: Dfa) -> bool:
    """Language equality, decided as emptiness of the symmetric difference."""
    return is_empty(product(d1, d2, lambda a, b: a != b))


def subset(d1: Dfa, d2: Dfa) -> bool:
    return is_empty(difference(d1, d2))


def shortest_length(d: Dfa) -> int | None:
    if 0 in d.accept:
        return 0
    dist = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for q in frontier:
            for t in d.delta[q]:
                if t not in dist:
                    dist[t] = dist[q] + 1
                    if t in d.accept:
                        return dist[t]
                    nxt.append(t)
        frontier = nxt
    return None


def _viable(d: Dfa, max_len: int) -> list[frozenset[int]]:
    """``ok[n]`` = states from which some accepted suffix of length exactly n exists."""
    tables = d._cache.setdefault("viable", [d.accept])
    while len(tables) <= max_len:
        prev = tables[-1]
        tables.append(frozenset(q for q in range(d.n_states)
                                if any(t in prev for t in d.delta[q])))
    return tables


def _window(d: Dfa, min_len: int | None, max_len: int | None, slack: int = 8) -> tuple[int, int]:
    shortest = shortest_length(d)
    if shortest is None:
        raise EmptyLanguageError("the automaton accepts nothing")
    lo = shortest if min_len is None else min_len
    hi = shortest + slack if max_len is None else max_len
    return lo, hi


def count_accepted(d: Dfa, min_len: int | None = None, max_len: int | None = None) -> int:
    """Exact number of accepted strings with length in the window."""
    lo, hi = _window(d, min_len, max_len)
    sizes = [len(b) for b in d.blocks]
    cnt = [1 if q in d.accept else 0 for q in range(d.n_states)]
    total = cnt[0] if lo <= 0 <= hi else 0
    for n in range(1, hi + 1):
        cnt = [sum(sizes[b] * cnt[t] for b, t in enumerate(row)) for row in d.delta]
        if n >= lo:
            total += cnt[0]
    return total


def enumerate_accepted(d: Dfa, min_len: int | None = None, max_len: int | None = None,
                       limit: int = 1000) -> list[str]:
    """Accepted strings in the window in shortlex order, at most ``limit`` of them."""
    lo, hi = _window(d, min_len, max_len)
    ok = _viable(d, hi)
    out: list[str] = []
    syms = [sorted(b, key=d.alphabet.index.__getitem__) for b in d.blocks]

    def walk(q: int, prefix: str, remaining: int) -> None:
        if len(out) >= limit:
            return
        if remaining == 0:
            out.append(prefix)
            return
        pairs = [(c, t) for b, t in enumerate(d.delta[q]) if t in ok[remaining - 1] for c in syms[b]]
        pairs.sort(key=lambda p: d.alphabet.index[p[0]])
        for c, t in pairs:
            walk(t, prefix + c, remaining - 1)

    for n in range(lo, hi + 1):
        if 0 in ok[n]:
            walk(0, "", n)
    return out[:limit]


def sample_accepted(d: Dfa, rng: random.Random, min_len: int | None = None,
                    max_len: int | None = None, visited: set | None = None,
                    novelty: float = 4.0) -> str:
    """Random accepted string by a stochastic walk over the automaton.

    The length is drawn uniformly from the feasible lengths in the window
    (default ``[shortest, shortest + 8]``). Each step picks among transitions
    that can still reach acceptance in the remaining steps; transitions absent
    from ``visited`` are weighted by ``novelty``. ``visited`` is updated in place.
    """
    lo, hi = _window(d, min_len, max_len)
    ok = _viable(d, hi)
    lengths = [n for n in range(max(lo, 0), hi + 1) if 0 in ok[n]]
    if not lengths:
        raise InfeasibleWindowError(f"no accepted string with length in [{lo}, {hi}]")
    n = rng.choice(lengths)
    if visited is None:
        visited = set()
    q, out = 0, []
    for remaining in range(n, 0, -1):
        row = d.delta[q]
        cands = [b for b, t in enumerate(row) if t in ok[remaining - 1]]
        weights = [1.0 if (q, b) in visited else novelty for b in cands]
        b = rng.choices(cands, weights)[0]
        visited.add((q, b))
        out.append(rng.choice(d.blocks[b]))
        q = row[b]
    return "".join(out)


def to_dot(d: Dfa) -> str:
    """Graphviz dump for debugging."""
    lines = ["digraph dfa {", "  rankdir=LR;", '  _start [shape=point];', "  _start -> 0;"]
    for q in range(d.n_states):
        shape = "doublecircle" if q in d.accept else "circle"
        lines.append(f"  {q} [shape={shape}];")
    for q, row in enumerate(d.delta):
        by_target: dict[int, list[str]] = {}
        for b, t in enumerate(row):
            by_target.setdefault(t, []).append(d.blocks[b])
        for t, bs in by_target.items():
            label = "|".join(bs).replace("\\", "\\\\").replace('"', '\\"')
            if len(label) > 40:
                label = label[:37] + "..."
            lines.append(f'  {q} -> {t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
