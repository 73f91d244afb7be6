"""Positive and negative string examples for a regex.

Positives come from a stochastic walk over the regex's DFA that prefers
transitions it has not used yet. Negatives come from near-miss regexes: each
perturbation changes one subtree, and a negative is drawn from what the
perturbed regex accepts but the original does not.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import automaton as fa
from .automaton import Alphabet, DEFAULT_ALPHABET, compile_regex
from .dsl import Node, Path, cls, get_at, iter_paths, lit, op, parse_dsl, print_dsl, replace_at

PERTURBATION_KINDS = (
    "class-swap",
    "parameter-shift",
    "constraint-negation-flip",
    "component-drop",
    "component-duplicate",
    "constant-swap",
    "optionality-toggle",
)
SWAP_CLASSES = ("cap", "low", "let", "num", "spec", "any")
N_EXAMPLES = 6


@dataclass(frozen=True)
class Perturbation:
    path: Path
    kind: str

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")

    def __str__(self):
        return f"{self.kind}@{'.'.join(map(str, self.path)) or 'root'}"


@dataclass(frozen=True)
class LabeledExample:
    string: str
    polarity: str                 # "positive" | "negative"
    provenance: str = "traversal"
    perturbed: str | None = None  # DSL of the near-miss regex that produced a negative

    def __post_init__(self):
        if self.polarity not in ("positive", "negative"):
            raise ValueError(f"bad polarity {self.polarity!r}")

    def to_dict(self) -> dict:
        out = {"string": self.string, "provenance": self.provenance}
        if self.perturbed is not None:
            out["perturbed"] = self.perturbed
        return out


class ExampleList(list):
    """A list of examples that remembers whether fewer than requested exist."""

    def __init__(self, items=(), shortfall: bool = False):
        super().__init__(items)
        self.shortfall = shortfall


# ------------------------------------------------------------- perturbations

def _mutations(node: Node, parent: Node | None, alphabet: Alphabet, rng: random.Random):
    """Candidate replacements for one subtree, as (kind, new subtree) pairs."""
    kind = node.kind
    if kind == "class" and node.value != "null":
        for name in SWAP_CLASSES:
            if name != node.value:
                yield "class-swap", cls(name)
    if kind in ("rep", "repatleast"):
        (k,) = node.params
        for nk in (k - 1, k + 1):
            if nk >= 0:
                yield "parameter-shift", Node(kind, node.children, None, (nk,))
        if kind == "rep":
            yield "parameter-shift", Node("repatleast", node.children, None, (k,))
    if kind == "reprange":
        k1, k2 = node.params
        for a, b in ((k1 - 1, k2), (k1 + 1, k2), (k1, k2 - 1), (k1, k2 + 1)):
            if 0 <= a < b:
                yield "parameter-shift", Node(kind, node.children, None, (a, b))
    if kind == "not":
        yield "constraint-negation-flip", node.children[0]
    elif kind in ("startwith", "endwith", "contain") and (parent is None or parent.kind != "not"):
        yield "constraint-negation-flip", op("not", node)
    if kind in ("concat", "and", "or"):
        for child in node.children:
            yield "component-drop", child
    if parent is not None and parent.kind == "concat" and kind != "concat":
        yield "component-duplicate", op("concat", node, node)
    if kind == "char":
        ch = node.value
        same = [n for n in ("cap", "low", "num", "spec") if ch in alphabet.classes[n]]
        pool = [c for c in alphabet.symbols if c != ch]
        for c in rng.sample(pool, min(3, len(pool))):
            yield "constant-swap", lit(c)
        for name in same + ["any"]:
            yield "constant-swap", cls(name)
    if kind == "string":
        s = node.value
        i = rng.randrange(len(s))
        pool = [c for c in alphabet.symbols if c != s[i]]
        yield "constant-swap", lit(s[:i] + rng.choice(pool) + s[i + 1:])
        yield "constant-swap", lit(s[:-1]) if len(s) > 1 else lit(s)
        yield "constant-swap", lit(s + s[-1])
    if kind == "optional":
        yield "optionality-toggle", node.children[0]
    elif parent is not None and parent.kind == "concat" and kind != "concat":
        yield "optionality-toggle", op("optional", node)


def _mutant_cap(original: fa.Dfa) -> int:
    # mutants that blow up far past the original are skipped rather than built
    return max(2_000, 4 * original.n_states)


def perturb(ast: Node, rng: random.Random | None = None, alphabet: Alphabet = DEFAULT_ALPHABET,
            per_kind: int = 3) -> list[tuple[Perturbation, Node]]:
    """Near-miss variants of ``ast``, each changing exactly one subtree.

    Only variants that accept something the original rejects are kept. At most
    ``per_kind`` variants of each kind are returned, interleaved by kind.
    """
    rng = rng or random.Random(0)
    original = compile_regex(ast, alphabet)
    cap = _mutant_cap(original)
    by_kind: dict[str, list[tuple[Perturbation, Node]]] = {k: [] for k in PERTURBATION_KINDS}
    parents: dict[Path, Node] = {}
    for path, node in iter_paths(ast):
        for i, _ in enumerate(node.children):
            parents[path + (i,)] = node
    seen = {ast}
    for path, node in iter_paths(ast):
        for kind, new in _mutations(node, parents.get(path), alphabet, rng):
            try:
                mutated = replace_at(ast, path, new)
            except ValueError:
                continue
            if mutated in seen:
                continue
            seen.add(mutated)
            by_kind[kind].append((Perturbation(path, kind), mutated))
    out: list[tuple[Perturbation, Node]] = []
    for kind in PERTURBATION_KINDS:
        cands = by_kind[kind]
        rng.shuffle(cands)
        kept = 0
        # bounded attempts: constant mutations deep in a long concat are costly to compile
        for pert, mutated in cands[: 3 * per_kind]:
            if kept >= per_kind:
                break
            try:
                witness = fa.shortest_difference(compile_regex(mutated, alphabet, cap), original)
            except (fa.StateLimitError, ValueError):
                continue
            if witness is not None:
                by_kind[kind][kept] = (pert, mutated)
                kept += 1
        by_kind[kind] = by_kind[kind][:kept]
    # round-robin across kinds so no single kind dominates the front
    depth = max((len(v) for v in by_kind.values()), default=0)
    for i in range(depth):
        for kind in PERTURBATION_KINDS:
            if i < len(by_kind[kind]):
                out.append(by_kind[kind][i])
    return out


# ------------------------------------------------------------------ examples

POSITIVE_SLACKS = (8, 16, 32, 64)


def gen_positive(ast: Node, n: int = N_EXAMPLES, rng: random.Random | None = None,
                 alphabet: Alphabet = DEFAULT_ALPHABET, novelty: float = 4.0) -> ExampleList:
    """``n`` distinct accepted strings, or all of them with ``shortfall`` set."""
    rng = rng or random.Random(0)
    d = compile_regex(ast, alphabet)
    if fa.is_empty(d):
        raise fa.EmptyLanguageError(f"{print_dsl(ast)} accepts nothing")
    lo = fa.shortest_length(d)
    # sparse languages (long repeated words) need a wider length window
    for slack in POSITIVE_SLACKS:
        if fa.count_accepted(d, lo, lo + slack) > n:
            break
    else:
        found = fa.enumerate_accepted(d, lo, lo + slack, limit=n)
        return ExampleList(found, shortfall=len(found) < n)
    hi = lo + slack
    out: list[str] = []
    visited: set = set()
    for _ in range(50 * n):
        s = fa.sample_accepted(d, rng, lo, hi, visited=visited, novelty=novelty)
        if s not in out:
            out.append(s)
            if len(out) == n:
                return ExampleList(out)
    rest = [s for s in fa.enumerate_accepted(d, lo, hi, limit=10 * n) if s not in out]
    out += rng.sample(rest, min(n - len(out), len(rest)))
    return ExampleList(out, shortfall=len(out) < n)


def gen_negative(ast: Node, n: int = N_EXAMPLES, rng: random.Random | None = None,
                 alphabet: Alphabet = DEFAULT_ALPHABET, positives: list[str] | None = None,
                 perturbations: list[tuple[Perturbation, Node]] | None = None) -> ExampleList:
    """``n`` distinct rejected strings drawn from near-miss difference languages.

    Perturbations whose language still accepts every positive are used first,
    so the negatives rule out a regex the positives alone could not. When the
    perturbations run dry, uniformly random rejected strings are added and
    marked ``fallback``.
    """
    rng = rng or random.Random(0)
    d = compile_regex(ast, alphabet)
    if perturbations is None:
        perturbations = perturb(ast, rng, alphabet)
    positives = positives or []
    cap = _mutant_cap(d)
    sources = []
    for pert, mutated in perturbations:
        try:
            pd = compile_regex(mutated, alphabet, cap)
        except fa.StateLimitError:
            pd = compile_regex(mutated, alphabet)
        near = all(pd.accepts(s) for s in positives)
        sources.append((not near, pert, mutated, pd))
    sources.sort(key=lambda x: x[0])
    out: list[LabeledExample] = []
    strings: set[str] = set()
    # difference automata are built on first use; most sources are never reached
    active = [[p, m, pd, None, set(), 0] for _, p, m, pd in sources]
    while active and len(out) < n:
        for item in list(active):
            if len(out) >= n:
                break
            pert, mutated, pd, diff, visited, _ = item
            if diff is None:
                diff = item[3] = fa.difference(pd, d)
            s = fa.sample_accepted(diff, rng, visited=visited)
            if s in strings:
                item[5] += 1
                if item[5] >= 3:
                    active.remove(item)
                continue
            strings.add(s)
            out.append(LabeledExample(s, "negative", str(pert), print_dsl(mutated)))
    if len(out) < n:
        rest = fa.complement(d)
        if not fa.is_empty(rest):
            visited: set = set()
            for _ in range(50 * n):
                s = fa.sample_accepted(rest, rng, visited=visited)
                if s not in strings:
                    strings.add(s)
                    out.append(LabeledExample(s, "negative", "fallback"))
                    if len(out) == n:
                        break
    return ExampleList(out, shortfall=len(out) < n)


def generate_examples(ast: Node, n: int = N_EXAMPLES, rng: random.Random | None = None,
                      alphabet: Alphabet = DEFAULT_ALPHABET) -> tuple[ExampleList, ExampleList]:
    """Positives (as LabeledExample) and negatives for one regex."""
    rng = rng or random.Random(0)
    pos = gen_positive(ast, n, rng, alphabet)
    neg = gen_negative(ast, n, rng, alphabet, positives=list(pos))
    labeled = ExampleList([LabeledExample(s, "positive") for s in pos], pos.shortfall)
    return labeled, neg


def separates_near_miss(ast: Node, positives: list[str], negatives: list[LabeledExample | str],
                        alphabet: Alphabet = DEFAULT_ALPHABET) -> bool:
    """True if some near-miss accepts every positive and is ruled out only by a negative."""
    negs = [x.string if isinstance(x, LabeledExample) else x for x in negatives]
    candidates = [parse_dsl(x.perturbed) for x in negatives
                  if isinstance(x, LabeledExample) and x.perturbed]
    if not candidates:
        candidates = [m for _, m in perturb(ast, alphabet=alphabet)]
    for mutated in candidates:
        pd = compile_regex(mutated, alphabet)
        if all(pd.accepts(s) for s in positives) and any(pd.accepts(s) for s in negs):
            return True
    return False


def check_examples(ast: Node, positives, negatives, alphabet: Alphabet = DEFAULT_ALPHABET) -> list[str]:
    """Examples that violate their polarity (empty when all are sound)."""
    d = compile_regex(ast, alphabet)
    bad = []
    for x in positives:
        s = x.string if isinstance(x, LabeledExample) else x
        if not d.accepts(s):
            bad.append(s)
    for x in negatives:
        s = x.string if isinstance(x, LabeledExample) else x
        if d.accepts(s):
            bad.append(s)
    return bad
