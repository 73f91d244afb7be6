"""Example-guided regex synthesis and the evaluation harness.

The search expands grammar derivations left to right, keeping the best
``beam`` partial trees at each step. With pruning on, a partial tree is dropped
as soon as its approximations show that no completion can accept every
positive and reject every negative.
"""
from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import automaton as fa
from .approx import ApproxCache, feasible
from .automaton import Alphabet, DEFAULT_ALPHABET, compile_regex
from .dsl import Node, anonymize, ast_metrics, has_holes, hole, lit, parse_dsl, print_dsl
from .grammar import CC_NAMES, GRAMMAR, LEAF_CATEGORIES, Template, derivation
from .sampler import GrammarConfig

START = "START"
CLASS_GROUPS = ("cap", "low", "num", "spec")


@dataclass
class SynthesisTask:
    positives: Sequence[str] = ()
    negatives: Sequence[str] = ()
    template: Template | None = None
    beam: int = 20
    k: int = 20
    budget: int = 200              # maximum number of beam items expanded
    time_limit: float | None = None
    task_id: str = ""

    def __post_init__(self):
        self.positives = tuple(self.positives)
        self.negatives = tuple(self.negatives)
        for s in self.positives + self.negatives:
            if not isinstance(s, str):
                raise TypeError(f"examples must be strings, got {type(s).__name__}")
        if self.template is not None:
            self.template = (self.template if isinstance(self.template, Template)
                             else Template.parse(self.template))
        if self.beam < 1 or self.k < 1 or self.budget < 1:
            raise ValueError("beam, k and budget must be >= 1")

    @property
    def inconsistent(self) -> bool:
        return bool(set(self.positives) & set(self.negatives))


@dataclass
class SearchConfig:
    prune: bool = True
    stride: int = 1                # prune every ``stride`` steps (completions always checked)
    grammar: GrammarConfig = field(default_factory=GrammarConfig)
    alphabet: Alphabet = DEFAULT_ALPHABET
    max_consts: int = 8
    max_strings: int = 6
    per_skeleton: int = 2          # beam items allowed per shape once constants and counts are hidden
    lookahead: float = 0.5         # weight of the best-case cost of the open holes when ranking the beam


@dataclass
class SynthResult:
    candidates: list[Node]
    status: str                    # "found" | "no-solution" | "inconsistent"
    expansions: int = 0
    pruned: int = 0

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


# ------------------------------------------------------------------ vocabulary

def search_vocabulary(task: SynthesisTask, cfg: SearchConfig | None = None) -> dict[str, list[str]]:
    """Constants the search may use.

    Single symbols are the most frequent ones in the examples. Strings are
    substrings (2 to 5 symbols) shared by at least two positives or two
    negatives, keeping only maximal ones: a substring is dropped when a
    longer one containing it occurs in just as many examples.
    """
    cfg = cfg or SearchConfig()
    alphabet = cfg.alphabet
    seen = Counter(c for s in task.positives + task.negatives for c in s if c in alphabet.index)
    chars = sorted(seen, key=lambda c: (-seen[c], alphabet.index[c]))[: cfg.max_consts]
    chars.sort(key=alphabet.index.__getitem__)
    strings: Counter = Counter()
    for group in (task.positives, task.negatives):
        counts: Counter = Counter()
        for s in group:
            subs = {s[i:i + n] for n in range(2, 6) for i in range(len(s) - n + 1)}
            counts.update(x for x in subs if all(c in alphabet.index for c in x))
        for x, c in counts.items():
            if c >= 2:
                strings[x] = max(strings[x], c)
    maximal = [x for x in strings
               if not any(len(y) == len(x) + 1 and x in y and strings[y] >= strings[x] for y in strings)]
    top = sorted(maximal, key=lambda x: (-strings[x], -len(x), x))[: cfg.max_strings]
    return {"CONST": chars, "STR": sorted(top)}


def literal_hole_words(vocab: dict[str, list[str]], alphabet: Alphabet = DEFAULT_ALPHABET) -> dict[str, list[str]]:
    """Finite languages of the literal-level nonterminals given a search vocabulary.

    A hole with one of these labels can only be filled by a single symbol of
    a character class, a vocabulary constant or a vocabulary string, which
    lets the approximations prune far more than an unconstrained hole would.
    """
    cc = sorted({c for name in CC_NAMES for c in alphabet.classes[name]}, key=alphabet.index.__getitem__)
    consts, strings = list(vocab.get("CONST", [])), list(vocab.get("STR", []))
    literal = sorted(set(cc) | set(consts) | set(strings))
    return {"CC": cc, "CONST": consts, "Delimiter": consts, "STR": strings,
            "Literal": literal, "LiteralSet": literal, "CompExpr": literal}


# -------------------------------------------------------------------- scoring

def _classes_of(node: Node, alphabet: Alphabet) -> set[str]:
    out: set[str] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        stack.extend(n.children)
        if n.kind == "class":
            if n.value == "let":
                out |= {"cap", "low"}
            elif n.value in CLASS_GROUPS:
                out.add(n.value)
        elif n.kind in ("char", "string"):
            for c in n.value:
                for g in CLASS_GROUPS:
                    if c in alphabet.classes[g]:
                        out.add(g)
    return out


class DefaultScorer:
    """Grammar log-probability plus two example-driven bonuses.

    A step's score is ``log p(choice) + weight * overlap_gain + progress_weight * progress_gain``.
    ``overlap`` is the fraction of character classes occurring in the
    positives that the tree already mentions; ``progress`` is the fraction of
    examples that every completion of the tree already classifies correctly,
    read off its approximations. Both are differences between child and
    parent, so scores add up step by step and the empty derivation scores 0.
    """

    def __init__(self, task: SynthesisTask | None = None, alphabet: Alphabet = DEFAULT_ALPHABET,
                 weight: float = 1.0, progress_weight: float = 12.0, cache: ApproxCache | None = None):
        self.alphabet = alphabet
        self.weight = weight
        self.progress_weight = progress_weight
        self.pos = task.positives if task else ()
        self.neg = task.negatives if task else ()
        self.cache = cache if cache is not None else ApproxCache(alphabet)
        present: set[str] = set()
        for s in self.pos:
            for c in s:
                for g in CLASS_GROUPS:
                    if c in alphabet.classes[g]:
                        present.add(g)
        self.present = present

    def overlap(self, node: Node) -> float:
        if not self.present:
            return 0.0
        return len(_classes_of(node, self.alphabet) & self.present) / len(self.present)

    def progress(self, node: Node) -> float:
        n = len(self.pos) + len(self.neg)
        if not n or not self.progress_weight:
            return 0.0
        try:
            return self.cache.decided(node, self.pos, self.neg) / n
        except fa.StateLimitError:
            return 0.0

    def __call__(self, parent: Node, child: Node, logp: float) -> float:
        return (logp + self.weight * (self.overlap(child) - self.overlap(parent))
                + self.progress_weight * (self.progress(child) - self.progress(parent)))


def default_scorer(task: SynthesisTask | None = None, alphabet: Alphabet = DEFAULT_ALPHABET,
                   cache: ApproxCache | None = None) -> DefaultScorer:
    return DefaultScorer(task, alphabet, cache=cache)


# ------------------------------------------------------------------ expansion

def leftmost_hole(node: Node, path: tuple[int, ...] = ()):
    """Path and kind ("expr" or "count") of the first hole in pre-order."""
    if node.kind == "hole":
        return path, "expr"
    for i, c in enumerate(node.children):
        found = leftmost_hole(c, path + (i,))
        if found is not None:
            return found
    if any(isinstance(p, str) for p in node.params):
        return path, "count"
    return None


def _replace(node: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    kids = list(node.children)
    kids[path[0]] = _replace(kids[path[0]], path[1:], new)
    return Node(node.kind, tuple(kids), node.value, node.params)


def _get(node: Node, path):
    for i in path:
        node = node.children[i]
    return node


def _logsumexp(a: float, b: float) -> float:
    hi = max(a, b)
    return hi + math.log(math.exp(a - hi) + math.exp(b - hi))


class Expander:
    """Enumerates one-step expansions of the leftmost hole with their log-probabilities.

    Chains of unit productions (such as ``Cons -> BasicCons``) are followed in
    the same step, so every expansion adds at least one operator or leaf.
    Trees reachable along several chains get the summed probability.
    """

    def __init__(self, vocab: dict[str, list[str]], grammar: GrammarConfig):
        self.vocab = vocab
        self.grammar = grammar
        direct: dict[str, list[tuple[Node, float]]] = {}
        for nt, prods in GRAMMAR.items():
            w = grammar.production_weights(nt)
            total = sum(w.values())
            direct[nt] = [(p.pattern, math.log(w[p.text] / total)) for p in prods]
        direct[START] = [(hole(t.root), math.log(1 / len(Template))) for t in Template]
        for cat in LEAF_CATEGORIES:
            items = vocab.get(cat, [])
            direct[cat] = [(lit(x), -math.log(len(items))) for x in items] if items else []
        self._direct = direct
        self._closed: dict[str, list[tuple[Node, float]]] = {}
        ks = list(range(grammar.k_min, grammar.k_max + 1))
        pairs = [(a, b) for a in range(1, grammar.range_k1_max + 1)
                 for b in range(a + 1, grammar.range_k2_max + 1)]
        self._counts = {1: [((k,), -math.log(len(ks))) for k in ks],
                        2: [(pr, -math.log(len(pairs))) for pr in pairs]}
        self.best = self._best_completions()

    def _best_completions(self) -> dict[str, float]:
        """Log-probability of the most likely complete derivation from each nonterminal."""
        best = {nt: -math.inf for nt in self._direct}
        for _ in range(50):
            changed = False
            for nt, prods in self._direct.items():
                for pattern, lp in prods:
                    v = lp + self._pattern_bound(pattern, best)
                    if v > best[nt] + 1e-12:
                        best[nt] = v
                        changed = True
            if not changed:
                break
        return best

    def _pattern_bound(self, node: Node, best: dict[str, float]) -> float:
        if node.kind == "hole":
            return best.get(node.value or START, -math.inf)
        total = sum(self._pattern_bound(c, best) for c in node.children)
        free = sum(isinstance(p, str) for p in node.params)
        if free:
            total += self._counts[free][0][1]
        return total

    def bound(self, node: Node) -> float:
        """Best-case log-probability still to be paid for the holes of ``node``."""
        return self._pattern_bound(node, self.best)

    @staticmethod
    def is_unit(pattern: Node) -> bool:
        return pattern.kind == "hole"

    def closure(self, nt: str) -> list[tuple[Node, float]]:
        """Non-unit right-hand sides reachable from ``nt`` through unit productions."""
        if nt in self._closed:
            return self._closed[nt]
        acc: dict[Node, float] = {}

        def walk(label: str, logp: float, trail: tuple[str, ...]):
            for pattern, lp in self._direct[label]:
                if self.is_unit(pattern):
                    if pattern.value not in trail:
                        walk(pattern.value, logp + lp, trail + (pattern.value,))
                else:
                    total = logp + lp
                    acc[pattern] = _logsumexp(acc[pattern], total) if pattern in acc else total

        walk(nt, 0.0, (nt,))
        self._closed[nt] = list(acc.items())
        return self._closed[nt]

    def expand(self, node: Node, keep: Callable[[Node], bool] | None = None) -> list[tuple[Node, float]]:
        """Children of ``node`` with the step's log-probability.

        When a step leaves a count slot as the leftmost hole the count is
        chosen in the same step, so every child can be checked with its
        repetition bounds known. ``keep`` may reject such a tree before its
        counts are enumerated; each count choice only narrows its language.
        """
        out = []
        for child, logp in self._expand_once(node):
            found = leftmost_hole(child)
            if found is not None and found[1] == "count":
                if keep is None or keep(child):
                    out += [(grand, logp + lp) for grand, lp in self._expand_once(child, found)]
            else:
                out.append((child, logp))
        return out

    def _expand_once(self, node: Node, found=None) -> list[tuple[Node, float]]:
        found = found or leftmost_hole(node)
        if found is None:
            return []
        path, kind = found
        target = _get(node, path)
        out = []
        if kind == "expr":
            parent = _get(node, path[:-1]) if path else None
            for pattern, logp in self.closure(target.value or START):
                # a double negation or nested optional only restates its operand
                if parent is not None and parent.kind == pattern.kind and pattern.kind in ("not", "optional"):
                    continue
                out.append((_replace(node, path, pattern), logp))
        else:
            n_free = sum(isinstance(p, str) for p in target.params)
            for values, logp in self._counts[n_free]:
                it = iter(values)
                params = tuple(next(it) if isinstance(p, str) else p for p in target.params)
                out.append((_replace(node, path, Node(target.kind, target.children, None, params)), logp))
        return out

    def apply(self, node: Node, nt: str, choice: str) -> Node:
        """Apply one recorded derivation step to the leftmost hole."""
        path, kind = leftmost_hole(node)
        target = _get(node, path)
        if nt == "K":
            values = iter(int(v) for v in choice.split(","))
            params = tuple(next(values) if isinstance(p, str) else p for p in target.params)
            return _replace(node, path, Node(target.kind, target.children, None, params))
        if kind != "expr" or (target.value or START) != nt:
            raise ValueError(f"step {nt} -> {choice} does not fit the leftmost hole")
        if nt in LEAF_CATEGORIES:
            return _replace(node, path, parse_dsl(choice))
        if nt == START:
            return _replace(node, path, hole(Template(choice).root))
        for p in GRAMMAR[nt]:
            if p.text == choice:
                return _replace(node, path, p.pattern)
        raise ValueError(f"{nt} has no production {choice!r}")


def derivation_partials(ast: Node, template: Template | None = None) -> list[Node]:
    """Partial trees along the leftmost derivation of ``ast`` the search would follow."""
    if template is None:
        from .grammar import template_of
        template = template_of(ast)
    template = Template(template)
    steps = derivation(ast, template.root)
    expander = Expander({}, GrammarConfig())
    node = hole(template.root)
    out = [node]
    for nt, choice in steps:
        node = expander.apply(node, nt, choice)
        # unit steps only relabel a hole and count slots are filled together with
        # the step that exposed them; the search takes both in one expansion
        found = leftmost_hole(node)
        if found is not None and (found[1] == "count" or _is_unit_step(nt, choice)):
            continue
        out.append(node)
    return out


def _is_unit_step(nt: str, choice: str) -> bool:
    if nt in LEAF_CATEGORIES or nt == "K":
        return False
    return any(p.text == choice and p.pattern.kind == "hole" for p in GRAMMAR.get(nt, ()))


# --------------------------------------------------------------------- search

def _rank_key(item):
    score, node, text = item[:3]
    return (-score, ast_metrics(node)["size"], text)


def _diverse(ranked: list, width: int, per_skeleton: int) -> list:
    """Top ``width`` items, at most ``per_skeleton`` per anonymized shape
    (the remaining slots are filled from the overflow in rank order)."""
    if per_skeleton <= 0:
        return ranked[:width]
    out, overflow, counts = [], [], Counter()
    for item in ranked:
        key = anonymize(item[1])
        if counts[key] < per_skeleton:
            counts[key] += 1
            out.append(item)
            if len(out) == width:
                return out
        else:
            overflow.append(item)
    return out + overflow[: width - len(out)]


def _beam_key(item):
    score, node, text, priority = item
    return (-priority, ast_metrics(node)["size"], text)


def synth_beam(task: SynthesisTask, scorer: Callable | None = None,
               cfg: SearchConfig | None = None, cache: ApproxCache | None = None,
               inject: Sequence[Node] = ()) -> SynthResult:
    """Beam search over grammar derivations; returns up to ``task.k`` ranked regexes.

    ``inject`` lists partial trees that are forced back into the beam at the
    corresponding step when they were generated but ranked out, which lets
    tests follow a known derivation. A pruned partial is never forced in.
    """
    cfg = cfg or SearchConfig()
    if task.inconsistent:
        return SynthResult([], "inconsistent")
    vocab = search_vocabulary(task, cfg)
    expander = Expander(vocab, cfg.grammar)
    if cache is None:
        cache = ApproxCache(cfg.alphabet, hole_words=literal_hole_words(vocab, cfg.alphabet))
    scorer = scorer or default_scorer(task, cfg.alphabet, cache)
    pos, neg = task.positives, task.negatives
    root = hole(task.template.root) if task.template else hole(START)
    beam: list[tuple[float, Node, str, float]] = [(0.0, root, print_dsl(root), 0.0)]
    done: dict[str, tuple[float, Node, str]] = {}
    expansions = pruned = step = 0
    started = time.monotonic()
    injected = list(inject)

    def ok(node: Node, complete: bool) -> bool:
        if not cfg.prune:
            return True
        if not complete and step % cfg.stride:
            return True
        try:
            return feasible(node, pos, neg, cfg.alphabet, cache)
        except fa.StateLimitError:
            return True

    while beam and expansions < task.budget:
        if task.time_limit is not None and time.monotonic() - started > task.time_limit:
            break
        step += 1
        cands: dict[str, tuple[float, Node, str]] = {}
        for score, node, _, _ in beam:
            if expansions >= task.budget:
                break
            expansions += 1
            for child, logp in expander.expand(node, (lambda t: ok(t, False)) if cfg.prune else None):
                complete = not has_holes(child)
                if not ok(child, complete):
                    pruned += 1
                    continue
                s = score + scorer(node, child, logp)
                text = print_dsl(child)
                pool = done if complete else cands
                if text not in pool or pool[text][0] < s:
                    pool[text] = (s, child, text, s + (0.0 if complete else cfg.lookahead * expander.bound(child)))
        beam = _diverse(sorted(cands.values(), key=_beam_key), task.beam, cfg.per_skeleton)
        if step < len(injected):
            forced = injected[step]
            text = print_dsl(forced)
            entry = cands.get(text)
            # only a partial that survived pruning may be forced back in
            if entry is not None and not any(t == text for _, _, t, _ in beam):
                beam = beam[: task.beam - 1] + [entry]
    ranked = sorted(done.values(), key=_rank_key)[: task.k]
    result = [n for _, n, _, _ in ranked]
    return SynthResult(result, "found" if result else "no-solution", expansions, pruned)


# -------------------------------------------------------------- k-best filter

def consistent(ast: Node, pos: Iterable[str], neg: Iterable[str],
               alphabet: Alphabet = DEFAULT_ALPHABET) -> bool:
    d = compile_regex(ast, alphabet)
    return all(d.accepts(s) for s in pos) and not any(d.accepts(s) for s in neg)


def filter_kbest(candidates: Iterable[Node | str], pos: Iterable[str], neg: Iterable[str],
                 alphabet: Alphabet = DEFAULT_ALPHABET) -> Node | None:
    """The first candidate accepting every positive and rejecting every negative."""
    pos, neg = list(pos), list(neg)
    for c in candidates:
        node = parse_dsl(c) if isinstance(c, str) else c
        if consistent(node, pos, neg, alphabet):
            return node
    return None


# ----------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class TaskOutcome:
    task_id: str
    equivalent_at_1: bool
    equivalent_in_k: bool
    consistent_in_k: bool


@dataclass
class EvalReport:
    outcomes: list[TaskOutcome]

    def _pct(self, attr: str) -> float:
        if not self.outcomes:
            return 0.0
        return 100.0 * sum(getattr(o, attr) for o in self.outcomes) / len(self.outcomes)

    @property
    def acc(self) -> float:
        return self._pct("equivalent_at_1")

    @property
    def equiv_found(self) -> float:
        return self._pct("equivalent_in_k")

    @property
    def consistent_found(self) -> float:
        return self._pct("consistent_in_k")

    def summary(self) -> dict:
        return {"tasks": len(self.outcomes), "acc": round(self.acc, 2),
                "equiv_found": round(self.equiv_found, 2),
                "consistent_found": round(self.consistent_found, 2)}

    def table(self) -> str:
        s = self.summary()
        rows = [("tasks", str(s["tasks"])), ("Acc", f"{s['acc']:.1f}"),
                ("Equiv-Found", f"{s['equiv_found']:.1f}"),
                ("Consistent-Found", f"{s['consistent_found']:.1f}")]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value:>6}" for name, value in rows)

    def to_json(self) -> str:
        body = self.summary()
        body["per_task"] = [o.__dict__ for o in self.outcomes]
        return json.dumps(body, indent=2, sort_keys=True)


def evaluate(predictions: Sequence[Sequence[Node | str]], gold: Sequence[Node | str],
             examples: Sequence[tuple[Sequence[str], Sequence[str]]],
             task_ids: Sequence[str] | None = None,
             alphabet: Alphabet = DEFAULT_ALPHABET) -> EvalReport:
    """Score ranked predictions against gold regexes by DFA equivalence."""
    if not (len(predictions) == len(gold) == len(examples)):
        raise ValueError(f"misaligned inputs: {len(predictions)} predictions, "
                         f"{len(gold)} gold, {len(examples)} example sets")
    task_ids = list(task_ids) if task_ids is not None else [str(i) for i in range(len(gold))]
    outcomes = []
    for tid, preds, g, (pos, neg) in zip(task_ids, predictions, gold, examples):
        gd = compile_regex(parse_dsl(g) if isinstance(g, str) else g, alphabet)
        eq_flags, cons_flags = [], []
        for p in preds:
            node = parse_dsl(p) if isinstance(p, str) else p
            d = compile_regex(node, alphabet)
            eq_flags.append(fa.equivalent(d, gd))
            cons_flags.append(all(d.accepts(s) for s in pos) and not any(d.accepts(s) for s in neg))
        outcomes.append(TaskOutcome(tid, bool(eq_flags and eq_flags[0]), any(eq_flags), any(cons_flags)))
    return EvalReport(outcomes)


# --------------------------------------------------------- prediction files

def parse_predictions(text: str) -> dict[str, list[str]]:
    """Read ``# task-id`` headers each followed by ranked DSL lines."""
    out: dict[str, list[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            current = line[1:].strip()
            if not current:
                raise ValueError(f"line {lineno}: empty task id")
            if current in out:
                raise ValueError(f"line {lineno}: duplicate task id {current!r}")
            out[current] = []
        elif current is None:
            raise ValueError(f"line {lineno}: prediction before any task header")
        else:
            out[current].append(line)
    return out


def format_predictions(blocks: dict[str, Sequence[Node | str]]) -> str:
    lines = []
    for tid, preds in blocks.items():
        lines.append(f"# {tid}")
        lines += [p if isinstance(p, str) else print_dsl(p) for p in preds]
        lines.append("")
    return "\n".join(lines)
