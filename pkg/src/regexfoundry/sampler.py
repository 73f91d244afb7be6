"""Sampling regexes from the structured grammar.

Sampling follows the grammar productions with three context-dependent
adjustments: already generated components/fields can be copied (their weight is
multiplied by ``copy_boost``), a composed-of constraint restricts the literals of
the remaining constraints to its character set, and whole samples are rejected
when they are empty, universal, redundant, or too complex.
"""
from __future__ import annotations

import configparser
import math
import random
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import automaton as fa
from .automaton import Alphabet, DEFAULT_ALPHABET, compile_regex
from .dsl import Node, ast_metrics, cls, lit, op, print_dsl
from .grammar import (CC_NAMES, GRAMMAR, MACRO_CONS, Template, derivable, recognizes,
                      semantic_complexity)

COPYABLE = ("Comp", "Seg")


class GenerationBudgetError(RuntimeError):
    """Rejection sampling did not produce a valid regex within the budget."""


class DeadEndError(RuntimeError):
    """Every production of a nonterminal has zero weight in the current context."""


class _Reject(Exception):
    pass


@dataclass
class GrammarConfig:
    """Sampler settings. Production weights default to uniform.

    ``weights`` maps a nonterminal to ``{production text: weight}`` overrides.
    """

    weights: dict[str, dict[str, float]] = field(default_factory=dict)
    copy_boost: float = 4.0
    complexity_cap: int = 6
    cons_depth: int = 4
    comp_depth: int = 3
    budget: int = 200
    local_retries: int = 10
    seed: int = 0
    min_parts: int = 2
    max_parts: int = 5
    part_decay: float = 0.5
    seg_min_parts: int = 1
    seg_max_parts: int = 3
    star_prob: float = 0.3
    k_min: int = 1
    k_max: int = 6
    range_k1_max: int = 4
    range_k2_max: int = 9
    max_set_size: int = 3
    delimiters: str = ",-:;._"
    min_strings: int = 6           # both the language and its complement need this many strings

    def __post_init__(self):
        for nt, table in self.weights.items():
            if nt not in GRAMMAR:
                raise ValueError(f"unknown nonterminal {nt!r}")
            known = {p.text for p in GRAMMAR[nt]}
            for prod, w in table.items():
                if prod not in known:
                    raise ValueError(f"{nt} has no production {prod!r}")
                if not w > 0:
                    raise ValueError(f"weight for {nt} -> {prod} must be positive")
        if self.complexity_cap < 1:
            raise ValueError("complexity_cap must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")
        if not 1 <= self.min_parts <= self.max_parts:
            raise ValueError("need 1 <= min_parts <= max_parts")

    def production_weights(self, nonterminal: str) -> dict[str, float]:
        table = self.weights.get(nonterminal, {})
        return {p.text: table.get(p.text, 1.0) for p in GRAMMAR[nonterminal]}

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "GrammarConfig":
        kwargs: dict = {}
        weights: dict[str, dict[str, float]] = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, raw in values.items():
            key = key.strip()
            if key.startswith("weight."):
                _, nt, prod = key.split(".", 2)
                if prod.isdigit():
                    prod = GRAMMAR[nt][int(prod) - 1].text
                weights.setdefault(nt, {})[prod] = float(raw)
            elif key in types and key != "weights":
                kind = types[key]
                kwargs[key] = (float(raw) if kind == "float" else
                               int(raw) if kind == "int" else str(raw).strip())
            else:
                raise ValueError(f"unknown config key {key!r}")
        return cls(weights=weights, **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "GrammarConfig":
        """Read ``key = value`` lines (an optional ``[grammar]`` header is allowed)."""
        text = Path(path).read_text(encoding="utf-8")
        parser = configparser.ConfigParser(delimiters=("=",), interpolation=None)
        parser.optionxform = str
        if not text.lstrip().startswith("["):
            text = "[grammar]\n" + text
        parser.read_string(text)
        values: dict[str, str] = {}
        for section in parser.sections():
            values.update(parser[section])
        return cls.from_mapping(values)


@dataclass
class DerivationState:
    """Task-local context of one derivation."""

    alphabet: Alphabet = DEFAULT_ALPHABET
    pool: list[Node] = field(default_factory=list)
    allowed: str | None = None          # active composed-of character budget
    exclude: Node | None = None         # subtree that must not be copied next
    negated: bool = False


# ------------------------------------------------------------ weighting

def _literal_ok(node: Node, allowed: str, alphabet: Alphabet) -> bool:
    for sub in _leaves(node):
        if sub.kind == "class":
            if sub.value == "any":
                continue
            chars = alphabet.classes[sub.value]
        elif sub.kind in ("char", "string"):
            chars = sub.value
        else:
            continue
        if not set(chars) <= set(allowed):
            return False
    return True


def _leaves(node: Node):
    if not node.children:
        yield node
    for c in node.children:
        yield from _leaves(c)


def adapt_weights(state: DerivationState, nonterminal: str, base: dict[str, float],
                  copy_boost: float = 4.0) -> list[tuple[str | Node, float]]:
    """Context-adjusted, normalized choice weights for expanding ``nonterminal``.

    Choices are production texts, plus (for copyable nonterminals) pooled
    subtrees that the nonterminal can derive. A pooled subtree gets a share of
    one average production weight, multiplied by ``copy_boost``. Under an
    active composed-of budget, choices that would introduce literals outside the
    budget get weight zero.
    """
    weights: list[tuple[str | Node, float]] = list(base.items())
    if nonterminal in COPYABLE and state.pool:
        eligible = []
        for sub in state.pool:
            if sub == state.exclude or sub in eligible:
                continue
            if recognizes(nonterminal, sub):
                eligible.append(sub)
        if eligible:
            share = sum(base.values()) / len(base) / len(eligible)
            weights += [(sub, share * copy_boost) for sub in eligible]
    if state.allowed is not None:
        allowed = state.allowed
        adjusted = []
        for choice, w in weights:
            if isinstance(choice, Node):
                ok = _literal_ok(choice, allowed, state.alphabet)
            elif nonterminal == "CC":
                ok = set(state.alphabet.classes[choice[1:-1]]) <= set(allowed)
            elif choice in ("CONST", "STR"):
                ok = bool(allowed)
            else:
                ok = True
            adjusted.append((choice, w if ok else 0.0))
        weights = adjusted
    total = sum(w for _, w in weights)
    if total <= 0:
        raise DeadEndError(f"no viable production for {nonterminal}")
    return [(c, w / total) for c, w in weights]


# --------------------------------------------------------------- sampler

def _too_deep(unit: Node, category: str, cap: int) -> bool:
    # macro shapes have a fixed depth of their own and are exempt from the cap
    core = unit
    while core.kind == "optional":
        core = core.children[0]
    macros = MACRO_CONS if category == "Cons" else ("MacroComp",)
    if any(recognizes(m, core) for m in macros):
        return False
    return ast_metrics(unit)["depth"] > cap


class _Sampler:
    def __init__(self, cfg: GrammarConfig, rng: random.Random, alphabet: Alphabet):
        self.cfg = cfg
        self.rng = rng
        self.alphabet = alphabet
        self.letters_digits = alphabet.classes["let"] + alphabet.classes["num"] or alphabet.symbols

    # -- helpers
    def n_parts(self, lo: int, hi: int) -> int:
        n = lo
        while n < hi and self.rng.random() < self.cfg.part_decay:
            n += 1
        return n

    def choose(self, nt: str, state: DerivationState, drop: tuple[str, ...] = ()):
        base = self.cfg.production_weights(nt)
        for d in drop:
            base[d] = 0.0
        if sum(base.values()) <= 0:
            raise DeadEndError(nt)
        options = adapt_weights(state, nt, base, self.cfg.copy_boost)
        choices = [c for c, _ in options]
        return self.rng.choices(choices, [w for _, w in options])[0]

    def compile(self, node: Node) -> fa.Dfa:
        return compile_regex(node, self.alphabet)

    def k(self) -> int:
        return self.rng.randint(self.cfg.k_min, self.cfg.k_max)

    def k_range(self) -> tuple[int, int]:
        pairs = [(a, b) for a in range(1, self.cfg.range_k1_max + 1)
                 for b in range(a + 1, self.cfg.range_k2_max + 1)]
        return self.rng.choice(pairs)

    def chars(self, node: Node) -> str:
        if node.kind == "class":
            return self.alphabet.classes[node.value]
        if node.kind in ("char", "string"):
            return node.value
        return "".join(self.chars(c) for c in node.children)

    # -- expansion
    def expand(self, nt: str, state: DerivationState) -> Node:
        handler = getattr(self, "nt_" + nt, None)
        if handler is not None:
            return handler(state)
        choice = self.choose(nt, state)
        if isinstance(choice, Node):
            return choice
        return self.instantiate(GRAMMAR_PATTERNS[nt][choice], state)

    def instantiate(self, pattern: Node, state: DerivationState) -> Node:
        if pattern.kind == "hole":
            return self.expand(pattern.value, state)
        kids = tuple(self.instantiate(c, state) for c in pattern.children)
        params = pattern.params
        if any(isinstance(p, str) for p in params):
            params = self.k_range() if pattern.kind == "reprange" else (self.k(),)
        if pattern.kind == "optional" and kids[0].kind == "optional":
            return kids[0]              # optional(optional(x)) says no more than optional(x)
        return Node(pattern.kind, kids, pattern.value, params)

    # literals
    def nt_CONST(self, state: DerivationState) -> Node:
        pool = state.allowed if state.allowed is not None else self.alphabet.symbols
        return lit(self.rng.choice(pool))

    def nt_STR(self, state: DerivationState) -> Node:
        pool = state.allowed if state.allowed is not None else self.letters_digits
        n = self.rng.randint(2, 3)
        return lit("".join(self.rng.choice(pool) for _ in range(n)))

    def nt_LiteralSet(self, state: DerivationState) -> Node:
        size = 1
        while size < self.cfg.max_set_size and self.choose("LiteralSet", state) != "Literal":
            size += 1
        for _ in range(self.cfg.local_retries):
            items = [self.expand("Literal", state) for _ in range(size)]
            if self._independent(items):
                return op("or", *items) if size > 1 else items[0]
        raise DeadEndError("LiteralSet")

    def _independent(self, items: list[Node]) -> bool:
        """No literal in a set may be covered by the others (e.g. or(<let>,<low>))."""
        if len(set(items)) != len(items):
            return False
        for i, x in enumerate(items):
            if x.kind == "string":
                continue
            others = set("".join(self.chars(y) for j, y in enumerate(items) if j != i and y.kind != "string"))
            if set(self.chars(x)) <= others:
                return False
        return True

    def _cc_or_const(self, state: DerivationState) -> Node:
        if self.rng.random() < 0.7:
            return self.instantiate(GRAMMAR_PATTERNS["Literal"]["CC"], state)
        return self.nt_CONST(state)

    # constraints
    def nt_BasicCons(self, state: DerivationState) -> Node:
        choice = self.choose("BasicCons", state, drop=("not(BasicCons)",) if state.negated else ())
        if choice == "not(BasicCons)":
            state.negated = True
            try:
                return op("not", self.expand("BasicCons", state))
            finally:
                state.negated = False
        return self.instantiate(GRAMMAR_PATTERNS["BasicCons"][choice], state)

    def nt_ConsistOfCons(self, state: DerivationState) -> Node:
        items = self.nt_LiteralSet(state)
        state.allowed = self.alphabet.sort(self.chars(items))
        return op("repatleast", items, 1)

    def _adversative(self, state: DerivationState, side: str) -> Node:
        outer = self.instantiate(GRAMMAR_PATTERNS["Literal"]["CC"], state)
        chars = self.chars(outer)
        subs = [cls(n) for n in CC_NAMES
                if set(self.alphabet.classes[n]) < set(chars) and self.alphabet.classes[n]]
        if subs and self.rng.random() < 0.3:
            inner = self.rng.choice(subs)
        else:
            inner = lit(self.rng.choice(chars))
        return op("and", op(side, outer), op("not", op(side, inner)))

    def nt_AdvStartwithCons(self, state: DerivationState) -> Node:
        return self._adversative(state, "startwith")

    def nt_AdvEndwithCons(self, state: DerivationState) -> Node:
        return self._adversative(state, "endwith")

    def nt_CondContainCons(self, state: DerivationState) -> Node:
        choice = self.choose("CondContainCons", state)
        for _ in range(self.cfg.local_retries):
            x, y = self._cc_or_const(state), self._cc_or_const(state)
            if set(self.chars(x)) & set(self.chars(y)):
                continue
            if choice.startswith("not(contain(concat(Literal"):
                return op("not", op("contain", op("concat", x, op("notcc", y))))
            return op("not", op("contain", op("concat", op("notcc", x), y)))
        raise DeadEndError("CondContainCons")

    # components
    def nt_MacroComp(self, state: DerivationState) -> Node:
        choice = self.choose("MacroComp", state)
        pattern = GRAMMAR_PATTERNS["MacroComp"][choice]
        for _ in range(self.cfg.local_retries):
            node = self.instantiate(pattern, state)
            a, b = node.children
            if a.children[0] != b.children[0]:
                return node
        raise DeadEndError("MacroComp")

    # templates
    def nt_IntTemp(self, state: DerivationState, lo: int | None = None, hi: int | None = None) -> Node:
        cfg = self.cfg
        n = self.n_parts(cfg.min_parts if lo is None else lo, cfg.max_parts if hi is None else hi)
        plans = []
        for _ in range(n):
            kind = self.choose("Cons", state)
            macro = None
            if kind == "MacroCons":
                drop = ("ConsistOfCons",) if any(m == "ConsistOfCons" for _, m in plans) else ()
                macro = self.choose("MacroCons", state, drop=drop)
            plans.append((kind, macro))
        plans.sort(key=lambda p: p[1] != "ConsistOfCons")
        units: list[Node] = []
        conj = None
        for kind, macro in plans:
            for _ in range(cfg.local_retries):
                try:
                    unit = self.expand(macro or kind, state)
                except DeadEndError:
                    continue
                if unit in units or _too_deep(unit, "Cons", cfg.cons_depth):
                    continue
                d = self.compile(unit)
                if fa.is_empty(d) or fa.is_universal(d):
                    continue
                if conj is not None:
                    joint = fa.intersect(conj, d)
                    if fa.is_empty(joint) or fa.subset(conj, d):
                        continue
                else:
                    joint = d
                conj = joint
                units.append(unit)
                break
            else:
                raise _Reject("constraint")
        state.allowed = None
        self.rng.shuffle(units)
        if len(units) > 1:
            dfas = [self.compile(u) for u in units]
            for i in range(len(units)):
                rest = None
                for j, dj in enumerate(dfas):
                    if j != i:
                        rest = dj if rest is None else fa.intersect(rest, dj)
                if fa.subset(rest, dfas[i]):
                    raise _Reject("redundant constraint")
        return op("and", *units) if len(units) > 1 else units[0]

    def nt_CatTemp(self, state: DerivationState, lo: int | None = None, hi: int | None = None) -> Node:
        cfg = self.cfg
        n = self.n_parts(cfg.min_parts if lo is None else lo, cfg.max_parts if hi is None else hi)
        comps: list[Node] = []
        for _ in range(n):
            state.exclude = comps[-1] if comps else None
            for _ in range(cfg.local_retries):
                try:
                    comp = self.expand("Comp", state)
                except DeadEndError:
                    continue
                if not _too_deep(comp, "Comp", cfg.comp_depth):
                    break
            else:
                raise _Reject("component")
            comps.append(comp)
            if comp not in state.pool:
                state.pool.append(comp)
        state.exclude = None
        return op("concat", *comps) if len(comps) > 1 else comps[0]

    def nt_Seg(self, state: DerivationState) -> Node:
        choice = self.choose("Seg", state)
        if isinstance(choice, Node):
            return choice
        lo, hi = self.cfg.seg_min_parts, self.cfg.seg_max_parts
        if choice == "IntTemp":
            seg = self.nt_IntTemp(DerivationState(self.alphabet), lo, hi)
        else:
            seg = self.nt_CatTemp(state, lo, hi)
        return seg

    def nt_SepTemp(self, state: DerivationState) -> Node:
        pool = self.alphabet.sort(set(self.cfg.delimiters) & set(self.alphabet.symbols))
        delim = lit(self.rng.choice(pool or self.alphabet.classes["spec"] or self.alphabet.symbols))
        first = self.nt_Seg(state)
        state.pool.append(first)
        if self.rng.random() < self.cfg.star_prob:
            return op("concat", first, op("star", op("concat", delim, first)))
        segs = [first]
        for _ in range(2):
            state.exclude = None
            seg = self.nt_Seg(state)
            segs.append(seg)
            if seg not in state.pool:
                state.pool.append(seg)
        return op("concat", segs[0], delim, segs[1], delim, segs[2])


GRAMMAR_PATTERNS = {nt: {p.text: p.pattern for p in prods} for nt, prods in GRAMMAR.items()}


# --------------------------------------------------------------- public API

def check_sample(ast: Node, template: Template, cfg: GrammarConfig,
                 alphabet: Alphabet = DEFAULT_ALPHABET) -> str | None:
    """Reason the sample is invalid, or None when it passes every check."""
    if not derivable(ast, template):
        return "not derivable"
    if semantic_complexity(ast, template) > cfg.complexity_cap:
        return "too complex"
    try:
        d = compile_regex(ast, alphabet)
    except fa.StateLimitError:
        return "automaton too large"
    if fa.is_empty(d):
        return "empty language"
    if fa.is_universal(d):
        return "universal language"
    if cfg.min_strings:
        hi = (fa.shortest_length(d) or 0) + 64
        if len(fa.enumerate_accepted(d, 0, hi, limit=cfg.min_strings)) < cfg.min_strings:
            return "too few accepted strings"
        rest = fa.complement(d)
        hi = (fa.shortest_length(rest) or 0) + 64
        if len(fa.enumerate_accepted(rest, 0, hi, limit=cfg.min_strings)) < cfg.min_strings:
            return "too few rejected strings"
    return None


def sample_regex(template: Template | str, cfg: GrammarConfig | None = None,
                 rng: random.Random | None = None,
                 alphabet: Alphabet = DEFAULT_ALPHABET) -> Node:
    """Draw one valid regex for ``template``; raises GenerationBudgetError."""
    cfg = cfg or GrammarConfig()
    rng = rng or random.Random(cfg.seed)
    template = Template(template)
    sampler = _Sampler(cfg, rng, alphabet)
    for _ in range(cfg.budget):
        state = DerivationState(alphabet)
        try:
            ast = sampler.expand(template.root, state)
        except (DeadEndError, _Reject):
            continue
        if check_sample(ast, template, cfg, alphabet) is None:
            return ast
    raise GenerationBudgetError(f"no valid {template.value} regex within {cfg.budget} attempts")


def split_mix(n: int) -> dict[Template, int]:
    per, extra = divmod(n, len(Template))
    return {t: per + (1 if i < extra else 0) for i, t in enumerate(Template)}


def sample_batch(n: int, mix: dict[Template, int] | None = None, cfg: GrammarConfig | None = None,
                 rng: random.Random | None = None,
                 alphabet: Alphabet = DEFAULT_ALPHABET) -> list[tuple[Template, Node]]:
    """Sample ``n`` pairwise DFA-inequivalent regexes with per-template counts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = cfg or GrammarConfig()
    rng = rng or random.Random(cfg.seed)
    mix = {Template(t): c for t, c in (mix or split_mix(n)).items()}
    if sum(mix.values()) != n:
        raise ValueError("template counts must sum to n")
    master = rng.getrandbits(64)
    seen: set = set()
    out: list[tuple[Template, Node]] = []
    for template in Template:
        want = mix.get(template, 0)
        stream = random.Random(f"{master}:{template.value}")
        got = misses = 0
        while got < want:
            ast = sample_regex(template, cfg, stream, alphabet)
            key = compile_regex(ast, alphabet).key()
            if key in seen:
                misses += 1
                if misses > cfg.budget * max(want, 1):
                    raise GenerationBudgetError(f"could not find {want} distinct {template.value} regexes")
                continue
            seen.add(key)
            out.append((template, ast))
            got += 1
    return out


def has_repeated_component(ast: Node) -> bool:
    """True when a concatenation repeats one of its components."""
    parts = []
    while ast.kind == "concat":
        parts.append(ast.children[0])
        ast = ast.children[1]
    parts.append(ast)
    return len(set(parts)) < len(parts)


def expected_parts(cfg: GrammarConfig) -> float:
    """Mean number of template parts under the geometric decay."""
    p, n, total, mass = cfg.part_decay, cfg.min_parts, 0.0, 1.0
    for k in range(n, cfg.max_parts + 1):
        pk = mass * (1 - p) if k < cfg.max_parts else mass
        total += k * pk
        mass *= p
    return total if not math.isnan(total) else float(n)
