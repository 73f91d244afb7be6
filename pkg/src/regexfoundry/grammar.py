"""The structured regex grammar: productions, recognizer, and template analysis.

Productions are written in DSL syntax where capitalized identifiers are typed
holes (nonterminals) and ``K`` marks an integer slot. ``CONST`` stands for any
single constant symbol and ``STR`` for any constant string.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .dsl import Node, parse_dsl, print_dsl

CC_NAMES = ("num", "let", "low", "cap", "spec")


class Template(str, enum.Enum):
    INTERSECTION = "intersection"
    CONCATENATION = "concatenation"
    SEPARATION = "separation"

    @property
    def root(self) -> str:
        return {"intersection": "IntTemp", "concatenation": "CatTemp", "separation": "SepTemp"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Template":
        text = text.strip().lower()
        aliases = {"int": "intersection", "cat": "concatenation", "sep": "separation"}
        text = aliases.get(text, text)
        for t in cls:
            if t.value == text:
                return t
        raise ValueError(f"unknown template {text!r}")


class UndefinedShapeError(ValueError):
    """The AST is not generated by the template grammar."""


GRAMMAR_TEXT: dict[str, list[str]] = {
    "IntTemp": ["Cons", "and(Cons,IntTemp)"],
    "Cons": ["BasicCons", "LengthCons", "MacroCons"],
    "BasicCons": ["not(BasicCons)", "startwith(ConsExpr)", "endwith(ConsExpr)", "contain(ConsExpr)"],
    "LengthCons": ["rep(<any>,K)", "repatleast(<any>,K)", "reprange(<any>,K,K)"],
    "MacroCons": ["ConsistOfCons", "AdvStartwithCons", "AdvEndwithCons", "CondContainCons"],
    "ConsistOfCons": ["repatleast(LiteralSet,1)"],
    "AdvStartwithCons": ["and(startwith(Literal),not(startwith(Literal)))"],
    "AdvEndwithCons": ["and(endwith(Literal),not(endwith(Literal)))"],
    "CondContainCons": ["not(contain(concat(Literal,notcc(Literal))))",
                        "not(contain(concat(notcc(Literal),Literal)))"],
    "ConsExpr": ["LiteralSet", "MinConsExpr", "concat(MinConsExpr,MinConsExpr)"],
    "MinConsExpr": ["Literal", "rep(Literal,K)"],
    "CatTemp": ["Comp", "concat(Comp,CatTemp)"],
    "Comp": ["optional(Comp)", "BasicComp", "MacroComp"],
    "BasicComp": ["CompExpr", "rep(CompExpr,K)", "repatleast(CompExpr,K)", "reprange(CompExpr,K,K)"],
    "MacroComp": ["or(rep(Literal,K),rep(Literal,K))",
                  "or(repatleast(Literal,K),repatleast(Literal,K))",
                  "or(reprange(Literal,K,K),reprange(Literal,K,K))"],
    "CompExpr": ["Literal", "LiteralSet"],
    "SepTemp": ["concat(Seg,Delimiter,Seg,Delimiter,Seg)", "concat(Seg,star(concat(Delimiter,Seg)))"],
    "Seg": ["IntTemp", "CatTemp"],
    "Delimiter": ["CONST"],
    "Literal": ["CC", "CONST", "STR"],
    "CC": [f"<{c}>" for c in CC_NAMES],
    "LiteralSet": ["Literal", "or(Literal,LiteralSet)"],
}

# leaf categories matched by node kind rather than by a production
LEAF_CATEGORIES = {"CONST": "char", "STR": "string"}


@dataclass(frozen=True)
class Production:
    lhs: str
    text: str
    pattern: Node


def _load() -> dict[str, tuple[Production, ...]]:
    return {lhs: tuple(Production(lhs, t, parse_dsl(t, holes=True)) for t in rhs)
            for lhs, rhs in GRAMMAR_TEXT.items()}


GRAMMAR = _load()


# ---------------------------------------------------------------- recognizer

def _match(pattern: Node, node: Node) -> bool:
    if pattern.kind == "hole":
        return recognizes(pattern.value, node)
    if pattern.kind != node.kind or pattern.value != node.value:
        return False
    for p, v in zip(pattern.params, node.params):
        if isinstance(p, int):
            if p != v:
                return False
        elif not (isinstance(v, int) and v >= 1):
            return False
    return all(_match(p, c) for p, c in zip(pattern.children, node.children))


@lru_cache(maxsize=200_000)
def recognizes(nonterminal: str, node: Node) -> bool:
    """True iff ``node`` is derivable from ``nonterminal``."""
    if nonterminal in LEAF_CATEGORIES:
        return node.kind == LEAF_CATEGORIES[nonterminal]
    return any(_match(p.pattern, node) for p in GRAMMAR[nonterminal])


def derivable(ast: Node, template: Template) -> bool:
    return recognizes(Template(template).root, ast)


def matching_productions(nonterminal: str, node: Node) -> list[Production]:
    if nonterminal in LEAF_CATEGORIES:
        return []
    return [p for p in GRAMMAR[nonterminal] if _match(p.pattern, node)]


def derivation(ast: Node, nonterminal: str) -> list[tuple[str, str]]:
    """One leftmost derivation of ``ast`` as (nonterminal, choice) steps.

    Choices are production texts; leaf categories record the DSL of the leaf,
    and integer slots are recorded under the pseudo-nonterminal ``K``.
    """
    steps: list[tuple[str, str]] = []
    if not _derive(nonterminal, ast, steps):
        raise UndefinedShapeError(f"{print_dsl(ast)} is not derivable from {nonterminal}")
    return steps


def _derive(nt: str, node: Node, steps: list) -> bool:
    if nt in LEAF_CATEGORIES:
        if node.kind != LEAF_CATEGORIES[nt]:
            return False
        steps.append((nt, print_dsl(node)))
        return True
    for prod in GRAMMAR[nt]:
        if _match(prod.pattern, node):
            steps.append((nt, prod.text))
            _derive_pattern(prod.pattern, node, steps)
            return True
    return False


def _derive_pattern(pattern: Node, node: Node, steps: list) -> None:
    if pattern.kind == "hole":
        _derive(pattern.value, node, steps)
        return
    for p, c in zip(pattern.children, node.children):
        _derive_pattern(p, c, steps)
    slots = [v for p, v in zip(pattern.params, node.params) if isinstance(p, str)]
    if slots:
        steps.append(("K", ",".join(str(v) for v in slots)))


# ------------------------------------------------------- template analysis

MACRO_CONS = ("ConsistOfCons", "AdvStartwithCons", "AdvEndwithCons", "CondContainCons")


def cons_kind(node: Node) -> str:
    """Name of the constraint a ``Cons`` subtree expresses."""
    for macro, name in zip(MACRO_CONS, ("consist-of", "adv-startwith", "adv-endwith", "cond-contain")):
        if recognizes(macro, node):
            return name
    if recognizes("LengthCons", node):
        return {"rep": "length", "repatleast": "length-atleast", "reprange": "length-range"}[node.kind]
    negs = 0
    while node.kind == "not":
        negs += 1
        node = node.children[0]
    base = node.kind
    return "not-" + base if negs % 2 else base


def comp_kind(node: Node) -> str:
    """Name of the component shape a ``Comp`` subtree expresses."""
    prefix = ""
    while node.kind == "optional":
        prefix = "optional-"
        node = node.children[0]
    if recognizes("MacroComp", node):
        return prefix + "alternative"
    if node.kind in ("rep", "repatleast", "reprange"):
        return prefix + node.kind
    return prefix + ("set" if node.kind == "or" else "literal")


def cons_complexity(node: Node) -> int:
    return 2 if any(recognizes(m, node) for m in MACRO_CONS) else 1


def comp_complexity(node: Node) -> int:
    while node.kind == "optional":
        node = node.children[0]
    return 2 if recognizes("MacroComp", node) else 1


@dataclass(frozen=True)
class Segment:
    template: Template           # INTERSECTION or CONCATENATION
    units: tuple[Node, ...]      # Cons or Comp subtrees, left to right
    node: Node

    @property
    def complexity(self) -> int:
        f = cons_complexity if self.template is Template.INTERSECTION else comp_complexity
        return sum(f(u) for u in self.units)

    def kinds(self) -> list[str]:
        f = cons_kind if self.template is Template.INTERSECTION else comp_kind
        return [f(u) for u in self.units]


@dataclass(frozen=True)
class Layout:
    """Template-level decomposition of a regex."""

    template: Template
    segments: tuple[Segment, ...]
    delimiter: Node | None = None
    repeated: bool = False       # separation written with star

    @property
    def complexity(self) -> int:
        if self.template is not Template.SEPARATION:
            return self.segments[0].complexity
        distinct = {s.node: s.complexity for s in self.segments}
        return 1 + sum(distinct.values())

    def kinds(self) -> list[str]:
        out = [k for s in self.segments for k in s.kinds()]
        if self.template is Template.SEPARATION:
            out.append("delimiter-repeated" if self.repeated else "delimiter")
        return out


def _int_units(node: Node) -> tuple[Node, ...]:
    units = []
    while True:
        if recognizes("Cons", node):
            # a whole macro constraint takes precedence over splitting its `and`
            if node.kind != "and" or any(recognizes(m, node) for m in MACRO_CONS):
                units.append(node)
                return tuple(units)
        if node.kind == "and" and recognizes("Cons", node.children[0]) and recognizes("IntTemp", node.children[1]):
            units.append(node.children[0])
            node = node.children[1]
            continue
        units.append(node)
        return tuple(units)


def _cat_units(node: Node) -> tuple[Node, ...]:
    units = []
    while node.kind == "concat" and recognizes("Comp", node.children[0]) and recognizes("CatTemp", node.children[1]):
        units.append(node.children[0])
        node = node.children[1]
    units.append(node)
    return tuple(units)


def segment(node: Node, template: Template | None = None) -> Segment:
    options = []
    if template in (None, Template.INTERSECTION) and recognizes("IntTemp", node):
        options.append(Segment(Template.INTERSECTION, _int_units(node), node))
    if template in (None, Template.CONCATENATION) and recognizes("CatTemp", node):
        options.append(Segment(Template.CONCATENATION, _cat_units(node), node))
    if not options:
        raise UndefinedShapeError(f"{print_dsl(node)} is not a segment")
    # the reading a person would describe most briefly wins; ties prefer concatenation
    return min(options, key=lambda s: (s.complexity, s.template is Template.INTERSECTION))


def layout(ast: Node, template: Template | str | None = None) -> Layout:
    """Decompose a template-shaped regex into its constraints/components."""
    if template is None:
        options = []
        for t in Template:
            if derivable(ast, t):
                options.append(layout(ast, t))
        if not options:
            raise UndefinedShapeError(f"{print_dsl(ast)} is not template-shaped")
        return min(options, key=lambda lay: lay.complexity)
    template = Template(template)
    if not derivable(ast, template):
        raise UndefinedShapeError(f"{print_dsl(ast)} is not derivable as {template.value}")
    if template is not Template.SEPARATION:
        return Layout(template, (segment(ast, template),))
    seg1, rest = ast.children
    if rest.kind == "star":
        delim, seg2 = rest.children[0].children
        return Layout(template, (segment(seg1), segment(seg2)), delim, repeated=True)
    delim, rest = rest.children
    seg2, rest = rest.children
    _, seg3 = rest.children
    return Layout(template, (segment(seg1), segment(seg2), segment(seg3)), delim)


def semantic_complexity(ast: Node, template: Template | str | None = None) -> int:
    """How many user-facing constraints/components the regex has.

    Each constraint or component counts one and macros count two. Separation
    regexes count one for the delimiter plus each distinct field once. Without a
    template the cheapest valid reading is used.
    """
    return layout(ast, template).complexity


def template_of(ast: Node) -> Template:
    return layout(ast).template
