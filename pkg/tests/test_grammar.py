import random

import pytest
from hypothesis import given, strategies as st

from regexfoundry.dsl import Node, parse_dsl, print_dsl
from regexfoundry.grammar import (GRAMMAR, LEAF_CATEGORIES, Template, UndefinedShapeError, comp_kind, cons_kind,
                                  derivable, derivation, layout, recognizes, semantic_complexity, template_of)
from regexfoundry.sampler import GrammarConfig, sample_regex

FIG_A = "and(startwith(<C0>),endwith(rep(<num>,4)))"
FIG_B = "concat(reprange(<num>,1,2),concat(<.>,reprange(<num>,1,2)))"


def replay(steps, root):
    """Rebuild a tree from its leftmost derivation steps."""
    it = iter(steps)

    def build(nt):
        lhs, choice = next(it)
        assert lhs == nt
        if nt in LEAF_CATEGORIES:
            return parse_dsl(choice)
        return fill(parse_dsl(choice, holes=True))

    def fill(p: Node) -> Node:
        if p.kind == "hole":
            return build(p.value)
        kids = tuple(fill(c) for c in p.children)
        params = p.params
        if any(isinstance(x, str) for x in params):
            lhs, text = next(it)
            assert lhs == "K"
            vals = iter(int(v) for v in text.split(","))
            params = tuple(next(vals) if isinstance(x, str) else x for x in params)
        return Node(p.kind, kids, p.value, params)

    tree = build(root)
    assert next(it, None) is None
    return tree


def test_grammar_tables_parse():
    for nt, prods in GRAMMAR.items():
        assert prods, nt
        for p in prods:
            assert p.lhs == nt


def test_figure_regexes():
    a, b = parse_dsl(FIG_A), parse_dsl(FIG_B)
    assert derivable(a, Template.INTERSECTION)
    assert derivable(b, Template.CONCATENATION)
    assert semantic_complexity(a) == 2
    assert semantic_complexity(b) == 3
    assert layout(a).kinds() == ["startwith", "endwith"]
    assert template_of(b) is Template.CONCATENATION


def test_separation_layout():
    ast = parse_dsl("concat(rep(<num>,2),concat(<,>,concat(rep(<num>,2),concat(<,>,rep(<let>,3)))))")
    lay = layout(ast, Template.SEPARATION)
    assert lay.delimiter == parse_dsl("<,>")
    assert len(lay.segments) == 3 and not lay.repeated
    # a copied segment counts once
    assert semantic_complexity(ast, Template.SEPARATION) == 1 + 1 + 1
    star = parse_dsl("concat(rep(<num>,2),star(concat(<->,rep(<num>,2))))")
    assert layout(star, Template.SEPARATION).repeated


def test_macros_count_double():
    adv = parse_dsl("and(startwith(<a>),not(startwith(<ab>)))")
    assert cons_kind(adv) == "adv-startwith"
    assert semantic_complexity(adv, Template.INTERSECTION) == 2
    alt = parse_dsl("or(rep(<a>,2),rep(<num>,3))")
    assert comp_kind(alt) == "alternative"
    assert semantic_complexity(alt, Template.CONCATENATION) == 2


def test_constraint_kinds():
    assert cons_kind(parse_dsl("not(contain(<x>))")) == "not-contain"
    assert cons_kind(parse_dsl("reprange(<any>,2,5)")) == "length-range"
    assert cons_kind(parse_dsl("repatleast(or(<a>,<num>),1)")) == "consist-of"
    assert cons_kind(parse_dsl("not(contain(concat(<a>,notcc(<b>))))")) == "cond-contain"
    assert comp_kind(parse_dsl("optional(rep(<num>,2))")) == "optional-rep"


@pytest.mark.parametrize("text", [
    "star(<a>)", "concat(repatleast(<num>,1),rep(concat(<:>,or(repatleast(<let>,1),repatleast(<num>,1))),2))",
    "rep(<any>,0)",
])
def test_not_derivable(text):
    ast = parse_dsl(text)
    assert not any(derivable(ast, t) for t in Template)
    with pytest.raises(UndefinedShapeError):
        layout(ast)


def test_zero_counts_are_not_grammar_counts():
    assert recognizes("LengthCons", parse_dsl("rep(<any>,3)"))
    assert not recognizes("LengthCons", parse_dsl("rep(<any>,0)"))


@given(st.sampled_from(list(Template)), st.integers(0, 10_000))
def test_derivations_replay_to_the_same_tree(template, seed):
    ast = sample_regex(template, GrammarConfig(), random.Random(seed))
    steps = derivation(ast, template.root)
    assert replay(steps, template.root) == ast


def test_template_parse_aliases():
    assert Template.parse("Sep") is Template.SEPARATION
    with pytest.raises(ValueError):
        Template.parse("union")
    assert print_dsl(parse_dsl(FIG_A)) == FIG_A
