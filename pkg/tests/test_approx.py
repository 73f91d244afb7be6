import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import SIGMA, small_asts
from oracles import FILLERS, completions, depth_of, make_partial, member, strings_upto
from regexfoundry.approx import (ApproxCache, PartialRegex, Polarity, PrefixError, erase_labels, feasible,
                                 from_token_prefix, over_approx, token_prefixes, under_approx)
from regexfoundry.automaton import REDUCED_ALPHABET, compile_regex
from regexfoundry.dsl import Node, dsl_tokens, hole, iter_paths, lit, op, parse_dsl, replace_at
from regexfoundry.examples import generate_examples
from regexfoundry.grammar import Template
from regexfoundry.sampler import GrammarConfig, sample_regex
from regexfoundry.synth import derivation_partials

R = REDUCED_ALPHABET
@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_sandwich_against_brute_force(seed):
    partial = make_partial(random.Random(seed), SIGMA)
    over, under = over_approx(partial, R), under_approx(partial, R)
    strings = list(strings_upto(SIGMA, 3))
    lo = [s for s in strings if under.accepts(s)]
    hi = {s for s in strings if over.accepts(s)}
    for c in completions(partial):
        for s in lo:
            assert member(c, s, SIGMA), (c, s)
        for s in strings:
            if member(c, s, SIGMA):
                assert s in hi, (c, s)


@given(small_asts(), st.integers(0, 10**6))
def test_span_evaluator_agrees_with_automata(node, seed):
    rng = random.Random(seed)
    paths = [p for p, _ in iter_paths(node)]
    partial = replace_at(node, rng.choice(paths), hole())
    cache = ApproxCache(R)
    for big in (True, False):
        d = cache.approx(partial, big)
        for s in strings_upto(SIGMA, 3):
            assert cache.accepts(partial, big, s) == d.accepts(s)


def test_complete_regex_approximates_itself():
    node = parse_dsl("concat(<a>,rep(<0>,2))")
    d = compile_regex(node, R)
    assert over_approx(node, R).key() == d.key() == under_approx(node, R).key()


def test_hole_polarity_flips_under_not():
    p = PartialRegex(op("and", op("not", hole()), hole()))
    assert [pol for _, pol in p.holes()] == [Polarity.NEGATIVE, Polarity.POSITIVE]
    # not(?) could be anything: its over-approximation is everything
    assert over_approx(op("not", hole()), R).accepts("a0")
    assert not under_approx(op("not", hole()), R).accepts("")


def test_count_hole_windows():
    over = over_approx(parse_dsl("reprange(<a>,2,?)"), R)
    under = under_approx(parse_dsl("reprange(<a>,2,?)"), R)
    assert not over.accepts("a") and over.accepts("aaaaaa")
    assert under.accepts("aa") and under.accepts("aaa") and not under.accepts("aaaa")
    # a grammar count slot excludes zero
    assert not over_approx(Node("rep", (lit("a"),), params=("K",)), R).accepts("")
    assert over_approx(parse_dsl("rep(<a>,?)"), R).accepts("")


def test_typed_holes_use_their_words():
    cache = ApproxCache(R, hole_words={"CONST": ["a", "0"]})
    node = op("concat", hole("CONST"), hole())
    assert cache.accepts(node, True, "a-")
    assert not cache.accepts(node, True, "-a")
    untyped = ApproxCache(R)
    assert untyped.accepts(node, True, "-a")
    with pytest.raises(ValueError):
        ApproxCache(R, hole_words={"CONST": ["z"]})


def test_erase_labels_keeps_grammar_counts():
    node = Node("rep", (hole("Literal"),), params=("K",))
    assert erase_labels(node) == Node("rep", (hole(),), params=("K",))
    assert erase_labels(node, frozenset({"Literal"})) == node


def test_feasible_prunes_inconsistent_partials():
    # every completion of startwith(<b>...) rejects the positive "a"
    assert not feasible(op("startwith", op("concat", lit("b"), hole())), ["a"], [], R)
    assert feasible(op("startwith", hole()), ["a"], [], R)
    # every completion of or(contain(<a>),?) accepts the negative "0a"
    assert not feasible(op("or", parse_dsl("contain(<a>)"), hole()), [], ["0a"], R)


def test_token_prefix_round_trip():
    ast = parse_dsl("and(startwith(<a>),reprange(<0>,1,3))")
    toks = dsl_tokens(ast)
    parts = token_prefixes(ast)
    assert len(parts) == len(toks) + 1
    assert parts[0].node == hole()
    assert parts[-1].node == ast and parts[-1].complete
    assert str(from_token_prefix(toks[:5])) == "and(startwith(<a>),?)"
    assert str(from_token_prefix(toks[:11])) == "and(startwith(<a>),reprange(<0>,?,?))"


@pytest.mark.parametrize("tokens", [["bogus"], ["not", ")"], ["rep", "(", "<a>", ",", "x"],
                                    ["<a>", "<b>"], ["?"]])
def test_bad_prefixes(tokens):
    with pytest.raises(PrefixError):
        from_token_prefix(tokens)


@settings(max_examples=15)
@given(st.sampled_from(list(Template)), st.integers(0, 10**6))
def test_ground_truth_prefixes_never_pruned(template, seed):
    ast = sample_regex(template, GrammarConfig(complexity_cap=4), random.Random(seed))
    pos, neg = generate_examples(ast, 6, random.Random(seed))
    pos, neg = [x.string for x in pos], [x.string for x in neg]
    for p in token_prefixes(ast):
        assert feasible(p, pos, neg)
    for partial in derivation_partials(ast, template):
        assert feasible(partial, pos, neg)


def test_depth_helper():
    assert depth_of(parse_dsl("not(<a>)")) == 2
    assert all(depth_of(t) <= 2 for t in FILLERS)
