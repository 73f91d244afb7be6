import random

import pytest
from hypothesis import given, strategies as st

from conftest import SIGMA, small_asts
from oracles import language, member, strings_upto
from regexfoundry import automaton as fa
from regexfoundry.automaton import (DEFAULT_ALPHABET, REDUCED_ALPHABET, Alphabet, compile_regex, equivalent,
                                    is_empty, is_universal)
from regexfoundry.dsl import hole, parse_dsl

R = REDUCED_ALPHABET


def dfa(text, alphabet=R):
    return compile_regex(parse_dsl(text), alphabet)


@given(small_asts())
def test_compile_matches_oracle(node):
    d = compile_regex(node, R)
    for s in strings_upto(SIGMA, 4):
        assert d.accepts(s) == member(node, s, SIGMA), s


@given(small_asts(), small_asts())
def test_equivalent_matches_bounded_brute_force_and_keys(a, b):
    da, db = compile_regex(a, R), compile_regex(b, R)
    eq = equivalent(da, db)
    assert eq == (da.key() == db.key())
    if eq:
        assert language(a, SIGMA, 4) == language(b, SIGMA, 4)


@given(small_asts())
def test_emptiness_and_universality(node):
    d = compile_regex(node, R)
    lang = language(node, SIGMA, 3)
    if is_empty(d):
        assert not lang
    if is_universal(d):
        assert len(lang) == sum(len(SIGMA) ** n for n in range(4))
    assert is_empty(d) == (fa.shortest_length(d) is None)


@given(small_asts(), small_asts())
def test_boolean_operations(a, b):
    da, db = compile_regex(a, R), compile_regex(b, R)
    inter, uni, diff = fa.intersect(da, db), fa.union(da, db), fa.difference(da, db)
    comp = fa.complement(da)
    for s in strings_upto(SIGMA, 3):
        x, y = da.accepts(s), db.accepts(s)
        assert inter.accepts(s) == (x and y)
        assert uni.accepts(s) == (x or y)
        assert diff.accepts(s) == (x and not y)
        assert comp.accepts(s) == (not x)
    assert fa.subset(inter, da) and fa.subset(da, uni)


@given(small_asts(), small_asts())
def test_shortest_difference(a, b):
    da, db = compile_regex(a, R), compile_regex(b, R)
    w = fa.shortest_difference(da, db)
    diff = fa.difference(da, db)
    if w is None:
        assert is_empty(diff)
    else:
        assert da.accepts(w) and not db.accepts(w)
        assert len(w) == fa.shortest_length(diff)


@given(small_asts())
def test_counting_and_enumeration(node):
    d = compile_regex(node, R)
    if is_empty(d):
        with pytest.raises(fa.EmptyLanguageError):
            fa.count_accepted(d)
        return
    brute = sorted(language(node, SIGMA, 3), key=lambda s: (len(s), [SIGMA.index(c) for c in s]))
    assert fa.count_accepted(d, 0, 3) == len(brute)
    assert fa.enumerate_accepted(d, 0, 3, limit=10_000) == brute


@given(small_asts(), st.integers(0, 1000))
def test_sampling_stays_in_language(node, seed):
    d = compile_regex(node, R)
    if is_empty(d):
        return
    rng = random.Random(seed)
    for _ in range(5):
        s = fa.sample_accepted(d, rng)
        assert d.accepts(s)
        assert member(node, s, SIGMA)


def test_sampling_window():
    d = dfa("repatleast(<a>,2)")
    rng = random.Random(0)
    assert all(len(fa.sample_accepted(d, rng, 4, 6)) in (4, 5, 6) for _ in range(20))
    with pytest.raises(fa.InfeasibleWindowError):
        fa.sample_accepted(dfa("rep(<a>,2)"), rng, 3, 5)


def test_minimal_sizes():
    assert dfa("<a>").n_states == 3                 # start, accept, sink
    assert dfa("star(<a>)").n_states == 2
    assert dfa("rep(<num>,4)").n_states == 6
    assert is_universal(dfa("star(<any>)"))
    assert is_empty(dfa("<null>"))
    assert is_empty(dfa("and(<a>,<b>)"))


def test_known_equivalences():
    assert equivalent(dfa("star(star(<a>))"), dfa("star(<a>)"))
    assert equivalent(dfa("repatleast(<a>,0)"), dfa("star(<a>)"))
    assert equivalent(dfa("contain(<a>)"), dfa("concat(star(<any>),concat(<a>,star(<any>)))"))
    assert equivalent(dfa("not(not(<A>))"), dfa("<A>"))
    assert equivalent(dfa("reprange(<0>,1,3)"), dfa("or(<0>,or(<00>,<000>))"))
    assert not equivalent(dfa("star(<a>)"), dfa("repatleast(<a>,1)"))


def test_notcc_is_single_symbol_complement():
    d = dfa("notcc(<num>)")
    assert d.accepts("A") and d.accepts("-")
    assert not d.accepts("0") and not d.accepts("") and not d.accepts("AA")


def test_foreign_symbols_rejected():
    assert not dfa("star(<any>)").accepts("z")


def test_state_limit():
    with pytest.raises(fa.StateLimitError):
        compile_regex(parse_dsl("concat(star(<any>),concat(<a>,rep(<any>,12)))"), R, max_states=500)


def test_compile_rejects_holes_and_bad_constants():
    with pytest.raises(ValueError):
        compile_regex(hole())
    with pytest.raises(ValueError):
        compile_regex(parse_dsl("<z>"), R)


def test_alphabet_validation():
    with pytest.raises(ValueError):
        Alphabet("aa")
    with pytest.raises(ValueError):
        Alphabet("")
    assert DEFAULT_ALPHABET.classes["spec"] == "-,;.+:!@#_$%&*=^"
    assert len(DEFAULT_ALPHABET) == 26 * 2 + 10 + 16


def test_mismatched_alphabets():
    with pytest.raises(ValueError):
        equivalent(dfa("<a>"), dfa("<a>", DEFAULT_ALPHABET))


def test_dot_output():
    text = fa.to_dot(dfa("rep(<a>,2)"))
    assert text.startswith("digraph") and "doublecircle" in text
