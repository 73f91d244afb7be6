import json
import random
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from regexfoundry.dsl import parse_dsl
from regexfoundry.figures import (AuditError, Block, FigureSpec, Glyph, Label, audit, describe, expected_kinds,
                                  figure_spec, read_label, render_svg)
from regexfoundry.grammar import Template, UndefinedShapeError
from regexfoundry.sampler import GrammarConfig, sample_regex

NS = "{http://www.w3.org/2000/svg}"


def svg_parts(text):
    root = ET.fromstring(text)
    assert root.tag == NS + "svg"
    out = {}
    for el in root:
        key = (el.tag[len(NS):], el.get("class", "").split()[0])
        out.setdefault(key, []).append(el)
    return out


@settings(max_examples=60)
@given(st.sampled_from(list(Template)), st.integers(0, 10**6))
def test_audit_recovers_the_kind_multiset(template, seed):
    ast = sample_regex(template, GrammarConfig(), random.Random(seed))
    spec = figure_spec(ast, random.Random(seed))
    assert audit(spec) == expected_kinds(ast, template)


def test_start_and_end_become_glyphs():
    spec = figure_spec(parse_dsl("and(startwith(<C0>),endwith(rep(<num>,4)))"))
    (block,) = spec.blocks
    assert block.glyphs == (Glyph("head", "C0"), Glyph("tail", "4 digits"))
    assert not spec.labels and not spec.links


def test_identical_components_share_one_label():
    spec = figure_spec(parse_dsl("concat(reprange(<num>,1,2),concat(<.>,reprange(<num>,1,2)))"))
    assert len(spec.blocks) == 3 and len(spec.labels) == 2
    assert spec.links[0][1] == spec.links[2][1]


def test_separation_figure():
    spec = figure_spec(parse_dsl("concat(rep(<num>,2),star(concat(<->,rep(<num>,2))))"))
    assert spec.delimiter == "-" and spec.repeated
    assert len(spec.groups) == 2
    assert audit(spec)["delimiter-repeated"] == 1


def test_svg_element_counts():
    ast = parse_dsl("concat(rep(<num>,2),concat(<,>,concat(rep(<num>,2),concat(<,>,rep(<let>,3)))))")
    spec = figure_spec(ast, positives=["12,34,abc"], negatives=["1,2,abc"])
    parts = svg_parts(render_svg(spec))
    assert len(parts[("rect", "block")]) == len(spec.blocks) == 3
    assert len(parts[("polyline", "link")]) == len(spec.links) == 3
    assert len(parts[("text", "label")]) == len(spec.labels) == 2
    assert len(parts[("circle", "delimiter")]) == 2
    assert [t.text for t in parts[("text", "example")]] == ["+ 12,34,abc", "− 1,2,abc"]


@settings(max_examples=30)
@given(st.sampled_from(list(Template)), st.integers(0, 10**6))
def test_svg_is_well_formed_and_complete(template, seed):
    ast = sample_regex(template, GrammarConfig(), random.Random(seed))
    spec = figure_spec(ast, random.Random(seed))
    parts = svg_parts(render_svg(spec))
    assert len(parts[("rect", "block")]) == len(spec.blocks)
    assert len(parts.get(("polyline", "link"), [])) == len(spec.links)
    label_texts = [t.text for t in parts.get(("text", "label"), [])]
    assert label_texts == [lab.text for lab in spec.labels]
    n_glyphs = sum(len(b.glyphs) for b in spec.blocks)
    assert len(parts.get(("rect", "glyph"), [])) == n_glyphs


def test_round_trip_through_json():
    spec = figure_spec(parse_dsl("and(not(contain(<x>)),reprange(<any>,2,5))"), positives=["ab"])
    back = FigureSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert back == spec


def test_spec_validation():
    block = Block(0, 0, "constraints")
    with pytest.raises(ValueError):
        Label(0, "  ")
    with pytest.raises(ValueError):
        FigureSpec(Template.INTERSECTION, (), (), ())
    with pytest.raises(ValueError):
        FigureSpec(Template.INTERSECTION, (block,), (Label(0, "has x"),), ())      # unlinked label
    with pytest.raises(ValueError):
        FigureSpec(Template.INTERSECTION, (block,), (), ((0, 5),))
    with pytest.raises(ValueError):
        FigureSpec(Template.SEPARATION, (block,), (), ())                          # no delimiter
    with pytest.raises(ValueError):
        Glyph("middle", "x")
    with pytest.raises(ValueError):
        Block(0, 0, "decoration")


def test_read_label():
    assert read_label('has no "x"', "constraints") == "not-contain"
    assert read_label('maybe: just "."', "component") == "optional-literal"
    with pytest.raises(AuditError):
        read_label("purple", "constraints")


def test_off_template_regex_has_no_figure():
    with pytest.raises(UndefinedShapeError):
        figure_spec(parse_dsl("star(<a>)"))


def test_describe():
    assert describe(parse_dsl("<num>")) == "digit"
    assert describe(parse_dsl("rep(<num>,4)")) == "4 digits"


def test_svg_matches_golden_file():
    golden = Path(__file__).parent / "golden" / "phone.svg"
    ast = parse_dsl("concat(rep(<num>,3),concat(<->,concat(rep(<num>,3),concat(<->,rep(<num>,4)))))")
    spec = figure_spec(ast, random.Random(0), ["555-123-4567"], ["55-123-4567"])
    assert render_svg(spec) + "\n" == golden.read_text(encoding="utf-8")
    assert render_svg(spec) == render_svg(spec)


def test_single_terminal_figure():
    spec = figure_spec(parse_dsl("<num>"))
    assert len(spec.blocks) == 1 and len(spec.labels) == 1 and spec.links == ((0, 0),)
