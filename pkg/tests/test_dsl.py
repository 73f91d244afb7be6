import pytest
from hypothesis import given

from conftest import small_asts
from regexfoundry.dsl import (DSLSyntaxError, Node, anonymize, ast_metrics, cls, dsl_tokens, get_at, has_holes,
                              hole, iter_paths, lit, op, parse_dsl, print_dsl, replace_at, to_standard_regex)


def test_parse_print_simple():
    node = parse_dsl("concat(<let>,rep(<num>,3))")
    assert node == op("concat", cls("let"), op("rep", cls("num"), 3))
    assert print_dsl(node) == "concat(<let>,rep(<num>,3))"


def test_whitespace_and_aliases():
    a = parse_dsl(" repeat ( <num> , 2 ) ")
    assert a == op("rep", cls("num"), 2)
    assert parse_dsl("repeatatleast(<a>,1)").kind == "repatleast"
    assert parse_dsl("repeatrange(<a>,1,3)").params == (1, 3)


def test_nary_binary_is_right_nested():
    node = parse_dsl("concat(<a>,<b>,<c>)")
    assert print_dsl(node) == "concat(<a>,concat(<b>,<c>))"


def test_literals():
    assert parse_dsl("<x>") == Node("char", value="x")
    assert parse_dsl("<C0>") == Node("string", value="C0")
    assert parse_dsl("<->").value == "-"


@pytest.mark.parametrize("text", [
    "", "concat(<a>)", "rep(<a>)", "rep(<a>,-1)", "reprange(<a>,3,2)", "reprange(<a>,2,2)",
    "foo(<a>)", "concat(<a>,<b>", "<bogusclass", "not(<a>,<b>)", "<a> <b>", "rep(<a>,x)",
])
def test_malformed_inputs(text):
    with pytest.raises(DSLSyntaxError):
        parse_dsl(text)


def test_syntax_error_reports_position():
    with pytest.raises(DSLSyntaxError) as info:
        parse_dsl("concat(<a>,bogus(<b>))")
    assert info.value.position == 11


def test_node_validation():
    with pytest.raises(ValueError):
        Node("concat", (cls("num"),))
    with pytest.raises(ValueError):
        Node("class", value="digits")
    with pytest.raises(ValueError):
        Node("string", value="x")


@given(small_asts())
def test_print_parse_round_trip(node):
    assert parse_dsl(print_dsl(node)) == node


@given(small_asts())
def test_metrics_agree_with_paths(node):
    m = ast_metrics(node)
    paths = [p for p, _ in iter_paths(node)]
    assert m["size"] == len(paths)
    assert m["depth"] == 1 + max(len(p) for p in paths)


@given(small_asts())
def test_replace_at_get_at(node):
    for path, sub in iter_paths(node):
        assert get_at(node, path) == sub
        assert replace_at(node, path, sub) == node


def test_metrics_examples():
    assert ast_metrics(parse_dsl("rep(<num>,4)")) == {"size": 2, "depth": 2}
    assert ast_metrics(parse_dsl("<num>")) == {"size": 1, "depth": 1}
    fig_a = parse_dsl("and(startwith(<C0>),endwith(rep(<num>,4)))")
    assert ast_metrics(fig_a) == {"size": 6, "depth": 4}


def test_anonymize():
    node = parse_dsl("concat(<C0>,rep(<num>,4))")
    assert print_dsl(anonymize(node)) == "concat(const,rep(<num>,int))"


def test_holes():
    node = op("and", hole(), parse_dsl("rep(<num>,?)"))
    assert has_holes(node)
    assert print_dsl(node) == "and(?,rep(<num>,?))"
    assert parse_dsl("and(?,rep(<num>,?))") == node
    assert not has_holes(parse_dsl("rep(<num>,3)"))


def test_tokens_are_pre_order():
    assert dsl_tokens(parse_dsl("not(<a>)")) == ["not", "(", "<a>", ")"]


# standard-notation rendering, one case per operator and terminal row of the mapping table
TABLE = [
    ("startwith(<r>)", "r.*"),
    ("endwith(<r>)", ".*r"),
    ("contain(<r>)", ".*r.*"),
    ("not(<r>)", "~r"),
    ("optional(<r>)", "r?"),
    ("star(<r>)", "r*"),
    ("concat(<x>,<y>)", "xy"),
    ("and(<x>,<y>)", "x&y"),
    ("or(<x>,<y>)", "x|y"),
    ("rep(<r>,3)", "r{3}"),
    ("repatleast(<r>,3)", "r{3,}"),
    ("reprange(<r>,2,5)", "r{2,5}"),
    ("<let>", "[A-Za-z]"),
    ("<cap>", "[A-Z]"),
    ("<low>", "[a-z]"),
    ("<num>", "[0-9]"),
    ("<any>", "."),
    ("<spec>", "[-,;.+:!@#_$%&*=^]"),
    ("<null>", "∅"),
]


@pytest.mark.parametrize("dsl,expected", TABLE)
def test_standard_regex_rows(dsl, expected):
    assert to_standard_regex(parse_dsl(dsl)) == expected


def test_standard_regex_nesting_and_escapes():
    assert to_standard_regex(parse_dsl("concat(reprange(<num>,1,2),concat(<.>,reprange(<num>,1,2)))")) \
        == r"[0-9]{1,2}\.[0-9]{1,2}"
    assert to_standard_regex(parse_dsl("star(concat(<a>,<b>))")) == "(ab)*"
    assert to_standard_regex(parse_dsl("concat(or(<a>,<b>),<c>)")) == "(a|b)c"
    assert to_standard_regex(parse_dsl("notcc(<num>)")) == "[^0-9]"


def test_standard_regex_rejects_holes():
    with pytest.raises(ValueError):
        to_standard_regex(hole())
