import pytest
from hypothesis import given, settings, strategies as st

from directlogic.generators import random_exprs, random_props, random_statements
from directlogic.parser import ParseError, parse_expr, parse_prop, parse_statement, tokenize
from directlogic.syntax import (
    Implies, Inference, Neg, Pred, canonical, free_names, print_expr,
    print_prop, print_statement, sentence_to_xml, statement_equiv,
    struct_equiv, substitute, xml_to_sentence, element, Token,
)


@pytest.mark.parametrize("seed", range(3))
def test_print_parse_round_trip_props(seed):
    for p in random_props(700, seed=seed):
        assert struct_equiv(parse_prop(print_prop(p)), p), print_prop(p)


def test_print_parse_round_trip_statements():
    for s in random_statements(500, seed=9):
        assert statement_equiv(parse_statement(print_statement(s)), s)


def test_print_parse_round_trip_exprs():
    for e in random_exprs(500, seed=9):
        assert struct_equiv(parse_expr(print_expr(e)), e)


def test_implication_is_right_associative():
    p = parse_prop("P => Q => R")
    assert isinstance(p, Implies) and isinstance(p.right, Implies)


def test_negation_binds_tighter_than_conjunction():
    p = parse_prop("~P /\\ Q")
    assert isinstance(p.left, Neg)


def test_turnstile_theories():
    assert parse_prop("|- P").theory == "Bot"
    assert parse_prop("|- P", "T").theory == "T"
    assert parse_prop("|-{Catch22} P").theory == "Catch22"


def test_nested_inference_as_bare_consequent():
    p = parse_prop("P |- |- Q")
    assert isinstance(p.consequents[0], Inference)
    assert struct_equiv(p, parse_prop("P |- (|- Q)"))


def test_statement_variables_and_sorts():
    s = parse_statement("p, Animal::q: Sane[p], Human[q] |- Fly[p]")
    assert [v.name for v in s.vars] == ["p", "q"]
    assert s.vars[1].sort == "Animal"


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_prop("P /\\ ")
    assert (info.value.line, info.value.col) == (1, 6)
    assert "expression" in info.value.expected


def test_comments_are_skipped():
    assert [t.text for t in tokenize("P # trailing words") if t.kind != "EOF"] == ["P"]


def test_alpha_equivalence():
    assert struct_equiv(parse_expr("fun(x) x(y)"), parse_expr("fun(z) z(y)"))
    assert not struct_equiv(parse_expr("fun(x) x(y)"), parse_expr("fun(y) y(y)"))
    assert canonical(parse_expr("{y in S | P[y]}")) == canonical(parse_expr("{z in S | P[z]}"))


def test_substitution_avoids_capture():
    out = substitute(parse_expr("fun(x) y(x)"), {"y": parse_expr("x")})
    assert "x" in free_names(out)
    assert struct_equiv(out, parse_expr("fun(u) x(u)"))


def test_xml_text_escapes():
    s = element("pred", Token("a<b & c"), name="Odd\"Name")
    assert xml_to_sentence(sentence_to_xml(s)) == s


atoms = st.sampled_from([Pred("P"), Pred("Q"), Pred("R")])
props = st.recursive(
    atoms,
    lambda kids: st.one_of(
        kids.map(Neg),
        st.tuples(kids, kids).map(lambda t: Implies(*t)),
        st.tuples(st.lists(kids, max_size=2), st.lists(kids, min_size=1, max_size=2))
          .map(lambda t: Inference("Bot", tuple(t[0]), tuple(t[1]))),
    ),
    max_leaves=8,
)


@settings(max_examples=300, deadline=None)
@given(props)
def test_round_trip_property(p):
    assert struct_equiv(parse_prop(print_prop(p)), p)
