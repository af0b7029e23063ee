import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from directlogic.cli import decision_record, parse_decision
from directlogic.decide import (
    Literal, LiteralInference, closure, cnf_to_prop, decide, decides, oracle_search, to_cnf,
)
from directlogic.generators import boolean_corpus, enumerate_boolean
from directlogic.parser import parse_prop
from directlogic.syntax import And, Inference, Neg, Or

from golden import DECIDABILITY_ROWS, EDGE_CASES

FORMULAS = enumerate_boolean(max_size=4)
formula = st.sampled_from(FORMULAS)


@pytest.mark.parametrize("left,right", DECIDABILITY_ROWS)
def test_table_row(left, right):
    assert decides(parse_prop(left)) is False
    assert decides(parse_prop(right)) is True


@pytest.mark.parametrize("text,expected", EDGE_CASES)
def test_edge_cases(text, expected):
    assert decides(parse_prop(text)) is expected


def test_no_explosion():
    assert not decides(parse_prop("P, ~P |- Q"))
    assert decides(parse_prop("P, ~P |- P"))


def test_closure_is_a_fixed_point():
    lits = {Literal("P", True)}
    rules = {LiteralInference(frozenset({Literal("P", True)}), Literal("Q", False))}
    out = closure(lits, rules)
    assert out == {Literal("P", True), Literal("Q", False)}
    assert closure(out, rules) == out


def test_cnf_shape():
    cnf = to_cnf(parse_prop("~(P /\\ Q) \\/ (Q => P)"))
    assert cnf == tuple(sorted(cnf))
    assert all(c == tuple(sorted(set(c))) for c in cnf)


@settings(max_examples=200, deadline=None)
@given(formula)
def test_cnf_is_interderivable_with_its_source(p):
    c = cnf_to_prop(to_cnf(p))
    assert decides(seq([p], [c])) and decides(seq([c], [p]))


def test_trace_round_trip_through_the_structured_record():
    seq = parse_prop(DECIDABILITY_ROWS[3][1])
    holds, trace = decide(seq, trace=True)
    rec = parse_decision(json.dumps(decision_record(seq, holds, trace)))
    assert rec["holds"] is holds
    assert rec["trace"] == trace
    assert "\n".join(rec["trace"].render()) == "\n".join(trace.render())


def test_trace_marks_the_failing_branch():
    holds, trace = decide(parse_prop("P |- P \\/ Q"), trace=True)
    assert not holds
    labels = [n.label for f in trace.children for n in f.children if not n.holds]
    assert labels


def test_bad_record_is_rejected():
    with pytest.raises(ValueError):
        parse_decision("[1, 2]")


def test_oracle_agrees_on_the_small_corpus():
    for s in boolean_corpus(max_size=3):
        r = oracle_search(s)
        assert not r.budget_exceeded
        assert r.proved == decides(s), s


def test_oracle_agrees_on_a_sample_of_the_full_corpus():
    corpus = boolean_corpus(max_size=5)
    for s in random.Random(4).sample(corpus, 1500):
        r = oracle_search(s)
        assert not r.budget_exceeded
        assert r.proved == decides(s), s


def seq(ante, cons):
    return Inference("Bot", tuple(ante), tuple(cons))


@settings(max_examples=200, deadline=None)
@given(formula)
def test_reiteration(p):
    assert decides(seq([p], [p]))


@settings(max_examples=200, deadline=None)
@given(formula, formula)
def test_conjunction_elimination_and_introduction(p, q):
    assert decides(seq([And(p, q)], [p]))
    assert decides(seq([p, q], [And(p, q)]))


@settings(max_examples=200, deadline=None)
@given(formula, formula, formula)
def test_antecedent_order_and_weakening(p, q, r):
    a = decides(seq([p, q], [r]))
    assert a == decides(seq([q, p], [r]))
    if a:
        assert decides(seq([p, q, Neg(r)], [r]))


@settings(max_examples=200, deadline=None)
@given(formula, formula)
def test_disjunctive_syllogism(p, q):
    assert decides(seq([Or(p, q), Neg(p)], [q]))
