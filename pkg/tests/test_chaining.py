import json

import pytest

from directlogic.chaining import (
    ChainError, TheoryStore, load_theory, parse_theory, query_goal,
    run_to_quiescence,
)
from directlogic.parser import parse_prop
from directlogic.syntax import print_prop


def catch22(data_dir):
    tf = load_theory(data_dir / "catch22.dlt")
    return tf, run_to_quiescence(tf.store)


def facts(store):
    return {print_prop(p) for p in store.assertions}


def test_catch22_holds_both_fly_and_not_fly(data_dir):
    tf, report = catch22(data_dir)
    got = facts(tf.store)
    assert {"Fly[Yossarian]", "~Fly[Yossarian]", "Crazy[Yossarian]",
            "~Obligated[Yossarian, Fly]"} <= got
    assert report.quiescent
    assert [b[1] for b in tf.bridges] == ["6"]


def test_catch22_does_not_explode(data_dir):
    tf, _ = catch22(data_dir)
    # every fact mentions a predicate of the theory; nothing else appears
    preds = {"Able", "Sane", "Obligated", "Fly", "Crazy"}
    for p in tf.store.assertions:
        text = print_prop(p)
        assert any(n in text for n in preds), text
    assert parse_prop("Happy[Yossarian]", "Catch22") not in tf.store
    assert not query_goal(tf.store, "Happy[Yossarian]").succeeded
    assert not query_goal(tf.store, "~Sane[Yossarian]").succeeded


def test_backward_query_binds_variables(data_dir):
    tf, _ = catch22(data_dir)
    res = query_goal(tf.store, "p: Sane[p]")
    assert [b["p"].name for b in res.bindings] == ["Yossarian"]


def test_sorted_patterns(data_dir):
    tf = load_theory(data_dir / "socrates.dlt")
    report = run_to_quiescence(tf.store)
    assert {"Mortal[Socrates]", "Mortal[Plato]"} <= facts(tf.store)
    assert len(report.events) == 2
    xs = sorted(b["x"].name for b in query_goal(tf.store, "x: Mortal[x]").bindings)
    assert xs == ["Plato", "Socrates"]
    assert not query_goal(tf.store, "Immortal[Socrates]").succeeded


def test_sort_restriction_excludes_unsorted_constants():
    tf = parse_theory("theory t\nsort Rex : Dog\naxiom Human[Rex]\naxiom Human[Bob]\n"
                      "forward Human[Dog::x] ==> Barks[x]\n")
    run_to_quiescence(tf.store)
    assert "Barks[Rex]" in facts(tf.store)
    assert "Barks[Bob]" not in facts(tf.store)


CHAIN = "theory t\naxiom A[a]\n" + "".join(
    f"forward x: L{i}[x] ==> L{i + 1}[x]\n" for i in range(30)) + "forward x: A[x] ==> L0[x]\n"


@pytest.mark.parametrize("seed", [None, 1, 2, 3])
def test_schedulers_reach_the_same_fixpoint(seed):
    ref = parse_theory(CHAIN).store
    run_to_quiescence(ref)
    other = parse_theory(CHAIN).store
    run_to_quiescence(other, seed=seed)
    assert facts(other) == facts(ref)
    assert "L30[a]" in facts(ref)


def test_thread_pool_matches_serial():
    ref = parse_theory(CHAIN).store
    run_to_quiescence(ref)
    par = parse_theory(CHAIN).store
    run_to_quiescence(par, workers=4)
    assert facts(par) == facts(ref)


def test_budget_exhaustion_is_reported():
    store = parse_theory(CHAIN).store
    report = run_to_quiescence(store, max_firings=5)
    assert report.budget_exhausted and not report.quiescent
    assert "budget exhausted" in report.to_text()


def test_assert_fires_eagerly():
    store = TheoryStore("t")
    store.add_rule("forward", [parse_prop("P[a]", "t")],
                   [parse_prop("Q[a]", "t")])
    fired = store.assert_prop(parse_prop("P[a]", "t"))
    assert len(fired) == 1
    assert parse_prop("Q[a]", "t") in store
    assert store.assert_prop(parse_prop("P[a]", "t")) == set()


def test_errors():
    store = TheoryStore("t")
    with pytest.raises(ChainError):
        store.add_rule("sideways", [])
    with pytest.raises(ChainError):
        run_to_quiescence(store, max_firings=0)
    with pytest.raises(ChainError):
        query_goal(store, "P[a]", budget=0)
    with pytest.raises(ChainError):
        parse_theory("theory t\nforward P[a] Q[a]\n")


def test_report_json_round_trip(data_dir):
    _, report = catch22(data_dir)
    d = report.to_dict()
    assert json.loads(json.dumps(d, sort_keys=True)) == d
    assert d["budget_exhausted"] is False
