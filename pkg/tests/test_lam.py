import pytest

from directlogic import lam
from directlogic.generators import random_programs
from directlogic.parser import parse_expr
from directlogic.syntax import Lam, Num, SetLit, print_expr

from lam_oracle import Stuck, from_term, values

OMEGA = "(fun(w) w(w))(fun(w) w(w))"


def kinds(text, **kw):
    return lam.classify(parse_expr(text), **kw)


def nums(v):
    return {x.n for x in v.values if isinstance(x, Num)}


def test_omega_choice_has_a_divergent_path():
    v = kinds(f"0 ?| {OMEGA}")
    assert v.kind == lam.DIVERGENT
    assert nums(v) == {0}
    assert v.witness is not None


def test_plain_omega():
    v = kinds(OMEGA)
    assert v.kind == lam.DIVERGENT and v.values == frozenset()


def test_integer_generator_reaches_every_small_number():
    v = kinds("IntegerGenerator()", max_nodes=5000, max_depth=25)
    assert v.kind == lam.DIVERGENT
    assert set(range(11)) <= nums(v)


def test_choice_under_a_binder_is_resolved_per_use():
    assert nums(kinds("(fun(x) x + x)(1 ?| 2)")) == {2, 3, 4}


def test_deterministic_arithmetic_has_one_value():
    assert lam.unique_reduct(parse_expr("if Less(1, 2) then 3 * 4 else 0"))
    assert lam.eval_sets(parse_expr("Count(Union({1, 2}, {2, 3}))")) == Num(3)


def test_sets_are_canonical():
    out = lam.eval_sets(parse_expr("{3, 1, 3}"))
    assert out == SetLit((Num(1), Num(3)))
    assert lam.is_value(out)


def test_stuck_terms_are_not_values():
    with pytest.raises(lam.LamError):
        lam.eval_sets(parse_expr("Choice({})"))


def test_unknown_under_a_tight_budget():
    v = kinds("IntegerGenerator() + IntegerGenerator()", max_nodes=30, max_depth=3)
    assert v.kind in (lam.UNKNOWN, lam.DIVERGENT)
    assert v.limits_hit


def test_budgets_are_validated():
    with pytest.raises(lam.LamError):
        lam.explore(parse_expr("1"), max_nodes=0)


def test_dot_output_lists_every_node():
    g = lam.explore(parse_expr("(1 ?| 2) + 3"))
    dot = g.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("->") == sum(len(s) for s in g.edges.values())


def test_fix_replay_and_fixed_point():
    f = parse_expr("fun(r) fun(n) if Eq(n, 0) then 1 else n * r(n - 1)")
    assert all(l.ok for l in lam.fix_replay(f))
    assert lam.reaches_fixed_point(f)


def test_eta_contraction():
    e = parse_expr("fun(x) g(x)")
    assert print_expr(lam.eta_contract(e)) == "g"
    assert lam.eta_step(parse_expr("fun(x) x(x)")) is None


PROGRAMS = random_programs(300, seed=11, max_depth=3)


def test_engine_matches_the_reference_evaluator():
    compared = 0
    for p in PROGRAMS:
        try:
            expect = values(p)
        except (Stuck, RecursionError):
            continue
        v = lam.classify(p, max_nodes=2000, max_depth=25)
        # the engine also reduces inside unused arguments, so a discarded
        # Ω can still add a divergent path; the value set is unaffected
        assert v.kind != lam.UNKNOWN, print_expr(p)
        assert {from_term(x) for x in v.values} == expect, print_expr(p)
        compared += 1
    assert compared >= 150


def test_always_converging_programs_have_finite_value_sets():
    for p in PROGRAMS:
        v = lam.classify(p, max_nodes=2000, max_depth=25)
        if v.kind == lam.ALWAYS:
            assert not v.limits_hit
            assert len(v.values) < 2000


def test_lambda_is_a_value():
    assert lam.is_value(Lam(("x",), Num(1)))
