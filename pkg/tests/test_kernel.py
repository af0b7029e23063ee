import itertools
from fractions import Fraction

import pytest

from directlogic import kernel as K
from directlogic.decide import decides
from directlogic.generators import boolean_corpus
from directlogic.kernel import (
    ClosureBounds, MissingParam, SchemaMismatch, ScriptError, apply_rule,
    catch22_probability_chain, check_script, conjunction_lower_bound,
    kernel_closure, load_script, parse_dlp, prob_contrapositive_bound,
)
from directlogic.parser import parse_prop
from directlogic.syntax import struct_equiv


def P(text, theory="Bot"):
    return parse_prop(text, theory)


def same(a, b):
    return struct_equiv(a, b)


# -- single rules -----------------------------------------------------------

def test_transitivity():
    out = apply_rule("Transitivity", [P("P |- Q"), P("Q |- R")])
    assert same(out, P("P |- R"))


def test_transitivity_rejects_gap():
    with pytest.raises(SchemaMismatch):
        apply_rule("Transitivity", [P("P |- Q"), P("R |- S")])


def test_unknown_rule():
    with pytest.raises(SchemaMismatch):
        apply_rule("ExFalso", [P("|- P")])


def test_monotonicity_needs_its_parameter():
    with pytest.raises(MissingParam):
        apply_rule("Monotonicity", [P("P |- Q")])
    assert same(apply_rule("Monotonicity", [P("P |- Q")], {"add": [P("R")]}), P("P, R |- Q"))


def test_residuation_moves_an_antecedent():
    out = apply_rule("Residuation", [P("P, Q |- R")], {"dir": "out", "k": 1})
    assert same(out, P("Q |- (P |- R)")) or same(out, P("P |- (Q |- R)"))
    back = apply_rule("Residuation", [out], {"dir": "in"})
    assert same(back, P("P, Q |- R"))


def test_self_infers_opposite():
    assert same(apply_rule("SelfInfersOpposite", [P("P |- ~P")]), P("|- ~P"))


def test_soundness_lifts_to_inferences():
    out = apply_rule("Soundness", [P("P |- Q")])
    assert same(out, P("(|- P) |- (|- Q)"))


def test_two_way_forward_on_implication():
    out = apply_rule("TwoWayDeductionFwd", [P("|- P => Q")], {"part": "1"})
    assert same(out, P("P |- Q"))


def test_two_way_backward_on_a_compound_antecedent_disagrees_with_decide():
    # Both premises hold and the rule fires, yet the conclusion is one of the
    # decidability-table implications that does not hold without explosion.
    a = P("(Q => P) |-{Bot} (Q => (Q => P))")
    b = P("~(Q => (Q => P)) |-{Bot} ~(Q => P)")
    assert decides(a) and decides(b)
    out = apply_rule("TwoWayDeductionBwd", [a, b])
    assert same(out, P("|- (Q => P) => (Q => (Q => P))"))
    assert not decides(out)


# -- rules against the decision procedure ----------------------------------

VALID = [s for s in boolean_corpus(max_size=3) if decides(s)]


def test_unary_rules_preserve_validity():
    bad = []
    for h in VALID:
        universe = K.closure_universe([h], ("P", "Q"))
        for rn, params in K._unary_candidates(h, universe):
            for c in K._try(rn, [h], params):
                if not decides(c):
                    bad.append((rn, h, c))
    assert bad == []


def test_binary_rules_preserve_validity_on_small_sequents():
    # formulas of at most three nodes are too small to reach the
    # TwoWayDeductionBwd counterexample above
    bad = []
    for a, b in itertools.product(VALID, repeat=2):
        for rn in ("Transitivity", "ArgumentCombination", "TwoWayDeductionBwd"):
            for c in K._try(rn, [a, b], {}):
                if not decides(c):
                    bad.append((rn, a, b, c))
    assert bad == []


# -- scripts ----------------------------------------------------------------

@pytest.mark.parametrize("name", ["catch22", "incompleteness", "inconsistency", "arginfers", "twoway"])
def test_shipped_scripts_verify(data_dir, name):
    assert check_script(load_script(data_dir / f"{name}.dlp")).verified


def test_catch22_derives_both_fly_and_not_fly(data_dir):
    r = check_script(load_script(data_dir / "catch22.dlp"))
    assert r.step("6").conclusion == "|-{Catch22} Fly[Yossarian]"
    assert r.step("11").conclusion == "|-{Catch22} ~Fly[Yossarian]"
    assert r.external == []


def test_incompleteness_conclusions(data_dir):
    r = check_script(load_script(data_dir / "incompleteness.dlp"))
    assert r.step("1.4").conclusion == "|-{T} ~(|-{T} Uninferable)"
    assert r.step("2.5").conclusion == "~(|-{T} ~Uninferable)"
    assert r.external == ["Fix"]
    assert any("assumed" in a for a in r.assumptions)


def test_tampered_conclusion_fails(data_dir):
    text = (data_dir / "catch22.dlp").read_text()
    bad = text.replace("11: Transitivity(11.3, 9y) ==> |- ~Fly[Yossarian]",
                       "11: Transitivity(11.3, 9y) ==> |- ~Sane[Yossarian]")
    assert bad != text
    r = check_script(parse_dlp(bad, "tampered"))
    assert not r.verified
    assert not r.step("11").verified
    assert r.step("6").verified
    assert "FAILED" in r.to_text()


def test_dangling_premise_is_a_script_error():
    text = "theory T\naxiom a: |- P\n1: Transitivity(a, nowhere) ==> |- P\n"
    with pytest.raises(ScriptError):
        check_script(parse_dlp(text))


def test_report_json_is_deterministic(data_dir):
    script = load_script(data_dir / "catch22.dlp")
    assert check_script(script).to_json() == check_script(script).to_json()


# -- probabilities -----------------------------------------------------------

def test_contrapositive_bound():
    assert prob_contrapositive_bound(1, 0) == 0
    assert prob_contrapositive_bound(Fraction(1, 2), Fraction(1, 4)) == Fraction(1, 2)
    assert prob_contrapositive_bound(Fraction(1, 4), Fraction(1, 2)) == 1
    with pytest.raises(ValueError):
        prob_contrapositive_bound(0, Fraction(1, 2))


def test_conjunction_bound():
    assert conjunction_lower_bound(Fraction(3, 4), Fraction(1, 2)) == Fraction(1, 4)
    assert conjunction_lower_bound(Fraction(1, 4), Fraction(1, 2)) == 0


def test_probability_chain_pins_fly_both_ways():
    steps = catch22_probability_chain()
    assert steps["3'"][1] == 1
    assert steps["6''"][1] == 0
    half = catch22_probability_chain(Fraction(1, 2))
    assert half["3'"][1] == 0 and half["6''"][1] == 1


# -- bounded closure --------------------------------------------------------

def test_small_closure_does_not_explode():
    res = kernel_closure([P("|- P"), P("|- ~P")], depth=3,
                         bounds=ClosureBounds(2, 2, 3, 1), extra=[P("Q")])
    assert P("|- P") in res and P("|- ~P") in res
    assert len(res) > 2
    assert P("|- Q") not in res
