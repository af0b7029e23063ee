import dataclasses

import pytest

from directlogic import lam
from directlogic.generators import random_props
from directlogic.kernel import check_script, load_script
from directlogic.meta import (
    NAMES, MetaError, abstract, build_diagonal, export_lemma,
    fixed_point_normal_form, is_canonical, reify, roundtrip, with_lemma,
)
from directlogic.parser import parse_prop
from directlogic.syntax import (
    And, Iff, Implies, Inference, Neg, Or, Pred, Reified, element,
    sentence_to_xml, struct_equiv, xml_to_sentence,
)

PROPS = random_props(300, seed=7)
PAIRS = list(zip(PROPS[::2], PROPS[1::2]))


def test_roundtrip_identity_on_random_props():
    for p in random_props(2000, seed=3):
        assert struct_equiv(roundtrip(p, "T"), p)
        assert is_canonical(reify(p, "T"), "T")


@pytest.mark.parametrize("cls,tag", [(And, "and"), (Or, "or"), (Implies, "implies"), (Iff, "iff")])
def test_reify_is_homomorphic_on_binary_connectives(cls, tag):
    for p, q in PAIRS:
        assert reify(cls(p, q)) == element(tag, reify(p), reify(q))
        assert struct_equiv(abstract(element(tag, reify(p), reify(q))), cls(p, q))


def test_reify_is_homomorphic_on_negation_and_inference():
    for p, q in PAIRS:
        assert reify(Neg(p)) == element("not", reify(p))
        inf = Inference("T", (p,), (q,))
        expect = element("infer", element("ante", reify(p)), element("cons", reify(q)), theory="T")
        assert reify(inf) == expect
        assert struct_equiv(abstract(expect), inf)


def test_xml_text_round_trip():
    for p in PROPS[:100]:
        s = reify(p)
        assert xml_to_sentence(sentence_to_xml(s)) == s


def test_abstract_rejects_unknown_tags():
    with pytest.raises(MetaError):
        abstract(element("frobnicate"))
    with pytest.raises(MetaError):
        abstract(element("not"))


def test_noncanonical_sentence_is_detected():
    padded = xml_to_sentence("<not> <pred name=\"P\"/> </not>")
    assert struct_equiv(abstract(padded), Neg(Pred("P")))
    assert not is_canonical(padded)


@pytest.mark.parametrize("name", NAMES)
def test_every_certificate_verifies(name):
    c = build_diagonal(name)
    assert c.verified
    assert c.certificate[0].justification == "definition"
    assert "VERIFIED" in c.to_text()


@pytest.mark.parametrize("name", [n for n in NAMES if n != "kleenerosser"])
def test_fix_replay_lines_all_check(name):
    c = build_diagonal(name)
    assert [l.ok for l in c.fix_lines] == [True] * 5
    assert lam.reaches_fixed_point(c.diagonalizer)


def test_fixed_sentence_is_reified_normal_form():
    c = build_diagonal("liar")
    nf = fixed_point_normal_form(c)
    assert isinstance(nf, Reified)
    assert reify(nf.prop, nf.theory) == c.fixed_sentence


def test_equivalence_shapes():
    assert struct_equiv(build_diagonal("uninferable").derived_equivalence,
                        parse_prop("Uninferable <=> ~(|-{T} Uninferable)"))
    assert struct_equiv(build_diagonal("curry").derived_equivalence,
                        parse_prop("Curry <=> (Curry |-{T} P)"))
    c = build_diagonal("curry", target=Pred("Q"))
    assert struct_equiv(c.derived_equivalence, parse_prop("Curry <=> (Curry |-{T} Q)"))


def test_unknown_construction():
    with pytest.raises(MetaError):
        build_diagonal("barber")


def test_export_lemma_requires_assumed_admissibility():
    lemma = export_lemma(build_diagonal("uninferable"))
    assert lemma.label == "Fix" and lemma.justification == "external"
    assert "assumed" in lemma.note
    for name in ("liar", "curry", "russell"):
        with pytest.raises(MetaError):
            export_lemma(build_diagonal(name))


def test_export_lemma_rejects_tampered_certificate():
    c = build_diagonal("uninferable")
    bad = dataclasses.replace(c.certificate[2], ok=False)
    tampered = dataclasses.replace(c, certificate=[*c.certificate[:2], bad, *c.certificate[3:]])
    assert not tampered.verified
    with pytest.raises(MetaError):
        export_lemma(tampered)


def test_exported_lemma_drives_incompleteness_script(data_dir):
    script = load_script(data_dir / "incompleteness.dlp")
    report = check_script(with_lemma(script, export_lemma(build_diagonal("uninferable"))))
    assert report.verified
