"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; ``conftest.py`` prints the
lines at the end of the session.  Running this file directly prints them
too:  ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from directlogic import actors, lam                                   # noqa: E402
from directlogic.chaining import load_theory, query_goal, run_to_quiescence  # noqa: E402
from directlogic.decide import decides, oracle_search                  # noqa: E402
from directlogic.generators import boolean_corpus, random_programs, random_props  # noqa: E402
from directlogic.kernel import (                                        # noqa: E402
    ClosureBounds, catch22_probability_chain, check_script, kernel_closure,
    load_script, prob_contrapositive_bound,
)
from directlogic.meta import (                                          # noqa: E402
    NAMES, abstract, build_diagonal, export_lemma, reify, roundtrip, with_lemma,
)
from directlogic.parser import parse_expr, parse_prop                  # noqa: E402
from directlogic.syntax import (                                        # noqa: E402
    And, Iff, Implies, Inference, Neg, Num, Or, Pred, element, print_prop,
    struct_equiv, walk,
)
from golden import CERTIFICATE_ENDINGS, DECIDABILITY_ROWS, EDGE_CASES, FIX_FUNCTIONS  # noqa: E402

import directlogic                                                      # noqa: E402

DATA = Path(directlogic.__file__).parent / "data"
RESULTS = {}


def record(n, title, ok, detail):
    RESULTS[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})"
    return ok


# 1 -------------------------------------------------------------------------

def check_table():
    t0 = time.perf_counter()
    rows = [(decides(parse_prop(l)), decides(parse_prop(r))) for l, r in DECIDABILITY_ROWS]
    notes = [decides(parse_prop(s)) == want for s, want in EDGE_CASES]
    dt = time.perf_counter() - t0
    ok = all(not l and r for l, r in rows) and all(notes) and dt < 1.0
    good = sum(1 for l, r in rows if not l and r)
    return record(1, "decidability table", ok,
                  f"{good}/7 rows, {sum(notes)}/{len(notes)} edge cases, {dt:.3f}s")


# 2 -------------------------------------------------------------------------

def check_oracle():
    t0 = time.perf_counter()
    corpus = boolean_corpus(max_size=5)
    disagree = over = 0
    for s in corpus:
        r = oracle_search(s)
        if r.budget_exceeded:
            over += 1
        elif r.proved != decides(s):
            disagree += 1
    dt = time.perf_counter() - t0
    ok = disagree == 0 and over == 0 and dt < 600
    return record(2, "decide agrees with the search oracle", ok,
                  f"{len(corpus)} sequents, {disagree} disagreements, "
                  f"{over} over budget, {dt:.0f}s")


# 3 -------------------------------------------------------------------------

def _pred_names(nodes):
    return {n.name for x in nodes for n in walk(x) if isinstance(n, Pred)}


def check_catch22():
    script = load_script(DATA / "catch22.dlp")
    r = check_script(script)
    numbered = all(r.step(str(i)).verified for i in range(1, 12))
    fly = r.step("6").verified and r.step("6").conclusion == "|-{Catch22} Fly[Yossarian]"
    nofly = r.step("11").verified and r.step("11").conclusion == "|-{Catch22} ~Fly[Yossarian]"
    tf = load_theory(DATA / "catch22.dlt")
    run_to_quiescence(tf.store)
    both = (parse_prop("Fly[Yossarian]", "Catch22") in tf.store
            and parse_prop("~Fly[Yossarian]", "Catch22") in tf.store)
    vocab = _pred_names(st.body for _, st in script.axioms)
    outside = _pred_names(tf.store.assertions) - vocab
    unrelated = ["Happy[Yossarian]", "~Sane[Yossarian]", "~Able[Yossarian, Fly]"]
    contained = not outside and not any(query_goal(tf.store, g).succeeded for g in unrelated)
    bound = prob_contrapositive_bound(1, 0) == 0
    chain = catch22_probability_chain()
    probs = chain["3'"][1] == 1 and chain["6''"][1] == 0
    ok = numbered and fly and nofly and both and contained and bound and probs
    return record(3, "Catch-22", ok,
                  f"steps 1-11 {numbered}, 6/11 {fly}/{nofly}, chaining holds both {both}, "
                  f"no explosion {contained}, bound(1,0)=0 {bound}, 3'=1 and 6''=0 {probs}")


# 4 -------------------------------------------------------------------------

def check_incompleteness():
    results = {}
    for script, construction in (("incompleteness", "uninferable"),
                                 ("inconsistency", "uninferable"),
                                 ("arginfers", "arginfers")):
        lemma = export_lemma(build_diagonal(construction))
        rep = check_script(with_lemma(load_script(DATA / f"{script}.dlp"), lemma))
        results[script] = rep
    inc, con = results["incompleteness"], results["inconsistency"]
    shapes = (inc.step("1.4").conclusion == "|-{T} ~(|-{T} Uninferable)"
              and inc.step("2.5").conclusion == "~(|-{T} ~Uninferable)"
              and con.step("1.3").conclusion == "|-{T} Uninferable"
              and con.step("2.4").conclusion == "|-{T} ~Uninferable")
    ok = all(r.verified for r in results.values()) and shapes
    return record(4, "incompleteness scripts with the exported lemma", ok,
                  f"conclusions {shapes}, " + ", ".join(f"{k} {'verified' if r.verified else 'FAILED'}"
                            for k, r in results.items()))


# 5 -------------------------------------------------------------------------

def check_certificates():
    bad = []
    for name in NAMES:
        c = build_diagonal(name)
        if not c.verified:
            bad.append(name)
        if name in CERTIFICATE_ENDINGS and print_prop(c.derived_equivalence) != CERTIFICATE_ENDINGS[name]:
            bad.append(name + " ending")
    fs = [build_diagonal("liar").diagonalizer] + [parse_expr(f) for f in FIX_FUNCTIONS]
    for i, f in enumerate(fs):
        lines = lam.fix_replay(f)
        if len(lines) != 5 or not all(l.ok for l in lines) or not lam.reaches_fixed_point(f):
            bad.append(f"fix replay {i}")
    return record(5, "fixed-point replay and certificates", not bad,
                  f"{len(NAMES)} certificates, {len(fs)} fix replays, failures: {bad or 'none'}")


# 6 -------------------------------------------------------------------------

def check_lambda():
    omega = lam.classify(parse_expr("0 ?| (fun(w) w(w))(fun(w) w(w))"))
    om_ok = omega.kind == lam.DIVERGENT and omega.values == frozenset({Num(0)})
    gen = lam.classify(parse_expr("IntegerGenerator()"), max_nodes=5000, max_depth=25)
    gen_ok = gen.kind == lam.DIVERGENT and {Num(i) for i in range(11)} <= gen.values
    progs = random_programs(600, seed=0, max_depth=3)
    always = 0
    finite = True
    for p in progs:
        v = lam.classify(p, max_nodes=2000, max_depth=25)
        if v.kind == lam.ALWAYS:
            always += 1
            finite = finite and not v.limits_hit and len(v.values) < 2000
    ok = om_ok and gen_ok and finite and len(progs) >= 500
    return record(6, "nondeterministic λ", ok,
                  f"Ω-choice {om_ok}, IntegerGenerator {gen_ok}, "
                  f"{always}/{len(progs)} always-converging all finite {finite}")


# 7 -------------------------------------------------------------------------

def check_actors():
    t0 = time.perf_counter()
    seeds = range(1000)
    small = actors.sweep(seeds, actors.Fair, 200)
    large = actors.sweep(seeds, actors.Fair, 400)
    grows = (set(small.values) <= set(large.values) and large.distinct > small.distinct
             and large.max_value > small.max_value)
    fair_ok = small.cutoffs == 0 and large.cutoffs == 0 and small.distinct >= 20
    unfair = actors.sweep(range(100), actors.Unfair, 200)
    unfair_ok = unfair.cutoffs > 0
    csp = actors.sweep(range(100), actors.Fair, 300, program="csp")
    csp_ok = csp.cutoffs == 0
    dt = time.perf_counter() - t0
    ok = fair_ok and grows and unfair_ok and csp_ok and dt < 60
    return record(7, "actor unbounded nondeterminism", ok,
                  f"{small.distinct} distinct at 200, {large.distinct} at 400, "
                  f"grows {grows}, unfair cutoffs {unfair.cutoffs}/100, "
                  f"CSP fair cutoffs {csp.cutoffs}, {dt:.0f}s")


# 8 -------------------------------------------------------------------------

def _laws(p, q):
    rp, rq = reify(p), reify(q)
    ok = reify(Neg(p)) == element("not", rp) and struct_equiv(abstract(element("not", rp)), Neg(p))
    for cls, tag in ((And, "and"), (Or, "or"), (Implies, "implies"), (Iff, "iff")):
        ok = ok and reify(cls(p, q)) == element(tag, rp, rq) \
            and struct_equiv(abstract(element(tag, rp, rq)), cls(p, q))
    inf = element("infer", element("ante", rp), element("cons", rq), theory="T")
    return ok and reify(Inference("T", (p,), (q,))) == inf \
        and struct_equiv(abstract(inf), Inference("T", (p,), (q,)))


def check_reification_and_closures():
    props = random_props(10_000, seed=1)
    rt = sum(1 for p in props if struct_equiv(roundtrip(p), p))
    laws = sum(1 for p, q in zip(props[::2], props[1::2]) if _laws(p, q))
    P, notP, Q = parse_prop("|- P"), parse_prop("|- ~P"), parse_prop("Q")
    bounds = ClosureBounds(2, 2, 4, 2)
    boom = kernel_closure([P, notP], depth=6, bounds=bounds, extra=[Q])
    no_igor = parse_prop("|- Q") not in boom
    disj = kernel_closure([P], depth=6, bounds=bounds, extra=[parse_prop("P \\/ Q")])
    no_intro = parse_prop("|- P \\/ Q") not in disj and P in disj
    ok = rt == len(props) and laws == len(props) // 2 and no_igor and no_intro
    return record(8, "reification and non-explosion closures", ok,
                  f"roundtrip {rt}/{len(props)}, laws {laws}/{len(props) // 2}, "
                  f"no |-Q from |-P,|-~P {no_igor} ({len(boom)} items), "
                  f"no |-P\\/Q from |-P {no_intro} ({len(disj)} items)")


CHECKS = [check_table, check_oracle, check_catch22, check_incompleteness,
          check_certificates, check_lambda, check_actors, check_reification_and_closures]


@pytest.mark.parametrize("check", CHECKS, ids=lambda f: f.__name__[len("check_"):])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    for n, c in enumerate(CHECKS, 1):
        c()
        print(RESULTS[n], flush=True)
    sys.exit(0 if all("[PASS]" in line for line in RESULTS.values()) else 1)
