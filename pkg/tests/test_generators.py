from directlogic.generators import (
    boolean_corpus, enumerate_boolean, prop_size, random_exprs, random_programs,
    random_props, random_statements,
)
from directlogic.syntax import print_expr, print_prop


def counts(max_size, atoms=2, binaries=3):
    # formulas with exactly n nodes: a negation of n-1, or a binary split
    a = {1: atoms}
    for n in range(2, max_size + 1):
        a[n] = a[n - 1] + binaries * sum(a[i] * a[n - 1 - i] for i in range(1, n - 1))
    return a


def test_enumeration_size_matches_the_recurrence():
    a = counts(5)
    formulas = enumerate_boolean(max_size=5)
    assert len(formulas) == sum(a.values()) == 274
    for n, k in a.items():
        assert sum(1 for f in formulas if prop_size(f) == n) == k


def test_enumeration_has_no_duplicates():
    formulas = enumerate_boolean(max_size=5)
    assert len({print_prop(f) for f in formulas}) == len(formulas)


def test_corpus_shapes():
    n = len(enumerate_boolean(max_size=5))
    corpus = boolean_corpus(max_size=5)
    assert len(corpus) == n + n * n == 75350
    assert all(len(s.antecedents) <= 1 and len(s.consequents) == 1 for s in corpus)


def test_generators_are_seeded():
    assert [print_prop(p) for p in random_props(50, seed=5)] == \
        [print_prop(p) for p in random_props(50, seed=5)]
    assert [print_expr(e) for e in random_exprs(50, seed=5)] == \
        [print_expr(e) for e in random_exprs(50, seed=5)]
    assert [print_expr(e) for e in random_programs(50, seed=5)] == \
        [print_expr(e) for e in random_programs(50, seed=5)]
    assert len(random_statements(20, seed=1)) == 20


def test_seeds_differ():
    assert [print_prop(p) for p in random_props(20, seed=1)] != \
        [print_prop(p) for p in random_props(20, seed=2)]
