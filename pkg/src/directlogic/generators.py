"""Term generators shared by the test suite and the acceptance runner.

Exhaustive enumeration for the small Boolean corpus, seeded random
generation for everything else.  All randomness goes through a caller
supplied ``random.Random`` so corpora are reproducible.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .syntax import (
    Abstracted, And, Apply, Atom, Choice, Converges, ConvergesTo, Equal, Iff,
    IfThenElse, Implies, Inference, Irreducible, Lam, Member, Neg, Num, Or,
    Pred, PropLam, Reduces, Reified, ReifiedExpr, Seq, SeqCons, SetComp,
    SetLit, Statement, Subset, UniqueReduct, VarDecl,
)

BOOL_BINARY = (And, Or, Implies)


@lru_cache(maxsize=None)
def _boolean_of_size(atoms, size, binary):
    if size == 1:
        return tuple(Pred(a) for a in atoms)
    out = [Neg(p) for p in _boolean_of_size(atoms, size - 1, binary)]
    for left in range(1, size - 1):
        right = size - 1 - left
        for op in binary:
            for l in _boolean_of_size(atoms, left, binary):
                for r in _boolean_of_size(atoms, right, binary):
                    out.append(op(l, r))
    return tuple(out)


def enumerate_boolean(atoms=("P", "Q"), max_size=5, binary=BOOL_BINARY):
    """Every Boolean formula over ``atoms`` with at most ``max_size`` nodes."""
    atoms = tuple(atoms)
    binary = tuple(binary)
    out = []
    for n in range(1, max_size + 1):
        out.extend(_boolean_of_size(atoms, n, binary))
    return out


def prop_size(p) -> int:
    if isinstance(p, Pred):
        return 1
    if isinstance(p, Neg):
        return 1 + prop_size(p.p)
    if isinstance(p, Inference):
        return 1 + sum(prop_size(x) for x in p.antecedents + p.consequents)
    return 1 + prop_size(p.left) + prop_size(p.right)


def boolean_corpus(atoms=("P", "Q"), max_size=5, theory="Bot"):
    """The exhaustive sequent corpus for the decide/oracle cross-check.

    Two shapes: ``⊢ Φ`` for every formula of at most ``max_size`` nodes,
    and ``Ψ ⊢ Φ`` for every pair of such formulas.
    """
    formulas = enumerate_boolean(atoms, max_size)
    seqs = [Inference(theory, (), (f,)) for f in formulas]
    seqs += [Inference(theory, (h,), (g,)) for h in formulas for g in formulas]
    return seqs


# ---------------------------------------------------------------------------
# Random terms

_PRED_NAMES = ("P", "Q", "R", "Human", "Mortal", "Fly")
_CONSTS = ("a", "b", "Socrates", "Yossarian")
_THEORIES = ("Bot", "T", "Catch22")


class TermGen:
    """Seeded random propositions, expressions and statements."""

    def __init__(self, rng: random.Random, max_depth=4):
        self.rng = rng
        self.max_depth = max_depth
        self._fresh = 0

    def ident(self):
        self._fresh += 1
        return f"v{self._fresh}"

    def expr(self, depth=None, scope=()):
        r = self.rng
        depth = self.max_depth if depth is None else depth
        if depth <= 0 or r.random() < 0.3:
            k = r.randrange(3 if scope else 2)
            if k == 0:
                return Num(r.randrange(0, 20))
            if k == 1:
                return Atom(r.choice(_CONSTS))
            return Atom(r.choice(scope), "identifier")
        d = depth - 1
        k = r.randrange(11)
        if k == 0:
            return Apply(self.expr(d, scope),
                         tuple(self.expr(d, scope) for _ in range(r.randrange(1, 3))))
        if k == 1:
            params = tuple(self.ident() for _ in range(r.randrange(1, 3)))
            return Lam(params, self.expr(d, scope + params))
        if k == 2:
            return Choice(self.expr(d, scope), self.expr(d, scope))
        if k == 3:
            return IfThenElse(self.expr(d, scope), self.expr(d, scope), self.expr(d, scope))
        if k == 4:
            return Seq(tuple(self.expr(d, scope) for _ in range(r.randrange(0, 3))))
        if k == 5:
            return SeqCons(self.expr(d, scope), Seq(()))
        if k == 6:
            v = self.ident()
            return SetComp(v, self.expr(d, scope), self.prop(d, scope + (v,)))
        if k == 7:
            return SetLit(tuple(self.expr(d, scope) for _ in range(r.randrange(0, 3))))
        if k == 8:
            return Reified(self.prop(d, scope), r.choice(_THEORIES))
        if k == 9:
            params = (self.ident(),)
            return PropLam(params, self.prop(d, scope + params))
        return Apply(Atom(r.choice(("+", "*"))), (self.expr(d, scope), self.expr(d, scope)))

    def prop(self, depth=None, scope=()):
        r = self.rng
        depth = self.max_depth if depth is None else depth
        if depth <= 0 or r.random() < 0.25:
            if r.random() < 0.5:
                return Pred(r.choice(_PRED_NAMES))
            return Pred(r.choice(_PRED_NAMES), (self.expr(0, scope),))
        d = depth - 1
        k = r.randrange(16)
        if k == 0:
            return Neg(self.prop(d, scope))
        if k in (1, 2, 3, 4):
            op = (And, Or, Implies, Iff)[k - 1]
            return op(self.prop(d, scope), self.prop(d, scope))
        if k == 5:
            ante = tuple(self.prop(d, scope) for _ in range(r.randrange(0, 3)))
            cons = tuple(self.prop(d, scope) for _ in range(r.randrange(1, 3)))
            return Inference(r.choice(_THEORIES), ante, cons)
        if k == 6:
            return Pred(r.choice(_PRED_NAMES),
                        tuple(self.expr(d, scope) for _ in range(r.randrange(1, 3))))
        if k == 7:
            return Equal(self.expr(d, scope), self.expr(d, scope))
        if k == 8:
            return Member(self.expr(d, scope), self.expr(d, scope))
        if k == 9:
            return Subset(self.expr(d, scope), self.expr(d, scope))
        if k == 10:
            return Reduces(self.expr(d, scope), self.expr(d, scope))
        if k == 11:
            return Converges(self.expr(d, scope))
        if k == 12:
            return ConvergesTo(self.expr(d, scope), self.expr(d, scope))
        if k == 13:
            return Irreducible(self.expr(d, scope))
        if k == 14:
            return UniqueReduct(self.expr(d, scope))
        return Abstracted(ReifiedExpr(self.expr(d, scope), "T"), r.choice(_THEORIES))

    def statement(self, depth=None):
        r = self.rng
        names = [f"x{i}" for i in range(r.randrange(0, 3))]
        sorts = [r.choice((None, "Humans", "Animal")) for _ in names]
        decls = tuple(VarDecl(n, s) for n, s in zip(names, sorts))
        scope_vars = tuple(names)
        body = self.prop(depth, ())
        if names:
            # mention every declared variable so the statement is well formed
            args = tuple(Atom(n, "variable") for n in scope_vars)
            body = And(body, Pred(r.choice(_PRED_NAMES), args))
        return Statement(decls, body)


def random_props(n, seed=0, max_depth=4):
    gen = TermGen(random.Random(seed), max_depth)
    return [gen.prop() for _ in range(n)]


def random_statements(n, seed=0, max_depth=4):
    gen = TermGen(random.Random(seed), max_depth)
    return [gen.statement() for _ in range(n)]


def random_exprs(n, seed=0, max_depth=4):
    gen = TermGen(random.Random(seed), max_depth)
    return [gen.expr() for _ in range(n)]


# ---------------------------------------------------------------------------
# Closed programs for the nondeterministic λ evaluator

class ProgramGen:
    """Seeded closed λ programs: numerals, choice, arithmetic, conditionals,
    β-redexes and finite sets.  A small share call ``IntegerGenerator`` or
    embed a self-application so that divergent paths also show up."""

    def __init__(self, rng: random.Random, max_depth=4, wild=0.05):
        self.rng = rng
        self.max_depth = max_depth
        self.wild = wild
        self._fresh = 0

    def _var(self):
        self._fresh += 1
        return f"x{self._fresh}"

    def program(self):
        return self.expr(self.max_depth, ())

    def expr(self, depth, scope):
        r = self.rng
        if depth <= 0 or r.random() < 0.2:
            if scope and r.random() < 0.5:
                return Atom(r.choice(scope), "identifier")
            return Num(r.randrange(0, 6))
        if r.random() < self.wild:
            return self._wild()
        d = depth - 1
        k = r.randrange(7)
        if k == 0:
            return Choice(self.expr(d, scope), self.expr(d, scope))
        if k == 1:
            return Apply(Atom(r.choice(("+", "-", "*"))), (self.expr(d, scope), self.expr(d, scope)))
        if k == 2:
            test = Apply(Atom(r.choice(("Eq", "Less"))), (self.expr(d, scope), self.expr(d, scope)))
            return IfThenElse(test, self.expr(d, scope), self.expr(d, scope))
        if k == 3:
            v = self._var()
            return Apply(Lam((v,), self.expr(d, scope + (v,))), (self.expr(d, scope),))
        if k == 4:
            return SetLit(tuple(self.expr(d, scope) for _ in range(r.randrange(0, 3))))
        if k == 5:
            s = SetLit(tuple(self.expr(d, scope) for _ in range(r.randrange(1, 3))))
            return Apply(Atom(r.choice(("Count", "Choice"))), (s,))
        a = SetLit(tuple(self.expr(d, scope) for _ in range(r.randrange(0, 3))))
        b = SetLit(tuple(self.expr(d, scope) for _ in range(r.randrange(0, 3))))
        return Apply(Atom(r.choice(("Union", "Intersect"))), (a, b))

    def _wild(self):
        if self.rng.random() < 0.5:
            return Apply(Atom("IntegerGenerator"), ())
        w = Lam(("w",), Apply(Atom("w", "identifier"), (Atom("w", "identifier"),)))
        return Choice(Num(self.rng.randrange(0, 6)), Apply(w, (w,)))


def random_programs(n, seed=0, max_depth=4, wild=0.05):
    gen = ProgramGen(random.Random(seed), max_depth, wild)
    return [gen.program() for _ in range(n)]
