"""Decision procedure for inference in Boolean Direct Logic.

The pipeline follows the textbook shape: hypotheses and goals go to CNF,
consequents are split, disjunctive hypothesis clauses become literal
inferences, disjunctive goal clauses become one subproblem per disjunct, and
every remaining subproblem is split on each atom.  The leaf rule is closure
of the literal hypotheses under the literal inferences followed by a
membership test for the goal.  Nothing ever explodes from ``P, ¬P``.

``oracle_search`` is an independent bounded backward search over the
kernel's rule catalog, used to cross-check ``decide``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .syntax import (
    And, Iff, Implies, Inference, Neg, Or, Pred, Prop, print_prop,
)

BOT = "Bot"


class DecideError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Literal:
    atom: str
    positive: bool = True

    def negate(self):
        return Literal(self.atom, not self.positive)

    def __str__(self):
        return self.atom if self.positive else f"~{self.atom}"


@dataclass(frozen=True)
class LiteralInference:
    antecedents: frozenset
    consequent: Literal

    def __post_init__(self):
        if not self.antecedents:
            raise ValueError("literal inference needs an antecedent")

    def __str__(self):
        ante = ", ".join(str(a) for a in sorted(self.antecedents))
        return f"{ante} |- {self.consequent}"


@dataclass(frozen=True)
class FlatSequent:
    hyps_literals: frozenset
    hyps_rules: frozenset
    goal: Literal

    def atoms(self):
        out = {self.goal.atom}
        out.update(l.atom for l in self.hyps_literals)
        for r in self.hyps_rules:
            out.update(l.atom for l in r.antecedents)
            out.add(r.consequent.atom)
        return sorted(out)

    def __str__(self):
        parts = [str(l) for l in sorted(self.hyps_literals)]
        parts += [f"({r})" for r in sorted(self.hyps_rules, key=str)]
        return f"{', '.join(parts)} |-{{Bot}} {self.goal}"


# ---------------------------------------------------------------------------
# CNF

def atom_name(p):
    if isinstance(p, Pred):
        return print_prop(p)
    raise DecideError(f"non-Boolean node: {print_prop(p)}")


def _nnf(p, positive=True):
    """Negation normal form as nested ('and'|'or', l, r) / Literal tuples."""
    if isinstance(p, Pred):
        return Literal(atom_name(p), positive)
    if isinstance(p, Neg):
        return _nnf(p.p, not positive)
    if isinstance(p, And):
        op = "and" if positive else "or"
        return (op, _nnf(p.left, positive), _nnf(p.right, positive))
    if isinstance(p, Or):
        op = "or" if positive else "and"
        return (op, _nnf(p.left, positive), _nnf(p.right, positive))
    if isinstance(p, Implies):
        # Ψ ⇒ Φ  is  ¬Ψ ∨ Φ
        return _nnf(Or(Neg(p.left), p.right), positive)
    if isinstance(p, Iff):
        both = And(Implies(p.left, p.right), Implies(p.right, p.left))
        return _nnf(both, positive)
    raise DecideError(f"non-Boolean node: {print_prop(p)}")


def _cnf_of(n):
    if isinstance(n, Literal):
        return {frozenset([n])}
    op, l, r = n
    cl, cr = _cnf_of(l), _cnf_of(r)
    if op == "and":
        return cl | cr
    return {a | b for a in cl for b in cr}


def to_cnf(p: Prop):
    """Clauses as a sorted tuple of sorted literal tuples.

    Duplicate literals inside a clause and duplicate clauses are removed.
    Tautological clauses are kept.
    """
    clauses = _cnf_of(_nnf(p))
    return tuple(sorted(tuple(sorted(c)) for c in clauses))


def cnf_to_prop(cnf):
    def lit(l):
        a = Pred(l.atom)
        return a if l.positive else Neg(a)

    out = None
    for clause in cnf:
        c = None
        for l in clause:
            c = lit(l) if c is None else Or(c, lit(l))
        out = c if out is None else And(out, c)
    return out


# ---------------------------------------------------------------------------
# Normalization of sequents into flat subproblems

@dataclass
class _Problem:
    literals: set
    rules: set
    goal: Literal
    origin: str = ""


def _clause_rules(clause, context=frozenset()):
    """Hypothesis clause L1 ∨ … ∨ Ln as literal inferences.

    The binary transformation ``(Φ1 ∨ Φ2) ↦ (¬Φ1 ⊢ Φ2), (¬Φ2 ⊢ Φ1)``,
    applied recursively to the right-nested clause, gives one rule per
    disjunct whose antecedents are the negations of the others.
    """
    rules = set()
    for i, li in enumerate(clause):
        ante = frozenset(context | {lj.negate() for j, lj in enumerate(clause) if j != i})
        rules.add(LiteralInference(ante, li))
    return rules


def _literal_set(p):
    """Antecedent of a hypothesis inference, as a set of literals."""
    cnf = to_cnf(p)
    if any(len(c) != 1 for c in cnf):
        raise DecideError(
            f"hypothesis inference with disjunctive antecedent: {print_prop(p)}")
    return {c[0] for c in cnf}


def _add_hypothesis(h, literals, rules, theory):
    if isinstance(h, Inference):
        if h.theory != theory:
            raise DecideError(f"mixed theories: {h.theory} inside {theory}")
        ante = set()
        for a in h.antecedents:
            if isinstance(a, Inference):
                raise DecideError("nested inference inside a hypothesis inference")
            ante |= _literal_set(a)
        for c in h.consequents:
            if isinstance(c, Inference):
                raise DecideError("nested inference inside a hypothesis inference")
            for clause in to_cnf(c):
                if not ante and len(clause) == 1:
                    literals.add(clause[0])
                elif not ante:
                    rules |= _clause_rules(clause)
                else:
                    rules |= _clause_rules(clause, frozenset(ante))
        return
    for clause in to_cnf(h):
        if len(clause) == 1:
            literals.add(clause[0])
        else:
            rules |= _clause_rules(clause)


def normalize_nested(seq: Inference, theory: str = BOT):
    """Flatten a sequent over ⊥ into literal subproblems.

    Returns a list of :class:`FlatSequent`.  The sequent holds iff every
    subproblem holds.
    """
    if not isinstance(seq, Inference):
        raise DecideError("decide expects an inference proposition")
    if seq.theory != theory:
        raise DecideError(f"decide works over {theory}, got {seq.theory}")
    out = []
    _normalize(list(seq.antecedents), list(seq.consequents), theory, out)
    return out


def _normalize(ante, cons, theory, out):
    for goal in cons:
        if isinstance(goal, Inference):
            if goal.theory != theory:
                raise DecideError(f"mixed theories: {goal.theory} inside {theory}")
            # Residuation: Γ ⊢ (Δ ⊢ Θ)  becomes  Γ, Δ ⊢ Θ
            _normalize(ante + list(goal.antecedents), list(goal.consequents), theory, out)
            continue
        literals, rules = set(), set()
        for h in ante:
            _add_hypothesis(h, literals, rules, theory)
        for clause in to_cnf(goal):
            for i, li in enumerate(clause):
                extra = {lj.negate() for j, lj in enumerate(clause) if j != i}
                out.append(FlatSequent(frozenset(literals | extra),
                                       frozenset(rules), li))


# ---------------------------------------------------------------------------
# Leaf rule and the splitting driver

def closure(literals: Iterable[Literal], rules: Iterable[LiteralInference]):
    known = set(literals)
    pending = list(rules)
    changed = True
    while changed:
        changed = False
        rest = []
        for r in pending:
            if r.antecedents <= known:
                if r.consequent not in known:
                    known.add(r.consequent)
                    changed = True
            else:
                rest.append(r)
        pending = rest
    return known


def leaf_decide(f: FlatSequent) -> bool:
    return f.goal in closure(f.hyps_literals, f.hyps_rules)


@dataclass
class TraceNode:
    label: str
    holds: bool
    children: list = field(default_factory=list)

    def render(self, indent=0):
        mark = "holds" if self.holds else "fails"
        lines = [f"{'  ' * indent}{self.label}  [{mark}]"]
        for c in self.children:
            lines.extend(c.render(indent + 1))
        return lines

    def to_dict(self):
        return {"label": self.label, "holds": self.holds,
                "children": [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["label"], d["holds"], [cls.from_dict(c) for c in d["children"]])


def decide_flat(f: FlatSequent, want_trace=False):
    atoms = f.atoms()
    ok = True
    kids = []
    for values in itertools.product((True, False), repeat=len(atoms)):
        branch = {Literal(a, v) for a, v in zip(atoms, values)}
        leaf = FlatSequent(f.hyps_literals | branch, f.hyps_rules, f.goal)
        res = leaf_decide(leaf)
        ok = ok and res
        if want_trace:
            label = "split " + " ".join(str(l) for l in sorted(branch))
            kids.append(TraceNode(label, res))
        elif not ok:
            break
    return ok, TraceNode(str(f), ok, kids) if want_trace else None


def decide(seq: Inference, trace=False):
    """Return ``(holds, trace)``; trace is ``None`` unless requested."""
    problems = normalize_nested(seq)
    holds = True
    kids = []
    for f in problems:
        res, node = decide_flat(f, trace)
        holds = holds and res
        if trace:
            kids.append(node)
        elif not holds:
            break
    root = TraceNode(print_prop(seq), holds, kids) if trace else None
    return holds, root


def decides(seq) -> bool:
    return decide(seq)[0]


# ---------------------------------------------------------------------------
# Independent oracle: bounded backward search over kernel rules

@dataclass
class OracleResult:
    proved: bool
    budget_exceeded: bool
    nodes: int
    depth: int

    def __bool__(self):
        return self.proved


class _Budget(Exception):
    pass


def _comp(p):
    return p.p if isinstance(p, Neg) else Neg(p)


def _atoms_of(p, out):
    if isinstance(p, Pred):
        out.add(p)
    elif isinstance(p, Neg):
        _atoms_of(p.p, out)
    elif isinstance(p, (And, Or, Implies, Iff)):
        _atoms_of(p.left, out)
        _atoms_of(p.right, out)
    elif isinstance(p, Inference):
        for x in p.antecedents + p.consequents:
            _atoms_of(x, out)
    else:
        raise DecideError(f"non-Boolean node: {print_prop(p)}")


def _hyp_consequences(h, gamma):
    """One round of forward kernel rules on hypothesis ``h``.

    Each yielded proposition is licensed by a named rule:
    ConjJuxtaposition, DoubleNegation, BooleanEquiv (De Morgan,
    implication as disjunction, biconditional, distributivity of ∨ over ∧,
    commutativity and associativity of ∨), DisjunctiveSyllogism and
    Detachment.
    """
    if isinstance(h, And):
        yield h.left
        yield h.right
    elif isinstance(h, Implies):
        yield Or(Neg(h.left), h.right)
    elif isinstance(h, Iff):
        yield Implies(h.left, h.right)
        yield Implies(h.right, h.left)
    elif isinstance(h, Neg):
        q = h.p
        if isinstance(q, Neg):
            yield q.p
        elif isinstance(q, Or):
            yield Neg(q.left)
            yield Neg(q.right)
        elif isinstance(q, And):
            yield Or(Neg(q.left), Neg(q.right))
        elif isinstance(q, Implies):
            yield q.left
            yield Neg(q.right)
        elif isinstance(q, Iff):
            yield Or(And(q.left, Neg(q.right)), And(q.right, Neg(q.left)))
    elif isinstance(h, Or):
        a, b = h.left, h.right
        if _is_clause(h):
            if _comp(a) in gamma:
                yield b
            if _comp(b) in gamma:
                yield a
        yield Or(b, a)
        if isinstance(a, Or):
            yield Or(a.left, Or(a.right, b))
        if isinstance(a, And):
            yield Or(a.left, b)
            yield Or(a.right, b)
        if isinstance(b, And):
            yield Or(a, b.left)
            yield Or(a, b.right)
        # push connectives inside a disjunct
        for side, other, mk in ((a, b, lambda x: Or(x, b)), (b, a, lambda x: Or(a, x))):
            if isinstance(side, Neg) and isinstance(side.p, Neg):
                yield mk(side.p.p)
            elif isinstance(side, Neg) and isinstance(side.p, And):
                yield mk(Or(Neg(side.p.left), Neg(side.p.right)))
            elif isinstance(side, Neg) and isinstance(side.p, Or):
                yield mk(And(Neg(side.p.left), Neg(side.p.right)))
            elif isinstance(side, Neg) and isinstance(side.p, Implies):
                yield mk(And(side.p.left, Neg(side.p.right)))
            elif isinstance(side, Implies):
                yield mk(Or(Neg(side.left), side.right))
            elif isinstance(side, Iff):
                yield mk(And(Implies(side.left, side.right),
                             Implies(side.right, side.left)))
            elif isinstance(side, Neg) and isinstance(side.p, Iff):
                q = side.p
                yield mk(Or(And(q.left, Neg(q.right)), And(q.right, Neg(q.left))))
    elif isinstance(h, Inference):
        ante = []
        for a in h.antecedents:
            ante.extend(_flatten_conj(a))
        if all(a in gamma for a in ante):
            yield from h.consequents


def _is_literal(p):
    return isinstance(p, Pred) or (isinstance(p, Neg) and isinstance(p.p, Pred))


def _is_clause(p):
    if isinstance(p, Or):
        return _is_clause(p.left) and _is_clause(p.right)
    return _is_literal(p)


def _push_negation(p):
    """One Boolean rewrite towards a literal, or None if ``p`` is one."""
    if isinstance(p, Implies):
        return Or(Neg(p.left), p.right)
    if isinstance(p, Iff):
        return And(Implies(p.left, p.right), Implies(p.right, p.left))
    if isinstance(p, Neg):
        q = p.p
        if isinstance(q, Neg):
            return q.p
        if isinstance(q, And):
            return Or(Neg(q.left), Neg(q.right))
        if isinstance(q, Or):
            return And(Neg(q.left), Neg(q.right))
        if isinstance(q, Implies):
            return And(q.left, Neg(q.right))
        if isinstance(q, Iff):
            return Or(And(q.left, Neg(q.right)), And(q.right, Neg(q.left)))
    return None


def _flatten_conj(p):
    if isinstance(p, And):
        return _flatten_conj(p.left) + _flatten_conj(p.right)
    if isinstance(p, Neg) and isinstance(p.p, Neg):
        return _flatten_conj(p.p.p)
    return [p]


def _size(p):
    if isinstance(p, Pred):
        return 1
    if isinstance(p, Neg):
        return 1 + _size(p.p)
    if isinstance(p, Inference):
        return 1 + sum(_size(x) for x in p.antecedents + p.consequents)
    return 1 + _size(p.left) + _size(p.right)


def _saturate(gamma, limit):
    gamma = set(gamma)
    while True:
        new = set()
        for h in list(gamma):
            for c in _hyp_consequences(h, gamma):
                if c not in gamma and _size(c) <= limit:
                    new.add(c)
        if not new:
            return frozenset(gamma)
        gamma |= new


class _Oracle:
    def __init__(self, atoms, limit, max_nodes):
        self.atoms = sorted(atoms, key=print_prop)
        self.limit = limit
        self.max_nodes = max_nodes
        self.nodes = 0
        self.memo = {}
        self.hit_budget = False

    def prove(self, gamma, goal, depth):
        key = (gamma, goal)
        best = self.memo.get(key)
        if best is not None:
            proved_at, failed_at = best
            if proved_at is not None and proved_at <= depth:
                return True
            if failed_at is not None and failed_at >= depth:
                return False
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise _Budget()
        res = self._prove(gamma, goal, depth)
        proved_at, failed_at = self.memo.get(key, (None, None))
        if res:
            proved_at = depth if proved_at is None else min(proved_at, depth)
        else:
            failed_at = depth if failed_at is None else max(failed_at, depth)
        self.memo[key] = (proved_at, failed_at)
        return res

    def _prove(self, gamma, goal, depth):
        gamma = _saturate(gamma, self.limit)
        if goal in gamma:                       # Reiteration + Monotonicity
            return True
        if depth <= 0:
            self.hit_budget = True
            return False
        d = depth - 1
        g = goal
        # goal-directed moves
        if isinstance(g, Inference):            # Residuation (+ consequent split)
            return all(self.prove(gamma | set(g.antecedents), c, d) for c in g.consequents)
        if isinstance(g, And):                  # ConjJuxtaposition + ArgumentCombination
            return self.prove(gamma, g.left, d) and self.prove(gamma, g.right, d)
        if isinstance(g, Neg) and isinstance(g.p, Neg):   # DoubleNegation
            return self.prove(gamma, g.p.p, d)
        if isinstance(g, Implies):              # BooleanEquiv: implication as disjunction
            return self.prove(gamma, Or(Neg(g.left), g.right), d)
        if isinstance(g, Iff):
            return (self.prove(gamma, Implies(g.left, g.right), d)
                    and self.prove(gamma, Implies(g.right, g.left), d))
        if isinstance(g, Neg) and isinstance(g.p, Or):    # De Morgan
            return self.prove(gamma, And(Neg(g.p.left), Neg(g.p.right)), d)
        if isinstance(g, Neg) and isinstance(g.p, And):
            return self.prove(gamma, Or(Neg(g.p.left), Neg(g.p.right)), d)
        if isinstance(g, Neg) and isinstance(g.p, Implies):
            return self.prove(gamma, And(g.p.left, Neg(g.p.right)), d)
        if isinstance(g, Neg) and isinstance(g.p, Iff):
            q = g.p
            return self.prove(gamma, Or(And(q.left, Neg(q.right)),
                                        And(q.right, Neg(q.left))), d)
        if isinstance(g, Or):
            a, b = g.left, g.right
            if b == _comp(a) or a == _comp(b):  # SplittingByNegation
                return True
            # rewrite the goal towards a clause before splitting it
            for side, mk in ((a, lambda x: Or(x, b)), (b, lambda x: Or(a, x))):
                if isinstance(side, And):       # distributivity of ∨ over ∧
                    return (self.prove(gamma, mk(side.left), d)
                            and self.prove(gamma, mk(side.right), d))
                pushed = _push_negation(side)
                if pushed is not None:
                    return self.prove(gamma, mk(pushed), d)
            # two-way deduction for disjunction, on a clause only
            if self.prove(gamma | {_comp(a)}, b, d) and self.prove(gamma | {_comp(b)}, a, d):
                return True
        # Splitting by negation on an undecided atom, then Splitting
        for atom in self.atoms:
            if atom in gamma or Neg(atom) in gamma:
                continue
            if self.prove(gamma | {atom}, goal, d) and self.prove(gamma | {Neg(atom)}, goal, d):
                return True
        return False


def oracle_search(seq: Inference, depth: int = 12, max_nodes: int = 200_000) -> OracleResult:
    """Bounded backward proof search in the kernel's rule catalog.

    ``depth`` bounds the number of goal-directed steps on every branch;
    forward saturation of the hypotheses (conjunction splitting, double
    negation, Boolean rewrites, disjunctive syllogism, detachment) is
    restricted to propositions no larger than the input.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if not isinstance(seq, Inference) or seq.theory != BOT:
        raise DecideError("oracle_search works on inferences over Bot")
    atoms = set()
    _atoms_of(seq, atoms)
    limit = 2 * max([_size(x) for x in seq.antecedents + seq.consequents] + [1]) + 2
    orc = _Oracle(atoms, limit, max_nodes)
    try:
        ok = all(orc.prove(frozenset(seq.antecedents), c, depth) for c in seq.consequents)
    except _Budget:
        return OracleResult(False, True, orc.nodes, depth)
    return OracleResult(ok, (not ok) and orc.hit_budget, orc.nodes, depth)
