"""Proof kernel: the Direct Logic rule catalog and a step-by-step script checker.

Every step of a script concludes a proposition that holds at the meta
level.  Two families of rules produce such propositions:

* schema rules state an instance of an inference principle outright
  (``Ψ, (Ψ ⊢ Φ) ⊢ Φ`` for Detachment).  Their metavariables come from the
  ``psi``/``phi``/``theta`` params, from positional premises given to
  :func:`apply_rule`, or from matching the stated conclusion;
* meta rules transform held premises (Transitivity, Soundness, the
  self-refutation quartet, ...).

Boolean equivalences double as rewrite rules: given one premise they
replace a subterm at ``at=`` (a dotted child path) by its equivalent.

Rule functions take ``(premises, params, target)`` and return the
conclusion.  ``target`` is the stated conclusion when checking a script;
rules with a choice to make (which permutation, which position, ...) use
it to resolve the choice when params are silent.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .parser import ParseError, parse_expr, parse_prop, parse_prop_list, parse_statement
from .syntax import (
    And, Atom, Iff, Implies, Inference, InstantiationError, Neg, Or, Pred, Prop,
    Statement, VarDecl, canonical, children, free_names, instantiate,
    map_children, print_prop, print_statement, struct_equiv, walk,
)


class KernelError(ValueError):
    pass


class SchemaMismatch(KernelError):
    def __init__(self, rule, why, premise=None):
        self.rule = rule
        self.why = why
        self.premise = premise
        where = f" (premise {premise})" if premise is not None else ""
        super().__init__(f"{rule}{where}: {why}")


class MissingParam(KernelError):
    def __init__(self, rule, name):
        self.rule = rule
        self.name = name
        super().__init__(f"{rule}: missing parameter {name!r}")


class ScriptError(KernelError):
    """Structural problems: duplicate or dangling labels, forward references."""


# ---------------------------------------------------------------------------
# helpers

def _show(x):
    if isinstance(x, Statement):
        return print_statement(x)
    return print_prop(x)


def _key(p):
    return canonical(p)


def _same_set(xs, ys):
    return {_key(x) for x in xs} == {_key(y) for y in ys}


def _body(rule, held, idx=None):
    """The proposition behind a held item; open statements are rejected."""
    if isinstance(held, Statement):
        if held.vars:
            raise SchemaMismatch(rule, "open statement; eliminate its variables first", idx)
        return held.body
    return held


def _inference(rule, held, idx=None, theory=None):
    p = _body(rule, held, idx)
    if not isinstance(p, Inference):
        raise SchemaMismatch(rule, f"expected an inference, got {_show(p)}", idx)
    if theory is not None and p.theory != theory:
        raise SchemaMismatch(rule, f"theory {p.theory} differs from {theory}", idx)
    return p


def _holds_of(rule, p, idx=None):
    """``⊢T X`` with a single consequent: return ``(T, X)``."""
    inf = _inference(rule, p, idx)
    if inf.antecedents or len(inf.consequents) != 1:
        raise SchemaMismatch(rule, f"expected ⊢T X, got {_show(inf)}", idx)
    return inf.theory, inf.consequents[0]


def _choose(rule, candidates, target, param_hint):
    """Pick the candidate matching ``target``; without a target it must be unique."""
    uniq = []
    for c in candidates:
        if not any(struct_equiv(c, u) for u in uniq):
            uniq.append(c)
    if not uniq:
        raise SchemaMismatch(rule, "the rule does not apply to these premises")
    if target is not None:
        for c in uniq:
            if struct_equiv(c, target):
                return c
        shown = "; ".join(_show(c) for c in uniq[:4])
        more = " ..." if len(uniq) > 4 else ""
        raise SchemaMismatch(rule, f"stated {_show(target)} but the rule yields {shown}{more}")
    if len(uniq) == 1:
        return uniq[0]
    raise MissingParam(rule, param_hint)


def _param_prop(params, name, theory):
    v = params.get(name)
    if v is None or isinstance(v, (Prop, Statement)):
        return v
    try:
        return parse_prop(str(v), theory)
    except ParseError as e:
        raise KernelError(f"parameter {name}: {e}") from None


def _param_indices(rule, params, name):
    v = params.get(name)
    if v is None:
        return None
    if isinstance(v, (list, tuple)):
        return [int(i) for i in v]
    try:
        return [int(i) for i in str(v).replace(" ", "").split(",") if i]
    except ValueError:
        raise SchemaMismatch(rule, f"{name} must be a list of 1-based positions") from None


def _theory_of(params, premises, default):
    t = params.get("T") or params.get("theory")
    if t:
        return str(t)
    for p in premises:
        q = p.body if isinstance(p, Statement) else p
        if isinstance(q, Inference):
            return q.theory
    return default


# ---------------------------------------------------------------------------
# schema matching

def _mv(name):
    return Pred("$" + name)


PSI, PHI, THETA = _mv("psi"), _mv("phi"), _mv("theta")
_TH = "$T"


def _match(pat, term, b):
    """One-way match of a schema pattern; metavariables are ``$name`` atoms."""
    if isinstance(pat, Pred) and pat.name.startswith("$") and not pat.args:
        prev = b.get(pat.name)
        if prev is None:
            b[pat.name] = term
            return True
        return struct_equiv(prev, term)
    if type(pat) is not type(term):
        return False
    if isinstance(pat, Inference):
        if pat.theory == _TH:
            prev = b.get(_TH)
            if prev is None:
                b[_TH] = term.theory
            elif prev != term.theory:
                return False
        elif pat.theory != term.theory:
            return False
        if len(pat.antecedents) != len(term.antecedents) or len(pat.consequents) != len(term.consequents):
            return False
        return all(_match(x, y, b) for x, y in zip(pat.antecedents + pat.consequents,
                                                   term.antecedents + term.consequents))
    if isinstance(pat, Pred):
        return pat == term
    pc, tc = children(pat), children(term)
    if len(pc) != len(tc):
        return False
    if not pc:
        return struct_equiv(pat, term)
    return all(_match(x, y, b) for x, y in zip(pc, tc))


def _fill(pat, b):
    if isinstance(pat, Pred) and pat.name.startswith("$") and not pat.args:
        return b[pat.name]
    if isinstance(pat, Inference):
        th = b[_TH] if pat.theory == _TH else pat.theory
        return Inference(th, tuple(_fill(x, b) for x in pat.antecedents),
                         tuple(_fill(x, b) for x in pat.consequents))
    return map_children(pat, lambda c: _fill(c, b))


def _metavars(pat):
    out = []
    for n in walk(pat):
        if isinstance(n, Pred) and n.name.startswith("$") and n.name not in out:
            out.append(n.name)
    return out


def _sch(ante, cons):
    return Inference(_TH, tuple(ante), tuple(cons))


# Boolean equivalences as (lhs, rhs) pairs.  ``fwd`` reads lhs ⊢ rhs.
EQUIVALENCES = {
    "double_negation": (Neg(Neg(PSI)), PSI),
    "idempotence_and": (And(PSI, PSI), PSI),
    "commutativity_and": (And(PSI, PHI), And(PHI, PSI)),
    "associativity_and": (And(PSI, And(PHI, THETA)), And(And(PSI, PHI), THETA)),
    "distributivity_and_or": (And(PSI, Or(PHI, THETA)), Or(And(PSI, PHI), And(PSI, THETA))),
    "de_morgan_and": (Neg(And(PSI, PHI)), Or(Neg(PSI), Neg(PHI))),
    "idempotence_or": (Or(PSI, PSI), PSI),
    "commutativity_or": (Or(PSI, PHI), Or(PHI, PSI)),
    "associativity_or": (Or(PSI, Or(PHI, THETA)), Or(Or(PSI, PHI), THETA)),
    "distributivity_or_and": (Or(PSI, And(PHI, THETA)), And(Or(PSI, PHI), Or(PSI, THETA))),
    "de_morgan_or": (Neg(Or(PSI, PHI)), And(Neg(PSI), Neg(PHI))),
    "implication_as_disjunction": (Implies(PSI, PHI), Or(Neg(PSI), PHI)),
    "contrapositive": (Implies(PSI, PHI), Implies(Neg(PHI), Neg(PSI))),
    "iff_def": (Iff(PSI, PHI), And(Implies(PSI, PHI), Implies(PHI, PSI))),
    "iff_contrapositive": (Iff(PSI, PHI), Iff(Neg(PSI), Neg(PHI))),
    # definitional principles, reachable through their own rule names
    "disjunction_def": (Or(PSI, PHI), Neg(And(Neg(PSI), Neg(PHI)))),
    "implication_def": (Implies(PSI, PHI), Neg(And(PSI, Neg(PHI)))),
}

# Only the direction (Ψ∧Φ)∨(Ψ∧Θ) ⊢ Ψ∧(Φ∨Θ) of this law decides true;
# the other direction would smuggle in disjunction introduction.
_ONE_WAY = {"distributivity_and_or": "bwd"}

_RULE_KIND = {"DoubleNegation": "double_negation",
              "DisjunctionDef": "disjunction_def",
              "ImplicationDef": "implication_def"}


SCHEMAS = {
    "Reiteration": _sch([PSI], [PSI]),
    "Detachment": _sch([PSI, Inference(_TH, (PSI,), (PHI,))], [PHI]),
    "ConjInfersDisj": _sch([And(PHI, PSI)], [Or(PHI, PSI)]),
    "Splitting": _sch([Or(PSI, PHI), Inference(_TH, (PSI,), (THETA,)),
                       Inference(_TH, (PHI,), (THETA,))], [THETA]),
    "SplittingByNegation": _sch([], [Or(PSI, Neg(PSI))]),
    "AbsorptionAnd": _sch([And(PSI, Or(PHI, PSI))], [PSI]),
    "AbsorptionOr": _sch([Or(PSI, And(PHI, PSI))], [PSI]),
    "DisjunctiveSyllogism": _sch([Or(PSI, PHI), Neg(PSI)], [PHI]),
}


def _equiv_schema(kind, direction):
    lhs, rhs = EQUIVALENCES[kind]
    if direction == "fwd":
        return _sch([lhs], [rhs])
    return _sch([rhs], [lhs])


def _schema_instance(rule, pattern, premises, params, target, theory):
    b = {}
    if theory:
        b[_TH] = theory
    for name in ("psi", "phi", "theta"):
        v = _param_prop(params, name, theory or "Bot")
        if v is not None:
            b["$" + name] = v
    if premises:
        if len(premises) != len(pattern.antecedents):
            raise SchemaMismatch(rule, f"expects {len(pattern.antecedents)} antecedent instance(s)")
        for i, (pat, prem) in enumerate(zip(pattern.antecedents, premises)):
            prem = _body(rule, prem, i + 1)
            if not _match(pat, prem, b):
                raise SchemaMismatch(rule, f"{_show(prem)} does not fit {_show(_fill_partial(pat))}", i + 1)
    if target is not None:
        tb = dict(b)
        if not _match(pattern, _body(rule, target), tb):
            raise SchemaMismatch(rule, f"{_show(target)} is not an instance of "
                                       f"{_show(_fill_partial(pattern))}")
        b = tb
    missing = [m for m in _metavars(pattern) if m not in b]
    if missing:
        raise MissingParam(rule, missing[0][1:])
    if _TH not in b:
        raise MissingParam(rule, "T")
    return _fill(pattern, b)


def _fill_partial(pat):
    """Schema with metavariables printed as Greek-ish names for messages."""
    names = {"$psi": Pred("Psi"), "$phi": Pred("Phi"), "$theta": Pred("Theta"), _TH: "T"}
    b = dict(names)
    return _fill(pat, b)


# ---------------------------------------------------------------------------
# positions and rewriting

def prop_children(p):
    if isinstance(p, Inference):
        return list(p.antecedents + p.consequents)
    if isinstance(p, Neg):
        return [p.p]
    if isinstance(p, (And, Or, Implies, Iff)):
        return [p.left, p.right]
    return []


def subterm(p, path):
    for i in path:
        p = prop_children(p)[i]
    return p


def replace_at(p, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = prop_children(p)
    kids[i] = replace_at(kids[i], rest, new)
    if isinstance(p, Inference):
        k = len(p.antecedents)
        return Inference(p.theory, tuple(kids[:k]), tuple(kids[k:]))
    if isinstance(p, Neg):
        return Neg(kids[0])
    return type(p)(kids[0], kids[1])


def positions(p, path=()):
    yield path
    for i, c in enumerate(prop_children(p)):
        yield from positions(c, path + (i,))


def parse_path(text):
    if text is None:
        return None
    text = str(text).strip()
    if text in ("", ".", "root"):
        return ()
    return tuple(int(x) for x in text.split("."))


def _rewrites(rule, kind, held, params, direction):
    lhs, rhs = EQUIVALENCES[kind]
    dirs = [direction] if direction else ["fwd", "bwd"]
    path = parse_path(params.get("at"))
    where = [path] if path is not None else list(positions(held))
    out = []
    for pos in where:
        try:
            sub = subterm(held, pos)
        except IndexError:
            raise SchemaMismatch(rule, f"no subterm at {params.get('at')}") from None
        if isinstance(sub, Inference):
            continue      # equivalences rewrite formulas, not arguments
        for d in dirs:
            src, dst = (lhs, rhs) if d == "fwd" else (rhs, lhs)
            b = {}
            if not _match(src, sub, b):
                continue
            for name in ("psi", "phi", "theta"):
                v = _param_prop(params, name, "Bot")
                if v is not None and "$" + name not in b:
                    b["$" + name] = v
            if any(m not in b for m in _metavars(dst)):
                continue
            out.append(replace_at(held, pos, _fill(dst, b)))
    return out


# ---------------------------------------------------------------------------
# rule implementations

RuleFn = Callable[[list, dict, Optional[object]], object]
RULES: dict = {}
OPT_IN_RULES = {"DirectNontriviality", "MetaNontriviality"}


def rule(name):
    def deco(fn):
        RULES[name] = fn
        fn.rule_name = name
        return fn
    return deco


def _schema_rule(name):
    def fn(premises, params, target):
        th = params.get("T") or params.get("_default_theory")
        return _schema_instance(name, SCHEMAS[name], premises, params, target, th)
    RULES[name] = fn
    fn.rule_name = name
    return fn


for _n in SCHEMAS:
    _schema_rule(_n)


def _equiv_rule(name, fixed_kind=None):
    def fn(premises, params, target):
        kind = fixed_kind or params.get("kind")
        if kind is None:
            raise MissingParam(name, "kind")
        if kind not in EQUIVALENCES:
            raise SchemaMismatch(name, f"unknown Boolean equivalence {kind!r}")
        direction = params.get("dir")
        if direction not in (None, "fwd", "bwd"):
            raise SchemaMismatch(name, "dir must be fwd or bwd")
        one_way = _ONE_WAY.get(kind)
        if len(premises) == 1 and params.get("schema") is None:
            # rewrite mode
            if one_way:
                raise SchemaMismatch(name, f"{kind} holds one way only and cannot rewrite in place")
            held = _body(name, premises[0], 1)
            return _choose(name, _rewrites(name, kind, held, params, direction), target, "at")
        if premises:
            raise SchemaMismatch(name, "rewrite mode takes exactly one premise")
        th = _theory_of(params, [], params.get("_default_theory"))
        dirs = [direction] if direction else ["fwd", "bwd"]
        if one_way:
            if direction and direction != one_way:
                raise SchemaMismatch(name, f"{kind} holds only in the {one_way} direction")
            dirs = [one_way]
        errors = []
        found = []
        for d in dirs:
            try:
                found.append(_schema_instance(name, _equiv_schema(kind, d), [], params, target, th))
            except SchemaMismatch as e:
                errors.append(e)
        if not found:
            raise errors[0]
        return _choose(name, found, target, "dir")
    RULES[name] = fn
    fn.rule_name = name
    return fn


_equiv_rule("BooleanEquiv")
for _n, _k in _RULE_KIND.items():
    _equiv_rule(_n, _k)


def _need(rule_name, premises, n):
    if len(premises) != n:
        raise SchemaMismatch(rule_name, f"expects {n} premise(s), got {len(premises)}")


@rule("Exchange")
def _exchange(premises, params, target):
    _need("Exchange", premises, 1)
    p = _inference("Exchange", premises[0], 1)
    ante_perm = _param_indices("Exchange", params, "ante")
    cons_perm = _param_indices("Exchange", params, "cons")
    if ante_perm is not None or cons_perm is not None:
        def permute(xs, perm):
            if perm is None:
                return xs
            if sorted(set(perm)) != list(range(1, len(xs) + 1)):
                raise SchemaMismatch("Exchange", "positions must cover every item")
            return tuple(xs[i - 1] for i in perm)
        out = Inference(p.theory, permute(p.antecedents, ante_perm),
                        permute(p.consequents, cons_perm))
        return _choose("Exchange", [out], target, "ante")
    if target is None:
        raise MissingParam("Exchange", "ante")
    t = _inference("Exchange", target)
    # antecedents and consequents compare as sets: duplicates may collapse
    if t.theory == p.theory and _same_set(t.antecedents, p.antecedents) \
            and _same_set(t.consequents, p.consequents):
        return t
    raise SchemaMismatch("Exchange", f"{_show(t)} is not a rearrangement of {_show(p)}")


@rule("Residuation")
def _residuation(premises, params, target):
    _need("Residuation", premises, 1)
    p = _inference("Residuation", premises[0], 1)
    cands = []
    direction = params.get("dir")
    if direction in (None, "out"):
        for k in range(1, len(p.antecedents) + 1):
            keep, moved = p.antecedents[:-k], p.antecedents[-k:]
            inner = Inference(p.theory, moved, p.consequents)
            cands.append(Inference(p.theory, keep, (inner,)))
    if direction in (None, "in"):
        if len(p.consequents) == 1 and isinstance(p.consequents[0], Inference) \
                and p.consequents[0].theory == p.theory:
            inner = p.consequents[0]
            cands.append(Inference(p.theory, p.antecedents + inner.antecedents, inner.consequents))
    if "k" in params and direction in (None, "out"):
        k = int(params["k"])
        if not 1 <= k <= len(p.antecedents):
            raise SchemaMismatch("Residuation", f"cannot discharge {k} hypotheses")
        keep, moved = p.antecedents[:-k], p.antecedents[-k:]
        cands = [Inference(p.theory, keep, (Inference(p.theory, moved, p.consequents),))]
    return _choose("Residuation", cands, target, "dir")


@rule("Monotonicity")
def _monotonicity(premises, params, target):
    _need("Monotonicity", premises, 1)
    p = _inference("Monotonicity", premises[0], 1)
    if "add" in params:
        add = params["add"]
        extra = list(add) if isinstance(add, (list, tuple)) else \
            ([add] if isinstance(add, Prop) else parse_prop_list(str(add), p.theory))
        out = Inference(p.theory, p.antecedents + tuple(extra), p.consequents)
        return _choose("Monotonicity", [out], target, "add")
    if target is None:
        raise MissingParam("Monotonicity", "add")
    t = _inference("Monotonicity", target)
    if t.theory != p.theory or not _same_seq(t.consequents, p.consequents):
        raise SchemaMismatch("Monotonicity", "consequents must stay the same")
    if not _subsequence(p.antecedents, t.antecedents):
        raise SchemaMismatch("Monotonicity", "the stated antecedents do not extend the premise's")
    return t


def _same_seq(xs, ys):
    return len(xs) == len(ys) and all(struct_equiv(a, b) for a, b in zip(xs, ys))


def _subsequence(small, big):
    it = iter(big)
    return all(any(struct_equiv(s, b) for b in it) for s in small)


@rule("Dropping")
def _dropping(premises, params, target):
    _need("Dropping", premises, 1)
    p = _inference("Dropping", premises[0], 1)
    keep = _param_indices("Dropping", params, "keep")
    if keep is not None:
        if not keep or any(not 1 <= i <= len(p.consequents) for i in keep):
            raise SchemaMismatch("Dropping", "keep must name existing consequents")
        out = Inference(p.theory, p.antecedents, tuple(p.consequents[i - 1] for i in keep))
        return _choose("Dropping", [out], target, "keep")
    if target is None:
        raise MissingParam("Dropping", "keep")
    t = _inference("Dropping", target)
    if t.theory != p.theory or not _same_seq(t.antecedents, p.antecedents):
        raise SchemaMismatch("Dropping", "antecedents must stay the same")
    if not _subsequence(t.consequents, p.consequents):
        raise SchemaMismatch("Dropping", "the stated consequents are not among the premise's")
    return t


@rule("ArgumentCombination")
def _argument_combination(premises, params, target):
    if len(premises) < 2:
        raise SchemaMismatch("ArgumentCombination", "expects at least two premises")
    infs = [_inference("ArgumentCombination", p, i + 1) for i, p in enumerate(premises)]
    first = infs[0]
    cons = []
    for i, q in enumerate(infs):
        if q.theory != first.theory:
            raise SchemaMismatch("ArgumentCombination", "theories differ", i + 1)
        if not _same_set(q.antecedents, first.antecedents):
            raise SchemaMismatch("ArgumentCombination", "arguments must share their hypotheses", i + 1)
        cons.extend(q.consequents)
    out = Inference(first.theory, first.antecedents, tuple(cons))
    return _choose("ArgumentCombination", [out], target, "")


_RESERVED = {"T", "theory", "_default_theory", "_context", "kind", "dir", "at",
             "psi", "phi", "theta", "part", "under", "const", "var", "k",
             "add", "keep", "ante", "cons", "schema"}


@rule("VariableElimination")
def _variable_elimination(premises, params, target):
    _need("VariableElimination", premises, 1)
    st = premises[0]
    if not isinstance(st, Statement) or not st.vars:
        raise SchemaMismatch("VariableElimination", "premise has no quantified variables", 1)
    theory = params.get("_default_theory") or "Bot"
    bindings = {}
    for k, v in params.items():
        if k in _RESERVED:
            continue
        bindings[k] = v if not isinstance(v, str) else parse_expr(v, theory)
    try:
        out = instantiate(st, bindings)
    except InstantiationError as e:
        raise SchemaMismatch("VariableElimination", str(e), 1) from None
    return _choose("VariableElimination", [out], target, "")


def _replace_constant(node, name, var):
    if isinstance(node, Atom):
        return Atom(var, "variable") if (node.name == name and node.kind == "constant") else node
    return map_children(node, lambda c: _replace_constant(c, name, var))


@rule("VariableIntroduction")
def _variable_introduction(premises, params, target):
    _need("VariableIntroduction", premises, 1)
    p = _body("VariableIntroduction", premises[0], 1)
    const = params.get("const")
    if const is None:
        raise MissingParam("VariableIntroduction", "const")
    var = params.get("var", "x")
    ctx = params.get("_context")
    if ctx is not None and const in ctx.constants:
        raise SchemaMismatch("VariableIntroduction",
                             f"{const} occurs in an axiom or lemma, so it is not a new constant")
    if const not in free_names(p):
        raise SchemaMismatch("VariableIntroduction", f"{const} does not occur in the premise", 1)
    out = Statement((VarDecl(var),), _replace_constant(p, const, var))
    return _choose("VariableIntroduction", [out], target, "")


@rule("Transitivity")
def _transitivity(premises, params, target):
    _need("Transitivity", premises, 2)
    a = _inference("Transitivity", premises[0], 1)
    b = _inference("Transitivity", premises[1], 2)
    cands = []
    for x, y in ((a, b), (b, a)):
        if x.theory == y.theory and _same_set(x.consequents, y.antecedents):
            cands.append(Inference(x.theory, x.antecedents, y.consequents))
    if not cands:
        raise SchemaMismatch("Transitivity",
                             f"the consequents of {_show(a)} are not the hypotheses of {_show(b)}")
    return _choose("Transitivity", cands, target, "")


@rule("Soundness")
def _soundness(premises, params, target):
    _need("Soundness", premises, 1)
    p = _inference("Soundness", premises[0], 1)
    if params.get("under") == "consequent":
        # Γ ⊢ (⊢ (Δ ⊢ Φ))  to  Γ ⊢ ((⊢ Δ) ⊢ (⊢ Φ)): soundness of the inner argument
        c = p.consequents[0] if len(p.consequents) == 1 else None
        if not (c is not None and _is_holds(c, p.theory)
                and isinstance(c.consequents[0], Inference) and c.consequents[0].antecedents):
            raise SchemaMismatch("Soundness", "the conclusion must be ⊢T (Δ ⊢T Φ)", 1)
        y = c.consequents[0]
        inner = Inference(y.theory, (Inference(y.theory, (), y.antecedents),),
                          (Inference(y.theory, (), y.consequents),))
        return _choose("Soundness", [Inference(p.theory, p.antecedents, (inner,))], target, "")
    if not p.antecedents:
        raise SchemaMismatch("Soundness", "the argument needs hypotheses", 1)
    out = Inference(p.theory, (Inference(p.theory, (), p.antecedents),),
                    (Inference(p.theory, (), p.consequents),))
    return _choose("Soundness", [out], target, "")


@rule("Adequacy")
def _adequacy(premises, params, target):
    _need("Adequacy", premises, 1)
    p = _inference("Adequacy", premises[0], 1)
    if params.get("under") == "consequent":
        # Γ ⊢ Y  to  Γ ⊢ (⊢ Y) for an inference Y
        if len(p.consequents) != 1 or not isinstance(p.consequents[0], Inference):
            raise SchemaMismatch("Adequacy", "the conclusion must be a single inference", 1)
        y = p.consequents[0]
        out = Inference(p.theory, p.antecedents, (Inference(y.theory, (), (y,)),))
        return _choose("Adequacy", [out], target, "")
    return _choose("Adequacy", [Inference(p.theory, (), (p,))], target, "")


@rule("Faithfulness")
def _faithfulness(premises, params, target):
    _need("Faithfulness", premises, 1)
    p = _inference("Faithfulness", premises[0], 1)
    under = params.get("under")
    cands = []
    if under in (None, "root") and not p.antecedents and len(p.consequents) == 1:
        inner = p.consequents[0]
        if isinstance(inner, Inference) and inner.theory == p.theory:
            cands.append(inner)
    if under in (None, "consequent") and len(p.consequents) == 1:
        # Γ ⊢ (⊢(⊢ X))  to  Γ ⊢ (⊢ X); only zero-hypothesis inner arguments
        c = p.consequents[0]
        if isinstance(c, Inference) and c.theory == p.theory and not c.antecedents \
                and len(c.consequents) == 1:
            inner = c.consequents[0]
            if isinstance(inner, Inference) and inner.theory == p.theory and not inner.antecedents:
                cands.append(Inference(p.theory, p.antecedents, (inner,)))
    if not cands:
        raise SchemaMismatch("Faithfulness", f"{_show(p)} does not hold an argument", 1)
    return _choose("Faithfulness", cands, target, "under")


def _single(rule_name, p):
    if len(p.antecedents) != 1 or len(p.consequents) != 1:
        raise SchemaMismatch(rule_name, "expects exactly one hypothesis and one conclusion", 1)
    return p.antecedents[0], p.consequents[0]


def _is_holds(p, theory):
    return isinstance(p, Inference) and p.theory == theory and not p.antecedents \
        and len(p.consequents) == 1


@rule("SelfInfersOpposite")
def _sio(premises, params, target):
    _need("SelfInfersOpposite", premises, 1)
    p = _inference("SelfInfersOpposite", premises[0], 1)
    psi, c = _single("SelfInfersOpposite", p)
    if not struct_equiv(c, Neg(psi)):
        raise SchemaMismatch("SelfInfersOpposite", f"{_show(c)} is not the negation of {_show(psi)}", 1)
    return _choose("SelfInfersOpposite", [Inference(p.theory, (), (Neg(psi),))], target, "")


@rule("SelfInfersArgumentForOpposite")
def _siafo(premises, params, target):
    name = "SelfInfersArgumentForOpposite"
    _need(name, premises, 1)
    p = _inference(name, premises[0], 1)
    psi, c = _single(name, p)
    if not (_is_holds(c, p.theory) and struct_equiv(c.consequents[0], Neg(psi))):
        raise SchemaMismatch(name, f"{_show(c)} is not ⊢{p.theory} ¬{_show(psi)}", 1)
    return _choose(name, [Inference(p.theory, (), (Neg(psi),))], target, "")


@rule("ArgumentForSelfInfersOpposite")
def _afsio(premises, params, target):
    name = "ArgumentForSelfInfersOpposite"
    _need(name, premises, 1)
    p = _inference(name, premises[0], 1)
    a, c = _single(name, p)
    if not _is_holds(a, p.theory):
        raise SchemaMismatch(name, "the hypothesis must be ⊢T Ψ", 1)
    psi = a.consequents[0]
    if not struct_equiv(c, Neg(psi)):
        raise SchemaMismatch(name, f"{_show(c)} is not the negation of {_show(psi)}", 1)
    return _choose(name, [Neg(Inference(p.theory, (), (psi,)))], target, "")


@rule("ArgumentForSelfInfersArgumentForOpposite")
def _afsiafo(premises, params, target):
    name = "ArgumentForSelfInfersArgumentForOpposite"
    _need(name, premises, 1)
    p = _inference(name, premises[0], 1)
    a, c = _single(name, p)
    if not _is_holds(a, p.theory):
        raise SchemaMismatch(name, "the hypothesis must be ⊢T Ψ", 1)
    psi = a.consequents[0]
    if not (_is_holds(c, p.theory) and struct_equiv(c.consequents[0], Neg(psi))):
        raise SchemaMismatch(name, f"{_show(c)} is not ⊢{p.theory} ¬{_show(psi)}", 1)
    return _choose(name, [Neg(Inference(p.theory, (), (psi,)))], target, "")


@rule("ConjJuxtaposition")
def _conj_juxtaposition(premises, params, target):
    name = "ConjJuxtaposition"
    _need(name, premises, 1)
    p = _inference(name, premises[0], 1)
    side = params.get("side")
    cands = []

    def variants(xs):
        out = []
        for i in range(len(xs) - 1):      # join
            out.append(xs[:i] + (And(xs[i], xs[i + 1]),) + xs[i + 2:])
        for i, x in enumerate(xs):        # split
            if isinstance(x, And):
                out.append(xs[:i] + (x.left, x.right) + xs[i + 1:])
        return out

    if side in (None, "ante"):
        cands += [Inference(p.theory, v, p.consequents) for v in variants(p.antecedents)]
    if side in (None, "cons"):
        cands += [Inference(p.theory, p.antecedents, v) for v in variants(p.consequents)]
    return _choose(name, cands, target, "side")


def _two_way_parts(p):
    """The two arguments that ``⊢T (Ψ⇒Φ)`` or ``⊢T (Ψ∨Φ)`` carries."""
    t = p.theory
    _, x = _holds_of("TwoWayDeductionFwd", p, 1)
    if isinstance(x, Implies):
        psi, phi = x.left, x.right
        return (Inference(t, (psi,), (phi,)), Inference(t, (Neg(phi),), (Neg(psi),)))
    if isinstance(x, Or):
        psi, phi = x.left, x.right
        return (Inference(t, (Neg(psi),), (phi,)), Inference(t, (Neg(phi),), (psi,)))
    raise SchemaMismatch("TwoWayDeductionFwd", "premise must be ⊢T (Ψ⇒Φ) or ⊢T (Ψ∨Φ)", 1)


@rule("TwoWayDeductionFwd")
def _two_way_fwd(premises, params, target):
    name = "TwoWayDeductionFwd"
    _need(name, premises, 1)
    p = _inference(name, premises[0], 1)
    a, b = _two_way_parts(p)
    part = params.get("part")
    if part is None:
        cands = [And(a, b), a, b]
        if target is None:
            return And(a, b)
    elif str(part) == "1":
        cands = [a]
    elif str(part) == "2":
        cands = [b]
    else:
        raise SchemaMismatch(name, "part must be 1 or 2")
    return _choose(name, cands, target, "part")


@rule("TwoWayDeductionBwd")
def _two_way_bwd(premises, params, target):
    name = "TwoWayDeductionBwd"
    if len(premises) == 1:
        both = _body(name, premises[0], 1)
        if not isinstance(both, And):
            raise SchemaMismatch(name, "expects two arguments or their conjunction", 1)
        premises = [both.left, both.right]
    _need(name, premises, 2)
    a = _inference(name, premises[0], 1)
    b = _inference(name, premises[1], 2, a.theory)
    ga, (psi, phi) = a.antecedents[:-1], _last_pair(name, a, 1)
    gb, (nphi, npsi) = b.antecedents[:-1], _last_pair(name, b, 2)
    if not _same_set(ga, gb):
        raise SchemaMismatch(name, "the two arguments must share their other hypotheses")
    cands = []
    # implication: (Ψ ⊢ Φ), (¬Φ ⊢ ¬Ψ)
    if struct_equiv(nphi, Neg(phi)) and struct_equiv(npsi, Neg(psi)):
        cands.append(Inference(a.theory, ga, (Implies(psi, phi),)))
    # disjunction: (¬Ψ ⊢ Φ), (¬Φ ⊢ Ψ)
    if isinstance(psi, Neg) and struct_equiv(nphi, Neg(phi)) and struct_equiv(npsi, psi.p):
        cands.append(Inference(a.theory, ga, (Or(psi.p, phi),)))
    if not cands:
        raise SchemaMismatch(name, "the arguments are not the two directions of one implication")
    return _choose(name, cands, target, "")


def _last_pair(name, p, idx):
    if not p.antecedents or len(p.consequents) != 1:
        raise SchemaMismatch(name, "expects an argument with one conclusion", idx)
    return p.antecedents[-1], p.consequents[0]


def _holds_wrap(p, theory):
    if isinstance(p, Inference):
        return p
    return Inference(theory, (), (p,))


@rule("AxiomOfTheory")
def _axiom(premises, params, target):
    _need("AxiomOfTheory", premises, 1)
    return _choose("AxiomOfTheory", [premises[0]], target, "")


@rule("AssumedLemma")
def _assumed(premises, params, target):
    _need("AssumedLemma", premises, 1)
    return _choose("AssumedLemma", [premises[0]], target, "")


@rule("DirectNontriviality")
def _direct_nontriviality(premises, params, target):
    _need("DirectNontriviality", premises, 1)
    p = _body("DirectNontriviality", premises[0], 1)
    if not isinstance(p, Neg):
        raise SchemaMismatch("DirectNontriviality", "premise must be a negation", 1)
    th = _theory_of(params, [], params.get("_default_theory"))
    return _choose("DirectNontriviality", [Neg(Inference(th, (), (p.p,)))], target, "")


@rule("MetaNontriviality")
def _meta_nontriviality(premises, params, target):
    _need("MetaNontriviality", premises, 1)
    th, x = _holds_of("MetaNontriviality", premises[0], 1)
    if not isinstance(x, Neg):
        raise SchemaMismatch("MetaNontriviality", "premise must be ⊢T ¬Ψ", 1)
    return _choose("MetaNontriviality", [Neg(Inference(th, (), (x.p,)))], target, "")


RULE_NAMES = tuple(sorted(RULES))
SCRIPT_ONLY = {"AxiomOfTheory", "AssumedLemma"}


def apply_rule(rule_name, premises, params=None, target=None, theory=None):
    """Apply one catalog rule.

    ``premises`` are held propositions (or statements).  For schema rules
    they are the instances of the schema's hypotheses, in order.  Returns
    the conclusion; raises :class:`SchemaMismatch` or :class:`MissingParam`.
    """
    params = dict(params or {})
    if theory is not None:
        params.setdefault("_default_theory", theory)
    fn = RULES.get(rule_name)
    if fn is None:
        raise SchemaMismatch(rule_name, "no such rule in the catalog")
    return fn(list(premises), params, target)


# ---------------------------------------------------------------------------
# Scripts

@dataclass(frozen=True)
class Lemma:
    label: str
    statement: Statement
    justification: str = "proved"      # external | proved
    note: str = ""


@dataclass(frozen=True)
class ProofStep:
    label: str
    rule: str
    premises: tuple
    params: tuple          # sorted (key, value) pairs
    conclusion: Statement
    line: int = 0

    def param_dict(self):
        return dict(self.params)


@dataclass
class ProofScript:
    theory: str
    axioms: list = field(default_factory=list)      # (label, Statement)
    lemmas: list = field(default_factory=list)      # Lemma
    steps: list = field(default_factory=list)       # ProofStep
    options: set = field(default_factory=set)
    name: str = ""


@dataclass
class StepReport:
    label: str
    rule: str
    verified: bool
    conclusion: str
    message: str = ""


@dataclass
class CheckReport:
    theory: str
    steps: list
    external: list
    assumptions: list
    name: str = ""

    @property
    def verified(self):
        return all(s.verified for s in self.steps)

    def step(self, label):
        for s in self.steps:
            if s.label == label:
                return s
        raise KeyError(label)

    def to_dict(self):
        return {
            "name": self.name,
            "theory": self.theory,
            "verified": self.verified,
            "external_lemmas": list(self.external),
            "assumptions": list(self.assumptions),
            "steps": [{"label": s.label, "rule": s.rule,
                       "status": "VERIFIED" if s.verified else "FAILED",
                       "conclusion": s.conclusion, "message": s.message}
                      for s in self.steps],
        }

    def to_text(self):
        lines = [f"script {self.name or '<inline>'} theory {self.theory}"]
        for s in self.steps:
            status = "VERIFIED" if s.verified else "FAILED"
            line = f"  {s.label:<10} {status:<8} {s.rule:<40} {s.conclusion}"
            if s.message:
                line += f"\n             {s.message}"
            lines.append(line)
        if self.external:
            lines.append("depends on external lemmas: " + ", ".join(self.external))
        for a in self.assumptions:
            lines.append("assumption: " + a)
        lines.append("result: " + ("VERIFIED" if self.verified else "FAILED"))
        return "\n".join(lines)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


@dataclass
class _Context:
    constants: set


def _axiom_held(st: Statement, theory):
    """Axioms that are bare propositions are read as ``⊢T Φ``."""
    if st.vars:
        return st
    return _holds_wrap(st.body, theory)


def _constants(st):
    return {a.name for a in walk(st.body) if isinstance(a, Atom) and a.kind == "constant"} | \
        {p.name for p in walk(st.body) if isinstance(p, Pred)}


def check_script(script: ProofScript) -> CheckReport:
    """Check every step; a step is verified iff its rule yields its stated conclusion.

    A failed step is reported and its stated conclusion is still used by
    later steps, so one report lists every problem.
    """
    env = {}
    kinds = {}
    for label, st in script.axioms:
        if label in env:
            raise ScriptError(f"duplicate label {label}")
        env[label] = _axiom_held(st, script.theory)
        kinds[label] = "axiom"
    lemma_info = {}
    for lem in script.lemmas:
        if lem.label in env:
            raise ScriptError(f"duplicate label {lem.label}")
        env[lem.label] = lem.statement if lem.statement.vars else lem.statement.body
        kinds[lem.label] = "lemma"
        lemma_info[lem.label] = lem
    labels_ahead = {s.label for s in script.steps}
    consts = set()
    for _, st in script.axioms:
        consts |= _constants(st)
    for lem in script.lemmas:
        consts |= _constants(lem.statement)
    ctx = _Context(consts)

    reports = []
    used_external = []
    for step in script.steps:
        if step.label in env:
            raise ScriptError(f"duplicate label {step.label} (line {step.line})")
        premises = []
        for ref in step.premises:
            if ref == step.label:
                raise ScriptError(f"step {step.label} cites itself (cycle)")
            if ref not in env:
                if ref in labels_ahead:
                    raise ScriptError(f"step {step.label} cites later step {ref} (cycle)")
                raise ScriptError(f"step {step.label} cites unknown label {ref}")
            premises.append(env[ref])
            if kinds.get(ref) == "lemma" and lemma_info[ref].justification == "external" \
                    and ref not in used_external:
                used_external.append(ref)
        target = step.conclusion
        target_val = target if target.vars else target.body
        params = dict(step.params)
        params["_default_theory"] = script.theory
        params["_context"] = ctx
        msg = ""
        ok = True
        if step.rule in OPT_IN_RULES and "nontriviality" not in script.options:
            ok, msg = False, f"{step.rule} is an opt-in rule; enable it with 'option nontriviality'"
        else:
            try:
                got = RULES[step.rule](premises, params, target_val) if step.rule in RULES else \
                    apply_rule(step.rule, premises, params, target_val)
                if not struct_equiv(_as_statement(got), target):
                    ok, msg = False, f"rule yields {_show(got)}"
            except (SchemaMismatch, MissingParam, KernelError, ParseError) as e:
                ok, msg = False, str(e)
        env[step.label] = target_val
        kinds[step.label] = "step"
        reports.append(StepReport(step.label, step.rule, ok, print_statement(target), msg))
    assumptions = [f"{lemma_info[l].label}: {lemma_info[l].note}"
                   for l in used_external if lemma_info[l].note]
    return CheckReport(script.theory, reports, used_external, assumptions, script.name)


def _as_statement(x):
    return x if isinstance(x, Statement) else Statement((), x)


# ---------------------------------------------------------------------------
# .dlp format

def _split_top(text, sep):
    out, depth, buf, quote = [], 0, [], False
    for ch in text:
        if ch == '"':
            quote = not quote
        elif not quote:
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
            elif ch == sep and depth == 0:
                out.append("".join(buf))
                buf = []
                continue
        buf.append(ch)
    out.append("".join(buf))
    return out


def _unquote(v):
    v = v.strip()
    if len(v) >= 2 and v[0] == '"' and v[-1] == '"':
        return v[1:-1]
    return v


def _strip_comment(line):
    quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            quote = not quote
        elif ch == "#" and not quote:
            return line[:i]
    return line


def parse_dlp(text, name=""):
    """Parse a proof script.

    Header lines: ``theory T``, ``option nontriviality``,
    ``axiom A: <statement>``, ``lemma L: <statement> external|proved``
    and ``note L: <text>``.  Step lines look like
    ``label: Rule(prem, prem; key=value, key="text") ==> conclusion``.
    Indented lines continue the previous line.
    """
    logical = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        if raw[:1].isspace() and logical:
            logical[-1] = (logical[-1][0], logical[-1][1] + " " + line.strip())
        else:
            logical.append((no, line.strip()))

    script = ProofScript(theory="Bot", name=name)
    notes = {}
    for no, line in logical:
        def err(msg):
            return ScriptError(f"line {no}: {msg}")
        head, _, rest = line.partition(" ")
        try:
            if head == "theory":
                script.theory = rest.strip()
            elif head == "option":
                script.options.add(rest.strip())
            elif head == "axiom":
                label, _, body = rest.partition(":")
                script.axioms.append((label.strip(), parse_statement(body, script.theory)))
            elif head == "lemma":
                label, _, body = rest.partition(":")
                body = body.strip()
                just = "proved"
                for j in ("external", "proved"):
                    if body.endswith(" " + j):
                        just = j
                        body = body[: -len(j)].strip()
                script.lemmas.append(Lemma(label.strip(), parse_statement(body, script.theory), just))
            elif head == "note":
                label, _, body = rest.partition(":")
                notes[label.strip()] = body.strip()
            else:
                script.steps.append(_parse_step(line, script.theory, no))
        except ParseError as e:
            raise err(str(e)) from None
    script.lemmas = [Lemma(l.label, l.statement, l.justification, notes.get(l.label, l.note))
                     for l in script.lemmas]
    return script


def _parse_step(line, theory, no):
    lhs, sep, concl = line.partition("==>")
    if not sep:
        raise ScriptError(f"line {no}: a step needs '==> conclusion'")
    label, colon, call = lhs.partition(":")
    if not colon:
        raise ScriptError(f"line {no}: a step needs 'label:'")
    call = call.strip()
    rule_name, paren, inner = call.partition("(")
    rule_name = rule_name.strip()
    if paren:
        if not inner.rstrip().endswith(")"):
            raise ScriptError(f"line {no}: unbalanced parentheses in rule call")
        inner = inner.rstrip()[:-1]
    parts = _split_top(inner, ";") if inner.strip() else [""]
    prem_txt = parts[0]
    param_txt = ";".join(parts[1:])
    premises = tuple(p.strip() for p in _split_top(prem_txt, ",") if p.strip())
    params = {}
    for item in _split_top(param_txt, ","):
        if not item.strip():
            continue
        k, eq, v = item.partition("=")
        if not eq:
            raise ScriptError(f"line {no}: parameter {item.strip()!r} needs key=value")
        params[k.strip()] = _unquote(v)
    conclusion = parse_statement(concl.strip(), theory)
    return ProofStep(label.strip(), rule_name, premises, tuple(sorted(params.items())),
                     conclusion, no)


def load_script(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dlp(fh.read(), name=str(path))


# ---------------------------------------------------------------------------
# Probabilities

def prob_contrapositive_bound(p_consequent_given_antecedent, p_consequent):
    """Upper bound on P(antecedent) from P(consequent | antecedent) and P(consequent).

    P(A) = P(A ∧ B) / P(B | A) ≤ P(B) / P(B | A), capped at 1.
    """
    cond = Fraction(p_consequent_given_antecedent)
    cons = Fraction(p_consequent)
    if cond <= 0:
        raise ValueError("the conditional probability must be positive")
    if cond > 1 or not 0 <= cons <= 1:
        raise ValueError("probabilities lie in [0, 1]")
    return min(Fraction(1), cons / cond)


def conjunction_lower_bound(p, q):
    """Fréchet bound: P(A ∧ B) ≥ P(A) + P(B) − 1."""
    return max(Fraction(0), Fraction(p) + Fraction(q) - 1)


def catch22_probability_chain(p_sane=1):
    """Replay the probabilistic Catch-22 derivation with exact rationals.

    Each axiom is an inequality between probabilities; the derivation
    propagates bounds along them.  Returns ``{label: (claim, value)}``.
    Path 2'-3' pins P(Fly[Yossarian]) to 1, path 4'-6'' pins it to 0.
    """
    one = Fraction(1)
    p_sane = Fraction(p_sane)
    steps = {}
    # 2: P(Sane) <= P(Obligated)
    p_obl = p_sane
    steps["2'"] = ("P(Obligated[Yossarian, Fly]) >=", p_obl)
    # 3: P(Sane /\ Obligated) <= P(Fly)
    p_fly_low = conjunction_lower_bound(p_sane, p_obl)
    steps["3'"] = ("P(Fly[Yossarian]) >=", p_fly_low)
    # 4: P(Fly) <= P(Crazy)
    p_crazy = p_fly_low
    steps["4'"] = ("P(Crazy[Yossarian]) >=", p_crazy)
    # 5: P(Crazy) <= P(~Obligated) = 1 - P(Obligated)
    p_not_obl = p_crazy
    steps["5'"] = ("1 - P(Obligated[Yossarian, Fly]) >=", p_not_obl)
    steps["5''"] = ("P(Obligated[Yossarian, Fly]) <=", one - p_not_obl)
    # 6: P(Sane /\ ~Obligated) <= P(~Fly) = 1 - P(Fly)
    p_not_fly = conjunction_lower_bound(p_sane, p_not_obl)
    steps["6'"] = ("1 - P(Fly[Yossarian]) >=", p_not_fly)
    steps["6''"] = ("P(Fly[Yossarian]) <=", one - p_not_fly)
    return steps


# ---------------------------------------------------------------------------
# Bounded forward closure

@dataclass(frozen=True)
class ClosureBounds:
    max_antecedents: int = 2
    max_consequents: int = 2
    max_formula_size: int = 4
    max_nesting: int = 2


@dataclass
class ClosureResult:
    items: set
    universe: list
    rounds: int
    saturated: bool        # no new items in the last round
    firings: int

    def __contains__(self, p):
        return p in self.items

    def __len__(self):
        return len(self.items)


@lru_cache(maxsize=None)
def _psize(p):
    if isinstance(p, Pred):
        return 1
    return 1 + sum(_psize(c) for c in prop_children(p))


@lru_cache(maxsize=None)
def _nesting(p):
    inner = max((_nesting(c) for c in prop_children(p)), default=0)
    return inner + (1 if isinstance(p, Inference) else 0)


def _within(p, b: ClosureBounds, universe):
    """Sequent shape bounds; every Boolean component must lie in ``universe``."""
    if isinstance(p, Inference):
        if len(p.antecedents) > b.max_antecedents or len(p.consequents) > b.max_consequents:
            return False
        if _nesting(p) > b.max_nesting:
            return False
        for x in p.antecedents + p.consequents:
            if _psize(x) > b.max_formula_size or not _within(x, b, universe):
                return False
        return True
    if isinstance(p, Neg) and isinstance(p.p, Inference):
        return _within(p.p, b, universe)
    if isinstance(p, And) and (isinstance(p.left, Inference) or isinstance(p.right, Inference)):
        return isinstance(p.left, Inference) and isinstance(p.right, Inference) \
            and _within(p.left, b, universe) and _within(p.right, b, universe)
    return p in universe


@lru_cache(maxsize=None)
def _order_key(p):
    return print_prop(p)


def exchange_normal(p):
    """Sorted, duplicate-free antecedents and consequents (one Exchange step away)."""
    if not isinstance(p, Inference):
        return p
    ante = tuple(sorted(set(p.antecedents), key=_order_key))
    cons = tuple(sorted(set(p.consequents), key=_order_key))
    return Inference(p.theory, ante, cons)


def closure_universe(seeds, atoms, extra=()):
    """Literals over ``atoms`` plus the Boolean subformulas of seeds and ``extra``."""
    out = {}
    for a in atoms:
        for f in (Pred(a), Neg(Pred(a))):
            out[f] = None
    for s in list(seeds) + list(extra):
        for n in walk(s):
            if isinstance(n, (Pred, Neg, And, Or, Implies, Iff)) \
                    and not any(isinstance(m, Inference) for m in walk(n)):
                out[n] = None
    return list(out)


def _schema_instances(theory, universe, b):
    uset = set(universe)
    out = []
    pats = [(name, pat) for name, pat in SCHEMAS.items()]
    for kind in EQUIVALENCES:
        dirs = [_ONE_WAY[kind]] if kind in _ONE_WAY else ["fwd", "bwd"]
        pats += [("BooleanEquiv", _equiv_schema(kind, d)) for d in dirs]
    for name, pat in pats:
        mvs = _metavars(pat)
        for vals in itertools.product(universe, repeat=len(mvs)):
            binding = dict(zip(mvs, vals))
            binding[_TH] = theory
            inst = _fill(pat, binding)
            if _within(inst, b, uset):
                out.append((name, inst))
    return out


def _unary_candidates(h, universe):
    """(rule, params) pairs worth trying on one held item."""
    out = []
    if isinstance(h, Inference):
        na, nc = len(h.antecedents), len(h.consequents)
        # Exchange is implicit: closure items are kept in Exchange-normal form
        for k in range(1, na + 1):
            out.append(("Residuation", {"dir": "out", "k": k}))
        out.append(("Residuation", {"dir": "in"}))
        for f in universe:
            out.append(("Monotonicity", {"add": [f]}))
        for r in range(1, nc):
            for keep in itertools.combinations(range(1, nc + 1), r):
                out.append(("Dropping", {"keep": list(keep)}))
        out += [("Soundness", {}), ("Soundness", {"under": "consequent"}),
                ("Adequacy", {}), ("Adequacy", {"under": "consequent"}),
                ("Faithfulness", {"under": "root"}), ("Faithfulness", {"under": "consequent"}),
                ("SelfInfersOpposite", {}), ("SelfInfersArgumentForOpposite", {}),
                ("ArgumentForSelfInfersOpposite", {}),
                ("ArgumentForSelfInfersArgumentForOpposite", {}),
                ("TwoWayDeductionFwd", {"part": "1"}), ("TwoWayDeductionFwd", {"part": "2"})]
    if isinstance(h, And):
        out.append(("TwoWayDeductionBwd", {}))
    return out


def _juxtapositions(p):
    if not isinstance(p, Inference):
        return []
    res = []
    for side in ("ante", "cons"):
        xs = p.antecedents if side == "ante" else p.consequents
        variants = [xs[:i] + (And(xs[i], xs[i + 1]),) + xs[i + 2:] for i in range(len(xs) - 1)]
        variants += [xs[:i] + (x.left, x.right) + xs[i + 1:]
                     for i, x in enumerate(xs) if isinstance(x, And)]
        for v in variants:
            if side == "ante":
                res.append(Inference(p.theory, v, p.consequents))
            else:
                res.append(Inference(p.theory, p.antecedents, v))
    return res


def _try(rule_name, premises, params):
    try:
        return [RULES[rule_name](list(premises), dict(params), None)]
    except KernelError:
        return []


def kernel_closure(seeds, depth=6, atoms=("P", "Q"), theory="Bot",
                   bounds: ClosureBounds = ClosureBounds(), include_schemas=True, extra=()):
    """Close ``seeds`` under the rule catalog for ``depth`` rounds.

    The universe is finite: every Boolean component of a held sequent is a
    literal over ``atoms`` or a subformula of the seeds or of ``extra``
    (usually the goal being tested), and sequent width, formula size and
    turnstile nesting are bounded.  Schema rules contribute every
    instance over that universe.  Held sequents are stored in
    Exchange-normal form, so Exchange never costs a round.  Variable rules
    have nothing to do in a propositional universe and are skipped.
    """
    universe = closure_universe(seeds, atoms, extra)
    uset = set(universe)
    items = set()
    seen = set()
    firings = 0

    def add(p, fresh):
        p = exchange_normal(p)
        if p in seen:
            return
        seen.add(p)
        if _within(p, bounds, uset):
            items.add(p)
            fresh.append(p)

    frontier = []
    for s in seeds:
        add(s, frontier)
    if include_schemas:
        for _, inst in _schema_instances(theory, universe, bounds):
            add(inst, frontier)

    rewrite_pairs = []
    for kind, (lhs, rhs) in EQUIVALENCES.items():
        if kind not in _ONE_WAY:
            rewrite_pairs += [(lhs, rhs), (rhs, lhs)]
    for rounds in range(1, depth + 1):
        new = []
        for h in frontier:
            for rule_name, params in _unary_candidates(h, universe):
                for c in _try(rule_name, [h], params):
                    firings += 1
                    add(c, new)
            for c in _juxtapositions(h):
                firings += 1
                add(c, new)
            for pos in positions(h):
                sub = subterm(h, pos)
                if isinstance(sub, Inference):
                    continue
                for src, dst in rewrite_pairs:
                    b = {}
                    if _match(src, sub, b) and all(m in b for m in _metavars(dst)):
                        firings += 1
                        add(replace_at(h, pos, _fill(dst, b)), new)
        # binary rules, with at least one premise from the frontier
        fresh = set(frontier)
        newset = set(new)
        held = [h for h in items if isinstance(h, Inference) and h not in newset]
        by_ante = {}
        for h in held:
            by_ante.setdefault(frozenset(h.antecedents), []).append(h)
        for h in held:
            for g in by_ante.get(frozenset(h.consequents), []):
                if h in fresh or g in fresh:
                    firings += 1
                    add(Inference(h.theory, h.antecedents, g.consequents), new)
        for group in by_ante.values():
            if not any(x in fresh for x in group):
                continue
            for a, b2 in itertools.permutations(group, 2):
                if (a in fresh or b2 in fresh) and len(a.consequents) + len(b2.consequents) \
                        <= bounds.max_consequents:
                    for c in _try("ArgumentCombination", [a, b2], {}):
                        firings += 1
                        add(c, new)
        singles = [h for h in held if h.antecedents and len(h.consequents) == 1]
        by_last = {}
        for h in singles:
            by_last.setdefault((frozenset(h.antecedents[:-1]), h.antecedents[-1]), []).append(h)
        for a in singles:
            psi, phi = a.antecedents[-1], a.consequents[0]
            ctx = frozenset(a.antecedents[:-1])
            for lead in {Neg(phi), phi.p if isinstance(phi, Neg) else None}:
                for b2 in by_last.get((ctx, lead), []) if lead is not None else []:
                    if a in fresh or b2 in fresh:
                        for c in _try("TwoWayDeductionBwd", [a, b2], {}):
                            firings += 1
                            add(c, new)
        frontier = new
        if not new:
            return ClosureResult(items, universe, rounds, True, firings)
    return ClosureResult(items, universe, depth, False, firings)
