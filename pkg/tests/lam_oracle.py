"""A big-step reference evaluator for the generated λ programs.

It computes the set of possible results directly, by structural recursion,
with no reduction graph.  Arguments are substituted unevaluated, so a
choice inside an argument is resolved separately at every use.  Results are
Python values: ints, booleans and frozensets.  Anything the evaluator
cannot give a meaning to raises ``Stuck``.
"""

import itertools

from directlogic.syntax import (
    Apply, Atom, Choice, IfThenElse, Lam, Num, SetLit, TRUE, FALSE, substitute,
)


class Stuck(Exception):
    pass


def _ints(*xs):
    if not all(type(x) is int for x in xs):
        raise Stuck
    return xs


def _builtin(op, args):
    if op in ("+", "-", "*", "Less"):
        a, b = _ints(*args)
        return {"+": a + b, "-": a - b, "*": a * b, "Less": a < b}[op]
    if op == "Eq":
        a, b = args
        return type(a) is type(b) and a == b
    if op == "Count":
        (s,) = args
        if not isinstance(s, frozenset):
            raise Stuck
        return len(s)
    if op == "Choice":
        (s,) = args
        if not isinstance(s, frozenset) or not s:
            raise Stuck
        return min(_ints(*s))
    if op in ("Union", "Intersect"):
        a, b = args
        if not (isinstance(a, frozenset) and isinstance(b, frozenset)):
            raise Stuck
        return a | b if op == "Union" else a & b
    raise Stuck


def values(e):
    if isinstance(e, Num):
        return {e.n}
    if isinstance(e, Choice):
        return values(e.left) | values(e.right)
    if isinstance(e, IfThenElse):
        out = set()
        for t in values(e.cond):
            if type(t) is not bool:
                raise Stuck
            out |= values(e.then if t else e.orelse)
        return out
    if isinstance(e, SetLit):
        return {frozenset(c) for c in itertools.product(*[values(x) for x in e.items])}
    if isinstance(e, Apply) and isinstance(e.op, Lam):
        (name,) = e.op.params
        (arg,) = e.args
        return values(substitute(e.op.body, {name: arg}))
    if isinstance(e, Apply) and isinstance(e.op, Atom):
        return {_builtin(e.op.name, c)
                for c in itertools.product(*[values(a) for a in e.args])}
    raise Stuck


def from_term(v):
    """Read a normal form produced by the reduction engine as a Python value."""
    if isinstance(v, Num):
        return v.n
    if v == TRUE:
        return True
    if v == FALSE:
        return False
    if isinstance(v, SetLit):
        return frozenset(from_term(x) for x in v.items)
    raise Stuck
