"""Small-step evaluator for the nondeterministic λ-calculus.

Reduction is explored exhaustively: :func:`step` returns every one-step
reduct, and :func:`classify` walks the whole reduction graph, memoizing
nodes up to α-equivalence.  Nothing reduces under a λ, inside an
unresolved choice, or inside quoted material (reified propositions,
sentences).

``max_depth`` counts choice resolutions along a path, not raw steps.  The
deterministic work between two choices (β, arithmetic, set operations) is
bounded by ``max_nodes`` instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .syntax import (
    FALSE, TRUE, And, Apply, Atom, Choice, Equal, Iff, IfThenElse, Implies,
    Lam, Member, Neg, Num, Or, PropLam, Reified, ReifiedExpr, SentenceExpr,
    Seq, SeqCons, SetComp, SetLit, Subset, canonical, free_names,
    free_variables, fresh_name, print_expr, struct_equiv, substitute,
)


class LamError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Values and the canonical term order

def term_key(e):
    """Total order on terms: numbers, then constants, then everything else."""
    if isinstance(e, Num):
        return (0, e.n, "")
    if isinstance(e, Atom):
        return (1, 0, e.name)
    return (2, 0, print_expr(canonical(e)))


def _canonical_set(items):
    seen = {}
    for x in items:
        seen.setdefault(canonical(x), x)
    return tuple(sorted(seen.values(), key=term_key))


def is_value(e) -> bool:
    if isinstance(e, (Num, Lam, PropLam, Reified, ReifiedExpr, SentenceExpr)):
        return True
    if isinstance(e, Atom):
        return e.kind == "constant"
    if isinstance(e, Seq):
        return all(is_value(x) for x in e.items)
    if isinstance(e, SetLit):
        return all(is_value(x) for x in e.items) and e.items == _canonical_set(e.items)
    return False


def _ground(e):
    """Values that can be compared for equality (no functions inside)."""
    if isinstance(e, (Num, Atom)):
        return True
    if isinstance(e, (Seq, SetLit)):
        return all(_ground(x) for x in e.items)
    return isinstance(e, SentenceExpr)


# ---------------------------------------------------------------------------
# δ-rules

def _num(*xs):
    return all(isinstance(x, Num) for x in xs)


def _set(x):
    return isinstance(x, SetLit)


def _bool(b):
    return TRUE if b else FALSE


def _same(a, b):
    return canonical(a) == canonical(b)


def _delta(name, args):
    """Result of a built-in operation on value arguments, or None if stuck."""
    n = len(args)
    if n == 2 and _num(*args):
        a, b = args[0].n, args[1].n
        if name == "+":
            return Num(a + b)
        if name == "-":
            return Num(a - b)
        if name == "*":
            return Num(a * b)
        if name == "%":
            return Num(a % b) if b else None
        if name == "Less":
            return _bool(a < b)
    if name == "Eq" and n == 2 and _ground(args[0]) and _ground(args[1]):
        return _bool(_same(*args))
    if n == 1 and _set(args[0]):
        items = args[0].items
        if name == "Count":
            return Num(len(items))
        if name == "Choice":
            return items[0] if items else None     # least canonical element
        if name == "IsEmpty":
            return _bool(not items)
    if n == 2 and _set(args[0]) and _set(args[1]):
        a, b = args[0].items, args[1].items
        if name == "Union":
            return SetLit(_canonical_set(a + b))
        if name == "Intersect":
            return SetLit(tuple(x for x in a if any(_same(x, y) for y in b)))
        if name == "Difference":
            return SetLit(tuple(x for x in a if not any(_same(x, y) for y in b)))
    if name == "Elem" and n == 2 and _set(args[1]):
        return _bool(any(_same(args[0], y) for y in args[1].items))
    return None


BUILTINS = frozenset({"+", "-", "*", "%", "Less", "Eq", "Count", "Choice",
                      "IsEmpty", "Union", "Intersect", "Difference", "Elem"})


# ---------------------------------------------------------------------------
# One-step reduction

DEFAULT_DEFS = {
    "IntegerGenerator": Lam((), Choice(Num(0), Apply(Atom("+"), (
        Num(1), Apply(Atom("IntegerGenerator"), ()))))),
}


def _defs(defs):
    return DEFAULT_DEFS if defs is None else defs


def step(e, defs: Optional[Mapping] = None) -> set:
    """Every one-step reduct of the closed expression ``e``."""
    free = free_variables(e)
    if free:
        raise LamError(f"free variable(s) {', '.join(sorted(free))} in {print_expr(e)}")
    out = {}
    for _, r in reductions(e, _defs(defs)):
        out.setdefault(canonical(r), r)
    return set(out.values())


def reductions(e, defs):
    """Yield (axiom, reduct) pairs.  ``defs`` maps names to λ definitions."""
    if isinstance(e, Choice):
        yield "choice-left", e.left
        yield "choice-right", e.right
        return
    if isinstance(e, IfThenElse):
        if e.cond == TRUE:
            yield "if-true", e.then
        elif e.cond == FALSE:
            yield "if-false", e.orelse
        for ax, c in reductions(e.cond, defs):
            yield ax, IfThenElse(c, e.then, e.orelse)
        return
    if isinstance(e, Apply):
        yield from _apply_reductions(e, defs)
        return
    if isinstance(e, Seq):
        yield from _congruence_items(e, defs, Seq)
        return
    if isinstance(e, SeqCons):
        if isinstance(e.tail, Seq):
            yield "cons", Seq((e.head,) + e.tail.items)
        for ax, h in reductions(e.head, defs):
            yield ax, SeqCons(h, e.tail)
        for ax, t in reductions(e.tail, defs):
            yield ax, SeqCons(e.head, t)
        return
    if isinstance(e, SetLit):
        if all(is_value(x) for x in e.items):
            norm = _canonical_set(e.items)
            if norm != e.items:
                yield "set-extensionality", SetLit(norm)
            return
        yield from _congruence_items(e, defs, SetLit)
        return
    if isinstance(e, SetComp):
        if is_value(e.domain) and isinstance(e.domain, SetLit):
            kept = _filter(e, defs)
            if kept is not None:
                yield "set-comprehension", SetLit(kept)
            return
        for ax, d in reductions(e.domain, defs):
            yield ax, SetComp(e.var, d, e.pred)
        return
    # atoms, numbers, λs and quoted material are irreducible


def _congruence_items(e, defs, cls):
    for i, x in enumerate(e.items):
        for ax, y in reductions(x, defs):
            yield ax, cls(e.items[:i] + (y,) + e.items[i + 1:])


def _apply_reductions(e, defs):
    op, args = e.op, e.args
    if isinstance(op, Lam) and len(op.params) == len(args):
        yield "beta", substitute(op.body, dict(zip(op.params, args)))
    elif isinstance(op, Atom) and op.kind == "constant":
        d = defs.get(op.name)
        if isinstance(d, Lam) and len(d.params) == len(args):
            yield "definition", substitute(d.body, dict(zip(d.params, args)))
        elif op.name in BUILTINS and all(is_value(a) for a in args):
            r = _delta(op.name, args)
            if r is not None:
                yield "delta", r
    for ax, o in reductions(op, defs):
        yield ax, Apply(o, args)
    for i, a in enumerate(args):
        for ax, b in reductions(a, defs):
            yield ax, Apply(op, args[:i] + (b,) + args[i + 1:])


def _filter(e: SetComp, defs):
    kept = []
    for x in e.domain.items:
        t = _truth(substitute(e.pred, {e.var: x}), defs)
        if t is None:
            return None
        if t:
            kept.append(x)
    return tuple(kept)


def _value_of(e, defs):
    if is_value(e):
        return e
    v = classify(e, max_nodes=2000, max_depth=0, defs=defs)
    if v.kind == ALWAYS and len(v.values) == 1:
        (only,) = v.values
        return only if is_value(only) else None
    return None


def _truth(p, defs):
    """Truth of a ground proposition about data, or None if undetermined."""
    if isinstance(p, Neg):
        t = _truth(p.p, defs)
        return None if t is None else not t
    if isinstance(p, (And, Or, Implies, Iff)):
        a, b = _truth(p.left, defs), _truth(p.right, defs)
        if a is None or b is None:
            return None
        if isinstance(p, And):
            return a and b
        if isinstance(p, Or):
            return a or b
        if isinstance(p, Implies):
            return (not a) or b
        return a == b
    if isinstance(p, (Equal, Member, Subset)):
        a, b = _value_of(p.left, defs), _value_of(p.right, defs)
        if a is None or b is None:
            return None
        if isinstance(p, Equal):
            return _same(a, b) if _ground(a) and _ground(b) else None
        if not isinstance(b, SetLit):
            return None
        if isinstance(p, Member):
            return any(_same(a, y) for y in b.items)
        if not isinstance(a, SetLit):
            return None
        return all(any(_same(x, y) for y in b.items) for x in a.items)
    return None


# ---------------------------------------------------------------------------
# Reduction graphs and convergence

ALWAYS = "AlwaysConverges"
DIVERGENT = "HasDivergentPath"
UNKNOWN = "Unknown"


@dataclass
class ReductionGraph:
    root: object
    nodes: dict = field(default_factory=dict)      # canonical -> representative
    edges: dict = field(default_factory=dict)      # canonical -> set of canonical
    rules: dict = field(default_factory=dict)      # (src, dst) -> axiom name
    depth: dict = field(default_factory=dict)      # canonical -> choice depth
    frontier: set = field(default_factory=set)
    node_limit_hit: bool = False
    depth_limit_hit: bool = False

    def normal_forms(self):
        return {self.nodes[k] for k, succ in self.edges.items() if not succ}

    def to_dot(self) -> str:
        ids = {k: i for i, k in enumerate(sorted(self.nodes, key=lambda k: (self.depth.get(k, 0), print_expr(k))))}
        lines = ["digraph reductions {", "  node [shape=box];"]
        for k, i in ids.items():
            label = print_expr(self.nodes[k]).replace("\\", "\\\\").replace('"', '\\"')
            extra = ", style=bold" if k == canonical(self.root) else ""
            if k in self.frontier:
                extra += ", style=dashed"
            lines.append(f'  n{i} [label="{label}"{extra}];')
        for k in sorted(self.edges, key=ids.get):
            for d in sorted(self.edges[k], key=ids.get):
                lines.append(f'  n{ids[k]} -> n{ids[d]} [label="{self.rules.get((k, d), "")}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ConvergenceVerdict:
    kind: str
    values: frozenset
    witness: Optional[tuple] = None     # (start, later) with later containing start
    limits_hit: bool = False

    @property
    def stuck(self):
        return frozenset(v for v in self.values if not is_value(v))


def explore(e, max_nodes=10_000, max_depth=50, defs=None) -> ReductionGraph:
    """Breadth-first reduction graph; choice edges cost one unit of depth."""
    if max_nodes <= 0 or max_depth < 0:
        raise LamError("limits must be positive")
    free = free_variables(e)
    if free:
        raise LamError(f"free variable(s) {', '.join(sorted(free))} in {print_expr(e)}")
    defs = _defs(defs)
    g = ReductionGraph(root=e)
    root = canonical(e)
    g.nodes[root] = e
    g.depth[root] = 0
    queue = deque([root])
    while queue:
        k = queue.popleft()
        if k in g.edges:
            continue
        d = g.depth[k]
        succ = {}
        for ax, r in reductions(g.nodes[k], defs):
            succ.setdefault(canonical(r), (ax, r))
        if d >= max_depth and any(ax.startswith("choice") for ax, _ in succ.values()):
            g.frontier.add(k)
            g.depth_limit_hit = True
            continue
        if len(g.nodes) + sum(1 for c in succ if c not in g.nodes) > max_nodes:
            g.frontier.add(k)
            g.node_limit_hit = True
            continue
        g.edges[k] = set(succ)
        for c, (ax, r) in succ.items():
            g.rules[(k, c)] = ax
            nd = d + (1 if ax.startswith("choice") else 0)
            if c not in g.nodes:
                g.nodes[c] = r
                g.depth[c] = nd
                # deterministic steps go first so depth stays minimal
                (queue.appendleft if nd == d else queue.append)(c)
            elif nd < g.depth[c]:
                g.depth[c] = nd
    for k in g.nodes:
        if k not in g.edges:
            g.frontier.add(k)
    return g


def _eval_positions(e):
    """Subterms in reduction contexts (where a reduct would propagate)."""
    if isinstance(e, Apply):
        subs = (e.op,) + e.args
    elif isinstance(e, IfThenElse):
        subs = (e.cond,)
    elif isinstance(e, (Seq, SetLit)):
        subs = e.items
    elif isinstance(e, SeqCons):
        subs = (e.head, e.tail)
    elif isinstance(e, SetComp):
        subs = (e.domain,)
    else:
        subs = ()
    for s in subs:
        yield s
        yield from _eval_positions(s)


def _reach_bits(g: ReductionGraph):
    """Node index plus, per node, the bitset of nodes reachable in one or
    more steps.  Strongly connected components first, then one sweep over
    the condensation in reverse topological order."""
    keys = list(g.nodes)
    index = {k: i for i, k in enumerate(keys)}
    succ = [[index[d] for d in g.edges.get(k, ())] for k in keys]
    comp = _sccs(succ)
    ncomp = max(comp, default=-1) + 1
    members = [[] for _ in range(ncomp)]
    for v, c in enumerate(comp):
        members[c].append(v)
    # Tarjan numbers components in reverse topological order
    creach = [0] * ncomp
    cmask = [0] * ncomp
    for c in range(ncomp):
        m = 0
        for v in members[c]:
            m |= 1 << v
        cmask[c] = m
    for c in range(ncomp):
        bits = 0
        cyclic = len(members[c]) > 1
        for v in members[c]:
            for w in succ[v]:
                cw = comp[w]
                if cw == c:
                    cyclic = True
                else:
                    bits |= cmask[cw] | creach[cw]
        if cyclic:
            bits |= cmask[c]
        creach[c] = bits
    return index, [creach[comp[v]] for v in range(len(keys))]


def _sccs(succ):
    """Iterative Tarjan; returns the component number of every vertex."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack, counter, ncomp = [], 0, 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            while i < len(succ[v]):
                w = succ[v][i]
                i += 1
                if index[w] == -1:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp


def divergence_witness(g: ReductionGraph):
    """A node reachable from itself, or a node e reaching C[e] in a reduction context."""
    index, reach = _reach_bits(g)
    for k in sorted(g.edges, key=lambda k: g.depth[k]):
        i = index[k]
        if reach[i] >> i & 1:
            return (g.nodes[k], g.nodes[k])
    for m in sorted(g.nodes, key=lambda k: g.depth[k]):
        j = index[m]
        for s in _eval_positions(m):
            if s in index and s != m and reach[index[s]] >> j & 1:
                return (g.nodes[s], g.nodes[m])
    return None


def classify(e, max_nodes=10_000, max_depth=50, defs=None) -> ConvergenceVerdict:
    g = explore(e, max_nodes, max_depth, defs)
    values = frozenset(g.normal_forms())
    limits = g.node_limit_hit or g.depth_limit_hit
    w = divergence_witness(g)
    if w is not None:
        return ConvergenceVerdict(DIVERGENT, values, w, limits)
    if not g.frontier or not limits:
        return ConvergenceVerdict(ALWAYS, values, None, False)
    return ConvergenceVerdict(UNKNOWN, values, None, True)


def normal_forms(e, max_nodes=10_000, max_depth=50, defs=None) -> frozenset:
    return classify(e, max_nodes, max_depth, defs).values


def unique_reduct(e, max_nodes=10_000, max_depth=50, defs=None) -> bool:
    v = classify(e, max_nodes, max_depth, defs)
    return v.kind == ALWAYS and len(v.values) == 1


def eval_sets(e, max_nodes=10_000, max_depth=50, defs=None):
    """The single value of a deterministic set/arithmetic expression."""
    v = classify(e, max_nodes, max_depth, defs)
    if v.kind != ALWAYS or len(v.values) != 1:
        raise LamError(f"{print_expr(e)} has no unique value ({v.kind}, {len(v.values)} normal forms)")
    (out,) = v.values
    if not is_value(out):
        raise LamError(f"{print_expr(e)} is stuck at {print_expr(out)}")
    return out


# ---------------------------------------------------------------------------
# Fixed points

def _theta(f):
    avoid = free_names(f)
    g = fresh_name("g", avoid) if "g" in avoid else "g"
    x = fresh_name("x", avoid | {g}) if "x" in avoid else "x"
    G, X = Atom(g, "identifier"), Atom(x, "identifier")
    return Lam((g,), Apply(f, (Lam((x,), Apply(Apply(G, (G,)), (X,))),)))


def build_fix(f):
    """Θ(Θ) where Θ ≡ λ(g) f(λ(x) (g(g))(x))."""
    t = _theta(f)
    return Apply(t, (t,))


def eta_step(e):
    """``λ(x) M(x)`` to ``M`` when x is not free in M; None if not an η-redex."""
    if isinstance(e, Lam) and len(e.params) == 1 and isinstance(e.body, Apply):
        (x,) = e.params
        b = e.body
        if b.args == (Atom(x, "identifier"),) and x not in free_names(b.op):
            return b.op
    return None


def eta_contract(e):
    """η-contract everywhere outside quoted material."""
    r = eta_step(e)
    if r is not None:
        return eta_contract(r)
    if isinstance(e, (Reified, ReifiedExpr, SentenceExpr, PropLam)):
        return e
    from .syntax import map_children
    return map_children(e, eta_contract)


@dataclass(frozen=True)
class FixLine:
    expr: object
    justification: str
    ok: bool
    detail: str = ""


def fix_replay(f, defs=None) -> list:
    """Replay Fix(f) = Θ(Θ) = … = f(Fix(f)) line by line."""
    t = _theta(f)
    fix = Apply(t, (t,))
    g, x = t.params[0], t.body.args[0].params[0]
    G, X = Atom(g, "identifier"), Atom(x, "identifier")
    template = Lam((g,), Apply(f, (Lam((x,), Apply(Apply(G, (G,)), (X,))),)))
    line1 = Apply(t, (t,))
    line2 = Apply(template, (t,))
    line3 = Apply(f, (Lam((x,), Apply(Apply(t, (t,)), (X,))),))
    line4 = Apply(f, (Apply(t, (t,)),))
    line5 = Apply(f, (build_fix(f),))
    lines = [
        FixLine(line1, "definition of Fix", struct_equiv(line1, fix)),
        FixLine(line2, "definition of Θ", struct_equiv(line2, line1)),
        FixLine(line3, "β-reduction", any(struct_equiv(r, line3) for r in step(line2, defs))),
        FixLine(line4, "functional abstraction on Θ(Θ)",
                struct_equiv(eta_step(line3.args[0]), line4.args[0])
                and struct_equiv(line3.op, line4.op)),
        FixLine(line5, "definition of Fix", struct_equiv(line5, line4)),
    ]
    return lines


def reaches_fixed_point(f, max_nodes=2000, defs=None) -> bool:
    """Does Fix(f) reduce to f applied to something η-equal to Fix(f)?"""
    fix = build_fix(f)
    target = canonical(eta_contract(Apply(f, (fix,))))
    g = explore(fix, max_nodes=max_nodes, max_depth=0, defs=defs)
    return any(canonical(eta_contract(n)) == target for n in g.nodes.values())
