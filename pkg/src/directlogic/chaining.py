"""Forward and backward chaining over monotonic per-theory assertion stores.

A store only ever grows.  Forward rules (``when ⊢t pattern …``) fire once per
new binding; backward rules (``when ?t goal …``) reduce a goal to subgoals.
Inference-shaped assertions ``A₁, …, Aₖ ⊢t C`` act as both: forward they
detach C once every Aᵢ is asserted, backward the goal C reduces to the Aᵢ.
They are never used contrapositively, and absence of a proposition is
never read as its negation.
"""

from __future__ import annotations

import dataclasses
import random
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .parser import ParseError, parse_expr, parse_statement
from .syntax import (
    Apply, Atom, Inference, Prop, SentenceExpr, Statement, VarDecl,
    free_variables, is_node, map_children, print_expr, print_prop,
    substitute, walk,
)


class ChainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Patterns

def pattern_vars(pattern) -> dict:
    """Variable name -> sort (None when untyped) of a pattern."""
    out = {}
    if isinstance(pattern, Statement):
        for v in pattern.vars:
            out[v.name] = v.sort
        body = pattern.body
    else:
        body = pattern
    for n in walk(body):
        if isinstance(n, Atom) and n.kind == "variable":
            if out.get(n.name) is None:
                out[n.name] = n.sort
    return out


def _body(pattern):
    return pattern.body if isinstance(pattern, Statement) else pattern


def _has_sort(expr, sort, sort_facts) -> bool:
    return sort in sort_facts.get(print_expr(expr), ())


def match_pattern(pattern, p, sort_facts=None, binding=None) -> Optional[dict]:
    """One-way match of ``pattern`` against the closed ``p``.

    Typed variables (``Animal::x``) only bind to expressions with a matching
    sort fact.
    """
    sort_facts = sort_facts or {}
    vars_ = pattern_vars(pattern)
    b = dict(binding or {})
    if _match(_body(pattern), p, vars_, sort_facts, b):
        return b
    return None


def _match(pat, term, vars_, sorts, b):
    if isinstance(pat, Atom) and pat.name in vars_:
        if pat.name in b:
            return b[pat.name] == term
        if not is_node(term) or isinstance(term, Prop):
            return False
        sort = vars_[pat.name]
        if sort is not None and not _has_sort(term, sort, sorts):
            return False
        b[pat.name] = term
        return True
    if type(pat) is not type(term):
        return False
    if isinstance(pat, Atom):
        return pat.name == term.name
    if isinstance(pat, SentenceExpr):
        return pat == term
    for f in dataclasses.fields(pat):
        x, y = getattr(pat, f.name), getattr(term, f.name)
        if is_node(x):
            if not _match(x, y, vars_, sorts, b):
                return False
        elif isinstance(x, tuple):
            if len(x) != len(y):
                return False
            for u, v in zip(x, y):
                if is_node(u):
                    if not _match(u, v, vars_, sorts, b):
                        return False
                elif u != v:
                    return False
        elif x != y:
            return False
    return True


def instantiate_pattern(pattern, binding):
    return substitute(_body(pattern), binding)


def _is_closed(p):
    return not free_variables(p)


def _key(binding):
    return tuple(sorted((k, print_expr(v)) for k, v in binding.items()))


# ---------------------------------------------------------------------------
# Rules and stores

@dataclass
class Rule:
    name: str
    kind: str                         # forward | backward
    antecedents: tuple                # patterns (bodies share one variable table)
    consequents: tuple = ()           # templates to assert / subgoals
    vars: dict = field(default_factory=dict)
    handler: Optional[Callable] = None
    emits: tuple = ()                 # expressions recorded as events

    def describe(self):
        lhs = ", ".join(print_prop(a) for a in self.antecedents)
        rhs = [print_prop(c) for c in self.consequents]
        rhs += [f"emit {print_expr(e)}" for e in self.emits]
        if self.handler is not None:
            rhs.append(f"call {getattr(self.handler, '__name__', 'handler')}")
        return f"{self.kind} {lhs} ==> {', '.join(rhs)}"


@dataclass
class Firing:
    rule: str
    binding: dict
    asserted: tuple


class TheoryStore:
    """Append-only assertions for one theory, plus its rules and sort facts."""

    def __init__(self, name: str):
        self.name = name
        self._assertions = []
        self._set = set()
        self.rules = []
        self.sort_facts = {}
        self.events = []
        self.pending = deque()
        self._fired = set()
        self._lock = threading.Lock()
        self._rule_count = 0
        self.log = []               # every firing, in order

    # -- reading
    @property
    def assertions(self):
        return tuple(self._assertions)

    def __contains__(self, p):
        return p in self._set

    def __len__(self):
        return len(self._assertions)

    # -- configuration
    def add_sort(self, const, sort):
        self.sort_facts.setdefault(const, set()).add(sort)

    def add_rule(self, kind, antecedents, consequents=(), vars_=None, name=None,
                 handler=None, emits=()):
        if kind not in ("forward", "backward"):
            raise ChainError(f"rule kind must be forward or backward, not {kind!r}")
        self._rule_count += 1
        vs = dict(vars_ or {})
        for a in tuple(antecedents) + tuple(consequents):
            for k, s in pattern_vars(a).items():
                if vs.get(k) is None:
                    vs[k] = s
        rule = Rule(name or f"r{self._rule_count}", kind, tuple(antecedents),
                    tuple(consequents), vs, handler, tuple(emits))
        self.rules.append(rule)
        if kind == "forward":
            # the rule sees everything already asserted
            for p in list(self._assertions):
                self._activate(rule, p)
        return rule

    def add_statement(self, stmt):
        """Axiom: closed facts are asserted; inference statements become rules too."""
        if isinstance(stmt, Prop):
            stmt = Statement((), stmt)
        body = stmt.body
        vars_ = {v.name: v.sort for v in stmt.vars}
        if isinstance(body, Inference) and body.theory == self.name:
            if not body.antecedents:
                for c in body.consequents:
                    if stmt.vars:
                        self.add_rule("forward", (), (c,), vars_, name="axiom")
                    else:
                        self.assert_prop(c)
                return
            name = f"axiom:{print_prop(body)}"
            self.add_rule("forward", body.antecedents, body.consequents, vars_, name=name)
            self.add_rule("backward", body.consequents, body.antecedents, vars_, name=name)
            if not stmt.vars:
                self.assert_prop(body)
            return
        if stmt.vars:
            raise ChainError("open axioms must be inferences")
        self.assert_prop(body)

    # -- forward chaining
    def _add(self, p):
        with self._lock:
            if p in self._set:
                return False
            self._set.add(p)
            self._assertions.append(p)
        if isinstance(p, Inference) and p.theory == self.name and p.antecedents:
            name = f"inference:{print_prop(p)}"
            self.add_rule("forward", p.antecedents, p.consequents, name=name)
            self.add_rule("backward", p.consequents, p.antecedents, name=name)
        for rule in list(self.rules):
            if rule.kind == "forward":
                self._activate(rule, p)
        return True

    def _activate(self, rule, new):
        """Queue every binding of ``rule`` that uses ``new`` for some antecedent."""
        if not rule.antecedents:
            if (rule.name, ()) not in self._fired and not rule.vars:
                self.pending.append((rule, {}))
            return
        for i, pat in enumerate(rule.antecedents):
            b = _match_with(pat, new, rule.vars, self.sort_facts, {})
            if b is None:
                continue
            rest = rule.antecedents[:i] + rule.antecedents[i + 1:]
            for full in self._join(rest, rule.vars, b):
                self.pending.append((rule, full))

    def _join(self, pats, vars_, b):
        if not pats:
            yield b
            return
        head, rest = pats[0], pats[1:]
        for q in list(self._assertions):
            b2 = _match_with(head, q, vars_, self.sort_facts, b)
            if b2 is not None:
                yield from self._join(rest, vars_, b2)

    def _fire(self, rule, binding):
        key = (rule.name, id(rule), _key(binding))
        with self._lock:
            if key in self._fired:
                return None
            self._fired.add(key)
        out = []
        for c in rule.consequents:
            q = substitute(c, binding)
            if not _is_closed(q):
                raise ChainError(f"rule {rule.name} asserts open {print_prop(q)}")
            if self._add(q):
                out.append(q)
        for e in rule.emits:
            self.events.append(substitute(e, binding))
        if rule.handler is not None:
            rule.handler(**{k: v for k, v in binding.items()})
        f = Firing(rule.name, dict(binding), tuple(out))
        with self._lock:
            self.log.append(f)
        return f

    def assert_prop(self, p) -> set:
        """Assert a closed proposition; fire the rules it newly enables.

        Returns the set of (rule name, binding key) fired.  Consequences of
        those firings are queued, not fired; :func:`run_to_quiescence`
        drains the queue.
        """
        if isinstance(p, Statement):
            if p.vars:
                raise ChainError("cannot assert an open statement")
            p = p.body
        if not _is_closed(p):
            raise ChainError(f"cannot assert open proposition {print_prop(p)}")
        before = len(self.pending)
        if not self._add(p):
            return set()
        mine = [self.pending[i] for i in range(before, len(self.pending))]
        fired = set()
        for rule, b in mine:
            if self._fire(rule, b) is not None:
                fired.add((rule.name, _key(b)))
        return fired


def _match_with(pat, term, vars_, sorts, b):
    b2 = dict(b)
    if _match(_body(pat), term, vars_, sorts, b2):
        return b2
    return None


# ---------------------------------------------------------------------------
# Running

@dataclass
class RunReport:
    theory: str
    firings: list
    assertion_count: int
    budget_exhausted: bool
    assertions: tuple = ()
    events: tuple = ()

    @property
    def quiescent(self):
        return not self.budget_exhausted

    def to_dict(self):
        return {
            "theory": self.theory,
            "firings": [{"rule": f.rule,
                         "binding": {k: print_expr(v) for k, v in sorted(f.binding.items())},
                         "asserted": [print_prop(p) for p in f.asserted]}
                        for f in self.firings],
            "assertion_count": self.assertion_count,
            "budget_exhausted": self.budget_exhausted,
            "assertions": sorted(print_prop(p) for p in self.assertions),
            "events": [print_expr(e) for e in self.events],
        }

    def to_text(self):
        lines = [f"theory {self.theory}"]
        for i, f in enumerate(self.firings, 1):
            b = ", ".join(f"{k}={print_expr(v)}" for k, v in sorted(f.binding.items()))
            got = "; ".join(print_prop(p) for p in f.asserted) or "-"
            lines.append(f"  firing {i}: {f.rule} [{b}] -> {got}")
        for e in self.events:
            lines.append(f"  event {print_expr(e)}")
        lines.append("assertions:")
        lines += [f"  {s}" for s in sorted(print_prop(p) for p in self.assertions)]
        status = "budget exhausted" if self.budget_exhausted else "quiescent"
        lines.append(f"result: {self.assertion_count} assertions, {len(self.firings)} firings, {status}")
        return "\n".join(lines) + "\n"


def run_to_quiescence(store: TheoryStore, max_firings: int = 10_000,
                      seed: Optional[int] = None, workers: int = 1) -> RunReport:
    """Fire queued rule activations until none remain or the budget runs out.

    ``seed=None`` is the deterministic FIFO reference scheduler; a seed picks
    activations in a random order instead.  ``workers > 1`` fires batches on a
    thread pool; the store's insert-if-absent is locked.
    """
    if max_firings <= 0:
        raise ChainError("max_firings must be positive")
    rng = random.Random(seed) if seed is not None else None
    firings = []
    exhausted = False
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while store.pending:
            if len(firings) >= max_firings:
                exhausted = True
                break
            if pool is not None:
                batch = []
                while store.pending and len(batch) < max_firings - len(firings):
                    batch.append(store.pending.popleft())
                for f in pool.map(lambda rb: store._fire(*rb), batch):
                    if f is not None:
                        firings.append(f)
                continue
            if rng is not None:
                i = rng.randrange(len(store.pending))
                store.pending.rotate(-i)
                rule, b = store.pending.popleft()
                store.pending.rotate(i)
            else:
                rule, b = store.pending.popleft()
            f = store._fire(rule, b)
            if f is not None:
                firings.append(f)
    finally:
        if pool is not None:
            pool.shutdown()
    return RunReport(store.name, list(store.log), len(store), exhausted,
                     store.assertions, tuple(store.events))


# ---------------------------------------------------------------------------
# Backward chaining

@dataclass
class QueryResult:
    theory: str
    goal: object
    bindings: list
    steps: int
    budget_exhausted: bool

    @property
    def succeeded(self):
        return bool(self.bindings)

    def to_text(self):
        head = f"?{self.theory} {print_prop(_body(self.goal))}"
        if not self.bindings:
            why = " (budget exhausted)" if self.budget_exhausted else ""
            return f"{head}: not established{why}\n"
        out = [f"{head}: established"]
        for b in self.bindings:
            if b:
                out.append("  " + ", ".join(f"{k}={print_expr(v)}" for k, v in sorted(b.items())))
        if self.budget_exhausted:
            out.append("  (budget exhausted; results may be partial)")
        return "\n".join(out) + "\n"


class _OutOfBudget(Exception):
    pass


def _rename(node, mapping):
    if isinstance(node, Atom) and node.name in mapping:
        return Atom(mapping[node.name], "variable", node.sort)
    if isinstance(node, SentenceExpr) or not is_node(node):
        return node
    return map_children(node, lambda c: _rename(c, mapping))


def _walk_var(t, s):
    while isinstance(t, Atom) and t.kind == "variable" and t.name in s:
        t = s[t.name]
    return t


def _resolve(t, s):
    t = _walk_var(t, s)
    if isinstance(t, SentenceExpr) or not is_node(t):
        return t
    return map_children(t, lambda c: _resolve(c, s))


def _occurs(name, t, s):
    t = _walk_var(t, s)
    if isinstance(t, Atom):
        return t.kind == "variable" and t.name == name
    return any(_occurs(name, c, s) for c in _node_children(t))


def _node_children(t):
    from .syntax import children
    return children(t) if is_node(t) else []


def _unify(a, b, s, sorts, varsorts):
    a, b = _walk_var(a, s), _walk_var(b, s)
    if a == b:
        return s
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Atom) and x.kind == "variable":
            if isinstance(y, Prop) or _occurs(x.name, y, s):
                return None
            sort = varsorts.get(x.name)
            if sort is not None and _is_closed(y) and not _has_sort(y, sort, sorts):
                return None
            s2 = dict(s)
            s2[x.name] = y
            return s2
    if type(a) is not type(b) or isinstance(a, Atom) or isinstance(a, SentenceExpr):
        return None
    for f in dataclasses.fields(a):
        x, y = getattr(a, f.name), getattr(b, f.name)
        if is_node(x):
            s = _unify(x, y, s, sorts, varsorts)
        elif isinstance(x, tuple):
            if len(x) != len(y):
                return None
            for u, v in zip(x, y):
                s = _unify(u, v, s, sorts, varsorts) if is_node(u) else (s if u == v else None)
                if s is None:
                    return None
        elif x != y:
            return None
        if s is None:
            return None
    return s


def _as_var_pattern(pattern):
    """Mark a goal's declared variables as variable atoms."""
    if isinstance(pattern, Statement) and pattern.vars:
        names = {v.name: v.sort for v in pattern.vars}

        def mark(n):
            if isinstance(n, Atom) and n.name in names:
                return Atom(n.name, "variable", n.sort or names[n.name])
            if isinstance(n, SentenceExpr) or not is_node(n):
                return n
            return map_children(n, mark)
        return mark(pattern.body), names
    body = _body(pattern)
    return body, pattern_vars(body)


def query_goal(store: TheoryStore, goal, budget: int = 10_000) -> QueryResult:
    """Backward chaining: all bindings of the goal's variables that can be established."""
    if budget <= 0:
        raise ChainError("budget must be positive")
    if isinstance(goal, str):
        goal = parse_statement(goal, store.name)
    body, gvars = _as_var_pattern(goal)
    varsorts = dict(gvars)
    counter = [0, 0]           # steps, fresh-name counter
    results = {}

    def tick():
        counter[0] += 1
        if counter[0] > budget:
            raise _OutOfBudget

    def solve(goals, s, ancestors):
        if not goals:
            yield s
            return
        g, rest = goals[0], goals[1:]
        for s2 in solve_one(g, s, ancestors):
            yield from solve(rest, s2, ancestors)

    def solve_one(g, s, ancestors):
        tick()
        gi = _resolve(g, s)
        key = print_prop(gi)
        if key in ancestors:
            return
        for q in list(store.assertions):
            s2 = _unify(gi, q, s, store.sort_facts, varsorts)
            if s2 is not None:
                tick()
                yield s2
        for rule in list(store.rules):
            if rule.kind != "backward":
                continue
            counter[1] += 1
            ren = {v: f"{v}#{counter[1]}" for v in rule.vars}
            for v, sort in rule.vars.items():
                varsorts[ren[v]] = sort
            for head in rule.antecedents:
                h = _rename(_mark(head, rule.vars), ren)
                s2 = _unify(gi, h, s, store.sort_facts, varsorts)
                if s2 is None:
                    continue
                subs = tuple(_rename(_mark(c, rule.vars), ren) for c in rule.consequents)
                for s3 in solve(subs, s2, ancestors | {key}):
                    established = _resolve(gi, s3)
                    if _is_closed(established) and _sorts_ok(s3, varsorts, store.sort_facts):
                        store.assert_prop(established)
                        yield s3

    exhausted = False
    try:
        for s in solve((body,), {}, frozenset()):
            b = {v: _resolve(Atom(v, "variable"), s) for v in gvars}
            if all(_is_closed(x) for x in b.values()) and _sorts_ok(s, varsorts, store.sort_facts):
                results.setdefault(_key(b), b)
    except _OutOfBudget:
        exhausted = True
    return QueryResult(store.name, goal, list(results.values()), min(counter[0], budget), exhausted)


def _mark(node, vars_):
    if isinstance(node, Atom) and node.name in vars_:
        return Atom(node.name, "variable", node.sort or vars_[node.name])
    if isinstance(node, SentenceExpr) or not is_node(node):
        return node
    return map_children(node, lambda c: _mark(c, vars_))


def _sorts_ok(s, varsorts, sorts):
    for v, sort in varsorts.items():
        if sort is None or v not in s:
            continue
        val = _resolve(s[v], s)
        if _is_closed(val) and not _has_sort(val, sort, sorts):
            return False
    return True


# ---------------------------------------------------------------------------
# .dlt theory files

@dataclass
class TheoryFile:
    store: TheoryStore
    bridges: list = field(default_factory=list)     # (script path, label, conclusion)


def _pattern_rule(text, theory, line_no):
    """``lhs ==> rhs`` with an optional ``x, y:`` variable prefix on lhs."""
    if "==>" not in text:
        raise ChainError(f"line {line_no}: expected '==>'")
    lhs, rhs = (s.strip() for s in text.split("==>", 1))
    emits = []
    props = []
    for part in _split_commas(rhs):
        if part.startswith("emit "):
            emits.append(parse_expr(part[5:].strip(), theory))
        else:
            props.append(part)
    joined = f"{lhs} |-{{{theory}}} {', '.join(props)}" if props else f"{lhs} |-{{{theory}}} True"
    try:
        stmt = parse_statement(joined, theory)
    except ParseError as exc:
        raise ChainError(f"line {line_no}: {exc}") from None
    body = stmt.body
    vars_ = {v.name: v.sort for v in stmt.vars}
    for a in body.antecedents:
        for k, s in pattern_vars(a).items():
            if vars_.get(k) is None:
                vars_[k] = s
    ante = tuple(_mark(a, vars_) for a in body.antecedents)
    cons = tuple(_mark(c, vars_) for c in body.consequents) if props else ()
    emits = tuple(_mark(e, vars_) for e in emits)
    return ante, cons, vars_, emits


def _split_commas(text):
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur).strip())
    return out


def parse_theory(text: str, base: Optional[Path] = None, name: str = "T") -> TheoryFile:
    """Build a store from ``.dlt`` lines (see module docs for the format)."""
    store = None
    pending = []
    theory = name
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "theory":
            if store is not None:
                raise ChainError(f"line {no}: 'theory' must come first")
            theory = rest
            continue
        if store is None:
            store = TheoryStore(theory)
        pending.append((no, word, rest))
    if store is None:
        store = TheoryStore(theory)
    tf = TheoryFile(store)
    # sorts and rules first, so that axioms fire them deterministically
    order = {"sort": 0, "forward": 1, "backward": 1, "axiom": 2, "bridge": 3}
    for no, word, rest in sorted(pending, key=lambda x: (order.get(x[1], 9), x[0])):
        if word == "sort":
            const, sep, sort = rest.partition(":")
            if not sep or not const.strip() or not sort.strip():
                raise ChainError(f"line {no}: expected 'sort <const> : <Sort>'")
            store.add_sort(const.strip(), sort.strip())
        elif word in ("forward", "backward"):
            ante, cons, vars_, emits = _pattern_rule(rest, theory, no)
            if word == "backward":
                if emits or len(ante) != 1:
                    raise ChainError(f"line {no}: backward rules take one goal pattern")
            store.add_rule(word, ante, cons, vars_, name=f"{word}@{no}", emits=emits)
        elif word == "axiom":
            try:
                stmt = parse_statement(rest, theory)
            except ParseError as exc:
                raise ChainError(f"line {no}: {exc}") from None
            store.add_statement(stmt)
        elif word == "bridge":
            parts = rest.split()
            if len(parts) != 2:
                raise ChainError(f"line {no}: expected 'bridge <script.dlp> <step>'")
            path = Path(parts[0])
            if base is not None and not path.is_absolute():
                path = base / path
            tf.bridges.append(bridge(store, path, parts[1]))
        else:
            raise ChainError(f"line {no}: unknown directive {word!r}")
    return tf


def load_theory(path) -> TheoryFile:
    path = Path(path)
    return parse_theory(path.read_text(), path.parent, path.stem)


def bridge(store: TheoryStore, script_path, label):
    """Assert the conclusion of a kernel-verified step.

    This is how results the engine cannot reach by pattern-directed chaining
    (self-refutation, for one) enter a store: only if the kernel verifies the
    whole script.
    """
    from .kernel import check_script, load_script
    script = load_script(script_path)
    steps = [s for s in script.steps if s.label == label]
    if not steps:
        raise ChainError(f"{script_path}: no step {label!r}")
    if not check_script(script).verified:
        raise ChainError(f"{script_path}: script does not verify; refusing to bridge")
    concl = steps[0].conclusion
    body = concl.body if isinstance(concl, Statement) else concl
    if isinstance(concl, Statement) and concl.vars:
        store.add_statement(concl)
    elif isinstance(body, Inference) and body.theory == store.name and not body.antecedents:
        for c in body.consequents:
            store.assert_prop(c)
    else:
        store.assert_prop(body)
    return (str(script_path), label, body)
