"""Abstract syntax for propositions, expressions, statements and sentences.

All nodes are frozen dataclasses, so they hash and compare structurally.
Binding constructs (``Lam``, ``PropLam``, ``SetComp``) are handled by the
generic traversal helpers at the bottom of the module.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Union


# ---------------------------------------------------------------------------
# Sentences (concrete XML-ish trees)

@dataclass(frozen=True)
class Token:
    text: str


@dataclass(frozen=True)
class Element:
    tag: str
    attrs: tuple = ()          # sorted tuple of (key, value)
    children: tuple = ()

    def attr(self, key, default=None):
        for k, v in self.attrs:
            if k == key:
                return v
        return default


Sentence = Union[Token, Element]


def element(tag, *children, **attrs):
    return Element(tag, tuple(sorted(attrs.items())), tuple(children))


def sentence_to_xml(s) -> str:
    if isinstance(s, Token):
        return _xml_escape(s.text)
    attrs = "".join(f' {k}="{_xml_escape(v)}"' for k, v in s.attrs)
    if not s.children:
        return f"<{s.tag}{attrs}/>"
    inner = "".join(sentence_to_xml(c) for c in s.children)
    return f"<{s.tag}{attrs}>{inner}</{s.tag}>"


def _xml_escape(text):
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def _xml_unescape(text):
    return (text.replace("&quot;", '"').replace("&gt;", ">")
            .replace("&lt;", "<").replace("&amp;", "&"))


def xml_to_sentence(text: str):
    """Parse the strict XML subset produced by :func:`sentence_to_xml`."""
    pos = 0

    def node():
        nonlocal pos
        if text.startswith("<", pos):
            end = text.index(">", pos)
            head = text[pos + 1:end]
            selfclosing = head.endswith("/")
            if selfclosing:
                head = head[:-1]
            parts = head.strip().split(" ", 1)
            tag = parts[0]
            attrs = {}
            rest = parts[1] if len(parts) > 1 else ""
            while rest.strip():
                rest = rest.strip()
                key, _, rest = rest.partition("=")
                if not rest.startswith('"'):
                    raise ValueError(f"bad attribute near {rest!r}")
                close = rest.index('"', 1)
                attrs[key.strip()] = _xml_unescape(rest[1:close])
                rest = rest[close + 1:]
            pos = end + 1
            kids = []
            if not selfclosing:
                closing = f"</{tag}>"
                while not text.startswith(closing, pos):
                    if pos >= len(text):
                        raise ValueError(f"unterminated <{tag}>")
                    kids.append(node())
                pos += len(closing)
            return Element(tag, tuple(sorted(attrs.items())), tuple(kids))
        end = text.find("<", pos)
        end = len(text) if end < 0 else end
        chunk = text[pos:end]
        pos = end
        return Token(_xml_unescape(chunk))

    out = node()
    if pos != len(text):
        raise ValueError(f"trailing data at offset {pos}")
    return out


# ---------------------------------------------------------------------------
# Expressions

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Expr):
    name: str
    kind: str = "constant"     # constant | variable | identifier
    sort: Optional[str] = None


@dataclass(frozen=True)
class Num(Expr):
    n: int


@dataclass(frozen=True)
class Apply(Expr):
    op: Expr
    args: tuple


@dataclass(frozen=True)
class Lam(Expr):
    params: tuple
    body: Expr


@dataclass(frozen=True)
class Choice(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IfThenElse(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


@dataclass(frozen=True)
class Seq(Expr):
    items: tuple


@dataclass(frozen=True)
class SeqCons(Expr):
    head: Expr
    tail: Expr


@dataclass(frozen=True)
class SetComp(Expr):
    var: str
    domain: Expr
    pred: "Prop"


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple


EmptySet = SetLit(())


@dataclass(frozen=True)
class Reified(Expr):
    prop: "Prop"
    theory: str


@dataclass(frozen=True)
class ReifiedExpr(Expr):
    expr: Expr
    theory: str


@dataclass(frozen=True)
class PropLam(Expr):
    """``λ(x…) Φ``: a lambda whose body is a proposition."""
    params: tuple
    body: "Prop"


@dataclass(frozen=True)
class SentenceExpr(Expr):
    """Ground sentence data embedded in expressions."""
    sentence: object


TRUE = Atom("True")
FALSE = Atom("False")


# ---------------------------------------------------------------------------
# Propositions

class Prop:
    __slots__ = ()


@dataclass(frozen=True)
class Neg(Prop):
    p: Prop


@dataclass(frozen=True)
class And(Prop):
    left: Prop
    right: Prop


@dataclass(frozen=True)
class Or(Prop):
    left: Prop
    right: Prop


@dataclass(frozen=True)
class Implies(Prop):
    left: Prop
    right: Prop


@dataclass(frozen=True)
class Iff(Prop):
    left: Prop
    right: Prop


@dataclass(frozen=True)
class Inference(Prop):
    theory: str
    antecedents: tuple
    consequents: tuple

    def __post_init__(self):
        if not self.consequents:
            raise ValueError("an inference needs at least one consequent")
        if not self.theory:
            raise ValueError("theory name must be nonempty")


@dataclass(frozen=True)
class Pred(Prop):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Equal(Prop):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Member(Prop):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Subset(Prop):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Reduces(Prop):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Converges(Prop):
    expr: Expr


@dataclass(frozen=True)
class ConvergesTo(Prop):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Irreducible(Prop):
    expr: Expr


@dataclass(frozen=True)
class UniqueReduct(Prop):
    expr: Expr


@dataclass(frozen=True)
class Abstracted(Prop):
    expr: Expr
    theory: str


BINARY_CONNECTIVES = (And, Or, Implies, Iff)


def turnstile(theory, antecedents, consequents):
    return Inference(theory, tuple(antecedents), tuple(consequents))


def holds(theory, p):
    """``⊢T p``"""
    return Inference(theory, (), (p,))


def not_inferable(theory, p):
    """``⊬T p``, represented as ``¬(⊢T p)``."""
    return Neg(holds(theory, p))


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: Optional[str] = None


@dataclass(frozen=True)
class Statement:
    vars: tuple
    body: Prop

    @property
    def closed(self):
        return not self.vars


def closed_statement(p):
    return Statement((), p)


# ---------------------------------------------------------------------------
# Generic traversal

_FIELDS: dict = {}


def _node_fields(node):
    cls = type(node)
    fs = _FIELDS.get(cls)
    if fs is None:
        fs = _FIELDS[cls] = dataclasses.fields(cls)
    return fs


def is_node(x):
    return isinstance(x, (Expr, Prop))


def children(node):
    """Direct sub-nodes (expressions and propositions), in field order."""
    if isinstance(node, SentenceExpr):
        return []
    out = []
    for f in _node_fields(node):
        v = getattr(node, f.name)
        if is_node(v):
            out.append(v)
        elif isinstance(v, tuple):
            out.extend(x for x in v if is_node(x))
    return out


def map_children(node, fn: Callable):
    """Rebuild ``node`` with ``fn`` applied to every direct sub-node."""
    if isinstance(node, SentenceExpr):
        return node
    changes = {}
    for f in _node_fields(node):
        v = getattr(node, f.name)
        if is_node(v):
            nv = fn(v)
            if nv is not v:
                changes[f.name] = nv
        elif isinstance(v, tuple) and any(is_node(x) for x in v):
            nv = tuple(fn(x) if is_node(x) else x for x in v)
            if any(a is not b for a, b in zip(nv, v)):
                changes[f.name] = nv
    return dataclasses.replace(node, **changes) if changes else node


def binder_names(node):
    if isinstance(node, (Lam, PropLam)):
        return tuple(node.params)
    if isinstance(node, SetComp):
        return (node.var,)
    return ()


def walk(node):
    yield node
    for c in children(node):
        yield from walk(c)


def free_names(node, bound=frozenset()):
    """Names of atoms not captured by an enclosing binder."""
    out = set()
    _free(node, bound, out)
    return out


def _free(node, bound, out):
    if isinstance(node, Atom):
        if node.name not in bound:
            out.add(node.name)
        return
    if isinstance(node, SetComp):
        _free(node.domain, bound, out)
        _free(node.pred, bound | {node.var}, out)
        return
    inner = bound | set(binder_names(node))
    for c in children(node):
        _free(c, inner, out)


def free_variables(node):
    """Free atoms that are not constants (statement variables or identifiers)."""
    out = set()

    def go(n, bound):
        if isinstance(n, Atom):
            if n.name not in bound and n.kind != "constant":
                out.add(n.name)
            return
        if isinstance(n, SetComp):
            go(n.domain, bound)
            go(n.pred, bound | {n.var})
            return
        inner = bound | set(binder_names(n))
        for c in children(n):
            go(c, inner)

    go(node, frozenset())
    return out


def fresh_name(base, avoid):
    stem = base.rstrip("0123456789").rstrip("_") or "v"
    for i in itertools.count(1):
        cand = f"{stem}_{i}"
        if cand not in avoid:
            return cand


def substitute(node, mapping: Mapping[str, Expr]):
    """Capture-avoiding substitution of atoms by expressions."""
    if not mapping:
        return node
    fv_vals = set()
    for v in mapping.values():
        fv_vals |= free_names(v)
    return _subst(node, dict(mapping), fv_vals)


def _subst(node, mapping, fv_vals):
    if not mapping:
        return node
    if isinstance(node, Atom):
        return mapping.get(node.name, node)
    if isinstance(node, SentenceExpr):
        return node
    if isinstance(node, (Lam, PropLam)):
        inner = {k: v for k, v in mapping.items() if k not in node.params}
        if not inner:
            return node
        params = list(node.params)
        body = node.body
        avoid = fv_vals | free_names(body) | set(params) | set(inner)
        for i, p in enumerate(params):
            if p in fv_vals:
                q = fresh_name(p, avoid)
                avoid.add(q)
                body = _subst(body, {p: Atom(q, "identifier")}, {q})
                params[i] = q
        return dataclasses.replace(node, params=tuple(params),
                                   body=_subst(body, inner, fv_vals))
    if isinstance(node, SetComp):
        dom = _subst(node.domain, mapping, fv_vals)
        inner = {k: v for k, v in mapping.items() if k != node.var}
        var, pred = node.var, node.pred
        if inner and var in fv_vals:
            q = fresh_name(var, fv_vals | free_names(pred) | set(inner))
            pred = _subst(pred, {var: Atom(q, "identifier")}, {q})
            var = q
        return SetComp(var, dom, _subst(pred, inner, fv_vals))
    return map_children(node, lambda c: _subst(c, mapping, fv_vals))


def canonical(node, _depth=0, _env=None):
    """α-normal form: every bound identifier renamed by binding depth.

    Two terms are α-equivalent iff their canonical forms are equal.
    """
    env = _env or {}
    if _binder_free(node) and not (env and _mentions(node, env)):
        return node
    if isinstance(node, Atom):
        if node.name in env:
            return Atom(env[node.name], "identifier")
        return node
    if isinstance(node, SentenceExpr):
        return node
    if isinstance(node, (Lam, PropLam)):
        new_env = dict(env)
        params = []
        d = _depth
        for p in node.params:
            nm = f"%{d}"
            new_env[p] = nm
            params.append(nm)
            d += 1
        body = canonical(node.body, d, new_env)
        return dataclasses.replace(node, params=tuple(params), body=body)
    if isinstance(node, SetComp):
        dom = canonical(node.domain, _depth, env)
        nm = f"%{_depth}"
        pred = canonical(node.pred, _depth + 1, {**env, node.var: nm})
        return SetComp(nm, dom, pred)
    return map_children(node, lambda c: canonical(c, _depth, env))


def _binder_free(node) -> bool:
    bf = node.__dict__.get("_bf")
    if bf is None:
        bf = not isinstance(node, (Lam, PropLam, SetComp, SentenceExpr)) and \
            all(_binder_free(c) for c in children(node))
        object.__setattr__(node, "_bf", bf)
    return bf


def _mentions(node, env) -> bool:
    names = node.__dict__.get("_names")
    if names is None:
        names = frozenset(n.name for n in walk(node) if isinstance(n, Atom))
        object.__setattr__(node, "_names", names)
    return not names.isdisjoint(env)


def struct_equiv(a, b) -> bool:
    """Equality up to renaming of λ-bound identifiers, nothing more."""
    if a is b:
        return True
    if isinstance(a, Statement) and isinstance(b, Statement):
        return statement_equiv(a, b)
    return canonical(a) == canonical(b)


def statement_equiv(a: Statement, b: Statement) -> bool:
    if len(a.vars) != len(b.vars):
        return False
    if [v.sort for v in a.vars] != [v.sort for v in b.vars]:
        return False
    ren = {vb.name: Atom(va.name, "variable") for va, vb in zip(a.vars, b.vars)}
    return struct_equiv(a.body, substitute(b.body, ren))


def _strip_kinds(node):
    if isinstance(node, Atom):
        return Atom(node.name)
    return map_children(node, _strip_kinds)


# ---------------------------------------------------------------------------
# Statements: instantiation and negation

class InstantiationError(ValueError):
    pass


def _sort_guard(pairs):
    guard = None
    for expr, sort in pairs:
        m = Member(expr, Atom(sort))
        guard = m if guard is None else And(guard, m)
    return guard


def instantiate(stmt: Statement, bindings: Mapping[str, Expr]) -> Prop:
    """Instantiate every variable of ``stmt``.

    Sorted variables turn into a membership guard, so instantiating
    ``p,q:Humans: Φ`` yields ``(a ∈ Humans ∧ b ∈ Humans) ⇒ Φ[a,b]``.
    """
    names = [v.name for v in stmt.vars]
    missing = [n for n in names if n not in bindings]
    if missing:
        raise InstantiationError(f"missing binding for {', '.join(missing)}")
    extra = set(bindings) - set(names)
    if extra:
        raise InstantiationError(f"binding for undeclared variable {sorted(extra)}")
    for v in stmt.vars:
        e = bindings[v.name]
        if v.sort and isinstance(e, Atom) and e.sort and e.sort != v.sort:
            raise InstantiationError(
                f"sort mismatch: {v.name} is {v.sort} but {e.name} is {e.sort}")
    body = substitute(stmt.body, {n: bindings[n] for n in names})
    guard = _sort_guard([(bindings[v.name], v.sort) for v in stmt.vars if v.sort])
    return Implies(guard, body) if guard is not None else body


def skolemize(stmt: Statement) -> Prop:
    """Replace each variable by a fresh Skolem constant ``name_sk_k``."""
    used = free_names(stmt.body)
    bindings = {}
    for k, v in enumerate(stmt.vars, start=1):
        cand = f"{v.name}_sk_{k}"
        while cand in used:
            cand += "_"
        used.add(cand)
        bindings[v.name] = Atom(cand)
    return instantiate(stmt, bindings)


def negate_statement(stmt: Statement) -> Prop:
    return Neg(skolemize(stmt))


# ---------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYM = {Iff: "<=>", Implies: "=>", Or: "\\/", And: "/\\"}


def print_prop(p, ctx=0) -> str:
    if isinstance(p, Inference):
        s = _print_inference(p)
        return f"({s})" if ctx > 0 else s
    if isinstance(p, BINARY_CONNECTIVES):
        prec = _PREC[type(p)]
        if isinstance(p, Implies):
            lhs = print_prop(p.left, prec + 1)
            rhs = print_prop(p.right, prec)
        elif isinstance(p, Iff):
            lhs = print_prop(p.left, prec + 1)
            rhs = print_prop(p.right, prec + 1)
        else:
            lhs = print_prop(p.left, prec)
            rhs = print_prop(p.right, prec + 1)
        s = f"{lhs} {_SYM[type(p)]} {rhs}"
        return f"({s})" if ctx > prec else s
    if isinstance(p, Neg):
        return "~" + print_prop(p.p, 9)
    if isinstance(p, Pred):
        if not p.args:
            return p.name
        return f"{p.name}[{', '.join(print_expr(a) for a in p.args)}]"
    rel = {Equal: "=", Member: "in", Subset: "subset", Reduces: "~>",
           ConvergesTo: "!>"}
    if type(p) in rel:
        s = f"{print_expr(p.left, 1)} {rel[type(p)]} {print_expr(p.right, 1)}"
        return f"({s})" if ctx >= 9 else s
    if isinstance(p, Converges):
        return "!" + print_expr(p.expr, 9)
    if isinstance(p, Irreducible):
        s = "irred " + print_expr(p.expr, 9)
        return f"({s})" if ctx >= 9 else s
    if isinstance(p, UniqueReduct):
        s = "uniq " + print_expr(p.expr, 9)
        return f"({s})" if ctx >= 9 else s
    if isinstance(p, Abstracted):
        return f"abstract{{{p.theory}}}({print_expr(p.expr)})"
    raise TypeError(f"not a proposition: {p!r}")


def _print_inference(p: Inference):
    ante = ", ".join(print_prop(a, 1) for a in p.antecedents)
    cons = ", ".join(print_prop(c, 1) for c in p.consequents)
    head = f"{ante} " if ante else ""
    return f"{head}|-{{{p.theory}}} {cons}"


def print_expr(e, ctx=0) -> str:
    # ctx: 0 anywhere, 1 inside relation/choice operand, 2 additive operand,
    # 3 multiplicative operand, 9 needs an atomic form
    if isinstance(e, Atom):
        return f"{e.sort}::{e.name}" if e.sort else e.name
    if isinstance(e, Num):
        return str(e.n)
    if isinstance(e, Apply):
        if isinstance(e.op, Atom) and e.op.name in _INFIX and len(e.args) == 2:
            prec = _INFIX[e.op.name]
            s = (f"{print_expr(e.args[0], prec)} {e.op.name} "
                 f"{print_expr(e.args[1], prec + 1)}")
            return f"({s})" if ctx > prec else s
        return f"{print_expr(e.op, 9)}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, Lam):
        s = f"fun({', '.join(e.params)}) {print_expr(e.body)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, PropLam):
        s = f"pfun({', '.join(e.params)}) {print_prop(e.body, 1)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, Choice):
        s = f"{print_expr(e.left, 1)} ?| {print_expr(e.right)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, IfThenElse):
        s = (f"if {print_expr(e.cond)} then {print_expr(e.then)} "
             f"else {print_expr(e.orelse)}")
        return f"({s})" if ctx > 0 else s
    if isinstance(e, Seq):
        return "[" + ", ".join(print_expr(x) for x in e.items) + "]"
    if isinstance(e, SeqCons):
        return f"[{print_expr(e.head)} <| {print_expr(e.tail)}]"
    if isinstance(e, SetLit):
        return "{" + ", ".join(print_expr(x) for x in e.items) + "}"
    if isinstance(e, SetComp):
        return f"{{{e.var} in {print_expr(e.domain)} | {print_prop(e.pred, 1)}}}"
    if isinstance(e, Reified):
        return f"reify{{{e.theory}}}({print_prop(e.prop)})"
    if isinstance(e, ReifiedExpr):
        return f"reifyx{{{e.theory}}}({print_expr(e.expr)})"
    if isinstance(e, SentenceExpr):
        return "xml" + _quote(sentence_to_xml(e.sentence))
    raise TypeError(f"not an expression: {e!r}")


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_INFIX = {"+": 2, "-": 2, "*": 3, "%": 3}


def print_statement(s) -> str:
    if isinstance(s, Prop):
        return print_prop(s)
    if not s.vars:
        return print_prop(s.body)
    groups = []
    for v in s.vars:
        if groups and groups[-1][1] == v.sort:
            groups[-1][0].append(v.name)
        else:
            groups.append(([v.name], v.sort))
    if len(groups) == 1:
        names, sort = groups[0]
        head = ", ".join(names) + (f": {sort}" if sort else "")
        return f"{head}: {print_prop(s.body)}"
    # mixed sorts: fall back to one sorted group per variable
    head = ", ".join(f"{v.sort}::{v.name}" if v.sort else v.name for v in s.vars)
    return f"{head}: {print_prop(s.body)}"


def show(x) -> str:
    if isinstance(x, Statement):
        return print_statement(x)
    if isinstance(x, Prop):
        return print_prop(x)
    if isinstance(x, Expr):
        return print_expr(x)
    if isinstance(x, (Token, Element)):
        return sentence_to_xml(x)
    return str(x)


# Terms are hashed over and over by the decision procedure and the kernel
# closure; the generated dataclass hash walks the whole tree every time.
def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, n) for n in self._hash_fields))
        object.__setattr__(self, "_hash", h)
    return h


for _cls in list(Expr.__subclasses__()) + list(Prop.__subclasses__()):
    if dataclasses.is_dataclass(_cls):
        _cls._hash_fields = tuple(f.name for f in dataclasses.fields(_cls))
        _cls.__hash__ = _cached_hash
