"""Reification of propositions into sentences, abstraction back, and the
diagonal constructions built from them.

Reification is canonical: one fixed sentence per proposition.  Abstraction
accepts a little more (whitespace tokens between children, padded
numerals), so ``reify(abstract(s))`` equals ``s`` only for canonical ``s``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from . import lam
from .kernel import Lemma
from .syntax import (
    Abstracted, And, Apply, Atom, Choice, Converges, ConvergesTo, Element,
    Equal, IfThenElse, Iff, Implies, Inference, Irreducible, Lam, Member, Neg,
    Num, Or, Pred, Prop, PropLam, Reduces, Reified, ReifiedExpr, SentenceExpr,
    Seq, SeqCons, SetComp, SetLit, Statement, Subset, Token, UniqueReduct,
    VarDecl, canonical, element, is_node, map_children, print_prop,
    sentence_to_xml, struct_equiv,
)


class MetaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Reification

_BINARY_PROPS = {And: "and", Or: "or", Implies: "implies", Iff: "iff"}
_EXPR_PAIRS = {Equal: "eq", Member: "member", Subset: "subset",
               Reduces: "reduces", ConvergesTo: "convto"}
_EXPR_ONES = {Converges: "converges", Irreducible: "irred", UniqueReduct: "uniq"}

PROP_TAGS = frozenset({"not", "infer", "pred", "abs", "forall"}
                      | set(_BINARY_PROPS.values()) | set(_EXPR_PAIRS.values())
                      | set(_EXPR_ONES.values()))
EXPR_TAGS = frozenset({"num", "atom", "apply", "lambda", "choice", "ifte", "seq",
                       "setcomp", "setlit", "reif"})
VOCABULARY = PROP_TAGS | EXPR_TAGS | {"ante", "cons", "var"}


def _var(name, sort=None):
    return element("var", name=name, **({"sort": sort} if sort else {}))


def reify(p, t: str = "T"):
    """⌈p⌉ as a sentence.  ``p`` may be a proposition, expression or statement."""
    if isinstance(p, Statement):
        if not p.vars:
            return reify(p.body, t)
        return element("forall", *[_var(v.name, v.sort) for v in p.vars], reify(p.body, t))
    if isinstance(p, Neg):
        return element("not", reify(p.p, t))
    if type(p) in _BINARY_PROPS:
        return element(_BINARY_PROPS[type(p)], reify(p.left, t), reify(p.right, t))
    if isinstance(p, Inference):
        return element("infer",
                       element("ante", *[reify(a, t) for a in p.antecedents]),
                       element("cons", *[reify(c, t) for c in p.consequents]),
                       theory=p.theory)
    if isinstance(p, Pred):
        return element("pred", *[reify(a, t) for a in p.args], name=p.name)
    if type(p) in _EXPR_PAIRS:
        return element(_EXPR_PAIRS[type(p)], reify(p.left, t), reify(p.right, t))
    if type(p) in _EXPR_ONES:
        return element(_EXPR_ONES[type(p)], reify(p.expr, t))
    if isinstance(p, Abstracted):
        return element("abs", reify(p.expr, t), theory=p.theory)
    return _reify_expr(p, t)


def _reify_expr(e, t):
    if isinstance(e, Num):
        return element("num", Token(str(e.n)))
    if isinstance(e, Atom):
        attrs = {"name": e.name}
        if e.kind != "constant":
            attrs["kind"] = e.kind
        if e.sort:
            attrs["sort"] = e.sort
        return element("atom", **attrs)
    if isinstance(e, Apply):
        return element("apply", reify(e.op, t), *[reify(a, t) for a in e.args])
    if isinstance(e, (Lam, PropLam)):
        return element("lambda", *[_var(x) for x in e.params], reify(e.body, t))
    if isinstance(e, Choice):
        return element("choice", reify(e.left, t), reify(e.right, t))
    if isinstance(e, IfThenElse):
        return element("ifte", reify(e.cond, t), reify(e.then, t), reify(e.orelse, t))
    if isinstance(e, Seq):
        return element("seq", *[reify(x, t) for x in e.items])
    if isinstance(e, SeqCons):
        return element("seq", reify(e.head, t), reify(e.tail, t), tail="true")
    if isinstance(e, SetComp):
        return element("setcomp", _var(e.var), reify(e.domain, t), reify(e.pred, t))
    if isinstance(e, SetLit):
        return element("setlit", *[reify(x, t) for x in e.items])
    if isinstance(e, Reified):
        return element("reif", reify(e.prop, t), theory=e.theory)
    if isinstance(e, ReifiedExpr):
        return element("reif", reify(e.expr, t), theory=e.theory)
    if isinstance(e, SentenceExpr):
        return element("reif", e.sentence, kind="sentence")
    raise MetaError(f"cannot reify {e!r}")


# ---------------------------------------------------------------------------
# Abstraction

def _kids(s: Element):
    return [c for c in s.children if not (isinstance(c, Token) and not c.text.strip())]


def _arity(s, n):
    kids = _kids(s)
    if len(kids) != n:
        raise MetaError(f"<{s.tag}> takes {n} children, got {len(kids)}")
    return kids


def _need(s, key):
    v = s.attr(key)
    if v is None:
        raise MetaError(f"<{s.tag}> needs attribute {key!r}")
    return v


def _var_decl(s):
    if not (isinstance(s, Element) and s.tag == "var"):
        raise MetaError("expected <var/>")
    return _need(s, "name"), s.attr("sort")


def abstract(s, t: str = "T"):
    """⌊s⌋ as a proposition (or a statement, for ``<forall>``)."""
    if not isinstance(s, Element):
        raise MetaError(f"bare token {s!r} is not a proposition")
    tag = s.tag
    if tag == "forall":
        kids = _kids(s)
        if len(kids) < 2:
            raise MetaError("<forall> needs variables and a body")
        decls = tuple(VarDecl(*_var_decl(v)) for v in kids[:-1])
        body = abstract(kids[-1], t)
        if isinstance(body, Statement):
            raise MetaError("nested <forall>")
        names = {d.name for d in decls}
        body = _mark_variables(body, names, dict((d.name, d.sort) for d in decls))
        return Statement(decls, body)
    if tag == "not":
        (a,) = _arity(s, 1)
        return Neg(_prop(a, t))
    for cls, name in _BINARY_PROPS.items():
        if tag == name:
            a, b = _arity(s, 2)
            return cls(_prop(a, t), _prop(b, t))
    if tag == "infer":
        ante, cons = _arity(s, 2)
        if not (isinstance(ante, Element) and ante.tag == "ante"
                and isinstance(cons, Element) and cons.tag == "cons"):
            raise MetaError("<infer> needs <ante> then <cons>")
        cs = tuple(_prop(c, t) for c in _kids(cons))
        if not cs:
            raise MetaError("<infer> needs at least one consequent")
        return Inference(_need(s, "theory"), tuple(_prop(a, t) for a in _kids(ante)), cs)
    if tag == "pred":
        return Pred(_need(s, "name"), tuple(_expr(a, t) for a in _kids(s)))
    for cls, name in _EXPR_PAIRS.items():
        if tag == name:
            a, b = _arity(s, 2)
            return cls(_expr(a, t), _expr(b, t))
    for cls, name in _EXPR_ONES.items():
        if tag == name:
            (a,) = _arity(s, 1)
            return cls(_expr(a, t))
    if tag == "abs":
        (a,) = _arity(s, 1)
        return Abstracted(_expr(a, t), _need(s, "theory"))
    if tag in EXPR_TAGS:
        raise MetaError(f"<{tag}> is an expression, not a proposition")
    raise MetaError(f"unknown tag <{tag}>")


def _prop(s, t):
    p = abstract(s, t)
    if isinstance(p, Statement):
        raise MetaError("<forall> only at top level")
    return p


def _mark_variables(node, names, sorts):
    if isinstance(node, Atom) and node.name in names and node.kind == "constant":
        return Atom(node.name, "variable", node.sort or sorts.get(node.name))
    if isinstance(node, SentenceExpr):
        return node
    return map_children(node, lambda c: _mark_variables(c, names, sorts))


def _expr(s, t):
    if not isinstance(s, Element):
        raise MetaError(f"bare token {s!r} is not an expression")
    tag = s.tag
    if tag == "num":
        kids = s.children
        if len(kids) != 1 or not isinstance(kids[0], Token):
            raise MetaError("<num> holds one numeral token")
        try:
            return Num(int(kids[0].text.strip()))
        except ValueError:
            raise MetaError(f"bad numeral {kids[0].text!r}") from None
    if tag == "atom":
        _arity(s, 0)
        return Atom(_need(s, "name"), s.attr("kind", "constant"), s.attr("sort"))
    if tag == "apply":
        kids = _kids(s)
        if not kids:
            raise MetaError("<apply> needs an operator")
        return Apply(_expr(kids[0], t), tuple(_expr(k, t) for k in kids[1:]))
    if tag == "lambda":
        kids = _kids(s)
        if not kids:
            raise MetaError("<lambda> needs a body")
        params = tuple(_var_decl(v)[0] for v in kids[:-1])
        if len(set(params)) != len(params):
            raise MetaError("duplicate lambda parameter")
        body = kids[-1]
        if isinstance(body, Element) and body.tag in PROP_TAGS:
            return PropLam(params, _prop(body, t))
        return Lam(params, _expr(body, t))
    if tag == "choice":
        a, b = _arity(s, 2)
        return Choice(_expr(a, t), _expr(b, t))
    if tag == "ifte":
        a, b, c = _arity(s, 3)
        return IfThenElse(_expr(a, t), _expr(b, t), _expr(c, t))
    if tag == "seq":
        if s.attr("tail") == "true":
            a, b = _arity(s, 2)
            return SeqCons(_expr(a, t), _expr(b, t))
        return Seq(tuple(_expr(k, t) for k in _kids(s)))
    if tag == "setcomp":
        v, d, p = _arity(s, 3)
        return SetComp(_var_decl(v)[0], _expr(d, t), _prop(p, t))
    if tag == "setlit":
        return SetLit(tuple(_expr(k, t) for k in _kids(s)))
    if tag == "reif":
        if s.attr("kind") == "sentence":
            (a,) = _arity(s, 1)
            return SentenceExpr(a)
        (a,) = _arity(s, 1)
        th = _need(s, "theory")
        if isinstance(a, Element) and a.tag in PROP_TAGS:
            return Reified(_prop(a, t), th)
        return ReifiedExpr(_expr(a, t), th)
    if tag in PROP_TAGS:
        raise MetaError(f"<{tag}> is a proposition, not an expression")
    raise MetaError(f"unknown tag <{tag}>")


def is_canonical(s, t="T") -> bool:
    try:
        return reify(abstract(s, t), t) == s
    except MetaError:
        return False


def roundtrip(p, t="T"):
    """⌊⌈p⌉⌋ at the structural level."""
    return abstract(reify(p, t), t)


# ---------------------------------------------------------------------------
# Admissibility (declared, never computed)

@dataclass(frozen=True)
class AdmissibilityAssumption:
    sentence: object
    theory: str
    assumed: bool
    note: str = ""

    @property
    def criterion(self):
        """``(¬Ψ) ⊢T (⊢T ¬Ψ)``, the proposition being assumed (or doubted)."""
        psi = abstract(self.sentence, self.theory)
        return Inference(self.theory, (Neg(psi),), (Inference(self.theory, (), (Neg(psi),)),))


# ---------------------------------------------------------------------------
# Certificates

@dataclass(frozen=True)
class CertStep:
    prop: Prop
    justification: str      # definition | fixed-point | beta | roundtrip | admissibility
    ok: bool
    detail: str = ""


@dataclass
class DiagonalConstruction:
    name: str
    theory: str
    diagonalizer: object
    fixed_sentence: object
    derived_equivalence: Prop
    certificate: list
    admissibility: Optional[AdmissibilityAssumption]
    label: str
    target: Optional[Prop] = None
    fix_lines: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(s.ok for s in self.certificate) and all(l.ok for l in self.fix_lines)

    @property
    def admissible(self) -> bool:
        return self.admissibility is not None and self.admissibility.assumed

    def to_text(self) -> str:
        out = [f"construction: {self.name} (theory {self.theory})",
               f"fixed sentence: {sentence_to_xml(self.fixed_sentence)}"]
        for i, l in enumerate(self.fix_lines, 1):
            out.append(f"  fix {i}. {'ok' if l.ok else 'FAILED'}  {lam.print_expr(l.expr)}   [{l.justification}]")
        out.append(f"  {print_prop(Pred(self.label))}")
        for s in self.certificate:
            mark = "ok" if s.ok else "FAILED"
            extra = f" ({s.detail})" if s.detail else ""
            out.append(f"  <=> {print_prop(s.prop)}   [{s.justification}{extra}] {mark}")
        if self.admissibility is not None:
            a = self.admissibility
            out.append(f"admissibility of {print_prop(abstract(a.sentence, a.theory))}: "
                       f"{'assumed' if a.assumed else 'presumed NOT to hold'}; {a.note}")
        out.append("result: " + print_prop(self.derived_equivalence))
        out.append("certificate: " + ("VERIFIED" if self.verified else "FAILED"))
        return "\n".join(out) + "\n"


FIX = Atom("Fix")
DIAG = Atom("Diagonalize")


def _fix(x):
    return Apply(FIX, (x,))


def _sub_rewrites(node, fn):
    """Every result of applying ``fn`` at exactly one position of ``node``."""
    r = fn(node)
    if r is not None:
        yield r
    if not is_node(node) or isinstance(node, SentenceExpr):
        return
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        if is_node(v):
            for w in _sub_rewrites(v, fn):
                yield dataclasses.replace(node, **{f.name: w})
        elif isinstance(v, tuple):
            for i, x in enumerate(v):
                if is_node(x):
                    for w in _sub_rewrites(x, fn):
                        yield dataclasses.replace(node, **{f.name: v[:i] + (w,) + v[i + 1:]})


def _contains(node, fn):
    return any(True for _ in _sub_rewrites(node, fn))


class _Checker:
    """Mechanical checks for each kind of certificate step."""

    def __init__(self, label, definiens, diagonalizer, theory, admissibility):
        self.label = label
        self.definiens = definiens          # what the label abbreviates
        self.diag = diagonalizer
        self.theory = theory
        self.admissibility = admissibility

    def expand(self, node):
        if isinstance(node, Pred) and node.name == self.label and not node.args:
            return self.expand(self.definiens)
        if node == DIAG:
            return self.diag
        if isinstance(node, Apply) and node.op == FIX and len(node.args) == 1:
            return lam.build_fix(self.expand(node.args[0]))
        if isinstance(node, SentenceExpr) or not is_node(node):
            return node
        return map_children(node, self.expand)

    def definition(self, prev, cur):
        return prev != cur and canonical(self.expand(prev)) == canonical(self.expand(cur))

    def fixed_point(self, prev, cur):
        def unfold(n):
            if isinstance(n, Apply) and n.op == FIX and len(n.args) == 1:
                return Apply(n.args[0], (n,))
            return None
        if not any(struct_equiv(r, cur) for r in _sub_rewrites(prev, unfold)):
            return False
        lines = lam.fix_replay(self.diag)
        return all(l.ok for l in lines) and lam.reaches_fixed_point(self.diag)

    def beta(self, prev, cur):
        def contract(n):
            if isinstance(n, Apply) and isinstance(n.op, (Lam, PropLam)) \
                    and len(n.op.params) == len(n.args):
                from .syntax import substitute
                return substitute(n.op.body, dict(zip(n.op.params, n.args)))
            return None
        return any(struct_equiv(r, cur) for r in _sub_rewrites(prev, contract))

    def roundtrip(self, prev, cur):
        def law(n):
            if not (isinstance(n, Abstracted) and isinstance(n.expr, Reified)
                    and n.expr.theory == n.theory):
                return None
            t, p = n.theory, n.expr.prop
            rt = lambda q: Abstracted(Reified(q, t), t)
            if isinstance(p, Neg):
                return Neg(rt(p.p))
            if isinstance(p, And):
                return And(rt(p.left), rt(p.right))
            if isinstance(p, Inference) and not p.antecedents and len(p.consequents) == 1:
                return Inference(p.theory, (), (rt(p.consequents[0]),))
            return None
        return any(struct_equiv(r, cur) for r in _sub_rewrites(prev, law))

    def admissible(self, prev, cur):
        if self.admissibility is None:
            return False
        psi = abstract(self.admissibility.sentence, self.admissibility.theory)

        def strip(n):
            if (isinstance(n, Abstracted) and isinstance(n.expr, Reified)
                    and n.expr.theory == n.theory and struct_equiv(n.expr.prop, psi)):
                return n.expr.prop
            return None
        return any(struct_equiv(r, cur) for r in _sub_rewrites(prev, strip))


def _certify(checker, first, lines):
    """``lines`` are (prop, justification); the first is checked as a definition."""
    out = []
    prev = Pred(checker.label)
    for prop, why in lines:
        check = {"definition": checker.definition, "fixed-point": checker.fixed_point,
                 "beta": checker.beta, "roundtrip": checker.roundtrip,
                 "admissibility": checker.admissible}[why]
        ok = check(prev, prop)
        detail = ""
        if why == "admissibility" and checker.admissibility is not None:
            detail = "assumed" if checker.admissibility.assumed else "presumed not admissible"
        out.append(CertStep(prop, why, ok, detail))
        prev = prop
    return out


def _ident(name):
    return Atom(name, "identifier")


def _abs(e, t):
    return Abstracted(e, t)


def _rt(p, t):
    return Abstracted(Reified(p, t), t)


# Each entry: label, body builder (the proposition inside ⌈·⌉ given ⌊s⌋),
# whether the chain needs an Admissibility step, and whether it is assumed.
_SPECS = {
    "liar": ("LiarProposition", lambda s, t, psi: Neg(s), None),
    "uninferable": ("Uninferable", lambda s, t, psi: Neg(Inference(t, (), (s,))), True),
    "russell": ("Russell", lambda s, t, psi: Inference(t, (), (Neg(s),)), None),
    "curry": ("Curry", lambda s, t, psi: Inference(t, (s,), (psi,)), False),
    "inferable": ("Inferable", lambda s, t, psi: Inference(t, (), (s,)), None),
    "arginfers": ("ArgInfers", lambda s, t, psi: Inference(t, (Inference(t, (), (s,)),), (psi,)), True),
}
NAMES = tuple(_SPECS) + ("kleenerosser",)


def _connective_tail(p, t):
    """Push ⌊⌈·⌉⌋ through ¬, ∧ and ⊢ as far as the roundtrip laws allow."""
    steps = []
    checker = _Checker("", None, None, t, None)
    cur = p
    while True:
        nxt = None
        for cand in _candidates(cur, t):
            if checker.roundtrip(cur, cand):
                nxt = cand
                break
        if nxt is None:
            return steps
        steps.append((nxt, "roundtrip"))
        cur = nxt


def _candidates(p, t):
    def law(n):
        if not (isinstance(n, Abstracted) and isinstance(n.expr, Reified)):
            return None
        q = n.expr.prop
        rt = lambda x: _rt(x, t)
        if isinstance(q, Neg):
            return Neg(rt(q.p))
        if isinstance(q, And):
            return And(rt(q.left), rt(q.right))
        if isinstance(q, Inference) and not q.antecedents and len(q.consequents) == 1:
            return Inference(q.theory, (), (rt(q.consequents[0]),))
        return None
    return list(_sub_rewrites(p, law))


def build_diagonal(name: str, t: str = "T", target: Optional[Prop] = None) -> DiagonalConstruction:
    """Construct a self-referential proposition and certify its equivalence chain."""
    name = name.lower()
    if name not in NAMES:
        raise MetaError(f"unknown construction {name!r}; expected one of {', '.join(NAMES)}")
    psi = target if target is not None else Pred("Psi" if name == "arginfers" else "P")
    if name == "kleenerosser":
        return _kleene_rosser(t)
    label, body, admissible = _SPECS[name]
    s = _ident("s")
    diag = Lam(("s",), Reified(body(_abs(s, t), t, psi), t))
    definiens = _abs(_fix(DIAG), t)
    inner = body(_abs(_fix(DIAG), t), t, psi)
    folded = body(Pred(label), t, psi)
    lines = [
        (definiens, "definition"),
        (_abs(Apply(DIAG, (_fix(DIAG),)), t), "fixed-point"),
        (_abs(Apply(diag, (_fix(DIAG),)), t), "definition"),
        (_rt(inner, t), "beta"),
        (_rt(folded, t), "definition"),
    ]
    adm = None
    if admissible is not None:
        note = ("assumed, not decided" if admissible
                else "presumably not admissible; the last step only holds under it")
        adm = AdmissibilityAssumption(reify(folded, t), t, admissible, note)
        lines.append((folded, "admissibility"))
    else:
        lines += _connective_tail(_rt(folded, t), t)
        adm = AdmissibilityAssumption(reify(Pred(label), t), t, False,
                                      "presumably not admissible")
    checker = _Checker(label, definiens, diag, t, adm if admissible is not None else None)
    cert = _certify(checker, definiens, lines)
    fixed = _fixed_sentence(lam.build_fix(diag), t)
    return DiagonalConstruction(
        name=name, theory=t, diagonalizer=diag, fixed_sentence=fixed,
        derived_equivalence=Iff(Pred(label), lines[-1][0]), certificate=cert,
        admissibility=adm, label=label,
        target=psi if name in ("curry", "arginfers") else None,
        fix_lines=lam.fix_replay(diag))


def _kleene_rosser(t):
    label = "KleeneRosser"
    f = _ident("f")
    diag = Lam(("f",), Reified(Neg(_abs(Apply(f, (f,)), t)), t))
    definiens = _abs(Apply(DIAG, (DIAG,)), t)
    lines = [
        (definiens, "definition"),
        (_abs(Apply(diag, (DIAG,)), t), "definition"),
        (_rt(Neg(_abs(Apply(DIAG, (DIAG,)), t)), t), "beta"),
        (_rt(Neg(Pred(label)), t), "definition"),
    ]
    lines += _connective_tail(lines[-1][0], t)
    adm = AdmissibilityAssumption(reify(Pred(label), t), t, False, "presumably not admissible")
    cert = _certify(_Checker(label, definiens, diag, t, None), definiens, lines)
    fixed = _fixed_sentence(Apply(diag, (diag,)), t)
    return DiagonalConstruction(
        name="kleenerosser", theory=t, diagonalizer=diag, fixed_sentence=fixed,
        derived_equivalence=Iff(Pred(label), lines[-1][0]), certificate=cert,
        admissibility=adm, label=label)


def _fixed_sentence(term, t):
    v = lam.classify(term, max_nodes=100, max_depth=0)
    if v.kind != lam.ALWAYS or len(v.values) != 1:
        raise MetaError("diagonal term did not normalize within budget")
    (nf,) = v.values
    if not isinstance(nf, Reified):
        raise MetaError(f"diagonal term normalized to a non-sentence {lam.print_expr(nf)}")
    return reify(nf.prop, nf.theory)


def fixed_point_normal_form(c: DiagonalConstruction):
    """The λ-term the fixed sentence was read off (for cross-checks)."""
    term = lam.build_fix(c.diagonalizer) if c.name != "kleenerosser" \
        else Apply(c.diagonalizer, (c.diagonalizer,))
    (nf,) = lam.classify(term, max_nodes=100, max_depth=0).values
    return nf


# ---------------------------------------------------------------------------
# Bridge into kernel scripts

def export_lemma(c: DiagonalConstruction, label: str = "Fix") -> Lemma:
    """``⊢T (X ⇔ …)`` as an external kernel lemma."""
    if not c.verified:
        raise MetaError(f"certificate for {c.name} is not verified")
    if c.admissibility is None or not c.admissibility.assumed:
        raise MetaError(f"{c.name} rests on an admissibility that is not assumed")
    stmt = Statement((), Inference(c.theory, (), (c.derived_equivalence,)))
    a = c.admissibility
    note = (f"Admissibility of {print_prop(abstract(a.sentence, a.theory))} "
            f"for {c.theory} is assumed, not decided")
    return Lemma(label, stmt, "external", note)


def with_lemma(script, lemma: Lemma):
    """Copy of ``script`` whose lemma of the same label is replaced by ``lemma``."""
    lemmas = [lemma if l.label == lemma.label else l for l in script.lemmas]
    if not any(l.label == lemma.label for l in script.lemmas):
        lemmas.append(lemma)
    return dataclasses.replace(script, lemmas=lemmas)
