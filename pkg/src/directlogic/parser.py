"""Recursive-descent parser for the ASCII surface syntax.

Grammar summary (full EBNF in docs/grammar.md)::

    statement   := [varprefix] sequent
    varprefix   := vdecl {"," vdecl} ":" [Sort ":"]
    sequent     := [plist] "|-{" Name "}" plist | iff
    plist       := item {"," item}
    item        := "|-{" Name "}" plist   (only as the sole consequent)
                 | iff
    iff         := impl ["<=>" impl]
    impl        := or ["=>" impl]
    or          := and {"\\/" and}
    and         := unary {"/\\" unary}
    unary       := "~" unary | atomic
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Abstracted, And, Apply, Atom, Choice, Converges, ConvergesTo, Equal,
    IfThenElse, Iff, Implies, Inference, Irreducible, Lam, Member, Neg, Num,
    Or, Pred, PropLam, Reduces, Reified, ReifiedExpr, SentenceExpr, Seq,
    SeqCons, SetComp, SetLit, Statement, Subset, UniqueReduct, VarDecl,
    xml_to_sentence,
)


class ParseError(ValueError):
    def __init__(self, msg, line, col, expected=()):
        self.line, self.col = line, col
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {msg}{detail}")


@dataclass(frozen=True)
class Tok:
    kind: str     # NAME NUM STR SYM TURN EOF
    text: str
    line: int
    col: int


_SYMBOLS = [
    "<=>", "<|", "=>", "~>", "/\\", "\\/", "?|", "!>", "::",
    "~", "!", ",", ":", "(", ")", "[", "]", "{", "}", "=", "+", "-", "*",
    "%", "|",
]
_KEYWORDS = {"fun", "pfun", "if", "then", "else", "in", "subset", "irred",
             "uniq", "reify", "reifyx", "abstract", "xml"}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_TURN = re.compile(r"\|-(?:\{([A-Za-z_][A-Za-z0-9_\-]*)\})?")


def tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _TURN.match(text, i)
        if m:
            toks.append(Tok("TURN", m.group(1) or "", line, col))
        elif ch.isdigit():
            m = re.compile(r"\d+").match(text, i)
            toks.append(Tok("NUM", m.group(0), line, col))
        elif ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col)
            toks.append(Tok("STR", "".join(buf), line, col))
            width = j + 1 - i
            i += width
            col += width
            continue
        elif (m := _NAME.match(text, i)):
            toks.append(Tok("NAME", m.group(0), line, col))
        else:
            for s in _SYMBOLS:
                if text.startswith(s, i):
                    toks.append(Tok("SYM", s, line, col))
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", line, col)
            width = len(toks[-1].text)
            i += width
            col += width
            continue
        width = m.end() - i
        i += width
        col += width
    toks.append(Tok("EOF", "", line, col))
    return toks


_RELATIONS = {"=": Equal, "in": Member, "subset": Subset, "~>": Reduces,
              "!>": ConvergesTo}


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text, default_theory="Bot"):
        self.toks = tokenize(text)
        self.i = 0
        self.default_theory = default_theory
        self.scopes = []          # stack of sets of bound identifiers
        self.stmt_vars = {}       # name -> sort

    # -- token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, kind=None):
        t = self.tok
        if kind and t.kind != kind:
            return False
        return t.text == text and t.kind in ("SYM", "NAME")

    def accept(self, text):
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.fail(f"unexpected {self.describe()}", [repr(text)])

    def describe(self):
        t = self.tok
        return "end of input" if t.kind == "EOF" else repr(t.text)

    def fail(self, msg, expected=()):
        t = self.tok
        raise ParseError(msg, t.line, t.col, expected)

    def name(self):
        t = self.tok
        if t.kind != "NAME" or t.text in _KEYWORDS:
            self.fail(f"unexpected {self.describe()}", ["name"])
        self.i += 1
        return t.text

    def theory_brace(self):
        if self.accept("{"):
            th = self.name()
            self.expect("}")
            return th
        return self.default_theory

    def done(self):
        if self.tok.kind != "EOF":
            self.fail(f"unexpected {self.describe()}", ["end of input"])

    # -- statements
    def statement(self):
        decls = self._var_prefix()
        self.stmt_vars = {d.name: d.sort for d in decls}
        body = self.sequent()
        self.done()
        return Statement(tuple(decls), body)

    def _var_prefix(self):
        # lookahead: vdecl {, vdecl} ':' where vdecl is NAME or NAME :: NAME
        j = self.i
        decls = []
        while True:
            t = self.toks[j]
            if t.kind != "NAME" or t.text in _KEYWORDS:
                return []
            if self.toks[j + 1].text == "::" and self.toks[j + 1].kind == "SYM":
                nt = self.toks[j + 2]
                if nt.kind != "NAME":
                    return []
                decls.append(VarDecl(nt.text, t.text))
                j += 3
            else:
                decls.append(VarDecl(t.text))
                j += 1
            nxt = self.toks[j]
            if nxt.kind == "SYM" and nxt.text == ",":
                j += 1
                continue
            if nxt.kind == "SYM" and nxt.text == ":":
                j += 1
                break
            return []
        # optional shared sort:  NAME ':'
        t, t2 = self.toks[j], self.toks[j + 1]
        if (t.kind == "NAME" and t.text not in _KEYWORDS
                and t2.kind == "SYM" and t2.text == ":"):
            decls = [VarDecl(d.name, d.sort or t.text) for d in decls]
            j += 2
        names = [d.name for d in decls]
        if len(set(names)) != len(names):
            self.fail("duplicate statement variable")
        self.i = j
        return decls

    # -- propositions
    def sequent(self):
        if self.tok.kind == "TURN":
            th = self.tok.text or self.default_theory
            self.i += 1
            return Inference(th, (), tuple(self.plist(True)))
        ante = self.plist(False)
        if self.tok.kind == "TURN":
            th = self.tok.text or self.default_theory
            self.i += 1
            cons = self.plist(True)
            return Inference(th, tuple(ante), tuple(cons))
        if len(ante) != 1:
            self.fail("a proposition list needs a turnstile", ["|-{T}"])
        return ante[0]

    def plist(self, consequent):
        items = [self.item(consequent)]
        while self.accept(","):
            items.append(self.item(consequent))
        return items

    def item(self, consequent):
        if consequent and self.tok.kind == "TURN":
            th = self.tok.text or self.default_theory
            self.i += 1
            return Inference(th, (), tuple(self.plist(True)))
        return self.iff()

    def prop(self):
        """A single proposition, turnstiles allowed (used inside parentheses)."""
        return self.sequent()

    def iff(self):
        left = self.impl()
        if self.accept("<=>"):
            return Iff(left, self.impl())
        return left

    def impl(self):
        left = self.disj()
        if self.accept("=>"):
            return Implies(left, self.impl())
        return left

    def disj(self):
        left = self.conj()
        while self.accept("\\/"):
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.accept("/\\"):
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.accept("~"):
            return Neg(self.unary())
        return self.atomic()

    def atomic(self):
        t = self.tok
        if t.kind == "SYM" and t.text == "(":
            save = self.i
            try:
                self.i += 1
                p = self.prop()
                self.expect(")")
                if not self._at_relation():
                    return p
            except ParseError:
                pass
            self.i = save
            return self._relation()
        if t.kind == "SYM" and t.text == "!":
            self.i += 1
            return Converges(self.postfix())
        if t.kind == "NAME":
            if t.text == "irred":
                self.i += 1
                return Irreducible(self.postfix())
            if t.text == "uniq":
                self.i += 1
                return UniqueReduct(self.postfix())
            if t.text == "abstract":
                self.i += 1
                th = self.theory_brace()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Abstracted(e, th)
            if t.text not in _KEYWORDS and self.peek().text == "[" and self.peek().kind == "SYM":
                nm = t.text
                self.i += 2
                args = []
                if not self.accept("]"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                    self.expect("]")
                return Pred(nm, tuple(args))
        return self._relation()

    def _at_relation(self):
        t = self.tok
        return t.text in _RELATIONS and t.kind in ("SYM", "NAME")

    def _relation(self):
        start = self.tok
        e = self.expr()
        if self._at_relation():
            ctor = _RELATIONS[self.tok.text]
            self.i += 1
            return ctor(e, self.expr())
        if isinstance(e, Atom) and e.kind == "constant" and e.sort is None:
            return Pred(e.name, ())
        raise ParseError("expression used where a proposition is required",
                         start.line, start.col, list(_RELATIONS))

    # -- expressions
    def expr(self):
        left = self.additive()
        if self.accept("?|"):
            return Choice(left, self.expr())
        return left

    def additive(self):
        left = self.multiplicative()
        while self.tok.kind == "SYM" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            left = Apply(Atom(op), (left, self.multiplicative()))
        return left

    def multiplicative(self):
        left = self.postfix()
        while self.tok.kind == "SYM" and self.tok.text in ("*", "%"):
            op = self.tok.text
            self.i += 1
            left = Apply(Atom(op), (left, self.postfix()))
        return left

    def postfix(self):
        e = self.primary()
        while self.at("(", "SYM"):
            self.i += 1
            args = []
            if not self.accept(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
            e = Apply(e, tuple(args))
        return e

    def _params(self):
        self.expect("(")
        ps = []
        if not self.accept(")"):
            ps.append(self.name())
            while self.accept(","):
                ps.append(self.name())
            self.expect(")")
        if len(set(ps)) != len(ps):
            self.fail("duplicate lambda parameter")
        return tuple(ps)

    def _atom(self, nm, sort=None):
        for scope in reversed(self.scopes):
            if nm in scope:
                return Atom(nm, "identifier")
        if nm in self.stmt_vars:
            return Atom(nm, "variable", sort)
        if sort is not None:
            return Atom(nm, "variable", sort)
        return Atom(nm)

    def primary(self):
        t = self.tok
        if t.kind == "NUM":
            self.i += 1
            return Num(int(t.text))
        if t.kind == "NAME":
            kw = t.text
            if kw in ("fun", "pfun"):
                self.i += 1
                ps = self._params()
                self.scopes.append(set(ps))
                try:
                    if kw == "fun":
                        return Lam(ps, self.expr())
                    return PropLam(ps, self.iff())
                finally:
                    self.scopes.pop()
            if kw == "if":
                self.i += 1
                c = self.expr()
                self.expect("then")
                a = self.expr()
                self.expect("else")
                return IfThenElse(c, a, self.expr())
            if kw == "reify":
                self.i += 1
                th = self.theory_brace()
                self.expect("(")
                p = self.prop()
                self.expect(")")
                return Reified(p, th)
            if kw == "reifyx":
                self.i += 1
                th = self.theory_brace()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return ReifiedExpr(e, th)
            if kw == "xml":
                self.i += 1
                s = self.tok
                if s.kind != "STR":
                    self.fail("xml literal needs a string", ["string"])
                self.i += 1
                try:
                    return SentenceExpr(xml_to_sentence(s.text))
                except ValueError as exc:
                    raise ParseError(str(exc), s.line, s.col)
            if kw in _KEYWORDS:
                self.fail(f"unexpected keyword {kw!r}", ["expression"])
            self.i += 1
            if self.at("::", "SYM"):
                self.i += 1
                return self._atom(self.name(), sort=kw)
            return self._atom(kw)
        if t.kind == "SYM":
            if t.text == "(":
                self.i += 1
                e = self.expr()
                self.expect(")")
                return e
            if t.text == "[":
                self.i += 1
                if self.accept("]"):
                    return Seq(())
                first = self.expr()
                if self.accept("<|"):
                    tail = self.expr()
                    self.expect("]")
                    return SeqCons(first, tail)
                items = [first]
                while self.accept(","):
                    items.append(self.expr())
                self.expect("]")
                return Seq(tuple(items))
            if t.text == "{":
                self.i += 1
                if self.accept("}"):
                    return SetLit(())
                if (self.tok.kind == "NAME" and self.tok.text not in _KEYWORDS
                        and self.peek().text == "in" and self.peek().kind == "NAME"):
                    save = self.i
                    var = self.name()
                    self.i += 1
                    dom = self.expr()
                    if self.accept("|"):
                        self.scopes.append({var})
                        try:
                            pred = self.iff()
                        finally:
                            self.scopes.pop()
                        self.expect("}")
                        return SetComp(var, dom, pred)
                    self.i = save
                items = [self.expr()]
                while self.accept(","):
                    items.append(self.expr())
                self.expect("}")
                return SetLit(tuple(items))
        self.fail(f"unexpected {self.describe()}", ["expression"])


def parse_statement(text, default_theory="Bot") -> Statement:
    return Parser(text, default_theory).statement()


def parse_prop(text, default_theory="Bot"):
    st = parse_statement(text, default_theory)
    if st.vars:
        raise ParseError("expected a closed proposition", 1, 1)
    return st.body


def parse_expr(text, default_theory="Bot"):
    p = Parser(text, default_theory)
    e = p.expr()
    p.done()
    return e


def parse_prop_list(text, default_theory="Bot"):
    """Comma-separated propositions, as written on one side of a turnstile."""
    p = Parser(text, default_theory)
    items = p.plist(False)
    p.done()
    return items
