"""Lexer and recursive-descent parser for the property language.

Precedence, lowest first: ``->`` (right-assoc), ``||``, ``&&``, ``!``,
relational / ``in`` (non-assoc), ``+ -``, ``* /``, unary minus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (Arith, BoolOp, F, G, In, ListLit, ListOp, Lit, Neg, Not, P, Quant,
                  RangeList, Rel, Var, has_primes)


class PropertySyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Token:
    kind: str  # num str ident op eof
    text: str
    pos: int
    value: object = None


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>~~>|->|&&|\|\||==|!=|<=|>=|[=<>!+\-*/()\[\]{},:#'])
""", re.VERBOSE)

_RELOPS = {"==", "=", "!=", "<", "<=", ">", ">="}
_LISTOPS = {"min", "max", "size"}


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise PropertySyntaxError("unterminated string literal", pos, text)
            raise PropertySyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tok = m.group()
        if kind == "num":
            val = float(tok) if any(c in tok for c in ".eE") else int(tok)
            out.append(Token("num", tok, pos, val))
        elif kind == "str":
            out.append(Token("str", tok, pos, re.sub(r"\\(.)", r"\1", tok[1:-1])))
        elif kind in ("ident", "op"):
            out.append(Token(kind, tok, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind == "op" and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, msg: str, pos=None):
        t = self.tok
        if pos is None:
            pos = t.pos
            found = "end of input" if t.kind == "eof" else repr(t.text)
            msg = f"{msg}, found {found}"
        raise PropertySyntaxError(msg, pos, self.text)

    # -- grammar
    def parse(self):
        e = self.expr()
        if self.tok.kind != "eof":
            if self.at("~~>"):
                self.fail("'~~>' is only allowed inside P[...]", self.tok.pos)
            if self.at(")") or self.at("]") or self.at("}"):
                self.fail(f"unbalanced {self.tok.text!r}", self.tok.pos)
            self.fail("unexpected token")
        return e

    def expr(self):
        lhs = self.disj()
        if self.at("->"):
            self.advance()
            return BoolOp("->", lhs, self.expr())
        return lhs

    def disj(self):
        e = self.conj()
        while self.at("||"):
            self.advance()
            e = BoolOp("||", e, self.conj())
        return e

    def conj(self):
        e = self.neg()
        while self.at("&&"):
            self.advance()
            e = BoolOp("&&", e, self.neg())
        return e

    def neg(self):
        if self.at("!"):
            self.advance()
            return Not(self.neg())
        return self.rel()

    def rel(self):
        lhs = self.arith()
        t = self.tok
        if t.kind == "op" and t.text in _RELOPS:
            self.advance()
            op = "==" if t.text == "=" else t.text
            e = Rel(op, lhs, self.arith())
        elif t.kind == "ident" and t.text == "in":
            self.advance()
            e = In(lhs, self.list_expr())
        else:
            return lhs
        t = self.tok
        if (t.kind == "op" and t.text in _RELOPS) or (t.kind == "ident" and t.text == "in"):
            self.fail("chained comparison; add parentheses", t.pos)
        return e

    def list_expr(self):
        lo = self.arith()
        if self.at(":"):
            self.advance()
            return RangeList(lo, self.arith())
        return lo

    def arith(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            e = Arith(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance().text
            e = Arith(op, e, self.unary())
        return e

    def unary(self):
        if self.at("-"):
            self.advance()
            if self.tok.kind == "num":
                t = self.advance()
                return Lit(-t.value)
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Lit(t.value)
        if t.kind == "str":
            self.advance()
            return Lit(t.value)
        if t.kind == "op":
            if t.text == "(":
                self.advance()
                e = self.expr()
                if not self.at(")"):
                    if self.at("~~>"):
                        self.fail("'~~>' is only allowed inside P[...]", self.tok.pos)
                    self.fail("unbalanced '(': expected ')'")
                self.advance()
                return e
            if t.text == "{":
                return self.list_literal()
            if t.text == "~~>":
                self.fail("'~~>' is only allowed inside P[...]", t.pos)
            self.fail("expected an expression")
        if t.kind == "ident":
            nxt = self.peek()
            if t.text in ("G", "F") and nxt.kind == "op" and nxt.text == "[":
                self.advance()
                self.advance()
                body = self.expr()
                self._close_bracket()
                return G(body) if t.text == "G" else F(body)
            if t.text == "P" and nxt.kind == "op" and nxt.text == "[":
                return self.path_prop()
            if t.text in ("all", "exists") and nxt.kind == "op" and nxt.text == "(":
                return self.quant()
            if t.text in ("true", "false"):
                self.advance()
                return Lit(t.text == "true")
            if t.text == "in":
                self.fail("expected an expression")
            self.advance()
            primed = False
            if self.at("'"):
                self.advance()
                primed = True
            var = Var(t.text, primed)
            if self.at("#"):
                self.advance()
                op = self.tok
                if op.kind != "ident" or op.text not in _LISTOPS:
                    self.fail("expected min, max or size after '#'")
                self.advance()
                return ListOp(var, op.text)
            return var
        self.fail("expected an expression")

    def _close_bracket(self):
        if not self.at("]"):
            if self.at("~~>"):
                self.fail("'~~>' is only allowed inside P[...]", self.tok.pos)
            self.fail("unbalanced '[': expected ']'")
        self.advance()

    def path_prop(self):
        start = self.tok.pos
        self.advance()
        self.advance()
        slots = [self.expr()]
        for _ in range(2):
            if not self.at("~~>"):
                self.fail("P[...] needs three parts separated by '~~>'")
            self.advance()
            slots.append(self.expr())
        if self.at("~~>"):
            self.fail("P[...] takes exactly three parts", self.tok.pos)
        self._close_bracket()
        if any(has_primes(s) for s in slots):
            self.fail("primed variables are not allowed inside P[...]", start)
        return P(*slots)

    def quant(self):
        kind = self.advance().text
        self.expect("(")
        v = self.tok
        if v.kind != "ident":
            self.fail("expected iterator variable")
        self.advance()
        self.expect(",")
        lst = self.list_expr()
        self.expect(",")
        body = self.expr()
        if not self.at(")"):
            self.fail("unbalanced '(': expected ')'")
        self.advance()
        return Quant(kind, v.text, lst, body)

    def list_literal(self):
        self.expect("{")
        items = []
        if not self.at("}"):
            items.append(self.arith())
            while self.at(","):
                self.advance()
                items.append(self.arith())
        if not self.at("}"):
            self.fail("unbalanced '{': expected '}'")
        self.advance()
        return ListLit(tuple(items))


def parse_property(text: str):
    """Parse property text into an AST; raises :class:`PropertySyntaxError`."""
    return _Parser(text).parse()
