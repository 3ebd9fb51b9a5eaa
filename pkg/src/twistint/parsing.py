"""Recursive-descent parser for rational expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT | '^' '(' INT ')')?
    atom   := INT | NAME | '(' expr ')'

Names resolve through the registry or through an optional table of extra
bindings (used for the Baikov polynomial ``B`` and dot products ``k1.k2``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .algebra import RatFunc, VarRegistry
from .errors import ParseError, UndeclaredName

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)"
                    r"|(?P<op>[-+*/^()]))")


@dataclass
class Token:
    kind: str   # num, name, op, end
    text: str
    col: int    # 1-based


def tokenize(text: str, line: int | None = None, col0: int = 0) -> list[Token]:
    pos = 0
    out = []
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), col0 + start + 1))
        pos = m.end()
    out.append(Token("end", "", col0 + n + 1))
    return out


class _Parser:
    def __init__(self, text, registry, extra, line, col0):
        self.toks = tokenize(text, line, col0)
        self.i = 0
        self.reg = registry
        self.extra = extra or {}
        self.line = line

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok: Token):
        raise ParseError(msg, self.line, tok.col)

    def expect_op(self, op):
        t = self.take()
        if t.kind != "op" or t.text != op:
            self.error(f"expected {op!r}, found {t.text or 'end of input'!r}", t)
        return t

    def parse(self) -> RatFunc:
        v = self.expr()
        t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.text!r}", t)
        return v

    def expr(self):
        v = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            t = self.take()
            w = self.unary()
            if t.text == "*":
                v = v * w
            else:
                if w.is_zero():
                    self.error("division by zero", t)
                v = v / w
        return v

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            self.take()
            v = self.unary()
            return -v if t.text == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            k = self.int_exponent()
            return base ** k
        return base

    def int_exponent(self) -> int:
        t = self.take()
        if t.kind == "num":
            return int(t.text)
        if t.kind == "op" and t.text == "(":
            t2 = self.take()
            if t2.kind != "num":
                self.error("exponent must be a non-negative integer", t2)
            self.expect_op(")")
            return int(t2.text)
        self.error("exponent must be a non-negative integer", t)

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return self.reg.const(int(t.text))
        if t.kind == "name":
            if t.text in self.extra:
                return self.extra[t.text]
            if t.text in self.reg:
                return self.reg.var(t.text)
            raise UndeclaredName(
                f"undeclared name {t.text!r}" + (f" at line {self.line}" if self.line else "")
                + f", column {t.col}")
        if t.kind == "op" and t.text == "(":
            v = self.expr()
            self.expect_op(")")
            return v
        self.error(f"unexpected {t.text or 'end of input'!r}", t)


def parse_ratfunc(text: str, registry: VarRegistry, extra: Mapping[str, RatFunc] | None = None,
                  line: int | None = None, col0: int = 0) -> RatFunc:
    """Parse ``text`` into a normalized rational function on ``registry``."""
    return _Parser(text, registry, extra, line, col0).parse()


def parse_power(text: str, registry: VarRegistry, extra=None, line=None, col0: int = 0):
    """Parse ``base ^ exponent`` where the exponent is an arbitrary rational expression.

    Used for twist factors such as ``(z1*z2)^(1/2+e)``.  Returns (base, exponent).
    """
    p = _Parser(text, registry, extra, line, col0)
    base = p.atom()
    t = p.take()
    if t.kind != "op" or t.text != "^":
        p.error("expected '^' after the twist base", t)
    nxt = p.peek()
    if nxt.kind == "op" and nxt.text == "^":
        p.error("unexpected '^'", nxt)
    exponent = p.unary()
    end = p.peek()
    if end.kind != "end":
        p.error(f"unexpected {end.text!r}", end)
    return base, exponent
