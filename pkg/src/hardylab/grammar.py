"""Text form of mean expressions.

::

    expr  := "P[" number "]" | "circ(" expr "," expr ")" | "sq(" expr "," expr ")"
    number := float literal, or a fraction a/b

Whitespace is ignored.  ``format_expr`` writes the canonical form and
``parse_expr(format_expr(e)) == e`` for every expression.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .means import Circ, MeanExpr, Power, Square

_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/[+-]?\d+)?")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _expect(self, token: str):
        self._skip()
        if not self.text.startswith(token, self.pos):
            raise ParseError(f"expected {token!r}", self.pos)
        self.pos += len(token)

    def _number(self) -> float:
        self._skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise ParseError("expected a number", self.pos)
        lit = m.group(0)
        try:
            value = float(Fraction(lit)) if "/" in lit else float(lit)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad number {lit!r}", self.pos) from None
        self.pos = m.end()
        return value

    def _keyword(self, word: str, bracket: str) -> bool:
        """Consume ``word`` followed (after optional spaces) by ``bracket``."""
        start = self.pos
        if not self.text.startswith(word, start):
            return False
        self.pos += len(word)
        self._skip()
        if self.text.startswith(bracket, self.pos):
            self.pos += 1
            return True
        self.pos = start
        return False

    def expr(self) -> MeanExpr:
        self._skip()
        if self._keyword("P", "["):
            p = self._number()
            self._expect("]")
            return Power(p)
        for name, kind in (("circ", Circ), ("sq", Square)):
            if self._keyword(name, "("):
                outer = self.expr()
                self._expect(",")
                inner = self.expr()
                self._expect(")")
                return kind(outer, inner)
        raise ParseError("expected 'P[', 'circ(' or 'sq('", self.pos)

    def parse(self) -> MeanExpr:
        e = self.expr()
        self._skip()
        if self.pos != len(self.text):
            raise ParseError("trailing input", self.pos)
        return e


def parse_expr(text: str) -> MeanExpr:
    return _Parser(text).parse()


def _format_number(p: float) -> str:
    if p == int(p) and abs(p) < 1e15:
        return str(int(p))
    return repr(p)


def format_expr(e: MeanExpr) -> str:
    if isinstance(e, Power):
        return f"P[{_format_number(e.p)}]"
    name = "circ" if isinstance(e, Circ) else "sq"
    return f"{name}({format_expr(e.outer)},{format_expr(e.inner)})"
