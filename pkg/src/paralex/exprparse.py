"""Frame expression files.

Format::

    dim 2
    domain -1 1 -1 1
    cos(x1*x2)  -sin(x1*x2)
    sin(x1*x2)  cos(x1*x2)

Row ``i`` holds the ``i``-th coordinate component of every frame vector.
Expression grammar (whitespace insensitive inside an entry)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' ['-'] integer)?
    base   := number | 'x' digits | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | exp | sqrt

Entries on a row are separated by whitespace, so an entry may not contain
spaces; wrap it in parentheses if it needs them.  Blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import FrameSyntaxError, NonFiniteError, SingularFrameError
from .frame import COND_CAP, FrameProvider
from .tensor import Box

FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}
BINOPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}

_TOKEN = re.compile(
    r"(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(src: str, line: int, col0: int) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos == len(src):
            break
        m = _TOKEN.match(src, pos)
        if not m:
            raise FrameSyntaxError(f"unexpected character {src[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), col0 + pos))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(src)))
    return toks


def _binary(op, a, b):
    return lambda x: op(a(x), b(x))


class _Parser:
    """Recursive descent over one entry; builds a closure ``x -> float``."""

    def __init__(self, src: str, dim: int, line: int, col0: int):
        self.toks = _tokenize(src, line, col0)
        self.i = 0
        self.dim = dim
        self.line = line

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        shown = repr(tok.text) if tok.kind != "end" else "end of entry"
        raise FrameSyntaxError(f"{msg} at {shown}", self.line, tok.col)

    def _accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self) -> Callable:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = BINOPS[self.tok.text]
            self.i += 1
            node = _binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = BINOPS[self.tok.text]
            self.i += 1
            node = _binary(op, node, self.factor())
        return node

    def factor(self):
        if self._accept("-"):
            inner = self.factor()
            return lambda x: -inner(x)
        node = self.base()
        if self._accept("^"):
            neg = self._accept("-")
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                self._fail("exponent must be an integer")
            self.i += 1
            power = -int(tok.text) if neg else int(tok.text)
            node = _binary(operator.pow, node, lambda x: power)
        return node

    def base(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            return lambda x: value
        if tok.kind == "name":
            self.i += 1
            m = re.fullmatch(r"x(\d+)", tok.text)
            if m:
                k = int(m.group(1))
                if not 1 <= k <= self.dim:
                    self._fail(f"unknown identifier (coordinates are x1..x{self.dim})", tok)
                return lambda x: x[k - 1]
            if tok.text in FUNCS:
                fn = FUNCS[tok.text]
                if not self._accept("("):
                    self._fail(f"expected '(' after {tok.text}")
                arg = self.expr()
                if not self._accept(")"):
                    self._fail("expected ')'")
                return lambda x: fn(arg(x))
            self._fail("unknown identifier", tok)
        if self._accept("("):
            node = self.expr()
            if not self._accept(")"):
                self._fail("expected ')'")
            return node
        self._fail("expected a number, variable, function or '('")


def parse_expression(src: str, dim: int, line: int = 1, col0: int = 1) -> Callable:
    """Compile one entry into a function of the coordinate vector."""
    return _Parser(src, dim, line, col0).parse()


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, raw


def _entries(raw: str):
    for m in re.finditer(r"\S+", raw):
        yield m.group(0), m.start() + 1


def parse_frame_expr(text: str, name: str = "expr") -> FrameProvider:
    lines = list(_content_lines(text))
    if len(lines) < 2:
        raise FrameSyntaxError("expected 'dim n' and 'domain ...' header lines", len(lines) + 1)

    lineno, raw = lines[0]
    parts = raw.split()
    if len(parts) != 2 or parts[0] != "dim" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise FrameSyntaxError("first line must be 'dim n' with n >= 1", lineno, 1)
    n = int(parts[1])

    lineno, raw = lines[1]
    parts = raw.split()
    if not parts or parts[0] != "domain":
        raise FrameSyntaxError("second line must start with 'domain'", lineno, 1)
    if len(parts) - 1 != 2 * n:
        raise FrameSyntaxError(f"dimension mismatch: domain needs {2 * n} bounds, got {len(parts) - 1}", lineno, 1)
    try:
        bounds = [float(v) for v in parts[1:]]
    except ValueError:
        raise FrameSyntaxError("domain bounds must be numbers", lineno, 1) from None
    try:
        box = Box(tuple(bounds[0::2]), tuple(bounds[1::2]))
    except ValueError as exc:
        raise FrameSyntaxError(str(exc), lineno, 1) from None

    rows = lines[2:]
    if len(rows) != n:
        raise FrameSyntaxError(f"dimension mismatch: expected {n} matrix rows, got {len(rows)}",
                               rows[-1][0] if rows else lines[-1][0])
    grid = []
    for lineno, raw in rows:
        ents = list(_entries(raw))
        if len(ents) != n:
            raise FrameSyntaxError(f"dimension mismatch: expected {n} entries, got {len(ents)}", lineno, 1)
        grid.append([parse_expression(src, n, lineno, col) for src, col in ents])

    def evaluate(x):
        out = np.empty((n, n))
        for i in range(n):
            for a in range(n):
                try:
                    out[i, a] = grid[i][a](x)
                except (ValueError, ZeroDivisionError, OverflowError) as exc:
                    raise NonFiniteError(f"entry ({i + 1},{a + 1}) failed at {list(x)}: {exc}") from None
        return out

    provider = FrameProvider(name, box, evaluate, None)
    w0 = evaluate(box.center)
    if not np.all(np.isfinite(w0)) or np.linalg.cond(w0) > COND_CAP:
        raise SingularFrameError(f"frame {name!r} is singular at the domain center")
    return provider


def load_frame_file(path) -> FrameProvider:
    path = Path(path)
    return parse_frame_expr(path.read_text(), name=path.stem)
