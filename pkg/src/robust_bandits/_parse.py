"""Tiny parser for the call-style strings used in configs and on the command line.

Examples of accepted text::

    gaussian(1.7, 1)
    r-ucb-g-mom(f=consistency(logpow(1,2), 0.5), g=invlogpow(1,1))
    sg(1, gaps=[0, 2])

Names are case-insensitive and may contain hyphens.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf\b)
      | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*)
      | (?P<punct>[(),=\[\]])
    )""",
    re.VERBOSE,
)


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()
    kwargs: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, self.args, tuple(sorted(self.kwargs.items()))))


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r} at column {pos + 1} in {text!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name").lower()))
        else:
            out.append(("punct", m.group("punct")))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise ParseError(f"unexpected end of input in {self.text!r}")
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"expected {value or kind}, got {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok

    def expr(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return val
        if kind == "punct" and val == "[":
            self.take()
            items = []
            if self.peek() != ("punct", "]"):
                items.append(self.expr())
                while self.peek() == ("punct", ","):
                    self.take()
                    items.append(self.expr())
            self.take("punct", "]")
            return tuple(items)
        if kind == "name":
            self.take()
            if self.peek() != ("punct", "("):
                return Call(val)
            self.take()
            args, kwargs = [], {}
            if self.peek() != ("punct", ")"):
                self._arg(args, kwargs)
                while self.peek() == ("punct", ","):
                    self.take()
                    self._arg(args, kwargs)
            self.take("punct", ")")
            return Call(val, tuple(args), kwargs)
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")

    def _arg(self, args, kwargs):
        if self.peek()[0] == "name" and self.i + 1 < len(self.toks) and self.toks[self.i + 1] == ("punct", "="):
            key = self.take()[1]
            self.take()
            kwargs[key.replace("-", "_")] = self.expr()
        else:
            if kwargs:
                raise ParseError(f"positional argument after keyword in {self.text!r}")
            args.append(self.expr())


def parse(text: str):
    p = _Parser(text)
    node = p.expr()
    if p.i != len(p.toks):
        raise ParseError(f"trailing input after {p.toks[p.i - 1][1]!r} in {text!r}")
    return node


def bind(call: Call, params: list[str], defaults: dict | None = None) -> dict:
    """Map positional and keyword arguments of ``call`` onto parameter names."""
    defaults = defaults or {}
    if len(call.args) > len(params):
        raise ParseError(f"{call.name}: expected at most {len(params)} arguments, got {len(call.args)}")
    out = dict(zip(params, call.args))
    for k, v in call.kwargs.items():
        if k not in params:
            raise ParseError(f"{call.name}: unknown argument {k!r}")
        if k in out:
            raise ParseError(f"{call.name}: argument {k!r} given twice")
        out[k] = v
    for k in params:
        if k not in out:
            if k not in defaults:
                raise ParseError(f"{call.name}: missing argument {k!r}")
            out[k] = defaults[k]
    return out


def fmt(x: float) -> str:
    """Shortest round-tripping text for a number."""
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        return repr(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)
