from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..sl_entail.exceptions import SidSyntaxError

_TOKEN = re.compile(r"(?P<space>\s+)|(?P<comment>;[^\n]*)|(?P<open>\()|(?P<close>\))|(?P<atom>[^\s();]+)")


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    line: int
    column: int


@dataclass(slots=True)
class SList:
    line: int
    column: int
    items: list[SExpr] = field(default_factory=list)

    @property
    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Token):
            return self.items[0].text
        return None


SExpr = Token | SList


def read_sexprs(text: str) -> list[SExpr]:
    """read every top-level s-expression, tracking 1-based source positions"""
    stack: list[SList] = []
    top: list[SExpr] = []
    line, line_start = 1, 0
    for match in _TOKEN.finditer(text):
        kind, value = match.lastgroup, match.group()
        column = match.start() - line_start + 1
        if kind == "space":
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + value.rfind("\n") + 1
            continue
        if kind == "comment":
            continue
        if kind == "open":
            stack.append(SList(line, column))
        elif kind == "close":
            if not stack:
                raise SidSyntaxError("unbalanced ')'", line, column)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            token = Token(value, line, column)
            (stack[-1].items if stack else top).append(token)
    if stack:
        raise SidSyntaxError("unexpected end of input", stack[-1].line, stack[-1].column, expected=["')'"])
    return top
