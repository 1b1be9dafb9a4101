"""Canonical text form of a program: two-space indentation, quoted text literals."""

from __future__ import annotations

import json

from actattr.lang.ast import (
    Answer,
    ArgBest,
    Call,
    Compare,
    ForEach,
    If,
    Let,
    ListExpr,
    Literal,
    Program,
    Var,
)

INDENT = "  "


def print_program(p: Program) -> str:
    return "".join(_stmt(s, 0) for s in p.statements)


def _block(stmts, level: int) -> str:
    body = "".join(_stmt(s, level + 1) for s in stmts)
    return "{\n" + body + INDENT * level + "}"


def _stmt(s, level: int) -> str:
    pad = INDENT * level
    if isinstance(s, Let):
        return f"{pad}let {s.name} = {_expr(s.expr, level)}\n"
    if isinstance(s, ForEach):
        return f"{pad}for {s.var} in {_expr(s.iterable, level)} {_block(s.body, level)}\n"
    if isinstance(s, If):
        text = f"{pad}if {_expr(s.cond, level)} {_block(s.then, level)}"
        if s.orelse:
            text += f" else {_block(s.orelse, level)}"
        return text + "\n"
    if isinstance(s, Answer):
        return f"{pad}answer {_expr(s.expr, level)}\n"
    if isinstance(s, Call):
        return f"{pad}{_expr(s, level)}\n"
    raise TypeError(f"not a statement: {s!r}")


def _literal(value) -> str:
    if isinstance(value, bool):
        raise TypeError("boolean literals are not part of the language")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value, ensure_ascii=False)


def _expr(e, level: int) -> str:
    if isinstance(e, Literal):
        return _literal(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.primitive}({', '.join(_expr(a, level) for a in e.args)})"
    if isinstance(e, ListExpr):
        return f"[{', '.join(_expr(a, level) for a in e.items)}]"
    if isinstance(e, Compare):
        return f"{_expr(e.lhs, level)} {e.op} {_expr(e.rhs, level)}"
    if isinstance(e, ArgBest):
        head = f"arg{e.direction} {e.var} in {_expr(e.iterable, level)}"
        if e.body:
            head += " " + _block(e.body, level)
        return f"{head} by {_expr(e.score, level)}"
    raise TypeError(f"not an expression: {e!r}")
