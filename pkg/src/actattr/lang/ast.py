"""AST for perception-action programs.

Nodes are frozen dataclasses so structural equality is plain ``==``.
Statement lists are tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

COMPARE_OPS = ("<", ">", "<=", ">=", "==")


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    primitive: str
    args: tuple = ()


@dataclass(frozen=True)
class ListExpr:
    items: tuple = ()


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class ArgBest:
    """Element of ``iterable`` with the smallest/largest ``score``.

    ``body`` runs once per element before ``score`` is evaluated, so a score
    can depend on measurements taken in the body.
    """

    direction: str
    var: str
    iterable: "Expr"
    body: tuple
    score: "Expr"


@dataclass(frozen=True)
class Let:
    name: str
    expr: "Expr"


@dataclass(frozen=True)
class ForEach:
    var: str
    iterable: "Expr"
    body: tuple = ()


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: tuple = ()
    orelse: tuple = ()


@dataclass(frozen=True)
class Answer:
    expr: "Expr"


@dataclass(frozen=True)
class Program:
    statements: tuple = ()


Expr = Union[Literal, Var, Call, ListExpr, Compare, ArgBest]
Stmt = Union[Let, ForEach, If, Answer, Call]


def walk(node):
    """Yield every node in the tree, parents first."""
    yield node
    if isinstance(node, Program):
        for s in node.statements:
            yield from walk(s)
    elif isinstance(node, Let):
        yield from walk(node.expr)
    elif isinstance(node, ForEach):
        yield from walk(node.iterable)
        for s in node.body:
            yield from walk(s)
    elif isinstance(node, If):
        yield from walk(node.cond)
        for s in node.then + node.orelse:
            yield from walk(s)
    elif isinstance(node, Answer):
        yield from walk(node.expr)
    elif isinstance(node, Call):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, ListExpr):
        for a in node.items:
            yield from walk(a)
    elif isinstance(node, Compare):
        yield from walk(node.lhs)
        yield from walk(node.rhs)
    elif isinstance(node, ArgBest):
        yield from walk(node.iterable)
        for s in node.body:
            yield from walk(s)
        yield from walk(node.score)
