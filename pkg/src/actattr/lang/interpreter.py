"""Tree-walking interpreter for parsed programs.

Pure helpers run locally; environment primitives go through ``env.call``.
Every environment call is logged in the returned trace with its arguments
and result, as is every argmin/argmax with the scores it compared.
"""

from __future__ import annotations

from typing import Optional

from actattr.control.robot import EpisodeTrace
from actattr.errors import ActAttrError, BudgetExceeded, EmptyInput, ProgramError
from actattr.geometry import ImagePatch
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
from actattr.lang.primitives import EFFECTFUL, ENV_PRIMITIVES, call_pure
from actattr.lang.values import encode

DEFAULT_BUDGET = 10_000

# errors a primitive may raise on bad input; anything else is a bug and propagates
_PRIMITIVE_ERRORS = (ActAttrError, TypeError, ValueError, KeyError, IndexError, ZeroDivisionError)


class _Answered(Exception):
    def __init__(self, value):
        self.value = value


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.vars: dict = {}
        self.parent = parent

    def lookup(self, name: str):
        scope = self
        while scope is not None:
            if name in scope.vars:
                return scope.vars[name]
            scope = scope.parent
        raise KeyError(name)

    def assign(self, name: str, value):
        # assignment updates the nearest enclosing binding, so loops can keep a running best
        scope = self
        while scope is not None:
            if name in scope.vars:
                scope.vars[name] = value
                return
            scope = scope.parent
        self.vars[name] = value


def resolve_answer(value):
    """Patches resolve to their object id; everything else becomes text."""
    if isinstance(value, ImagePatch):
        return value.object_id
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        return ", ".join(str(resolve_answer(v)) for v in value)
    return str(value)


class Interpreter:
    def __init__(self, env, budget: int = DEFAULT_BUDGET):
        self.env = env
        self.budget = budget
        self.steps = 0
        self.trace = EpisodeTrace()

    def run(self, program: Program):
        try:
            self.block(program.statements, _Scope())
        except _Answered as done:
            return resolve_answer(done.value), self.trace
        raise ProgramError("program finished without an answer", program, None, self.trace)

    def tick(self, node):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"step budget of {self.budget} exhausted", node, None, self.trace)

    def block(self, stmts, scope: _Scope):
        for s in stmts:
            self.stmt(s, scope)

    def stmt(self, s, scope: _Scope):
        self.tick(s)
        if isinstance(s, Let):
            scope.assign(s.name, self.expr(s.expr, scope))
        elif isinstance(s, ForEach):
            items = self.expr(s.iterable, scope)
            if not isinstance(items, list):
                raise ProgramError("for needs a list", s, TypeError(type(items).__name__), self.trace)
            for item in items:
                self.tick(s)
                inner = _Scope(scope)
                inner.vars[s.var] = item
                self.block(s.body, inner)
        elif isinstance(s, If):
            branch = s.then if _truthy(self.expr(s.cond, scope)) else s.orelse
            self.block(branch, _Scope(scope))
        elif isinstance(s, Answer):
            raise _Answered(self.expr(s.expr, scope))
        elif isinstance(s, Call):
            self.expr(s, scope)
        else:
            raise ProgramError(f"unknown statement {type(s).__name__}", s, None, self.trace)

    def expr(self, e, scope: _Scope):
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, Var):
            try:
                return scope.lookup(e.name)
            except KeyError as exc:
                raise ProgramError(f"unbound variable {e.name}", e, exc, self.trace) from None
        if isinstance(e, ListExpr):
            return [self.expr(a, scope) for a in e.items]
        if isinstance(e, Call):
            return self.call(e, scope)
        if isinstance(e, Compare):
            return self.compare(e, scope)
        if isinstance(e, ArgBest):
            return self.argbest(e, scope)
        raise ProgramError(f"unknown expression {type(e).__name__}", e, None, self.trace)

    def call(self, e: Call, scope: _Scope):
        args = [self.expr(a, scope) for a in e.args]
        self.tick(e)
        try:
            if e.primitive not in ENV_PRIMITIVES:
                return call_pure(e.primitive, args)
            value, note = self.env.call(e.primitive, args)
        except _PRIMITIVE_ERRORS as exc:
            raise ProgramError(f"{e.primitive} failed: {exc}", e, exc, self.trace) from exc
        effect = e.primitive in EFFECTFUL and e.primitive != "measure_distance"
        self.trace.append(
            e.primitive,
            encode(args),
            readings=None if effect else encode(value),
            command=encode(value) if effect else None,
            note=note,
        )
        return value

    def compare(self, e: Compare, scope: _Scope) -> bool:
        lhs, rhs = self.expr(e.lhs, scope), self.expr(e.rhs, scope)
        try:
            if e.op == "==":
                return lhs == rhs
            if e.op == "<":
                return lhs < rhs
            if e.op == ">":
                return lhs > rhs
            if e.op == "<=":
                return lhs <= rhs
            return lhs >= rhs
        except TypeError as exc:
            raise ProgramError(f"cannot compare with {e.op}: {exc}", e, exc, self.trace) from exc

    def argbest(self, e: ArgBest, scope: _Scope):
        items = self.expr(e.iterable, scope)
        if not isinstance(items, list):
            raise ProgramError(f"arg{e.direction} needs a list", e, TypeError(type(items).__name__), self.trace)
        if not items:
            raise ProgramError(f"arg{e.direction} over an empty list", e, EmptyInput("no candidates"), self.trace)
        scores = []
        for item in items:
            self.tick(e)
            inner = _Scope(scope)
            inner.vars[e.var] = item
            self.block(e.body, inner)
            score = self.expr(e.score, inner)
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise ProgramError(f"arg{e.direction} score must be a number", e, TypeError(repr(score)), self.trace)
            scores.append(score)
        best = 0
        for i, s in enumerate(scores):
            if (s < scores[best]) if e.direction == "min" else (s > scores[best]):
                best = i
        self.trace.append("arg" + e.direction, [e.var], readings=scores, command={"index": best})
        return items[best]


def _truthy(value) -> bool:
    if isinstance(value, ImagePatch):
        return True
    return bool(value)


def interpret(program: Program, env, budget: int = DEFAULT_BUDGET):
    """Run a program and return ``(answer, trace)``.

    The answer is an object id when the program answers with a patch and
    text otherwise. Failures raise ``ProgramError`` carrying the failing node
    and the trace so far; running out of steps raises ``BudgetExceeded``.
    """
    return Interpreter(env, budget).run(program)
