"""Lexer and recursive-descent parser for program text (see docs/grammar.md).

Parsing also validates the program: primitives must exist with the right
arity, variables must be bound before use, and every path must end in an
``answer``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from actattr.errors import ArityMismatch, DslSyntaxError, UnboundVariable, UnknownPrimitive
from actattr.lang.ast import (
    COMPARE_OPS,
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
from actattr.lang.primitives import REGISTRY, SYMBOLS

KEYWORDS = frozenset({"let", "for", "in", "if", "else", "answer", "argmin", "argmax", "by"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|==|[<>=(){}\[\],])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError("unexpected character", line, pos - line_start + 1, text[pos])
        kind = m.lastgroup
        lexeme = m.group()
        col = pos - line_start + 1
        if kind == "newline":
            tokens.append(Token("newline", "\n", line, col))
            line, line_start = line + 1, m.end()
        elif kind == "ident":
            tokens.append(Token("keyword" if lexeme in KEYWORDS else "ident", lexeme, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.scopes: list[set[str]] = [set()]
        self.depth = 0  # bracket nesting; newlines inside () and [] are insignificant

    # -- token helpers
    def peek(self) -> Token:
        i = self.pos
        if self.depth:
            while self.tokens[i].kind == "newline":
                i += 1
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        self.pos = self.tokens.index(tok, self.pos) + 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text or kind
            raise DslSyntaxError(f"expected {want!r}", tok.line, tok.column, tok.text or "<eof>")
        return self.next()

    def skip_newlines(self):
        while self.tokens[self.pos].kind == "newline":
            self.pos += 1

    def peek_past_newlines(self) -> Token:
        i = self.pos
        while self.tokens[i].kind == "newline":
            i += 1
        return self.tokens[i]

    # -- scopes
    def bound(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def bind(self, tok: Token):
        if tok.text in REGISTRY:
            raise DslSyntaxError("cannot rebind a primitive name", tok.line, tok.column, tok.text)
        self.scopes[-1].add(tok.text)

    # -- grammar
    def program(self) -> Program:
        stmts = self.statements(until="eof")
        self.expect("eof")
        if not _terminates(stmts):
            tok = self.tokens[-1]
            raise DslSyntaxError("program can finish without an answer", tok.line, tok.column, "<eof>")
        return Program(tuple(stmts))

    def statements(self, until: str, allow_answer: bool = True) -> list:
        stmts = []
        self.skip_newlines()
        while not self.at("eof") and not (until == "}" and self.at("op", "}")):
            tok = self.peek()
            if stmts and _terminates(stmts):
                raise DslSyntaxError("unreachable statement after answer", tok.line, tok.column, tok.text)
            stmts.append(self.statement(allow_answer))
            if not (self.at("newline") or self.at("eof") or self.at("op", "}")):
                bad = self.peek()
                raise DslSyntaxError("expected end of line", bad.line, bad.column, bad.text)
            self.skip_newlines()
        return stmts

    def block(self, allow_answer: bool = True, bind: Token | None = None) -> tuple:
        self.expect("op", "{")
        saved, self.depth = self.depth, 0
        self.scopes.append(set())
        if bind is not None:
            self.bind(bind)
        stmts = self.statements(until="}", allow_answer=allow_answer)
        self.expect("op", "}")
        self.scopes.pop()
        self.depth = saved
        return tuple(stmts)

    def statement(self, allow_answer: bool):
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.text == "let":
                self.next()
                name = self.expect("ident")
                self.expect("op", "=")
                expr = self.expr()
                self.bind(name)
                return Let(name.text, expr)
            if tok.text == "for":
                self.next()
                var = self.expect("ident")
                self.expect("keyword", "in")
                iterable = self.expr()
                body = self.block(allow_answer, bind=var)
                return ForEach(var.text, iterable, body)
            if tok.text == "if":
                return self.if_stmt(allow_answer)
            if tok.text == "answer":
                if not allow_answer:
                    raise DslSyntaxError("answer is not allowed inside argmin/argmax", tok.line, tok.column, tok.text)
                self.next()
                return Answer(self.expr())
        if tok.kind == "ident" and self.tokens[self.pos + 1].text == "(":
            return self.call()
        raise DslSyntaxError("expected a statement", tok.line, tok.column, tok.text or "<eof>")

    def if_stmt(self, allow_answer: bool) -> If:
        self.expect("keyword", "if")
        cond = self.condition()
        then = self.block(allow_answer)
        orelse: tuple = ()
        if self.peek_past_newlines().text == "else":
            self.skip_newlines()
            self.next()
            if self.at("keyword", "if"):
                orelse = (self.if_stmt(allow_answer),)
            else:
                orelse = self.block(allow_answer)
        return If(cond, then, orelse)

    def condition(self):
        lhs = self.expr()
        if self.peek().kind == "op" and self.peek().text in COMPARE_OPS:
            op = self.next().text
            return Compare(op, lhs, self.expr())
        return lhs

    def expr(self):
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            text = tok.text
            return Literal(float(text) if any(c in text for c in ".eE") else int(text))
        if tok.kind == "string":
            self.next()
            try:
                return Literal(json.loads(tok.text))
            except json.JSONDecodeError:
                raise DslSyntaxError("bad string escape", tok.line, tok.column, tok.text) from None
        if tok.kind == "op" and tok.text == "[":
            return self.list_expr()
        if tok.kind == "keyword" and tok.text in ("argmin", "argmax"):
            return self.argbest()
        if tok.kind == "ident":
            if self.peek_after(tok).text == "(":
                return self.call()
            self.next()
            if self.bound(tok.text):
                return Var(tok.text)
            if tok.text in SYMBOLS:
                return Literal(tok.text)
            raise UnboundVariable("variable used before assignment", tok.line, tok.column, tok.text)
        raise DslSyntaxError("expected an expression", tok.line, tok.column, tok.text or "<eof>")

    def peek_after(self, tok: Token) -> Token:
        i = self.tokens.index(tok, self.pos) + 1
        while self.depth and self.tokens[i].kind == "newline":
            i += 1
        return self.tokens[i]

    def list_expr(self) -> ListExpr:
        self.expect("op", "[")
        self.depth += 1
        items = []
        if not self.at("op", "]"):
            items.append(self.expr())
            while self.at("op", ","):
                self.next()
                items.append(self.expr())
        self.expect("op", "]")
        self.depth -= 1
        return ListExpr(tuple(items))

    def call(self) -> Call:
        name = self.expect("ident")
        binding = REGISTRY.get(name.text)
        if binding is None:
            raise UnknownPrimitive("unknown primitive", name.line, name.column, name.text)
        self.expect("op", "(")
        self.depth += 1
        args = []
        if not self.at("op", ")"):
            args.append(self.expr())
            while self.at("op", ","):
                self.next()
                args.append(self.expr())
        self.expect("op", ")")
        self.depth -= 1
        lo, hi = binding.arity
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = f"{lo}" if lo == hi else f"{lo}..{hi if hi is not None else ''}"
            raise ArityMismatch(f"{name.text} takes {want} arguments, got {len(args)}", name.line, name.column, name.text)
        return Call(name.text, tuple(args))

    def argbest(self) -> ArgBest:
        direction = self.next().text[3:]
        var = self.expect("ident")
        self.expect("keyword", "in")
        iterable = self.expr()
        self.scopes.append(set())
        self.bind(var)
        body: tuple = ()
        if self.at("op", "{"):
            self.scopes.pop()
            # the block's bindings stay visible to the score expression
            self.expect("op", "{")
            saved, self.depth = self.depth, 0
            self.scopes.append({var.text})
            body = tuple(self.statements(until="}", allow_answer=False))
            self.expect("op", "}")
            self.depth = saved
            if self.peek_past_newlines().text == "by":
                self.skip_newlines()
        self.expect("keyword", "by")
        score = self.expr()
        self.scopes.pop()
        return ArgBest(direction, var.text, iterable, body, score)


def _terminates(stmts) -> bool:
    for s in stmts:
        if isinstance(s, Answer):
            return True
        if isinstance(s, If) and _terminates(s.then) and _terminates(s.orelse):
            return True
    return False


def parse(text: str) -> Program:
    """Parse and validate program text.

    >>> len(parse('let ps = find("umbrella")\\nanswer select_ordinal(ps, 2, from_left)').statements)
    2
    """
    return _Parser(text).program()
