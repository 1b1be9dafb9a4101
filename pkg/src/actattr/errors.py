"""Exception hierarchy shared by every layer.

Error kinds travel over the bridge by class name, so names are part of the
wire contract.
"""

from __future__ import annotations


class ActAttrError(Exception):
    """Base class for all errors raised by this package."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# geometry
class InvalidBox(ActAttrError, ValueError):
    pass


class EmptyInput(ActAttrError, ValueError):
    pass


class OrdinalOutOfRange(ActAttrError, IndexError):
    pass


class RowOutOfRange(ActAttrError, IndexError):
    pass


# simulator
class SceneError(ActAttrError, ValueError):
    pass


class NoReading(ActAttrError):
    pass


class NotHolding(ActAttrError):
    pass


class UnsupportedQuestion(ActAttrError):
    pass


class MalformedQuestion(ActAttrError):
    pass


class EmptyItemList(ActAttrError):
    pass


# robot control
class ConvergenceFailure(ActAttrError):
    pass


class TargetLost(ActAttrError):
    pass


class AlreadyHolding(ActAttrError):
    pass


class NotGraspable(ActAttrError):
    pass


class TooFar(ActAttrError):
    pass


# program language
class ParseError(ActAttrError):
    """A program text failed to parse or validate.

    ``line`` and ``column`` are 1-based; ``token`` is the offending lexeme.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"{message} at {line}:{column} near {token!r}")


class DslSyntaxError(ParseError):
    pass


class UnknownPrimitive(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class UnboundVariable(ParseError):
    pass


class ProgramError(ActAttrError):
    """A primitive or the evaluator failed while a program was running.

    Keeps the failing node, the underlying error and the trace prefix.
    """

    def __init__(self, message: str, node=None, cause: Exception | None = None, trace=None):
        self.node = node
        self.cause = cause
        self.trace = trace
        super().__init__(message)

    @property
    def cause_kind(self) -> str:
        return type(self.cause).__name__ if self.cause is not None else self.kind


class BudgetExceeded(ProgramError):
    pass


class UnrecognizedQuery(ActAttrError):
    pass


class EndpointUnreachable(ActAttrError):
    pass


class PlannerOutputInvalid(ActAttrError):
    def __init__(self, message: str, raw: str = "", parse_error: Exception | None = None):
        self.raw = raw
        self.parse_error = parse_error
        super().__init__(message)


# bridge
class BindFailure(ActAttrError):
    pass


class BridgeTimeout(ActAttrError, TimeoutError):
    pass


class ProtocolViolation(ActAttrError):
    pass


class RemoteError(ActAttrError):
    """A remote primitive failed with an error kind unknown to this side."""


# evaluation
class KbTooSmall(ActAttrError, ValueError):
    pass


class UnknownMethod(ActAttrError, ValueError):
    pass


def error_class(kind: str) -> type[ActAttrError]:
    """Look up an error class by its transported name."""
    found = _REGISTRY.get(kind)
    if found is None:
        return RemoteError
    return found


def _collect(cls: type) -> dict[str, type]:
    out = {cls.__name__: cls}
    for sub in cls.__subclasses__():
        out.update(_collect(sub))
    return out


_REGISTRY = _collect(ActAttrError)
