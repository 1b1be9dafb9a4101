"""Planners: turn a query into a program.

``plan_template`` compiles the four supported query families into fixed
program shapes. ``plan_external`` asks a remote endpoint for program text and
validates it without any repair.
"""

from __future__ import annotations

import json
import re
import socket
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass
from typing import Optional, Union

from actattr.errors import EndpointUnreachable, ParseError, PlannerOutputInvalid, UnrecognizedQuery
from actattr.lang.ast import Program
from actattr.lang.parser import parse
from actattr.lang.primitives import api_doc as default_api_doc

FAMILIES = ("location_ordinal", "size_superlative", "weight_extreme", "distance_extreme")

Position = Union[int, str]


@dataclass(frozen=True)
class Query:
    text: str
    family: Optional[str] = None
    ground_truth: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Query":
        return cls(d["text"], d.get("family"), d.get("ground_truth"))


# -- query text grammar ----------------------------------------------------

_ORDINAL_WORDS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}
_ORD = r"(?:(?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|\d+(?:st|nd|rd|th))(?: to last)?|last)"


def ordinal_word(k: int) -> str:
    for word, value in _ORDINAL_WORDS.items():
        if value == k:
            return word
    suffix = "th" if 10 <= k % 100 <= 20 else {1: "st", 2: "nd", 3: "rd"}.get(k % 10, "th")
    return f"{k}{suffix}"


def signed_ordinal_phrase(k: int) -> str:
    """1 -> "first", -1 -> "last", -2 -> "second to last"."""
    if k > 0:
        return ordinal_word(k)
    if k == -1:
        return "last"
    return f"{ordinal_word(-k)} to last"


def parse_ordinal(phrase: str) -> int:
    phrase = phrase.strip()
    if phrase == "last":
        return -1
    from_end = phrase.endswith(" to last")
    word = phrase[: -len(" to last")] if from_end else phrase
    if word in _ORDINAL_WORDS:
        k = _ORDINAL_WORDS[word]
    elif re.fullmatch(r"\d+(st|nd|rd|th)", word):
        k = int(word[:-2])
    else:
        raise UnrecognizedQuery(f"not an ordinal: {phrase!r}")
    if k == 0:
        raise UnrecognizedQuery("ordinals start at first")
    return -k if from_end else k


_ROW = rf"(?:(?P<row>{_ORD}|top|bottom|middle) row(?: from the (?P<row_from>top|bottom))?|(?P<row_edge>top|bottom))"
_LOCATION_RE = re.compile(
    rf"^(?:the )?(?P<pos>{_ORD}) (?P<name>[a-z][a-z \-]*?) from the (?P<axis>left|right|top|bottom)"
    rf"(?: (?:at|in|on) the {_ROW})?$"
)
_MIDDLE_RE = re.compile(
    rf"^(?:the )?(?P<name>[a-z][a-z \-]*?) in the middle(?: (?:at|in|on) the {_ROW})?$"
)

# adjective -> (dimension, extreme); absolute forms resolve like superlatives
SIZE_ADJECTIVES = {
    "long": ("width", "max"), "longest": ("width", "max"),
    "wide": ("width", "max"), "widest": ("width", "max"),
    "short": ("width", "min"), "shortest": ("width", "min"),
    "narrow": ("width", "min"), "narrowest": ("width", "min"),
    "tall": ("height", "max"), "tallest": ("height", "max"),
    "high": ("height", "max"), "highest": ("height", "max"),
    "low": ("height", "min"), "lowest": ("height", "min"),
    "large": ("area", "max"), "largest": ("area", "max"),
    "big": ("area", "max"), "biggest": ("area", "max"),
    "small": ("area", "min"), "smallest": ("area", "min"),
    "tiny": ("area", "min"), "tiniest": ("area", "min"),
}
_SIZE_RE = re.compile(
    r"^(?:the )?(?:most )?(?P<adj>" + "|".join(sorted(SIZE_ADJECTIVES, key=len, reverse=True)) + r") (?P<name>[a-z][a-z \-]*)$"
)

_ITEMS = r"\{?(?P<items>[^{}?]+?)\}?"
_WEIGHT_RE = re.compile(
    rf"^out of the {_ITEMS},? which one is the (?P<dir>most lightweight|lightest|heaviest|most heavy)$"
)
_DISTANCE_RE = re.compile(
    rf"^out of the {_ITEMS},? which one is (?:the )?(?P<dir>closer|closest|nearer|nearest|farther|farthest|further|furthest)"
    r"(?: (?:to|from) me)?$"
)


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower()).rstrip("?.!").strip()


def _items(text: str) -> list[str]:
    items = [s.strip() for s in re.split(r",|\band\b", text) if s.strip()]
    if not items:
        raise UnrecognizedQuery("no items listed")
    return items


@dataclass(frozen=True)
class ParsedQuery:
    family: str
    name: str = ""
    items: tuple[str, ...] = ()
    position: Position = 1
    axis: str = "from_left"
    row: Optional[Position] = None
    dim: str = "area"
    extreme: str = "max"


def _row_spec(m: re.Match) -> Optional[Position]:
    edge = m.group("row_edge")
    if edge:
        return 1 if edge == "top" else -1
    row = m.group("row")
    if row is None:
        return None
    if row in ("top", "bottom", "middle"):
        return {"top": 1, "bottom": -1, "middle": "middle"}[row]
    k = parse_ordinal(row)
    return -k if m.group("row_from") == "bottom" else k


def parse_query(text: str) -> ParsedQuery:
    """Recognize a query's family and its slots."""
    t = _normalize(text)
    m = _WEIGHT_RE.match(t)
    if m:
        extreme = "min" if m.group("dir") in ("most lightweight", "lightest") else "max"
        return ParsedQuery("weight_extreme", items=tuple(_items(m.group("items"))), extreme=extreme)
    m = _DISTANCE_RE.match(t)
    if m:
        extreme = "min" if m.group("dir") in ("closer", "closest", "nearer", "nearest") else "max"
        return ParsedQuery("distance_extreme", items=tuple(_items(m.group("items"))), extreme=extreme)
    m = _LOCATION_RE.match(t)
    if m:
        return ParsedQuery(
            "location_ordinal", name=m.group("name").strip(), position=parse_ordinal(m.group("pos")),
            axis="from_" + m.group("axis"), row=_row_spec(m),
        )
    m = _MIDDLE_RE.match(t)
    if m:
        return ParsedQuery("location_ordinal", name=m.group("name").strip(), position="middle", row=_row_spec(m))
    m = _SIZE_RE.match(t)
    if m:
        dim, extreme = SIZE_ADJECTIVES[m.group("adj")]
        return ParsedQuery("size_superlative", name=m.group("name").strip(), dim=dim, extreme=extreme)
    raise UnrecognizedQuery(f"no template covers {text!r}")


# -- program templates -----------------------------------------------------

def _q(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _pos(p: Position) -> str:
    return str(p)


def _candidates(items) -> str:
    finds = ", ".join(f"top(find({_q(name)}), 1)" for name in items)
    return f"flatten([{finds}])"


def template_text(q: Union[Query, str]) -> str:
    """Program text for a query (before parsing)."""
    text = q.text if isinstance(q, Query) else q
    pq = parse_query(text)
    if isinstance(q, Query) and q.family is not None and q.family != pq.family:
        raise UnrecognizedQuery(f"query text reads as {pq.family}, not {q.family}")
    if pq.family == "location_ordinal":
        lines = [f"let ps = find({_q(pq.name)})"]
        if pq.row is None:
            lines.append(f"answer select_ordinal(ps, {_pos(pq.position)}, {pq.axis})")
        else:
            lines += [
                "let rows = cluster_rows(ps)",
                f"let row = item(rows, {_pos(pq.row)})",
                f"answer select_ordinal(row, {_pos(pq.position)}, {pq.axis})",
            ]
        return "\n".join(lines) + "\n"
    if pq.family == "size_superlative":
        return f"let ps = find({_q(pq.name)})\nanswer select_superlative(ps, {pq.dim}, {pq.extreme})\n"
    if pq.family == "weight_extreme":
        return (
            "let home = get_pose()\n"
            f"let targets = {_candidates(pq.items)}\n"
            f"answer arg{pq.extreme} p in targets {{\n"
            "  go_to_object(p)\n"
            "  pick_up(p)\n"
            "  let w = measure_weight()\n"
            '  put_on("floor")\n'
            "  go_to_pose(home)\n"
            "} by w\n"
        )
    return (
        "let home = get_pose()\n"
        f"let targets = {_candidates(pq.items)}\n"
        f"answer arg{pq.extreme} p in targets {{\n"
        "  let d = measure_distance(p)\n"
        "  go_to_pose(home)\n"
        "} by d\n"
    )


def plan_template(q: Union[Query, str]) -> Program:
    """Compile a recognized query into its family's program.

    >>> from actattr.lang.printer import print_program
    >>> print(print_program(plan_template("the tallest bottle")), end="")
    let ps = find("bottle")
    answer select_superlative(ps, height, max)
    """
    return parse(template_text(q))


# -- external planner ------------------------------------------------------

def plan_external(
    q: Union[Query, str],
    endpoint: str,
    api_doc: Optional[str] = None,
    timeout: float = 30.0,
    retries: int = 1,
) -> Program:
    """Ask a remote planner for a program.

    POSTs JSON ``{api_doc, query}`` and expects ``{program_text}`` back.
    Connection failures are retried ``retries`` times; an invalid program is
    never retried or repaired and raises ``PlannerOutputInvalid`` with the
    raw response attached.
    """
    text = q.text if isinstance(q, Query) else q
    body = json.dumps({"api_doc": api_doc if api_doc is not None else default_api_doc(), "query": text}).encode()
    request = urllib.request.Request(endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST")
    raw = None
    last: Exception | None = None
    for _ in range(retries + 1):
        try:
            with urllib.request.urlopen(request, timeout=timeout) as resp:
                raw = resp.read().decode("utf-8", errors="replace")
            break
        except urllib.error.HTTPError as exc:
            last = exc
            if exc.code < 500:
                break
        except (urllib.error.URLError, socket.timeout, ConnectionError, OSError) as exc:
            last = exc
    if raw is None:
        raise EndpointUnreachable(f"planner endpoint {endpoint} failed: {last}")
    try:
        payload = json.loads(raw)
        program_text = payload["program_text"]
        if not isinstance(program_text, str):
            raise TypeError("program_text is not a string")
    except (ValueError, KeyError, TypeError) as exc:
        raise PlannerOutputInvalid(f"planner response is not {{program_text}}: {exc}", raw) from None
    try:
        return parse(program_text)
    except ParseError as exc:
        raise PlannerOutputInvalid(f"planner program does not parse: {exc}", program_text, exc) from None
