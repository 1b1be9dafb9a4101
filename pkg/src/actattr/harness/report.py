"""Method x task accuracy tables in markdown, CSV or JSON.

Results for the same method and task (for example several seeds) are
pooled: accuracy is total successes over total episodes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from actattr.harness.methods import METHODS, TASKS, MethodResult

TASK_ORDER = tuple(TASKS.values())
FORMATS = ("markdown", "csv", "json")

NOTES = (
    "vqa_only guesses uniformly among the listed items; it is a non-informative stand-in, not a model.",
    "The GPT-4o comparison row is omitted: it needs a proprietary model.",
)

CSV_FIELDS = ("method", "task", "accuracy", "successes", "episodes", "seeds", "config_digest")


@dataclass(frozen=True)
class Cell:
    method: str
    task: str
    successes: int
    episodes: int
    seeds: tuple[int, ...]
    config_digests: tuple[str, ...]

    @property
    def accuracy(self) -> float:
        return self.successes / self.episodes if self.episodes else 0.0


def _order(key: str, known: Sequence[str]) -> tuple:
    return (known.index(key), "") if key in known else (len(known), key)


def pool(results: Sequence[MethodResult]) -> list[Cell]:
    groups: dict[tuple[str, str], list[MethodResult]] = {}
    for r in results:
        groups.setdefault((r.method, r.task), []).append(r)
    cells = []
    for (method, task), rs in groups.items():
        cells.append(Cell(
            method, task,
            sum(r.successes for r in rs),
            sum(r.episodes for r in rs),
            tuple(sorted({r.seed for r in rs})),
            tuple(sorted({r.config_digest for r in rs})),
        ))
    cells.sort(key=lambda c: (_order(c.method, METHODS), _order(c.task, TASK_ORDER)))
    return cells


def methods_and_tasks(cells):
    methods = sorted({c.method for c in cells}, key=lambda m: _order(m, METHODS))
    tasks = sorted({c.task for c in cells}, key=lambda t: _order(t, TASK_ORDER))
    return methods, tasks


def to_markdown(cells: list[Cell]) -> str:
    methods, tasks = methods_and_tasks(cells)
    index = {(c.method, c.task): c for c in cells}
    lines = ["| method | " + " | ".join(tasks) + " |", "|---|" + "---|" * len(tasks)]
    for m in methods:
        row = []
        for t in tasks:
            c = index.get((m, t))
            row.append("" if c is None else f"{c.accuracy:.2f} ({c.successes}/{c.episodes})")
        lines.append(f"| {m} | " + " | ".join(row) + " |")
    seeds = sorted({s for c in cells for s in c.seeds})
    digests = sorted({d for c in cells for d in c.config_digests})
    lines += ["", f"seeds: {', '.join(map(str, seeds))}", f"config: {', '.join(digests)}"]
    lines += [f"note: {n}" for n in NOTES]
    return "\n".join(lines) + "\n"


def to_csv(cells: list[Cell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for c in cells:
        writer.writerow([c.method, c.task, f"{c.accuracy:.6f}", c.successes, c.episodes,
                         " ".join(map(str, c.seeds)), " ".join(c.config_digests)])
    return buf.getvalue()


def to_json(cells: list[Cell]) -> str:
    doc = {
        "rows": [
            {
                "method": c.method,
                "task": c.task,
                "accuracy": c.accuracy,
                "successes": c.successes,
                "episodes": c.episodes,
                "seeds": list(c.seeds),
                "config_digests": list(c.config_digests),
            }
            for c in cells
        ],
        "notes": list(NOTES),
    }
    return json.dumps(doc, indent=2) + "\n"


def report(results: Sequence[MethodResult], fmt: str = "markdown") -> str:
    """Render pooled results; ``fmt`` is markdown, csv or json."""
    if not results:
        raise ValueError("no results to report")
    cells = pool(results)
    if fmt == "markdown":
        return to_markdown(cells)
    if fmt == "csv":
        return to_csv(cells)
    if fmt == "json":
        return to_json(cells)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def report_schema() -> dict:
    return json.loads(resources.files("actattr.data").joinpath("report_schema.json").read_text())
