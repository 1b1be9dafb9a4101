"""End-to-end episodes: plan a query, then interpret it through an environment."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from actattr.bridge.client import RemoteEnv
from actattr.bridge.protocol import parse_address
from actattr.errors import ActAttrError
from actattr.lang.interpreter import DEFAULT_BUDGET, interpret
from actattr.lang.planner import Query, plan_external, plan_template
from actattr.lang.printer import print_program
from actattr.sim.oracles import NoiseProfile


@dataclass
class EpisodeResult:
    query: str
    answer: Optional[str] = None
    ground_truth: Optional[str] = None
    program: str = ""
    trace: list = field(default_factory=list)
    failed: Optional[str] = None
    detail: str = ""
    latency: dict = field(default_factory=dict)

    @property
    def correct(self) -> bool:
        return self.failed is None and self.answer is not None and self.answer == self.ground_truth

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "answer": self.answer,
            "ground_truth": self.ground_truth,
            "correct": self.correct,
            "failed": self.failed,
            "detail": self.detail,
            "program": self.program,
            "trace": self.trace,
            "latency": self.latency,
        }


def latency_stats(samples: list[float], wall: float) -> dict:
    return {
        "calls": len(samples),
        "total_s": sum(samples),
        "mean_s": statistics.fmean(samples) if samples else 0.0,
        "max_s": max(samples, default=0.0),
        "wall_s": wall,
    }


def run_episode(query: Union[Query, str], env, planner_endpoint: Optional[str] = None,
                budget: int = DEFAULT_BUDGET) -> EpisodeResult:
    """Plan and interpret against any environment; failures land in the result."""
    q = query if isinstance(query, Query) else Query(query)
    result = EpisodeResult(q.text, ground_truth=q.ground_truth)
    try:
        program = plan_external(q, planner_endpoint) if planner_endpoint else plan_template(q)
        result.program = print_program(program)
        result.answer, trace = interpret(program, env, budget)
        result.trace = trace.to_list()
    except ActAttrError as exc:
        result.failed = getattr(exc, "cause_kind", exc.kind)
        result.detail = str(exc)
        trace = getattr(exc, "trace", None)
        if trace is not None:
            result.trace = trace.to_list()
    return result


def run_bridged_episode(
    query: Union[Query, str],
    endpoint: str,
    scene: Optional[dict] = None,
    noise: Optional[NoiseProfile] = None,
    planner_endpoint: Optional[str] = None,
    timeout: float = 5.0,
) -> EpisodeResult:
    """Run one episode with every primitive routed over the bridge.

    ``endpoint`` is the bridge's ``HOST:PORT``. When ``scene`` is given the
    server loads it first, otherwise the session's default world is used.
    Errors never escape: they are reported in ``EpisodeResult.failed``.
    """
    q = query if isinstance(query, Query) else Query(query)
    start = time.perf_counter()
    try:
        host, port = parse_address(endpoint)
        env = RemoteEnv(host, port, timeout)
    except (ActAttrError, ValueError) as exc:
        kind = exc.kind if isinstance(exc, ActAttrError) else type(exc).__name__
        return EpisodeResult(q.text, ground_truth=q.ground_truth, failed=kind, detail=str(exc))
    with env:
        try:
            if scene is not None:
                env.load_scene(scene, noise.to_dict() if noise else None)
        except ActAttrError as exc:
            return EpisodeResult(q.text, ground_truth=q.ground_truth, failed=exc.kind, detail=str(exc))
        setup = len(env.latencies)
        result = run_episode(q, env, planner_endpoint)
        result.latency = latency_stats(env.latencies[setup:], time.perf_counter() - start)
    return result
