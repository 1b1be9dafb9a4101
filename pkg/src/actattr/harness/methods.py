"""The four compared methods and per-suite scoring.

``perception_action`` runs the template-planned embodied program.
``attribute_api`` runs a program that may only look and ask: it chains VQA
and the language model for weight, and for distance it ranks objects by how
close they appear to the image center. ``ovd_only`` asks the detector once
with the attribute folded into the label. ``vqa_only`` lists the items and
guesses uniformly among them, a non-informative stand-in for a VLM asked
about a non-visual attribute.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from actattr.control.config import ControllerConfig, default_config
from actattr.errors import ActAttrError, UnknownMethod
from actattr.harness.suites import Episode, Suite
from actattr.lang.env import LocalEnv
from actattr.lang.interpreter import interpret
from actattr.lang.parser import parse
from actattr.lang.planner import parse_query, plan_template, template_text
from actattr.sim.oracles import KnowledgeBase, NoiseProfile, VqaQuestion, oracle_find, oracle_vqa, weight_question

METHODS = ("ovd_only", "vqa_only", "attribute_api", "perception_action")

TASKS = {
    "weight_extreme": "weight",
    "distance_extreme": "distance",
    "location_ordinal": "location",
    "size_superlative": "size",
}


@dataclass
class EpisodeOutcome:
    index: int
    answer: Optional[str]
    ground_truth: str
    correct: bool
    error: Optional[str] = None


@dataclass
class MethodResult:
    method: str
    family: str
    seed: int
    outcomes: list[EpisodeOutcome] = field(default_factory=list)
    noise: dict = field(default_factory=dict)
    config_digest: str = ""

    @property
    def episodes(self) -> int:
        return len(self.outcomes)

    @property
    def successes(self) -> int:
        return sum(o.correct for o in self.outcomes)

    @property
    def accuracy(self) -> float:
        return self.successes / self.episodes if self.outcomes else 0.0

    @property
    def task(self) -> str:
        return TASKS.get(self.family, self.family)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "family": self.family,
            "task": self.task,
            "seed": self.seed,
            "episodes": self.episodes,
            "successes": self.successes,
            "accuracy": self.accuracy,
            "noise": self.noise,
            "config_digest": self.config_digest,
            "outcomes": [asdict(o) for o in self.outcomes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MethodResult":
        return cls(
            d["method"], d["family"], int(d["seed"]),
            [EpisodeOutcome(**o) for o in d.get("outcomes", [])],
            d.get("noise", {}), d.get("config_digest", ""),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MethodResult":
        return cls.from_dict(json.loads(Path(path).read_text()))


# -- baseline programs and labels ------------------------------------------

def attribute_api_text(query_text: str) -> str:
    """Program for the non-embodied attribute-detection API."""
    pq = parse_query(query_text)
    if pq.family == "weight_extreme":
        word = "lightest" if pq.extreme == "min" else "heaviest"
        ask = weight_question(word, "{}")
        return (
            'let items = visual_query("list_items")\n'
            f"let name = language_query(format({json.dumps(ask)}, items))\n"
            "let ps = find(name)\n"
            "if exists(ps) {\n"
            "  answer first(ps)\n"
            "} else {\n"
            '  answer "not found"\n'
            "}\n"
        )
    if pq.family == "distance_extreme":
        finds = ", ".join(f"top(find({json.dumps(n)}), 1)" for n in pq.items)
        return (
            "let center = image_center()\n"
            f"let targets = flatten([{finds}])\n"
            f"answer arg{pq.extreme} p in targets by pixel_distance(p, center)\n"
        )
    # location and size need no action: the embodied template is already passive
    return template_text(query_text)


def ovd_label(query_text: str) -> str:
    pq = parse_query(query_text)
    if pq.family == "weight_extreme":
        return "a lightweight object" if pq.extreme == "min" else "a heavy object"
    if pq.family == "distance_extreme":
        return "the closest object" if pq.extreme == "min" else "the farthest object"
    return query_text


# -- episode runners -------------------------------------------------------

def _resolve_top(patches) -> Optional[str]:
    if not patches:
        return None
    best = patches[0]
    for p in patches[1:]:
        if p.confidence > best.confidence:
            best = p
    return best.object_id


def _run_ovd(episode: Episode, noise, config, kb) -> Optional[str]:
    world = episode.world()
    return _resolve_top(oracle_find(world, None, ovd_label(episode.query.text), noise))


def _run_vqa(episode: Episode, noise, config, kb) -> Optional[str]:
    world = episode.world()
    listing = oracle_vqa(world, None, VqaQuestion("list_items"))
    items = [s.strip() for s in listing.split(",") if s.strip()]
    if not items:
        return None
    rng = np.random.default_rng([world.rng_seed & 0xFFFFFFFF, 0x56514])
    guess = items[int(rng.integers(len(items)))]
    patches = oracle_find(world, None, guess, noise)
    return patches[0].object_id if patches else None


def _run_program(text_or_program, episode: Episode, noise, config, kb) -> Optional[str]:
    program = parse(text_or_program) if isinstance(text_or_program, str) else text_or_program
    answer, _ = interpret(program, LocalEnv(episode.world(), noise, kb, config))
    return answer


def _run_attribute_api(episode: Episode, noise, config, kb):
    return _run_program(attribute_api_text(episode.query.text), episode, noise, config, kb)


def _run_perception_action(episode: Episode, noise, config, kb):
    return _run_program(plan_template(episode.query), episode, noise, config, kb)


RUNNERS = {
    "ovd_only": _run_ovd,
    "vqa_only": _run_vqa,
    "attribute_api": _run_attribute_api,
    "perception_action": _run_perception_action,
}


def run_episode(method: str, episode: Episode, index: int = 0, noise=None, config=None, kb=None) -> EpisodeOutcome:
    """Run one episode; failures are recorded as incorrect, never raised."""
    runner = RUNNERS.get(method)
    if runner is None:
        raise UnknownMethod(f"unknown method {method!r}; expected one of {METHODS}")
    noise = noise or NoiseProfile()
    config = config or default_config()
    kb = kb or KnowledgeBase.bundled()
    truth = episode.query.ground_truth
    try:
        answer = runner(episode, noise, config, kb)
    except ActAttrError as exc:
        return EpisodeOutcome(index, None, truth, False, getattr(exc, "cause_kind", exc.kind))
    return EpisodeOutcome(index, answer, truth, answer is not None and answer == truth)


def run_method(
    method: str,
    suite: Suite,
    noise: Optional[NoiseProfile] = None,
    config: Optional[ControllerConfig] = None,
    kb: Optional[KnowledgeBase] = None,
) -> MethodResult:
    if method not in RUNNERS:
        raise UnknownMethod(f"unknown method {method!r}; expected one of {METHODS}")
    if not suite.episodes:
        raise ValueError("suite has no episodes")
    noise = noise or NoiseProfile()
    config = config or default_config()
    kb = kb or KnowledgeBase.bundled()
    outcomes = [run_episode(method, e, i, noise, config, kb) for i, e in enumerate(suite.episodes)]
    return MethodResult(method, suite.family, suite.seed, outcomes, noise.to_dict(), config.digest())
