"""Prompt assembly: task description, schema instructions, in-context
examples, and the query chunk, in that fixed order.

With zero shots the examples section is omitted entirely; the few-shot
prompt strictly extends the one-shot prompt because shots are always taken
as a prefix of the (basic-to-hard ordered) example pool.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InsufficientExamples, MalformedRecord
from .schema import ExtractionSchema, parse_structured, render_schema
from .splitter import Chunk

EXAMPLE_HEADER = "### Example {k}"
ANSWER_HEADER = "### Answer"
QUERY_HEADER = "### Query"

SHOT_COUNTS = {"zero_shot": 0, "one_shot": 1, "few_shot": 3}


@dataclass(frozen=True)
class ShotExample:
    input_excerpt: str
    expected_output: str  # JSON object text conforming to the active schema

    def validate(self, schema: ExtractionSchema) -> None:
        result = parse_structured(self.expected_output, schema)
        if result.status != "clean":
            raise ValueError(
                f"shot example output does not parse clean ({result.status}): "
                f"{result.diagnostics}"
            )


@dataclass(frozen=True)
class Strategy:
    name: str
    shot_count: int

    @classmethod
    def from_name(cls, name: str, shot_count: int | None = None) -> "Strategy":
        if name in SHOT_COUNTS:
            expected = SHOT_COUNTS[name]
            if shot_count is not None and shot_count != expected:
                raise ValueError(f"strategy {name!r} implies shot_count={expected}")
            return cls(name, expected)
        if shot_count is None:
            raise ValueError(f"unknown strategy {name!r} needs an explicit shot_count")
        return cls(name, shot_count)


@dataclass(frozen=True)
class PromptSpec:
    task_description: str
    shots: tuple
    schema: ExtractionSchema

    def __post_init__(self):
        if len(self.shots) > 5:
            raise ValueError("at most 5 in-context examples are supported")


def strategy_shots(strategy: Strategy, pool: list) -> list:
    """Take the strategy's shot count from the front of the example pool.

    The pool is ordered basic to hard, so few-shot is a strict superset
    of one-shot.
    """
    if len(pool) < strategy.shot_count:
        raise InsufficientExamples(
            f"{strategy.name} needs {strategy.shot_count} examples, pool has {len(pool)}"
        )
    return list(pool[: strategy.shot_count])


def load_shot_pool(path) -> list:
    """Read a shot pool file: JSON list of {input_excerpt, expected_output}."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecord(str(p), f"invalid JSON: {exc}")
    if not isinstance(data, list):
        raise MalformedRecord(str(p), "shot pool must be a JSON list")
    try:
        return [ShotExample(d["input_excerpt"], d["expected_output"]) for d in data]
    except (KeyError, TypeError) as exc:
        raise MalformedRecord(str(p), str(exc))


def build_prompt(spec: PromptSpec, chunk: Chunk) -> str:
    """Deterministic prompt: task, schema, examples (if any), query."""
    sections = [spec.task_description.rstrip(), "", render_schema(spec.schema)]
    for k, shot in enumerate(spec.shots, start=1):
        sections.append("")
        sections.append(EXAMPLE_HEADER.format(k=k))
        sections.append(shot.input_excerpt.rstrip())
        sections.append(ANSWER_HEADER)
        sections.append(shot.expected_output.rstrip())
    sections.append("")
    sections.append(QUERY_HEADER)
    sections.append(chunk.text)
    return "\n".join(sections)


def query_section(prompt: str) -> str:
    """Extract the query text back out of a built prompt (used by mocks)."""
    marker = "\n" + QUERY_HEADER + "\n"
    pos = prompt.rfind(marker)
    if pos == -1:
        return prompt
    return prompt[pos + len(marker) :]
