"""Extraction schemas: declared fields that both instruct the model and
validate its output.

A schema is a flat, ordered list of typed fields. ``render_schema`` turns it
into the instruction block placed in every prompt; ``parse_structured`` turns
arbitrary model output back into a typed record without ever raising.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedRecord, MixedDocuments

KINDS = ("text", "integer", "list_of_text")
_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")

# status severity order for merging
_STATUS_RANK = {"clean": 0, "repaired": 1, "partial": 2, "failed": 3}


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str
    description: str
    required: bool = True

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(f"field name {self.name!r} must be lower_snake_case")
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if not self.description:
            raise ValueError(f"field {self.name!r} needs a non-empty description")

    def empty_value(self):
        return [] if self.kind == "list_of_text" else ""


@dataclass(frozen=True)
class ExtractionSchema:
    name: str
    fields: tuple

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError("field names must be unique")

    def field_map(self) -> dict:
        return {f.name: f for f in self.fields}

    def empty_values(self) -> dict:
        return {f.name: f.empty_value() for f in self.fields}


@dataclass
class ExtractionResult:
    document_id: str
    values: dict
    raw_completion: str = ""
    status: str = "clean"
    diagnostics: list = field(default_factory=list)


def load_schema(path) -> ExtractionSchema:
    """Read a schema JSON file: {name, fields:[{name, kind, description, required}]}."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecord(str(p), f"invalid JSON: {exc}")
    try:
        fields = tuple(
            FieldSpec(
                name=f["name"],
                kind=f["kind"],
                description=f["description"],
                required=f.get("required", True),
            )
            for f in data["fields"]
        )
        return ExtractionSchema(name=data["name"], fields=fields)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(str(p), str(exc))


def render_schema(schema: ExtractionSchema) -> str:
    """Deterministic instruction block: field lines plus a JSON skeleton."""
    lines = ["Extract the following fields:"]
    for f in schema.fields:
        lines.append(f"- {f.name} ({f.kind}): {f.description}")
    skeleton = json.dumps(schema.empty_values(), indent=2)
    lines.append("")
    lines.append(
        "Answer with a single JSON object exactly matching this skeleton. "
        'Use "" (or [] for list fields) when an entity is absent. '
        "Do not add keys or commentary."
    )
    lines.append(skeleton)
    return "\n".join(lines)


def _find_json_object(raw: str):
    """Locate the first balanced, parseable JSON object in raw text."""
    start = raw.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escape = False
        for i in range(start, len(raw)):
            ch = raw[i]
            if in_string:
                if escape:
                    escape = False
                elif ch == "\\":
                    escape = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidate = raw[start : i + 1]
                    try:
                        obj = json.loads(candidate)
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj, candidate
                    break
        start = raw.find("{", start + 1)
    return None, None


def _coerce(value, spec: FieldSpec, diagnostics: list):
    if spec.kind == "list_of_text":
        if isinstance(value, list):
            return [v if isinstance(v, str) else json.dumps(v) for v in value]
        if value in ("", None):
            return []
        return [value if isinstance(value, str) else str(value)]
    if isinstance(value, (list, dict)):
        diagnostics.append(f"{spec.name}: expected scalar, got {type(value).__name__}")
        return json.dumps(value)
    if value is None:
        return ""
    if spec.kind == "integer":
        if isinstance(value, bool):
            diagnostics.append(f"{spec.name}: boolean is not an integer")
            return str(value)
        if isinstance(value, int):
            return value
        s = str(value).strip()
        if re.fullmatch(r"[+-]?\d+", s):
            return int(s)
        if s == "":
            return ""
        diagnostics.append(f"{spec.name}: non-numeric value {s!r} kept as text")
        return s
    return value if isinstance(value, str) else str(value)


def parse_structured(raw: str, schema: ExtractionSchema) -> ExtractionResult:
    """Recover a typed record from arbitrary model output.

    Never raises: unparseable output yields status ``failed`` with all
    fields empty. Missing keys yield ``partial``; any repair (embedded
    JSON extraction, dropped keys, kind mismatches) yields ``repaired``.
    """
    diagnostics = []
    obj, candidate = _find_json_object(raw)
    if obj is None:
        return ExtractionResult(
            document_id="",
            values=schema.empty_values(),
            raw_completion=raw,
            status="failed",
            diagnostics=["no JSON object found in completion"],
        )

    if candidate.strip() != raw.strip():
        diagnostics.append("extracted embedded JSON from surrounding text")

    specs = schema.field_map()
    values = {}
    missing = False
    for name, spec in specs.items():
        if name in obj:
            values[name] = _coerce(obj[name], spec, diagnostics)
        else:
            values[name] = spec.empty_value()
            missing = True
            diagnostics.append(f"{name}: missing from completion")
    for key in obj:
        if key not in specs:
            diagnostics.append(f"dropped unknown key {key!r}")

    if missing:
        status = "partial"
    elif diagnostics:
        status = "repaired"
    else:
        status = "clean"
    return ExtractionResult(
        document_id="",
        values=values,
        raw_completion=raw,
        status=status,
        diagnostics=diagnostics,
    )


def serialize_values(values: dict, schema: ExtractionSchema) -> str:
    """Canonical JSON text for a value map, in schema field order."""
    ordered = {f.name: values.get(f.name, f.empty_value()) for f in schema.fields}
    return json.dumps(ordered, ensure_ascii=False)


def _is_empty(v) -> bool:
    return v == "" or v == []


def merge_chunk_results(parts: list, schema: ExtractionSchema) -> ExtractionResult:
    """Field-wise merge of per-chunk results in chunk order.

    Scalar fields: first non-empty value wins; later conflicting non-empty
    values are preserved as diagnostics. List fields: order-preserving
    union with case-insensitive dedup.
    """
    if not parts:
        raise ValueError("merge_chunk_results needs at least one part")
    ids = {p.document_id for p in parts}
    if len(ids) > 1:
        raise MixedDocuments(f"results from multiple documents: {sorted(ids)}")
    if len(parts) == 1:
        return parts[0]

    values = {}
    diagnostics = []
    for spec in schema.fields:
        if spec.kind == "list_of_text":
            merged = []
            seen = set()
            for p in parts:
                for item in p.values.get(spec.name, []):
                    key = item.lower()
                    if key not in seen:
                        seen.add(key)
                        merged.append(item)
            values[spec.name] = merged
        else:
            chosen = spec.empty_value()
            for p in parts:
                v = p.values.get(spec.name, spec.empty_value())
                if _is_empty(v):
                    continue
                if _is_empty(chosen):
                    chosen = v
                elif v != chosen:
                    diagnostics.append(
                        f"{spec.name}: conflicting value {v!r} ignored (kept {chosen!r})"
                    )
            values[spec.name] = chosen

    for p in parts:
        diagnostics.extend(p.diagnostics)
    status = max((p.status for p in parts), key=_STATUS_RANK.__getitem__)
    if status == "clean" and diagnostics:
        status = "repaired"
    return ExtractionResult(
        document_id=parts[0].document_id,
        values=values,
        raw_completion="\n---\n".join(p.raw_completion for p in parts),
        status=status,
        diagnostics=diagnostics,
    )
