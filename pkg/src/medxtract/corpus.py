"""Corpus loading: (document, gold annotation) pairs from disk.

Two on-disk layouts are supported:

* ``plain_text``: ``<root>/docs/<id>.txt`` with a ``<root>/annotations.json``
  sidecar mapping each document id to its gold field values.
* ``json``: one ``<root>/<id>.json`` per document with keys ``text`` and
  ``fields``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .errors import DuplicateId, MalformedRecord, MissingPath, TranslatorFailure

Translator = Callable[[str, str], str]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    language: str = "en"
    source_format: str = "plain_text"

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.text:
            raise ValueError(f"document {self.id!r} has empty text")


@dataclass(frozen=True)
class GoldRecord:
    document_id: str
    fields: dict = field(default_factory=dict)
    missing: bool = False  # no annotation found on disk for this document


@dataclass(frozen=True)
class Dataset:
    name: str
    pairs: tuple

    @property
    def size(self) -> int:
        return len(self.pairs)

    def document(self, doc_id: str) -> Document:
        for doc, _ in self.pairs:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)

    def gold(self, doc_id: str) -> GoldRecord:
        for doc, rec in self.pairs:
            if doc.id == doc_id:
                return rec
        raise KeyError(doc_id)


def load_corpus(root_path, fmt: str = "plain_text", schema=None) -> Dataset:
    """Load a dataset from disk.

    Documents missing a gold annotation get an empty GoldRecord flagged
    with ``missing=True``. When ``schema`` is given, gold field names are
    validated against it and violations raise MalformedRecord.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise MissingPath(str(root))
    if fmt == "plain_text":
        pairs = _load_plain_text(root)
    elif fmt == "json":
        pairs = _load_json(root)
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")

    seen = set()
    for doc, _ in pairs:
        if doc.id in seen:
            raise DuplicateId(doc.id)
        seen.add(doc.id)

    if schema is not None:
        allowed = {f.name for f in schema.fields}
        for doc, rec in pairs:
            extra = [k for k in rec.fields if k not in allowed]
            if extra:
                raise MalformedRecord(doc.id, f"gold fields not in schema: {extra}")

    pairs.sort(key=lambda p: p[0].id)  # lexicographic by id for reproducible runs
    return Dataset(name=root.name, pairs=tuple(pairs))


def _read_annotations(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecord(str(path), f"invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise MalformedRecord(str(path), "annotations must be a JSON object keyed by id")
    return data


def _gold_fields(raw, where: str) -> dict:
    if not isinstance(raw, dict):
        raise MalformedRecord(where, "gold fields must be a JSON object")
    out = {}
    for name, value in raw.items():
        if isinstance(value, list):
            out[name] = [str(v) for v in value]
        else:
            out[name] = str(value)
    return out


def _load_plain_text(root: Path) -> list:
    docs_dir = root / "docs"
    if not docs_dir.is_dir():
        raise MissingPath(str(docs_dir))
    ann_path = root / "annotations.json"
    annotations = _read_annotations(ann_path) if ann_path.exists() else {}

    pairs = []
    for txt in sorted(docs_dir.glob("*.txt")):
        doc_id = txt.stem
        text = txt.read_text(encoding="utf-8")
        if not text:
            raise MalformedRecord(str(txt), "empty document")
        doc = Document(id=doc_id, text=text, source_format="plain_text")
        if doc_id in annotations:
            rec = GoldRecord(doc_id, _gold_fields(annotations[doc_id], str(ann_path)))
        else:
            rec = GoldRecord(doc_id, {}, missing=True)
            warnings.warn(f"no gold annotation for document {doc_id!r}")
        pairs.append((doc, rec))
    return pairs


def _load_json(root: Path) -> list:
    pairs = []
    for jf in sorted(root.glob("*.json")):
        if jf.name == "annotations.json":
            continue
        try:
            data = json.loads(jf.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(str(jf), f"invalid JSON: {exc}")
        if "text" not in data:
            raise MalformedRecord(str(jf), "missing 'text' key")
        doc = Document(
            id=str(data.get("id", jf.stem)),
            text=data["text"],
            language=data.get("language", "en"),
            source_format="json",
        )
        if "fields" in data:
            rec = GoldRecord(doc.id, _gold_fields(data["fields"], str(jf)))
        else:
            rec = GoldRecord(doc.id, {}, missing=True)
            warnings.warn(f"no gold annotation for document {doc.id!r}")
        pairs.append((doc, rec))
    return pairs


def preprocess(doc: Document, translator: Optional[Translator] = None) -> Document:
    """Normalize line endings and, when configured, translate to English."""
    text = doc.text.replace("\r\n", "\n").replace("\r", "\n")
    language = doc.language
    if doc.language != "en":
        if translator is not None:
            try:
                text = translator(text, doc.language)
            except Exception as exc:
                raise TranslatorFailure(str(exc)) from exc
            text = text.replace("\r\n", "\n").replace("\r", "\n")
            language = "en"
        else:
            warnings.warn(
                f"document {doc.id!r} is tagged {doc.language!r} but no translator is configured"
            )
    if text == doc.text and language == doc.language:
        return doc
    return Document(id=doc.id, text=text, language=language, source_format=doc.source_format)
