"""ROUGE-1 / ROUGE-L scoring of extraction runs.

Scores are computed per field (list values joined with ", "), macro-averaged
over the fields with non-empty gold per document, then over documents.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AlignmentError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _make_score(precision: float, recall: float) -> RougeScore:
    if precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return RougeScore(precision, recall, f1)


def tokenize(text: str) -> TokenSeq:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return TokenSeq(tuple(_TOKEN_RE.findall(text.lower())))


def rouge_1(candidate: TokenSeq, reference: TokenSeq) -> RougeScore:
    """Unigram overlap with clipped multiset counting."""
    if not candidate.tokens or not reference.tokens:
        return RougeScore(0.0, 0.0, 0.0)
    ref_counts = {}
    for t in reference.tokens:
        ref_counts[t] = ref_counts.get(t, 0) + 1
    overlap = 0
    for t in candidate.tokens:
        if ref_counts.get(t, 0) > 0:
            overlap += 1
            ref_counts[t] -= 1
    return _make_score(overlap / len(candidate.tokens), overlap / len(reference.tokens))


def lcs_length(a: TokenSeq, b: TokenSeq) -> int:
    """Longest common subsequence length via the standard DP recurrence."""
    ta, tb = a.tokens, b.tokens
    if not ta or not tb:
        return 0
    prev = [0] * (len(tb) + 1)
    for x in ta:
        curr = [0] * (len(tb) + 1)
        for j, y in enumerate(tb, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: TokenSeq, reference: TokenSeq) -> RougeScore:
    """LCS-based precision/recall/F1."""
    if not candidate.tokens or not reference.tokens:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_length(candidate, reference)
    return _make_score(lcs / len(candidate.tokens), lcs / len(reference.tokens))


def _serialize_field(value) -> str:
    if isinstance(value, list):
        return ", ".join(str(v) for v in value)
    return str(value)


@dataclass
class FieldScores:
    field_name: str
    rouge_1: RougeScore
    rouge_l: RougeScore


@dataclass
class DocumentScores:
    document_id: str
    fields: list
    rouge_1_f1: float  # mean over fields with non-empty gold
    rouge_l_f1: float


@dataclass
class ScoreReport:
    documents: list = field(default_factory=list)
    rouge_1_f1: float = 0.0
    rouge_l_f1: float = 0.0

    def to_rows(self) -> list:
        rows = []
        for doc in self.documents:
            for fs in doc.fields:
                rows.append(
                    {
                        "document_id": doc.document_id,
                        "field": fs.field_name,
                        "rouge_1_precision": fs.rouge_1.precision,
                        "rouge_1_recall": fs.rouge_1.recall,
                        "rouge_1_f1": fs.rouge_1.f1,
                        "rouge_l_precision": fs.rouge_l.precision,
                        "rouge_l_recall": fs.rouge_l.recall,
                        "rouge_l_f1": fs.rouge_l.f1,
                    }
                )
        return rows

    def write_csv(self, path) -> None:
        rows = self.to_rows()
        fieldnames = [
            "document_id",
            "field",
            "rouge_1_precision",
            "rouge_1_recall",
            "rouge_1_f1",
            "rouge_l_precision",
            "rouge_l_recall",
            "rouge_l_f1",
        ]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)


def score_run(results: list, gold: list, schema) -> ScoreReport:
    """Score extraction results against gold records, aligned by document id."""
    gold_by_id = {g.document_id: g for g in gold}
    if len(gold_by_id) != len(gold):
        raise AlignmentError("duplicate document ids in gold records")

    documents = []
    scorable = []
    for result in results:
        g = gold_by_id.get(result.document_id)
        if g is None:
            raise AlignmentError(f"no gold record for document {result.document_id!r}")
        field_scores = []
        scored_1, scored_l = [], []
        for spec in schema.fields:
            gold_text = _serialize_field(g.fields.get(spec.name, spec.empty_value()))
            cand_text = _serialize_field(result.values.get(spec.name, spec.empty_value()))
            ref = tokenize(gold_text)
            cand = tokenize(cand_text)
            r1 = rouge_1(cand, ref)
            rl = rouge_l(cand, ref)
            field_scores.append(FieldScores(spec.name, r1, rl))
            if ref.tokens:  # fields with empty gold are excluded from the mean
                scored_1.append(r1.f1)
                scored_l.append(rl.f1)
        doc_r1 = sum(scored_1) / len(scored_1) if scored_1 else 0.0
        doc_rl = sum(scored_l) / len(scored_l) if scored_l else 0.0
        doc_scores = DocumentScores(result.document_id, field_scores, doc_r1, doc_rl)
        documents.append(doc_scores)
        if scored_1:  # documents with all-empty gold are excluded from aggregates
            scorable.append(doc_scores)

    if scorable:
        agg_1 = sum(d.rouge_1_f1 for d in scorable) / len(scorable)
        agg_l = sum(d.rouge_l_f1 for d in scorable) / len(scorable)
    else:
        agg_1 = agg_l = 0.0
    return ScoreReport(documents=documents, rouge_1_f1=agg_1, rouge_l_f1=agg_l)


def write_summary_json(path, grid: dict) -> None:
    """Emit the (model x strategy x dataset) metric grid as JSON."""
    Path(path).write_text(json.dumps(grid, indent=2, sort_keys=True), encoding="utf-8")
