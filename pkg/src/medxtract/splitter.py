"""Recursive token-budgeted document splitting with exact reassembly.

Separators are tried in priority order (paragraph, line, sentence, word,
character); each split keeps the separator attached to the preceding piece
so the concatenation of pieces always reproduces the input. Adjacent chunks
may share an overlap region: chunk j >= 1 is prefixed with the tail of
chunk j-1, and ``reassemble`` strips it back off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import Document
from .errors import GapDetected

DEFAULT_SEPARATORS = ("\n\n", "\n", ". ", " ", "")
CHARS_PER_TOKEN = 4


@dataclass(frozen=True)
class Chunk:
    document_id: str
    index: int
    text: str
    token_estimate: int


@dataclass(frozen=True)
class SplitConfig:
    max_tokens_per_chunk: int = 3000
    overlap_tokens: int = 50
    separators: tuple = DEFAULT_SEPARATORS

    def __post_init__(self):
        if self.overlap_tokens >= self.max_tokens_per_chunk:
            raise ValueError("overlap_tokens must be < max_tokens_per_chunk")
        if not self.separators or self.separators[-1] != "":
            raise ValueError('separators must be non-empty and end with "" (character fallback)')


def estimate_tokens(text: str) -> int:
    """Heuristic token count: ceil(len/4). Deterministic and provider-agnostic."""
    return math.ceil(len(text) / CHARS_PER_TOKEN)


def _split_keep_separator(text: str, sep: str) -> list:
    """Split so the separator stays attached to the preceding piece."""
    parts = text.split(sep)
    if len(parts) == 1:
        return [text]
    pieces = [p + sep for p in parts[:-1]]
    if parts[-1]:
        pieces.append(parts[-1])
    return pieces


def _recursive_split(text: str, separators: tuple, budget: int) -> list:
    if estimate_tokens(text) <= budget:
        return [text] if text else []
    sep = separators[0]
    rest = separators[1:]
    if sep == "":
        width = budget * CHARS_PER_TOKEN
        return [text[i : i + width] for i in range(0, len(text), width)]

    pieces = _split_keep_separator(text, sep)
    if len(pieces) == 1:
        return _recursive_split(text, rest, budget)

    out = []
    acc = ""
    for piece in pieces:
        if acc and estimate_tokens(acc + piece) > budget:
            out.append(acc)
            acc = ""
        if estimate_tokens(piece) > budget:
            if acc:
                out.append(acc)
                acc = ""
            out.extend(_recursive_split(piece, rest, budget))
        else:
            acc += piece
    if acc:
        out.append(acc)
    return out


def split_document(doc: Document, cfg: SplitConfig = SplitConfig()) -> list:
    """Split a preprocessed document into budgeted, overlapping chunks."""
    core_budget = cfg.max_tokens_per_chunk - cfg.overlap_tokens
    cores = _recursive_split(doc.text, tuple(cfg.separators), core_budget)
    overlap_chars = cfg.overlap_tokens * CHARS_PER_TOKEN

    chunks = []
    prev_text = None
    for j, core in enumerate(cores):
        if j > 0 and cfg.overlap_tokens > 0:
            text = prev_text[-min(overlap_chars, len(prev_text)) :] + core
        else:
            text = core
        chunks.append(Chunk(doc.id, j, text, estimate_tokens(text)))
        prev_text = text
    return chunks


def reassemble(chunks: list, cfg: SplitConfig = SplitConfig()) -> str:
    """Invert split_document: overlap-aware concatenation in index order."""
    for j, c in enumerate(chunks):
        if c.index != j:
            raise GapDetected(j)
    overlap_chars = cfg.overlap_tokens * CHARS_PER_TOKEN
    parts = []
    for j, c in enumerate(chunks):
        if j == 0 or cfg.overlap_tokens == 0:
            parts.append(c.text)
        else:
            skip = min(overlap_chars, len(chunks[j - 1].text))
            parts.append(c.text[skip:])
    return "".join(parts)
