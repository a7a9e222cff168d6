"""Semantic evaluation: embeddings, cosine similarity, and exact t-SNE.

Embedding models are external services behind a small provider contract;
``MockEmbeddingProvider`` hashes token multisets into sparse count vectors
so that texts sharing more tokens get higher cosine similarity, which makes
the whole analysis runnable offline and deterministic.

The t-SNE here is the exact O(N^2) variant: Gaussian affinities with
per-point bandwidths found by binary search on entropy, Student-t
low-dimensional kernel, gradient descent with momentum and early
exaggeration. Input sizes in this pipeline are small (tens to hundreds of
points), so exactness is cheap and easy to test.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import (
    AlignmentError,
    DimensionMismatch,
    PerplexityInfeasible,
    ProviderError,
    ZeroVector,
)
from .scoring import tokenize

P_FLOOR = 1e-12
ENTROPY_TOL = 1e-4  # on 2^H vs target perplexity
MAX_SEARCH_ITERS = 64


def _exact_sum(values) -> float:
    """Order-independent (correctly rounded) float sum.

    Used wherever a reduction feeds back into the t-SNE dynamics, so the
    projection is exactly equivariant under permuting the input points."""
    import math

    return math.fsum(np.asarray(values, dtype=float).ravel())


def _exact_row_sums(M: np.ndarray) -> np.ndarray:
    return np.array([_exact_sum(row) for row in M])


@dataclass(frozen=True)
class LabeledPoint:
    group: str  # "ground_truth" or "model_output"
    strategy: str
    document_id: str


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 15.0
    learning_rate: float = 200.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 250:
            raise ValueError("iterations must be >= 250")

    def check_feasible(self, n_points: int) -> None:
        if self.perplexity >= (n_points - 1) / 3:
            raise PerplexityInfeasible(
                f"perplexity {self.perplexity} requires more than "
                f"{int(3 * self.perplexity) + 1} points, got {n_points}"
            )


@dataclass
class Projection:
    coords: np.ndarray  # (N, 2)
    labels: list
    final_kl: float
    kl_history: list = field(default_factory=list)
    achieved_perplexities: np.ndarray | None = None


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("cosine similarity is undefined for the zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _conditional_row(sq_dists: np.ndarray, i: int, perplexity: float):
    """Binary-search the Gaussian precision for point i so that the
    conditional distribution's effective neighbor count (2^H) matches the
    target perplexity within ENTROPY_TOL."""
    d = np.delete(sq_dists[i], i)
    beta, beta_min, beta_max = 1.0, 0.0, np.inf
    p = None
    for _ in range(MAX_SEARCH_ITERS):
        w = np.exp(-d * beta)
        total = _exact_sum(w)
        if total <= 0:
            # all neighbors numerically at zero weight: back off
            beta_max = beta
            beta = (beta_min + beta_max) / 2
            continue
        p = w / total
        nz = p > 0
        entropy = -_exact_sum(p[nz] * np.log2(p[nz]))
        achieved = 2.0 ** entropy
        if abs(achieved - perplexity) <= ENTROPY_TOL:
            break
        if achieved > perplexity:
            beta_min = beta
            beta = beta * 2 if beta_max == np.inf else (beta_min + beta_max) / 2
        else:
            beta_max = beta
            beta = (beta_min + beta_max) / 2
    else:
        nz = p > 0
        achieved = 2.0 ** (-_exact_sum(p[nz] * np.log2(p[nz])))
        if abs(achieved - perplexity) > ENTROPY_TOL:
            raise PerplexityInfeasible(
                f"bandwidth search for point {i} stalled at 2^H={achieved:.6f}, "
                f"target {perplexity}"
            )
    full = np.zeros(len(sq_dists))
    full[np.arange(len(sq_dists)) != i] = p
    nzf = p > 0
    achieved = 2.0 ** (-_exact_sum(p[nzf] * np.log2(p[nzf])))
    return full, achieved


def tsne_affinities(vectors, perplexity: float):
    """Symmetrized high-dimensional affinity matrix P (sums to 1)."""
    X = np.asarray(vectors, dtype=float)
    n = X.shape[0]
    if n < 3:
        raise PerplexityInfeasible(f"need at least 3 points, got {n}")
    sq = np.sum(X**2, axis=1)
    sq_dists = np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0)

    cond = np.zeros((n, n))
    achieved = np.zeros(n)
    for i in range(n):
        cond[i], achieved[i] = _conditional_row(sq_dists, i, perplexity)

    P = (cond + cond.T) / (2 * n)
    off_diag = ~np.eye(n, dtype=bool)
    P[off_diag] = np.maximum(P[off_diag], P_FLOOR)
    return P, achieved


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne_project(vectors, cfg: TsneConfig = TsneConfig(), labels=None, initial_coords=None):
    """Project vectors to 2D with exact t-SNE; deterministic for a fixed seed."""
    X = np.asarray(vectors, dtype=float)
    n = X.shape[0]
    cfg.check_feasible(n)
    P, achieved = tsne_affinities(X, cfg.perplexity)

    rng = np.random.default_rng(cfg.seed)
    if initial_coords is not None:
        Y = np.array(initial_coords, dtype=float, copy=True)
    else:
        Y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)  # Jacobs adaptive per-parameter gains
    off_diag = ~np.eye(n, dtype=bool)
    kl_history = []

    for it in range(cfg.iterations):
        exaggerate = it < cfg.exaggeration_iters
        P_eff = P * cfg.early_exaggeration if exaggerate else P
        momentum = cfg.momentum_initial if exaggerate else cfg.momentum_final

        # reductions below use _exact_sum so the whole update is exactly
        # equivariant under permuting the input points
        sq = Y[:, 0] * Y[:, 0] + Y[:, 1] * Y[:, 1]
        num = 1.0 / (1.0 + np.maximum(sq[:, None] + sq[None, :] - 2 * Y @ Y.T, 0.0))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / _exact_sum(num), P_FLOOR)

        # gradient: 4 * sum_j (p_ij - q_ij) * num_ij * (y_i - y_j)
        W = (P_eff - Q) * num
        row_sums = _exact_row_sums(W)
        WY = np.column_stack([_exact_row_sums(W * Y[:, k]) for k in range(2)])
        grad = 4.0 * (row_sums[:, None] * Y - WY)

        same_direction = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_direction, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)

        velocity = momentum * velocity - cfg.learning_rate * gains * grad
        Y = Y + velocity
        Y = Y - np.array([_exact_sum(Y[:, 0]), _exact_sum(Y[:, 1])]) / n

        kl_history.append(_kl_divergence(P[off_diag], Q[off_diag]))

    return Projection(
        coords=Y,
        labels=list(labels) if labels is not None else [None] * n,
        final_kl=kl_history[-1],
        kl_history=kl_history,
        achieved_perplexities=achieved,
    )


class MockEmbeddingProvider:
    """Deterministic embeddings from hashed token multisets.

    Each token maps to a fixed bucket of a sparse count vector, so texts
    with disjoint token sets are (hash collisions aside) orthogonal and
    shared tokens raise cosine similarity. ``salt`` distinguishes
    independently-behaving mock providers.
    """

    def __init__(self, name: str = "mock", dimension: int = 1024, salt: str = ""):
        self.name = name
        self.dimension = dimension
        self.salt = salt

    def embed(self, texts: list) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            tokens = tokenize(text).tokens
            if not tokens:
                out[row, 0] = 1.0  # reserved bucket so empty text is non-zero
                continue
            for tok in tokens:
                digest = hashlib.sha256((self.salt + tok).encode("utf-8")).digest()
                bucket = 1 + int.from_bytes(digest[:8], "big") % (self.dimension - 1)
                out[row, bucket] += 1.0
        return out


class HttpEmbeddingProvider:
    """Remote embedding service: JSON POST {model, input:[texts]} -> {vectors}."""

    def __init__(self, name: str, endpoint: str, model: str = "", auth_env: str = "",
                 timeout_seconds: float = 60.0):
        self.name = name
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self.timeout_seconds = timeout_seconds

    def embed(self, texts: list) -> np.ndarray:
        import os

        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            credential = os.environ.get(self.auth_env)
            if credential is None:
                from .errors import AuthError

                raise AuthError(f"environment variable {self.auth_env!r} is not set")
            headers["Authorization"] = f"Bearer {credential}"
        resp = requests.post(
            self.endpoint,
            json={"model": self.model, "input": list(texts)},
            headers=headers,
            timeout=self.timeout_seconds,
        )
        if resp.status_code != 200:
            raise ProviderError(resp.status_code, resp.text)
        try:
            vectors = np.asarray(json.loads(resp.text)["vectors"], dtype=float)
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ProviderError(200, f"malformed embedding response: {exc}")
        if vectors.ndim != 2 or vectors.shape[0] != len(texts):
            raise DimensionMismatch(f"expected {len(texts)} vectors, got {vectors.shape}")
        return vectors


def semantic_report(
    gold_texts: dict,
    output_texts: dict,
    providers: list,
    out_dir,
    tsne_cfg: TsneConfig = TsneConfig(),
) -> dict:
    """Cosine-similarity stats plus a 2D t-SNE projection per provider and
    strategy, written as SVG/CSV artifact pairs.

    ``gold_texts`` maps document id to the serialized gold record;
    ``output_texts`` maps strategy name to a same-keyed map of serialized
    model outputs.
    """
    import csv
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .svgplot import bar_svg, scatter_svg

    doc_ids = sorted(gold_texts)
    summary = {}
    artifacts = []
    for provider in providers:
        for strategy, outputs in sorted(output_texts.items()):
            if sorted(outputs) != doc_ids:
                raise AlignmentError(
                    f"strategy {strategy!r} outputs are not aligned with gold documents"
                )
            gold_list = [gold_texts[d] for d in doc_ids]
            out_list = [outputs[d] for d in doc_ids]
            gold_vecs = embed_texts(gold_list, provider)
            out_vecs = embed_texts(out_list, provider)
            sims = [
                cosine_similarity(gold_vecs[i], out_vecs[i]) for i in range(len(doc_ids))
            ]

            all_vecs = np.vstack([gold_vecs, out_vecs])
            labels = [
                LabeledPoint("ground_truth", strategy, d) for d in doc_ids
            ] + [LabeledPoint("model_output", strategy, d) for d in doc_ids]
            projection = tsne_project(all_vecs, tsne_cfg, labels=labels)

            stem = f"{provider.name}_{strategy}"
            tsne_csv = out / f"tsne_{stem}.csv"
            with open(tsne_csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["document_id", "group", "x", "y"])
                for lp, (x, y) in zip(labels, projection.coords):
                    writer.writerow([lp.document_id, lp.group, f"{x:.6f}", f"{y:.6f}"])
            tsne_svg = out / f"tsne_{stem}.svg"
            tsne_svg.write_text(
                scatter_svg(
                    [(float(x), float(y), lp.group)
                     for lp, (x, y) in zip(labels, projection.coords)],
                    title=f"t-SNE: {provider.name} / {strategy}",
                ),
                encoding="utf-8",
            )

            cos_csv = out / f"cosine_{stem}.csv"
            with open(cos_csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["document_id", "cosine_similarity"])
                for d, s in zip(doc_ids, sims):
                    writer.writerow([d, f"{s:.6f}"])
            cos_svg = out / f"cosine_{stem}.svg"
            cos_svg.write_text(
                bar_svg(doc_ids, sims, title=f"Cosine similarity: {provider.name} / {strategy}"),
                encoding="utf-8",
            )

            artifacts.extend([str(tsne_svg), str(tsne_csv), str(cos_svg), str(cos_csv)])
            summary[f"{provider.name}/{strategy}"] = {
                "cosine_mean": float(np.mean(sims)),
                "cosine_median": float(np.median(sims)),
                "cosine_min": float(np.min(sims)),
                "tsne_final_kl": projection.final_kl,
            }
    return {"summary": summary, "artifacts": artifacts}


def embed_texts(texts: list, provider) -> np.ndarray:
    """One vector per text, uniform dimension."""
    if not texts:
        return np.zeros((0, 0))
    vectors = provider.embed(list(texts))
    if vectors.shape[0] != len(texts):
        raise DimensionMismatch(f"provider returned {vectors.shape[0]} vectors for {len(texts)} texts")
    if not np.all(np.isfinite(vectors)):
        raise ProviderError(0, "provider returned non-finite embedding values")
    return vectors
