"""End-to-end run orchestration: extract, score, semantic, validate.

Each command is a composable stage over on-disk artifacts, so scoring and
semantic analysis can be re-run without re-querying the LLM. A single
failing document never aborts a run; failures are recorded per document
and surfaced through the manifest and the exit code.
"""
from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import RunConfig
from .corpus import Dataset, load_corpus, preprocess
from .errors import ConfigError, PerplexityInfeasible, PipelineError
from .llm_client import CompletionClient, CompletionRequest, MockProvider
from .prompting import PromptSpec, Strategy, build_prompt, load_shot_pool, strategy_shots
from .schema import (
    ExtractionResult,
    ExtractionSchema,
    load_schema,
    merge_chunk_results,
    parse_structured,
)
from .scoring import ScoreReport, score_run, write_summary_json
from .semantic import HttpEmbeddingProvider, MockEmbeddingProvider, semantic_report
from .splitter import split_document


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _result_to_json(result: ExtractionResult) -> dict:
    return {
        "document_id": result.document_id,
        "values": result.values,
        "status": result.status,
        "diagnostics": result.diagnostics,
        "raw_completion": result.raw_completion,
    }


def _result_from_json(data: dict) -> ExtractionResult:
    return ExtractionResult(
        document_id=data["document_id"],
        values=data["values"],
        status=data["status"],
        diagnostics=data.get("diagnostics", []),
        raw_completion=data.get("raw_completion", ""),
    )


def _build_client(cfg: RunConfig, dataset: Dataset, schema: ExtractionSchema,
                  force_mock: bool = False):
    if force_mock or cfg.llm_provider == "mock":
        return MockProvider(dataset=dataset, schema=schema, mode=cfg.mock_mode)
    return CompletionClient(cfg.provider)


def _embedding_providers(cfg: RunConfig, force_mock: bool = False) -> list:
    providers = []
    for spec in cfg.embeddings:
        if force_mock or spec.provider == "mock":
            providers.append(
                MockEmbeddingProvider(name=spec.name, dimension=spec.dimension, salt=spec.salt)
            )
        else:
            providers.append(
                HttpEmbeddingProvider(
                    name=spec.name,
                    endpoint=spec.endpoint,
                    model=spec.model,
                    auth_env=spec.auth_env,
                )
            )
    return providers


def _extract_document(doc, schema, spec: PromptSpec, client, cfg: RunConfig):
    prepared = preprocess(doc)
    chunks = split_document(prepared, cfg.split)
    parts = []
    for chunk in chunks:
        prompt = build_prompt(spec, chunk)
        request = CompletionRequest(
            prompt=prompt,
            model_id=cfg.model_id,
            temperature=cfg.temperature,
            max_tokens=cfg.max_tokens,
            seed=cfg.seed,
        )
        response = client.complete(request)
        part = parse_structured(response.text, schema)
        part.document_id = doc.id
        parts.append(part)
    return merge_chunk_results(parts, schema)


def _serialize_for_embedding(values: dict, schema: ExtractionSchema) -> str:
    lines = []
    for spec in schema.fields:
        v = values.get(spec.name, spec.empty_value())
        text = ", ".join(str(x) for x in v) if isinstance(v, list) else str(v)
        lines.append(f"{spec.name}: {text}")
    return "\n".join(lines)


def _extraction_artifact(out_dir: Path, strategy: str) -> Path:
    return out_dir / f"extractions_{strategy}.json"


def cmd_extract(cfg: RunConfig, strategy_filter: str | None = None,
                force_mock: bool = False) -> int:
    """Run extraction for every configured strategy; returns the exit code."""
    started = time.time()
    out_dir = cfg.resolve(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    schema = load_schema(cfg.resolve(cfg.schema_path))
    dataset = load_corpus(cfg.resolve(cfg.dataset_path), cfg.dataset_format, schema=schema)
    pool = load_shot_pool(cfg.resolve(cfg.shot_pool_path))
    client = _build_client(cfg, dataset, schema, force_mock)

    strategies = [s for s in cfg.strategies if strategy_filter in (None, s)]
    if not strategies:
        raise ConfigError(f"strategy {strategy_filter!r} is not in the configured strategies")

    artifacts = []
    statuses = {}
    failures = 0
    for strategy_name in strategies:
        strategy = Strategy.from_name(strategy_name)
        shots = tuple(strategy_shots(strategy, pool))
        spec = PromptSpec(task_description=cfg.task_description, shots=shots, schema=schema)

        def run_one(pair):
            doc, _ = pair
            try:
                return _extract_document(doc, schema, spec, client, cfg)
            except PipelineError as exc:
                return ExtractionResult(
                    document_id=doc.id,
                    values=schema.empty_values(),
                    status="failed",
                    diagnostics=[f"provider failure: {exc}"],
                )

        workers = max(1, cfg.provider.max_concurrent_requests)
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            results = list(pool_exec.map(run_one, dataset.pairs))

        failures += sum(1 for r in results if r.status == "failed")
        for r in results:
            statuses.setdefault(r.document_id, {})[strategy_name] = r.status

        artifact = _extraction_artifact(out_dir, strategy_name)
        payload = {
            "dataset": cfg.dataset_name,
            "model": cfg.model_id,
            "strategy": strategy_name,
            "results": [_result_to_json(r) for r in results],
        }
        _atomic_write(artifact, json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
        artifacts.append(str(artifact))

    manifest = {
        "pipeline_version": __version__,
        "config": _config_snapshot(cfg),
        "document_statuses": statuses,
        "artifacts": sorted(artifacts),
        "failure_count": failures,
        "elapsed_seconds": round(time.time() - started, 3),
    }
    _atomic_write(out_dir / "run_manifest.json", json.dumps(manifest, indent=2, sort_keys=True))
    return 1 if failures else 0


def _config_snapshot(cfg: RunConfig) -> dict:
    snap = dataclasses.asdict(cfg)
    snap["base_dir"] = str(snap["base_dir"])
    return snap


def load_extractions(out_dir: Path, strategy: str) -> list:
    artifact = _extraction_artifact(out_dir, strategy)
    if not artifact.exists():
        raise ConfigError(f"extraction artifact not found: {artifact} (run extract first)")
    data = json.loads(artifact.read_text(encoding="utf-8"))
    return [_result_from_json(r) for r in data["results"]]


def cmd_score(cfg: RunConfig, strategy_filter: str | None = None) -> int:
    """Score extraction artifacts against gold; writes CSV + JSON reports."""
    out_dir = cfg.resolve(cfg.output_dir)
    schema = load_schema(cfg.resolve(cfg.schema_path))
    dataset = load_corpus(cfg.resolve(cfg.dataset_path), cfg.dataset_format, schema=schema)
    gold = [rec for _, rec in dataset.pairs]

    grid = {}
    for strategy_name in cfg.strategies:
        if strategy_filter not in (None, strategy_name):
            continue
        results = load_extractions(out_dir, strategy_name)
        report: ScoreReport = score_run(results, gold, schema)
        report.write_csv(out_dir / f"scores_{strategy_name}.csv")
        grid.setdefault(cfg.model_id, {})[strategy_name] = {
            cfg.dataset_name: {
                "rouge_1_f1": report.rouge_1_f1,
                "rouge_l_f1": report.rouge_l_f1,
            }
        }
    write_summary_json(out_dir / "scores_summary.json", grid)
    _write_summary_csv(out_dir / "scores_summary.csv", grid)
    return 0


def _write_summary_csv(path: Path, grid: dict) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "strategy", "dataset", "rouge_1_f1", "rouge_l_f1"])
        for model in sorted(grid):
            for strategy in sorted(grid[model]):
                for dataset in sorted(grid[model][strategy]):
                    cell = grid[model][strategy][dataset]
                    writer.writerow(
                        [model, strategy, dataset,
                         f"{cell['rouge_1_f1']:.6f}", f"{cell['rouge_l_f1']:.6f}"]
                    )


def cmd_semantic(cfg: RunConfig, strategy_filter: str | None = None,
                 force_mock: bool = False) -> int:
    """Embed gold and extracted records, emit cosine + t-SNE artifacts."""
    out_dir = cfg.resolve(cfg.output_dir)
    schema = load_schema(cfg.resolve(cfg.schema_path))
    dataset = load_corpus(cfg.resolve(cfg.dataset_path), cfg.dataset_format, schema=schema)

    gold_texts = {
        doc.id: _serialize_for_embedding(rec.fields, schema) for doc, rec in dataset.pairs
    }
    output_texts = {}
    for strategy_name in cfg.strategies:
        if strategy_filter not in (None, strategy_name):
            continue
        results = load_extractions(out_dir, strategy_name)
        output_texts[strategy_name] = {
            r.document_id: _serialize_for_embedding(r.values, schema) for r in results
        }

    providers = _embedding_providers(cfg, force_mock)
    exit_code = 0
    try:
        bundle = semantic_report(gold_texts, output_texts, providers, out_dir, cfg.tsne)
    except PipelineError as exc:
        print(f"semantic analysis failed: {exc}")
        return 1
    _atomic_write(
        out_dir / "semantic_summary.json",
        json.dumps(bundle["summary"], indent=2, sort_keys=True),
    )
    return exit_code


def cmd_validate(cfg: RunConfig) -> int:
    """Check schema, shot pool, paths, and t-SNE feasibility; no side effects."""
    violations = []

    schema = None
    try:
        schema = load_schema(cfg.resolve(cfg.schema_path))
    except PipelineError as exc:
        violations.append(f"schema: {exc}")
    except FileNotFoundError:
        violations.append(f"schema: file not found: {cfg.schema_path}")

    dataset = None
    try:
        dataset = load_corpus(cfg.resolve(cfg.dataset_path), cfg.dataset_format, schema=schema)
    except PipelineError as exc:
        violations.append(f"dataset: {exc}")

    if schema is not None:
        try:
            pool = load_shot_pool(cfg.resolve(cfg.shot_pool_path))
            for k, shot in enumerate(pool):
                try:
                    shot.validate(schema)
                except ValueError as exc:
                    violations.append(f"shot pool entry {k}: {exc}")
            for strategy_name in cfg.strategies:
                strategy = Strategy.from_name(strategy_name)
                if len(pool) < strategy.shot_count:
                    violations.append(
                        f"strategy {strategy_name}: pool has {len(pool)} examples, "
                        f"needs {strategy.shot_count}"
                    )
        except PipelineError as exc:
            violations.append(f"shot pool: {exc}")
        except FileNotFoundError:
            violations.append(f"shot pool: file not found: {cfg.shot_pool_path}")

    if dataset is not None:
        n_points = 2 * dataset.size
        try:
            cfg.tsne.check_feasible(n_points)
        except PerplexityInfeasible as exc:
            violations.append(f"tsne: {exc}")

    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 2
    print("ok")
    return 0
