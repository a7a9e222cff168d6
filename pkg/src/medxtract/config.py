"""Run configuration: one TOML or JSON document describing an entire run.

Protocol constants (temperature 0.1, max tokens 1000, shot counts) live
here as defaults so a run is reproducible but nothing is hard-coded.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .llm_client import ProviderConfig
from .semantic import TsneConfig
from .splitter import DEFAULT_SEPARATORS, SplitConfig


@dataclass
class EmbeddingSpec:
    name: str
    provider: str = "mock"  # "mock" or "http"
    endpoint: str = ""
    model: str = ""
    auth_env: str = ""
    salt: str = ""
    dimension: int = 1024


@dataclass
class RunConfig:
    dataset_path: str
    dataset_format: str
    dataset_name: str
    schema_path: str
    shot_pool_path: str
    strategies: list
    task_description: str
    output_dir: str
    model_id: str = "mock-model"
    llm_provider: str = "mock"  # "mock" or "http"
    mock_mode: str = "perfect"
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    embeddings: list = field(default_factory=list)
    split: SplitConfig = field(default_factory=SplitConfig)
    tsne: TsneConfig = field(default_factory=TsneConfig)
    temperature: float = 0.1
    max_tokens: int = 1000
    seed: int = 0

    base_dir: Path = field(default_factory=Path)

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path


def _load_raw(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".toml":
        try:
            import tomllib  # py311+
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    raw = _load_raw(p)
    try:
        dataset = raw["dataset"]
        sampling = raw.get("sampling", {})
        split_raw = raw.get("split", {})
        llm = raw.get("llm", {})
        tsne_raw = raw.get("tsne", {})
        strategies = raw["strategies"]
        if not strategies:
            raise ConfigError("at least one strategy is required")
        cfg = RunConfig(
            dataset_path=dataset["path"],
            dataset_format=dataset.get("format", "plain_text"),
            dataset_name=dataset.get("name", Path(dataset["path"]).name),
            schema_path=raw["schema"],
            shot_pool_path=raw["shot_pool"],
            strategies=list(strategies),
            task_description=raw.get(
                "task_description",
                "You are extracting structured fields from a medical narrative.",
            ),
            output_dir=raw.get("output_dir", "out"),
            model_id=llm.get("model_id", "mock-model"),
            llm_provider=llm.get("provider", "mock"),
            mock_mode=llm.get("mock_mode", "perfect"),
            provider=ProviderConfig(
                endpoint=llm.get("endpoint", ""),
                auth_env=llm.get("auth_env", ""),
                max_concurrent_requests=llm.get("max_concurrent_requests", 4),
                max_attempts=llm.get("max_attempts", 3),
                backoff_seconds=tuple(llm.get("backoff_seconds", (1.0, 2.0, 4.0))),
                timeout_seconds=llm.get("timeout_seconds", 60.0),
            ),
            embeddings=[
                EmbeddingSpec(
                    name=e["name"],
                    provider=e.get("provider", "mock"),
                    endpoint=e.get("endpoint", ""),
                    model=e.get("model", ""),
                    auth_env=e.get("auth_env", ""),
                    salt=e.get("salt", ""),
                    dimension=e.get("dimension", 1024),
                )
                for e in raw.get("embeddings", [{"name": "mock"}])
            ],
            split=SplitConfig(
                max_tokens_per_chunk=split_raw.get("max_tokens_per_chunk", 3000),
                overlap_tokens=split_raw.get("overlap_tokens", 50),
                separators=tuple(split_raw.get("separators", DEFAULT_SEPARATORS)),
            ),
            tsne=TsneConfig(
                perplexity=tsne_raw.get("perplexity", 15.0),
                learning_rate=tsne_raw.get("learning_rate", 200.0),
                iterations=tsne_raw.get("iterations", 1000),
                seed=tsne_raw.get("seed", sampling.get("seed", 0)),
            ),
            temperature=sampling.get("temperature", 0.1),
            max_tokens=sampling.get("max_tokens", 1000),
            seed=sampling.get("seed", 0),
            base_dir=p.parent,
        )
    except KeyError as exc:
        raise ConfigError(f"{p}: missing required config key {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{p}: {exc}")
    return cfg
