"""Schema-constrained LLM information extraction with ROUGE and
embedding-based semantic evaluation."""

__version__ = "0.1.0"

from .corpus import Dataset, Document, GoldRecord, load_corpus, preprocess
from .llm_client import (
    CompletionClient,
    CompletionRequest,
    CompletionResponse,
    MockProvider,
    ProviderConfig,
)
from .prompting import (
    PromptSpec,
    ShotExample,
    Strategy,
    build_prompt,
    load_shot_pool,
    strategy_shots,
)
from .schema import (
    ExtractionResult,
    ExtractionSchema,
    FieldSpec,
    load_schema,
    merge_chunk_results,
    parse_structured,
    render_schema,
)
from .scoring import RougeScore, TokenSeq, lcs_length, rouge_1, rouge_l, score_run, tokenize
from .semantic import (
    MockEmbeddingProvider,
    Projection,
    TsneConfig,
    cosine_similarity,
    embed_texts,
    semantic_report,
    tsne_affinities,
    tsne_project,
)
from .splitter import Chunk, SplitConfig, estimate_tokens, reassemble, split_document

__all__ = [
    "Chunk",
    "CompletionClient",
    "CompletionRequest",
    "CompletionResponse",
    "Dataset",
    "Document",
    "ExtractionResult",
    "ExtractionSchema",
    "FieldSpec",
    "GoldRecord",
    "MockEmbeddingProvider",
    "MockProvider",
    "Projection",
    "PromptSpec",
    "ProviderConfig",
    "RougeScore",
    "ShotExample",
    "SplitConfig",
    "Strategy",
    "TokenSeq",
    "TsneConfig",
    "build_prompt",
    "cosine_similarity",
    "embed_texts",
    "estimate_tokens",
    "lcs_length",
    "load_corpus",
    "load_schema",
    "load_shot_pool",
    "merge_chunk_results",
    "parse_structured",
    "preprocess",
    "reassemble",
    "render_schema",
    "rouge_1",
    "rouge_l",
    "score_run",
    "semantic_report",
    "split_document",
    "strategy_shots",
    "tokenize",
    "tsne_affinities",
    "tsne_project",
]
