"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class MissingPath(PipelineError):
    pass


class MalformedRecord(PipelineError):
    def __init__(self, file: str, reason: str):
        super().__init__(f"{file}: {reason}")
        self.file = file
        self.reason = reason


class DuplicateId(PipelineError):
    def __init__(self, doc_id: str):
        super().__init__(f"duplicate document id: {doc_id}")
        self.doc_id = doc_id


class TranslatorFailure(PipelineError):
    pass


class GapDetected(PipelineError):
    def __init__(self, index: int):
        super().__init__(f"missing chunk index {index}")
        self.index = index


class MixedDocuments(PipelineError):
    pass


class InsufficientExamples(PipelineError):
    pass


class AuthError(PipelineError):
    pass


class RateLimited(PipelineError):
    pass


class ProviderError(PipelineError):
    def __init__(self, status: int, body: str):
        super().__init__(f"provider returned {status}: {body[:200]}")
        self.status = status
        self.body = body


class CompletionTimeout(PipelineError):
    pass


class NoMatch(PipelineError):
    pass


class AlignmentError(PipelineError):
    pass


class ZeroVector(PipelineError):
    pass


class DimensionMismatch(PipelineError):
    pass


class PerplexityInfeasible(PipelineError):
    pass


class ConfigError(PipelineError):
    pass
