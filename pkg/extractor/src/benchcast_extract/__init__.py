"""Optional producer tool: prompt embeddings in the corpus JSONL format."""

from .extract import ExtractorConfig, ModelUnavailableError, extract, read_prompts

__all__ = ["ExtractorConfig", "ModelUnavailableError", "extract", "read_prompts"]
__version__ = "0.1.0"
