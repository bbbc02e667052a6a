"""Static docstring mining for building API retrieval corpora."""

from .extract import (
    ExtractionReport,
    ExtractorError,
    extract_repo,
    first_sentence,
    parse_param_descs,
)

__version__ = "0.1.0"

__all__ = [
    "ExtractionReport",
    "ExtractorError",
    "extract_repo",
    "first_sentence",
    "parse_param_descs",
    "__version__",
]
