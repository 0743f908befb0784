"""varfam: induce lexical/orthographic variant families from raw text."""

__version__ = "0.1.0"

from .embeddings import EmbeddingConfig, EmbeddingModel
from .ingest import CorpusRecord, TokenStats, clean_and_tokenize, collect_stats, stream_records
from .ngrams import extract_ngrams, hash_ngram, jaccard

__all__ = [
    "EmbeddingConfig",
    "EmbeddingModel",
    "CorpusRecord",
    "TokenStats",
    "clean_and_tokenize",
    "collect_stats",
    "stream_records",
    "extract_ngrams",
    "hash_ngram",
    "jaccard",
    "__version__",
]
