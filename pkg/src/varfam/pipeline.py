"""Stage orchestration: train, induce, or both, with run metadata."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .artifacts import RunConfig
from .embeddings import EmbeddingModel
from .induction import candidate_lexicon, induce_open, induce_strict
from .ingest import SkipCounters, TokenStats, TokenizedCorpus, clean_and_tokenize, stream_records
from .scoring import ScoredFamily, score_and_prune
from .training import train

logger = logging.getLogger("varfam.pipeline")

# Ingestion policy surfaced in every run's metadata: chunks without any
# letter or digit (pure punctuation, lone emoji) are dropped at tokenization.
TOKEN_DROP_NOTE = "tokens without letters or digits are dropped during tokenization"


@dataclass
class TrainOutcome:
    model: EmbeddingModel
    stats: dict[str, TokenStats]
    counters: SkipCounters
    record_count: int
    metadata: dict


@dataclass
class InduceOutcome:
    families: list[ScoredFamily]
    lexicon_size: int
    metadata: dict


def ingest_statistics(
    config: RunConfig, corpus_path: str | Path
) -> tuple[dict[str, TokenStats], SkipCounters, int]:
    """One streaming pass: token statistics plus skip/record counters."""
    counters = SkipCounters()
    stats: dict[str, TokenStats] = {}
    record_count = 0
    use_dimension = config.dimension is not None
    for record in stream_records(corpus_path, config.text_field, config.dimension, counters):
        record_count += 1
        seen: set[str] = set()
        for token in clean_and_tokenize(record.text, lowercase=config.lowercase):
            entry = stats.get(token)
            if entry is None:
                entry = TokenStats(token=token)
                stats[token] = entry
            entry.corpus_frequency += 1
            if token not in seen:
                entry.document_frequency += 1
                seen.add(token)
            if use_dimension and record.dimension is not None:
                entry.dimension_counts[record.dimension] = (
                    entry.dimension_counts.get(record.dimension, 0) + 1
                )
    return stats, counters, record_count


def run_train(config: RunConfig, corpus_path: str | Path, workers: int = 1) -> TrainOutcome:
    """Ingest the corpus and train the embedding model."""
    started = time.perf_counter()
    stats, counters, record_count = ingest_statistics(config, corpus_path)
    ingest_seconds = time.perf_counter() - started

    corpus = TokenizedCorpus(
        corpus_path, config.text_field, config.dimension, config.lowercase
    )
    tokens = list(stats.keys())
    frequencies = np.array([stats[t].corpus_frequency for t in tokens], dtype=np.int64)
    train_started = time.perf_counter()
    model = train(
        corpus, config.embedding_config(), workers=workers, vocabulary=(tokens, frequencies)
    )
    train_seconds = time.perf_counter() - train_started

    metadata = {
        "config": config.echo(),
        "config_echo": config.echo_hash(),
        "corpus": {
            "path": str(corpus_path),
            "records": record_count,
            "skipped_malformed_json": counters.malformed_json,
            "skipped_missing_text_field": counters.missing_text_field,
            "distinct_tokens": len(stats),
        },
        "vocabulary_size": len(model),
        "timing_seconds": {
            "ingest": round(ingest_seconds, 3),
            "train": round(train_seconds, 3),
        },
        "notes": [TOKEN_DROP_NOTE],
    }
    return TrainOutcome(model, stats, counters, record_count, metadata)


def run_induce(
    config: RunConfig, model: EmbeddingModel, stats: dict[str, TokenStats]
) -> InduceOutcome:
    """Build the candidate lexicon, induce families in the configured mode,
    then score and prune."""
    started = time.perf_counter()
    lexicon = candidate_lexicon(stats, model, config.min_count, config.min_len)
    induction = config.induction_config()
    if config.mode == "open":
        raw = induce_open(model, lexicon, induction)
    else:
        raw = induce_strict(model, lexicon, induction)
    families = score_and_prune(
        raw, stats, config.scoring_config(), dimension_configured=config.dimension is not None
    )
    seconds = time.perf_counter() - started
    kept = sum(1 for f in families if not f.pruned)
    metadata = {
        "config": config.echo(),
        "config_echo": config.echo_hash(),
        "mode": config.mode,
        "lexicon_size": len(lexicon),
        "families_induced": len(raw),
        "families_kept": kept,
        "families_pruned": len(families) - kept,
        "timing_seconds": {"induce": round(seconds, 3)},
    }
    if config.mode == "open":
        # stars are never merged or deduplicated; record how much they overlap
        membership: dict[str, int] = {}
        for family in raw:
            for member in family.members:
                membership[member] = membership.get(member, 0) + 1
        metadata["open_mode_overlap"] = {
            "stars_retained": len(raw),
            "tokens_in_multiple_stars": sum(1 for n in membership.values() if n > 1),
        }
    return InduceOutcome(families, len(lexicon), metadata)


def run_pipeline(
    config: RunConfig, corpus_path: str | Path, workers: int = 1
) -> tuple[TrainOutcome, InduceOutcome]:
    """Train then induce in one process; returns both outcomes."""
    train_outcome = run_train(config, corpus_path, workers=workers)
    induce_outcome = run_induce(config, train_outcome.model, train_outcome.stats)
    merged = dict(induce_outcome.metadata)
    merged["corpus"] = train_outcome.metadata["corpus"]
    merged["vocabulary_size"] = train_outcome.metadata["vocabulary_size"]
    merged["timing_seconds"] = {
        **train_outcome.metadata["timing_seconds"],
        **induce_outcome.metadata["timing_seconds"],
    }
    merged["notes"] = train_outcome.metadata["notes"]
    induce_outcome.metadata = merged
    return train_outcome, induce_outcome
