"""Streaming JSONL corpus ingestion, cleaning/tokenization, token statistics.

The reader never materializes the corpus: records are yielded one line at a
time and statistics accumulate per token, so peak memory is bounded by the
vocabulary, not the number of records.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger("varfam.ingest")


class CorpusError(Exception):
    """Fatal ingestion problem (unreadable file, empty vocabulary, ...)."""


@dataclass(slots=True)
class CorpusRecord:
    """One document: its text, an optional opaque dimension label, and a
    sequential id."""

    text: str
    dimension: str | None = None
    record_id: int = 0


@dataclass(slots=True)
class TokenStats:
    """Aggregate counts for one token."""

    token: str
    corpus_frequency: int = 0
    document_frequency: int = 0
    dimension_counts: dict[str, int] = field(default_factory=dict)


@dataclass(slots=True)
class SkipCounters:
    """Bookkeeping for lines the reader could not use."""

    malformed_json: int = 0
    missing_text_field: int = 0

    @property
    def total(self) -> int:
        return self.malformed_json + self.missing_text_field


def stream_records(
    path: str | Path,
    text_field: str = "text",
    dimension_field: str | None = "user_id",
    counters: SkipCounters | None = None,
) -> Iterator[CorpusRecord]:
    """Yield records from a JSONL file in file order.

    Malformed lines and lines lacking ``text_field`` are skipped and tallied
    on ``counters``. A missing ``dimension_field`` leaves the record's
    dimension absent. An unreadable file raises :class:`CorpusError`.
    """
    if counters is None:
        counters = SkipCounters()
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from exc
    record_id = 0
    with handle:
        for line in handle:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                counters.malformed_json += 1
                continue
            if not isinstance(obj, dict) or text_field not in obj or obj[text_field] is None:
                counters.missing_text_field += 1
                continue
            dimension = None
            if dimension_field is not None:
                value = obj.get(dimension_field)
                if value is not None:
                    # Opaque categorical label: never parsed, only compared.
                    dimension = str(value)
            yield CorpusRecord(text=str(obj[text_field]), dimension=dimension, record_id=record_id)
            record_id += 1


def _keep_edge_char(ch: str) -> bool:
    # Letters, digits and apostrophes survive at token edges; everything
    # else (punctuation, symbols, @) is trimmed.
    if ch == "'":
        return True
    cat = unicodedata.category(ch)
    return cat.startswith("L") or cat.startswith("N")


def _has_letter_or_digit(token: str) -> bool:
    return any(unicodedata.category(ch).startswith(("L", "N")) for ch in token)


def clean_and_tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace tokenization with minimal cleaning.

    Chunks starting with ``@`` (mentions) are dropped whole. Leading and
    trailing characters that are neither letters, digits, nor apostrophes are
    stripped; internal characters, in particular apostrophes and hyphens, are
    preserved so elided forms like ``d'Zukunft`` stay one token. Tokens left
    without any letter or digit are dropped.
    """
    tokens: list[str] = []
    for chunk in text.split():
        if chunk[0] == "@":
            continue
        start = 0
        end = len(chunk)
        while start < end and not _keep_edge_char(chunk[start]):
            start += 1
        while end > start and not _keep_edge_char(chunk[end - 1]):
            end -= 1
        token = chunk[start:end]
        if not token or not _has_letter_or_digit(token):
            continue
        if lowercase:
            token = token.lower()
        tokens.append(token)
    return tokens


def collect_stats(
    records: Iterable[CorpusRecord],
    lowercase: bool = True,
    use_dimension: bool = True,
) -> dict[str, TokenStats]:
    """Accumulate exact per-token statistics over a record stream.

    ``dimension_counts`` is only populated when ``use_dimension`` is set;
    records without a dimension label contribute to ``corpus_frequency``
    but not to ``dimension_counts``.
    """
    stats: dict[str, TokenStats] = {}
    for record in records:
        tokens = clean_and_tokenize(record.text, lowercase=lowercase)
        seen_in_record: set[str] = set()
        for token in tokens:
            entry = stats.get(token)
            if entry is None:
                entry = TokenStats(token=token)
                stats[token] = entry
            entry.corpus_frequency += 1
            if token not in seen_in_record:
                entry.document_frequency += 1
                seen_in_record.add(token)
            if use_dimension and record.dimension is not None:
                entry.dimension_counts[record.dimension] = (
                    entry.dimension_counts.get(record.dimension, 0) + 1
                )
    return stats


def write_stats_jsonl(stats: dict[str, TokenStats], path: str | Path) -> int:
    """Persist token statistics, one token per line, sorted for determinism.

    Written via temp file + rename so an interrupted run leaves no partial
    stats behind.
    """
    import os

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    count = 0
    with tmp.open("w", encoding="utf-8") as handle:
        for token in sorted(stats):
            entry = stats[token]
            obj = {
                "token": entry.token,
                "corpus_frequency": entry.corpus_frequency,
                "document_frequency": entry.document_frequency,
                "dimension_counts": dict(sorted(entry.dimension_counts.items())),
            }
            handle.write(json.dumps(obj, ensure_ascii=False, sort_keys=False) + "\n")
            count += 1
    os.replace(tmp, path)
    return count


def read_stats_jsonl(path: str | Path) -> dict[str, TokenStats]:
    """Inverse of :func:`write_stats_jsonl`."""
    stats: dict[str, TokenStats] = {}
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read stats {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                stats[obj["token"]] = TokenStats(
                    token=obj["token"],
                    corpus_frequency=int(obj["corpus_frequency"]),
                    document_frequency=int(obj["document_frequency"]),
                    dimension_counts={
                        k: int(v) for k, v in obj.get("dimension_counts", {}).items()
                    },
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"malformed stats line {lineno} in {path}") from exc
    return stats


class TokenizedCorpus:
    """Re-iterable view of a JSONL corpus as lists of tokens.

    Each iteration re-streams the file, so repeated epochs over a large
    corpus keep memory flat.
    """

    def __init__(
        self,
        path: str | Path,
        text_field: str = "text",
        dimension_field: str | None = "user_id",
        lowercase: bool = True,
    ) -> None:
        self.path = Path(path)
        self.text_field = text_field
        self.dimension_field = dimension_field
        self.lowercase = lowercase
        self.counters = SkipCounters()

    def __iter__(self) -> Iterator[list[str]]:
        self.counters = SkipCounters()
        for record in stream_records(
            self.path, self.text_field, self.dimension_field, self.counters
        ):
            yield clean_and_tokenize(record.text, lowercase=self.lowercase)

    def records(self) -> Iterator[CorpusRecord]:
        return stream_records(self.path, self.text_field, self.dimension_field, self.counters)
