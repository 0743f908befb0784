"""Subword embedding model: vocabulary, composed vectors, queries, persistence.

A token's representation is the average of its learned word vector and the
vectors of its hashed character n-grams, so orthographically close forms end
up close in space even at low frequency, and out-of-vocabulary tokens still
compose a usable vector from their n-grams alone.
"""

from __future__ import annotations

import io
import json
import logging
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ngrams import extract_ngrams, hash_ngram

logger = logging.getLogger("varfam.embeddings")

_MAGIC = b"VFEM"
_FORMAT_VERSION = 1


class ModelError(Exception):
    """Invalid configuration, corrupt model file, or unusable query."""


class ZeroVectorError(ModelError):
    """Similarity is undefined for a zero vector; callers must filter."""


@dataclass
class EmbeddingConfig:
    """Training hyperparameters.

    The first seven fields mirror the run configuration; the rest are
    training internals with standard skip-gram defaults.
    """

    vector_size: int = 100
    window: int = 5
    min_count: int = 10
    epochs: int = 10
    sg: int = 1
    min_n: int = 3
    max_n: int = 7
    bucket_count: int = 2_000_000
    negative_samples: int = 5
    initial_learning_rate: float = 0.05
    subsample_threshold: float = 1e-4
    rng_seed: int = 42

    def validate(self) -> None:
        if self.vector_size < 1:
            raise ModelError("vector_size must be >= 1")
        if self.window < 1:
            raise ModelError("window must be >= 1")
        if self.min_count < 1:
            raise ModelError("min_count must be >= 1")
        if self.epochs < 1:
            raise ModelError("epochs must be >= 1")
        if self.sg != 1:
            raise ModelError("only the skip-gram architecture is supported (sg=1)")
        if not (1 <= self.min_n <= self.max_n):
            raise ModelError("need 1 <= min_n <= max_n")
        if self.bucket_count < 1:
            raise ModelError("bucket_count must be >= 1")
        if self.negative_samples < 1:
            raise ModelError("negative_samples must be >= 1")
        if self.initial_learning_rate <= 0:
            raise ModelError("initial_learning_rate must be > 0")
        if self.subsample_threshold < 0:
            raise ModelError("subsample_threshold must be >= 0")


class EmbeddingModel:
    """Immutable trained model; safe to share across threads for queries."""

    def __init__(
        self,
        tokens: list[str],
        frequencies: np.ndarray,
        word_vectors: np.ndarray,
        ngram_vectors: np.ndarray,
        config: EmbeddingConfig,
    ) -> None:
        if word_vectors.shape[0] != len(tokens):
            raise ModelError("word_vectors row count must match vocabulary size")
        self.tokens = list(tokens)
        self.token_index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        self.frequencies = np.asarray(frequencies, dtype=np.int64)
        self.word_vectors = word_vectors
        self.ngram_vectors = ngram_vectors
        self.config = config
        self._ngram_flat, self._ngram_offsets = _vocab_ngram_ids(
            self.tokens, config.min_n, config.max_n, config.bucket_count
        )
        self._composed: np.ndarray | None = None
        self._normed: np.ndarray | None = None
        self._lex_rank: np.ndarray | None = None

    @property
    def vocabulary(self) -> dict[str, tuple[int, int]]:
        """token -> (index, corpus frequency)"""
        return {t: (i, int(self.frequencies[i])) for i, t in enumerate(self.tokens)}

    def __contains__(self, token: str) -> bool:
        return token in self.token_index

    def __len__(self) -> int:
        return len(self.tokens)

    def vocab_ngram_ids(self, index: int) -> np.ndarray:
        lo, hi = self._ngram_offsets[index], self._ngram_offsets[index + 1]
        return self._ngram_flat[lo:hi]

    def word_vector(self, token: str) -> np.ndarray:
        """Composed vector: average of word vector and n-gram bucket vectors.

        Out-of-vocabulary tokens compose from n-grams alone; a token with no
        n-grams and no vocabulary entry gets the zero vector.
        """
        dim = self.word_vectors.shape[1]
        index = self.token_index.get(token)
        if index is not None:
            ids = self.vocab_ngram_ids(index)
            total = self.word_vectors[index].astype(np.float64)
            if ids.size:
                total = total + self.ngram_vectors[ids].sum(axis=0, dtype=np.float64)
            return total / (1 + ids.size)
        grams = extract_ngrams(token, self.config.min_n, self.config.max_n)
        if not grams:
            logger.warning("token %r has no n-grams and is out of vocabulary; zero vector", token)
            return np.zeros(dim, dtype=np.float64)
        ids = np.array(
            [hash_ngram(g, self.config.bucket_count) for g in grams], dtype=np.int64
        )
        return self.ngram_vectors[ids].sum(axis=0, dtype=np.float64) / ids.size

    def cosine(self, w: str, v: str) -> float:
        """Cosine similarity of the composed vectors, in double precision."""
        wv = self.word_vector(w)
        vv = self.word_vector(v)
        wn = float(np.linalg.norm(wv))
        vn = float(np.linalg.norm(vv))
        if wn == 0.0 or vn == 0.0:
            raise ZeroVectorError(f"cosine undefined for zero vector ({w!r} vs {v!r})")
        return float(np.dot(wv, vv) / (wn * vn))

    def _composed_matrix(self) -> np.ndarray:
        if self._composed is None:
            vocab_size, dim = self.word_vectors.shape
            composed = np.empty((vocab_size, dim), dtype=np.float64)
            for i in range(vocab_size):
                ids = self.vocab_ngram_ids(i)
                row = self.word_vectors[i].astype(np.float64)
                if ids.size:
                    row = row + self.ngram_vectors[ids].sum(axis=0, dtype=np.float64)
                composed[i] = row / (1 + ids.size)
            self._composed = composed
        return self._composed

    def _normed_matrix(self) -> np.ndarray:
        if self._normed is None:
            composed = self._composed_matrix()
            norms = np.linalg.norm(composed, axis=1, keepdims=True)
            safe = np.where(norms == 0.0, 1.0, norms)
            self._normed = composed / safe
        return self._normed

    def _lex_ranks(self) -> np.ndarray:
        if self._lex_rank is None:
            rank = np.empty(len(self.tokens), dtype=np.int64)
            rank[np.argsort(np.array(self.tokens, dtype=object))] = np.arange(len(self.tokens))
            self._lex_rank = rank
        return self._lex_rank

    def _select_top(self, scores: np.ndarray, n: int, exclude: int | None) -> np.ndarray:
        """Exact top-n indices by (-score, token); equivalent to a full scan.

        Partitions first for speed and falls back to the full sort whenever a
        score tie at the cut boundary could make the partition ambiguous.
        """
        vocab_size = scores.shape[0]
        if exclude is not None:
            scores = scores.copy()
            scores[exclude] = -np.inf
        lex = self._lex_ranks()
        m = n + 64
        if m < vocab_size:
            part = np.argpartition(-scores, m - 1)[:m]
            included_min = scores[part].min()
            rest = np.ones(vocab_size, dtype=bool)
            rest[part] = False
            if scores[rest].max() >= included_min:
                part = np.arange(vocab_size)
        else:
            part = np.arange(vocab_size)
        order = part[np.lexsort((lex[part], -scores[part]))]
        if exclude is not None:
            order = order[order != exclude]
        return order[:n]

    def top_neighbors(self, w: str, n: int) -> list[tuple[str, float]]:
        """The n highest-cosine vocabulary tokens, excluding w itself.

        Exact full scan; ties broken by ascending token order.
        """
        if n <= 0:
            return []
        query = self.word_vector(w)
        norm = float(np.linalg.norm(query))
        if norm == 0.0:
            raise ZeroVectorError(f"top_neighbors undefined for zero vector {w!r}")
        scores = self._normed_matrix() @ (query / norm)
        top = self._select_top(scores, n, self.token_index.get(w))
        return [(self.tokens[i], float(scores[i])) for i in top]

    def top_neighbors_many(self, queries: list[str], n: int) -> list[list[tuple[str, float]]]:
        """:meth:`top_neighbors` over many in-vocabulary query tokens.

        Runs the exact single-query scan per token, so batched and single
        results are bit-identical.
        """
        if n <= 0:
            return [[] for _ in queries]
        normed = self._normed_matrix()
        results: list[list[tuple[str, float]]] = []
        for token in queries:
            idx = self.token_index.get(token)
            if idx is None:
                raise ModelError(f"top_neighbors_many requires vocabulary tokens, got {token!r}")
            query = self.word_vector(token)
            norm = float(np.linalg.norm(query))
            if norm == 0.0:
                raise ZeroVectorError(f"top_neighbors undefined for zero vector {token!r}")
            scores = normed @ (query / norm)
            top = self._select_top(scores, n, idx)
            results.append([(self.tokens[i], float(scores[i])) for i in top])
        return results

    def composed_matrix(self) -> np.ndarray:
        """Composed (word + n-gram average) vectors for the whole vocabulary."""
        return self._composed_matrix()

    def pairwise_cosines(self, tokens: list[str]) -> np.ndarray:
        """Cosine matrix over in-vocabulary tokens (rows normalized once)."""
        indices = []
        for token in tokens:
            idx = self.token_index.get(token)
            if idx is None:
                raise ModelError(f"pairwise_cosines requires vocabulary tokens, got {token!r}")
            indices.append(idx)
        normed = self._normed_matrix()[indices]
        return normed @ normed.T

    def save(self, path: str | Path) -> None:
        """Binary persistence: versioned header, vocabulary, both matrices
        (little-endian float32)."""
        path = Path(path)
        with path.open("wb") as handle:
            self._write(handle)

    def _write(self, handle: io.BufferedIOBase) -> None:
        config_blob = json.dumps(asdict(self.config), sort_keys=True).encode("utf-8")
        handle.write(_MAGIC)
        handle.write(struct.pack("<I", _FORMAT_VERSION))
        handle.write(struct.pack("<I", len(config_blob)))
        handle.write(config_blob)
        vocab_size, dim = self.word_vectors.shape
        handle.write(struct.pack("<QQQ", vocab_size, self.ngram_vectors.shape[0], dim))
        for i, token in enumerate(self.tokens):
            raw = token.encode("utf-8")
            handle.write(struct.pack("<I", len(raw)))
            handle.write(raw)
            handle.write(struct.pack("<q", int(self.frequencies[i])))
        handle.write(np.ascontiguousarray(self.word_vectors, dtype="<f4").tobytes())
        handle.write(np.ascontiguousarray(self.ngram_vectors, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        path = Path(path)
        try:
            handle = path.open("rb")
        except OSError as exc:
            raise ModelError(f"cannot read model {path}: {exc}") from exc
        try:
            with handle:
                magic = handle.read(4)
                if magic != _MAGIC:
                    raise ModelError(f"{path} is not a model file (bad magic)")
                (version,) = struct.unpack("<I", handle.read(4))
                if version != _FORMAT_VERSION:
                    raise ModelError(f"unsupported model format version {version}")
                (config_len,) = struct.unpack("<I", handle.read(4))
                config = EmbeddingConfig(**json.loads(handle.read(config_len)))
                vocab_size, bucket_count, dim = struct.unpack("<QQQ", handle.read(24))
                tokens: list[str] = []
                frequencies = np.empty(vocab_size, dtype=np.int64)
                for i in range(vocab_size):
                    (token_len,) = struct.unpack("<I", handle.read(4))
                    tokens.append(handle.read(token_len).decode("utf-8"))
                    (frequencies[i],) = struct.unpack("<q", handle.read(8))
                word = np.frombuffer(handle.read(vocab_size * dim * 4), dtype="<f4")
                word = word.reshape(vocab_size, dim).copy()
                grams = np.frombuffer(handle.read(bucket_count * dim * 4), dtype="<f4")
                grams = grams.reshape(bucket_count, dim).copy()
        except ModelError:
            raise
        except (struct.error, ValueError, TypeError, UnicodeDecodeError,
                json.JSONDecodeError) as exc:
            raise ModelError(f"model file {path} is corrupt: {exc}") from exc
        return cls(tokens, frequencies, word, grams, config)

    def export_vec(self, path: str | Path) -> None:
        """Plain-text export: header line, then token + composed components."""
        composed = self._composed_matrix()
        path = Path(path)
        with path.open("w", encoding="utf-8") as handle:
            handle.write(f"{composed.shape[0]} {composed.shape[1]}\n")
            for i, token in enumerate(self.tokens):
                parts = " ".join(f"{x:.6f}" for x in composed[i])
                handle.write(f"{token} {parts}\n")


def _vocab_ngram_ids(
    tokens: list[str], min_n: int, max_n: int, bucket_count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Flattened n-gram bucket ids per vocabulary index (duplicates kept)."""
    offsets = np.zeros(len(tokens) + 1, dtype=np.int64)
    chunks: list[list[int]] = []
    for i, token in enumerate(tokens):
        ids = [hash_ngram(g, bucket_count) for g in extract_ngrams(token, min_n, max_n)]
        chunks.append(ids)
        offsets[i + 1] = offsets[i] + len(ids)
    flat = np.empty(int(offsets[-1]), dtype=np.int32)
    for i, ids in enumerate(chunks):
        flat[offsets[i] : offsets[i + 1]] = ids
    return flat, offsets


# Free-function aliases over the model methods.

def word_vector(model: EmbeddingModel, token: str) -> np.ndarray:
    return model.word_vector(token)


def cosine(model: EmbeddingModel, w: str, v: str) -> float:
    return model.cosine(w, v)


def top_neighbors(model: EmbeddingModel, w: str, n: int) -> list[tuple[str, float]]:
    return model.top_neighbors(w, n)
