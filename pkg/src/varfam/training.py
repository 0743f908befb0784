"""Skip-gram negative-sampling trainer over word + hashed n-gram vectors.

The update rule follows the classic formulation: for a center token with
composed input h (average of word vector and n-gram bucket vectors) and a
context target, the loss is

    L = -log sigma(u_t . h) - sum_k log sigma(-u_k . h)

over `negative_samples` noise tokens drawn from the unigram^0.75
distribution. The hot loop is JIT-compiled; sampling decisions (window size,
subsampling, negatives) run on an explicit 64-bit LCG so a fixed seed with a
single worker is bit-reproducible across runs and platforms.

Multi-worker training shards each batch of records across threads with
unsynchronized (racy) float32 updates; reproducibility contracts apply to
single-worker runs only.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter
from collections.abc import Iterable

import numpy as np
from numba import njit

from .embeddings import EmbeddingConfig, EmbeddingModel, ModelError, _vocab_ngram_ids

logger = logging.getLogger("varfam.training")

_NOISE_EXPONENT = 0.75
_CHUNK_TOKENS = 250_000
_LCG_MULT = np.uint64(6364136223846793005)
_LCG_INC = np.uint64(1442695040888963407)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _lcg_next(state):
    state[0] = state[0] * _LCG_MULT + _LCG_INC
    return state[0]


@njit(cache=True, nogil=True)
def _lcg_uniform(state):
    return float(_lcg_next(state) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True)
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def _pair_update(
    word_vecs,
    ngram_vecs,
    out_vecs,
    word_id,
    ngram_flat,
    ng_lo,
    ng_hi,
    target,
    negatives,
    n_negatives,
    alpha,
):
    """One positive + n negative updates for a (center, context) pair.

    Gradients are evaluated at the pre-update parameters and applied scaled
    by -alpha; the input-side gradient is split evenly over the word vector
    and each n-gram vector (derivative of the averaged composition).
    """
    dim = word_vecs.shape[1]
    m = 1 + (ng_hi - ng_lo)
    h = word_vecs[word_id].copy()
    for j in range(ng_lo, ng_hi):
        row = ngram_vecs[ngram_flat[j]]
        for c in range(dim):
            h[c] += row[c]
    inv_m = 1.0 / m
    for c in range(dim):
        h[c] = h[c] * inv_m
    gh = np.zeros_like(h)
    for k in range(-1, n_negatives):
        if k < 0:
            out_id = target
            label = 1.0
        else:
            out_id = negatives[k]
            label = 0.0
        row = out_vecs[out_id]
        x = 0.0
        for c in range(dim):
            x += float(h[c]) * float(row[c])
        g = (label - _sigmoid(x)) * alpha
        for c in range(dim):
            gh[c] += g * row[c]
        for c in range(dim):
            row[c] += g * h[c]
    wrow = word_vecs[word_id]
    for c in range(dim):
        wrow[c] += gh[c] * inv_m
    for j in range(ng_lo, ng_hi):
        row = ngram_vecs[ngram_flat[j]]
        for c in range(dim):
            row[c] += gh[c] * inv_m


@njit(cache=True, nogil=True)
def _train_chunk(
    tokens,
    offsets,
    word_vecs,
    ngram_vecs,
    out_vecs,
    ngram_flat,
    ngram_offsets,
    keep_prob,
    neg_cum,
    window,
    n_negatives,
    initial_lr,
    total_planned,
    processed_before,
    state,
):
    """Train over one batch of encoded records; returns tokens scanned."""
    vocab_size = word_vecs.shape[0]
    total_weight = neg_cum[vocab_size - 1]
    neg_buf = np.empty(n_negatives, dtype=np.int32)
    processed = 0
    for r in range(offsets.shape[0] - 1):
        lo = offsets[r]
        hi = offsets[r + 1]
        kept = np.empty(hi - lo, dtype=np.int32)
        kept_count = 0
        for i in range(lo, hi):
            processed += 1
            wid = tokens[i]
            kp = keep_prob[wid]
            if kp >= 1.0 or _lcg_uniform(state) < kp:
                kept[kept_count] = wid
                kept_count += 1
        frac = float(processed_before + processed) / float(total_planned)
        if frac > 1.0:
            frac = 1.0
        alpha = initial_lr * (1.0 - frac)
        if alpha <= 0.0:
            continue
        for pos in range(kept_count):
            center = kept[pos]
            reduction = int(_lcg_next(state) % np.uint64(window))
            span = window - reduction
            c_lo = pos - span
            if c_lo < 0:
                c_lo = 0
            c_hi = pos + span
            if c_hi > kept_count - 1:
                c_hi = kept_count - 1
            for cpos in range(c_lo, c_hi + 1):
                if cpos == pos:
                    continue
                target = kept[cpos]
                n_neg = 0
                attempts = 0
                max_attempts = 10 * n_negatives + 100
                while n_neg < n_negatives and attempts < max_attempts:
                    attempts += 1
                    u = _lcg_uniform(state) * total_weight
                    cand = np.searchsorted(neg_cum, u, side="right")
                    if cand >= vocab_size:
                        cand = vocab_size - 1
                    if cand == target:
                        continue
                    neg_buf[n_neg] = cand
                    n_neg += 1
                _pair_update(
                    word_vecs,
                    ngram_vecs,
                    out_vecs,
                    center,
                    ngram_flat,
                    ngram_offsets[center],
                    ngram_offsets[center + 1],
                    target,
                    neg_buf,
                    n_neg,
                    alpha,
                )
    return processed


def negative_sampling_loss(
    word_vecs: np.ndarray,
    ngram_vecs: np.ndarray,
    out_vecs: np.ndarray,
    word_id: int,
    ngram_ids: np.ndarray,
    target: int,
    negatives: np.ndarray,
) -> float:
    """Loss for one (center, context) pair with fixed negatives.

    Plain-numpy statement of the objective; finite differences of this
    function are the reference that the applied gradients are checked
    against.
    """
    h = word_vecs[word_id].astype(np.float64)
    if len(ngram_ids):
        h = h + ngram_vecs[np.asarray(ngram_ids)].sum(axis=0, dtype=np.float64)
    h = h / (1 + len(ngram_ids))
    loss = -_log_sigmoid(float(out_vecs[target].astype(np.float64) @ h))
    for k in negatives:
        loss -= _log_sigmoid(-float(out_vecs[int(k)].astype(np.float64) @ h))
    return loss


def _log_sigmoid(x: float) -> float:
    if x >= 0.0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


def apply_pair_update(
    word_vecs: np.ndarray,
    ngram_vecs: np.ndarray,
    out_vecs: np.ndarray,
    word_id: int,
    ngram_ids: np.ndarray,
    target: int,
    negatives: np.ndarray,
    alpha: float,
) -> None:
    """In-place single-pair update through the production kernel.

    Accepts float32 or float64 matrices; the kernel specializes per dtype,
    so tests can extract exact analytic gradients in double precision.
    """
    ngram_ids = np.asarray(ngram_ids, dtype=np.int32)
    negatives = np.asarray(negatives, dtype=np.int32)
    _pair_update(
        word_vecs,
        ngram_vecs,
        out_vecs,
        int(word_id),
        ngram_ids,
        0,
        len(ngram_ids),
        int(target),
        negatives,
        len(negatives),
        float(alpha),
    )


def build_vocabulary(
    records: Iterable[list[str]], min_count: int
) -> tuple[list[str], np.ndarray, int]:
    """Count tokens, filter by ``min_count``, order by (-frequency, token).

    Returns (tokens, frequencies, total in-vocabulary occurrences).
    """
    counts: Counter[str] = Counter()
    for tokens in records:
        counts.update(tokens)
    items = [(t, c) for t, c in counts.items() if c >= min_count]
    items.sort(key=lambda tc: (-tc[1], tc[0]))
    tokens = [t for t, _ in items]
    frequencies = np.array([c for _, c in items], dtype=np.int64)
    return tokens, frequencies, int(frequencies.sum())


def _keep_probabilities(frequencies: np.ndarray, threshold: float) -> np.ndarray:
    if threshold <= 0:
        return np.ones(len(frequencies), dtype=np.float64)
    total = float(frequencies.sum())
    ratio = threshold * total / frequencies.astype(np.float64)
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def _noise_cumulative(frequencies: np.ndarray) -> np.ndarray:
    weights = frequencies.astype(np.float64) ** _NOISE_EXPONENT
    return np.cumsum(weights)


def train(
    records: Iterable[list[str]],
    config: EmbeddingConfig,
    workers: int = 1,
    vocabulary: tuple[list[str], np.ndarray] | None = None,
) -> EmbeddingModel:
    """Train a model over a re-iterable stream of tokenized records.

    ``vocabulary`` may carry precomputed (tokens, frequencies) from an
    earlier statistics pass; tokens below ``min_count`` are filtered here
    either way and ordered by (-frequency, token).
    """
    config.validate()
    if workers < 1:
        raise ModelError("workers must be >= 1")
    if vocabulary is not None:
        given_tokens, given_freqs = vocabulary
        items = [
            (t, int(c)) for t, c in zip(given_tokens, given_freqs) if c >= config.min_count
        ]
        items.sort(key=lambda tc: (-tc[1], tc[0]))
        tokens = [t for t, _ in items]
        frequencies = np.array([c for _, c in items], dtype=np.int64)
        total_tokens = int(frequencies.sum()) if len(frequencies) else 0
    else:
        tokens, frequencies, total_tokens = build_vocabulary(records, config.min_count)
    if not tokens:
        raise ModelError(
            f"empty vocabulary: no token reaches min_count={config.min_count}"
        )
    vocab_size = len(tokens)
    dim = config.vector_size
    logger.info("vocabulary: %d tokens, %d in-vocabulary occurrences", vocab_size, total_tokens)

    token_index = {t: i for i, t in enumerate(tokens)}
    ngram_flat, ngram_offsets = _vocab_ngram_ids(
        tokens, config.min_n, config.max_n, config.bucket_count
    )
    keep_prob = _keep_probabilities(frequencies, config.subsample_threshold)
    neg_cum = _noise_cumulative(frequencies)

    rng = np.random.default_rng(config.rng_seed)
    bound = 1.0 / dim
    word_vecs = (rng.random((vocab_size, dim), dtype=np.float32) * 2 - 1) * bound
    ngram_vecs = (rng.random((config.bucket_count, dim), dtype=np.float32) * 2 - 1) * bound
    out_vecs = np.zeros((vocab_size, dim), dtype=np.float32)

    states = [
        np.array([np.uint64(config.rng_seed * 2654435761 + 1 + w)], dtype=np.uint64)
        for w in range(workers)
    ]
    total_planned = max(1, total_tokens * config.epochs)
    processed = 0
    for epoch in range(config.epochs):
        for encoded, offsets in _encoded_batches(records, token_index):
            processed += _dispatch(
                encoded,
                offsets,
                word_vecs,
                ngram_vecs,
                out_vecs,
                ngram_flat,
                ngram_offsets,
                keep_prob,
                neg_cum,
                config,
                total_planned,
                processed,
                states,
                workers,
            )
        logger.info("epoch %d/%d done (%d tokens scanned)", epoch + 1, config.epochs, processed)

    return EmbeddingModel(tokens, frequencies, word_vecs, ngram_vecs, config)


def _encoded_batches(records, token_index):
    """Encode records to int32 id arrays in bounded-size batches."""
    buffer: list[int] = []
    offsets: list[int] = [0]
    for record in records:
        ids = [token_index[t] for t in record if t in token_index]
        if not ids:
            continue
        buffer.extend(ids)
        offsets.append(len(buffer))
        if len(buffer) >= _CHUNK_TOKENS:
            yield np.array(buffer, dtype=np.int32), np.array(offsets, dtype=np.int64)
            buffer = []
            offsets = [0]
    if len(offsets) > 1:
        yield np.array(buffer, dtype=np.int32), np.array(offsets, dtype=np.int64)


def _dispatch(
    encoded,
    offsets,
    word_vecs,
    ngram_vecs,
    out_vecs,
    ngram_flat,
    ngram_offsets,
    keep_prob,
    neg_cum,
    config,
    total_planned,
    processed_before,
    states,
    workers,
):
    def run(record_lo: int, record_hi: int, before: int, state) -> int:
        return _train_chunk(
            encoded,
            offsets[record_lo : record_hi + 1],
            word_vecs,
            ngram_vecs,
            out_vecs,
            ngram_flat,
            ngram_offsets,
            keep_prob,
            neg_cum,
            config.window,
            config.negative_samples,
            config.initial_learning_rate,
            total_planned,
            before,
            state,
        )

    n_records = len(offsets) - 1
    if workers == 1 or n_records < workers * 2:
        return run(0, n_records, processed_before, states[0])

    # Shard records contiguously; each worker gets an exact token offset for
    # its learning-rate schedule. Vector updates race by design.
    bounds = np.linspace(0, n_records, workers + 1).astype(np.int64)
    results = [0] * workers
    threads = []
    for w in range(workers):
        lo, hi = int(bounds[w]), int(bounds[w + 1])
        before = processed_before + int(offsets[lo])

        def task(w=w, lo=lo, hi=hi, before=before):
            results[w] = run(lo, hi, before, states[w])

        thread = threading.Thread(target=task)
        threads.append(thread)
        thread.start()
    for thread in threads:
        thread.join()
    return sum(results)
