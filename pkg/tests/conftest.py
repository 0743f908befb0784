"""Shared fixtures: hand-built models, toy corpora, and a 3-family fixture."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from varfam.embeddings import EmbeddingConfig, EmbeddingModel
from varfam.induction import RawFamily, VariantPair, family_id_for
from varfam.scoring import ScoredFamily, score_family


def make_model(
    tokens: list[str],
    vectors: np.ndarray,
    min_n: int = 3,
    max_n: int = 7,
    bucket_count: int = 17,
    frequencies: np.ndarray | None = None,
) -> EmbeddingModel:
    """Model with prescribed word vectors and a zero n-gram matrix.

    With zero n-gram rows the composed vector is the word vector scaled by
    1/(1 + n_grams), which leaves every cosine unchanged, so tests can
    prescribe exact geometry.
    """
    vectors = np.asarray(vectors, dtype=np.float32)
    if frequencies is None:
        frequencies = np.full(len(tokens), 100, dtype=np.int64)
    config = EmbeddingConfig(
        vector_size=vectors.shape[1],
        min_count=1,
        min_n=min_n,
        max_n=max_n,
        bucket_count=bucket_count,
    )
    ngram_vectors = np.zeros((bucket_count, vectors.shape[1]), dtype=np.float32)
    return EmbeddingModel(tokens, frequencies, vectors, ngram_vectors, config)


def unit_circle_vectors(angles_deg: list[float]) -> np.ndarray:
    radians = np.deg2rad(angles_deg)
    return np.stack([np.cos(radians), np.sin(radians)], axis=1)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory) -> Path:
    """Small deterministic corpus with two embedded variant groups."""
    path = tmp_path_factory.mktemp("corpus") / "toy.jsonl"
    rng = np.random.default_rng(99)
    lines = []
    slots = [
        (["ech", "ginn", None, "heem"], ["muer", "muar", "moar"]),
        (["et", "ass", None, "kal"], ["zäit", "zait", "zeit"]),
        (["den", "mann", None, "gesinn"], ["laang", "lang"]),
    ]
    users = [f"u{i}" for i in range(12)]
    for i in range(1200):
        template, variants = slots[i % len(slots)]
        token = variants[rng.integers(len(variants))]
        text = " ".join(token if part is None else part for part in template)
        lines.append({"text": text, "user_id": users[rng.integers(len(users))]})
    for i in range(300):
        lines.append({"text": "den apel ass ganz rout", "user_id": users[i % len(users)]})
    with path.open("w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(json.dumps(line, ensure_ascii=False) + "\n")
    return path


TOY_CONFIG = dict(
    vector_size=48,
    window=5,
    min_count=5,
    epochs=20,
    min_n=3,
    max_n=7,
    bucket_count=20_000,
    rng_seed=11,
    subsample_threshold=0.0,
)


@pytest.fixture(scope="session")
def toy_model(toy_corpus) -> EmbeddingModel:
    from varfam.ingest import TokenizedCorpus
    from varfam.training import train

    corpus = TokenizedCorpus(toy_corpus)
    return train(corpus, EmbeddingConfig(**TOY_CONFIG))


def build_fixture_families() -> list[ScoredFamily]:
    """Three hand-constructed families used by the format golden tests.

    Includes the frequency-ratio fixture {6577, 604, 338} which must survive
    pruning at the default bound of 25 (ratio just under 19.5).
    """
    from varfam.scoring import VariantDimensionStats

    def fam(members, freqs, pair_scores, covs, mode="strict"):
        members = sorted(members)
        pairs = []
        for (w, v), (cos, jac, edge) in pair_scores.items():
            pairs.append(VariantPair(w, v, cos, jac, edge))
        dim_stats = {
            m: VariantDimensionStats(
                variant=m,
                coverage=covs[m][0],
                top_dimension=covs[m][1],
                top_share=covs[m][2],
                total_frequency=freqs[m],
            )
            for m in members
        }
        score = score_family(members, pairs)
        ratio = max(freqs.values()) / min(freqs.values())
        return ScoredFamily(
            family_id=family_id_for(members),
            mode=mode,
            seed=None,
            members=members,
            pairs=pairs,
            frequencies=dict(freqs),
            dimension_stats=dim_stats,
            score=score,
            freq_ratio=ratio,
        )

    muer = fam(
        ["muer", "muar", "moar"],
        {"muer": 6577, "muar": 604, "moar": 338},
        {
            ("muar", "muer"): (0.91, 0.4, True),
            ("moar", "muer"): (0.88, 0.35, True),
            ("moar", "muar"): (0.86, 0.45, True),
        },
        {"muer": (40, "u3", 0.2), "muar": (12, "u7", 0.5), "moar": (8, "u1", 0.6)},
    )
    mat = fam(
        ["mat", "matt", "maat"],
        {"mat": 5000, "matt": 400, "maat": 250},
        {
            ("maat", "mat"): (0.8, 0.4, True),
            ("mat", "matt"): (0.8, 0.4, True),
            ("maat", "matt"): (0.7, 0.3, False),
        },
        {"mat": (30, "u2", 0.25), "matt": (10, "u5", 0.4), "maat": (6, "u2", 0.5)},
    )
    skewed = fam(
        ["dajax", "dajix"],
        {"dajax": 2600, "dajix": 100},
        {("dajax", "dajix"): (0.75, 0.3, True)},
        {"dajax": (20, "u4", 0.3), "dajix": (4, "u9", 0.7)},
    )
    skewed.pruned = True
    skewed.prune_reasons = ["freq_ratio"]
    return [muer, mat, skewed]
