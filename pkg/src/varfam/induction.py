"""Variant-family induction from cosine and n-gram Jaccard evidence.

Two modes: *open* emits a local star around every seed that attracts enough
admitted neighbors; *strict* builds an undirected graph from admitted pairs
(subject to a per-vertex degree cap) and emits its connected components.
A pair is admitted only when cosine similarity and character n-gram Jaccard
overlap both clear their thresholds.
"""

from __future__ import annotations

import hashlib
import logging
from collections import defaultdict
from dataclasses import dataclass

from .embeddings import EmbeddingModel
from .ingest import TokenStats
from .ngrams import jaccard, ngram_set

logger = logging.getLogger("varfam.induction")


class InductionError(Exception):
    """Fatal induction problem (empty candidate lexicon, bad parameters)."""


@dataclass
class InductionConfig:
    open_topn: int = 30
    open_th: float = 0.75
    strict_topn: int = 100
    strict_th: float = 0.73
    snn_min: int = 2
    degree_cap: int = 200
    min_len: int = 3
    jaccard_th: float = 0.2

    def validate(self) -> None:
        for name in ("open_th", "strict_th", "jaccard_th"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InductionError(f"{name} must be in [0, 1], got {value}")
        if self.snn_min < 2:
            raise InductionError("snn_min must be >= 2")
        if self.degree_cap < 1:
            raise InductionError("degree_cap must be >= 1")
        if self.min_len < 1:
            raise InductionError("min_len must be >= 1")
        if self.open_topn < 1 or self.strict_topn < 1:
            raise InductionError("neighbor counts must be >= 1")


@dataclass(slots=True)
class VariantPair:
    """A scored token pair, canonically ordered w < v."""

    w: str
    v: str
    cosine: float
    jaccard: float
    is_edge: bool = False

    def __post_init__(self) -> None:
        if self.w >= self.v:
            raise InductionError(f"pair not canonical: {self.w!r} >= {self.v!r}")


@dataclass
class RawFamily:
    family_id: str
    members: list[str]
    pairs: list[VariantPair]
    mode: str
    seed: str | None = None


def family_id_for(members: list[str]) -> str:
    """Stable id: truncated SHA-256 over the sorted member list.

    Tokens never contain whitespace, so a newline join is collision-free.
    """
    joined = "\n".join(sorted(members))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def candidate_lexicon(
    stats: dict[str, TokenStats],
    model: EmbeddingModel,
    min_count: int,
    min_len: int,
) -> list[str]:
    """Sorted tokens eligible as family members: frequent, long enough, and
    in the embedding vocabulary."""
    lexicon = sorted(
        token
        for token, entry in stats.items()
        if entry.corpus_frequency >= min_count and len(token) >= min_len and token in model
    )
    if not lexicon:
        raise InductionError(
            f"empty candidate lexicon (min_count={min_count}, min_len={min_len})"
        )
    return lexicon


def admit_pair(
    model: EmbeddingModel,
    w: str,
    v: str,
    cosine_th: float,
    jaccard_th: float,
) -> VariantPair | None:
    """Admit (w, v) iff cosine >= cosine_th and Jaccard >= jaccard_th.

    Thresholds are inclusive; the n-gram range comes from the model config.
    """
    if w == v:
        raise InductionError("admit_pair requires distinct tokens")
    cos = model.cosine(w, v)
    if cos < cosine_th:
        return None
    jac = jaccard(w, v, model.config.min_n, model.config.max_n)
    if jac < jaccard_th:
        return None
    a, b = (w, v) if w < v else (v, w)
    return VariantPair(a, b, cos, jac, is_edge=True)


class _JaccardCache:
    """Per-run cache of token n-gram sets."""

    def __init__(self, min_n: int, max_n: int) -> None:
        self.min_n = min_n
        self.max_n = max_n
        self._sets: dict[str, frozenset[str]] = {}

    def grams(self, token: str) -> frozenset[str]:
        cached = self._sets.get(token)
        if cached is None:
            cached = ngram_set(token, self.min_n, self.max_n)
            self._sets[token] = cached
        return cached

    def jaccard(self, w: str, v: str) -> float:
        gw = self.grams(w)
        gv = self.grams(v)
        union = len(gw | gv)
        if union == 0:
            return 0.0
        return len(gw & gv) / union


def _admitted_neighbor_lists(
    model: EmbeddingModel,
    lexicon: list[str],
    topn: int,
    cosine_th: float,
    jaccard_th: float,
    cache: _JaccardCache,
) -> dict[str, list[tuple[str, float, float]]]:
    """Per-seed admitted neighbors as (token, cosine, jaccard), kept in the
    retrieval order (descending cosine, then token)."""
    lexicon_set = set(lexicon)
    neighbor_lists = model.top_neighbors_many(lexicon, topn)
    admitted: dict[str, list[tuple[str, float, float]]] = {}
    for seed, neighbors in zip(lexicon, neighbor_lists):
        entries: list[tuple[str, float, float]] = []
        for token, cos in neighbors:
            if cos < cosine_th:
                break  # neighbors are sorted by descending cosine
            if token not in lexicon_set:
                continue
            jac = cache.jaccard(seed, token)
            if jac < jaccard_th:
                continue
            entries.append((token, cos, jac))
        admitted[seed] = entries
    return admitted


def _score_member_pairs(
    model: EmbeddingModel,
    members: list[str],
    cosine_th: float,
    jaccard_th: float,
    cache: _JaccardCache,
) -> list[VariantPair]:
    """Post-hoc scores for ALL unordered member pairs, kept for inspection.

    ``is_edge`` records whether the pair clears both thresholds; pairs that
    fail are retained as non-edges.
    """
    sims = model.pairwise_cosines(members)
    pairs: list[VariantPair] = []
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            w, v = members[i], members[j]
            cos = float(sims[i, j])
            jac = cache.jaccard(w, v)
            pairs.append(
                VariantPair(w, v, cos, jac, is_edge=cos >= cosine_th and jac >= jaccard_th)
            )
    return pairs


def induce_open(
    model: EmbeddingModel, lexicon: list[str], config: InductionConfig
) -> list[RawFamily]:
    """One star family per seed that admits enough neighbors.

    Stars are not merged or deduplicated across seeds; output follows seed
    order.
    """
    config.validate()
    if not lexicon:
        raise InductionError("empty candidate lexicon")
    cache = _JaccardCache(model.config.min_n, model.config.max_n)
    admitted = _admitted_neighbor_lists(
        model, lexicon, config.open_topn, config.open_th, config.jaccard_th, cache
    )
    families: list[RawFamily] = []
    for seed in lexicon:
        members = {seed}
        for token, _cos, _jac in admitted[seed]:
            if token != seed:
                members.add(token)
        if len(members) < config.snn_min:
            continue
        ordered = sorted(members)
        pairs = _score_member_pairs(model, ordered, config.open_th, config.jaccard_th, cache)
        families.append(
            RawFamily(family_id_for(ordered), ordered, pairs, mode="open", seed=seed)
        )
    logger.info("open mode: %d star families from %d seeds", len(families), len(lexicon))
    return families


def induce_strict(
    model: EmbeddingModel, lexicon: list[str], config: InductionConfig
) -> list[RawFamily]:
    """Connected components of the degree-capped admitted-pair graph.

    Edge installation is deterministic: seeds in sorted order, each seed's
    proposals in descending cosine (ties by token); an edge is installed only
    while both endpoints sit below the degree cap.
    """
    config.validate()
    if not lexicon:
        raise InductionError("empty candidate lexicon")
    cache = _JaccardCache(model.config.min_n, model.config.max_n)
    admitted = _admitted_neighbor_lists(
        model, lexicon, config.strict_topn, config.strict_th, config.jaccard_th, cache
    )
    degree: dict[str, int] = defaultdict(int)
    adjacency: dict[str, set[str]] = defaultdict(set)
    installed: set[tuple[str, str]] = set()
    for seed in lexicon:
        for token, _cos, _jac in admitted[seed]:
            key = (seed, token) if seed < token else (token, seed)
            if key in installed:
                continue
            if degree[seed] >= config.degree_cap or degree[token] >= config.degree_cap:
                continue
            installed.add(key)
            adjacency[seed].add(token)
            adjacency[token].add(seed)
            degree[seed] += 1
            degree[token] += 1
    families: list[RawFamily] = []
    visited: set[str] = set()
    for seed in lexicon:
        if seed in visited or seed not in adjacency:
            continue
        component = _bfs_component(seed, adjacency)
        visited |= component
        if len(component) < config.snn_min:
            continue
        ordered = sorted(component)
        pairs = _score_member_pairs(model, ordered, config.strict_th, config.jaccard_th, cache)
        families.append(RawFamily(family_id_for(ordered), ordered, pairs, mode="strict"))
    families.sort(key=lambda f: f.family_id)
    logger.info(
        "strict mode: %d component families over %d installed edges", len(families), len(installed)
    )
    return families


def _bfs_component(start: str, adjacency: dict[str, set[str]]) -> set[str]:
    component = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for other in adjacency[node]:
            if other not in component:
                component.add(other)
                frontier.append(other)
    return component


def admitted_edge_set(
    model: EmbeddingModel,
    lexicon: list[str],
    topn: int,
    cosine_th: float,
    jaccard_th: float,
) -> set[tuple[str, str]]:
    """All admitted pairs proposed by any seed, before the degree cap.

    Useful for threshold-monotonicity checks: raising the cosine threshold
    can only shrink this set.
    """
    cache = _JaccardCache(model.config.min_n, model.config.max_n)
    admitted = _admitted_neighbor_lists(model, lexicon, topn, cosine_th, jaccard_th, cache)
    edges: set[tuple[str, str]] = set()
    for seed, entries in admitted.items():
        for token, _cos, _jac in entries:
            edges.add((seed, token) if seed < token else (token, seed))
    return edges
