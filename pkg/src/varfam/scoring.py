"""Family scoring, pruning, and per-variant dimension aggregation.

The filter pipeline runs in a fixed order: (1) members below the per-variant
dimension-coverage floor are removed, (2) the family is re-checked against
the minimum size, (3) the within-family frequency ratio is bounded, and
(4) the family is scored. Scoring is side-effect-free, so steps (3) and (4)
commute. Pruned families are kept with reason codes for the audit trail;
they are excluded from primary outputs only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .induction import RawFamily, VariantPair
from .ingest import TokenStats

logger = logging.getLogger("varfam.scoring")

PRUNE_MIN_SIZE = "min_size"
PRUNE_FREQ_RATIO = "freq_ratio"


@dataclass
class ScoringConfig:
    snn_min: int = 2
    min_users: int = 3
    max_freq_ratio: float = 25.0


@dataclass(slots=True)
class FamilyScore:
    size: int
    mean_cosine: float
    mean_jaccard: float
    cohesion: float


@dataclass(slots=True)
class VariantDimensionStats:
    variant: str
    coverage: int
    top_dimension: str
    top_share: float
    total_frequency: int


@dataclass
class ScoredFamily:
    """A raw family with frequencies, dimension stats, score, and verdict.

    ``family_id`` stays the id assigned at induction time even when members
    are later removed, so audit rows remain traceable to the induced family.
    """

    family_id: str
    mode: str
    seed: str | None
    members: list[str]
    pairs: list[VariantPair]
    frequencies: dict[str, int]
    dimension_stats: dict[str, VariantDimensionStats] | None
    score: FamilyScore
    removed_members: list[str] = field(default_factory=list)
    pruned: bool = False
    prune_reasons: list[str] = field(default_factory=list)
    freq_ratio: float | None = None

    @property
    def size(self) -> int:
        return len(self.members)


def harmonic_mean(a: float, b: float) -> float:
    """2ab/(a+b), defined as 0 when a + b == 0."""
    if a + b == 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


def score_family(members: list[str], pairs: list[VariantPair]) -> FamilyScore:
    """Size plus means of cosine and Jaccard over all unordered member pairs,
    and their harmonic mean as cohesion.

    A family with no scored pairs (fewer than two members after filtering)
    scores zero; it only appears in the audit trail.
    """
    if not pairs:
        return FamilyScore(size=len(members), mean_cosine=0.0, mean_jaccard=0.0, cohesion=0.0)
    mean_cos = sum(p.cosine for p in pairs) / len(pairs)
    mean_jac = sum(p.jaccard for p in pairs) / len(pairs)
    return FamilyScore(
        size=len(members),
        mean_cosine=mean_cos,
        mean_jaccard=mean_jac,
        cohesion=harmonic_mean(mean_cos, mean_jac),
    )


def prune_by_frequency_ratio(
    frequencies: dict[str, int], max_freq_ratio: float
) -> tuple[bool, float]:
    """Verdict on the within-family max/min corpus-frequency ratio.

    Returns (pruned, ratio); pruned iff the ratio strictly exceeds the bound.
    """
    values = list(frequencies.values())
    if not values:
        return False, 0.0
    ratio = max(values) / min(values)
    return ratio > max_freq_ratio, ratio


def prune_by_min_size(members: list[str], snn_min: int) -> bool:
    """Pruned iff the family has fewer than ``snn_min`` members."""
    return len(members) < snn_min


def variant_dimension_stats(token: str, stats: TokenStats) -> VariantDimensionStats:
    """Coverage, top dimension, and the top dimension's share of the
    variant's total frequency. Ties go to the lexicographically smallest
    dimension label."""
    counts = stats.dimension_counts
    total = stats.corpus_frequency
    if not counts:
        return VariantDimensionStats(token, 0, "", 0.0, total)
    top_dimension = min(counts, key=lambda d: (-counts[d], d))
    top_count = counts[top_dimension]
    return VariantDimensionStats(
        variant=token,
        coverage=len(counts),
        top_dimension=top_dimension,
        top_share=top_count / total if total else 0.0,
        total_frequency=total,
    )


def aggregate_dimensions(
    members: list[str],
    stats: dict[str, TokenStats],
    min_users: int,
    dimension_configured: bool,
) -> tuple[dict[str, VariantDimensionStats] | None, list[str]]:
    """Per-member dimension stats plus the members falling below the
    coverage floor.

    Without a configured dimension this is a no-op: stats come back as None
    (flagged absent) and nothing is removed.
    """
    if not dimension_configured:
        return None, []
    dim_stats = {m: variant_dimension_stats(m, stats[m]) for m in members}
    removed = [m for m in members if dim_stats[m].coverage < min_users]
    return dim_stats, removed


def score_and_prune(
    families: list[RawFamily],
    stats: dict[str, TokenStats],
    config: ScoringConfig,
    dimension_configured: bool,
) -> list[ScoredFamily]:
    """Run the full filter pipeline over raw families, preserving order."""
    scored: list[ScoredFamily] = []
    for family in families:
        dim_stats, removed = aggregate_dimensions(
            family.members, stats, config.min_users, dimension_configured
        )
        removed_set = set(removed)
        surviving = [m for m in family.members if m not in removed_set]
        pairs = [
            p for p in family.pairs if p.w not in removed_set and p.v not in removed_set
        ]
        reasons: list[str] = []
        if prune_by_min_size(surviving, config.snn_min):
            reasons.append(PRUNE_MIN_SIZE)
        frequencies = {m: stats[m].corpus_frequency for m in (surviving or family.members)}
        ratio_pruned, ratio = prune_by_frequency_ratio(frequencies, config.max_freq_ratio)
        if ratio_pruned:
            reasons.append(PRUNE_FREQ_RATIO)
        surviving_dim_stats = (
            {m: dim_stats[m] for m in surviving} if dim_stats is not None else None
        )
        scored.append(
            ScoredFamily(
                family_id=family.family_id,
                mode=family.mode,
                seed=family.seed,
                members=surviving,
                pairs=pairs,
                frequencies={m: stats[m].corpus_frequency for m in surviving},
                dimension_stats=surviving_dim_stats,
                score=score_family(surviving, pairs),
                removed_members=removed,
                pruned=bool(reasons),
                prune_reasons=reasons,
                freq_ratio=ratio if frequencies else None,
            )
        )
    kept = sum(1 for f in scored if not f.pruned)
    logger.info("scored %d families; %d kept, %d pruned", len(scored), kept, len(scored) - kept)
    return scored
