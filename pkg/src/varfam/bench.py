"""Synthetic corpora with planted variant families, plus recovery metrics.

The generator plants families of orthographic variants (rule-derived from a
base lemma) inside shared context templates so that distributional similarity
between variants is learnable, gives each user a sticky variant preference,
and pads the corpus with Zipf-distributed distractors. All base tokens are
kept orthographically dissimilar across families so that recovered pairs can
be judged against the planted ground truth.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .artifacts import atomic_write
from .ngrams import jaccard

logger = logging.getLogger("varfam.bench")

_VOWELS = set("aeiouyäëéèêáàâóòôúùûíìîüö")

_ONSETS = [
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "w", "z",
    "br", "dr", "fr", "gr", "kl", "kn", "sch", "schl", "schm", "sp", "st",
]
_NUCLEI = ["a", "e", "i", "o", "u", "ä", "é", "ë", "ei", "éi", "ue", "au", "ou", "ie"]
_CODAS = ["", "n", "r", "t", "l", "m", "ng", "cht", "rt", "nn", "ss", "tz"]

# How close a freshly generated base token may be, in n-gram Jaccard, to any
# token already planted. Keeps cross-family pairs out of the ground truth's
# blind spot.
_SEPARATION = 0.15


class BenchmarkError(Exception):
    """Invalid generator spec or unusable evaluation input."""


@dataclass(frozen=True)
class PerturbationRule:
    """A grapheme rewrite with a position constraint."""

    name: str
    pattern: str
    replacement: str
    applicability: str  # anywhere | word_final | vowel_nucleus

    def apply(self, token: str) -> str | None:
        """The perturbed token, or None when the rule does not change it."""
        if self.applicability == "anywhere":
            if self.pattern not in token:
                return None
            result = token.replace(self.pattern, self.replacement)
        elif self.applicability == "word_final":
            if not token.endswith(self.pattern) or not self.pattern:
                return None
            result = token[: -len(self.pattern)] + self.replacement
        elif self.applicability == "vowel_nucleus":
            span = _first_vowel_run(token)
            if span is None:
                return None
            lo, hi = span
            pos = token.find(self.pattern, lo)
            if pos < lo or pos + len(self.pattern) > hi:
                return None
            result = token[:pos] + self.replacement + token[pos + len(self.pattern) :]
        else:
            raise BenchmarkError(f"unknown applicability {self.applicability!r}")
        return result if result != token else None


def _first_vowel_run(token: str) -> tuple[int, int] | None:
    i = 0
    n = len(token)
    while i < n and token[i] not in _VOWELS:
        i += 1
    if i == n:
        return None
    j = i
    while j < n and token[j] in _VOWELS:
        j += 1
    return i, j


DEFAULT_RULES: tuple[PerturbationRule, ...] = (
    PerturbationRule("umlaut-a-plain", "ä", "a", "anywhere"),
    PerturbationRule("umlaut-a-to-e", "ä", "e", "anywhere"),
    PerturbationRule("acute-ei-to-grave", "éi", "èi", "anywhere"),
    PerturbationRule("acute-e-plain", "é", "e", "anywhere"),
    PerturbationRule("e-to-schwa", "e", "ë", "vowel_nucleus"),
    PerturbationRule("ei-to-ai", "ei", "ai", "vowel_nucleus"),
    PerturbationRule("ue-to-ua", "ue", "ua", "vowel_nucleus"),
    PerturbationRule("ue-to-oa", "ue", "oa", "vowel_nucleus"),
    PerturbationRule("vowel-doubling", "a", "aa", "vowel_nucleus"),
    PerturbationRule("long-vowel-shorten", "aa", "a", "anywhere"),
    PerturbationRule("final-n-drop", "n", "", "word_final"),
    PerturbationRule("final-t-double", "t", "tt", "word_final"),
)


@dataclass
class PlantedFamily:
    """Ground truth: a lemma and the variants derived from it."""

    family_id: str
    lemma: str
    variants: list[str]
    context_template_ids: list[int] = field(default_factory=list)

    @property
    def members(self) -> list[str]:
        return [self.lemma] + self.variants


@dataclass
class GeneratorSpec:
    num_families: int = 20
    variants_min: int = 3
    variants_max: int = 5
    users: int = 200
    records: int = 50_000
    zipf_exponent: float = 1.1
    rng_seed: int = 13
    templates_per_family: int = 3
    context_tokens_per_family: int = 6
    global_fillers: int = 40
    distractor_vocab: int = 150
    distractor_record_rate: float = 0.12
    preference_strength: float = 0.85

    def validate(self) -> None:
        if self.variants_min < 2:
            raise BenchmarkError("variants_per_family must be >= 2 (got variants_min < 2)")
        if self.variants_max < self.variants_min:
            raise BenchmarkError("variants_max must be >= variants_min")
        if self.num_families < 1 or self.users < 1 or self.records < 1:
            raise BenchmarkError("num_families, users, and records must all be >= 1")
        if self.zipf_exponent <= 0:
            raise BenchmarkError("zipf_exponent must be > 0")
        if not 0.0 <= self.distractor_record_rate < 1.0:
            raise BenchmarkError("distractor_record_rate must be in [0, 1)")
        if not 0.0 <= self.preference_strength <= 1.0:
            raise BenchmarkError("preference_strength must be in [0, 1]")


@dataclass
class RecoveryMetrics:
    pair_precision: float
    pair_recall: float
    pair_f1: float
    family_exact_match_rate: float
    true_pairs: int
    predicted_pairs: int
    matched_pairs: int
    excluded_true_pairs: int
    eligible_families: int

    def as_dict(self) -> dict:
        return asdict(self)


class _TokenFactory:
    """Random pronounceable tokens kept dissimilar from planted tokens."""

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.protected: list[str] = []
        self.issued: set[str] = set()

    def protect(self, token: str) -> None:
        self.protected.append(token)

    def _candidate(self, syllables: int) -> str:
        parts = []
        for _ in range(syllables):
            parts.append(_ONSETS[self.rng.integers(len(_ONSETS))])
            parts.append(_NUCLEI[self.rng.integers(len(_NUCLEI))])
        parts.append(_CODAS[self.rng.integers(len(_CODAS))])
        return "".join(parts)

    def fresh(self, syllables: int, min_len: int = 4, guard: float = _SEPARATION) -> str:
        for _ in range(500):
            token = self._candidate(syllables)
            if len(token) < min_len or token in self.issued:
                continue
            if any(jaccard(token, other, 3, 7) >= guard for other in self.protected):
                continue
            self.issued.add(token)
            return token
        raise BenchmarkError("token factory exhausted; lower the separation guard")


def _derive_variants(
    lemma: str,
    count: int,
    rules: tuple[PerturbationRule, ...],
    rng: np.random.Generator,
) -> list[str]:
    """Distinct variants of the lemma via one or two rule applications."""
    candidates: list[str] = []
    seen = {lemma}
    order = list(rng.permutation(len(rules)))
    for idx in order:
        derived = rules[idx].apply(lemma)
        if derived is not None and derived not in seen and len(derived) >= 3:
            candidates.append(derived)
            seen.add(derived)
    # second-order derivations when single rules do not yield enough forms
    for idx in order:
        if len(candidates) >= count:
            break
        for base in list(candidates):
            derived = rules[idx].apply(base)
            if derived is not None and derived not in seen and len(derived) >= 3:
                candidates.append(derived)
                seen.add(derived)
                if len(candidates) >= count:
                    break
    return candidates[:count]


def plant_families(
    spec: GeneratorSpec,
    factory: _TokenFactory,
    rng: np.random.Generator,
    rules: tuple[PerturbationRule, ...] = DEFAULT_RULES,
) -> list[PlantedFamily]:
    families: list[PlantedFamily] = []
    for fam_index in range(spec.num_families):
        size = int(rng.integers(spec.variants_min, spec.variants_max + 1))
        for _ in range(200):
            lemma = factory.fresh(syllables=rng.integers(1, 3) + 1, min_len=4)
            variants = _derive_variants(lemma, size - 1, rules, rng)
            if len(variants) != size - 1:
                factory.issued.discard(lemma)
                continue
            clash = any(
                jaccard(v, other, 3, 7) >= _SEPARATION
                for v in variants
                for other in factory.protected
            )
            if clash:
                factory.issued.discard(lemma)
                continue
            for token in [lemma] + variants:
                factory.protect(token)
            families.append(
                PlantedFamily(f"fam_{fam_index:03d}", lemma, variants)
            )
            break
        else:
            raise BenchmarkError("could not plant a sufficiently distinct family")
    return families


def generate_corpus(
    spec: GeneratorSpec,
    corpus_path: str | Path,
    truth_path: str | Path,
    rules: tuple[PerturbationRule, ...] = DEFAULT_RULES,
) -> dict:
    """Write a JSONL corpus and its ground-truth family map; returns a summary.

    Fully deterministic for a fixed ``rng_seed``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    factory = _TokenFactory(rng)
    families = plant_families(spec, factory, rng, rules)

    fillers = [factory.fresh(syllables=1, min_len=3) for _ in range(spec.global_fillers)]
    contexts: list[list[str]] = []
    for _ in families:
        contexts.append(
            [factory.fresh(syllables=2, min_len=4) for _ in range(spec.context_tokens_per_family)]
        )
    distractors = [factory.fresh(syllables=2, min_len=4) for _ in range(spec.distractor_vocab)]

    templates: list[list[str]] = []  # SLOT marked as None
    for fam_index, family in enumerate(families):
        fam_ctx = contexts[fam_index]
        for _ in range(spec.templates_per_family):
            length = int(rng.integers(4, 8))
            slot_pos = int(rng.integers(length))
            template: list[str | None] = []
            for pos in range(length):
                if pos == slot_pos:
                    template.append(None)
                elif rng.random() < 0.7:
                    template.append(fam_ctx[rng.integers(len(fam_ctx))])
                else:
                    template.append(fillers[rng.integers(len(fillers))])
            family.context_template_ids.append(len(templates))
            templates.append(template)

    fam_probs = 1.0 / np.arange(1, spec.num_families + 1) ** spec.zipf_exponent
    fam_probs /= fam_probs.sum()
    distractor_probs = 1.0 / np.arange(1, len(distractors) + 1) ** spec.zipf_exponent
    distractor_probs /= distractor_probs.sum()

    # sticky per-(user, family) variant preference, sampled lazily
    preference: dict[tuple[int, int], int] = {}

    def family_variant_weights(n_members: int) -> np.ndarray:
        weights = 1.0 / np.arange(1, n_members + 1)
        return weights / weights.sum()

    def pick_variant(user: int, fam_index: int) -> str:
        members = families[fam_index].members
        weights = family_variant_weights(len(members))
        key = (user, fam_index)
        if key not in preference:
            preference[key] = int(rng.choice(len(members), p=weights))
        if rng.random() < spec.preference_strength:
            choice = preference[key]
        else:
            choice = int(rng.choice(len(members), p=weights))
        return members[choice]

    corpus_path = Path(corpus_path)
    truth_path = Path(truth_path)
    with atomic_write(corpus_path) as handle:
        for _ in range(spec.records):
            user = int(rng.integers(spec.users))
            if rng.random() < spec.distractor_record_rate:
                length = int(rng.integers(4, 9))
                tokens = []
                for _ in range(length):
                    if rng.random() < 0.5:
                        tokens.append(distractors[int(rng.choice(len(distractors), p=distractor_probs))])
                    else:
                        tokens.append(fillers[rng.integers(len(fillers))])
            else:
                fam_index = int(rng.choice(spec.num_families, p=fam_probs))
                family = families[fam_index]
                template = templates[
                    family.context_template_ids[rng.integers(len(family.context_template_ids))]
                ]
                tokens = [
                    part if part is not None else pick_variant(user, fam_index)
                    for part in template
                ]
                if rng.random() < 0.3:
                    tokens.append(fillers[rng.integers(len(fillers))])
            record = {"text": " ".join(tokens), "user_id": f"u{user}"}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    truth = {family.family_id: family.members for family in families}
    with atomic_write(truth_path) as handle:
        json.dump(truth, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")

    logger.info(
        "generated %d records, %d planted families -> %s", spec.records, len(families), corpus_path
    )
    return {
        "spec": asdict(spec),
        "families": len(families),
        "planted_tokens": sum(len(f.members) for f in families),
        "corpus": str(corpus_path),
        "truth": str(truth_path),
    }


def load_truth(path: str | Path) -> dict[str, list[str]]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BenchmarkError(f"cannot read ground truth {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise BenchmarkError("ground truth must map family id -> member list")
    return {str(k): [str(m) for m in v] for k, v in raw.items()}


def _unordered_pairs(members: list[str]) -> set[tuple[str, str]]:
    ordered = sorted(set(members))
    return {
        (ordered[i], ordered[j])
        for i in range(len(ordered))
        for j in range(i + 1, len(ordered))
    }


def evaluate_recovery(
    found: list[list[str]],
    truth: dict[str, list[str]],
    learnable: set[str],
) -> RecoveryMetrics:
    """Pairwise precision/recall/F1 over learnable tokens, plus the exact
    family match rate.

    A predicted pair is any unordered token pair co-occurring in a found
    family; a true pair is any pair within one planted family. True pairs
    touching a token outside ``learnable`` are excluded from the denominator
    and reported separately. A planted family counts as exactly matched when
    its learnable member subset (of size >= 2) appears verbatim among the
    found member sets.
    """
    if not found or not truth:
        raise BenchmarkError("evaluate_recovery requires non-empty found and truth sets")
    true_pairs: set[tuple[str, str]] = set()
    excluded = 0
    for members in truth.values():
        for a, b in _unordered_pairs(members):
            if a in learnable and b in learnable:
                true_pairs.add((a, b))
            else:
                excluded += 1
    predicted: set[tuple[str, str]] = set()
    for members in found:
        for a, b in _unordered_pairs(members):
            if a in learnable and b in learnable:
                predicted.add((a, b))
    matched = len(predicted & true_pairs)
    precision = matched / len(predicted) if predicted else 0.0
    recall = matched / len(true_pairs) if true_pairs else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0

    found_sets = {frozenset(members) for members in found}
    eligible = 0
    exact = 0
    for members in truth.values():
        learnable_members = frozenset(m for m in members if m in learnable)
        if len(learnable_members) < 2:
            continue
        eligible += 1
        if learnable_members in found_sets:
            exact += 1
    return RecoveryMetrics(
        pair_precision=precision,
        pair_recall=recall,
        pair_f1=f1,
        family_exact_match_rate=exact / eligible if eligible else 0.0,
        true_pairs=len(true_pairs),
        predicted_pairs=len(predicted),
        matched_pairs=matched,
        excluded_true_pairs=excluded,
        eligible_families=eligible,
    )


def random_pairing_baseline(
    n_pairs: int,
    learnable: set[str],
    truth: dict[str, list[str]],
    rng_seed: int = 0,
) -> RecoveryMetrics:
    """Uniformly random token pairs as a floor for the recovery metrics."""
    tokens = sorted(learnable)
    if len(tokens) < 2:
        raise BenchmarkError("need at least two learnable tokens")
    rng = np.random.default_rng(rng_seed)
    pairs: set[tuple[str, str]] = set()
    max_pairs = len(tokens) * (len(tokens) - 1) // 2
    target = min(n_pairs, max_pairs)
    while len(pairs) < target:
        i, j = rng.integers(len(tokens)), rng.integers(len(tokens))
        if i == j:
            continue
        a, b = tokens[min(i, j)], tokens[max(i, j)]
        pairs.add((a, b))
    true_pairs: set[tuple[str, str]] = set()
    for members in truth.values():
        for a, b in _unordered_pairs(members):
            if a in learnable and b in learnable:
                true_pairs.add((a, b))
    matched = len(pairs & true_pairs)
    precision = matched / len(pairs) if pairs else 0.0
    recall = matched / len(true_pairs) if true_pairs else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RecoveryMetrics(
        pair_precision=precision,
        pair_recall=recall,
        pair_f1=f1,
        family_exact_match_rate=0.0,
        true_pairs=len(true_pairs),
        predicted_pairs=len(pairs),
        matched_pairs=matched,
        excluded_true_pairs=0,
        eligible_families=0,
    )
