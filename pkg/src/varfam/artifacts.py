"""Run configuration and the two primary outputs: families JSONL and summary CSV.

Configuration is a flat JSON object. Keys for the induction/pruning
parameters are accepted both in their conventional capitalized spelling
(``SNN_MIN``, ``open_TOPN``) and in plain lowercase; unknown keys are fatal
and named in the error. All floating-point output is serialized with six
decimal places so golden files stay byte-stable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .embeddings import EmbeddingConfig
from .induction import InductionConfig, VariantPair
from .scoring import FamilyScore, ScoredFamily, ScoringConfig, VariantDimensionStats


class ConfigError(Exception):
    """Bad configuration file or value; message names the offending key."""


class ArtifactError(Exception):
    """Unreadable or malformed artifact file."""


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults filled in)."""

    # ingestion
    text_field: str = "text"
    dimension: str | None = "user_id"
    lowercase: bool = True
    # embedding training
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
    # induction
    mode: str = "strict"
    open_topn: int = 30
    open_th: float = 0.75
    strict_topn: int = 100
    strict_th: float = 0.73
    snn_min: int = 2
    degree_cap: int = 200
    min_len: int = 3
    jaccard_th: float = 0.2
    # scoring
    min_users: int = 3
    max_freq_ratio: float = 25.0
    # execution / io
    workers: int = 1
    corpus: str | None = None
    model: str | None = None
    out: str | None = None

    def validate(self) -> None:
        if self.mode not in ("open", "strict"):
            raise ConfigError(f"mode must be 'open' or 'strict', got {self.mode!r}")
        if not self.text_field:
            raise ConfigError("text_field must be non-empty")
        if self.max_freq_ratio <= 0:
            raise ConfigError("max_freq_ratio must be > 0")
        if self.min_users < 1:
            raise ConfigError("min_users must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.embedding_config().validate()
            self.induction_config().validate()
        except Exception as exc:
            raise ConfigError(str(exc)) from exc

    def embedding_config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            vector_size=self.vector_size,
            window=self.window,
            min_count=self.min_count,
            epochs=self.epochs,
            sg=self.sg,
            min_n=self.min_n,
            max_n=self.max_n,
            bucket_count=self.bucket_count,
            negative_samples=self.negative_samples,
            initial_learning_rate=self.initial_learning_rate,
            subsample_threshold=self.subsample_threshold,
            rng_seed=self.rng_seed,
        )

    def induction_config(self) -> InductionConfig:
        return InductionConfig(
            open_topn=self.open_topn,
            open_th=self.open_th,
            strict_topn=self.strict_topn,
            strict_th=self.strict_th,
            snn_min=self.snn_min,
            degree_cap=self.degree_cap,
            min_len=self.min_len,
            jaccard_th=self.jaccard_th,
        )

    def scoring_config(self) -> ScoringConfig:
        return ScoringConfig(
            snn_min=self.snn_min,
            min_users=self.min_users,
            max_freq_ratio=self.max_freq_ratio,
        )

    def echo(self) -> dict:
        """The fully resolved configuration, deterministically ordered."""
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def echo_hash(self) -> str:
        """Hash of the result-affecting configuration.

        Excludes the io path fields so the same semantic run hashes the same
        regardless of where its inputs and outputs live.
        """
        semantic = {k: v for k, v in self.echo().items() if k not in ("corpus", "model", "out")}
        blob = json.dumps(semantic, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# Capitalized spellings of the induction/pruning keys.
_KEY_ALIASES = {
    "open_TOPN": "open_topn",
    "open_TH": "open_th",
    "strict_TOPN": "strict_topn",
    "strict_TH": "strict_th",
    "SNN_MIN": "snn_min",
    "DEGREE_CAP": "degree_cap",
    "MIN_LEN": "min_len",
    "MIN_USERS": "min_users",
    "MAX_FREQ_RATIO": "max_freq_ratio",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {
    "vector_size", "window", "min_count", "epochs", "sg", "min_n", "max_n",
    "bucket_count", "negative_samples", "rng_seed", "open_topn", "strict_topn",
    "snn_min", "degree_cap", "min_len", "min_users", "workers",
}
_FLOAT_KEYS = {
    "initial_learning_rate", "subsample_threshold", "open_th", "strict_th",
    "jaccard_th", "max_freq_ratio",
}
_STR_KEYS = {"text_field", "mode", "corpus", "model", "out"}
_OPT_STR_KEYS = {"dimension", "corpus", "model", "out"}
_BOOL_KEYS = {"lowercase"}


def config_from_dict(raw: dict) -> RunConfig:
    """Resolve a raw mapping into a validated RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    resolved: dict = {}
    for key, value in raw.items():
        name = _KEY_ALIASES.get(key, key)
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key: {key!r}")
        if name in resolved:
            raise ConfigError(f"config key given twice (alias clash): {key!r}")
        resolved[name] = _coerce(key, name, value)
    config = RunConfig(**resolved)
    config.validate()
    return config


def _coerce(key: str, name: str, value):
    if name in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"config key {key!r} must be a boolean")
        return value
    if name in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config key {key!r} must be an integer")
        return value
    if name in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {key!r} must be a number")
        return float(value)
    if name in _OPT_STR_KEYS:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string or null")
        return value
    if name in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string")
        return value
    raise ConfigError(f"unknown config key: {key!r}")


def load_config(path: str | Path) -> RunConfig:
    """Load a JSON config file; missing keys take their defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


@contextmanager
def atomic_write(path: str | Path, mode: str = "w"):
    """Write to a temp file in the target directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp-")
    text = "b" not in mode
    try:
        with os.fdopen(
            fd, mode, encoding="utf-8" if text else None, newline="" if text else None
        ) as handle:
            yield handle
        os.chmod(tmp_name, 0o644)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _member_json(family: ScoredFamily, token: str) -> str:
    frequency = family.frequencies[token]
    stats = family.dimension_stats.get(token) if family.dimension_stats is not None else None
    if stats is None:
        coverage = "null"
        top_dimension = "null"
        top_share = "null"
    else:
        coverage = str(stats.coverage)
        top_dimension = _json_str(stats.top_dimension)
        top_share = _fmt(stats.top_share)
    return (
        "{"
        f'"token": {_json_str(token)}, "frequency": {frequency}, '
        f'"coverage": {coverage}, "top_dimension": {top_dimension}, '
        f'"top_share": {top_share}'
        "}"
    )


def _pair_json(pair: VariantPair) -> str:
    return (
        "{"
        f'"w": {_json_str(pair.w)}, "v": {_json_str(pair.v)}, '
        f'"cosine": {_fmt(pair.cosine)}, "jaccard": {_fmt(pair.jaccard)}, '
        f'"is_edge": {"true" if pair.is_edge else "false"}'
        "}"
    )


def family_json_line(family: ScoredFamily, config_echo: str) -> str:
    """One family as a single JSON line with a fixed key order and 6-decimal
    floats."""
    members = ", ".join(_member_json(family, token) for token in family.members)
    pairs = ", ".join(_pair_json(p) for p in sorted(family.pairs, key=lambda p: (p.w, p.v)))
    score = family.score
    parts = [
        f'"family_id": {_json_str(family.family_id)}',
        f'"mode": {_json_str(family.mode)}',
    ]
    if family.mode == "open":
        parts.append(f'"seed": {_json_str(family.seed) if family.seed else "null"}')
    parts.extend(
        [
            f'"members": [{members}]',
            f'"pairs": [{pairs}]',
            (
                '"score": {'
                f'"size": {score.size}, "mean_cosine": {_fmt(score.mean_cosine)}, '
                f'"mean_jaccard": {_fmt(score.mean_jaccard)}, "cohesion": {_fmt(score.cohesion)}'
                "}"
            ),
            f'"config_echo": {_json_str(config_echo)}',
        ]
    )
    return "{" + ", ".join(parts) + "}"


def _sort_key(family: ScoredFamily) -> tuple[str, str]:
    return (family.family_id, family.seed or "")


def write_families_jsonl(
    families: list[ScoredFamily], path: str | Path, config_echo: str
) -> int:
    """Write surviving families, one JSON object per line, sorted by id."""
    surviving = sorted((f for f in families if not f.pruned), key=_sort_key)
    with atomic_write(path) as handle:
        for family in surviving:
            handle.write(family_json_line(family, config_echo) + "\n")
    return len(surviving)


def write_summary_csv(families: list[ScoredFamily], path: str | Path) -> int:
    """Write the audit summary over ALL families, pruned ones included."""
    ordered = sorted(families, key=_sort_key)
    with atomic_write(path, "w") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            [
                "family_id", "size", "mean_cosine", "mean_jaccard", "cohesion",
                "members", "min_freq", "max_freq", "freq_ratio", "min_coverage",
                "top_dimension_mode", "pruned", "prune_reason",
            ]
        )
        for family in ordered:
            frequencies = list(family.frequencies.values())
            if family.dimension_stats:
                min_coverage = min(s.coverage for s in family.dimension_stats.values())
                top_dims = Counter(
                    s.top_dimension for s in family.dimension_stats.values() if s.top_dimension
                )
                top_mode = min(top_dims, key=lambda d: (-top_dims[d], d)) if top_dims else ""
            else:
                min_coverage = ""
                top_mode = ""
            writer.writerow(
                [
                    family.family_id,
                    family.size,
                    _fmt(family.score.mean_cosine),
                    _fmt(family.score.mean_jaccard),
                    _fmt(family.score.cohesion),
                    "|".join(family.members),
                    min(frequencies) if frequencies else "",
                    max(frequencies) if frequencies else "",
                    _fmt(family.freq_ratio) if family.freq_ratio is not None else "",
                    min_coverage,
                    top_mode,
                    "true" if family.pruned else "false",
                    ";".join(family.prune_reasons),
                ]
            )
    return len(ordered)


def read_families_jsonl(path: str | Path) -> list[ScoredFamily]:
    """Parse a families file back into ScoredFamily records.

    Raises ArtifactError naming the first malformed line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read families {path}: {exc}") from exc
    families: list[ScoredFamily] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            families.append(_family_from_obj(obj))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ArtifactError(f"malformed families line {lineno} in {path}: {exc}") from exc
    return families


def _family_from_obj(obj: dict) -> ScoredFamily:
    members = [m["token"] for m in obj["members"]]
    frequencies = {m["token"]: int(m["frequency"]) for m in obj["members"]}
    has_dims = any(m.get("coverage") is not None for m in obj["members"])
    dim_stats = None
    if has_dims:
        dim_stats = {
            m["token"]: VariantDimensionStats(
                variant=m["token"],
                coverage=int(m["coverage"]),
                top_dimension=m["top_dimension"] or "",
                top_share=float(m["top_share"]),
                total_frequency=int(m["frequency"]),
            )
            for m in obj["members"]
        }
    pairs = [
        VariantPair(
            w=p["w"], v=p["v"], cosine=float(p["cosine"]), jaccard=float(p["jaccard"]),
            is_edge=bool(p["is_edge"]),
        )
        for p in obj["pairs"]
    ]
    score = FamilyScore(
        size=int(obj["score"]["size"]),
        mean_cosine=float(obj["score"]["mean_cosine"]),
        mean_jaccard=float(obj["score"]["mean_jaccard"]),
        cohesion=float(obj["score"]["cohesion"]),
    )
    return ScoredFamily(
        family_id=obj["family_id"],
        mode=obj["mode"],
        seed=obj.get("seed"),
        members=members,
        pairs=pairs,
        frequencies=frequencies,
        dimension_stats=dim_stats,
        score=score,
    )


def write_run_metadata(path: str | Path, metadata: dict) -> None:
    with atomic_write(path) as handle:
        json.dump(metadata, handle, indent=2, ensure_ascii=False, sort_keys=True)
        handle.write("\n")
