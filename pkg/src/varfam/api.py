"""HTTP service for inspecting induced families and recording annotations.

Families load once and stay immutable for the life of the process.
Annotations go to an append-only JSONL log; reloading the log replays it
with last-write-wins per family, so the store survives restarts exactly.
Writes are serialized through a single lock and acknowledged only after a
durable append (flush + fsync).
"""

from __future__ import annotations

import csv
import json
import logging
import os
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from io import StringIO
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .artifacts import read_families_jsonl
from .scoring import ScoredFamily

logger = logging.getLogger("varfam.api")

CATEGORIES = (
    "Orthographic",
    "Morphological",
    "Lexical",
    "Collocation",
    "Tokenisation",
    "Regional",
    "Other",
)
MAX_CATEGORIES = 3

_SORT_KEYS = ("cohesion", "size", "mean_cosine", "family_id")


class AnnotationError(Exception):
    """Validation failure; the message names the violation."""


@dataclass(slots=True)
class FamilyAnnotation:
    family_id: str
    categories: list[str]
    note: str = ""
    annotator: str = ""
    timestamp: str = ""


def validate_annotation(ann: FamilyAnnotation) -> None:
    if not ann.categories:
        raise AnnotationError("categories must contain at least 1 entry")
    if len(ann.categories) > MAX_CATEGORIES:
        raise AnnotationError(
            f"categories must contain at most {MAX_CATEGORIES} entries, got {len(ann.categories)}"
        )
    if len(set(ann.categories)) != len(ann.categories):
        raise AnnotationError("categories must be distinct")
    for category in ann.categories:
        if category not in CATEGORIES:
            raise AnnotationError(
                f"unknown category {category!r}; valid categories are {', '.join(CATEGORIES)}"
            )


class AnnotationStore:
    """Append-only JSONL annotation log with last-write-wins semantics."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._current: dict[str, FamilyAnnotation] = {}
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with self.path.open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    ann = FamilyAnnotation(
                        family_id=obj["family_id"],
                        categories=list(obj["categories"]),
                        note=obj.get("note", ""),
                        annotator=obj.get("annotator", ""),
                        timestamp=obj.get("timestamp", ""),
                    )
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise AnnotationError(
                        f"malformed annotation log line {lineno} in {self.path}: {exc}"
                    ) from exc
                self._current[ann.family_id] = ann

    def put(self, ann: FamilyAnnotation) -> FamilyAnnotation:
        validate_annotation(ann)
        if not ann.timestamp:
            ann.timestamp = datetime.now(timezone.utc).isoformat()
        line = json.dumps(asdict(ann), ensure_ascii=False)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            self._current[ann.family_id] = ann
        return ann

    def get(self, family_id: str) -> FamilyAnnotation | None:
        return self._current.get(family_id)

    def all(self) -> dict[str, FamilyAnnotation]:
        return dict(self._current)

    def category_counts(self) -> dict[str, int]:
        """Multi-label counts: a k-category annotation adds 1 to each."""
        counts = {category: 0 for category in CATEGORIES}
        for ann in self._current.values():
            for category in ann.categories:
                counts[category] += 1
        return counts

    def export_jsonl(self) -> str:
        lines = [
            json.dumps(asdict(self._current[fid]), ensure_ascii=False)
            for fid in sorted(self._current)
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def export_csv(self) -> str:
        buffer = StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["family_id", "categories", "note", "annotator", "timestamp"])
        for fid in sorted(self._current):
            ann = self._current[fid]
            writer.writerow(
                [ann.family_id, "|".join(ann.categories), ann.note, ann.annotator, ann.timestamp]
            )
        return buffer.getvalue()


class AnnotationPayload(BaseModel):
    categories: list[str]
    note: str = ""
    annotator: str = ""


def _family_summary(family: ScoredFamily, annotation: FamilyAnnotation | None) -> dict:
    return {
        "family_id": family.family_id,
        "mode": family.mode,
        "size": family.size,
        "members": family.members,
        "mean_cosine": family.score.mean_cosine,
        "mean_jaccard": family.score.mean_jaccard,
        "cohesion": family.score.cohesion,
        "annotated": annotation is not None,
        "categories": annotation.categories if annotation else [],
    }


def _family_detail(family: ScoredFamily, annotation: FamilyAnnotation | None) -> dict:
    if family.dimension_stats is None:
        dimension_stats = None
    else:
        dimension_stats = {
            token: {
                "coverage": stats.coverage,
                "top_dimension": stats.top_dimension,
                "top_share": stats.top_share,
                "total_frequency": stats.total_frequency,
            }
            for token, stats in family.dimension_stats.items()
        }
    return {
        "family_id": family.family_id,
        "mode": family.mode,
        "seed": family.seed,
        "members": family.members,
        "frequencies": family.frequencies,
        "dimension_stats": dimension_stats,
        "pairs": [
            {
                "w": p.w,
                "v": p.v,
                "cosine": p.cosine,
                "jaccard": p.jaccard,
                "is_edge": p.is_edge,
            }
            for p in family.pairs
        ],
        "score": {
            "size": family.score.size,
            "mean_cosine": family.score.mean_cosine,
            "mean_jaccard": family.score.mean_jaccard,
            "cohesion": family.score.cohesion,
        },
        "annotation": asdict(annotation) if annotation else None,
    }


def create_app(
    families: list[ScoredFamily],
    store: AnnotationStore,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="varfam annotation service")
    by_id = {family.family_id: family for family in families}

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "families": len(by_id), "annotations": len(store.all())}

    @app.get("/families")
    def list_families(
        page: int = Query(1, ge=1),
        page_size: int = Query(50, ge=1, le=500),
        sort: str = "cohesion",
        order: str = "desc",
        filter: str = "all",
        category: str | None = None,
    ) -> dict:
        if sort not in _SORT_KEYS:
            raise HTTPException(400, f"unknown sort key {sort!r}; use one of {_SORT_KEYS}")
        if order not in ("asc", "desc"):
            raise HTTPException(400, f"order must be 'asc' or 'desc', got {order!r}")
        if filter not in ("all", "annotated", "unannotated"):
            raise HTTPException(400, f"filter must be all|annotated|unannotated, got {filter!r}")
        if category is not None and category not in CATEGORIES:
            raise HTTPException(400, f"unknown category {category!r}")

        def key_value(family: ScoredFamily):
            if sort == "size":
                return family.size
            if sort == "mean_cosine":
                return family.score.mean_cosine
            if sort == "cohesion":
                return family.score.cohesion
            return family.family_id

        selected = []
        for family in by_id.values():
            annotation = store.get(family.family_id)
            if filter == "annotated" and annotation is None:
                continue
            if filter == "unannotated" and annotation is not None:
                continue
            if category is not None and (
                annotation is None or category not in annotation.categories
            ):
                continue
            selected.append(family)
        if sort == "family_id":
            selected.sort(key=lambda f: f.family_id, reverse=(order == "desc"))
        else:
            selected.sort(key=lambda f: f.family_id)
            selected.sort(key=key_value, reverse=(order == "desc"))

        total = len(selected)
        annotated_total = sum(1 for f in by_id.values() if store.get(f.family_id))
        start = (page - 1) * page_size
        items = [
            _family_summary(family, store.get(family.family_id))
            for family in selected[start : start + page_size]
        ]
        return {
            "items": items,
            "page": page,
            "page_size": page_size,
            "total": total,
            "families_total": len(by_id),
            "annotated_total": annotated_total,
        }

    @app.get("/families/{family_id}")
    def get_family(family_id: str) -> dict:
        family = by_id.get(family_id)
        if family is None:
            raise HTTPException(404, f"unknown family {family_id!r}")
        return _family_detail(family, store.get(family_id))

    @app.put("/families/{family_id}/annotation")
    def put_annotation(family_id: str, payload: AnnotationPayload) -> dict:
        if family_id not in by_id:
            raise HTTPException(404, f"unknown family {family_id!r}")
        ann = FamilyAnnotation(
            family_id=family_id,
            categories=list(payload.categories),
            note=payload.note,
            annotator=payload.annotator,
        )
        try:
            stored = store.put(ann)
        except AnnotationError as exc:
            raise HTTPException(400, str(exc)) from exc
        return asdict(stored)

    @app.get("/summary/categories")
    def summary_categories() -> dict:
        return store.category_counts()

    @app.get("/export")
    def export(format: str = "jsonl"):
        if format == "jsonl":
            return PlainTextResponse(
                store.export_jsonl(), media_type="application/x-ndjson"
            )
        if format == "csv":
            return PlainTextResponse(store.export_csv(), media_type="text/csv")
        raise HTTPException(400, f"format must be 'csv' or 'jsonl', got {format!r}")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def load_families(path: str | Path) -> list[ScoredFamily]:
    """Families for serving; malformed lines are fatal with a line number."""
    return read_families_jsonl(path)
