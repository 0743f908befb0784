"""Render summary figures and aggregate statistics for a families file.

Figures are written as PNGs next to (or into) the chosen output directory,
alongside an ``aggregates.csv`` with the corresponding numbers, so a run can
be eyeballed without loading the JSONL.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .api import CATEGORIES, AnnotationStore
from .artifacts import ArtifactError, atomic_write, read_families_jsonl
from .scoring import ScoredFamily

logger = logging.getLogger("varfam.report")


def _quantiles(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "min": float(arr.min()),
        "p25": float(np.percentile(arr, 25)),
        "median": float(np.percentile(arr, 50)),
        "p75": float(np.percentile(arr, 75)),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
    }


def write_report(
    families_path: str | Path,
    out_dir: str | Path,
    annotations_path: str | Path | None = None,
) -> list[Path]:
    """Render the figure set and aggregates CSV; returns the written paths."""
    families = read_families_jsonl(families_path)
    if not families:
        raise ArtifactError(f"no families in {families_path}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    sizes = [f.size for f in families]
    cohesions = [f.score.cohesion for f in families]
    mean_cos = [f.score.mean_cosine for f in families]
    mean_jac = [f.score.mean_jaccard for f in families]

    written.append(_size_histogram(sizes, out_dir / "family_sizes.png"))
    written.append(_cohesion_histogram(cohesions, out_dir / "cohesion.png"))
    written.append(
        _similarity_scatter(mean_cos, mean_jac, sizes, out_dir / "cosine_vs_jaccard.png")
    )
    if annotations_path is not None and Path(annotations_path).exists():
        store = AnnotationStore(annotations_path)
        written.append(_category_bars(store.category_counts(), out_dir / "categories.png"))

    aggregates = out_dir / "aggregates.csv"
    _write_aggregates(families, sizes, cohesions, mean_cos, mean_jac, aggregates)
    written.append(aggregates)
    logger.info("report: wrote %d files to %s", len(written), out_dir)
    return written


def _size_histogram(sizes: list[int], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    bins = np.arange(1.5, max(sizes) + 1.5)
    ax.hist(sizes, bins=bins, color="#4878a8", edgecolor="white")
    ax.set_xlabel("family size (members)")
    ax.set_ylabel("families")
    ax.set_title("Family size distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _cohesion_histogram(cohesions: list[float], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(cohesions, bins=30, range=(0.0, 1.0), color="#a85448", edgecolor="white")
    ax.set_xlabel("cohesion (harmonic mean of mean cosine and mean Jaccard)")
    ax.set_ylabel("families")
    ax.set_title("Cohesion distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _similarity_scatter(
    mean_cos: list[float], mean_jac: list[float], sizes: list[int], path: Path
) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 5))
    marker_sizes = 12 + 6 * (np.asarray(sizes) - min(sizes))
    ax.scatter(mean_cos, mean_jac, s=marker_sizes, alpha=0.5, color="#48785a")
    ax.set_xlabel("mean cosine")
    ax.set_ylabel("mean Jaccard")
    ax.set_title("Family similarity profile")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _category_bars(counts: dict[str, int], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.5, 4))
    values = [counts[c] for c in CATEGORIES]
    ax.bar(range(len(CATEGORIES)), values, color="#7a5aa8")
    ax.set_xticks(range(len(CATEGORIES)))
    ax.set_xticklabels(CATEGORIES, rotation=30, ha="right")
    ax.set_ylabel("families (multi-label)")
    ax.set_title("Annotation categories")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _write_aggregates(
    families: list[ScoredFamily],
    sizes: list[int],
    cohesions: list[float],
    mean_cos: list[float],
    mean_jac: list[float],
    path: Path,
) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["metric", "min", "p25", "median", "p75", "max", "mean"])
        for name, values in (
            ("size", sizes),
            ("cohesion", cohesions),
            ("mean_cosine", mean_cos),
            ("mean_jaccard", mean_jac),
        ):
            q = _quantiles([float(v) for v in values])
            writer.writerow(
                [name] + [f"{q[k]:.6f}" for k in ("min", "p25", "median", "p75", "max", "mean")]
            )
        writer.writerow(["families", len(families), "", "", "", "", ""])
