"""Character n-gram primitives shared by the embedding and induction stages.

Tokens are wrapped in boundary markers ``<`` and ``>`` before extraction, so
the n-grams of short words stay distinctive ("mat" yields "<ma", "mat", "at>",
... "<mat>").  The same wrapped n-gram inventory backs both the subword
vectors and the Jaccard overlap, which keeps the two similarity signals
consistent with each other.
"""

from __future__ import annotations

BOW = "<"
EOW = ">"

_FNV_OFFSET = 2166136261
_FNV_PRIME = 16777619
_U32 = 0xFFFFFFFF


def extract_ngrams(token: str, min_n: int, max_n: int) -> list[str]:
    """All contiguous n-grams of the boundary-wrapped token, duplicates kept.

    Ordered by n-gram length, then position. A token too short to contain
    any n-gram in the range yields an empty list.
    """
    if min_n < 1 or min_n > max_n:
        raise ValueError(f"invalid n-gram range {min_n}..{max_n}")
    wrapped = BOW + token + EOW
    length = len(wrapped)
    grams: list[str] = []
    for n in range(min_n, min(max_n, length) + 1):
        for start in range(length - n + 1):
            grams.append(wrapped[start : start + n])
    return grams


def ngram_set(token: str, min_n: int, max_n: int) -> frozenset[str]:
    """Set view of :func:`extract_ngrams`."""
    return frozenset(extract_ngrams(token, min_n, max_n))


def fnv1a_32(data: bytes) -> int:
    """32-bit FNV-1a hash, stable across runs and platforms."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U32
    return h


def hash_ngram(ngram: str, bucket_count: int) -> int:
    """Bucket index of an n-gram: FNV-1a over its UTF-8 bytes, mod buckets."""
    if bucket_count < 1:
        raise ValueError("bucket_count must be >= 1")
    return fnv1a_32(ngram.encode("utf-8")) % bucket_count


def jaccard(w: str, v: str, min_n: int, max_n: int) -> float:
    """Jaccard overlap of the two tokens' n-gram sets; 0.0 on an empty union."""
    gw = ngram_set(w, min_n, max_n)
    gv = ngram_set(v, min_n, max_n)
    union = len(gw | gv)
    if union == 0:
        return 0.0
    return len(gw & gv) / union
