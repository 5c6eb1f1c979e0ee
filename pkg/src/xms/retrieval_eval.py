"""Cosine-similarity ranking and retrieval metrics (AP/MAP, acc@K, CMC).

Rankings sort the gallery by descending cosine similarity with deterministic
ties broken by ascending gallery index.  Relevance for MAP is same-subclass;
acc@K and the CMC curve judge the single instance-level true match.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset_io import FeatureMatrix
from .errors import ConfigError, DataError


class ZeroNormWarning(UserWarning):
    """A query or gallery vector had zero norm; its similarities default to -1."""


_zero_norm_count = 0


def zero_norm_count() -> int:
    """Total zero-norm vectors seen by rank_by_cosine since the last reset."""
    return _zero_norm_count


def reset_zero_norm_count() -> None:
    global _zero_norm_count
    _zero_norm_count = 0


@dataclass(frozen=True)
class RankedList:
    """Gallery permutation for one query, most similar first."""

    query_index: int
    gallery_order: np.ndarray
    similarities: np.ndarray


@dataclass(frozen=True)
class RetrievalEvaluation:
    """Aggregate metrics for one query direction ('a2b' queries the b gallery)."""

    direction: str
    map: float
    per_query_ap: np.ndarray
    acc_at_k: np.ndarray

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "map": self.map,
            "per_query_ap": self.per_query_ap.tolist(),
            "cmc": self.acc_at_k.tolist(),
        }


def cosine_similarities(queries: FeatureMatrix, gallery: FeatureMatrix) -> np.ndarray:
    """Query x gallery cosine similarity matrix; zero-norm vectors give -1."""
    global _zero_norm_count
    if queries.d != gallery.d:
        raise ConfigError("dim_mismatch", f"query dim {queries.d} != gallery dim {gallery.d}")
    qn = np.linalg.norm(queries.values, axis=0)
    gn = np.linalg.norm(gallery.values, axis=0)
    dead_q = qn == 0
    dead_g = gn == 0
    n_dead = int(dead_q.sum() + dead_g.sum())
    if n_dead:
        _zero_norm_count += n_dead
        warnings.warn(ZeroNormWarning(f"{n_dead} zero-norm vectors ranked last (similarity -1)"))
    sims = (queries.values / np.where(dead_q, 1.0, qn)).T @ (gallery.values / np.where(dead_g, 1.0, gn))
    sims[dead_q, :] = -1.0
    sims[:, dead_g] = -1.0
    return sims


def rank_by_cosine(queries: FeatureMatrix, gallery: FeatureMatrix) -> list[RankedList]:
    sims = cosine_similarities(queries, gallery)
    ranked = []
    for qi in range(sims.shape[0]):
        order = np.argsort(-sims[qi], kind="stable")  # ties fall back to gallery index
        ranked.append(RankedList(query_index=qi, gallery_order=order, similarities=sims[qi, order]))
    return ranked


def average_precision(ranked: RankedList, relevant) -> float:
    """Hits-based AP: mean over relevant items of (hits so far / rank)."""
    relevant = set(int(i) for i in np.asarray(list(relevant)).ravel())
    if not relevant:
        raise ConfigError("empty_relevant", "average precision is undefined for an empty relevant set")
    gallery = set(int(i) for i in ranked.gallery_order)
    if not relevant <= gallery:
        raise DataError("index_range", "relevant set contains indices outside the gallery")
    hits = 0
    total = 0.0
    for rank, item in enumerate(ranked.gallery_order, start=1):
        if int(item) in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def mean_average_precision(per_query_ap) -> float:
    per_query_ap = np.asarray(per_query_ap, dtype=np.float64)
    if per_query_ap.size == 0:
        raise ConfigError("empty_relevant", "no per-query AP values")
    return float(per_query_ap.mean())


def _match_ranks(ranked: list[RankedList], true_match) -> np.ndarray:
    ranks = np.empty(len(ranked), dtype=np.int64)
    for ranked_list in ranked:
        target = int(true_match[ranked_list.query_index])
        where = np.flatnonzero(ranked_list.gallery_order == target)
        if where.size == 0:
            raise DataError("missing_match", f"true match {target} of query {ranked_list.query_index} not in gallery")
        ranks[ranked_list.query_index] = where[0] + 1
    return ranks


def acc_at_k(ranked: list[RankedList], true_match, k: int) -> float:
    """Fraction of queries whose instance-level match appears in the top k."""
    if not ranked:
        raise ConfigError("empty_relevant", "no ranked lists")
    gallery_size = ranked[0].gallery_order.size
    if not 1 <= k <= gallery_size:
        raise ConfigError("bad_k", f"k must lie in 1..{gallery_size}, got {k}")
    return float((_match_ranks(ranked, true_match) <= k).mean())


def cmc_curve(ranked: list[RankedList], true_match) -> np.ndarray:
    """acc@K for every K = 1..gallery_size; non-decreasing, ends at 1."""
    if not ranked:
        raise ConfigError("empty_relevant", "no ranked lists")
    gallery_size = ranked[0].gallery_order.size
    ranks = _match_ranks(ranked, true_match)
    counts = np.bincount(ranks, minlength=gallery_size + 1)[1:]
    return np.cumsum(counts) / len(ranked)


def evaluate_direction(
    queries: FeatureMatrix,
    gallery: FeatureMatrix,
    query_labels,
    gallery_labels,
    direction: str,
    true_match=None,
    ap_cutoff: int | None = None,
) -> RetrievalEvaluation:
    """Rank one direction and compute MAP (same-subclass relevance) plus CMC.

    ``true_match`` maps query index to gallery index; identity when None
    (aligned pair subsets).  ``ap_cutoff`` optionally truncates the ranked
    lists before AP, for MAP@R-style evaluation.
    """
    query_labels = np.asarray(query_labels).ravel()
    gallery_labels = np.asarray(gallery_labels).ravel()
    ranked = rank_by_cosine(queries, gallery)
    aps = []
    for ranked_list in ranked:
        relevant = np.flatnonzero(gallery_labels == query_labels[ranked_list.query_index])
        use = ranked_list
        if ap_cutoff is not None:
            use = RankedList(
                ranked_list.query_index,
                ranked_list.gallery_order[:ap_cutoff],
                ranked_list.similarities[:ap_cutoff],
            )
            relevant = np.intersect1d(relevant, use.gallery_order)
            if relevant.size == 0:
                aps.append(0.0)
                continue
        aps.append(average_precision(use, relevant))
    per_query_ap = np.asarray(aps)
    if true_match is None:
        true_match = np.arange(len(ranked))
    return RetrievalEvaluation(
        direction=direction,
        map=float(per_query_ap.mean()),
        per_query_ap=per_query_ap,
        acc_at_k=cmc_curve(ranked, true_match),
    )
