import numpy as np
import pytest

from xms.dataset_io import FeatureMatrix
from xms.errors import ConfigError, DataError
from xms.retrieval_eval import (
    RankedList,
    ZeroNormWarning,
    acc_at_k,
    average_precision,
    cmc_curve,
    evaluate_direction,
    mean_average_precision,
    rank_by_cosine,
    reset_zero_norm_count,
    zero_norm_count,
)


def fm(values):
    return FeatureMatrix(np.asarray(values, dtype=float))


def brute_force_order(query, gallery):
    """Independent O(n^2) ranking: explicit cosine loop + stable sort by index."""
    sims = []
    for j in range(gallery.shape[1]):
        g = gallery[:, j]
        qn, gn = np.linalg.norm(query), np.linalg.norm(g)
        sims.append(float(query @ g / (qn * gn)) if qn > 0 and gn > 0 else -1.0)
    return sorted(range(len(sims)), key=lambda j: (-sims[j], j))


# ---------------------------------------------------------------------------
# ranking


def test_query_itself_ranked_first(rng):
    gallery = rng.standard_normal((4, 10))
    queries = gallery[:, [3]]
    ranked = rank_by_cosine(fm(queries), fm(gallery))
    assert ranked[0].gallery_order[0] == 3
    assert ranked[0].similarities[0] == pytest.approx(1.0)


def test_hand_geometry():
    queries = fm([[1.0], [0.0]])
    gallery = fm([[1.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    (ranked,) = rank_by_cosine(queries, gallery)
    assert ranked.gallery_order.tolist() == [0, 1, 2]
    np.testing.assert_allclose(ranked.similarities, [1.0, 0.0, -1.0], atol=1e-12)


def test_matches_brute_force_on_random_instances(rng):
    queries = rng.standard_normal((6, 10))
    gallery = rng.standard_normal((6, 50))
    ranked = rank_by_cosine(fm(queries), fm(gallery))
    for i, rl in enumerate(ranked):
        assert rl.gallery_order.tolist() == brute_force_order(queries[:, i], gallery)


def test_similarities_non_increasing(rng):
    ranked = rank_by_cosine(fm(rng.standard_normal((3, 5))), fm(rng.standard_normal((3, 20))))
    for rl in ranked:
        assert np.all(np.diff(rl.similarities) <= 1e-15)


def test_zero_norm_vectors_ranked_last_and_counted(rng):
    reset_zero_norm_count()
    gallery = np.ones((2, 4))
    gallery[:, 2] = 0.0
    with pytest.warns(ZeroNormWarning):
        (ranked,) = rank_by_cosine(fm([[1.0], [1.0]]), fm(gallery))
    assert ranked.gallery_order[-1] == 2
    assert ranked.similarities[-1] == -1.0
    assert zero_norm_count() == 1
    reset_zero_norm_count()


def test_scale_invariance_of_order(rng):
    queries = rng.standard_normal((4, 6))
    gallery = rng.standard_normal((4, 15))
    base = rank_by_cosine(fm(queries), fm(gallery))
    scaled = rank_by_cosine(fm(queries), fm(37.5 * gallery))
    for b, s in zip(base, scaled):
        assert np.array_equal(b.gallery_order, s.gallery_order)


# ---------------------------------------------------------------------------
# average precision


def ranked_from_pattern(pattern):
    order = np.arange(len(pattern))
    sims = np.linspace(1, 0, len(pattern))
    return RankedList(0, order, sims), {i for i, flag in enumerate(pattern) if flag}


def test_ap_all_relevant_on_top():
    ranked, relevant = ranked_from_pattern([1, 1, 1, 0, 0])
    assert average_precision(ranked, relevant) == 1.0


def test_ap_pattern_101():
    ranked, relevant = ranked_from_pattern([1, 0, 1])
    assert average_precision(ranked, relevant) == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)


def test_ap_single_relevant_last():
    for g in (3, 7, 20):
        ranked, relevant = ranked_from_pattern([0] * (g - 1) + [1])
        assert average_precision(ranked, relevant) == pytest.approx(1.0 / g)


def test_ap_empty_relevant_errors():
    ranked, _ = ranked_from_pattern([0, 0])
    with pytest.raises(ConfigError):
        average_precision(ranked, set())


def test_ap_range_and_extremes(rng):
    for _ in range(200):
        g = int(rng.integers(2, 20))
        pattern = rng.integers(0, 2, size=g)
        if pattern.sum() == 0:
            pattern[int(rng.integers(0, g))] = 1
        ranked, relevant = ranked_from_pattern(pattern.tolist())
        ap = average_precision(ranked, relevant)
        assert 0.0 <= ap <= 1.0
        sorted_pattern = sorted(pattern.tolist(), reverse=True)
        assert (ap == 1.0) == (pattern.tolist() == sorted_pattern)


def test_ap_brute_force_oracle(rng):
    # independent direct-formula evaluation over random relevance patterns
    for _ in range(200):
        g = int(rng.integers(2, 30))
        pattern = rng.integers(0, 2, size=g)
        if pattern.sum() == 0:
            pattern[0] = 1
        ranked, relevant = ranked_from_pattern(pattern.tolist())
        hits = 0
        acc = 0.0
        for rank, flag in enumerate(pattern, start=1):
            if flag:
                hits += 1
                acc += hits / rank
        assert average_precision(ranked, relevant) == pytest.approx(acc / hits, abs=1e-12)


def test_map_examples_and_oracle(rng):
    assert mean_average_precision([1.0, 1.0]) == 1.0
    assert mean_average_precision([1.0, 0.0]) == 0.5
    values = rng.uniform(0, 1, size=37)
    assert mean_average_precision(values) == pytest.approx(values.sum() / 37, abs=1e-12)


# ---------------------------------------------------------------------------
# acc@K and CMC


def ranked_lists_with_match_ranks(match_ranks, gallery_size):
    out = []
    for qi, rank in enumerate(match_ranks):
        order = [g for g in range(gallery_size) if g != qi]
        order.insert(rank - 1, qi)
        out.append(RankedList(qi, np.array(order), np.linspace(1, 0, gallery_size)))
    return out


def test_acc_at_k_examples():
    ranked = ranked_lists_with_match_ranks([1, 1, 1], 5)
    assert acc_at_k(ranked, np.arange(3), 1) == 1.0
    ranked = ranked_lists_with_match_ranks([3], 5)
    assert acc_at_k(ranked, np.arange(1), 1) == 0.0
    assert acc_at_k(ranked, np.arange(1), 2) == 0.0
    assert acc_at_k(ranked, np.arange(1), 3) == 1.0
    assert acc_at_k(ranked, np.arange(1), 5) == 1.0


def test_acc_at_k_missing_match_errors():
    ranked = ranked_lists_with_match_ranks([1], 4)
    with pytest.raises(DataError):
        acc_at_k(ranked, {0: 99}, 1)


def test_cmc_examples():
    ranked = ranked_lists_with_match_ranks([1, 2], 4)
    np.testing.assert_allclose(cmc_curve(ranked, np.arange(2)), [0.5, 1.0, 1.0, 1.0])


def test_cmc_identity_gallery(rng):
    x = rng.standard_normal((5, 8))
    ranked = rank_by_cosine(fm(x), fm(x))
    np.testing.assert_allclose(cmc_curve(ranked, np.arange(8)), np.ones(8))


def test_cmc_consistent_with_acc_at_k(rng):
    ranks = rng.integers(1, 13, size=9)
    ranked = ranked_lists_with_match_ranks(ranks.tolist(), 12)
    curve = cmc_curve(ranked, np.arange(9))
    for k in range(1, 13):
        assert curve[k - 1] == pytest.approx(acc_at_k(ranked, np.arange(9), k))
    assert np.all(np.diff(curve) >= 0)
    assert curve[-1] == 1.0


# ---------------------------------------------------------------------------
# evaluate_direction


def test_evaluate_direction_map_and_label_permutation(rng):
    queries = rng.standard_normal((4, 12))
    gallery = rng.standard_normal((4, 12))
    labels = rng.integers(1, 4, size=12)
    labels[:3] = [1, 2, 3]
    base = evaluate_direction(fm(queries), fm(gallery), labels, labels, "a2b")
    assert base.map == pytest.approx(base.per_query_ap.mean(), abs=1e-12)
    # relabeling subclasses by a bijection leaves MAP unchanged
    permuted = np.array([3, 1, 2])[labels - 1]
    relabeled = evaluate_direction(fm(queries), fm(gallery), permuted, permuted, "a2b")
    assert relabeled.map == pytest.approx(base.map, abs=1e-12)


def test_evaluate_direction_ap_cutoff(rng):
    queries = rng.standard_normal((3, 6))
    gallery = rng.standard_normal((3, 6))
    labels = np.array([1, 1, 1, 2, 2, 2])
    full = evaluate_direction(fm(queries), fm(gallery), labels, labels, "a2b")
    cut = evaluate_direction(fm(queries), fm(gallery), labels, labels, "a2b", ap_cutoff=2)
    assert cut.per_query_ap.shape == full.per_query_ap.shape
    assert np.all(cut.per_query_ap <= 1.0)
