"""
Tests for mean-shift clustering, representative sampling and the demonstration store.
"""
import json
import math

import numpy as np
import pytest

from guarded_decoding import DemonstrationStore, HashingEmbedder, StoreConfig
from guarded_decoding.core.exceptions import DimensionMismatchError, StoreFormatError
from guarded_decoding.similarity import MeanShift, cluster_sizes, cosine, estimate_bandwidth, load_examples
from guarded_decoding.similarity.store import ceil_quota

from .helpers import write_jsonl


def unit(values):
    vector = np.asarray(values, dtype=float)
    return vector / np.linalg.norm(vector)


def store_from_vectors(vectors, ids=None, dimension=None):
    """Store whose example vectors are given explicitly."""
    dimension = dimension or len(vectors[0])
    ids = ids or [f"ex-{i:03d}" for i in range(len(vectors))]
    items = [(ex_id, f"text {ex_id}") for ex_id in ids]
    overrides = dict(zip(ids, vectors))
    return DemonstrationStore.from_texts(items, HashingEmbedder(dimension), overrides=overrides)


class TestMeanShift:
    """Test flat-kernel mean shift."""

    def test_one_dimensional_groups(self):
        """Test two well separated 1-D groups."""
        shift = MeanShift(bandwidth=1.0, normalize=False).fit(np.array([0.0, 0.1, 5.0, 5.1]))
        assert shift.labels_.tolist() == [0, 0, 1, 1]
        np.testing.assert_allclose(shift.cluster_centers_.ravel(), [0.05, 5.05], atol=1e-6)
        assert shift.converged_

    def test_identical_points(self):
        """Test identical vectors form one cluster with the auto bandwidth."""
        X = np.tile(unit([1, 2, 3]), (6, 1))
        shift = MeanShift().fit(X)
        assert set(shift.labels_.tolist()) == {0}

    def test_wide_bandwidth(self):
        """Test a bandwidth above the data diameter gives one cluster."""
        rng = np.random.default_rng(0)
        X = rng.normal(size=(30, 4))
        diameter = max(np.linalg.norm(a - b) for a in X for b in X)
        shift = MeanShift(bandwidth=diameter * 1.01, normalize=False).fit(X)
        assert len(shift.cluster_centers_) == 1

    def test_single_point(self):
        """Test one example is one cluster."""
        shift = MeanShift().fit(np.array([[0.6, 0.8]]))
        assert shift.labels_.tolist() == [0]

    def test_empty_input(self):
        """Test clustering nothing is an error."""
        with pytest.raises(ValueError):
            MeanShift().fit(np.zeros((0, 3)))

    def test_estimate_bandwidth(self):
        """Test the median pairwise distance estimate."""
        X = np.array([[0.0], [1.0], [3.0]])
        # distances 1, 3, 2
        assert estimate_bandwidth(X) == pytest.approx(2.0)
        assert estimate_bandwidth(np.zeros((4, 2))) == pytest.approx(1e-6)

    def test_invalid_parameters(self):
        """Test parameter validation."""
        with pytest.raises(ValueError):
            MeanShift(bandwidth=0.0)
        with pytest.raises(ValueError):
            MeanShift(bandwidth="median")
        with pytest.raises(ValueError):
            MeanShift(max_iter=0)

    def test_deterministic(self):
        """Test repeated fits with the same seed give the same labels and centers."""
        rng = np.random.default_rng(12)
        X = np.vstack([unit(rng.normal(size=6)) for _ in range(40)])
        first = MeanShift(bandwidth=0.8, seed=4).fit(X)
        second = MeanShift(bandwidth=0.8, seed=4).fit(X.copy())
        assert first.labels_.tolist() == second.labels_.tolist()
        np.testing.assert_array_equal(first.cluster_centers_, second.cluster_centers_)
        assert first.n_iter_ == second.n_iter_

    def test_store_labels_are_reproducible(self):
        """Test two stores built from the same texts cluster identically."""
        texts = [(f"t{i:02d}", f"word{i % 5} other{i % 3} tail") for i in range(30)]
        config = StoreConfig(bandwidth=0.9)
        first = DemonstrationStore.from_texts(texts, HashingEmbedder(64)).cluster(config)
        second = DemonstrationStore.from_texts(texts, HashingEmbedder(64)).cluster(config)
        assert first.tolist() == second.tolist()


class TestSampling:
    """Test per-cluster ratio sampling."""

    @pytest.fixture
    def separated(self):
        """Two tight groups of 10 and 7 unit vectors around orthogonal axes."""
        rng = np.random.default_rng(3)
        vectors = [unit(np.eye(8)[0] + rng.normal(scale=0.01, size=8)) for _ in range(10)]
        vectors += [unit(np.eye(8)[1] + rng.normal(scale=0.01, size=8)) for _ in range(7)]
        return store_from_vectors(vectors)

    @pytest.fixture
    def config(self):
        return StoreConfig(bandwidth=0.5)

    def test_recovers_two_clusters(self, separated, config):
        """Test mean shift separates the two groups."""
        labels = separated.cluster(config)
        assert cluster_sizes(labels) == {0: 10, 1: 7}
        assert labels.tolist() == [0] * 10 + [1] * 7

    @pytest.mark.parametrize("ratio,expected", [(0.1, 2), (0.3, 6), (0.5, 9), (0.7, 12), (1.0, 17)])
    def test_subset_size(self, separated, config, ratio, expected):
        """Test |subset| is the sum of per-cluster ceilings."""
        labels = separated.cluster(config)
        subset = separated.sample_representatives(labels, ratio, seed=0)
        assert len(subset) == expected
        assert expected == sum(ceil_quota(ratio, s) for s in cluster_sizes(labels).values())

    def test_decimal_ceiling(self):
        """Test ratios are taken at their decimal value."""
        assert ceil_quota(0.7, 10) == 7
        assert ceil_quota(0.3, 10) == 3
        assert ceil_quota(0.5, 4) == 2
        assert ceil_quota(0.1, 1) == 1

    def test_subset_preserves_order_and_is_seeded(self, separated, config):
        """Test subsets keep input order and depend only on the seed."""
        labels = separated.cluster(config)
        first = separated.sample_representatives(labels, 0.5, seed=11)
        second = separated.sample_representatives(labels, 0.5, seed=11)
        assert first.ids == second.ids
        positions = [separated.ids.index(i) for i in first.ids]
        assert positions == sorted(positions)
        assert {ex.cluster for ex in first} == {0, 1}

    def test_small_clusters_keep_one(self):
        """Test a singleton cluster survives any ratio."""
        store = store_from_vectors([unit([1, 0]), unit([0, 1])])
        subset = store.sample_representatives([0, 1], 0.1, seed=0)
        assert len(subset) == 2

    def test_full_store_when_ratio_is_one(self, separated):
        """Test R = 1 and disabled clustering return the store itself."""
        assert separated.representatives(StoreConfig(ratio_R=1.0), seed=5) is separated
        assert separated.representatives(StoreConfig(ratio_R=0.2, do_clustering=False), seed=5) is separated

    def test_representatives_with_ratio(self, separated):
        """Test representatives cluster then sample."""
        subset = separated.representatives(StoreConfig(ratio_R=0.3, bandwidth=0.5), seed=1)
        assert len(subset) == 6

    def test_labels_are_cached(self, separated, config):
        """Test clustering runs once per configuration."""
        assert separated.cluster(config) is separated.cluster(config)

    def test_invalid_ratio(self, separated, config):
        """Test ratio bounds."""
        labels = separated.cluster(config)
        with pytest.raises(ValueError):
            separated.sample_representatives(labels, 0.0, seed=0)
        with pytest.raises(ValueError):
            StoreConfig(ratio_R=1.5)


class TestDemonstrationStore:
    """Test store construction, loading and similarity scans."""

    def test_empty_store_scores_zero(self):
        """Test the vacuous maximum."""
        store = DemonstrationStore.empty(HashingEmbedder(16))
        assert store.max_similarity(np.ones(16)) == (0.0, None)
        assert len(store) == 0

    def test_identical_text_scores_one(self):
        """Test a candidate equal to an example."""
        store = DemonstrationStore.from_texts(
            [("x1", "you are all worthless"), ("x2", "a quiet morning")], HashingEmbedder(256)
        )
        score, nearest = store.max_similarity(store.embed("you are all worthless".split()))
        assert score == pytest.approx(1.0)
        assert nearest == "x1"

    def test_maximum_and_argmax(self):
        """Test three examples with cosines 0.1, 0.7 and 0.4."""
        vectors = [[c, math.sqrt(1 - c * c), 0.0] for c in (0.1, 0.7, 0.4)]
        store = store_from_vectors(vectors, ids=["a", "b", "c"])
        score, nearest = store.max_similarity(np.array([1.0, 0.0, 0.0]))
        assert score == pytest.approx(0.7)
        assert nearest == "b"

    def test_ties_go_to_smallest_id(self):
        """Test tie-breaking by lexicographic id."""
        store = store_from_vectors([unit([1, 1]), unit([1, 1])], ids=["z1", "a1"])
        _, nearest = store.max_similarity(np.array([1.0, 1.0]))
        assert nearest == "a1"

    def test_batch_scan(self):
        """Test the vectorized scan returns max, argmax and min per candidate."""
        store = store_from_vectors([unit([1, 0]), unit([0, 1])], ids=["e1", "e2"])
        scan = store.max_similarity_many(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]))
        np.testing.assert_allclose(scan.max_scores, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(scan.min_scores, [0.0, -1.0, 0.0])
        assert scan.nearest_ids[0] == "e1"

    def test_dimension_checks(self):
        """Test candidate and override dimensions are enforced."""
        store = store_from_vectors([unit([1, 0, 0])])
        with pytest.raises(DimensionMismatchError):
            store.max_similarity(np.ones(4))
        with pytest.raises(DimensionMismatchError):
            store_from_vectors([np.ones(3)], dimension=4)

    @pytest.mark.parametrize("size", [1, 9, 120, 1000])
    def test_scan_matches_brute_force(self, size):
        """Test the vectorized maximum and argmax against a scan over every example."""
        rng = np.random.default_rng(size)
        store = store_from_vectors([unit(rng.normal(size=12)) for _ in range(size)])
        candidates = rng.normal(size=(6, 12))
        candidates[0] = 0.0
        scan = store.max_similarity_many(candidates)
        for row, vector in enumerate(candidates):
            scores = [cosine(vector, ex.vector) for ex in store]
            best = max(scores)
            assert scan.max_scores[row] == pytest.approx(best, abs=1e-12)
            assert scan.min_scores[row] == pytest.approx(min(scores), abs=1e-12)
            if row > 0:
                assert scan.nearest_ids[row] == store.ids[int(np.argmax(scores))]
            assert store.max_similarity(vector)[0] == pytest.approx(best, abs=1e-12)

    def test_duplicate_ids_rejected(self):
        """Test ids are unique."""
        with pytest.raises(ValueError):
            DemonstrationStore.from_texts([("a", "x"), ("a", "y")], HashingEmbedder(16))

    def test_load(self, tmp_path):
        """Test loading a JSON Lines file with an embedding override."""
        path = write_jsonl(tmp_path / "examples.jsonl", [
            {"id": "t1", "text": "vile rats"},
            {"id": "t2", "text": "filthy cowards", "embedding": [3.0] + [0.0] * 15},
        ])
        store = DemonstrationStore.load(path, HashingEmbedder(16))
        assert store.ids == ["t1", "t2"]
        assert store.examples[0].text == "vile rats"
        np.testing.assert_allclose(store.examples[1].vector, [1.0] + [0.0] * 15)

    def test_load_skips_blank_lines(self, tmp_path):
        """Test blank lines are ignored."""
        path = tmp_path / "examples.jsonl"
        path.write_text('{"id": "a", "text": "x"}\n\n{"id": "b", "text": "y"}\n', encoding="utf-8")
        items, overrides = load_examples(path, 16)
        assert items == [("a", "x"), ("b", "y")]
        assert overrides == {}

    @pytest.mark.parametrize("content,line", [
        ('{"id": "a", "text": "x"}\n{not json}\n', 2),
        ('{"id": "a"}\n', 1),
        ('["a", "x"]\n', 1),
        ('{"id": "a", "text": "x"}\n{"id": "a", "text": "y"}\n', 2),
    ])
    def test_load_errors_carry_line_numbers(self, tmp_path, content, line):
        """Test malformed files report file and line."""
        path = tmp_path / "bad.jsonl"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(StoreFormatError) as info:
            load_examples(path, 16)
        assert info.value.line == line
        assert str(path) in str(info.value)

    def test_override_dimension_mismatch(self, tmp_path):
        """Test embedding overrides must match the embedder."""
        path = write_jsonl(tmp_path / "examples.jsonl", [{"id": "a", "text": "x", "embedding": [1.0, 0.0]}])
        with pytest.raises(DimensionMismatchError):
            DemonstrationStore.load(path, HashingEmbedder(16))

    def test_matrix_is_read_only(self):
        """Test the stacked vectors cannot be modified."""
        store = store_from_vectors([unit([1, 0])])
        with pytest.raises(ValueError):
            store.matrix[0, 0] = 5.0

    def test_raw_text_is_kept(self, tmp_path):
        """Test an example keeps its text as written next to the tokens."""
        path = write_jsonl(tmp_path / "e.jsonl", [{"id": "q", "text": "Mixed CASE words"}])
        store = DemonstrationStore.load(path, HashingEmbedder(16))
        assert store.examples[0].tokens == ("mixed", "case", "words")
        assert store.examples[0].text == "Mixed CASE words"
        assert json.loads(path.read_text().strip())["text"] == "Mixed CASE words"
