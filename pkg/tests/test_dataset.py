import numpy as np
import pytest

from fedsim import (
    MultilabelDataset,
    label_stats,
    split_common_labels,
    train_val_split,
    ucm_like,
)


def make_ds(labels, n_pixels=2):
    labels = np.asarray(labels, dtype=np.uint8)
    n = labels.shape[0]
    rng = np.random.default_rng(0)
    images = rng.random((n, n_pixels, n_pixels, 3))
    names = tuple(f"l{i}" for i in range(labels.shape[1]))
    return MultilabelDataset(images, labels, names)


class TestDatasetInvariants:
    def test_pixel_range_enforced(self):
        with pytest.raises(ValueError):
            MultilabelDataset(np.full((1, 2, 2, 3), 1.5), [[1]], ("a",))

    def test_label_bits_enforced(self):
        with pytest.raises(ValueError):
            MultilabelDataset(np.zeros((1, 2, 2, 3)), [[2]], ("a",))

    def test_names_unique_nonempty(self):
        with pytest.raises(ValueError):
            MultilabelDataset(np.zeros((1, 2, 2, 3)), [[1, 0]], ("a", "a"))
        with pytest.raises(ValueError):
            MultilabelDataset(np.zeros((1, 2, 2, 3)), [[1, 0]], ("a", ""))

    def test_sample_access(self):
        ds = make_ds([[1, 0], [0, 1]])
        assert len(ds) == 2
        assert ds[1].labels.tolist() == [0, 1]
        assert ds.shape == (2, 2, 3)

    def test_images_read_only(self):
        ds = make_ds([[1, 0]])
        with pytest.raises(ValueError):
            ds.images[0, 0, 0, 0] = 0.0


class TestLabelStats:
    def test_hand_computed_cosine(self):
        # a = [1,1,0], b = [1,0,1]: dot 1, norms sqrt(2) -> 1/2
        ds = make_ds([[1, 1], [1, 0], [0, 1]])
        stats = label_stats(ds)
        assert stats.cosine[0, 1] == pytest.approx(0.5, abs=1e-15)

    def test_never_cooccur_is_zero(self):
        ds = make_ds([[1, 0], [0, 1]])
        assert label_stats(ds).cosine[0, 1] == 0.0

    def test_identical_columns_is_one(self):
        ds = make_ds([[1, 1], [1, 1], [0, 0]])
        assert label_stats(ds).cosine[0, 1] == pytest.approx(1.0, abs=1e-15)

    def test_counts_match_brute_force(self):
        rng = np.random.default_rng(3)
        labels = (rng.random((50, 7)) < 0.3).astype(np.uint8)
        ds = make_ds(labels)
        stats = label_stats(ds)
        expected = [sum(int(labels[i, l]) for i in range(50)) for l in range(7)]
        assert stats.counts.tolist() == expected

    def test_symmetry_range_and_diagonal(self):
        rng = np.random.default_rng(4)
        labels = (rng.random((80, 9)) < 0.25).astype(np.uint8)
        labels[:, 4] = 0  # force a zero-count label
        stats = label_stats(make_ds(labels))
        assert np.abs(stats.cosine - stats.cosine.T).max() <= 1e-12
        assert stats.cosine.min() >= 0.0 and stats.cosine.max() <= 1.0
        assert (stats.cosine[4] == 0).all() and (stats.cosine[:, 4] == 0).all()
        present = stats.counts > 0
        assert (np.diag(stats.cosine)[present] == 1.0).all()

    def test_empty_dataset_rejected(self):
        ds = make_ds(np.zeros((0, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            label_stats(ds)


class TestSplitCommonLabels:
    def test_direct_comparison(self):
        from fedsim import LabelStats

        stats = LabelStats(np.array([900, 50, 0]), np.zeros((3, 3)))
        common, less = split_common_labels(stats, 2000, 0.10)
        assert common.tolist() == [0]
        assert less.tolist() == [1]

    def test_all_below_threshold(self):
        ds = make_ds([[1, 1]])
        stats = label_stats(ds)
        common, less = split_common_labels(stats, 100, 0.10)
        assert common.size == 0
        assert less.tolist() == [0, 1]

    def test_ucm_like_splits_6_and_10(self):
        ds = ucm_like(2000, shape=(8, 8, 3), seed=7)
        stats = label_stats(ds)
        common, less = split_common_labels(stats, len(ds))
        assert common.tolist() == list(range(6))
        assert less.tolist() == list(range(6, 16))

    def test_partition_of_present_labels(self):
        rng = np.random.default_rng(5)
        labels = (rng.random((60, 8)) < 0.2).astype(np.uint8)
        ds = make_ds(labels)
        stats = label_stats(ds)
        common, less = split_common_labels(stats, 60)
        both = np.concatenate([common, less])
        assert sorted(both.tolist()) == np.flatnonzero(stats.counts > 0).tolist()


class TestTrainValSplit:
    def test_8_2_split(self):
        ds = make_ds(np.eye(10, 3, dtype=np.uint8)[:, :3])
        train, val = train_val_split(ds, 0.2, seed=1)
        assert len(train) == 8 and len(val) == 2

    def test_same_seed_identical(self):
        ds = ucm_like(50, shape=(8, 8, 3), seed=0)
        t1, v1 = train_val_split(ds, 0.3, seed=9)
        t2, v2 = train_val_split(ds, 0.3, seed=9)
        assert np.array_equal(t1.images, t2.images)
        assert np.array_equal(v1.labels, v2.labels)

    def test_disjoint_exhaustive_brute_force(self):
        ds = ucm_like(1000, shape=(8, 8, 3), seed=1)
        train, val = train_val_split(ds, 0.2, seed=2)
        # brute-force membership: every original sample appears exactly once
        seen = {}
        for side in (train, val):
            for i in range(len(side)):
                key = side.images[i].tobytes()
                seen[key] = seen.get(key, 0) + 1
        originals = [ds.images[i].tobytes() for i in range(len(ds))]
        assert sorted(seen.keys()) == sorted(set(originals))
        assert len(train) + len(val) == len(ds)

    def test_degenerate_split_rejected(self):
        ds = make_ds([[1], [0]])
        with pytest.raises(ValueError):
            train_val_split(ds, 0.01, seed=0)
