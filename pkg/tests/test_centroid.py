import numpy as np
import pytest

from langtree.centroid import (
    CentroidMatrix,
    apply_standardization,
    build_matrix,
    language_centroid,
    standardize,
)
from langtree.corpus import EmbeddingSet


class TestLanguageCentroid:
    def test_single_clip_single_frame(self):
        np.testing.assert_array_equal(
            language_centroid([np.array([[5.0, -1.0]])]), [5.0, -1.0]
        )

    def test_double_average_not_frame_pooled(self):
        # clip means are 1 and 4; the frame-pooled mean would be 2.0
        clips = [np.array([[0.0], [2.0]]), np.array([[4.0]])]
        np.testing.assert_array_equal(language_centroid(clips), [2.5])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        clips = [rng.normal(size=(rng.integers(1, 6), 4)) for _ in range(3)]
        expected = np.zeros(4)
        for c in clips:
            inner = np.zeros(4)
            for frame in c:
                inner += frame
            expected += inner / c.shape[0]
        expected /= len(clips)
        np.testing.assert_allclose(language_centroid(clips), expected, atol=1e-12)

    def test_empty_clip_list(self):
        with pytest.raises(ValueError, match="no clips"):
            language_centroid([])

    def test_empty_frame_sequence(self):
        with pytest.raises(ValueError, match="no frames"):
            language_centroid([np.zeros((0, 3))])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dim mismatch"):
            language_centroid([np.zeros(3), np.zeros(4)])

    def test_order_invariance(self):
        rng = np.random.default_rng(4)
        clips = [rng.normal(size=(3, 5)) for _ in range(4)]
        a = language_centroid(clips)
        b = language_centroid(clips[::-1])
        c = language_centroid([clip[::-1] for clip in clips])
        np.testing.assert_allclose(a, b, atol=1e-12)
        np.testing.assert_allclose(a, c, atol=1e-12)

    def test_scaling_linearity(self):
        rng = np.random.default_rng(5)
        clips = [rng.normal(size=(2, 3)) for _ in range(3)]
        np.testing.assert_allclose(
            language_centroid([3.0 * c for c in clips]),
            3.0 * language_centroid(clips),
            atol=1e-12,
        )


class TestBuildMatrix:
    def make_set(self, rows_by_lang):
        dim = next(iter(rows_by_lang.values())).shape[1]
        emb = EmbeddingSet(dim=dim)
        for lang, rows in rows_by_lang.items():
            emb.add(lang, rows)
        return emb

    def test_identical_clips_identical_rows(self):
        emb = self.make_set({"a": np.ones((1, 3)), "b": np.ones((1, 3))})
        m = build_matrix(emb, ["a", "b"])
        np.testing.assert_array_equal(m.values[0], m.values[1])
        assert not m.standardized

    def test_row_permutation(self):
        rng = np.random.default_rng(6)
        emb = self.make_set({l: rng.normal(size=(2, 4)) for l in "abc"})
        m1 = build_matrix(emb, ["a", "b", "c"])
        m2 = build_matrix(emb, ["c", "a", "b"])
        np.testing.assert_array_equal(m1.values[0], m2.values[1])
        np.testing.assert_array_equal(m1.values[2], m2.values[0])

    def test_missing_language(self):
        emb = self.make_set({"a": np.ones((1, 3))})
        with pytest.raises(ValueError, match="missing"):
            build_matrix(emb, ["a", "zzz"])


class TestStandardize:
    def test_two_point_column(self):
        m = CentroidMatrix(lang_ids=["a", "b"], values=np.array([[1.0], [3.0]]))
        z = standardize(m)
        np.testing.assert_allclose(z.values[:, 0], [-1.0, 1.0])
        assert z.col_mean[0] == 2.0 and z.col_std[0] == 1.0

    def test_constant_column_frozen(self):
        m = CentroidMatrix(lang_ids=list("abc"), values=np.array([[7.0], [7.0], [7.0]]))
        z = standardize(m)
        np.testing.assert_array_equal(z.values[:, 0], [0.0, 0.0, 0.0])
        assert z.zero_variance_cols == [0]

    def test_random_matrix_stats(self):
        rng = np.random.default_rng(7)
        m = CentroidMatrix(lang_ids=[f"l{i}" for i in range(6)], values=rng.normal(size=(6, 5)))
        z = standardize(m)
        assert np.abs(z.values.mean(axis=0)).max() < 1e-9
        assert np.abs(z.values.std(axis=0) - 1.0).max() < 1e-9

    def test_affine_invariance(self):
        rng = np.random.default_rng(8)
        values = rng.normal(size=(5, 4))
        z1 = standardize(CentroidMatrix(list("abcde"), values.copy()))
        z2 = standardize(CentroidMatrix(list("abcde"), values * 2.5 + 7.0))
        np.testing.assert_allclose(z1.values, z2.values, atol=1e-9)

    def test_double_standardize_rejected(self):
        m = standardize(CentroidMatrix(["a", "b"], np.array([[1.0], [3.0]])))
        with pytest.raises(ValueError, match="already"):
            standardize(m)

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 2"):
            standardize(CentroidMatrix(["a"], np.array([[1.0]])))

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        values = rng.normal(size=(6, 3))
        z1 = standardize(CentroidMatrix([f"l{i}" for i in range(6)], values.copy()))
        z2 = standardize(CentroidMatrix([f"l{i}" for i in range(6)], values.copy()))
        assert np.array_equal(z1.values, z2.values)

    def test_apply_reference_stats(self):
        rng = np.random.default_rng(10)
        values = rng.normal(size=(6, 3))
        z = standardize(CentroidMatrix([f"l{i}" for i in range(6)], values.copy()))
        reapplied = apply_standardization(values, z)
        np.testing.assert_allclose(reapplied, z.values, atol=1e-12)
