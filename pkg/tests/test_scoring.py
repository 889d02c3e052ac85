import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdprune.errors import DataError
from fdprune.geomedian import geometric_median, objective
from fdprune.scoring import ScoreSet, fd_scores, format_percentile, percentile_rank
from fdprune.vectorizer import build_vocabulary, embed

TOY = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]])


class TestFDScores:
    def test_toy_against_direct_distances(self):
        med = geometric_median(TOY)
        s = fd_scores(TOY, med)
        expected = [np.sqrt(((row - med.point) ** 2).sum()) for row in TOY]
        np.testing.assert_allclose(s.fd, expected, rtol=1e-14, atol=1e-15)
        assert s.fd[4] == pytest.approx(0.0, abs=1e-12)

    def test_sum_matches_objective(self):
        docs = [["a", "b"], ["b", "c", "c"], ["d"], ["a", "d", "e"], ["e", "b"]]
        e = embed(docs, build_vocabulary(docs))
        med = geometric_median(e)
        s = fd_scores(e, med)
        assert s.fd.sum() == pytest.approx(objective(e, med.point), rel=1e-6)
        assert s.fd.sum() == pytest.approx(med.objective, rel=1e-6)

    def test_unit_rows_peripheral_near_one(self):
        # mutually orthogonal unit rows: the median sits near the origin
        X = np.eye(30)
        s = fd_scores(X, geometric_median(X))
        assert np.all((s.fd > 0.9) & (s.fd <= 1.0 + 1e-9))

    def test_dimension_mismatch(self):
        med = geometric_median(TOY)
        with pytest.raises(DataError):
            fd_scores(np.ones((3, 3)), med)

    def test_summary(self):
        s = ScoreSet(np.arange(3), [1.0, 2.0, 3.0])
        assert (s.min, s.mean, s.max) == (1.0, 2.0, 3.0)

    def test_invalid(self):
        with pytest.raises(DataError):
            ScoreSet(np.arange(2), [1.0, -1.0])
        with pytest.raises(DataError):
            ScoreSet(np.arange(2), [1.0, np.nan])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 30), st.floats(0.1, 50), st.integers(0, 10_000))
    def test_scaling_preserves_ranking(self, n, c, seed):
        X = np.random.default_rng(seed).normal(size=(n, 3))
        a = fd_scores(X, geometric_median(X))
        b = fd_scores(c * X, geometric_median(c * X))
        np.testing.assert_allclose(b.fd, c * a.fd, rtol=1e-4, atol=1e-9)

    def test_reordering(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 4))
        perm = rng.permutation(40)
        a = fd_scores(X, geometric_median(X, ))
        b = fd_scores(X[perm], geometric_median(X[perm]))
        np.testing.assert_allclose(b.fd, a.fd[perm], rtol=1e-5)


class TestPercentile:
    def test_unique_min_and_max(self):
        s = ScoreSet(np.arange(4), [0.5, 0.1, 0.9, 0.3])
        assert percentile_rank(s, 1) == 0.0
        assert percentile_rank(s, 2) == 75.0

    def test_ties(self):
        s = ScoreSet(np.arange(5), [1.0] * 5)
        assert [percentile_rank(s, i) for i in range(5)] == [0.0] * 5

    def test_large_n_display(self):
        n = 105_000
        s = ScoreSet(np.arange(n), np.arange(n, dtype=float))
        assert percentile_rank(s, n - 1) == pytest.approx(100 * (n - 1) / n)
        assert format_percentile(n - 1, n) == "99.99"

    def test_unknown(self):
        with pytest.raises(KeyError):
            percentile_rank(ScoreSet(np.arange(2), [1.0, 2.0]), 7)


class TestCSV:
    def test_round_trip(self):
        s = ScoreSet(np.arange(4), [0.5, 0.1, 0.9, 1 / 3])
        text = s.to_csv()
        assert text.splitlines()[0] == "doc_id,fd,percentile"
        assert text.splitlines()[1] == "0,0.5,50.00"
        assert text.endswith("\n")
        back = ScoreSet.from_csv(text)
        np.testing.assert_array_equal(back.fd, s.fd)

    def test_malformed(self):
        with pytest.raises(DataError):
            ScoreSet.from_csv("doc_id,fd\n0,abc\n")
        with pytest.raises(DataError):
            ScoreSet.from_csv("")
