import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from evtest.data import (SampleMatrix, TieKind, TiePolicy, compute_ranks, pseudo_observations,
                         read_csv, to_pseudo)
from evtest.errors import CsvParseError, DegenerateColumn, EvtestError, TiesDetected


def col_matrix(*cols):
    return SampleMatrix(np.column_stack(cols))


def test_ranks_strict_order():
    x = col_matrix([3.1, 1.0, 2.5], [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(compute_ranks(x)[:, 0], [3, 1, 2])


def test_midranks():
    x = col_matrix([1.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    r = compute_ranks(x, TiePolicy(TieKind.MIDRANK))
    np.testing.assert_array_equal(r[:, 0], [1.5, 1.5, 3])


def test_random_ties_are_fair():
    x = col_matrix([1.0, 1.0], [0.0, 1.0])
    first = 0
    for seed in range(10000):
        r = compute_ranks(x, TiePolicy(TieKind.RANDOM, seed))[:, 0]
        assert sorted(r) == [1, 2]
        first += r[0] == 1
    assert 0.48 <= first / 10000 <= 0.52


def test_random_ties_reproducible_and_columnwise():
    rng = np.random.default_rng(0)
    v = rng.integers(0, 5, size=(50, 3)).astype(float)
    a = compute_ranks(SampleMatrix(v), TiePolicy(TieKind.RANDOM, 11))
    b = compute_ranks(SampleMatrix(v), TiePolicy(TieKind.RANDOM, 11))
    np.testing.assert_array_equal(a, b)
    # a column's ranks do not depend on the other columns
    c = compute_ranks(SampleMatrix(v[:, [0, 2]]), TiePolicy(TieKind.RANDOM, 11))
    np.testing.assert_array_equal(a[:, 0], c[:, 0])
    for j in range(3):
        assert sorted(a[:, j]) == list(range(1, 51))


def test_tie_errors():
    with pytest.raises(TiesDetected):
        compute_ranks(col_matrix([1.0, 1.0, 2.0], [1.0, 2.0, 3.0]))
    with pytest.raises(DegenerateColumn):
        compute_ranks(col_matrix([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))


def test_constant_column_allowed_with_warning():
    x = col_matrix([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    p = to_pseudo(x, TiePolicy(TieKind.MIDRANK))
    np.testing.assert_array_equal(p.source_ranks[:, 0], [2, 2, 2])
    assert any("constant" in w for w in p.warnings)


def test_pseudo_observation_values():
    p = pseudo_observations(np.array([[1, 3], [2, 1], [3, 2]]))
    np.testing.assert_allclose(p.u[:, 0], [0.25, 0.5, 0.75])
    assert pseudo_observations(np.column_stack([np.arange(1, 100)] * 2)).u[-1, 0] == 0.99
    assert pseudo_observations(np.array([[1.5, 1], [1.5, 2], [3, 3]])).u[0, 0] == 0.375


def test_pseudo_rejects_bad_ranks():
    with pytest.raises(EvtestError):
        pseudo_observations(np.array([[0, 1], [2, 2]]))


def test_sample_matrix_validation():
    with pytest.raises(EvtestError):
        SampleMatrix(np.ones((1, 2)))
    with pytest.raises(EvtestError):
        SampleMatrix(np.ones((3, 1)))
    with pytest.raises(EvtestError):
        SampleMatrix(np.array([[1.0, np.nan], [2.0, 3.0]]))
    x = SampleMatrix(np.arange(6.0).reshape(3, 2))
    assert not x.values.flags.writeable


# integer-valued floats keep the monotone maps below injective in double precision
distinct_cols = arrays(np.float64, st.tuples(st.integers(3, 30), st.just(3)),
                       elements=st.integers(-10**6, 10**6).map(float), unique=True)


@settings(max_examples=60, deadline=None)
@given(distinct_cols)
def test_rank_invariance_under_monotone_maps(v):
    x = SampleMatrix(v)
    base = compute_ranks(x)
    w = np.column_stack([np.exp(v[:, 0] / 1e6), v[:, 1] ** 3, 2.0 * v[:, 2] - 7.0])
    np.testing.assert_array_equal(compute_ranks(SampleMatrix(w)), base)
    np.testing.assert_array_equal(to_pseudo(SampleMatrix(w)).u, to_pseudo(x).u)


@settings(max_examples=60, deadline=None)
@given(distinct_cols, st.randoms(use_true_random=False))
def test_row_permutation_equivariance(v, rnd):
    perm = list(range(len(v)))
    rnd.shuffle(perm)
    r = compute_ranks(SampleMatrix(v))
    np.testing.assert_array_equal(compute_ranks(SampleMatrix(v[perm])), r[perm])


@settings(max_examples=40, deadline=None)
@given(distinct_cols)
def test_pseudo_invariants(v):
    p = to_pseudo(SampleMatrix(v))
    n = len(v)
    assert p.u.min() >= 1 / (n + 1) and p.u.max() <= n / (n + 1)
    for j in range(v.shape[1]):
        assert sorted(p.source_ranks[:, j]) == list(range(1, n + 1))


def test_read_csv_with_header(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("x,y\n1.5,2\n3,4.25\n\n5,6\n")
    x = read_csv(f)
    assert x.columns == ("x", "y")
    np.testing.assert_array_equal(x.values, [[1.5, 2], [3, 4.25], [5, 6]])
    assert x.select(["y", "0"]).columns == ("y", "x")


def test_read_csv_without_header(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2\n3,4\n")
    assert read_csv(f).columns is None


def test_read_csv_reports_location(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("x,y\n1,2\n3,abc\n")
    with pytest.raises(CsvParseError) as exc:
        read_csv(f)
    assert exc.value.row == 3 and exc.value.column == 2
    assert "row 3" in str(exc.value)
    f.write_text("1,2\n3\n")
    with pytest.raises(CsvParseError, match="row 2"):
        read_csv(f)
