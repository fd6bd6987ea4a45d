import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import impulse_responses
from hankelpath.errors import StructureError
from hankelpath.hankel import (
    as_impulse_response,
    cn_constant,
    frobenius_constant,
    hankel_adjoint,
    hankel_map,
    multiplicities,
    order,
)


def test_map_examples():
    np.testing.assert_array_equal(hankel_map([1, 2, 3]), [[1, 2], [2, 3]])
    E = hankel_map([1, 0, 0, 0, 0])
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    np.testing.assert_array_equal(E, expected)
    np.testing.assert_array_equal(hankel_map([5]), [[5]])


def test_map_entries_constant_on_antidiagonals():
    g = np.arange(1.0, 10.0)
    H = hankel_map(g)
    for i in range(5):
        for j in range(5):
            assert H[i, j] == g[i + j]


def test_adjoint_examples():
    np.testing.assert_array_equal(hankel_adjoint([[1, 2], [3, 4]]), [1, 5, 4])
    np.testing.assert_array_equal(hankel_adjoint(np.ones((3, 3))), [1, 2, 3, 2, 1])
    np.testing.assert_array_equal(hankel_adjoint([[2]]), [2])


@pytest.mark.parametrize("n", [2, 4, 10])
def test_even_length_rejected(n):
    with pytest.raises(StructureError):
        hankel_map(np.ones(n))


def test_bad_inputs_rejected():
    with pytest.raises(StructureError):
        hankel_adjoint(np.ones((2, 3)))
    with pytest.raises(ValueError):
        as_impulse_response([1.0, np.nan, 1.0])
    with pytest.raises(ValueError):
        as_impulse_response([])


def test_order():
    assert order(1) == 1 and order(5) == 3 and order(41) == 21


@pytest.mark.parametrize("p,expected", [(1, 1.0), (2, math.sqrt(6)), (3, math.sqrt(19))])
def test_cn_examples(p, expected):
    assert cn_constant(p) == pytest.approx(expected, abs=1e-12)


def test_cn_matches_adjoint_of_ones():
    for p in range(1, 301):
        direct = np.linalg.norm(hankel_adjoint(np.ones((p, p))))
        assert abs(cn_constant(p) - direct) <= 1e-12 * max(1.0, direct)


def test_frobenius_constant_examples():
    assert frobenius_constant(3, "loose") == 3
    assert frobenius_constant(3, "tight") == 2
    assert frobenius_constant(1, "loose") == 1
    with pytest.raises(ValueError):
        frobenius_constant(3, "other")


def test_tight_constant_attained_by_exhaustive_sampling(rng):
    # max of ||H(x)||_F^2 / ||x||^2 is the largest multiplicity, reached at the middle unit vector
    ratios = []
    for _ in range(20000):
        x = rng.standard_normal(3)
        ratios.append(np.linalg.norm(hankel_map(x)) ** 2 / (x @ x))
    assert max(ratios) <= 2.0 + 1e-12
    e = np.array([0.0, 1.0, 0.0])
    assert np.sum(hankel_map(e) ** 2) == 2.0


@given(impulse_responses(max_p=11), st.integers(0, 2**32 - 1))
def test_adjoint_identity(g, seed):
    p = order(g.shape[0])
    X = np.random.default_rng(seed).standard_normal((p, p))
    lhs = float(np.sum(hankel_map(g) * X))
    rhs = float(g @ hankel_adjoint(X))
    scale = np.linalg.norm(hankel_map(g)) * np.linalg.norm(X) + 1e-300
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(impulse_responses())
def test_adjoint_of_map_is_multiplicity_weighting(g):
    np.testing.assert_allclose(
        hankel_adjoint(hankel_map(g)), multiplicities(g.shape[0]) * g, rtol=1e-13, atol=1e-13
    )


@given(impulse_responses(), st.sampled_from(["loose", "tight"]))
def test_frobenius_bound(g, mode):
    lhs = np.linalg.norm(hankel_map(g)) ** 2
    assert lhs <= frobenius_constant(g.shape[0], mode) * (g @ g) * (1 + 1e-12) + 1e-300


def test_multiplicities():
    np.testing.assert_array_equal(multiplicities(7), [1, 2, 3, 4, 3, 2, 1])
    for p in range(1, 20):
        assert np.linalg.norm(multiplicities(2 * p - 1)) == pytest.approx(cn_constant(p), rel=1e-14)
