from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from permix import exact

X = sympy.Symbol("x")


def int_matrices(max_n=7, lo=-4, hi=4):
    return st.integers(1, max_n).flatmap(lambda n: arrays(np.int64, (n, n), elements=st.integers(lo, hi)))


@given(int_matrices())
def test_det_matches_sympy(M):
    assert exact.det_int(M) == sympy.Matrix(M.tolist()).det()


@given(int_matrices())
def test_charpoly_matches_sympy(M):
    want = [int(c) for c in sympy.Matrix(M.tolist()).charpoly(X).all_coeffs()]
    assert exact.charpoly_int(M) == want


def test_charpoly_large_path():
    rng = np.random.default_rng(3)
    M = rng.integers(0, 2, (20, 20))
    want = [int(c) for c in sympy.Matrix(M.tolist()).charpoly(X).all_coeffs()]
    assert exact.charpoly_int(M) == want


@settings(max_examples=30)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(0, 2**32))
def test_charpoly_batch_matches_single(n, b, seed):
    mats = np.random.default_rng(seed).integers(0, 3, (b, n, n))
    out = exact.charpoly_batch(mats)
    for M, row in zip(mats, out):
        assert [int(c) for c in row] == exact.charpoly_int(M)


@given(int_matrices(max_n=5, lo=-3, hi=3))
def test_rank_and_nullspace(M):
    r = exact.rank_exact(M)
    assert r == sympy.Matrix(M.tolist()).rank()
    basis = exact.nullspace_exact(M)
    assert len(basis) == M.shape[0] - r
    for v in basis:
        assert all(sum(Fraction(int(a)) * x for a, x in zip(row, v)) == 0 for row in M)


def test_polynomial_helpers():
    # (x - 2)^2 (x + 1) x^3
    coeffs = [int(c) for c in sympy.Poly((X - 2) ** 2 * (X + 1) * X**3, X).all_coeffs()]
    assert exact.root_multiplicity(coeffs, 2) == 2
    assert exact.root_multiplicity(coeffs, -1) == 1
    assert exact.root_multiplicity(coeffs, 3) == 0
    assert exact.zero_root_multiplicity(coeffs) == 3
    q, r = exact.poly_divide_linear([1, -3, 2], 1)
    assert q == [1, -2] and r == 0


@pytest.mark.parametrize(
    "poly,m,expected",
    [
        ((X - 2) * (X**2 + 1) * X**2, 2, False),
        ((X - 2) * (X + 2) * (X**2 + X + 1), 2, False),
        ((X - 2) * (X**2 - X - 1), 2, True),  # golden ratio sits strictly between
        ((X - 3) * (X**2 + 9), 3, False),  # 3i has modulus m
        ((X - 3) * (X**2 - 2), 3, True),
        ((X - 2) * (X**2 - 2), 2, True),  # sqrt 2
    ],
)
def test_intermediate_root(poly, m, expected):
    coeffs = [int(c) for c in sympy.Poly(poly, X).all_coeffs()]
    assert exact.has_intermediate_root(coeffs, m) is expected


def test_product_of_cyclotomics():
    assert exact.product_of_cyclotomics([int(c) for c in sympy.Poly((X**2 + 1) * (X - 1), X).all_coeffs()])
    assert not exact.product_of_cyclotomics([int(c) for c in sympy.Poly(X**2 - X - 1, X).all_coeffs()])


def test_non_integer_rejected():
    with pytest.raises(ValueError):
        exact.det_int(np.array([[0.5, 0], [0, 1]]))
