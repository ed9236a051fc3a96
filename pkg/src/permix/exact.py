"""Exact integer/rational linear algebra on small dense matrices.

Everything here works on Python ints or :class:`fractions.Fraction` and is
free of rounding. The batched characteristic polynomial runs in numpy
``int64`` when a coefficient bound shows it cannot overflow.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy
from sympy.polys.matrices import DomainMatrix

__all__ = [
    "to_int_rows",
    "det_int",
    "rank_exact",
    "nullspace_exact",
    "charpoly_int",
    "charpoly_batch",
    "poly_divide_linear",
    "root_multiplicity",
    "zero_root_multiplicity",
    "has_intermediate_root",
    "product_of_cyclotomics",
]

# Faddeev-LeVerrier in pure Python is O(n^4); beyond this size hand over to
# sympy's division-free Berkowitz over ZZ.
_SMALL_CHARPOLY = 16


def to_int_rows(M) -> list[list[int]]:
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    rows = arr.tolist()
    out = []
    for r in rows:
        row = []
        for v in r:
            iv = int(v)
            if iv != v:
                raise ValueError("matrix has non-integer entries")
            row.append(iv)
        out.append(row)
    return out


def det_int(M) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    rows = to_int_rows(M)
    n = len(rows)
    if n == 0:
        return 1
    # object dtype keeps Python ints, so the vectorised updates stay exact
    a = np.empty((n, n), dtype=object)
    a[:, :] = rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k, k] == 0:
            nz = [r for r in range(k + 1, n) if a[r, k] != 0]
            if not nz:
                return 0
            a[[k, nz[0]]] = a[[nz[0], k]]
            sign = -sign
        akk = a[k, k]
        a[k + 1:, k + 1:] = (a[k + 1:, k + 1:] * akk - np.outer(a[k + 1:, k], a[k, k + 1:])) // prev
        a[k + 1:, k] = 0
        prev = akk
    return int(sign * a[n - 1, n - 1])


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def _as_fractions(M) -> list[list[Fraction]]:
    if isinstance(M, np.ndarray):
        M = M.tolist()
    return [[v if isinstance(v, Fraction) else Fraction(v) for v in row] for row in M]


def rank_exact(M) -> int:
    rows = _as_fractions(M)
    if not rows:
        return 0
    return len(_rref(rows)[1])


def nullspace_exact(M) -> list[list[Fraction]]:
    """Basis of the right kernel ``{x : M x = 0}`` over the rationals."""
    rows = _as_fractions(M)
    ncols = len(rows[0])
    red, pivots = _rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -red[r][fc]
        basis.append(x)
    return basis


def charpoly_int(M) -> list[int]:
    """Coefficients of ``det(xI - M)``, highest degree first.

    Faddeev-LeVerrier for small matrices (every division by k is exact over
    the integers); sympy's Berkowitz for larger ones.
    """
    a = to_int_rows(M)
    n = len(a)
    if n > _SMALL_CHARPOLY:
        dm = DomainMatrix([[sympy.ZZ(v) for v in row] for row in a], (n, n), sympy.ZZ)
        return [int(c) for c in dm.charpoly()]
    coeffs = [1]
    Mk = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # Mk <- A Mk + c I
        prod = [[sum(a[i][t] * Mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            prod[i][i] += c
        Mk = prod
        tr = sum(sum(a[i][t] * Mk[t][i] for t in range(n)) for i in range(n))
        if tr % k:
            raise ArithmeticError("inexact trace division in Faddeev-LeVerrier")
        c = -tr // k
        coeffs.append(c)
    return coeffs


def _charpoly_bound_ok(n: int, amax: int) -> bool:
    # |c_k| <= 2^n (n amax)^n and the iterates A M_k are bounded by a further
    # factor n amax; (2 n amax + 2)^(n + 2) dominates both.
    return (n + 2) * np.log2(2 * n * max(amax, 1) + 2) < 62


def charpoly_batch(mats: np.ndarray) -> np.ndarray:
    """Characteristic polynomials of a stack of integer matrices.

    Returns an array of shape ``(batch, n + 1)`` of coefficients, highest
    degree first. Uses vectorised Faddeev-LeVerrier in ``int64`` when the
    coefficient bound allows, otherwise falls back to exact Python ints.
    """
    mats = np.asarray(mats)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("expected an array of square matrices")
    b, n, _ = mats.shape
    amax = int(np.abs(mats).max()) if mats.size else 0
    if not _charpoly_bound_ok(n, amax):
        return np.array([charpoly_int(M) for M in mats], dtype=object)
    A = mats.astype(np.int64)
    eye = np.eye(n, dtype=np.int64)
    out = np.empty((b, n + 1), dtype=np.int64)
    out[:, 0] = 1
    Mk = np.zeros_like(A)
    c = np.ones(b, dtype=np.int64)
    for k in range(1, n + 1):
        Mk = A @ Mk + c[:, None, None] * eye
        tr = np.einsum("bij,bji->b", A, Mk)
        if np.any(tr % k):
            raise ArithmeticError("inexact trace division in Faddeev-LeVerrier")
        c = -(tr // k)
        out[:, k] = c
    return out


def poly_divide_linear(coeffs: Sequence[int], r: int) -> tuple[list[int], int]:
    """Synthetic division by ``(x - r)``: returns (quotient, remainder)."""
    q = []
    acc = 0
    for c in coeffs:
        acc = acc * r + c
        q.append(acc)
    rem = q.pop()
    return q, rem


def root_multiplicity(coeffs: Sequence[int], r: int) -> int:
    """Multiplicity of the integer root r of an integer polynomial."""
    cur = list(coeffs)
    k = 0
    while len(cur) > 1:
        q, rem = poly_divide_linear(cur, r)
        if rem != 0:
            break
        cur = q
        k += 1
    return k


def zero_root_multiplicity(coeffs: Sequence[int]) -> int:
    k = 0
    for c in reversed(coeffs):
        if c != 0:
            break
        k += 1
    return k


_X = sympy.Symbol("x")


def _irreducible_factors(coeffs: tuple[int, ...]) -> list[sympy.Poly]:
    poly = sympy.Poly(list(coeffs), _X, domain="ZZ")
    _, facs = poly.factor_list()
    out = []
    for f, _e in facs:
        if f.LC() < 0:
            f = -f
        out.append(f)
    return out


def _is_dilated_cyclotomic(f: sympy.Poly, m: int) -> bool:
    """Whether every root of f has the form ``m * (root of unity)``."""
    d = f.degree()
    scaled = []
    for i, c in enumerate(f.all_coeffs()):
        # coefficient of x^(d-i) in f(m x) / m^d
        num = int(c) * m ** (d - i)
        den = m**d
        if num % den:
            return False
        scaled.append(num // den)
    return sympy.Poly(scaled, _X, domain="ZZ").is_cyclotomic


@lru_cache(maxsize=200_000)
def _intermediate_cached(coeffs: tuple[int, ...], m: int) -> bool:
    for f in _irreducible_factors(coeffs):
        if f.degree() == 0:
            continue
        if f.degree() == 1 and f.all_coeffs()[1] == 0:
            continue  # the factor x
        if f.is_cyclotomic:
            continue
        if _is_dilated_cyclotomic(f, m):
            continue
        return True
    return False


def has_intermediate_root(coeffs: Sequence[int], m: int) -> bool:
    """Exact test for a root z with ``1 < |z| < m``.

    ``coeffs`` must be the characteristic polynomial of a nonnegative integer
    matrix with spectral radius m (all row sums m). Each irreducible factor
    over Z is either ``x``, cyclotomic (roots of modulus 1), ``m``-dilated
    cyclotomic (the peripheral spectrum), or else it has a root strictly
    between: a monic integer factor with all roots in the closed unit disc
    and nonzero constant term is cyclotomic, and the only roots of modulus
    m are m times roots of unity.
    """
    return _intermediate_cached(tuple(int(c) for c in coeffs), int(m))


def product_of_cyclotomics(coeffs: Sequence[int]) -> bool:
    """Whether every irreducible factor of the polynomial is cyclotomic."""
    for f in _irreducible_factors(tuple(int(c) for c in coeffs)):
        if f.degree() == 0:
            continue
        if not f.is_cyclotomic:
            return False
    return True
