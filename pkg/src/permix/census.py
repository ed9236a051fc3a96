"""Counting over S_N: non-mixing proportions, slowdown censuses, bounds.

Sweeps enumerate S_N in lexicographic order, split into chunks by the
first one or two images so that they can be farmed out to worker
processes; partial counts are merged by summation. Monte Carlo estimates
draw permutations with the PCG64 generator in fixed blocks of
``MC_BLOCK`` samples, block ``b`` seeded from ``SeedSequence([seed, b])``,
so the result does not depend on how many workers run.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional

import mpmath
import numpy as np

from . import exact
from .permcore import MapFamily, Permutation, classify_mixing_oracle, delta, is_nonmixing_fast, subshift_witness_count
from .specmat import EXACT_SCREEN, UNIT_TOL, build_A

__all__ = [
    "BRUTE_CAP",
    "BRUTE_CAP_LONG",
    "CENSUS_CAP",
    "MC_BLOCK",
    "Method",
    "CensusRow",
    "MCEstimate",
    "permutation_chunks",
    "iter_chunk",
    "p_exact_bruteforce",
    "p_closed_form",
    "b_j_exact",
    "p_upper_bound_sum",
    "bj_lemma_bound",
    "asymp_bound",
    "asymp_large_m",
    "batch_lambda",
    "batch_slow",
    "slowdown_census",
    "max_lambda",
    "mc_slowdown",
    "sample_permutations",
    "subshift_census",
    "rows_to_csv",
]

BRUTE_CAP = 10
BRUTE_CAP_LONG = 12
CENSUS_CAP = 8
CENSUS_CAP_LONG = 10
MC_BLOCK = 1000
_BATCH = 4096


class Method(str, Enum):
    EXHAUSTIVE = "Exhaustive"
    CLOSED_FORM = "ClosedForm"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class CensusRow:
    """One row of a census table.

    ``slow_count`` counts sigma whose rate exceeds ``1/m`` (``None`` where
    not computed); ``witness_count`` is used by the subshift census only.
    """

    m: int
    N: int
    total: int
    nonmixing_count: Optional[int]
    slow_count: Optional[int]
    method: Method
    witness_count: Optional[int] = None
    runtime: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("nonmixing_count", "slow_count", "witness_count"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= self.total:
                raise ValueError(f"{name}={v} outside [0, {self.total}]")

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "m": self.m,
            "N": self.N,
            "total": self.total,
            "nonmixing_count": self.nonmixing_count,
            "slow_count": self.slow_count,
            "method": self.method.value,
        }
        if self.witness_count is not None:
            d["witness_count"] = self.witness_count
        if timing and self.runtime is not None:
            d["runtime"] = self.runtime
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing))

    @classmethod
    def from_dict(cls, d: dict) -> "CensusRow":
        return cls(
            m=d["m"],
            N=d["N"],
            total=d["total"],
            nonmixing_count=d.get("nonmixing_count"),
            slow_count=d.get("slow_count"),
            method=Method(d["method"]),
            witness_count=d.get("witness_count"),
            runtime=d.get("runtime"),
        )


@dataclass(frozen=True)
class MCEstimate:
    samples: int
    hits: int
    proportion: float
    std_error: float
    seed: int
    m: int = 0
    N: int = 0
    runtime: Optional[float] = field(default=None, compare=False)

    @classmethod
    def from_hits(cls, samples: int, hits: int, seed: int, m: int = 0, N: int = 0, runtime=None) -> "MCEstimate":
        p = hits / samples
        return cls(samples, hits, p, math.sqrt(p * (1 - p) / samples), seed, m, N, runtime)

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "m": self.m,
            "N": self.N,
            "samples": self.samples,
            "hits": self.hits,
            "proportion": self.proportion,
            "std_error": self.std_error,
            "seed": self.seed,
            "method": Method.MONTE_CARLO.value,
        }
        if timing and self.runtime is not None:
            d["runtime"] = self.runtime
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing))

    @classmethod
    def from_dict(cls, d: dict) -> "MCEstimate":
        return cls(
            d["samples"], d["hits"], d["proportion"], d["std_error"], d["seed"],
            d.get("m", 0), d.get("N", 0), d.get("runtime"),
        )


def rows_to_csv(rows: Iterable[tuple]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def permutation_chunks(N: int) -> list[tuple[int, ...]]:
    """Prefixes that split S_N into lexicographically ordered chunks."""
    if N <= 2:
        return [()]
    depth = 1 if N <= 6 else 2
    return list(itertools.permutations(range(N), depth))


def iter_chunk(N: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All permutations of ``range(N)`` starting with ``prefix``, in
    lexicographic order."""
    rest = [i for i in range(N) if i not in prefix]
    for tail in itertools.permutations(rest):
        yield prefix + tail


def _map_chunks(fn: Callable, args: list[tuple], workers: Optional[int]) -> list:
    if workers is None or workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args)))


# ---------------------------------------------------------------------------
# Non-mixing proportions
# ---------------------------------------------------------------------------

def _count_nonmixing_chunk(N: int, m: int, prefix: tuple[int, ...]) -> int:
    d = delta(m, N).images
    return sum(1 for p in iter_chunk(N, prefix) if is_nonmixing_fast(p, d, m))


def p_exact_bruteforce(ell: int, m: int, long_run: bool = False, workers: Optional[int] = None) -> Fraction:
    """Proportion of sigma in ``S_{m ell}`` for which ``sigma o f`` is not
    mixing, by exhaustive sweep.

    Raises
    ------
    ValueError
        If ``m * ell`` exceeds the cap (10, or 12 with ``long_run``).
    """
    if ell < 1 or m < 2:
        raise ValueError("need ell >= 1 and m >= 2")
    N = m * ell
    cap = BRUTE_CAP_LONG if long_run else BRUTE_CAP
    if N > cap:
        raise ValueError(f"N = {N} exceeds the sweep cap {cap}; use the long-run flag")
    if ell == 1:
        return Fraction(0)
    counts = _map_chunks(_count_nonmixing_chunk, [(N, m, p) for p in permutation_chunks(N)], workers)
    return Fraction(sum(counts), math.factorial(N))


def _multinomial(n: int, parts: Iterable[int]) -> int:
    out = math.factorial(n)
    for r in parts:
        out //= math.factorial(r)
    return out


def p_closed_form(ell: int, m: int) -> Fraction:
    """Closed form of the non-mixing proportion for ``ell <= 4``."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if ell == 1:
        return Fraction(0)
    if ell == 2:
        return Fraction(1, math.comb(2 * m - 1, m))
    if ell == 3:
        return Fraction(1, math.comb(3 * m - 1, 2 * m))
    if ell == 4:
        c2 = math.comb(2 * m, m)
        num = 4 * _multinomial(3 * m, (m, m, m)) + 6 * c2 * c2 - 12 * c2
        return Fraction(num * math.factorial(m) ** 4, math.factorial(4 * m))
    raise ValueError("closed form only available for ell in {1, 2, 3, 4}")


def _partitions(n: int, k: int, lo: int = 1) -> Iterator[tuple[int, ...]]:
    """Nondecreasing k-tuples of integers >= lo summing to n."""
    if k == 1:
        if n >= lo:
            yield (n,)
        return
    for r in range(lo, n // k + 1):
        for rest in _partitions(n - r, k - 1, r):
            yield (r,) + rest


def b_j_exact(ell: int, m: int, j: int) -> Fraction:
    """``sum over 1 <= r_1 <= ... <= r_j, sum r = ell`` of
    ``multinom(ell; r) / multinom(m ell; m r)``."""
    if not 1 <= j <= ell:
        return Fraction(0)
    total = Fraction(0)
    for r in _partitions(ell, j):
        total += Fraction(_multinomial(ell, r), _multinomial(m * ell, [m * x for x in r]))
    return total


def p_upper_bound_sum(ell: int, m: int) -> Fraction:
    return sum((b_j_exact(ell, m, j) for j in range(2, ell + 1)), Fraction(0))


def bj_lemma_bound(ell: int, m: int, j: int) -> mpmath.mpf:
    """``(2e/ell)^((m-1)(j-1))`` in high precision."""
    with mpmath.workdps(50):
        return (2 * mpmath.e / ell) ** ((m - 1) * (j - 1))


def asymp_bound(ell: int, m: int) -> float:
    """``11 (2e/ell)^(m-1)``, an upper bound on the non-mixing proportion
    for ``ell >= 6``."""
    if ell < 6:
        raise ValueError("the bound is stated for ell >= 6")
    return 11 * (2 * math.e / ell) ** (m - 1)


def asymp_large_m(ell: int, m: int) -> float:
    """Leading behaviour of the non-mixing proportion as m grows:
    ``sqrt(2 pi (ell-1) ell m) * rho^m`` with
    ``rho = (ell-1)^(ell-1) / ell^ell``.

    It comes from the dominant decomposition, one block of size m against
    one of size ``(ell-1) m``, through Stirling's formula.
    """
    if ell < 2:
        raise ValueError("need ell >= 2")
    log_rho = (ell - 1) * math.log(ell - 1) - ell * math.log(ell)
    return math.sqrt(2 * math.pi * (ell - 1) * ell * m) * math.exp(m * log_rho)


# ---------------------------------------------------------------------------
# Rates in bulk
# ---------------------------------------------------------------------------

def _matrices(perms: np.ndarray, A: np.ndarray) -> np.ndarray:
    # A P(sigma) = A[:, sigma^{-1}]
    b, N = perms.shape
    inv = np.empty_like(perms)
    inv[np.arange(b)[:, None], perms] = np.arange(N)
    return np.moveaxis(A[:, inv], 1, 0)


def batch_lambda(perms: np.ndarray, m: int, tol: float = UNIT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Floating-point rates for a stack of permutations.

    Returns ``(lam, mats)`` where ``mats`` are the integer matrices
    ``A P(sigma)``.
    """
    perms = np.asarray(perms, dtype=np.int64)
    A = build_A(m, perms.shape[1])
    mats = _matrices(perms, A)
    mod = np.abs(np.linalg.eigvals(mats / m))
    mod = np.where(mod < 1.0 - tol, mod, -1.0)
    return np.maximum(mod.max(axis=1), 0.0), mats


def batch_slow(perms: np.ndarray, m: int, tol: float = UNIT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Which permutations make the rate exceed ``1/m``.

    Rates clear of ``1/m`` by more than the screening margin are decided in
    floating point; the rest by exact factorisation of the characteristic
    polynomial. Returns ``(slow, lam)``.
    """
    lam, mats = batch_lambda(perms, m, tol)
    slow = lam > 1.0 / m + tol
    near = np.nonzero(np.abs(lam - 1.0 / m) <= EXACT_SCREEN)[0]
    if near.size:
        cps = exact.charpoly_batch(mats[near])
        for k, cp in zip(near, cps):
            s = exact.has_intermediate_root(tuple(int(c) for c in cp), m)
            slow[k] = s
            if not s and lam[k] > 1.0 / m:
                lam[k] = 1.0 / m
    return slow, lam


def _census_chunk(N: int, m: int, tol: float, prefix: tuple[int, ...]) -> tuple[int, int, float]:
    perms = np.array(list(iter_chunk(N, prefix)), dtype=np.int64)
    slow_total = 0
    lam_max = 0.0
    for start in range(0, len(perms), _BATCH):
        slow, lam = batch_slow(perms[start:start + _BATCH], m, tol)
        slow_total += int(slow.sum())
        lam_max = max(lam_max, float(lam.max()))
    nonmix = 0
    if N % m == 0 and N // m > 1:
        d = delta(m, N).images
        nonmix = sum(1 for p in perms.tolist() if is_nonmixing_fast(p, d, m))
    return slow_total, nonmix, lam_max


def _sweep(m: int, N: int, tol: float, long_run: bool, workers: Optional[int]):
    if m < 2 or N < 1:
        raise ValueError("need m >= 2 and N >= 1")
    cap = CENSUS_CAP_LONG if long_run else CENSUS_CAP
    if N > cap:
        raise ValueError(f"N = {N} exceeds the census cap {cap}; use the long-run flag")
    args = [(N, m, tol, p) for p in permutation_chunks(N)]
    return _map_chunks(_census_chunk, args, workers)


def slowdown_census(
    m: int, N: int, tol: float = UNIT_TOL, long_run: bool = False, workers: Optional[int] = None
) -> CensusRow:
    """Exhaustive count of sigma in S_N with rate above ``1/m``, together
    with the number of non-mixing sigma."""
    t0 = time.perf_counter()
    parts = _sweep(m, N, tol, long_run, workers)
    return CensusRow(
        m=m,
        N=N,
        total=math.factorial(N),
        nonmixing_count=sum(p[1] for p in parts),
        slow_count=sum(p[0] for p in parts),
        method=Method.EXHAUSTIVE,
        runtime=time.perf_counter() - t0,
    )


def max_lambda(m: int, N: int, tol: float = UNIT_TOL, long_run: bool = False, workers: Optional[int] = None) -> float:
    """Largest rate over all of S_N."""
    return max(p[2] for p in _sweep(m, N, tol, long_run, workers))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def sample_permutations(N: int, count: int, seed: int, block: int) -> np.ndarray:
    """``count`` uniform permutations of ``range(N)`` from block ``block``.

    Generator: numpy PCG64 seeded with ``SeedSequence([seed, block])``.
    Each row is a Fisher-Yates shuffle of the identity, the swap index at
    step i drawn by ``Generator.integers(0, i + 1)``.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    perms = np.tile(np.arange(N, dtype=np.int64), (count, 1))
    rows = np.arange(count)
    for i in range(N - 1, 0, -1):
        j = rng.integers(0, i + 1, size=count)
        tmp = perms[rows, i].copy()
        perms[rows, i] = perms[rows, j]
        perms[rows, j] = tmp
    return perms


def _mc_block(m: int, N: int, seed: int, block: int, count: int, tol: float) -> int:
    slow, _ = batch_slow(sample_permutations(N, count, seed, block), m, tol)
    return int(slow.sum())


def mc_slowdown(
    m: int, N: int, samples: int, seed: int, tol: float = UNIT_TOL, workers: Optional[int] = None
) -> MCEstimate:
    """Estimate the proportion of S_N with rate above ``1/m``."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    t0 = time.perf_counter()
    nblocks = -(-samples // MC_BLOCK)
    args = [
        (m, N, seed, b, min(MC_BLOCK, samples - b * MC_BLOCK), tol)
        for b in range(nblocks)
    ]
    hits = sum(_map_chunks(_mc_block, args, workers))
    return MCEstimate.from_hits(samples, hits, seed, m, N, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Subshift
# ---------------------------------------------------------------------------

def _subshift_chunk(ell: int, prefix: tuple[int, ...]) -> tuple[int, int]:
    fam = MapFamily.subshift(ell)
    nonmix = wit = 0
    for p in iter_chunk(2 * ell, prefix):
        if any(p[j - ell] == j for j in range(ell, 2 * ell)):
            wit += 1
            nonmix += 1  # a witness forces non-mixing
        elif not classify_mixing_oracle(Permutation(p), fam).mixing:
            nonmix += 1
    return nonmix, wit


def subshift_census(ell: int, long_run: bool = False, workers: Optional[int] = None) -> CensusRow:
    """Exhaustive non-mixing count for the permuted subshift map on
    ``2 ell`` cells, with the number of permutations carrying an explicit
    witness.

    A witness is a ``j >= ell`` with ``sigma(j - ell) = j``; the cell
    ``I_j`` then maps onto itself and the composite cannot mix.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    cap = BRUTE_CAP_LONG if long_run else BRUTE_CAP
    if 2 * ell > cap:
        raise ValueError(f"2 ell = {2 * ell} exceeds the cap {cap}")
    t0 = time.perf_counter()
    parts = _map_chunks(_subshift_chunk, [(ell, p) for p in permutation_chunks(2 * ell)], workers)
    total = math.factorial(2 * ell)
    wit = sum(p[1] for p in parts)
    if Fraction(wit, total) != subshift_witness_count(ell):
        raise AssertionError("witness count disagrees with inclusion-exclusion")
    return CensusRow(
        m=2,
        N=2 * ell,
        total=total,
        nonmixing_count=sum(p[0] for p in parts),
        slow_count=None,
        method=Method.EXHAUSTIVE,
        witness_count=wit,
        runtime=time.perf_counter() - t0,
    )
