"""Acceptance suite: numbered end-to-end checks of the package.

Each criterion returns a :class:`CriterionResult` made of named sub-checks.
Expected values are the published ones, asserted as published, so a
criterion fails when a published number cannot be reproduced.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath
import numpy as np

from . import census, exact, specmat
from .permcore import Permutation, classify_mixing_fast, delta, is_nonmixing_fast, subshift_witness_count

__all__ = ["Check", "CriterionResult", "CRITERIA", "run_criterion", "run_all", "format_line"]

DEFAULT_SEED = 20240101


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    runtime: float = 0.0
    budget: Optional[float] = None

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.runtime <= self.budget

    @property
    def passed(self) -> bool:
        return self.within_budget and all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        out = [c for c in self.checks if not c.passed]
        if not self.within_budget:
            out.append(Check("runtime", False, f"{self.runtime:.1f}s > {self.budget:.0f}s"))
        return out

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def format_line(r: CriterionResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    line = f"{status} criterion {r.number:2d}: {r.title} ({len(r.checks)} checks, {r.runtime:.1f}s)"
    bad = r.failures()
    if bad:
        line += " | failed: " + "; ".join(f"{c.name} [{c.detail}]" for c in bad[:5])
        if len(bad) > 5:
            line += f"; ... {len(bad) - 5} more"
    return line


# ---------------------------------------------------------------------------

TABLE1 = {
    (2, 3): 0, (3, 3): 0, (4, 3): 0,
    (2, 4): 0, (3, 4): 0, (4, 4): 0,
    (2, 6): 0, (3, 6): 0, (4, 6): 144,
    (2, 8): 16890, (3, 8): 35152, (4, 8): 18432,
}


def criterion_1(workers=None, **_) -> CriterionResult:
    res = CriterionResult(1, "exhaustive slowdown counts", budget=15 * 60)
    for (m, N), want in TABLE1.items():
        got = census.slowdown_census(m, N, workers=workers).slow_count
        res.checks.append(Check(f"(m={m},N={N})", got == want, f"got {got}, expected {want}"))
    return res


def criterion_2(workers=None, long_run=False, **_) -> CriterionResult:
    res = CriterionResult(2, "non-mixing proportions", budget=None if long_run else 5 * 60)
    published = {(2, 2): Fraction(1, 3), (3, 2): Fraction(1, 5), (4, 2): Fraction(1, 5)}
    for (ell, m), want in published.items():
        brute = census.p_exact_bruteforce(ell, m, workers=workers)
        closed = census.p_closed_form(ell, m)
        res.checks.append(Check(f"p({ell},{m})", brute == closed == want, f"sweep {brute}, closed {closed}, expected {want}"))
    for ell, m, want in [(2, 3, Fraction(1, 10)), (3, 3, Fraction(1, 28))]:
        brute = census.p_exact_bruteforce(ell, m, workers=workers)
        closed = census.p_closed_form(ell, m)
        res.checks.append(Check(f"p({ell},{m})", brute == closed == want, f"sweep {brute}, closed {closed}"))
    closed = census.p_closed_form(4, 3)
    res.checks.append(Check("p(4,3) closed", closed == Fraction(37, 1540), f"closed {closed}"))
    if long_run:
        brute = census.p_exact_bruteforce(4, 3, long_run=True, workers=workers)
        res.checks.append(Check("p(4,3) sweep", brute == closed, f"sweep {brute}"))
    return res


WORST_CASES = [(2, 3), (2, 5), (2, 7), (3, 4), (3, 5), (3, 7), (3, 8), (4, 5), (4, 7)]


def criterion_3(workers=None, **_) -> CriterionResult:
    res = CriterionResult(3, "worst rate over S_N")
    for m, N in WORST_CASES:
        bound = specmat.worst_rate_bound(m, N)
        sweep = census.max_lambda(m, N, workers=workers)
        tau = specmat.worst_permutation(m, N)
        attained = specmat.lambda_sigma(tau, m).lambda_sigma
        res.checks.append(Check(f"max (m={m},N={N})", abs(sweep - bound) <= 1e-8, f"max {sweep:.15f}, bound {bound:.15f}"))
        res.checks.append(Check(f"tau (m={m},N={N})", abs(attained - bound) <= 1e-10, f"tau={tau} gives {attained:.15f}"))
    return res


def criterion_4(**_) -> CriterionResult:
    res = CriterionResult(4, "worst rate asymptotics in N")
    m, N = 2, 201
    gap = 1 - specmat.worst_rate_bound(m, N)
    approx = math.pi**2 * (m * m - 1) / (6 * N * N)
    rel = abs(gap - approx) / approx
    res.checks.append(Check(f"(m={m},N={N})", rel <= 0.02, f"1-bound {gap:.6e}, approx {approx:.6e}, rel {rel:.2e}"))
    return res


def criterion_5(workers=None, seed=DEFAULT_SEED, samples=10_000, **_) -> CriterionResult:
    res = CriterionResult(5, "sampled slowdown proportions", budget=20 * 60)
    e = census.mc_slowdown(2, 8, samples, seed, workers=workers)
    target = 16890 / 40320
    res.checks.append(Check("(m=2,N=8)", abs(e.proportion - target) <= 4 * e.std_error,
                            f"p={e.proportion:.4f}, se={e.std_error:.4f}, target {target:.4f}"))
    for m, N, target, band in [(2, 30, 0.958, 0.02), (2, 50, 0.984, 0.015)]:
        e = census.mc_slowdown(m, N, samples, seed, workers=workers)
        res.checks.append(Check(f"(m={m},N={N})", abs(e.proportion - target) <= band,
                                f"p={e.proportion:.4f}, se={e.std_error:.4f}, target {target}+-{band}"))
    e = census.mc_slowdown(3, 30, samples, seed, workers=workers)
    res.checks.append(Check("(m=3,N=30)", e.proportion + 4 * e.std_error >= 0.999,
                            f"p={e.proportion:.4f}, se={e.std_error:.4f}, need >= 0.999"))
    return res


def spectral_disagreements(m: int, N: int, tol: float = specmat.UNIT_TOL) -> tuple[int, int]:
    """Compare the combinatorial mixing verdict with "1 is the only
    eigenvalue on the unit circle, and it is simple" over all of S_N.

    Returns ``(disagreements, total)``.
    """
    perms = np.array(list(itertools.permutations(range(N))), dtype=np.int64)
    mats = census._matrices(perms, specmat.build_A(m, N)) / m
    ev = np.linalg.eigvals(mats)
    spectral_mixing = (np.abs(np.abs(ev) - 1) < tol).sum(axis=1) == 1
    if N % m == 0 and N > m:
        d = delta(m, N).images
        comb_mixing = np.array([not is_nonmixing_fast(p, d, m) for p in perms.tolist()])
    else:
        comb_mixing = np.ones(len(perms), dtype=bool)
    return int(np.count_nonzero(spectral_mixing != comb_mixing)), len(perms)


def criterion_6(**_) -> CriterionResult:
    res = CriterionResult(6, "spectral and combinatorial mixing agree")
    for m in (2, 3, 4):
        for N in range(2, 9):
            bad, total = spectral_disagreements(m, N)
            res.checks.append(Check(f"(m={m},N={N})", bad == 0, f"{bad} of {total} disagree"))
    return res


def criterion_7(**_) -> CriterionResult:
    res = CriterionResult(7, "circulant eigenvalues and determinant")
    worst = 0.0
    bad_eig = []
    bad_det = []
    for N in range(3, 65):
        for m in range(2, N):
            C = specmat.build_C(m, N)
            d = specmat.match_spectra(np.linalg.eigvals(C.astype(float)), specmat.circulant_eigs(m, N))
            worst = max(worst, d)
            if d > 1e-9:
                bad_eig.append((m, N))
            det = exact.det_int(C)
            want = m if math.gcd(m, N) == 1 else 0
            if abs(det) != want:
                bad_det.append((m, N, det))
    res.checks.append(Check("eigenvalues", not bad_eig, f"max deviation {worst:.2e}; failing {bad_eig[:5]}"))
    res.checks.append(Check("determinants", not bad_det, f"failing {bad_det[:5]}"))
    return res


def criterion_8(seed=DEFAULT_SEED, cases=500, **_) -> CriterionResult:
    res = CriterionResult(8, "reduction from Nm to N cells")
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad_spec = []
    bad_zero = []
    exact_runs = 0
    for _ in range(cases):
        m = int(rng.integers(2, 9))
        N = int(rng.integers(2, 256 // m + 1))
        sigma = Permutation(tuple(int(x) for x in rng.permutation(N)))
        BQ = specmat.build_B(m, N) @ specmat.build_Q(sigma, m)
        AP = specmat.transition_matrix(sigma, m)
        zb, eb = specmat.split_zero_cluster(np.linalg.eigvals(BQ / m))
        za, ea = specmat.split_zero_cluster(np.linalg.eigvals(AP / m))
        d = specmat.match_spectra(eb, ea)
        worst = max(worst, d)
        if d > 1e-8 or zb != za + N * (m - 1):
            bad_spec.append((m, N, zb, za))
        if N * m <= 64:
            exact_runs += 1
            z_big = exact.zero_root_multiplicity(exact.charpoly_int(BQ))
            z_small = exact.zero_root_multiplicity(exact.charpoly_int(AP))
            want = N * (m - 1) + z_small  # z_small = 0 when gcd(m, N) = 1
            if z_big != want or (math.gcd(m, N) == 1 and z_big != N * (m - 1)):
                bad_zero.append((m, N, z_big, want))
    res.checks.append(Check("nonzero spectra", not bad_spec, f"{cases} cases, max deviation {worst:.2e}"))
    res.checks.append(Check("zero multiplicity", not bad_zero, f"{exact_runs} exact cases; failing {bad_zero[:5]}"))
    return res


def criterion_9(workers=None, **_) -> CriterionResult:
    res = CriterionResult(9, "subshift map")
    model = specmat.subshift_model()
    zeros = specmat.fredholm_zeros(model)
    ok = len(zeros) == 2 and abs(zeros[0] - 1) <= 1e-12 and abs(zeros[1] + 2) <= 1e-12
    res.checks.append(Check("Fredholm zeros", ok, f"{zeros}"))
    rho = specmat.invariant_density(model)
    res.checks.append(Check("density", rho == (Fraction(4, 3), Fraction(2, 3)), f"{rho}"))
    r_ess, h = specmat.r_ess_and_entropy(model)
    res.checks.append(Check("r_ess", abs(r_ess - 2 ** (-2 / 3)) <= 1e-12, f"{r_ess!r}"))
    res.checks.append(Check("entropy", abs(h - math.log((1 + math.sqrt(5)) / 2)) <= 1e-12, f"{h!r}"))
    for ell in (1, 2, 3, 4):
        row = census.subshift_census(ell, workers=workers)
        nonmix = Fraction(row.nonmixing_count, row.total)
        wit = Fraction(row.witness_count, row.total)
        closed = subshift_witness_count(ell)
        ok = nonmix >= wit > Fraction(3, 8) and wit == closed
        res.checks.append(Check(f"ell={ell}", ok, f"non-mixing {nonmix}, witness {wit}, closed {closed}"))
    return res


def _le(frac: Fraction, bound, slack=mpmath.mpf("1e-15")) -> bool:
    with mpmath.workdps(50):
        return mpmath.mpf(frac.numerator) / frac.denominator <= bound * (1 + slack)


def criterion_10(**_) -> CriterionResult:
    res = CriterionResult(10, "upper bound chain")
    for ell in (2, 3, 4):
        m = 2
        p = census.p_closed_form(ell, m)
        s = census.p_upper_bound_sum(ell, m)
        with mpmath.workdps(50):
            top = 11 * (2 * mpmath.e / ell) ** (m - 1)
        res.checks.append(Check(f"ell={ell}", p <= s and _le(s, top), f"p={p}, sum b_j={s}"))
    for m in (2, 3, 4):
        ell = 6
        s = census.p_upper_bound_sum(ell, m)
        with mpmath.workdps(50):
            lemma_sum = sum(census.bj_lemma_bound(ell, m, j) for j in range(2, ell + 1))
            top = 11 * (2 * mpmath.e / ell) ** (m - 1)
        ok = _le(s, lemma_sum) and lemma_sum < top and abs(census.asymp_bound(ell, m) - float(top)) <= 1e-12 * float(top)
        res.checks.append(Check(f"ell=6,m={m}", ok, f"sum b_j={float(s):.6e}, lemma sum={float(lemma_sum):.6e}, 11(2e/6)^(m-1)={float(top):.6e}"))
    bad = []
    for m in (2, 3, 4):
        for ell in range(1, 21):
            for j in range(1, ell + 1):
                if not _le(census.b_j_exact(ell, m, j), census.bj_lemma_bound(ell, m, j)):
                    bad.append((ell, m, j))
    res.checks.append(Check("b_j lemma", not bad, f"failing {bad[:5]}"))
    return res


def criterion_11(seed=DEFAULT_SEED, **_) -> CriterionResult:
    res = CriterionResult(11, "density evolution rate")
    rng = np.random.default_rng(seed)
    cases = [(2, 5), (3, 5), (2, 7)]
    for k in range(20):
        m, N = cases[k % 3]
        sigma = Permutation(tuple(int(x) for x in rng.permutation(N)))
        if not classify_mixing_fast(sigma, m, N).mixing:
            raise AssertionError("gcd(m, N) = 1 composites are always mixing")
        lam = specmat.lambda_sigma(sigma, m).lambda_sigma
        obs = specmat.density_evolution_rate(sigma, m, seed=seed + k)
        rel = abs(obs - lam) / lam
        res.checks.append(Check(f"(m={m},N={N}) {sigma}", rel <= 0.05, f"observed {obs:.6f}, lambda {lam:.6f}"))
    return res


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(number: int, **kwargs) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number](**kwargs)
    res.runtime = time.perf_counter() - t0
    return res


def run_all(numbers=None, **kwargs) -> list[CriterionResult]:
    return [run_criterion(n, **kwargs) for n in (numbers or sorted(CRITERIA))]
