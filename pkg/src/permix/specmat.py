"""Transition and Fredholm matrices, spectra and mixing rates.

For ``g = sigma o f`` with ``f(x) = m x mod 1`` the Fredholm matrix at
``z = 1`` on the Markov partition into ``N m`` cells is
``B(m, N) Q(sigma) / m``. Its nonzero spectrum equals that of the
``N x N`` matrix ``A(m, N) P(sigma) / m``, which is what the rate routines
diagonalise.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import exact
from .permcore import Permutation, classify_mixing_fast

__all__ = [
    "MAX_DIM",
    "UNIT_TOL",
    "EXACT_SCREEN",
    "build_A",
    "build_B",
    "build_C",
    "build_P",
    "build_Q",
    "transition_matrix",
    "Spectrum",
    "eigen_spectrum",
    "cluster_eigenvalues",
    "match_spectra",
    "split_zero_cluster",
    "circulant_eigs",
    "circulant_max_modulus",
    "RateReport",
    "lambda_sigma",
    "lambda_from_eigenvalues",
    "decelerates_exact",
    "worst_permutation",
    "worst_rate_bound",
    "stochastic_eta",
    "FredholmModel",
    "multiply_model",
    "subshift_model",
    "subshift_permuted_model",
    "fredholm_matrix",
    "fredholm_determinant",
    "fredholm_zeros",
    "invariant_density",
    "NonErgodicError",
    "r_ess_and_entropy",
    "density_evolution_rate",
    "zeta_identity_check",
    "AlgebraicCheck",
    "algebraic_eigenvalue_check",
    "zero_eigenvalue_multiplicities",
    "matrix_to_csv",
]

#: Largest matrix dimension the builders will produce.
MAX_DIM = 4096
#: Eigenvalues with ``||lambda| - 1| < UNIT_TOL`` count as unit-circle.
UNIT_TOL = 1e-9
#: Floating-point rates this close to ``1/m`` are re-decided exactly.
EXACT_SCREEN = 1e-3


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _check_dim(dim: int) -> None:
    if dim > MAX_DIM:
        raise ValueError(f"matrix dimension {dim} exceeds MAX_DIM={MAX_DIM}")


def _run_matrix(m: int, size: int, mult: int) -> np.ndarray:
    # row i has ones (with multiplicity) at columns mult*i + d mod size, 0 <= d < m
    M = np.zeros((size, size), dtype=np.int64)
    rows = np.repeat(np.arange(size), m)
    cols = (mult * rows + np.tile(np.arange(m), size)) % size
    np.add.at(M, (rows, cols), 1)
    return M


def build_A(m: int, N: int) -> np.ndarray:
    """Transition matrix of ``x -> m x mod 1`` on N equal cells.

    Entry ``(i, j)`` counts how often ``f(I_i)`` covers ``I_j``; it is 0/1
    whenever ``m <= N``.
    """
    if m < 2 or N < 1:
        raise ValueError("need m >= 2 and N >= 1")
    _check_dim(N)
    return _run_matrix(m, N, m)


def build_B(m: int, N: int) -> np.ndarray:
    """Transition matrix of ``x -> m x mod 1`` on ``N m`` equal cells."""
    if m < 2 or N < 1:
        raise ValueError("need m >= 2 and N >= 1")
    _check_dim(N * m)
    return _run_matrix(m, N * m, m)


def build_C(m: int, N: int) -> np.ndarray:
    """Circulant with a run of m ones starting on the diagonal."""
    if m < 1 or m > N:
        raise ValueError("need 1 <= m <= N")
    _check_dim(N)
    return _run_matrix(m, N, 1)


def build_P(sigma: Permutation) -> np.ndarray:
    """``P[i, sigma(i)] = 1``."""
    _check_dim(sigma.n)
    P = np.zeros((sigma.n, sigma.n), dtype=np.int64)
    P[np.arange(sigma.n), list(sigma.images)] = 1
    return P


def build_Q(sigma: Permutation, m: int) -> np.ndarray:
    """``P(sigma)`` with every entry blown up to an ``m x m`` block."""
    _check_dim(sigma.n * m)
    return np.kron(build_P(sigma), np.eye(m, dtype=np.int64))


def transition_matrix(sigma: Permutation, m: int) -> np.ndarray:
    """``A(m, N) P(sigma)`` as an integer matrix (column permutation of A)."""
    A = build_A(m, sigma.n)
    return A[:, list(sigma.inverse().images)]


def matrix_to_csv(M) -> str:
    rows = np.asarray(M).tolist()
    return "\n".join(",".join(str(v) for v in r) for r in rows) + "\n"


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

def cluster_eigenvalues(values: Sequence[complex], radius: float) -> list[tuple[complex, int]]:
    """Single-linkage clusters of eigenvalues; each returned as
    ``(centroid, size)``.

    The centroid of a split multiple eigenvalue is accurate to roughly
    machine precision even when the individual members are not.
    """
    vals = np.asarray(values, dtype=complex).ravel()
    n = vals.size
    if n == 0:
        return []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.abs(vals[:, None] - vals[None, :]) <= radius
    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = [(complex(vals[idx].mean()), len(idx)) for idx in groups.values()]
    out.sort(key=lambda t: (-abs(t[0]), -t[0].real, -t[0].imag))
    return out


@dataclass(frozen=True)
class Spectrum:
    """Complex spectrum with multiplicities.

    ``eigenvalues`` holds ``(value, multiplicity)`` pairs, largest modulus
    first; ``raw`` keeps the unclustered solver output.
    """

    eigenvalues: tuple[tuple[complex, int], ...]
    tolerance: float
    unit_circle_count: int
    raw: tuple[complex, ...] = field(default=(), repr=False, compare=False)

    @property
    def dim(self) -> int:
        return sum(k for _, k in self.eigenvalues)

    def values(self) -> np.ndarray:
        return np.array([v for v, k in self.eigenvalues for _ in range(k)], dtype=complex)

    def to_dict(self, lambda_sigma: Optional[float] = None) -> dict:
        d = {
            "eigenvalues": [{"re": v.real, "im": v.imag, "mult": k} for v, k in self.eigenvalues],
            "unit_circle_count": self.unit_circle_count,
            "tolerance": self.tolerance,
        }
        if lambda_sigma is not None:
            d["lambda_sigma"] = lambda_sigma
        return d

    def to_json(self, lambda_sigma: Optional[float] = None) -> str:
        return json.dumps(self.to_dict(lambda_sigma))

    @classmethod
    def from_dict(cls, d: dict) -> "Spectrum":
        eig = tuple((complex(e["re"], e["im"]), int(e["mult"])) for e in d["eigenvalues"])
        return cls(eig, float(d.get("tolerance", UNIT_TOL)), int(d["unit_circle_count"]))


def eigen_spectrum(M, tol: float = UNIT_TOL, cluster_radius: float = 1e-6) -> Spectrum:
    """Full complex spectrum of a dense real matrix.

    Delegates to LAPACK ``geev`` (balancing, Hessenberg reduction, shifted
    QR). A failure to converge raises ``numpy.linalg.LinAlgError``.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix")
    _check_dim(arr.shape[0])
    raw = np.linalg.eigvals(arr)
    if not np.all(np.isfinite(raw)):
        raise np.linalg.LinAlgError("eigensolver returned non-finite values")
    clusters = cluster_eigenvalues(raw, cluster_radius)
    unit = int(np.count_nonzero(np.abs(np.abs(raw) - 1.0) < tol))
    return Spectrum(tuple(clusters), tol, unit, tuple(complex(v) for v in raw))


def match_spectra(a: Sequence[complex], b: Sequence[complex], cluster_radius: float = 1e-4) -> float:
    """Largest distance in an optimal one-to-one matching of two eigenvalue
    multisets (``inf`` if the sizes differ).

    Both sides are first replaced by their cluster centroids, so defective
    eigenvalues that the solver splits apart still compare tightly.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0

    def smooth(v):
        return np.array([c for c, k in cluster_eigenvalues(v, cluster_radius) for _ in range(k)])

    sa, sb = smooth(a), smooth(b)
    cost = np.abs(sa[:, None] - sb[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def split_zero_cluster(values: Sequence[complex], radius: float = 1e-2) -> tuple[int, np.ndarray]:
    """Separate the eigenvalues that scatter around 0 from the rest.

    A nilpotent Jordan block of size k comes back from the solver as a ring
    of radius about ``eps^(1/k)``, far wider than ordinary clustering
    tolerances. Returns ``(count, rest)`` where ``count`` eigenvalues lie
    within ``radius`` of 0.
    """
    vals = np.asarray(values, dtype=complex).ravel()
    small = np.abs(vals) < radius
    return int(np.count_nonzero(small)), vals[~small]


def circulant_eigs(m: int, N: int) -> list[complex]:
    """Closed-form eigenvalues ``sum_{t<m} w_j^t`` of ``C(m, N)``, j = 0..N-1."""
    if not 1 <= m <= N:
        raise ValueError("need 1 <= m <= N")
    out = []
    for j in range(N):
        w = cmath.exp(2j * math.pi * j / N)
        out.append(sum(w**t for t in range(m)))
    return out


def circulant_modulus(m: int, N: int, j: int) -> float:
    """``|sin(m j pi / N) / sin(j pi / N)|`` for ``1 <= j <= N - 1``."""
    return abs(math.sin(m * j * math.pi / N) / math.sin(j * math.pi / N))


def circulant_max_modulus(m: int, N: int) -> float:
    """Largest ``|lambda_j|`` of ``C(m, N)`` over j != 0, attained at j = 1."""
    if not 2 <= m < N:
        raise ValueError("need 2 <= m < N")
    return circulant_modulus(m, N, 1)


# ---------------------------------------------------------------------------
# Mixing rates
# ---------------------------------------------------------------------------

def lambda_from_eigenvalues(values, tol: float = UNIT_TOL) -> float:
    """Largest modulus strictly inside the unit circle (0 if none)."""
    mod = np.abs(np.asarray(values))
    inside = mod[mod < 1.0 - tol]
    return float(inside.max()) if inside.size else 0.0


def decelerates_exact(M_int, m: int) -> bool:
    """Whether ``A P`` has an eigenvalue with ``1 < |z| < m``, i.e. the rate
    of ``sigma o f`` is strictly slower than ``1/m``. Exact."""
    return exact.has_intermediate_root(exact.charpoly_int(M_int), m)


@dataclass(frozen=True)
class RateReport:
    """Spectral summary of ``sigma o f``.

    ``lambda_sigma`` is the largest eigenvalue modulus of the Fredholm
    matrix strictly inside the unit circle; ``decelerates`` is the exact
    answer to ``lambda_sigma > 1/m``.
    """

    lambda_sigma: float
    spectral_mixing: bool
    r_ess: float
    eigenvalue_1_multiplicity: int
    unit_circle_count: int
    decelerates: bool
    m: int
    N: int

    @property
    def ergodic(self) -> bool:
        return self.eigenvalue_1_multiplicity == 1

    def to_dict(self) -> dict:
        return {
            "lambda_sigma": self.lambda_sigma,
            "spectral_mixing": self.spectral_mixing,
            "r_ess": self.r_ess,
            "eigenvalue_1_multiplicity": self.eigenvalue_1_multiplicity,
            "unit_circle_count": self.unit_circle_count,
            "decelerates": self.decelerates,
            "m": self.m,
            "N": self.N,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RateReport":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def lambda_sigma(sigma: Permutation, m: int, tol: float = UNIT_TOL) -> RateReport:
    """Mixing rate of ``sigma o (m x mod 1)`` from the ``N x N`` reduction.

    The multiplicity of eigenvalue 1 is the exact rational nullity of
    ``m I - A P``. Whether the rate exceeds ``1/m`` is decided in floating
    point when the margin is comfortable and exactly (integer
    characteristic polynomial) otherwise.
    """
    N = sigma.n
    M = transition_matrix(sigma, m)
    spec = eigen_spectrum(M / m, tol)
    lam = lambda_from_eigenvalues(spec.raw, tol)
    mult1 = N - exact.rank_exact(m * np.eye(N, dtype=np.int64) - M)
    if abs(lam - 1.0 / m) <= EXACT_SCREEN:
        slow = decelerates_exact(M, m)
        if not slow and lam > 1.0 / m:
            lam = 1.0 / m  # a split eigenvalue of modulus exactly 1/m
    else:
        slow = lam > 1.0 / m + tol
    return RateReport(
        lambda_sigma=lam,
        spectral_mixing=spec.unit_circle_count == 1 and mult1 == 1,
        r_ess=1.0 / m,
        eigenvalue_1_multiplicity=mult1,
        unit_circle_count=spec.unit_circle_count,
        decelerates=slow,
        m=m,
        N=N,
    )


def worst_permutation(m: int, N: int) -> Permutation:
    """The permutation ``i -> m^{-1} i mod N``.

    It satisfies ``P(tau) A(m, N) = C(m, N)``, so ``A P(tau) / m`` is
    conjugate to the circulant ``C(m, N) / m`` and attains the worst rate.
    """
    if math.gcd(m, N) != 1:
        raise ValueError(f"gcd({m}, {N}) > 1")
    inv = pow(m, -1, N)
    tau = Permutation(tuple(inv * i % N for i in range(N)))
    if not np.array_equal(build_P(tau) @ build_A(m, N), build_C(m, N)):
        raise AssertionError("row permutation does not turn A into C")
    return tau


def worst_rate_bound(m: int, N: int) -> float:
    """``|sin(pi m / N) / (m sin(pi / N))|``, the slowest rate over S_N."""
    if math.gcd(m, N) != 1:
        raise ValueError(f"gcd({m}, {N}) > 1")
    if N <= m:
        raise ValueError("need N > m")
    return abs(math.sin(math.pi * m / N) / (m * math.sin(math.pi / N)))


def stochastic_eta(B) -> float:
    """Largest value of ``(B x, B x)`` over unit x orthogonal to the ones
    vector, for a column-stochastic B."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if B.ndim != 2 or B.shape[1] != n:
        raise ValueError("expected a square matrix")
    if np.any(B < -1e-12) or np.max(np.abs(B.sum(axis=0) - 1.0)) > 1e-12:
        raise ValueError("matrix is not column stochastic")
    if n == 1:
        return 0.0
    basis = scipy.linalg.null_space(np.ones((1, n)))
    G = basis.T @ (B.T @ B) @ basis
    return float(max(scipy.linalg.eigvalsh((G + G.T) / 2).max(), 0.0))


# ---------------------------------------------------------------------------
# Fredholm models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FredholmModel:
    """A piecewise linear Markov map: per-cell slopes, cell lengths and the
    0/1 transition matrix ``T[i][j] = 1`` iff ``I_j ⊆ f(I_i)``."""

    slopes: tuple[Fraction, ...]
    transition: tuple[tuple[int, ...], ...]
    lengths: tuple[Fraction, ...] = ()

    def __post_init__(self):
        q = len(self.slopes)
        slopes = tuple(Fraction(s) for s in self.slopes)
        if any(s <= 0 for s in slopes):
            raise ValueError("slopes must be positive")
        trans = tuple(tuple(int(v) for v in row) for row in self.transition)
        if len(trans) != q or any(len(r) != q for r in trans):
            raise ValueError("transition must be q x q")
        if any(not any(r) for r in trans):
            raise ValueError("every cell must map onto something")
        lengths = tuple(Fraction(x) for x in self.lengths) or tuple(Fraction(1, q) for _ in range(q))
        if len(lengths) != q or sum(lengths) != 1:
            raise ValueError("cell lengths must be q values summing to 1")
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "lengths", lengths)

    @property
    def q(self) -> int:
        return len(self.slopes)

    @property
    def uniformly_expanding(self) -> bool:
        return all(s > 1 for s in self.slopes)

    def phi_one_exact(self) -> list[list[Fraction]]:
        return [[Fraction(t) / s for t in row] for row, s in zip(self.transition, self.slopes)]

    def phi_one(self) -> np.ndarray:
        T = np.array(self.transition, dtype=float)
        return T / np.array([float(s) for s in self.slopes])[:, None]


def multiply_model(sigma: Permutation, m: int) -> FredholmModel:
    """``sigma o (m x mod 1)`` on its Markov partition into ``N m`` cells."""
    T = build_B(m, sigma.n) @ build_Q(sigma, m)
    return FredholmModel(tuple(Fraction(m) for _ in range(T.shape[0])), tuple(map(tuple, T.tolist())))


def subshift_model() -> FredholmModel:
    """Doubling on ``[0, 1/2)`` and translation on ``[1/2, 1)``, two cells."""
    return FredholmModel((Fraction(2), Fraction(1)), ((1, 1), (1, 0)))


def subshift_permuted_model(sigma: Permutation) -> FredholmModel:
    """The subshift map composed with sigma on its ``2 ell`` cells."""
    N = sigma.n
    if N % 2:
        raise ValueError("subshift needs an even number of cells")
    ell = N // 2
    T = [[0] * N for _ in range(N)]
    slopes = []
    for j in range(N):
        if j < ell:
            T[j][sigma(2 * j)] = 1
            T[j][sigma(2 * j + 1)] = 1
            slopes.append(Fraction(2))
        else:
            T[j][sigma(j - ell)] = 1
            slopes.append(Fraction(1))
    return FredholmModel(tuple(slopes), tuple(map(tuple, T)))


def fredholm_matrix(model: FredholmModel, z: complex) -> np.ndarray:
    """``Phi(z)[i, j] = z T[i, j] / slope_i``."""
    return complex(z) * model.phi_one().astype(complex)


def _det_fraction(rows: list[list[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def fredholm_determinant(model: FredholmModel, z):
    """``D(z) = det(I - Phi(z))``.

    Exact (a ``Fraction``) for int or Fraction z, otherwise complex LU.
    """
    if isinstance(z, (int, Fraction)) and not isinstance(z, bool):
        z = Fraction(z)
        phi = model.phi_one_exact()
        rows = [[(1 if i == j else 0) - z * phi[i][j] for j in range(model.q)] for i in range(model.q)]
        return _det_fraction(rows)
    Mz = np.eye(model.q, dtype=complex) - fredholm_matrix(model, z)
    return complex(scipy.linalg.det(Mz))


def fredholm_zeros(model: FredholmModel) -> list[complex]:
    """Zeros of D: reciprocals of the nonzero roots of ``det(x I - Phi(1))``."""
    phi = model.phi_one_exact()
    den = math.lcm(*(v.denominator for row in phi for v in row))
    coeffs = exact.charpoly_int([[int(v * den) for v in row] for row in phi])
    roots = np.roots(np.array(coeffs, dtype=float)) / den if len(coeffs) > 1 else np.array([])
    return sorted((1.0 / complex(r) for r in roots if abs(r) > 1e-12), key=lambda z: (abs(z), z.real))


class NonErgodicError(ValueError):
    """Eigenvalue 1 of ``Phi(1)`` is not simple."""


def invariant_density(model: FredholmModel) -> tuple[Fraction, ...]:
    """Exact invariant density, one constant value per cell.

    Solves ``v Phi(1) = v`` over the rationals and normalises so that
    ``sum(v_i |I_i|) = 1``.
    """
    phi = model.phi_one_exact()
    q = model.q
    # (Phi^T - I) v^T = 0
    Mt = [[phi[j][i] - (1 if i == j else 0) for j in range(q)] for i in range(q)]
    basis = exact.nullspace_exact(Mt)
    if len(basis) != 1:
        raise NonErgodicError(f"eigenvalue 1 has geometric multiplicity {len(basis)}")
    v = basis[0]
    mass = sum(vi * li for vi, li in zip(v, model.lengths))
    if mass == 0:
        raise NonErgodicError("left eigenvector has zero mass")
    return tuple(vi / mass for vi in v)


def r_ess_and_entropy(model: FredholmModel) -> tuple[float, float]:
    """``(exp(-integral of log f' against the density), log spectral radius
    of the transition matrix)``."""
    rho = invariant_density(model)
    xi = sum(float(r * l) * math.log(s) for r, l, s in zip(rho, model.lengths, model.slopes))
    radius = float(np.max(np.abs(np.linalg.eigvals(np.array(model.transition, dtype=float)))))
    return math.exp(-xi), math.log(radius)


def density_evolution_rate(
    sigma: Permutation,
    m: int,
    steps: int = 400,
    seed: int = 0,
    initial: Optional[Sequence[int]] = None,
) -> float:
    """Observed geometric decay factor of ``||v_k - rho||_1`` under
    ``v <- v Phi(1)`` on the Markov partition of ``sigma o f``.

    The iteration runs in exact integer arithmetic, so the residual can be
    followed far below double precision. The decay factor is the slope of
    ``log r_k`` fitted over the last 80% of the steps. A density that hits
    equilibrium exactly within two steps gives 0.

    Parameters
    ----------
    initial
        Positive integer weights per cell; random in ``[1, 1000]`` when
        omitted.
    """
    if steps < 10:
        raise ValueError("need at least 10 steps")
    if not classify_mixing_fast(sigma, m, sigma.n).mixing:
        raise ValueError("sigma o f is not mixing; the rate is undefined")
    model = multiply_model(sigma, m)
    q = model.q
    rho = invariant_density(model)
    D = math.lcm(*(r.denominator for r in rho))
    a = [int(r * D) for r in rho]
    if initial is None:
        u = [int(x) for x in np.random.default_rng(seed).integers(1, 1001, size=q)]
    else:
        u = [int(x) for x in initial]
        if len(u) != q or min(u) < 0 or sum(u) == 0:
            raise ValueError(f"initial must be {q} nonnegative integers, not all zero")
    S = sum(u)
    succ = [[j for j, t in enumerate(row) for _ in range(t)] for row in model.transition]
    # v_k = u_k q / (m^k S); r_k = sum |u_k q D - a m^k S| / (q D m^k S)
    logs = []
    scale = S
    for k in range(steps):
        num = sum(abs(ui * q * D - ai * scale) for ui, ai in zip(u, a))
        if num == 0:
            break
        logs.append(math.log(num) - math.log(q * D * scale))
        nxt = [0] * q
        for i, ui in enumerate(u):
            if ui:
                for j in succ[i]:
                    nxt[j] += ui
        u = nxt
        scale *= m
    if len(logs) <= 2:
        return 0.0
    k = np.arange(len(logs))
    first = len(logs) // 5
    slope = np.polyfit(k[first:], np.array(logs[first:]), 1)[0]
    return float(math.exp(slope))


def zeta_identity_check(model: FredholmModel, z: complex, K: int) -> float:
    """``|log D(z) + sum_{n<=K} z^n tr(Phi(1)^n) / n|``.

    For real z, ``D(z) > 0`` inside the disc of convergence and the principal
    logarithm of the LU determinant is used; for complex z the branch is
    fixed by summing ``log(1 - z lambda_i)`` over the spectrum.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    phi = model.phi_one()
    eig = np.linalg.eigvals(phi)
    radius = float(np.max(np.abs(eig)))
    if abs(z) * radius >= 1:
        raise ValueError("z lies outside the disc where the trace series converges")
    if isinstance(z, complex) and z.imag != 0:
        logD = complex(np.sum(np.log(1 - z * eig)))
    else:
        D = fredholm_determinant(model, float(np.real(z)))
        logD = cmath.log(D)
    total = 0j
    Pn = np.eye(model.q)
    zn = 1.0 + 0j
    for n in range(1, K + 1):
        Pn = Pn @ phi
        zn *= z
        total += zn * np.trace(Pn) / n
    return abs(logD + total)


# ---------------------------------------------------------------------------
# Exact spectral facts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraicCheck:
    charpoly: tuple[int, ...]
    monic: bool
    multiplicity_of_m: int
    quotient_constant: int
    rate_preserved: bool

    @property
    def passed(self) -> bool:
        return self.monic and self.multiplicity_of_m == 1 and abs(self.quotient_constant) == 1

    def to_dict(self) -> dict:
        return {
            "charpoly": list(self.charpoly),
            "monic": self.monic,
            "multiplicity_of_m": self.multiplicity_of_m,
            "quotient_constant": self.quotient_constant,
            "rate_preserved": self.rate_preserved,
            "passed": self.passed,
        }


def algebraic_eigenvalue_check(sigma: Permutation, m: int) -> AlgebraicCheck:
    """Exact structure of the characteristic polynomial of ``A(m,N) P(sigma)``.

    With ``gcd(m, N) = 1``: monic, m a simple root, and the cofactor has
    constant term of absolute value 1 (its roots are algebraic integers of
    norm +-1). ``rate_preserved`` records whether the cofactor is a product
    of cyclotomic polynomials.
    """
    N = sigma.n
    if math.gcd(m, N) != 1:
        raise ValueError(f"gcd({m}, {N}) > 1")
    cp = exact.charpoly_int(transition_matrix(sigma, m))
    mult = exact.root_multiplicity(cp, m)
    quotient, rem = exact.poly_divide_linear(cp, m)
    if rem != 0:
        quotient = cp
    return AlgebraicCheck(
        charpoly=tuple(cp),
        monic=cp[0] == 1,
        multiplicity_of_m=mult,
        quotient_constant=quotient[-1] if quotient else 0,
        rate_preserved=exact.product_of_cyclotomics(quotient),
    )


def zero_eigenvalue_multiplicities(M) -> tuple[int, int]:
    """(algebraic, geometric) multiplicity of eigenvalue 0 of an integer
    matrix, both exact."""
    cp = exact.charpoly_int(M)
    alg = exact.zero_root_multiplicity(cp)
    geo = len(cp) - 1 - exact.rank_exact(M)
    return alg, geo
