"""Permutations of equal subintervals and the mixing classifier for sigma o f.

Subintervals are ``I_j = [j/N, (j+1)/N)`` indexed by ``Z/NZ``. A subset of
indices is carried either as a ``frozenset`` or, inside the exhaustive
oracle, as an unsigned bit mask with index ``i`` on bit ``i``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Permutation",
    "MapFamily",
    "FamilyKind",
    "BlockDecomposition",
    "MixingVerdict",
    "MixingStatus",
    "delta",
    "tilde_f",
    "tilde_g",
    "classify_mixing_fast",
    "classify_mixing_oracle",
    "is_nonmixing_fast",
    "subshift_witness_count",
    "subshift_has_witness",
    "stabilizer_order",
    "parse_permutation",
    "ORACLE_MAX_N",
]

#: Largest ground set the subset oracle will enumerate (2**N states).
ORACLE_MAX_N = 20


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{0, ..., n-1}`` stored in one-line form."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        if not images:
            raise ValueError("a permutation needs at least one point")
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection of 0..{len(images) - 1}: {list(images)}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        images = list(range(n))
        seen: set[int] = set()
        for cyc in cycles:
            for a in cyc:
                if not 0 <= a < n:
                    raise ValueError(f"cycle entry {a} outside 0..{n - 1}")
                if a in seen:
                    raise ValueError(f"point {a} appears in more than one cycle")
                seen.add(a)
            for a, b in zip(cyc, list(cyc[1:]) + list(cyc[:1])):
                images[a] = b
        return cls(tuple(images))

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self o other``, i.e. ``i -> self(other(i))``."""
        if other.n != self.n:
            raise ValueError(f"degree mismatch: {self.n} vs {other.n}")
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def image_set(self, A: Iterable[int]) -> frozenset[int]:
        return frozenset(self.images[a] for a in A)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = self.images[i]
            out.append(tuple(cyc))
        return out

    def to_json(self) -> str:
        return json.dumps(list(self.images), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Permutation":
        return cls(tuple(json.loads(text)))

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.images)) + "]"


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, n: Optional[int] = None) -> Permutation:
    """Parse a permutation literal.

    Two forms are accepted:

    * one-line image form ``"[0,2,1,3]"`` (JSON array, ``n`` optional but
      checked when given);
    * cycle form ``"(0 1 2)(3 4)"`` with space-separated entries; ``n`` is
      required since fixed points are implicit. ``"()"`` is the identity.
    """
    s = text.strip()
    if s.startswith("["):
        perm = Permutation(tuple(json.loads(s)))
        if n is not None and perm.n != n:
            raise ValueError(f"permutation has degree {perm.n}, expected {n}")
        return perm
    if s.startswith("("):
        if n is None:
            raise ValueError("cycle notation needs the degree N")
        if _CYCLE_RE.sub("", s).strip():
            raise ValueError(f"malformed cycle literal: {text!r}")
        cycles = []
        for body in _CYCLE_RE.findall(s):
            parts = body.split()
            if any("," in p for p in parts):
                raise ValueError("cycle entries are space-separated, not comma-separated")
            if parts:
                cycles.append([int(p) for p in parts])
        return Permutation.from_cycles(n, cycles)
    raise ValueError(f"unrecognised permutation literal: {text!r}")


class FamilyKind(str, Enum):
    MULTIPLY = "multiply"
    SUBSHIFT = "subshift"


@dataclass(frozen=True)
class MapFamily:
    """The base map f together with the number N of equal subintervals.

    ``MULTIPLY`` is ``x -> m x mod 1``; ``SUBSHIFT`` is the map that doubles
    on ``[0, 1/2)`` and translates ``[1/2, 1)`` down by one half, in which
    case ``N = 2 * ell``.
    """

    kind: FamilyKind
    N: int
    m: int = 2

    def __post_init__(self):
        if self.kind is FamilyKind.MULTIPLY:
            if self.m < 2 or self.N < 2:
                raise ValueError("multiply family needs m >= 2 and N >= 2")
        elif self.kind is FamilyKind.SUBSHIFT:
            if self.N < 2 or self.N % 2:
                raise ValueError("subshift family needs an even N = 2*ell")
        else:  # pragma: no cover
            raise ValueError(self.kind)

    @classmethod
    def multiply(cls, m: int, N: int) -> "MapFamily":
        return cls(FamilyKind.MULTIPLY, N, m)

    @classmethod
    def subshift(cls, ell: int) -> "MapFamily":
        return cls(FamilyKind.SUBSHIFT, 2 * ell, 2)

    @property
    def ell(self) -> Optional[int]:
        if self.kind is FamilyKind.SUBSHIFT:
            return self.N // 2
        return self.N // self.m if self.N % self.m == 0 else None


@dataclass(frozen=True)
class BlockDecomposition:
    """A partition of ``Z/nZ`` into nonempty blocks.

    Blocks are normalised to sorted tuples, ordered by their least element,
    so equal decompositions compare equal.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(set(b))) for b in self.blocks), key=lambda b: b[0] if b else -1))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        flat = [a for b in blocks for a in b]
        if sorted(flat) != list(range(self.n)):
            raise ValueError("blocks must be disjoint and cover 0..n-1")
        object.__setattr__(self, "blocks", blocks)

    def trivial(self) -> bool:
        return len(self.blocks) == 1

    def ell_stable(self, ell: int) -> bool:
        """Every block is closed under ``j -> j + ell (mod n)``."""
        for b in self.blocks:
            s = set(b)
            if any((j + ell) % self.n not in s for j in b):
                return False
        return True

    def stabilized_by(self, perm: Permutation) -> bool:
        """Whether ``perm`` maps every block onto a block."""
        if perm.n != self.n:
            return False
        current = {frozenset(b) for b in self.blocks}
        return all(perm.image_set(b) in current for b in self.blocks)

    def block_sizes(self) -> list[int]:
        return sorted(len(b) for b in self.blocks)

    def to_json(self) -> str:
        return json.dumps([list(b) for b in self.blocks], separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "BlockDecomposition":
        blocks = json.loads(text)
        n = sum(len(b) for b in blocks)
        return cls(n, tuple(tuple(b) for b in blocks))


class MixingStatus(str, Enum):
    MIXING = "Mixing"
    NON_MIXING = "NonMixing"


@dataclass(frozen=True)
class MixingVerdict:
    """Outcome of a mixing classification.

    For the multiply family a ``NonMixing`` verdict carries a nontrivial
    ell-stable block decomposition stabilised by ``sigma o delta``. The
    subshift family has no coset structure, so its witness is a nonempty
    subset whose forward images never cover every subinterval.
    """

    status: MixingStatus
    witness: Optional[BlockDecomposition] = None
    witness_set: Optional[frozenset[int]] = None
    ergodic: Optional[bool] = None

    @property
    def mixing(self) -> bool:
        return self.status is MixingStatus.MIXING

    def to_dict(self) -> dict:
        d: dict = {"status": self.status.value}
        d["witness"] = None if self.witness is None else [list(b) for b in self.witness.blocks]
        d["witness_set"] = None if self.witness_set is None else sorted(self.witness_set)
        d["ergodic"] = self.ergodic
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MixingVerdict":
        witness = None
        if d.get("witness") is not None:
            blocks = d["witness"]
            witness = BlockDecomposition(sum(len(b) for b in blocks), tuple(tuple(b) for b in blocks))
        ws = d.get("witness_set")
        return cls(MixingStatus(d["status"]), witness, None if ws is None else frozenset(ws), d.get("ergodic"))


# ---------------------------------------------------------------------------
# delta and the set maps
# ---------------------------------------------------------------------------

def _check_multiple(m: int, N: int) -> int:
    if m < 2:
        raise ValueError("m must be at least 2")
    if N < 1 or N % m:
        raise ValueError(f"N={N} is not a positive multiple of m={m}")
    return N // m


def _interval_image_contains(m: int, N: int, j: int, k: int) -> bool:
    """Exact check that ``f(I_j)`` contains ``I_k`` for ``f(x) = m x mod 1``.

    ``f(I_j)`` is the arc ``[m j / N, m (j + 1) / N)`` of length ``m / N``
    wrapped onto the circle; compare endpoints in units of ``1/N``.
    """
    lo = (m * j) % N
    # I_k = [k, k+1) in these units; arc covers lo .. lo + m (mod N)
    offset = (k - lo) % N
    return offset + 1 <= m


def delta(m: int, N: int) -> Permutation:
    """The permutation with ``f(I_j) ⊇ I_{delta(j)}`` for every j.

    Writing ``i = j + c*ell`` with ``0 <= c < m`` and ``0 <= j < ell`` it
    sends ``i`` to ``m*j + c``. The defining inclusion is re-checked against
    the interval images before returning.
    """
    ell = _check_multiple(m, N)
    images = [0] * N
    for i in range(N):
        c, j = divmod(i, ell)
        images[i] = m * j + c
    perm = Permutation(tuple(images))
    for j in range(N):
        if not _interval_image_contains(m, N, j, perm(j)):
            raise AssertionError(f"delta({m},{N}) fails the inclusion at j={j}")
    return perm


def tilde_f(A: Iterable[int], m: int, N: int) -> frozenset[int]:
    """Indices b with ``I_b`` inside ``f(union of I_a for a in A)``."""
    return frozenset((m * a + d) % N for a in A for d in range(m))


def tilde_g(A: Iterable[int], sigma: Permutation, family: MapFamily) -> frozenset[int]:
    """One step of ``g = sigma o f`` on sets of subinterval indices."""
    if sigma.n != family.N:
        raise ValueError(f"sigma has degree {sigma.n}, family has N={family.N}")
    if family.kind is FamilyKind.MULTIPLY:
        return sigma.image_set(tilde_f(A, family.m, family.N))
    ell = family.N // 2
    out = set()
    for j in A:
        if j < ell:
            out.add(sigma(2 * j))
            out.add(sigma(2 * j + 1))
        else:
            out.add(sigma(j - ell))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Fast classifier: finest sigma*delta-stable coarsening of the coset partition
# ---------------------------------------------------------------------------

def _stable_coset_classes(pi: Sequence[int], ell: int, m: int) -> list[int]:
    """Return a root label per coset of ``ell Z/NZ`` for the finest
    ``pi``-invariant coarsening of the coset partition."""
    parent = list(range(ell))

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    changed = True
    while changed:
        changed = False
        groups: dict[int, list[int]] = {}
        for c in range(ell):
            groups.setdefault(find(c), []).append(c)
        for members in groups.values():
            targets = {find(pi[c + k * ell] % ell) for c in members for k in range(m)}
            if len(targets) > 1:
                it = iter(targets)
                root = next(it)
                for t in it:
                    parent[find(t)] = find(root)
                changed = True
    return [find(c) for c in range(ell)]


def is_nonmixing_fast(images: Sequence[int], delta_images: Sequence[int], m: int) -> bool:
    """Hot-loop variant of :func:`classify_mixing_fast` for exhaustive sweeps.

    ``images`` is sigma in one-line form and ``delta_images`` is
    ``delta(m, N)``; ``N`` must be a multiple of ``m``.
    """
    N = len(images)
    ell = N // m
    if ell == 1:
        return False
    pi = [images[d] for d in delta_images]
    roots = _stable_coset_classes(pi, ell, m)
    return len(set(roots)) > 1


def classify_mixing_fast(sigma: Permutation, m: int, N: int) -> MixingVerdict:
    """Decide whether ``sigma o (m x mod 1)`` is mixing on N subintervals.

    When m does not divide N the composite is always mixing. Otherwise the
    coset partition of ``ell Z/NZ`` is merged until ``pi = sigma o delta``
    permutes its blocks; the composite fails to mix exactly when the
    resulting decomposition still has two or more blocks.
    """
    if sigma.n != N:
        raise ValueError(f"sigma has degree {sigma.n}, expected N={N}")
    if m < 2:
        raise ValueError("m must be at least 2")
    if N % m:
        return MixingVerdict(MixingStatus.MIXING)
    ell = N // m
    pi = sigma.compose(delta(m, N))
    roots = _stable_coset_classes(pi.images, ell, m)
    if len(set(roots)) == 1:
        return MixingVerdict(MixingStatus.MIXING)
    blocks: dict[int, list[int]] = {}
    for i in range(N):
        blocks.setdefault(roots[i % ell], []).append(i)
    witness = BlockDecomposition(N, tuple(tuple(b) for b in blocks.values()))
    assert not witness.trivial() and witness.ell_stable(ell) and witness.stabilized_by(pi)
    return MixingVerdict(MixingStatus.NON_MIXING, witness=witness)


# ---------------------------------------------------------------------------
# Subset oracle
# ---------------------------------------------------------------------------

def _single_images(sigma: Permutation, family: MapFamily) -> list[int]:
    """Bit mask of ``tilde_g({i})`` for each i."""
    return [sum(1 << b for b in tilde_g((i,), sigma, family)) for i in range(family.N)]


def _all_images(single: list[int]) -> np.ndarray:
    """``tilde_g`` on every subset mask, built one bit at a time."""
    N = len(single)
    img = np.zeros(1 << N, dtype=np.int64)
    for b in range(N):
        lo = 1 << b
        img[lo : 2 * lo] = img[:lo] | single[b]
    return img


_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _popcount(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    x = a.copy()
    while np.any(x):
        out += _POPCOUNT8[x & 0xFF]
        x >>= 8
    return out


def _nonmixing_subsets(sigma: Permutation, family: MapFamily) -> np.ndarray:
    """Boolean array over subset masks: True where the subset certifies
    failure of mixing.

    The map on subsets is iterated ``2**N`` times by repeated squaring,
    which is past the point where every orbit has entered its cycle.
    Multiply family: a proper nonempty A qualifies when its size never
    grows (sizes are nondecreasing, so comparing the start with the far
    iterate suffices). Subshift family: sizes can shrink, so a nonempty A
    qualifies when its forward images never cover every subinterval.
    """
    N = family.N
    full = (1 << N) - 1
    step = _all_images(_single_images(sigma, family))
    far = step.copy()
    for _ in range(N):
        far = far[far]
    masks = np.arange(1 << N, dtype=np.int64)
    nonempty_proper = (masks != 0) & (masks != full)
    if family.kind is FamilyKind.MULTIPLY:
        return nonempty_proper & (_popcount(far) == _popcount(masks))
    return (masks != 0) & (far != full)


def _orbit_witness(sigma: Permutation, family: MapFamily, A: frozenset[int]) -> BlockDecomposition:
    """Atoms of the Boolean algebra generated by the ``sigma o delta`` orbits
    of A and its complement; nontrivial, ell-stable and invariant."""
    pi = sigma.compose(delta(family.m, family.N))
    gens = []
    for start in (A, frozenset(range(family.N)) - A):
        cur = start
        while cur not in gens:
            gens.append(cur)
            cur = pi.image_set(cur)
    atoms: dict[tuple[bool, ...], list[int]] = {}
    for i in range(family.N):
        atoms.setdefault(tuple(i in g for g in gens), []).append(i)
    return BlockDecomposition(family.N, tuple(tuple(b) for b in atoms.values()))


def classify_mixing_oracle(sigma: Permutation, family: MapFamily, max_n: int = ORACLE_MAX_N) -> MixingVerdict:
    """Brute-force mixing test by following every subset orbit under ``tilde_g``.

    Independent of the coset argument behind :func:`classify_mixing_fast`;
    used to cross-check it and as the only classifier for the subshift
    family.
    """
    if sigma.n != family.N:
        raise ValueError(f"sigma has degree {sigma.n}, family has N={family.N}")
    if family.N > max_n:
        raise ValueError(f"N={family.N} exceeds the subset-enumeration bound {max_n}")
    bad = _nonmixing_subsets(sigma, family)
    hits = np.flatnonzero(bad)
    if hits.size == 0:
        return MixingVerdict(MixingStatus.MIXING)
    # smallest qualifying subset makes the most readable witness
    sizes = _popcount(hits)
    mask = int(hits[np.argmin(sizes)])
    A = frozenset(i for i in range(family.N) if mask >> i & 1)
    if family.kind is FamilyKind.MULTIPLY:
        return MixingVerdict(MixingStatus.NON_MIXING, witness=_orbit_witness(sigma, family, A), witness_set=A)
    return MixingVerdict(MixingStatus.NON_MIXING, witness_set=A)


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def subshift_has_witness(sigma: Permutation) -> bool:
    """Whether ``sigma(j - ell) = j`` for some ``j >= ell`` (N = 2*ell)."""
    ell = sigma.n // 2
    return any(sigma(j - ell) == j for j in range(ell, 2 * ell))


def subshift_witness_count(ell: int) -> Fraction:
    """Exact proportion of sigma in S_{2 ell} with ``sigma(j - ell) = j`` for
    at least one ``j >= ell``, by inclusion-exclusion over the fixed set."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    total = Fraction(0)
    for k in range(1, ell + 1):
        a_k = Fraction(math.comb(ell, k) * math.factorial(2 * ell - k), math.factorial(2 * ell))
        total += a_k if k % 2 else -a_k
    return total


def stabilizer_order(B: BlockDecomposition, m: int) -> int:
    """Order of the subgroup of S_N mapping every block of B onto a block.

    Blocks of equal size may be permuted among themselves, so the order is
    ``prod(n_i!) * prod((m r_h)!)`` where ``n_i`` counts blocks of size
    ``m*i``.
    """
    ell = _check_multiple(m, B.n)
    if not B.ell_stable(ell):
        raise ValueError(f"decomposition is not {ell}-stable")
    sizes = [len(b) for b in B.blocks]
    counts: dict[int, int] = {}
    for s in sizes:
        counts[s] = counts.get(s, 0) + 1
    order = 1
    for c in counts.values():
        order *= math.factorial(c)
    for s in sizes:
        order *= math.factorial(s)
    return order
