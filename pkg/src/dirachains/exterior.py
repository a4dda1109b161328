"""Exterior algebra of R^n over the canonical lexicographic blade basis.

k-vectors and k-covectors are stored as dense coefficient arrays indexed by
the strictly increasing k-subsets of {0..n-1} in lexicographic order, so a
grade-k object in R^n always carries exactly C(n, k) coefficients.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "KVector",
    "KCovector",
    "MassBound",
    "index_sets",
    "wedge",
    "mass",
    "mass_bound",
    "covector_apply",
]


@lru_cache(maxsize=None)
def index_sets(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing k-subsets of range(n), lexicographic order."""
    if not 0 <= k <= n:
        raise ValueError(f"grade {k} out of range for dimension {n}")
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _index_positions(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(index_sets(n, k))}


def _merge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    """Sign of sorting the concatenation of two disjoint increasing tuples."""
    inversions = sum(1 for a in left for b in right if a > b)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _wedge_table(n: int, j: int, k: int) -> tuple[tuple[int, int, int, float], ...]:
    """Precomputed (left_pos, right_pos, out_pos, sign) rows for one grade pair."""
    out_pos = _index_positions(n, j + k)
    rows = []
    for ia, left in enumerate(index_sets(n, j)):
        left_set = set(left)
        for ib, right in enumerate(index_sets(n, k)):
            if left_set.intersection(right):
                continue
            merged = tuple(sorted(left + right))
            rows.append((ia, ib, out_pos[merged], float(_merge_sign(left, right))))
    return tuple(rows)


class KVector:
    """Element of the k-th exterior power of R^n.

    Immutable; ``coeffs[i]`` is the coefficient of the basis blade
    ``e_I`` for ``I = index_sets(n, k)[i]``.
    """

    __slots__ = ("n", "k", "coeffs")

    def __init__(self, n: int, k: int, coeffs: Sequence[float] | np.ndarray):
        if not 0 <= k <= n:
            raise ValueError(f"grade {k} out of range for dimension {n}")
        arr = np.array(coeffs, dtype=np.float64).reshape(-1)
        expected = math.comb(n, k)
        if arr.shape[0] != expected:
            raise ValueError(
                f"grade-{k} vector in R^{n} needs {expected} coefficients, got {arr.shape[0]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("KVector is immutable")

    @classmethod
    def zero(cls, n: int, k: int) -> "KVector":
        return cls(n, k, np.zeros(math.comb(n, k)))

    @classmethod
    def basis(cls, n: int, index_set: Iterable[int]) -> "KVector":
        """Basis blade e_I; ``index_set`` must be strictly increasing."""
        idx = tuple(index_set)
        coeffs = np.zeros(math.comb(n, len(idx)))
        coeffs[_index_positions(n, len(idx))[idx]] = 1.0
        return cls(n, len(idx), coeffs)

    @classmethod
    def scalar(cls, n: int, value: float) -> "KVector":
        return cls(n, 0, [float(value)])

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]]) -> "KVector":
        """Wedge of 1-vectors; always simple by construction."""
        vecs = [np.asarray(v, dtype=np.float64) for v in vectors]
        if not vecs:
            raise ValueError("need at least one factor")
        n = vecs[0].shape[0]
        out = cls(n, 1, vecs[0])
        for v in vecs[1:]:
            out = wedge(out, cls(n, 1, v))
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KVector)
            and self.n == other.n
            and self.k == other.k
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    def __add__(self, other: "KVector") -> "KVector":
        self._check_same(other)
        return KVector(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: "KVector") -> "KVector":
        self._check_same(other)
        return KVector(self.n, self.k, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "KVector":
        return KVector(self.n, self.k, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "KVector":
        return KVector(self.n, self.k, self.coeffs / float(scalar))

    def __neg__(self) -> "KVector":
        return KVector(self.n, self.k, -self.coeffs)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def euclidean_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def _check_same(self, other: "KVector") -> None:
        if self.n != other.n or self.k != other.k:
            raise ValueError(
                f"dimension/grade mismatch: ({self.n},{self.k}) vs ({other.n},{other.k})"
            )

    def __repr__(self) -> str:
        parts = []
        for idx, c in zip(index_sets(self.n, self.k), self.coeffs):
            if c != 0.0:
                name = "1" if not idx else "e" + "".join(str(i + 1) for i in idx)
                parts.append(f"{c:g}*{name}")
        body = " + ".join(parts) if parts else "0"
        return f"KVector({self.n},{self.k}: {body})"


class KCovector:
    """Constant k-covector: coefficients over the dual basis dx_I."""

    __slots__ = ("n", "k", "coeffs")

    def __init__(self, n: int, k: int, coeffs: Sequence[float] | np.ndarray):
        if not 0 <= k <= n:
            raise ValueError(f"grade {k} out of range for dimension {n}")
        arr = np.array(coeffs, dtype=np.float64).reshape(-1)
        expected = math.comb(n, k)
        if arr.shape[0] != expected:
            raise ValueError(
                f"grade-{k} covector in R^{n} needs {expected} coefficients, got {arr.shape[0]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("KCovector is immutable")

    @classmethod
    def basis(cls, n: int, index_set: Iterable[int]) -> "KCovector":
        idx = tuple(index_set)
        coeffs = np.zeros(math.comb(n, len(idx)))
        coeffs[_index_positions(n, len(idx))[idx]] = 1.0
        return cls(n, len(idx), coeffs)

    def __add__(self, other: "KCovector") -> "KCovector":
        if self.n != other.n or self.k != other.k:
            raise ValueError("dimension/grade mismatch")
        return KCovector(self.n, self.k, self.coeffs + other.coeffs)

    def __mul__(self, scalar: float) -> "KCovector":
        return KCovector(self.n, self.k, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        parts = []
        for idx, c in zip(index_sets(self.n, self.k), self.coeffs):
            if c != 0.0:
                name = "1" if not idx else "dx" + "".join(str(i + 1) for i in idx)
                parts.append(f"{c:g}*{name}")
        return f"KCovector({self.n},{self.k}: {' + '.join(parts) if parts else '0'})"


def wedge(a: KVector, b: KVector) -> KVector:
    """Exterior product; bilinear, associative, graded-anticommutative."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.k + b.k > a.n:
        raise ValueError("grade exceeds dimension")
    out = np.zeros(math.comb(a.n, a.k + b.k))
    ca, cb = a.coeffs, b.coeffs
    for ia, ib, io, sign in _wedge_table(a.n, a.k, b.k):
        out[io] += sign * ca[ia] * cb[ib]
    return KVector(a.n, a.k + b.k, out)


class MassBound(NamedTuple):
    """Mass value plus whether it is exact or only a certified upper bound."""

    value: float
    exact: bool


def mass_bound(a: KVector) -> MassBound:
    """Mass norm of a k-vector, or a certified upper bound for it.

    Exact cases: grades 0, 1, n-1, n (where the mass equals the euclidean
    coefficient norm) and any input recognised as simple (where the two
    norms coincide as well, equal to the root Gram determinant of the
    factors).  Every other input gets an upper bound from a greedy
    decomposition into simple blades, flagged ``exact=False``.
    """
    n, k = a.n, a.k
    if k in (0, 1, n - 1, n):
        return MassBound(a.euclidean_norm(), True)
    if a.is_zero():
        return MassBound(0.0, True)
    if _simple_factors(a) is not None:
        return MassBound(a.euclidean_norm(), True)
    return MassBound(_greedy_simple_upper(a), False)


def mass(a: KVector) -> float:
    """Mass norm of ``a``; see mass_bound for exactness guarantees."""
    return mass_bound(a).value


def covector_apply(w: KCovector, a: KVector) -> float:
    """Canonical bilinear pairing of a k-covector with a k-vector."""
    if w.n != a.n or w.k != a.k:
        raise ValueError(
            f"dimension/grade mismatch: ({w.n},{w.k}) vs ({a.n},{a.k})"
        )
    return float(np.dot(w.coeffs, a.coeffs))


def _removal_sign(js: tuple[int, ...], d: int) -> int:
    """Sign relating e_sorted(js+(d,)) to e_js wedge e_d."""
    pos = sum(1 for j in js if j < d)
    return -1 if (len(js) - pos) % 2 else 1


def _simple_factors(a: KVector, rtol: float = 1e-9) -> list[np.ndarray] | None:
    """Recover 1-vector factors of a simple k-vector, or None.

    Contracts ``a`` against the (k-1)-subsets of its largest blade to get k
    candidate spanning vectors, then accepts only if their wedge reproduces
    ``a`` up to scale.  Non-simple inputs fail the reproduction check.
    """
    n, k = a.n, a.k
    sets = index_sets(n, k)
    positions = _index_positions(n, k)
    i0 = int(np.argmax(np.abs(a.coeffs)))
    lead = sets[i0]
    if a.coeffs[i0] == 0.0:
        return None
    factors = []
    for drop in lead:
        js = tuple(i for i in lead if i != drop)
        w = np.zeros(n)
        js_set = set(js)
        for d in range(n):
            if d in js_set:
                continue
            merged = tuple(sorted(js + (d,)))
            w[d] = _removal_sign(js, d) * a.coeffs[positions[merged]]
        factors.append(w)
    try:
        reproduced = KVector.from_vectors(factors)
    except ValueError:
        return None
    lam = reproduced.coeffs[i0] / a.coeffs[i0]
    if lam == 0.0 or not np.isfinite(lam):
        return None
    residual = np.linalg.norm(reproduced.coeffs - lam * a.coeffs)
    if residual > rtol * np.linalg.norm(reproduced.coeffs):
        return None
    scale = abs(lam) ** (1.0 / k)
    out = [w / scale for w in factors]
    if lam < 0:
        out[0] = -out[0]
    return out


def _greedy_simple_upper(a: KVector) -> float:
    """Upper bound on mass from grouping blades that share a (k-1)-subset.

    Each group { S+{d} : d } spans a simple blade e_S ^ (sum of e_d), whose
    mass is the euclidean norm of the grouped coefficients; ungrouped blades
    contribute their absolute coefficient.  Never below the true mass.
    """
    k = a.k
    remaining: dict[tuple[int, ...], float] = {
        idx: float(c)
        for idx, c in zip(index_sets(a.n, a.k), a.coeffs)
        if c != 0.0
    }
    total = 0.0
    while remaining:
        lead = max(remaining, key=lambda idx: (abs(remaining[idx]), idx))
        best_group = (lead,)
        best_l2 = abs(remaining[lead])
        best_saving = 0.0
        for sub in itertools.combinations(lead, k - 1):
            sub_set = set(sub)
            group = tuple(idx for idx in remaining if sub_set.issubset(idx))
            l1 = sum(abs(remaining[idx]) for idx in group)
            l2 = math.sqrt(sum(remaining[idx] ** 2 for idx in group))
            if l1 - l2 > best_saving:
                best_saving = l1 - l2
                best_group = group
                best_l2 = l2
        total += best_l2
        for idx in best_group:
            del remaining[idx]
    return total
