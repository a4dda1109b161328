"""Pointed chains, dipole chains, and their pairing with forms.

A pointed chain is a finite formal sum of (point; k-vector) terms.  A
dipole term extends this with an ordered list of direction vectors: the
term (p; a; v_1..v_j) pairs with a form as the iterated directional
derivative along v_1..v_j of x -> w(x; a), evaluated at p.  Dipole terms
are the exact representations of the limits of difference chains: pairing
dipole_derivative(A, v) against w equals pairing A against the derivative
of w along the constant field v, with no discretization error.

Terms at identical (point, directions) merge coefficientwise and exactly;
no epsilon-snapping, since chains are formal sums and geometric closeness
is the business of the norms, not of the representation.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

import numpy as np

from ._kernels import pair_atoms as _pair_atoms_kernel
from ._kernels import pair_terms as _pair_terms_kernel
from ._kernels import tree_sum
from .exterior import KVector
from .forms import FormSpec, derivative

__all__ = [
    "DEFAULT_MAX_ORDER",
    "PointedChain",
    "DipoleChain",
    "pair",
    "difference_chain",
    "dipole_derivative",
]

DEFAULT_MAX_ORDER = 4

Point = tuple[float, ...]
Dirs = tuple[tuple[float, ...], ...]


def _as_point(p: Sequence[float], n: int) -> Point:
    pt = tuple(float(x) for x in p)
    if len(pt) != n:
        raise ValueError(f"point {p!r} not in R^{n}")
    return pt


def _merge_terms(raw: Iterable[tuple[Point, KVector, Dirs]], n: int, k: int):
    """Coefficientwise merge at identical (point, dirs); drop zero terms."""
    merged: dict[tuple[Point, Dirs], KVector] = {}
    for p, alpha, dirs in raw:
        if alpha.n != n or alpha.k != k:
            raise ValueError(
                f"term k-vector ({alpha.n},{alpha.k}) does not match chain ({n},{k})"
            )
        key = (p, dirs)
        prev = merged.get(key)
        merged[key] = alpha if prev is None else prev + alpha
    out = [
        (p, alpha, dirs)
        for (p, dirs), alpha in merged.items()
        if not alpha.is_zero()
    ]
    out.sort(key=lambda t: (t[0], t[2]))
    return out


class PointedChain:
    """Finite formal sum of (point; k-vector) terms in R^n."""

    __slots__ = ("n", "k", "terms", "_packed")

    def __init__(self, n: int, k: int, terms: Iterable[tuple[Sequence[float], KVector]]):
        if not 0 <= k <= n:
            raise ValueError(f"grade {k} out of range for dimension {n}")
        raw = [(_as_point(p, n), alpha, ()) for p, alpha in terms]
        merged = [(p, alpha) for p, alpha, _ in _merge_terms(raw, n, k)]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "terms", tuple(merged))
        object.__setattr__(self, "_packed", None)

    def __setattr__(self, name, value):
        raise AttributeError("PointedChain is immutable")

    @classmethod
    def dirac(cls, p: Sequence[float], alpha: KVector) -> "PointedChain":
        """Single-term chain (p; alpha)."""
        return cls(len(tuple(p)), alpha.k, [(p, alpha)])

    @classmethod
    def zero(cls, n: int, k: int) -> "PointedChain":
        return cls(n, k, [])

    def __add__(self, other: "PointedChain") -> "PointedChain":
        self._check_same(other)
        return PointedChain(self.n, self.k, list(self.terms) + list(other.terms))

    def __sub__(self, other: "PointedChain") -> "PointedChain":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "PointedChain":
        s = float(scalar)
        return PointedChain(self.n, self.k, [(p, a * s) for p, a in self.terms])

    __rmul__ = __mul__

    def __neg__(self) -> "PointedChain":
        return self * -1.0

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def to_dipole(self, max_order: int = DEFAULT_MAX_ORDER) -> "DipoleChain":
        return DipoleChain(
            self.n, self.k, [(p, a, ()) for p, a in self.terms], max_order=max_order
        )

    def _check_same(self, other) -> None:
        if self.n != other.n or self.k != other.k:
            raise ValueError(
                f"dimension/grade mismatch: ({self.n},{self.k}) vs ({other.n},{other.k})"
            )

    def _packed_arrays(self):
        packed = self._packed
        if packed is None:
            packed = _pack_terms(self.n, self.k, [(p, a, ()) for p, a in self.terms])
            object.__setattr__(self, "_packed", packed)
        return packed

    def __repr__(self) -> str:
        return f"PointedChain({self.n},{self.k}; {len(self.terms)} terms)"


class DipoleChain:
    """Finite formal sum of dipole terms (point; k-vector; directions)."""

    __slots__ = ("n", "k", "terms", "max_order", "_packed")

    def __init__(
        self,
        n: int,
        k: int,
        terms: Iterable[tuple[Sequence[float], KVector, Sequence[Sequence[float]]]],
        max_order: int = DEFAULT_MAX_ORDER,
    ):
        if not 0 <= k <= n:
            raise ValueError(f"grade {k} out of range for dimension {n}")
        raw = []
        for p, alpha, dirs in terms:
            dtup = tuple(tuple(float(x) for x in v) for v in dirs)
            for v in dtup:
                if len(v) != n:
                    raise ValueError(f"direction {v!r} not in R^{n}")
            if len(dtup) > max_order:
                raise ValueError(
                    f"dipole order {len(dtup)} exceeds r_max {max_order}"
                )
            raw.append((_as_point(p, n), alpha, dtup))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "terms", tuple(_merge_terms(raw, n, k)))
        object.__setattr__(self, "max_order", max_order)
        object.__setattr__(self, "_packed", None)

    def __setattr__(self, name, value):
        raise AttributeError("DipoleChain is immutable")

    def order(self) -> int:
        """Largest direction-list length over the terms (0 for empty)."""
        return max((len(d) for _, _, d in self.terms), default=0)

    def __add__(self, other: "DipoleChain") -> "DipoleChain":
        if self.n != other.n or self.k != other.k:
            raise ValueError("dimension/grade mismatch")
        return DipoleChain(
            self.n,
            self.k,
            list(self.terms) + list(other.terms),
            max_order=max(self.max_order, other.max_order),
        )

    def __sub__(self, other: "DipoleChain") -> "DipoleChain":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "DipoleChain":
        s = float(scalar)
        return DipoleChain(
            self.n,
            self.k,
            [(p, a * s, d) for p, a, d in self.terms],
            max_order=self.max_order,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "DipoleChain":
        return self * -1.0

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def to_pointed(self) -> PointedChain:
        """Lossless conversion when every term has an empty direction list."""
        if self.order() > 0:
            raise ValueError("chain has dipole terms of positive order")
        return PointedChain(self.n, self.k, [(p, a) for p, a, _ in self.terms])

    def _packed_arrays(self):
        packed = self._packed
        if packed is None:
            packed = _pack_terms(self.n, self.k, self.terms)
            object.__setattr__(self, "_packed", packed)
        return packed

    def __repr__(self) -> str:
        return (
            f"DipoleChain({self.n},{self.k}; {len(self.terms)} terms,"
            f" order {self.order()})"
        )


Chain = Union[PointedChain, DipoleChain]


def _pack_terms(n: int, k: int, terms):
    T = len(terms)
    points = np.zeros((T, n))
    coeffs = np.zeros((T, math.comb(n, k)))
    dir_offsets = np.zeros(T + 1, dtype=np.int32)
    flat: list[tuple[float, ...]] = []
    for t, (p, alpha, dirs) in enumerate(terms):
        points[t] = p
        coeffs[t] = alpha.coeffs
        flat.extend(dirs)
        dir_offsets[t + 1] = len(flat)
    dirs_flat = np.array(flat, dtype=np.float64).reshape(len(flat), n)
    return points, coeffs, dir_offsets, np.ascontiguousarray(dirs_flat)


def pair(A: Chain, w: FormSpec) -> float:
    """The chain-form pairing: sum over terms of the term's derivative of w.

    Pointed terms contribute w(p; alpha); an order-j dipole term contributes
    the j-fold directional derivative along its direction list.  Linear in
    both arguments.  Terms are reduced with a pairwise tree sum for
    reproducibility.
    """
    if A.n != w.n or A.k != w.k:
        raise ValueError(
            f"dimension/grade mismatch: chain ({A.n},{A.k}) vs form ({w.n},{w.k})"
        )
    points, coeffs, dir_offsets, dirs_flat = A._packed_arrays()
    amp, xi, phase, icol = w.packed()
    per_term = _pair_terms_kernel(
        points, coeffs, dir_offsets, dirs_flat, amp, xi, phase, icol
    )
    if w.poly_atoms:
        poly_only = FormSpec(w.n, w.k, [], w.poly_atoms)
        terms = (
            A.terms
            if isinstance(A, DipoleChain)
            else [(p, a, ()) for p, a in A.terms]
        )
        per_term = per_term + np.array(
            [derivative(poly_only, dirs, p, a) for p, a, dirs in terms]
        )
    return tree_sum(per_term)


def chain_atom_responses(A: Chain, xi_cand: np.ndarray, icol_cand: np.ndarray):
    """Pairing of A against unit sin/cos atoms for a batch of candidates.

    Row m of xi_cand is a frequency vector, icol_cand[m] the lexicographic
    position of the candidate's covector index set.  Returns (sin, cos)
    response arrays; the norm estimators use them to pick optimal phases.
    """
    points, coeffs, dir_offsets, dirs_flat = A._packed_arrays()
    return _pair_atoms_kernel(
        points,
        coeffs,
        dir_offsets,
        dirs_flat,
        np.ascontiguousarray(xi_cand, dtype=np.float64),
        np.ascontiguousarray(icol_cand, dtype=np.int32),
    )


def difference_chain(A: PointedChain, v: Sequence[float], t: float) -> PointedChain:
    """The scaled difference sum of (p + t v; a/t) - (p; a/t) over terms.

    As t -> 0 its pairing against any smooth form converges (at rate O(t))
    to the pairing of dipole_derivative(A, v).
    """
    if t == 0.0:
        raise ValueError("division by zero scale")
    tv = np.asarray(v, dtype=np.float64)
    if tv.shape != (A.n,):
        raise ValueError(f"direction {v!r} not in R^{A.n}")
    inv = 1.0 / float(t)
    terms = []
    for p, alpha in A.terms:
        shifted = tuple(float(x) for x in (np.array(p) + float(t) * tv))
        terms.append((shifted, alpha * inv))
        terms.append((p, alpha * (-inv)))
    return PointedChain(A.n, A.k, terms)


def dipole_derivative(
    A: Chain, v: Sequence[float], max_order: int | None = None
) -> DipoleChain:
    """Exact directional-derivative chain: appends v to every term.

    Structurally represents the t -> 0 limit of difference_chain(A, v, t).
    Linear in A and homogeneous in v.  Raises when a term would exceed the
    configured maximum dipole order.
    """
    vv = tuple(float(x) for x in v)
    if isinstance(A, PointedChain):
        A = A.to_dipole(max_order if max_order is not None else DEFAULT_MAX_ORDER)
    cap = max_order if max_order is not None else A.max_order
    return DipoleChain(
        A.n,
        A.k,
        [(p, alpha, dirs + (vv,)) for p, alpha, dirs in A.terms],
        max_order=cap,
    )
