"""Differential k-forms on R^n built from analytic atoms.

Two atom families:

* trig atoms  c * sin(xi . x + phase) * dx_I, closed under directional
  differentiation (multiply by xi . v, advance phase by pi/2), globally
  bounded, and therefore the certified family for derivative-order bounds;
* poly atoms  c * x^E * dx_I, exact to differentiate and integrate on
  bounded cells, but unbounded on R^n, so they are usable for pairing and
  Stokes experiments only, never for certified bounds.

A form is a finite sum of atoms.  Same-(frequency, covector) trig atoms
merge into one atom through their complex amplitude, which keeps
representations canonical and the bounds tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exterior import KVector, index_sets

__all__ = [
    "TrigAtom",
    "PolyAtom",
    "FormSpec",
    "evaluate",
    "derivative",
    "cr_bound",
    "lie_derivative",
    "exterior_derivative",
]

TWO_PI = 2.0 * math.pi


def _wrap_phase(phase: float) -> float:
    """Reduce to (-pi, pi]."""
    w = math.fmod(phase, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    elif w > math.pi:
        w -= TWO_PI
    return w


@dataclass(frozen=True)
class TrigAtom:
    """c * sin(xi . x + phase) * dx_I with I strictly increasing, 0-based."""

    c: float
    xi: tuple[float, ...]
    phase: float
    index_set: tuple[int, ...]

    def canonical(self) -> "TrigAtom":
        """Flip xi so its first nonzero entry is positive.

        sin(-xi.x + (pi - phase)) == sin(xi.x + phase), so negating the
        frequency and reflecting the phase is an identity; fixing the sign
        lets equal-frequency atoms find each other when merging.
        """
        xi = self.xi
        lead = next((x for x in xi if x != 0.0), 0.0)
        if lead < 0.0:
            return TrigAtom(
                self.c,
                tuple(-x for x in xi),
                _wrap_phase(math.pi - self.phase),
                self.index_set,
            )
        return TrigAtom(self.c, xi, _wrap_phase(self.phase), self.index_set)

    def freq_norm(self) -> float:
        return math.sqrt(sum(x * x for x in self.xi))


@dataclass(frozen=True)
class PolyAtom:
    """c * prod_i x_i^{E_i} * dx_I; exponents E_i are nonnegative ints."""

    c: float
    exponents: tuple[int, ...]
    index_set: tuple[int, ...]


def _check_index_set(idx: tuple[int, ...], n: int, k: int) -> None:
    if len(idx) != k or any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"covector index set {idx} is not an increasing {k}-set")
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError(f"covector index set {idx} out of range for dimension {n}")


class FormSpec:
    """A differential k-form on R^n given as a finite list of atoms."""

    __slots__ = ("n", "k", "trig_atoms", "poly_atoms", "_packed")

    def __init__(
        self,
        n: int,
        k: int,
        trig_atoms: Iterable[TrigAtom] = (),
        poly_atoms: Iterable[PolyAtom] = (),
    ):
        if not 0 <= k <= n:
            raise ValueError(f"grade {k} out of range for dimension {n}")
        merged: dict[tuple, complex] = {}
        for atom in trig_atoms:
            if len(atom.xi) != n:
                raise ValueError(f"frequency vector {atom.xi} not in R^{n}")
            _check_index_set(atom.index_set, n, k)
            a = atom.canonical()
            key = (a.xi, a.index_set)
            merged[key] = merged.get(key, 0j) + a.c * complex(
                math.cos(a.phase), math.sin(a.phase)
            )
        trig = []
        for (xi, idx), z in merged.items():
            r = abs(z)
            if r > 0.0:
                trig.append(TrigAtom(r, xi, math.atan2(z.imag, z.real), idx))
        trig.sort(key=lambda a: (a.xi, a.index_set))
        poly = []
        for atom in poly_atoms:
            if len(atom.exponents) != n:
                raise ValueError(f"exponent multi-index {atom.exponents} not in R^{n}")
            if any(e < 0 for e in atom.exponents):
                raise ValueError("negative exponent")
            _check_index_set(atom.index_set, n, k)
            if atom.c != 0.0:
                poly.append(atom)
        poly.sort(key=lambda a: (a.exponents, a.index_set))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "trig_atoms", tuple(trig))
        object.__setattr__(self, "poly_atoms", tuple(poly))
        object.__setattr__(self, "_packed", None)

    def __setattr__(self, name, value):
        raise AttributeError("FormSpec is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def trig(
        cls,
        n: int,
        amplitude: float,
        frequency: Sequence[float],
        phase: float,
        index_set: Iterable[int],
    ) -> "FormSpec":
        """Single atom amplitude*sin(frequency . x + phase)*dx_{index_set}."""
        idx = tuple(index_set)
        return cls(n, len(idx), [TrigAtom(amplitude, tuple(map(float, frequency)), phase, idx)])

    @classmethod
    def constant(cls, n: int, coefficient: float, index_set: Iterable[int]) -> "FormSpec":
        """Constant-coefficient form: coefficient * dx_{index_set}."""
        idx = tuple(index_set)
        atom = TrigAtom(coefficient, (0.0,) * n, math.pi / 2.0, idx)
        return cls(n, len(idx), [atom])

    @classmethod
    def poly(
        cls,
        n: int,
        coefficient: float,
        exponents: Sequence[int],
        index_set: Iterable[int],
    ) -> "FormSpec":
        """Single monomial atom coefficient * x^exponents * dx_{index_set}."""
        idx = tuple(index_set)
        return cls(n, len(idx), [], [PolyAtom(coefficient, tuple(exponents), idx)])

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "FormSpec") -> "FormSpec":
        if self.n != other.n or self.k != other.k:
            raise ValueError("dimension/grade mismatch")
        return FormSpec(
            self.n,
            self.k,
            self.trig_atoms + other.trig_atoms,
            self.poly_atoms + other.poly_atoms,
        )

    def __mul__(self, scalar: float) -> "FormSpec":
        s = float(scalar)
        return FormSpec(
            self.n,
            self.k,
            [TrigAtom(s * a.c, a.xi, a.phase, a.index_set) for a in self.trig_atoms],
            [PolyAtom(s * a.c, a.exponents, a.index_set) for a in self.poly_atoms],
        )

    __rmul__ = __mul__

    def __neg__(self) -> "FormSpec":
        return self * -1.0

    def is_certifiable(self) -> bool:
        """True when every atom belongs to the globally bounded family."""
        return not self.poly_atoms

    def packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Trig atoms as flat arrays (amp, xi-matrix, phase, covector column).

        The covector column is the lexicographic position of each atom's
        index set, matching KVector coefficient layout.  Cached; used by the
        pairing kernels.
        """
        packed = self._packed
        if packed is None:
            pos = {idx: i for i, idx in enumerate(index_sets(self.n, self.k))}
            m = len(self.trig_atoms)
            amp = np.empty(m)
            xi = np.empty((m, self.n))
            phase = np.empty(m)
            icol = np.empty(m, dtype=np.int32)
            for i, a in enumerate(self.trig_atoms):
                amp[i] = a.c
                xi[i] = a.xi
                phase[i] = a.phase
                icol[i] = pos[a.index_set]
            packed = (amp, xi, phase, icol)
            object.__setattr__(self, "_packed", packed)
        return packed

    def __repr__(self) -> str:
        def iname(idx):
            return "dx" + "".join(str(i + 1) for i in idx) if idx else "1"

        parts = [
            f"{a.c:g}*sin({tuple(a.xi)}.x{a.phase:+g})*{iname(a.index_set)}"
            for a in self.trig_atoms
        ]
        parts += [
            f"{a.c:g}*x^{a.exponents}*{iname(a.index_set)}" for a in self.poly_atoms
        ]
        return f"FormSpec({self.n},{self.k}: {' + '.join(parts) if parts else '0'})"


def _poly_derivative_terms(
    atom: PolyAtom, dirs: Sequence[Sequence[float]]
) -> dict[tuple[int, ...], float]:
    """Iterated directional derivative of a monomial, termwise and exact."""
    terms = {atom.exponents: atom.c}
    for v in dirs:
        nxt: dict[tuple[int, ...], float] = {}
        for exps, c in terms.items():
            for i, e in enumerate(exps):
                if e == 0 or v[i] == 0.0:
                    continue
                dexps = exps[:i] + (e - 1,) + exps[i + 1 :]
                nxt[dexps] = nxt.get(dexps, 0.0) + c * e * float(v[i])
        terms = nxt
        if not terms:
            break
    return terms


def derivative(
    w: FormSpec,
    dirs: Sequence[Sequence[float]],
    p: Sequence[float],
    a: KVector,
) -> float:
    """Iterated directional derivative of x -> w(x; a), evaluated at p.

    Computed analytically from the atoms: each differentiation of a trig
    atom multiplies the amplitude by xi . v and advances the phase by pi/2;
    poly atoms differentiate termwise.  dirs == [] gives plain evaluation.
    """
    if w.n != a.n or w.k != a.k:
        raise ValueError(
            f"dimension/grade mismatch: form ({w.n},{w.k}) vs k-vector ({a.n},{a.k})"
        )
    pvec = np.asarray(p, dtype=np.float64)
    if pvec.shape != (w.n,):
        raise ValueError(f"point {p!r} not in R^{w.n}")
    dvecs = [np.asarray(v, dtype=np.float64) for v in dirs]
    for v in dvecs:
        if v.shape != (w.n,):
            raise ValueError(f"direction {v!r} not in R^{w.n}")
    j = len(dvecs)
    shift = j * (math.pi / 2.0)
    pos = {idx: i for i, idx in enumerate(index_sets(w.n, w.k))}
    coeffs = a.coeffs
    total = 0.0
    for atom in w.trig_atoms:
        av = coeffs[pos[atom.index_set]]
        if av == 0.0:
            continue
        factor = atom.c
        for v in dvecs:
            factor *= float(np.dot(atom.xi, v))
            if factor == 0.0:
                break
        if factor == 0.0:
            continue
        total += factor * math.sin(float(np.dot(atom.xi, pvec)) + atom.phase + shift) * av
    for atom in w.poly_atoms:
        av = coeffs[pos[atom.index_set]]
        if av == 0.0:
            continue
        for exps, c in _poly_derivative_terms(atom, dvecs).items():
            val = c
            for x, e in zip(pvec, exps):
                if e:
                    val *= float(x) ** e
            total += val * av
    return total


def evaluate(w: FormSpec, p: Sequence[float], a: KVector) -> float:
    """w(p; a), the pointwise pairing against a k-vector."""
    return derivative(w, [], p, a)


def cr_bound(w: FormSpec, r: int) -> float:
    """Certified bound on w and its directional derivatives up to order r.

    Returns B with B >= |j-th iterated derivative of w at any point, along
    any unit directions, against any unit-mass k-vector| for every j <= r.
    Atoms sharing a frequency vector are grouped and their amplitudes
    combined in l2: at each point the group's covector has euclidean norm
    at most the l2 of the amplitudes, and euclidean norm dominates comass.
    Each differentiation scales a group by at most |xi|, so the bound is
    max over j <= r of sum over groups of l2(amplitudes) * |xi|^j.
    """
    if r < 0:
        raise ValueError("derivative order must be nonnegative")
    if not w.is_certifiable():
        raise ValueError("uncertifiable family: polynomial atoms present")
    groups: dict[tuple[float, ...], float] = {}
    for atom in w.trig_atoms:
        groups[atom.xi] = groups.get(atom.xi, 0.0) + atom.c * atom.c
    best = 0.0
    for xi, sq in groups.items():
        amp = math.sqrt(sq)
        f = math.sqrt(sum(x * x for x in xi))
        # max over j <= r of amp * f^j is amp when f <= 1, amp * f^r otherwise
        best += amp * max(1.0, f) ** r
    return best


def lie_derivative(w: FormSpec, v: Sequence[float]) -> FormSpec:
    """Derivative of the form's coefficients along a constant vector field.

    For constant v this is the standard flow derivative of the form; the
    chain pairing of a dipole term against w equals the pairing of its base
    term against this form.
    """
    vv = tuple(float(x) for x in v)
    if len(vv) != w.n:
        raise ValueError(f"direction {v!r} not in R^{w.n}")
    trig = []
    for a in w.trig_atoms:
        s = sum(x * y for x, y in zip(a.xi, vv))
        if s != 0.0:
            trig.append(TrigAtom(a.c * s, a.xi, a.phase + math.pi / 2.0, a.index_set))
    poly = []
    for a in w.poly_atoms:
        for exps, c in _poly_derivative_terms(a, [vv]).items():
            poly.append(PolyAtom(c, exps, a.index_set))
    return FormSpec(w.n, w.k, trig, poly)


def _insert_sign(i: int, idx: tuple[int, ...]) -> int:
    """Sign of dx_i ^ dx_idx relative to the sorted index set."""
    pos = sum(1 for j in idx if j < i)
    return -1 if pos % 2 else 1


def exterior_derivative(w: FormSpec) -> FormSpec:
    """Analytic exterior derivative, a grade k+1 form."""
    if w.k >= w.n:
        raise ValueError("grade exceeds dimension")
    trig = []
    for a in w.trig_atoms:
        for i in range(w.n):
            if a.xi[i] == 0.0 or i in a.index_set:
                continue
            sign = _insert_sign(i, a.index_set)
            new_idx = tuple(sorted(a.index_set + (i,)))
            trig.append(
                TrigAtom(sign * a.c * a.xi[i], a.xi, a.phase + math.pi / 2.0, new_idx)
            )
    poly = []
    for a in w.poly_atoms:
        for i in range(w.n):
            if a.exponents[i] == 0 or i in a.index_set:
                continue
            sign = _insert_sign(i, a.index_set)
            new_idx = tuple(sorted(a.index_set + (i,)))
            new_exps = a.exponents[:i] + (a.exponents[i] - 1,) + a.exponents[i + 1 :]
            poly.append(PolyAtom(sign * a.c * a.exponents[i], new_exps, new_idx))
    return FormSpec(w.n, w.k + 1, trig, poly)
