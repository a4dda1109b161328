"""Geometric cells, their Riemann chains, and convergence experiments.

Cells are flat geometric pieces (segments, simplices up to dimension 2,
parallelepiped boxes, sampled curves).  riemann_chain replaces a cell by a
midpoint-rule pointed chain: one term per subcell, placed at the subcell
barycenter, carrying the oriented tangent k-vector whose mass is the
subcell k-volume.  Midpoint placement is what makes refinement differences
collapse into cheap order-1 difference cells: each parent term sits at the
barycenter of its children, so the Cauchy-rate experiment gets an O(1/m)
certificate instead of a generic bound.

The two experiments:

* stokes_residual compares the boundary chain paired with w against the
  cell chain paired with the analytic exterior derivative of w.
* cauchy_rate measures how fast refinements become close in the order-r
  norm, the desk-scale witness that chains of finitely many points
  approximate the continuum object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import PointedChain, pair
from .exterior import KVector, mass
from .forms import FormSpec, exterior_derivative
from .norms import norm_upper

__all__ = [
    "Cell",
    "riemann_chain",
    "cell_boundary",
    "stokes_residual",
    "cauchy_rate",
    "CauchyReport",
]


def _pts(rows: Sequence[Sequence[float]]) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in rows)


@dataclass(frozen=True)
class Cell:
    """Oriented flat cell in R^n.

    kinds: "point" (one vertex), "segment" (two vertices), "simplex"
    (k+1 vertices, k <= 2), "box" (base vertex plus ``edges`` spanning
    vectors), "curve" (polyline of parametrization samples, uniform in
    parameter).  ``orientation`` multiplies the tangent k-vector.
    """

    kind: str
    vertices: tuple[tuple[float, ...], ...]
    edges: tuple[tuple[float, ...], ...] = ()
    orientation: int = 1

    # -- constructors --------------------------------------------------

    @classmethod
    def point(cls, p, orientation: int = 1) -> "Cell":
        return cls("point", _pts([p]), (), orientation)

    @classmethod
    def segment(cls, a, b, orientation: int = 1) -> "Cell":
        cell = cls("segment", _pts([a, b]), (), orientation)
        cell._validate()
        return cell

    @classmethod
    def simplex(cls, vertices, orientation: int = 1) -> "Cell":
        cell = cls("simplex", _pts(vertices), (), orientation)
        cell._validate()
        return cell

    @classmethod
    def box(cls, base, edges, orientation: int = 1) -> "Cell":
        cell = cls("box", _pts([base]), _pts(edges), orientation)
        cell._validate()
        return cell

    @classmethod
    def curve(cls, samples, orientation: int = 1) -> "Cell":
        cell = cls("curve", _pts(samples), (), orientation)
        cell._validate()
        return cell

    # -- structure ------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices[0])

    @property
    def dim(self) -> int:
        if self.kind == "point":
            return 0
        if self.kind in ("segment", "curve"):
            return 1
        if self.kind == "simplex":
            return len(self.vertices) - 1
        return len(self.edges)

    def _span(self) -> list[np.ndarray]:
        v0 = np.array(self.vertices[0])
        if self.kind == "segment":
            return [np.array(self.vertices[1]) - v0]
        if self.kind == "simplex":
            return [np.array(v) - v0 for v in self.vertices[1:]]
        if self.kind == "box":
            return [np.array(e) for e in self.edges]
        raise ValueError(f"no flat span for cell kind {self.kind!r}")

    def volume(self) -> float:
        """k-volume: length, simplex volume, box volume, polyline length."""
        if self.kind == "point":
            return 1.0
        if self.kind == "curve":
            pts = np.array(self.vertices)
            return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
        span = self._span()
        blade = KVector.from_vectors(span) if span else None
        vol = mass(blade)
        if self.kind == "simplex":
            vol /= math.factorial(self.dim)
        return vol

    def _validate(self) -> None:
        if self.kind not in ("point", "segment", "simplex", "box", "curve"):
            raise ValueError(f"unknown cell kind {self.kind!r}")
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        n = self.n
        for v in self.vertices + self.edges:
            if len(v) != n:
                raise ValueError("inconsistent vertex dimensions")
        if self.kind == "segment" and len(self.vertices) != 2:
            raise ValueError("segment needs exactly two vertices")
        if self.kind == "simplex":
            if not 2 <= len(self.vertices) <= 3:
                raise ValueError("simplex cells support dimensions 1 and 2")
        if self.kind == "box" and not self.edges:
            raise ValueError("box needs at least one edge vector")
        if self.kind == "curve" and len(self.vertices) < 2:
            raise ValueError("curve needs at least two samples")
        if self.dim > n:
            raise ValueError("cell dimension exceeds ambient dimension")
        if self.kind != "point" and self.volume() <= 0.0:
            raise ValueError("degenerate cell")


def _curve_point(samples: np.ndarray, t: float) -> np.ndarray:
    """Piecewise-linear interpolation of uniformly spaced samples."""
    segs = samples.shape[0] - 1
    s = min(max(t, 0.0), 1.0) * segs
    i = min(int(s), segs - 1)
    frac = s - i
    return (1.0 - frac) * samples[i] + frac * samples[i + 1]


def riemann_chain(c: Cell, m: int) -> PointedChain:
    """Midpoint-rule pointed chain of a cell at subdivision count m.

    One term per subcell: the point is the subcell barycenter and the
    k-vector the oriented tangent with mass equal to the subcell k-volume,
    so total mass equals the cell k-volume exactly for flat cells.
    """
    if m < 1:
        raise ValueError("subdivision count must be at least 1")
    sign = float(c.orientation)
    n = c.n
    if c.kind == "point":
        return PointedChain(n, 0, [(c.vertices[0], KVector.scalar(n, sign))])
    if c.kind == "segment":
        a = np.array(c.vertices[0])
        d = (np.array(c.vertices[1]) - a) / m
        alpha = KVector(n, 1, sign * d)
        return PointedChain(
            n, 1, [(a + (j + 0.5) * d, alpha) for j in range(m)]
        )
    if c.kind == "curve":
        samples = np.array(c.vertices)
        terms = []
        for j in range(m):
            p0 = _curve_point(samples, j / m)
            p1 = _curve_point(samples, (j + 1) / m)
            chord = p1 - p0
            terms.append(((p0 + p1) / 2.0, KVector(n, 1, sign * chord)))
        return PointedChain(n, 1, terms)
    if c.kind == "box":
        edges = [np.array(e) / m for e in c.edges]
        k = len(edges)
        alpha = sign * KVector.from_vectors(edges)
        base = np.array(c.vertices[0])
        terms = []
        for multi in np.ndindex(*([m] * k)):
            p = base.copy()
            for j, e in zip(multi, edges):
                p = p + (j + 0.5) * e
            terms.append((p, alpha))
        return PointedChain(n, k, terms)
    if c.kind == "simplex":
        if c.dim == 1:
            return riemann_chain(
                Cell.segment(c.vertices[0], c.vertices[1], c.orientation), m
            )
        v0 = np.array(c.vertices[0])
        e1 = (np.array(c.vertices[1]) - v0) / m
        e2 = (np.array(c.vertices[2]) - v0) / m
        alpha = sign * 0.5 * KVector.from_vectors([e1, e2])
        terms = []
        for i in range(m):
            for j in range(m - i):
                q = v0 + i * e1 + j * e2
                terms.append((q + (e1 + e2) / 3.0, alpha))
                if i + j <= m - 2:
                    terms.append((q + 2.0 * (e1 + e2) / 3.0, alpha))
        return PointedChain(n, 2, terms)
    raise ValueError(f"unknown cell kind {c.kind!r}")


def cell_boundary(c: Cell) -> list[Cell]:
    """Oriented boundary as a list of (k-1)-cells.

    Orientations follow the alternating-face convention, so applying the
    boundary twice cancels to the empty multiset.
    """
    if c.kind == "point":
        raise ValueError("points have no boundary")
    sign = c.orientation
    if c.kind in ("segment", "curve"):
        first, last = c.vertices[0], c.vertices[-1]
        return [Cell.point(last, sign), Cell.point(first, -sign)]
    if c.kind == "simplex":
        out = []
        for i in range(len(c.vertices)):
            face = tuple(v for j, v in enumerate(c.vertices) if j != i)
            face_sign = sign if i % 2 == 0 else -sign
            if len(face) == 1:
                out.append(Cell.point(face[0], face_sign))
            else:
                out.append(Cell("simplex", face, (), face_sign))
        return out
    if c.kind == "box":
        base = np.array(c.vertices[0])
        out = []
        for i, edge in enumerate(c.edges):
            rest = tuple(e for j, e in enumerate(c.edges) if j != i)
            plus_sign = sign if i % 2 == 0 else -sign
            far = tuple(base + np.array(edge))
            near = tuple(base)
            if rest:
                out.append(Cell("box", (far,), rest, plus_sign))
                out.append(Cell("box", (near,), rest, -plus_sign))
            else:
                out.append(Cell.point(far, plus_sign))
                out.append(Cell.point(near, -plus_sign))
        return out
    raise ValueError(f"unknown cell kind {c.kind!r}")


def boundary_chain(c: Cell, m: int) -> PointedChain:
    """Riemann chain of the oriented boundary at subdivision count m."""
    faces = cell_boundary(c)
    total = riemann_chain(faces[0], m)
    for face in faces[1:]:
        total = total + riemann_chain(face, m)
    return total


def stokes_residual(c: Cell, w: FormSpec, m: int) -> float:
    """|pairing of the boundary chain with w - pairing of the cell chain with dw|.

    Both quadratures are midpoint rule, so for atoms the residual decays at
    the quadrature rate as m grows.
    """
    if w.k != c.dim - 1:
        raise ValueError(
            f"form grade {w.k} does not match boundary grade {c.dim - 1}"
        )
    lhs = pair(boundary_chain(c, m), w)
    rhs = pair(riemann_chain(c, m), exterior_derivative(w))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class CauchyReport:
    """Fitted decay of refinement differences in the order-r norm."""

    r: int
    series: tuple[tuple[int, float], ...]
    slope: float


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x); -inf if any y is 0."""
    if any(y <= 0.0 for y in ys):
        return -math.inf
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def cauchy_rate(c: Cell, r: int, m_list: Sequence[int]) -> CauchyReport:
    """Norm decay of successive refinements: upper(A_{2m} - A_m, r) per m.

    Midpoint refinement makes A_{2m} - A_m decompose into order-1 difference
    cells of total weight O(1/m) for flat cells, so the fitted slope at
    r >= 1 is near -1, while at r = 0 the bound is total mass and does not
    decay.
    """
    if r < 0:
        raise ValueError("derivative order must be nonnegative")
    ms = list(m_list)
    if ms != sorted(ms) or len(ms) < 2:
        raise ValueError("need an increasing list of at least two subdivision counts")
    series = []
    for m in ms:
        diff = riemann_chain(c, 2 * m) - riemann_chain(c, m)
        value, _ = norm_upper(diff, r)
        series.append((m, value))
    slope = fit_loglog_slope([m for m, _ in series], [v for _, v in series])
    return CauchyReport(r, tuple(series), slope)
