"""Independent brute-force oracle for tiny norm instances.

Discretizes the defining supremum directly: the form becomes its nodal
values on a regular grid, the derivative bounds become finite-difference
constraints at every node, and the supremum becomes a linear program.
Nothing here touches the certificate machinery (no form atoms, no
difference cells), which is the point: it cross-checks the sandwich from
a different direction.

The discretization is honest about what it is: centered differences with
one-sided edge stencils, a direction fan standing in for all unit
directions, same-direction iterated derivatives only.  The value it
reports is a grid-level approximation whose quality is assessed by
refinement trends, not a certified bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .chains import PointedChain

__all__ = ["GridSpec", "norm_oracle_grid"]

VALUE_FAN = 64
DERIV_FAN = 4


@dataclass(frozen=True)
class GridSpec:
    """Regular grid [lo, hi]^n with ``nodes`` nodes per axis."""

    lo: float = -1.0
    hi: float = 1.0
    nodes: int = 81

    def spacing(self) -> float:
        if self.nodes < 2 or self.hi <= self.lo:
            raise ValueError("grid needs at least two nodes and hi > lo")
        return (self.hi - self.lo) / (self.nodes - 1)


def _node_index(p: tuple[float, ...], grid: GridSpec) -> int:
    """Flat node index of an on-grid point; x-major for 2-D."""
    h = grid.spacing()
    g = grid.nodes
    idx = 0
    for x in p:
        pos = (x - grid.lo) / h
        nearest = round(pos)
        if abs(pos - nearest) > 1e-9 or not 0 <= nearest <= g - 1:
            raise ValueError(f"off-grid point {p}")
        idx = idx * g + int(nearest)
    return idx


def _d1_matrix(g: int, h: float) -> sp.csr_matrix:
    """1-D first-derivative matrix: centered inside, one-sided at edges."""
    m = sp.lil_matrix((g, g))
    for i in range(1, g - 1):
        m[i, i + 1] = 0.5 / h
        m[i, i - 1] = -0.5 / h
    m[0, 0] = -1.0 / h
    m[0, 1] = 1.0 / h
    m[g - 1, g - 1] = 1.0 / h
    m[g - 1, g - 2] = -1.0 / h
    return m.tocsr()


def _axis_operators(n: int, grid: GridSpec) -> list[sp.csr_matrix]:
    d1 = _d1_matrix(grid.nodes, grid.spacing())
    if n == 1:
        return [d1]
    eye = sp.identity(grid.nodes, format="csr")
    return [sp.kron(d1, eye, format="csr"), sp.kron(eye, d1, format="csr")]


def _direction_fan(n: int, count: int) -> list[tuple[float, ...]]:
    if n == 1:
        return [(1.0,)]
    return [
        (math.cos(math.pi * i / count), math.sin(math.pi * i / count))
        for i in range(count)
    ]


def norm_oracle_grid(A: PointedChain, r: int, grid: GridSpec) -> float:
    """Discretized dual problem: the norm as a nodal linear program.

    Maximizes the pairing of A against a form given by nodal covector
    values, subject to |form| <= 1 at every node and every same-direction
    iterated finite-difference derivative up to order r bounded by 1.
    Supported for dimensions 1 and 2, grades 0 and 1, chains on the grid.
    """
    if not isinstance(A, PointedChain):
        raise TypeError("oracle expects a pointed chain")
    if A.n > 2:
        raise ValueError("oracle supports dimensions 1 and 2 only")
    if A.k > 1:
        raise ValueError("oracle supports grades 0 and 1 only")
    if r < 0:
        raise ValueError("derivative order must be nonnegative")
    n, k = A.n, A.k
    N = grid.nodes**n
    ncomp = math.comb(n, k)
    nvar = ncomp * N

    obj = np.zeros(nvar)
    for p, alpha in A.terms:
        node = _node_index(p, grid)
        for c in range(ncomp):
            obj[c * N + node] += alpha.coeffs[c]
    if not np.any(obj):
        return 0.0

    blocks = []
    vector_valued = ncomp > 1
    if vector_valued:
        # nodal magnitude constraint as a direction fan over components
        eye = sp.identity(N, format="csr")
        for i in range(VALUE_FAN):
            th = 2.0 * math.pi * i / VALUE_FAN
            blocks.append(sp.hstack([math.cos(th) * eye, math.sin(th) * eye]))
        bounds = (None, None)
    else:
        bounds = (-1.0, 1.0)

    if r >= 1:
        axes = _axis_operators(n, grid)
        comp_fan = _direction_fan(n, DERIV_FAN) if vector_valued else [(1.0,)]
        for u in _direction_fan(n, DERIV_FAN):
            du = sum(c * m for c, m in zip(u, axes) if c != 0.0)
            power = du
            for _ in range(r):
                for v in comp_fan:
                    block = sp.hstack([x * power for x in v])
                    blocks.append(block)
                    blocks.append(-block)
                power = power @ du
    if blocks:
        a_ub = sp.vstack(blocks, format="csr")
        b_ub = np.ones(a_ub.shape[0])
    else:
        a_ub = None
        b_ub = None

    res = linprog(
        -obj, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs"
    )
    if res.status != 0:
        raise RuntimeError(f"oracle linear program failed: {res.message}")
    return float(-res.fun)
