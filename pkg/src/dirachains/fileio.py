"""Text formats for chains, forms, and cells, with line-numbered errors.

Chain file: header ``n k``, then one term per line::

    p1 .. pn | c1 .. cC | v11 .. v1n; v21 .. v2n; ...

The middle field holds the C(n,k) tangent coefficients in lexicographic
index-set order.  The third field lists dipole directions separated by
semicolons and may be empty or absent for pointed terms.

Form file: header ``n k``, then one atom per line::

    trig c xi1 .. xin phase i1 .. ik
    poly c e1 .. en i1 .. ik

``phase`` is a float, or the tokens ``sin`` (0) / ``cos`` (pi/2).  Covector
indices are 1-based.

Cell file: a kind line, vertex/edge rows, and an optional
``orientation -1`` line.  Box cells read the first row as the base vertex
and the remaining rows as edge vectors.

Blank lines and ``#`` comments are skipped everywhere.  All parse
failures raise ParseError carrying the path and 1-based line number.
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Sequence

from .approx import Cell
from .chains import DipoleChain, PointedChain
from .exterior import KVector, index_sets
from .forms import FormSpec

__all__ = [
    "ParseError",
    "load_chain",
    "load_form",
    "load_cell",
    "format_chain",
    "format_form",
    "write_atomic",
]


class ParseError(Exception):
    """Malformed input file; str() is ``path:line: message``."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        self.message = message
        super().__init__(f"{path}:{line}: {message}")


def _content_lines(path: str) -> list[tuple[int, str]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read file: {exc.strerror}") from exc
    out = []
    for no, line in enumerate(raw, 1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            out.append((no, stripped))
    return out


def _floats(path: str, no: int, tokens: Sequence[str], what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in tokens)
    except ValueError as exc:
        raise ParseError(path, no, f"bad {what}: {exc}") from exc
    if any(math.isnan(v) or math.isinf(v) for v in values):
        raise ParseError(path, no, f"bad {what}: must be finite")
    return values


def _header(path: str, lines: list[tuple[int, str]], what: str) -> tuple[int, int]:
    if not lines:
        raise ParseError(path, 1, f"empty {what} file, expected 'n k' header")
    no, text = lines[0]
    tokens = text.split()
    if len(tokens) != 2:
        raise ParseError(path, no, f"expected header 'n k', got {text!r}")
    try:
        n, k = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ParseError(path, no, f"expected integer header 'n k', got {text!r}")
    if n < 1 or not 0 <= k <= n:
        raise ParseError(path, no, f"invalid dimensions n={n}, k={k}")
    return n, k


def load_chain(path: str):
    """Parse a chain file; returns PointedChain, or DipoleChain if any
    term carries directions."""
    lines = _content_lines(path)
    n, k = _header(path, lines, "chain")
    ncoeff = len(index_sets(n, k))
    terms = []
    has_dirs = False
    for no, text in lines[1:]:
        fields = [f.strip() for f in text.split("|")]
        if len(fields) not in (2, 3):
            raise ParseError(
                path, no, f"expected 2 or 3 '|'-separated fields, got {len(fields)}"
            )
        point = _floats(path, no, fields[0].split(), "point")
        if len(point) != n:
            raise ParseError(
                path, no, f"point has {len(point)} coordinates, expected {n}"
            )
        coeffs = _floats(path, no, fields[1].split(), "coefficients")
        if len(coeffs) != ncoeff:
            raise ParseError(
                path, no,
                f"got {len(coeffs)} coefficients, expected {ncoeff} for grade {k} in R^{n}",
            )
        dirs = []
        if len(fields) == 3 and fields[2]:
            for piece in fields[2].split(";"):
                piece = piece.strip()
                if not piece:
                    continue
                v = _floats(path, no, piece.split(), "direction")
                if len(v) != n:
                    raise ParseError(
                        path, no, f"direction has {len(v)} coordinates, expected {n}"
                    )
                dirs.append(v)
        if dirs:
            has_dirs = True
        terms.append((point, KVector(n, k, coeffs), tuple(dirs)))
    try:
        if has_dirs:
            return DipoleChain(n, k, terms)
        return PointedChain(n, k, [(p, a) for p, a, _ in terms])
    except ValueError as exc:
        raise ParseError(path, lines[0][0], str(exc)) from exc


def _indices(
    path: str, no: int, tokens: Sequence[str], n: int, k: int
) -> tuple[int, ...]:
    if len(tokens) != k:
        raise ParseError(path, no, f"expected {k} covector indices, got {len(tokens)}")
    try:
        idx = tuple(int(t) - 1 for t in tokens)
    except ValueError:
        raise ParseError(path, no, f"bad covector indices {tokens!r}")
    if any(not 0 <= i < n for i in idx):
        raise ParseError(path, no, f"covector indices must lie in 1..{n}")
    if list(idx) != sorted(set(idx)):
        raise ParseError(path, no, "covector indices must be distinct and increasing")
    return idx


def load_form(path: str) -> FormSpec:
    """Parse a form file into a FormSpec (atoms merged canonically)."""
    lines = _content_lines(path)
    n, k = _header(path, lines, "form")
    total = FormSpec(n, k, [])
    for no, text in lines[1:]:
        tokens = text.split()
        kind = tokens[0]
        if kind == "trig":
            if len(tokens) != 3 + n + k:
                raise ParseError(
                    path, no,
                    f"trig atom needs {3 + n + k} tokens "
                    f"(trig c xi1..xi{n} phase {k} indices), got {len(tokens)}",
                )
            c = _floats(path, no, tokens[1:2], "amplitude")[0]
            xi = _floats(path, no, tokens[2 : 2 + n], "frequency")
            ph_tok = tokens[2 + n]
            if ph_tok == "sin":
                phase = 0.0
            elif ph_tok == "cos":
                phase = math.pi / 2.0
            else:
                phase = _floats(path, no, [ph_tok], "phase")[0]
            idx = _indices(path, no, tokens[3 + n :], n, k)
            try:
                atom = FormSpec.trig(n, c, xi, phase, idx)
            except ValueError as exc:
                raise ParseError(path, no, str(exc)) from exc
        elif kind == "poly":
            if len(tokens) != 2 + n + k:
                raise ParseError(
                    path, no,
                    f"poly atom needs {2 + n + k} tokens "
                    f"(poly c e1..e{n} {k} indices), got {len(tokens)}",
                )
            c = _floats(path, no, tokens[1:2], "coefficient")[0]
            try:
                expo = tuple(int(t) for t in tokens[2 : 2 + n])
            except ValueError:
                raise ParseError(path, no, "polynomial exponents must be integers")
            if any(e < 0 for e in expo):
                raise ParseError(path, no, "polynomial exponents must be nonnegative")
            idx = _indices(path, no, tokens[2 + n :], n, k)
            try:
                atom = FormSpec.poly(n, c, expo, idx)
            except ValueError as exc:
                raise ParseError(path, no, str(exc)) from exc
        else:
            raise ParseError(path, no, f"unknown atom kind {kind!r}")
        total = total + atom
    return total


_CELL_KINDS = ("point", "segment", "simplex", "box", "curve")


def load_cell(path: str) -> Cell:
    """Parse a cell file (kind, rows, optional orientation line)."""
    lines = _content_lines(path)
    if not lines:
        raise ParseError(path, 1, "empty cell file, expected a kind line")
    no0, kind = lines[0]
    if kind not in _CELL_KINDS:
        raise ParseError(
            path, no0, f"unknown cell kind {kind!r}, expected one of {_CELL_KINDS}"
        )
    rows: list[tuple[float, ...]] = []
    orientation = 1
    for no, text in lines[1:]:
        tokens = text.split()
        if tokens[0] == "orientation":
            if len(tokens) != 2 or tokens[1] not in ("1", "-1", "+1"):
                raise ParseError(path, no, "orientation line must read 'orientation +1|-1'")
            orientation = int(tokens[1])
            continue
        row = _floats(path, no, tokens, "vertex row")
        if rows and len(row) != len(rows[0]):
            raise ParseError(
                path, no, f"row has {len(row)} coordinates, expected {len(rows[0])}"
            )
        rows.append(row)
    try:
        if kind == "point":
            if len(rows) != 1:
                raise ValueError(f"point cell needs 1 row, got {len(rows)}")
            return Cell.point(rows[0], orientation)
        if kind == "segment":
            if len(rows) != 2:
                raise ValueError(f"segment cell needs 2 rows, got {len(rows)}")
            return Cell.segment(rows[0], rows[1], orientation)
        if kind == "simplex":
            return Cell.simplex(rows, orientation)
        if kind == "box":
            if len(rows) < 2:
                raise ValueError("box cell needs a base row and at least one edge row")
            return Cell.box(rows[0], rows[1:], orientation)
        return Cell.curve(rows, orientation)
    except ValueError as exc:
        raise ParseError(path, no0, str(exc)) from exc


# -- writers ------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def format_chain(chain) -> str:
    """Serialize a chain in the chain file format (repr floats, so a
    reload reproduces every value bitwise)."""
    out = [f"{chain.n} {chain.k}"]
    for term in chain.terms:
        if isinstance(chain, DipoleChain):
            point, alpha, dirs = term
        else:
            (point, alpha), dirs = term, ()
        p = " ".join(_num(x) for x in point)
        c = " ".join(_num(x) for x in alpha.coeffs)
        d = "; ".join(" ".join(_num(x) for x in v) for v in dirs)
        out.append(f"{p} | {c} | {d}" if d else f"{p} | {c} |")
    return "\n".join(out) + "\n"


def format_form(w: FormSpec) -> str:
    """Serialize a FormSpec in the form file format."""
    out = [f"{w.n} {w.k}"]
    for atom in w.trig_atoms:
        idx = " ".join(str(i + 1) for i in atom.index_set)
        xi = " ".join(_num(x) for x in atom.xi)
        out.append(f"trig {_num(atom.c)} {xi} {_num(atom.phase)} {idx}".rstrip())
    for atom in w.poly_atoms:
        idx = " ".join(str(i + 1) for i in atom.index_set)
        expo = " ".join(str(e) for e in atom.exponents)
        out.append(f"poly {_num(atom.c)} {expo} {idx}".rstrip())
    return "\n".join(out) + "\n"


def format_cell_decomposition(cells, n: int, k: int, r: int) -> str:
    """Serialize an upper-bound decomposition certificate.

    Chain-style rows with two extra fields: header ``n k r``, then per cell
    ``point | coeffs | difference vectors | dipole directions``.
    """
    out = [f"{n} {k} {r}"]
    for cell in cells:
        p = " ".join(_num(x) for x in cell.point)
        c = " ".join(_num(x) for x in cell.alpha.coeffs)
        d = "; ".join(" ".join(_num(x) for x in v) for v in cell.diffs)
        e = "; ".join(" ".join(_num(x) for x in v) for v in cell.dipole_dirs)
        out.append(f"{p} | {c} | {d} | {e}")
    return "\n".join(out) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write text to path via a temp file and rename, so partial output
    never lands under the final name."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
