"""Exact dense linear algebra over the rationals.

Scalars are :class:`fractions.Fraction` (always normalised, denominator > 0).
Matrices are immutable and row-major.  Elimination runs on integer rows with
gcd reduction and only converts back to fractions for the final reduced form,
so the observable output is the canonical reduced row-echelon form.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

__all__ = [
    "Matrix",
    "NoSolutionError",
    "as_fraction",
    "rref",
    "rank",
    "nullspace",
    "solve",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class NoSolutionError(ValueError):
    """Raised by :func:`solve` when the right-hand side is not in the column space."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


class Matrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Iterable[Iterable], cols: int | None = None):
        data = tuple(tuple(as_fraction(x) for x in row) for row in entries)
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged matrix rows")
        self.rows = len(data)
        self.cols = cols
        self._data = data

    @classmethod
    def _wrap(cls, data: tuple, rows: int, cols: int) -> "Matrix":
        m = object.__new__(cls)
        m.rows, m.cols, m._data = rows, cols, data
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls._wrap(tuple((ZERO,) * cols for _ in range(rows)), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._wrap(
            tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n, n
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Matrix":
        columns = [tuple(as_fraction(x) for x in c) for c in columns]
        if rows is None:
            if not columns:
                raise ValueError("row count required for a matrix with no columns")
            rows = len(columns[0])
        data = tuple(tuple(c[i] for c in columns) for i in range(rows))
        return cls._wrap(data, rows, len(columns))

    @classmethod
    def from_sparse_columns(cls, columns: Sequence[dict], rows: int) -> "Matrix":
        grid = [[ZERO] * len(columns) for _ in range(rows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                grid[i][j] = as_fraction(v)
        return cls._wrap(tuple(tuple(r) for r in grid), rows, len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key):
        i, j = key
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(
            tuple(tuple(self._data[i][j] for i in range(self.rows)) for j in range(self.cols)),
            self.cols,
            self.rows,
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(_fstr(x) for x in r) for r in self._data)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"

    def _check_same(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._wrap(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
            self.rows,
            self.cols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._wrap(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
            self.rows,
            self.cols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(tuple(tuple(-a for a in r) for r in self._data), self.rows, self.cols)

    def scale(self, k) -> "Matrix":
        k = as_fraction(k)
        return Matrix._wrap(tuple(tuple(k * a for a in r) for r in self._data), self.rows, self.cols)

    def __mul__(self, k) -> "Matrix":
        if isinstance(k, Matrix):
            return NotImplemented
        return self.scale(k)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        orows = other._data
        out = []
        for r in self._data:
            acc = [ZERO] * other.cols
            for k, a in enumerate(r):
                if a:
                    for j, b in enumerate(orows[k]):
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return Matrix._wrap(tuple(out), self.rows, other.cols)

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * x for a, x in zip(r, v) if a and x), ZERO) for r in self._data)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return Matrix._wrap(
            tuple(r + s for r, s in zip(self._data, other._data)), self.rows, self.cols + other.cols
        )

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return Matrix._wrap(self._data + other._data, self.rows + other.rows, self.cols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._wrap(
            tuple(tuple(self._data[i][j] for j in cols) for i in rows), len(rows), len(cols)
        )

    def is_invertible(self) -> bool:
        return self.rows == self.cols and rank(self) == self.rows

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        r, piv = rref(self.hstack(Matrix.identity(n)))
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return r.submatrix(range(n), range(n, 2 * n))


def _fstr(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _integer_row(row: Sequence[Fraction]) -> dict[int, int]:
    """Scale a rational row to a primitive integer row, stored sparsely."""
    nz = {j: x for j, x in enumerate(row) if x}
    if not nz:
        return {}
    den = lcm(*(x.denominator for x in nz.values()))
    out = {j: int(x * den) for j, x in nz.items()}
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {j: v // g for j, v in row.items()}
    return row


def _eliminate(row: dict[int, int], piv: dict[int, int], col: int) -> dict[int, int]:
    """Return a*row - b*piv with the entry in ``col`` cancelled, made primitive."""
    a, b = piv[col], row[col]
    g = gcd(a, b)
    a, b = a // g, b // g
    out = {j: a * v for j, v in row.items()}
    for j, v in piv.items():
        w = out.get(j, 0) - b * v
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    return _primitive(out)


def _integer_rref(rows: list[dict[int, int]], ncols: int) -> tuple[list[dict[int, int]], list[int]]:
    remaining = [r for r in rows if r]
    done: list[dict[int, int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        if not remaining:
            break
        candidates = [i for i, r in enumerate(remaining) if col in r]
        if not candidates:
            continue
        # pivot choice only affects cost, never the reduced form
        best = min(candidates, key=lambda i: (len(remaining[i]), abs(remaining[i][col])))
        p = remaining.pop(best)
        if p[col] < 0:
            p = {j: -v for j, v in p.items()}
        remaining = [(_eliminate(r, p, col) if col in r else r) for r in remaining]
        remaining = [r for r in remaining if r]
        done = [(_eliminate(r, p, col) if col in r else r) for r in done]
        done.append(p)
        pivots.append(col)
    return done, pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form and the list of pivot columns."""
    rows, pivots = _integer_rref([_integer_row(r) for r in m._data], m.cols)
    out = []
    for r, c in zip(rows, pivots):
        lead = r[c]
        dense = [ZERO] * m.cols
        for j, v in r.items():
            dense[j] = Fraction(v, lead)
        out.append(tuple(dense))
    out.extend((ZERO,) * m.cols for _ in range(m.rows - len(out)))
    return Matrix._wrap(tuple(out), m.rows, m.cols), pivots


def rank(m: Matrix) -> int:
    return len(_integer_rref([_integer_row(r) for r in m._data], m.cols)[1])


def nullspace(m: Matrix) -> Matrix:
    """Columns form the canonical free-variable basis of ``ker m``.

    Basis vector ``k`` has a 1 in the k-th free column, 0 in every other free
    column; vectors are ordered by increasing free-column index.
    """
    r, pivots = rref(m)
    pivset = set(pivots)
    free = [j for j in range(m.cols) if j not in pivset]
    cols = []
    for f in free:
        v = {f: ONE}
        for i, p in enumerate(pivots):
            x = r[i, f]
            if x:
                v[p] = -x
        cols.append(v)
    return Matrix.from_sparse_columns(cols, m.cols)


def solve(m: Matrix, b: Sequence) -> tuple:
    """One exact solution of ``m x = b`` with every free variable set to zero."""
    if len(b) != m.rows:
        raise ValueError("right-hand side length does not match the row count")
    aug = m.hstack(Matrix.from_columns([b], rows=m.rows))
    r, pivots = rref(aug)
    if pivots and pivots[-1] == m.cols:
        raise NoSolutionError("right-hand side is not in the column space")
    x = [ZERO] * m.cols
    for i, p in enumerate(pivots):
        x[p] = r[i, m.cols]
    return tuple(x)


def independent_columns(m: Matrix) -> list[int]:
    """Indices of the leftmost maximal linearly independent set of columns."""
    return rref(m)[1]
