"""Odd-degree cochains, the Yamaguti coboundary, the cochain map and the total differential.

A cochain of degree ``k`` is a multilinear map ``L^k -> V`` stored sparsely as
``{(args, out): value}`` where ``args`` is a k-tuple of basis indices of L.
The constrained subspace is imposed only on the last three arguments
(skew-symmetry in the first two of them and a vanishing cyclic sum).  The
``"strengthened"`` space additionally makes each leading pair skew.

Constraint solution spaces factor as a Kronecker product over the prefix,
the last three slots and the output, so bases are assembled from small
nullspaces.  The result is identical to the canonical nullspace of the full
stacked constraint matrix (tests check this against the dense computation).
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .linalg import Matrix, nullspace
from .lts import MDLTS, ModifiedDifferential, Representation, TripleSystem

ZERO = Fraction(0)
ONE = Fraction(1)

PAPER = "paper"
STRENGTHENED = "strengthened"
SPACES = (PAPER, STRENGTHENED)


class ResourceLimitError(RuntimeError):
    pass


class ClosureError(ArithmeticError):
    """An image fell outside the target constrained span."""


class NotInSubspaceError(ValueError):
    pass


@dataclass(frozen=True)
class Limits:
    max_coords: int = 200_000
    max_degree: int = 7


DEFAULT_LIMITS = Limits()


def check_limits(dim: int, vdim: int, degree: int, limits: Limits = DEFAULT_LIMITS) -> None:
    if degree < 1 or degree % 2 == 0:
        raise ValueError(f"cochain degree must be odd and positive, got {degree}")
    if degree > limits.max_degree:
        raise ResourceLimitError(f"degree {degree} exceeds max_degree={limits.max_degree}")
    size = dim**degree * vdim
    if size > limits.max_coords:
        raise ResourceLimitError(
            f"degree {degree} needs {size} coordinates (limit {limits.max_coords})"
        )


# --------------------------------------------------------------------------
# cochains


class TensorCochain:
    """Multilinear map ``L^degree -> V`` in sparse coordinates."""

    __slots__ = ("degree", "dim", "vdim", "coords")

    def __init__(self, degree: int, dim: int, vdim: int, coords: Mapping | None = None):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        self.degree, self.dim, self.vdim = degree, dim, vdim
        clean = {}
        for (args, o), v in (coords or {}).items():
            v = Fraction(v)
            if v:
                args = tuple(args)
                if len(args) != degree or not all(0 <= a < dim for a in args) or not 0 <= o < vdim:
                    raise ValueError(f"bad cochain key {(args, o)}")
                clean[(args, o)] = v
        self.coords = clean

    @classmethod
    def _raw(cls, degree, dim, vdim, coords) -> "TensorCochain":
        f = object.__new__(cls)
        f.degree, f.dim, f.vdim = degree, dim, vdim
        f.coords = {k: v for k, v in coords.items() if v}
        return f

    @classmethod
    def zero(cls, degree: int, dim: int, vdim: int) -> "TensorCochain":
        return cls._raw(degree, dim, vdim, {})

    @classmethod
    def from_matrix(cls, m: Matrix) -> "TensorCochain":
        """Degree-1 cochain from a ``vdim x dim`` matrix (column convention)."""
        return cls._raw(1, m.cols, m.rows, {((j,), i): m[i, j] for i in range(m.rows) for j in range(m.cols)})

    @classmethod
    def from_dense(cls, degree: int, dim: int, vdim: int, flat: Sequence) -> "TensorCochain":
        keys = all_keys(degree, dim, vdim)
        if len(flat) != len(keys):
            raise ValueError("flat coordinate vector has the wrong length")
        return cls._raw(degree, dim, vdim, {k: Fraction(v) for k, v in zip(keys, flat)})

    def to_matrix(self) -> Matrix:
        if self.degree != 1:
            raise ValueError("only degree-1 cochains are matrices")
        grid = [[ZERO] * self.dim for _ in range(self.vdim)]
        for ((j,), i), v in self.coords.items():
            grid[i][j] = v
        return Matrix(grid, cols=self.dim)

    def dense(self) -> list[Fraction]:
        out = [ZERO] * (self.dim**self.degree * self.vdim)
        for key, v in self.coords.items():
            out[flat_index(key, self.dim, self.vdim)] = v
        return out

    def value(self, args: Sequence[int]) -> tuple:
        args = tuple(args)
        return tuple(self.coords.get((args, o), ZERO) for o in range(self.vdim))

    def _compatible(self, other: "TensorCochain"):
        if (self.degree, self.dim, self.vdim) != (other.degree, other.dim, other.vdim):
            raise ValueError("cochains of different shapes")

    def __add__(self, other: "TensorCochain") -> "TensorCochain":
        self._compatible(other)
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out.get(k, ZERO) + v
        return TensorCochain._raw(self.degree, self.dim, self.vdim, out)

    def __neg__(self) -> "TensorCochain":
        return TensorCochain._raw(self.degree, self.dim, self.vdim, {k: -v for k, v in self.coords.items()})

    def __sub__(self, other: "TensorCochain") -> "TensorCochain":
        return self + (-other)

    def scale(self, k) -> "TensorCochain":
        k = Fraction(k)
        return TensorCochain._raw(self.degree, self.dim, self.vdim, {key: k * v for key, v in self.coords.items()})

    def is_zero(self) -> bool:
        return not self.coords

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.coords.values()), default=ZERO)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorCochain):
            return NotImplemented
        return (self.degree, self.dim, self.vdim) == (other.degree, other.dim, other.vdim) and self.coords == other.coords

    def __repr__(self) -> str:
        return f"TensorCochain(degree={self.degree}, dim={self.dim}, vdim={self.vdim}, nnz={len(self.coords)})"


@dataclass(frozen=True, eq=False)
class MDCochain:
    """Pair ``(f, g)`` at level ``n``: ``f`` has degree ``2n-1``, ``g`` has degree ``2n-3`` (absent for n=1)."""

    n: int
    f: TensorCochain
    g: TensorCochain | None = None

    def __post_init__(self):
        if self.f.degree != 2 * self.n - 1:
            raise ValueError(f"level {self.n} needs f of degree {2 * self.n - 1}")
        if self.n == 1:
            if self.g is not None:
                raise ValueError("level 1 cochains have no second component")
        elif self.g is None or self.g.degree != 2 * self.n - 3:
            raise ValueError(f"level {self.n} needs g of degree {2 * self.n - 3}")

    @classmethod
    def zero(cls, n: int, dim: int, vdim: int) -> "MDCochain":
        g = TensorCochain.zero(2 * n - 3, dim, vdim) if n >= 2 else None
        return cls(n, TensorCochain.zero(2 * n - 1, dim, vdim), g)

    @property
    def degree(self) -> int:
        return 2 * self.n - 1

    def parts(self) -> tuple:
        return (self.f,) if self.g is None else (self.f, self.g)

    def _map(self, fn, other=None) -> "MDCochain":
        if other is None:
            return MDCochain(self.n, *(fn(p) for p in self.parts()))
        if other.n != self.n:
            raise ValueError("cochains at different levels")
        return MDCochain(self.n, *(fn(p, q) for p, q in zip(self.parts(), other.parts())))

    def __add__(self, other: "MDCochain") -> "MDCochain":
        return self._map(lambda p, q: p + q, other)

    def __sub__(self, other: "MDCochain") -> "MDCochain":
        return self._map(lambda p, q: p - q, other)

    def __neg__(self) -> "MDCochain":
        return self._map(lambda p: -p)

    def scale(self, k) -> "MDCochain":
        return self._map(lambda p: p.scale(k))

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts())

    def max_abs(self) -> Fraction:
        return max(p.max_abs() for p in self.parts())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MDCochain):
            return NotImplemented
        return self.n == other.n and self.parts() == other.parts()


# --------------------------------------------------------------------------
# indexing


def flat_index(key, dim: int, vdim: int) -> int:
    args, o = key
    idx = 0
    for a in args:
        idx = idx * dim + a
    return idx * vdim + o


def all_keys(degree: int, dim: int, vdim: int) -> list:
    return [(args, o) for args in itertools.product(range(dim), repeat=degree) for o in range(vdim)]


# --------------------------------------------------------------------------
# constrained bases


def _sparse_columns(m: Matrix) -> list[dict]:
    return [{i: m[i, j] for i in range(m.rows) if m[i, j]} for j in range(m.cols)]


def last_three_constraints(dim: int) -> Matrix:
    """Rows impose skew in the first two slots and a zero cyclic sum on scalar trilinear forms."""
    idx = {t: n for n, t in enumerate(itertools.product(range(dim), repeat=3))}
    rows = []
    for a, b, c in itertools.product(range(dim), repeat=3):
        r = [ZERO] * len(idx)
        r[idx[(a, b, c)]] += 1
        r[idx[(b, a, c)]] += 1
        rows.append(r)
    for a, b, c in itertools.product(range(dim), repeat=3):
        r = [ZERO] * len(idx)
        for t in ((a, b, c), (b, c, a), (c, a, b)):
            r[idx[t]] += 1
        rows.append(r)
    return Matrix(rows, cols=len(idx))


def pair_constraints(dim: int) -> Matrix:
    idx = {t: n for n, t in enumerate(itertools.product(range(dim), repeat=2))}
    rows = []
    for a, b in itertools.product(range(dim), repeat=2):
        r = [ZERO] * len(idx)
        r[idx[(a, b)]] += 1
        r[idx[(b, a)]] += 1
        rows.append(r)
    return Matrix(rows, cols=len(idx))


def _factor_basis(constraints: Matrix, arity: int, dim: int) -> list[tuple[tuple, dict]]:
    """Canonical nullspace basis as (free multi-index, {multi-index: value}) pairs."""
    tuples = list(itertools.product(range(dim), repeat=arity))
    out = []
    for col in _sparse_columns(nullspace(constraints)):
        free = max(col)  # canonical basis vectors end in their free coordinate
        out.append((tuples[free], {tuples[i]: v for i, v in col.items()}))
    return out


class ConstrainedBasis:
    """Basis of the constrained cochain subspace in canonical order.

    Each basis vector has coefficient 1 at its ``free_keys`` entry and 0 at the
    free keys of all other basis vectors, so coordinates are read off directly.
    """

    def __init__(self, degree: int, dim: int, vdim: int, space: str, vectors: list[dict], free_keys: list):
        self.degree, self.dim, self.vdim, self.space = degree, dim, vdim, space
        self.vectors = vectors
        self.free_keys = free_keys

    def __len__(self) -> int:
        return len(self.vectors)

    def cochain(self, k: int) -> TensorCochain:
        return TensorCochain._raw(self.degree, self.dim, self.vdim, self.vectors[k])

    def combine(self, coords: Sequence) -> TensorCochain:
        if len(coords) != len(self.vectors):
            raise ValueError("coordinate vector has the wrong length")
        out: dict = defaultdict(Fraction)
        for c, vec in zip(coords, self.vectors):
            if c:
                for key, v in vec.items():
                    out[key] += c * v
        return TensorCochain._raw(self.degree, self.dim, self.vdim, out)

    def coordinates(self, f: TensorCochain) -> tuple:
        """Coordinates of ``f`` in this basis; raises if ``f`` is outside the span."""
        if (f.degree, f.dim, f.vdim) != (self.degree, self.dim, self.vdim):
            raise ValueError("cochain shape does not match the basis")
        coords = tuple(f.coords.get(k, ZERO) for k in self.free_keys)
        if self.combine(coords).coords != f.coords:
            raise NotInSubspaceError(f"cochain is not in the degree-{self.degree} {self.space} subspace")
        return coords

    def contains(self, f: TensorCochain) -> bool:
        try:
            self.coordinates(f)
        except NotInSubspaceError:
            return False
        return True

    def matrix(self) -> Matrix:
        """Basis vectors as columns in the full flat coordinate space."""
        rows = self.dim**self.degree * self.vdim
        return Matrix.from_sparse_columns(
            [{flat_index(k, self.dim, self.vdim): v for k, v in vec.items()} for vec in self.vectors], rows
        )


def constrained_basis(
    t: TripleSystem,
    r: Representation,
    degree: int,
    space: str = PAPER,
    limits: Limits = DEFAULT_LIMITS,
) -> ConstrainedBasis:
    return _basis(t.dim, r.vdim, degree, space, limits)


def _basis(dim: int, vdim: int, degree: int, space: str, limits: Limits = DEFAULT_LIMITS) -> ConstrainedBasis:
    if space not in SPACES:
        raise ValueError(f"unknown cochain space {space!r}")
    check_limits(dim, vdim, degree, limits)
    if degree == 1:
        factors = [[((i,), {(i,): ONE}) for i in range(dim)]]
    else:
        tail = _factor_basis(last_three_constraints(dim), 3, dim)
        if space == PAPER:
            prefix = [[((i,), {(i,): ONE}) for i in range(dim)]] * (degree - 3)
        else:
            pair = _factor_basis(pair_constraints(dim), 2, dim)
            prefix = [pair] * ((degree - 3) // 2)
        factors = prefix + [tail]
    vectors, free_keys = [], []
    for combo in itertools.product(*factors):
        free = tuple(itertools.chain.from_iterable(fk for fk, _ in combo))
        parts = [vec for _, vec in combo]
        for o in range(vdim):
            vec = {}
            for items in itertools.product(*(p.items() for p in parts)):
                v = ONE
                args = ()
                for a, x in items:
                    args += a
                    v *= x
                vec[(args, o)] = v
            vectors.append(vec)
            free_keys.append((free, o))
    return ConstrainedBasis(degree, dim, vdim, space, vectors, free_keys)


# --------------------------------------------------------------------------
# operators


def bracket_by_output(t: TripleSystem) -> list[list]:
    """``[l] -> [(p, q, s, c[p][q][s][l])]`` over nonzero structure constants."""
    out = [[] for _ in range(t.dim)]
    for (p, q, s), vec in t.table.items():
        for l, v in vec.items():
            out[l].append((p, q, s, v))
    return out


def delta(t: TripleSystem, r: Representation, f: TensorCochain, _cb=None) -> TensorCochain:
    """Yamaguti coboundary, degree ``2n-1 -> 2n+1``."""
    k = f.degree
    n = (k + 1) // 2
    th, De = r.theta_entries, r.D_entries
    cb = _cb if _cb is not None else bracket_by_output(t)
    res: dict = defaultdict(Fraction)
    for (J, o), v in f.coords.items():
        head, last = J[:-1], J[-1]
        for p, q, row, val in th[o]:
            w = val * v
            # theta(a_{2n}, a_{2n+1}) f(a_1..a_{2n-1})
            res[(J + (p, q), row)] += w
            # -theta(a_{2n-1}, a_{2n+1}) f(a_1..a_{2n-2}, a_{2n})
            res[(head + (p, last, q), row)] -= w
        for i in range(1, n + 1):
            sign = 1 if (i + n) % 2 == 0 else -1
            pos = 2 * i - 2
            left, right = J[:pos], J[pos:]
            for p, q, row, val in De[o]:
                res[(left + (p, q) + right, row)] += sign * val * v
            for j in range(2 * i + 1, 2 * n + 2):
                # the bracket [a_{2i-1}, a_{2i}, a_j] sits in slot j-3 of f's arguments
                for p, q, s, val in cb[J[j - 3]]:
                    T = list(left + (p, q) + right)
                    T[j - 1] = s
                    res[(tuple(T), o)] -= sign * val * v
    return TensorCochain._raw(k + 2, f.dim, f.vdim, res)


def phi(t: TripleSystem, m: ModifiedDifferential, r: Representation, f: TensorCochain) -> TensorCochain:
    """Cochain map: ``sum_i f(.., d a_i, ..) + (n-1) lam f - d_V f`` on degree ``2n-1``."""
    k = f.degree
    n = (k + 1) // 2
    d = m.d
    # drow[x] lists (s, d[x, s]): the coefficient of e_x in d(e_s)
    drow = [[(s, d[x, s]) for s in range(d.cols) if d[x, s]] for x in range(d.rows)]
    dV = r.dV
    dVcol = [[(row, dV[row, o]) for row in range(dV.rows) if dV[row, o]] for o in range(dV.cols)]
    shift = (n - 1) * m.lam
    res: dict = defaultdict(Fraction)
    for (J, o), v in f.coords.items():
        for i, x in enumerate(J):
            for s, val in drow[x]:
                res[(J[:i] + (s,) + J[i + 1:], o)] += val * v
        if shift:
            res[(J, o)] += shift * v
        for row, val in dVcol[o]:
            res[(J, row)] -= val * v
    return TensorCochain._raw(k, f.dim, f.vdim, res)


def partial(t: TripleSystem, m: ModifiedDifferential, r: Representation, x: MDCochain) -> MDCochain:
    """``(delta f, -Phi f)`` at level 1, ``(delta f, delta g + (-1)^n Phi f)`` above."""
    if x.n == 1:
        return MDCochain(2, delta(t, r, x.f), -phi(t, m, r, x.f))
    pf = phi(t, m, r, x.f)
    second = delta(t, r, x.g) + (pf if x.n % 2 == 0 else -pf)
    return MDCochain(x.n + 1, delta(t, r, x.f), second)


# --------------------------------------------------------------------------
# matrices


class CochainComplex:
    """Matrices of the differential relative to canonical constrained bases.

    Level ``n`` is the space of pairs (degree ``2n-1``, degree ``2n-3``).
    """

    def __init__(self, system: MDLTS, rep: Representation, space: str = PAPER, limits: Limits = DEFAULT_LIMITS):
        if space not in SPACES:
            raise ValueError(f"unknown cochain space {space!r}")
        if rep.dim != system.dim:
            raise ValueError("representation dimension differs from the system")
        self.system, self.rep, self.space, self.limits = system, rep, space, limits
        self._bases: dict = {}
        self._delta: dict = {}
        self._phi: dict = {}
        self._ops: dict = {}

    @property
    def t(self) -> TripleSystem:
        return self.system.lts

    @property
    def m(self) -> ModifiedDifferential:
        return self.system.mdo

    @cached_property
    def _cb(self):
        return bracket_by_output(self.t)

    def basis(self, degree: int) -> ConstrainedBasis:
        if degree not in self._bases:
            self._bases[degree] = _basis(self.t.dim, self.rep.vdim, degree, self.space, self.limits)
        return self._bases[degree]

    def _express(self, images: Iterable[TensorCochain], degree: int, what: str) -> Matrix:
        target = self.basis(degree)
        cols = []
        for k, img in enumerate(images):
            try:
                cols.append(target.coordinates(img))
            except NotInSubspaceError:
                raise ClosureError(
                    f"closure violated: {what} of basis vector {k} leaves the degree-{degree} {self.space} space"
                ) from None
        return Matrix.from_columns(cols, rows=len(target))

    def delta_matrix(self, degree: int) -> Matrix:
        """Matrix of ``delta`` from degree ``degree`` to ``degree + 2``."""
        if degree not in self._delta:
            src = self.basis(degree)
            self.basis(degree + 2)
            images = (delta(self.t, self.rep, src.cochain(k), self._cb) for k in range(len(src)))
            self._delta[degree] = self._express(images, degree + 2, "delta")
        return self._delta[degree]

    def phi_matrix(self, degree: int) -> Matrix:
        if degree not in self._phi:
            src = self.basis(degree)
            images = (phi(self.t, self.m, self.rep, src.cochain(k)) for k in range(len(src)))
            self._phi[degree] = self._express(images, degree, "Phi")
        return self._phi[degree]

    def level_dim(self, n: int) -> int:
        size = len(self.basis(2 * n - 1))
        if n >= 2:
            size += len(self.basis(2 * n - 3))
        return size

    def operator_matrix(self, n: int) -> Matrix:
        """Matrix of the differential from level ``n`` to level ``n + 1``."""
        if n < 1:
            raise ValueError("levels start at 1")
        if n not in self._ops:
            top = self.delta_matrix(2 * n - 1)
            ph = self.phi_matrix(2 * n - 1)
            if n == 1:
                op = top.vstack(-ph)
            else:
                lower = self.delta_matrix(2 * n - 3)
                signed = ph if n % 2 == 0 else -ph
                op = top.hstack(Matrix.zeros(top.rows, lower.cols)).vstack(signed.hstack(lower))
            self._ops[n] = op
        return self._ops[n]

    def to_coords(self, x: MDCochain) -> tuple:
        coords = self.basis(2 * x.n - 1).coordinates(x.f)
        if x.g is not None:
            coords += self.basis(2 * x.n - 3).coordinates(x.g)
        return coords

    def from_coords(self, n: int, coords: Sequence) -> MDCochain:
        top = self.basis(2 * n - 1)
        f = top.combine(coords[: len(top)])
        if n == 1:
            if len(coords) != len(top):
                raise ValueError("coordinate vector has the wrong length")
            return MDCochain(1, f)
        g = self.basis(2 * n - 3).combine(coords[len(top):])
        return MDCochain(n, f, g)


def operator_matrix(
    t: TripleSystem,
    m: ModifiedDifferential,
    r: Representation,
    n: int,
    space: str | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> tuple[Matrix, str]:
    """Differential matrix at level ``n`` and the space it was computed in.

    With ``space=None`` the stated space is tried first and the strengthened
    space is used only if closure fails.
    """
    system = MDLTS(t, m)
    spaces = SPACES if space is None else (space,)
    err = None
    for sp in spaces:
        try:
            return CochainComplex(system, r, sp, limits).operator_matrix(n), sp
        except ClosureError as exc:
            err = exc
    raise err
