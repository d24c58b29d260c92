"""Lie triple systems with a modified weighted differential operator.

Conventions used throughout the package:

* Structure constants: ``[e_i, e_j, e_k] = sum_l c[i][j][k][l] e_l``.
* Operator matrices use the column convention: ``d(e_j) = sum_i d[i, j] e_i``.
* A representation stores ``theta(e_i, e_j)`` as a ``vdim x vdim`` matrix;
  ``D(x, y) = theta(y, x) - theta(x, y)`` is always derived, never stored.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .linalg import Matrix, as_fraction, rank

ZERO = Fraction(0)

Vector = tuple  # tuple of Fractions
SparseTable = dict  # (i, j, k) -> {l: Fraction}


# --------------------------------------------------------------------------
# validation reports


@dataclass(frozen=True)
class Failure:
    identity: str
    witness: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    ok: bool = True
    failures: list[Failure] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, identity: str, witness: tuple, detail: str = "") -> None:
        self.ok = False
        self.failures.append(Failure(identity, tuple(witness), detail))

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        self.ok = self.ok and other.ok
        self.failures.extend(other.failures)
        self.notes.update(other.notes)
        return self

    @property
    def first(self) -> Failure | None:
        return self.failures[0] if self.failures else None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failures": [
                {"identity": f.identity, "witness": list(f.witness), "detail": f.detail}
                for f in self.failures
            ],
            **({"notes": self.notes} if self.notes else {}),
        }


# --------------------------------------------------------------------------
# sparse helpers


def _vec(dim: int, sparse: Mapping[int, Fraction]) -> Vector:
    out = [ZERO] * dim
    for i, v in sparse.items():
        out[i] = v
    return tuple(out)


def _clean(table: Mapping) -> dict:
    out = {}
    for key, vec in table.items():
        vec = {l: v for l, v in vec.items() if v}
        if vec:
            out[key] = vec
    return out


def dense_from_table(dim: int, table: Mapping, out_dim: int | None = None) -> tuple:
    out_dim = dim if out_dim is None else out_dim
    c = [[[[ZERO] * out_dim for _ in range(dim)] for _ in range(dim)] for _ in range(dim)]
    for (i, j, k), vec in table.items():
        for l, v in vec.items():
            c[i][j][k][l] = as_fraction(v)
    return tuple(tuple(tuple(tuple(z) for z in y) for y in x) for x in c)


def table_from_dense(c) -> SparseTable:
    table = {}
    n = len(c)
    for i, j, k in itertools.product(range(n), repeat=3):
        vec = {l: v for l, v in enumerate(c[i][j][k]) if v}
        if vec:
            table[(i, j, k)] = vec
    return table


def trilinear_defect(
    dim: int,
    table: Mapping,
    op: Matrix,
    weight: Fraction = ZERO,
) -> dict:
    """Sparse defect of the weighted Leibniz rule for ``op`` on every basis triple.

    Returns ``{(x, y, z): {l: value}}`` holding
    ``op[x,y,z] - [op x,y,z] - [x,op y,z] - [x,y,op z] - weight [x,y,z]``.
    """
    cols = [{i: op[i, j] for i in range(dim) if op[i, j]} for j in range(dim)]
    # rows[p] lists (x, a) with op(e_x) having coefficient a on e_p
    rows = defaultdict(list)
    for x, col in enumerate(cols):
        for p, a in col.items():
            rows[p].append((x, a))
    res: dict = defaultdict(lambda: defaultdict(Fraction))
    for (i, j, k), vec in table.items():
        for l, v in vec.items():
            tgt = res[(i, j, k)]
            for m, a in cols[l].items():
                tgt[m] += a * v
            if weight:
                tgt[l] -= weight * v
            for x, a in rows[i]:
                res[(x, j, k)][l] -= a * v
            for y, a in rows[j]:
                res[(i, y, k)][l] -= a * v
            for z, a in rows[k]:
                res[(i, j, z)][l] -= a * v
    return _clean(res)


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class TripleSystem:
    """A finite-dimensional triple system given by structure constants."""

    dim: int
    c: tuple

    def __post_init__(self):
        c = self.c
        n = self.dim
        if len(c) != n or any(
            len(c[i]) != n or any(len(c[i][j]) != n or any(len(c[i][j][k]) != n for k in range(n)) for j in range(n))
            for i in range(n)
        ):
            raise ValueError("structure tensor must have shape dim^4")
        object.__setattr__(
            self, "c", tuple(tuple(tuple(tuple(as_fraction(v) for v in z) for z in y) for y in x) for x in c)
        )

    @classmethod
    def from_brackets(
        cls,
        dim: int,
        brackets: Mapping[tuple, Mapping[int, object]],
        complete_skew: bool = False,
    ) -> "TripleSystem":
        """Build from sparse generators ``{(i, j, k): {l: coeff}}``.

        With ``complete_skew`` the image under swapping the first two slots is
        filled in; an explicit partner entry must agree with it.
        """
        table: dict = {}
        for (i, j, k), out in brackets.items():
            for idx in (i, j, k):
                if not 0 <= idx < dim:
                    raise ValueError(f"bracket index {idx} out of range for dim {dim}")
            vec = {}
            for l, v in out.items():
                if not 0 <= int(l) < dim:
                    raise ValueError(f"output index {l} out of range for dim {dim}")
                vec[int(l)] = as_fraction(v)
            table[(i, j, k)] = vec
        if complete_skew:
            filled = dict(table)
            for (i, j, k), vec in table.items():
                neg = {l: -v for l, v in vec.items()}
                partner = (j, i, k)
                if partner in table:
                    have = {l: v for l, v in table[partner].items() if v}
                    want = {l: v for l, v in neg.items() if v}
                    if have != want:
                        raise ValueError(f"bracket {partner} contradicts the skew image of {(i, j, k)}")
                elif i == j:
                    if any(vec.values()):
                        raise ValueError(f"bracket {(i, j, k)} must vanish by skew-symmetry")
                else:
                    filled[partner] = neg
            table = filled
        return cls(dim, dense_from_table(dim, table))

    @classmethod
    def abelian(cls, dim: int) -> "TripleSystem":
        return cls(dim, dense_from_table(dim, {}))

    @cached_property
    def table(self) -> SparseTable:
        return table_from_dense(self.c)

    def basis_bracket(self, i: int, j: int, k: int) -> Vector:
        return self.c[i][j][k]

    def bracket(self, x: Sequence, y: Sequence, z: Sequence) -> Vector:
        out = [ZERO] * self.dim
        for (i, j, k), vec in self.table.items():
            w = x[i] * y[j] * z[k]
            if w:
                for l, v in vec.items():
                    out[l] += w * v
        return tuple(out)

    def left_operator(self, a: int, b: int) -> Matrix:
        """Matrix of ``v -> [e_a, e_b, v]``."""
        n = self.dim
        return Matrix([[self.c[a][b][k][l] for k in range(n)] for l in range(n)])

    def is_abelian(self) -> bool:
        return not self.table


@dataclass(frozen=True)
class ModifiedDifferential:
    """Linear operator ``d`` (column convention) with weight ``lam``."""

    d: Matrix
    lam: Fraction

    def __post_init__(self):
        if not isinstance(self.d, Matrix):
            object.__setattr__(self, "d", Matrix(self.d))
        if self.d.rows != self.d.cols:
            raise ValueError("differential must be square")
        object.__setattr__(self, "lam", as_fraction(self.lam))

    @property
    def dim(self) -> int:
        return self.d.rows


@dataclass(frozen=True)
class MDLTS:
    lts: TripleSystem
    mdo: ModifiedDifferential

    def __post_init__(self):
        if self.lts.dim != self.mdo.dim:
            raise ValueError("operator size does not match the triple system")

    @property
    def dim(self) -> int:
        return self.lts.dim

    @property
    def d(self) -> Matrix:
        return self.mdo.d

    @property
    def lam(self) -> Fraction:
        return self.mdo.lam


@dataclass(frozen=True)
class Representation:
    """Bilinear action ``theta(e_i, e_j)`` on a module of dimension ``vdim``."""

    vdim: int
    theta: tuple  # dim x dim grid of Matrix
    dV: Matrix

    def __post_init__(self):
        grid = tuple(tuple(m if isinstance(m, Matrix) else Matrix(m) for m in row) for row in self.theta)
        n = len(grid)
        for row in grid:
            if len(row) != n:
                raise ValueError("theta must be a square grid of matrices")
            for m in row:
                if m.shape != (self.vdim, self.vdim):
                    raise ValueError("theta matrices must be vdim x vdim")
        object.__setattr__(self, "theta", grid)
        dV = self.dV if isinstance(self.dV, Matrix) else Matrix(self.dV)
        if dV.shape != (self.vdim, self.vdim):
            raise ValueError("module differential must be vdim x vdim")
        object.__setattr__(self, "dV", dV)

    @property
    def dim(self) -> int:
        return len(self.theta)

    def D(self, i: int, j: int) -> Matrix:
        return self.theta[j][i] - self.theta[i][j]

    def theta_of(self, x: Sequence, y: Sequence) -> Matrix:
        return _combine(self.theta, x, y, self.vdim)

    def D_of(self, x: Sequence, y: Sequence) -> Matrix:
        return self.theta_of(y, x) - self.theta_of(x, y)

    @cached_property
    def theta_entries(self) -> list:
        """Nonzero entries grouped by input coordinate: ``[o] -> [(p, q, row, val)]``."""
        return _entries_by_column(lambda p, q: self.theta[p][q], self.dim, self.vdim)

    @cached_property
    def D_entries(self) -> list:
        return _entries_by_column(self.D, self.dim, self.vdim)


def _entries_by_column(get, dim: int, vdim: int) -> list:
    out = [[] for _ in range(vdim)]
    for p in range(dim):
        for q in range(dim):
            m = get(p, q)
            for r in range(vdim):
                for o in range(vdim):
                    v = m[r, o]
                    if v:
                        out[o].append((p, q, r, v))
    return out


def _combine(grid, x: Sequence, y: Sequence, vdim: int) -> Matrix:
    acc = [[ZERO] * vdim for _ in range(vdim)]
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j, yj in enumerate(y):
            w = xi * yj
            if not w:
                continue
            m = grid[i][j]
            for r in range(vdim):
                row = acc[r]
                for s in range(vdim):
                    if m[r, s]:
                        row[s] += w * m[r, s]
    return Matrix(acc, cols=vdim)


@dataclass(frozen=True)
class LieAlgebra:
    """Binary bracket ``[e_i, e_j] = sum_k bracket[i][j][k] e_k`` with an operator of weight ``lam``."""

    dim: int
    bracket: tuple
    d: Matrix
    lam: Fraction

    def __post_init__(self):
        object.__setattr__(
            self, "bracket", tuple(tuple(tuple(as_fraction(v) for v in z) for z in y) for y in self.bracket)
        )
        if not isinstance(self.d, Matrix):
            object.__setattr__(self, "d", Matrix(self.d))
        object.__setattr__(self, "lam", as_fraction(self.lam))

    @classmethod
    def from_brackets(cls, dim: int, brackets: Mapping[tuple, Mapping[int, object]], d, lam) -> "LieAlgebra":
        """Generators ``{(i, j): {k: coeff}}``; antisymmetric partners are filled in."""
        b = [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j), out in brackets.items():
            for k, v in out.items():
                b[i][j][k] = as_fraction(v)
                b[j][i][k] = -as_fraction(v)
        return cls(dim, b, d, lam)

    def mul(self, x: Sequence, y: Sequence) -> Vector:
        out = [ZERO] * self.dim
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    if yj:
                        for k, v in enumerate(self.bracket[i][j]):
                            if v:
                                out[k] += xi * yj * v
        return tuple(out)


# --------------------------------------------------------------------------
# validators


def _unit(n: int, i: int) -> Vector:
    return tuple(Fraction(int(k == i)) for k in range(n))


def validate_lts(t: TripleSystem, exhaustive: bool = False) -> ValidationReport:
    """Skew-symmetry, cyclic sum and the five-argument derivation identity."""
    rep = ValidationReport()
    n = t.dim
    c = t.c
    zero = (ZERO,) * n
    for i, j, k in itertools.product(range(n), repeat=3):
        s = tuple(a + b for a, b in zip(c[i][j][k], c[j][i][k]))
        if s != zero:
            rep.fail("skew_symmetry", (i, j, k), f"[x,y,z]+[y,x,z] = {_show(s)}")
            if not exhaustive:
                return rep
    for i, j, k in itertools.product(range(n), repeat=3):
        s = tuple(a + b + e for a, b, e in zip(c[i][j][k], c[k][i][j], c[j][k][i]))
        if s != zero:
            rep.fail("cyclic_sum", (i, j, k), f"cyclic sum = {_show(s)}")
            if not exhaustive:
                return rep
    bad = []
    for a, b in itertools.product(range(n), repeat=2):
        defect = trilinear_defect(n, t.table, t.left_operator(a, b))
        for xyz, vec in defect.items():
            bad.append(((a, b) + xyz, vec))
    for wit, vec in sorted(bad):
        rep.fail("derivation_identity", wit, f"defect {_show(_vec(n, vec))}")
        if not exhaustive:
            break
    return rep


def validate_mdo(t: TripleSystem, m: ModifiedDifferential, exhaustive: bool = False) -> ValidationReport:
    """Check ``d[a,b,c] = [da,b,c] + [a,db,c] + [a,b,dc] + lam [a,b,c]`` on basis triples."""
    rep = ValidationReport()
    if m.dim != t.dim:
        raise ValueError("operator size does not match the triple system")
    defect = trilinear_defect(t.dim, t.table, m.d, m.lam)
    for wit in sorted(defect):
        i, j, k = wit
        lhs = m.d.apply(t.c[i][j][k])
        rhs = tuple(a - b for a, b in zip(lhs, _vec(t.dim, defect[wit])))
        rep.fail("weighted_leibniz", wit, f"lhs={_show(lhs)} rhs={_show(rhs)}")
        if not exhaustive:
            break
    return rep


def validate_mdlts(s: MDLTS, exhaustive: bool = False) -> ValidationReport:
    rep = validate_lts(s.lts, exhaustive)
    if rep.ok or exhaustive:
        rep.merge(validate_mdo(s.lts, s.mdo, exhaustive))
    return rep


def validate_rep(
    t: TripleSystem,
    m: ModifiedDifferential,
    r: Representation,
    exhaustive: bool = False,
) -> ValidationReport:
    """Representation identities on basis 4-tuples plus compatibility with the differentials."""
    if r.dim != t.dim or m.dim != t.dim:
        raise ValueError("representation and system dimensions differ")
    rep = ValidationReport()
    n = t.dim
    th = r.theta
    D = [[r.D(i, j) for j in range(n)] for i in range(n)]

    def lin(grid, coeffs, fixed_left=None, fixed_right=None):
        # theta(fixed_left, sum coeffs_l e_l) or theta(sum coeffs_l e_l, fixed_right)
        acc = Matrix.zeros(r.vdim, r.vdim)
        for l, v in enumerate(coeffs):
            if v:
                mat = grid[fixed_left][l] if fixed_left is not None else grid[l][fixed_right]
                acc = acc + mat.scale(v)
        return acc

    checks = []
    for x, y, a, b in itertools.product(range(n), repeat=4):
        e = th[a][b] @ th[x][y] - th[y][b] @ th[x][a] - lin(th, t.c[y][a][b], fixed_left=x) + D[y][a] @ th[x][b]
        if not e.is_zero():
            checks.append(("rep_product", (x, y, a, b)))
            if not exhaustive:
                break
    for x, y, a, b in itertools.product(range(n), repeat=4):
        if checks and not exhaustive:
            break
        e = (
            th[a][b] @ D[x][y]
            - D[x][y] @ th[a][b]
            + lin(th, t.c[x][y][a], fixed_right=b)
            + lin(th, t.c[x][y][b], fixed_left=a)
        )
        if not e.is_zero():
            checks.append(("rep_derivation", (x, y, a, b)))
    d = m.d
    dV = r.dV
    for name, grid in (("rep_differential", th), ("rep_differential_D", D)):
        for x, y in itertools.product(range(n), repeat=2):
            if checks and not exhaustive:
                break
            dx = d.column(x)
            dy = d.column(y)
            lhs = dV @ grid[x][y]
            rhs = lin(grid, dx, fixed_right=y) + lin(grid, dy, fixed_left=x) + grid[x][y] @ dV + grid[x][y].scale(m.lam)
            if lhs != rhs:
                checks.append((name, (x, y)))
    for name, wit in checks:
        rep.fail(name, wit)
    return rep


def _show(v: Iterable) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


# --------------------------------------------------------------------------
# constructions


def adjoint_rep(t: TripleSystem, m: ModifiedDifferential) -> Representation:
    """``theta(a, b) x = [x, a, b]`` with the module differential equal to ``d``."""
    n = t.dim
    grid = tuple(
        tuple(Matrix([[t.c[k][i][j][l] for k in range(n)] for l in range(n)]) for j in range(n))
        for i in range(n)
    )
    return Representation(n, grid, m.d)


def shift_to_derivation(m: ModifiedDifferential) -> Matrix:
    """``d + (lam/2) id``; this is a derivation exactly when ``d`` has weight ``lam``."""
    return m.d + Matrix.identity(m.dim).scale(m.lam / 2)


def scale_mdo(m: ModifiedDifferential, k) -> ModifiedDifferential:
    k = as_fraction(k)
    return ModifiedDifferential(m.d.scale(k), k * m.lam)


def validate_lie_algebra(g: LieAlgebra) -> ValidationReport:
    rep = ValidationReport()
    n = g.dim
    b = g.bracket
    for i, j in itertools.product(range(n), repeat=2):
        if any(x + y for x, y in zip(b[i][j], b[j][i])):
            rep.fail("antisymmetry", (i, j))
            return rep
    E = [_unit(n, i) for i in range(n)]
    for i, j, k in itertools.product(range(n), repeat=3):
        s1 = g.mul(g.mul(E[i], E[j]), E[k])
        s2 = g.mul(g.mul(E[j], E[k]), E[i])
        s3 = g.mul(g.mul(E[k], E[i]), E[j])
        if any(x + y + z for x, y, z in zip(s1, s2, s3)):
            rep.fail("jacobi", (i, j, k))
            return rep
    for i, j in itertools.product(range(n), repeat=2):
        lhs = g.d.apply(b[i][j])
        rhs = tuple(
            x + y + g.lam * z
            for x, y, z in zip(g.mul(g.d.column(i), E[j]), g.mul(E[i], g.d.column(j)), b[i][j])
        )
        if lhs != rhs:
            rep.fail("weighted_leibniz", (i, j))
            return rep
    return rep


def lts_from_lie_algebra(g: LieAlgebra) -> MDLTS:
    """Triple bracket ``[a, b, c] = [[a, b], c]``; the operator weight doubles."""
    report = validate_lie_algebra(g)
    if not report:
        f = report.first
        raise ValueError(f"not a modified differential Lie algebra: {f.identity} fails at {f.witness}")
    n = g.dim
    E = [_unit(n, i) for i in range(n)]
    c = [[[g.mul(g.bracket[i][j], E[k]) for k in range(n)] for j in range(n)] for i in range(n)]
    return MDLTS(TripleSystem(n, c), ModifiedDifferential(g.d, 2 * g.lam))


def block_diag(a: Matrix, b: Matrix) -> Matrix:
    top = a.hstack(Matrix.zeros(a.rows, b.cols))
    bottom = Matrix.zeros(b.rows, a.cols).hstack(b)
    return top.vstack(bottom)


def twisted_product_table(
    t: TripleSystem,
    r: Representation,
    cocycle: Mapping | None = None,
) -> SparseTable:
    """Bracket on ``L + V`` (L coordinates first).

    ``[x+u, y+v, z+w] = [x,y,z] + D(x,y)w - theta(x,z)v + theta(y,z)u + cocycle(x,y,z)``,
    where ``cocycle`` maps L-triples ``(i, j, k)`` to sparse vectors in V.
    """
    n, vd = t.dim, r.vdim
    table: dict = defaultdict(dict)
    for key, vec in t.table.items():
        table[key].update(vec)
    if cocycle:
        for key, vec in cocycle.items():
            for o, v in vec.items():
                if v:
                    table[key][n + o] = table[key].get(n + o, ZERO) + v
    for x, y in itertools.product(range(n), repeat=2):
        Dxy = r.D(x, y)
        th = r.theta[x][y]
        for w in range(vd):
            for row in range(vd):
                if Dxy[row, w]:
                    table[(x, y, n + w)][n + row] = Dxy[row, w]
                if th[row, w]:
                    # theta(y, z) u with u in the first slot: [u, x, y]
                    table[(n + w, x, y)][n + row] = th[row, w]
                    # -theta(x, z) v with v in the second slot: [x, v, y]
                    table[(x, n + w, y)][n + row] = -th[row, w]
    return _clean(table)


def semidirect_product(t: TripleSystem, m: ModifiedDifferential, r: Representation) -> MDLTS:
    if r.dim != t.dim or m.dim != t.dim:
        raise ValueError("dimension mismatch between system and representation")
    total = t.dim + r.vdim
    lts = TripleSystem(total, dense_from_table(total, twisted_product_table(t, r)))
    return MDLTS(lts, ModifiedDifferential(block_diag(m.d, r.dV), m.lam))


def dual_rep(r: Representation) -> Representation:
    """Dual module: ``theta'(e_i, e_j) = theta(e_j, e_i)^T`` and ``dV' = -dV^T``."""
    n = r.dim
    grid = tuple(tuple(r.theta[j][i].T for j in range(n)) for i in range(n))
    return Representation(r.vdim, grid, -r.dV.T)


def check_homomorphism(src: MDLTS, dst: MDLTS, zeta: Matrix) -> ValidationReport:
    """Bracket compatibility on basis triples and ``zeta d1 = d2 zeta``.

    ``notes['isomorphism']`` records whether ``zeta`` is invertible.
    """
    if zeta.shape != (dst.dim, src.dim):
        raise ValueError(f"zeta must be {dst.dim}x{src.dim}, got {zeta.rows}x{zeta.cols}")
    rep = ValidationReport()
    if src.lam != dst.lam:
        rep.fail("weight_mismatch", (), f"{src.lam} != {dst.lam}")
    cols = zeta.columns()
    for i, j, k in itertools.product(range(src.dim), repeat=3):
        lhs = zeta.apply(src.lts.c[i][j][k])
        rhs = dst.lts.bracket(cols[i], cols[j], cols[k])
        if lhs != rhs:
            rep.fail("bracket_compatibility", (i, j, k), f"{_show(lhs)} != {_show(rhs)}")
            break
    if zeta @ src.d != dst.d @ zeta:
        rep.fail("differential_intertwining", ())
    rep.notes["isomorphism"] = zeta.rows == zeta.cols and rank(zeta) == zeta.rows
    return rep
