"""Truncated one-parameter formal deformations of the bracket and the operator.

The weight is never deformed.  All identities are checked coefficient by
coefficient up to the truncation order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cochain import MDCochain, TensorCochain
from .cohomology import CohomologyReport, cohomology
from .linalg import Matrix, NoSolutionError, solve
from .lts import MDLTS, Representation, TripleSystem, ValidationReport, adjoint_rep

ZERO = Fraction(0)

DEFAULT_ORDER = 2
MAX_ORDER = 6


class IsomorphismError(ValueError):
    pass


def bracket_cochain(t: TripleSystem) -> TensorCochain:
    return TensorCochain._raw(3, t.dim, t.dim, {(k, l): v for k, vec in t.table.items() for l, v in vec.items()})


@dataclass(frozen=True, eq=False)
class TruncatedDeformation:
    """Coefficients ``nu_0..nu_N`` and ``d_0..d_N``; index 0 is the base system."""

    nu: tuple
    dmaps: tuple
    lam: Fraction

    def __post_init__(self):
        if len(self.nu) != len(self.dmaps) or len(self.nu) < 2:
            raise ValueError("need matching coefficient lists of length order + 1 >= 2")
        if len(self.nu) - 1 > MAX_ORDER:
            raise ValueError(f"truncation order above {MAX_ORDER}")
        dim = self.dmaps[0].rows
        for f in self.nu:
            if (f.degree, f.dim, f.vdim) != (3, dim, dim):
                raise ValueError("bracket coefficients must be trilinear maps L^3 -> L")
        for d in self.dmaps:
            if d.shape != (dim, dim):
                raise ValueError("operator coefficients must be dim x dim")
        object.__setattr__(self, "nu", tuple(self.nu))
        object.__setattr__(self, "dmaps", tuple(self.dmaps))
        object.__setattr__(self, "lam", Fraction(self.lam))

    @classmethod
    def from_base(cls, base: MDLTS, nu: Sequence[TensorCochain] = (), dmaps: Sequence[Matrix] = (), order: int | None = None):
        """Deformation with the given higher coefficients; missing ones are zero."""
        order = max(len(nu), len(dmaps), 1) if order is None else order
        n = base.dim
        nus = [bracket_cochain(base.lts)] + list(nu) + [TensorCochain.zero(3, n, n)] * (order - len(nu))
        ds = [base.d] + list(dmaps) + [Matrix.zeros(n, n)] * (order - len(dmaps))
        return cls(tuple(nus), tuple(ds), base.lam)

    @classmethod
    def constant(cls, base: MDLTS, order: int = DEFAULT_ORDER) -> "TruncatedDeformation":
        return cls.from_base(base, order=order)

    @property
    def order(self) -> int:
        return len(self.nu) - 1

    @property
    def dim(self) -> int:
        return self.dmaps[0].rows

    def truncate(self, order: int) -> "TruncatedDeformation":
        return TruncatedDeformation(self.nu[: order + 1], self.dmaps[: order + 1], self.lam)


@dataclass(frozen=True, eq=False)
class FormalIsomorphism:
    """``phi_t = id + sum_i phis[i-1] t^i``."""

    phis: tuple

    def __post_init__(self):
        object.__setattr__(self, "phis", tuple(self.phis))

    @property
    def order(self) -> int:
        return len(self.phis)

    def coefficients(self, dim: int, order: int) -> list[Matrix]:
        """``[phi_0 = id, phi_1, ..., phi_order]`` padded with zeros."""
        out = [Matrix.identity(dim)] + list(self.phis[:order])
        out += [Matrix.zeros(dim, dim)] * (order + 1 - len(out))
        return out


# --------------------------------------------------------------------------
# dense trilinear helpers: arr[i][j][k] is the output vector


def _to_array(f: TensorCochain) -> list:
    n, vd = f.dim, f.vdim
    arr = [[[[ZERO] * vd for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for ((i, j, k), o), v in f.coords.items():
        arr[i][j][k][o] = v
    return arr


def _from_array(arr: list, dim: int, vdim: int) -> TensorCochain:
    coords = {}
    for i, j, k in itertools.product(range(dim), repeat=3):
        for o, v in enumerate(arr[i][j][k]):
            if v:
                coords[((i, j, k), o)] = v
    return TensorCochain._raw(3, dim, vdim, coords)


def _slot(arr: list, args: tuple, slot: int, vec: Sequence) -> list:
    """Evaluate with basis arguments except a general vector in ``slot``."""
    out = [ZERO] * len(arr[0][0][0])
    a = list(args)
    for l, x in enumerate(vec):
        if x:
            a[slot] = l
            for o, v in enumerate(arr[a[0]][a[1]][a[2]]):
                if v:
                    out[o] += x * v
    return out


def _transform(arr: list, A: Matrix, B: Matrix, C: Matrix, out: Matrix | None, dim: int) -> list:
    """``(i, j, k) -> out(T(A e_i, B e_j, C e_k))``."""
    res = [[[None] * dim for _ in range(dim)] for _ in range(dim)]
    Acol, Bcol, Ccol = A.columns(), B.columns(), C.columns()
    for i, j, k in itertools.product(range(dim), repeat=3):
        acc = [ZERO] * dim
        for p, a in enumerate(Acol[i]):
            if not a:
                continue
            for q, b in enumerate(Bcol[j]):
                if not b:
                    continue
                ab = a * b
                for r, c in enumerate(Ccol[k]):
                    if not c:
                        continue
                    w = ab * c
                    for o, v in enumerate(arr[p][q][r]):
                        if v:
                            acc[o] += w * v
        res[i][j][k] = list(out.apply(acc)) if out is not None else acc
    return res


# --------------------------------------------------------------------------
# verification


@dataclass
class DeformationReport:
    ok: bool
    per_order: list[ValidationReport] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first(self):
        for n, rep in enumerate(self.per_order):
            if not rep.ok:
                return n, rep.first
        return None


def verify_deformation(base: MDLTS, D: TruncatedDeformation, exhaustive: bool = False) -> DeformationReport:
    """Check the coefficient identities of a formal deformation for orders ``0..D.order``."""
    n = base.dim
    if D.dim != n:
        raise ValueError("deformation dimension differs from the base")
    arrs = [_to_array(f) for f in D.nu]
    out = DeformationReport(True)
    head = ValidationReport()
    if D.nu[0] != bracket_cochain(base.lts):
        head.fail("base_bracket", ())
    if D.dmaps[0] != base.d or D.lam != base.lam:
        head.fail("base_operator", ())
    E = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    for order in range(D.order + 1):
        rep = ValidationReport()
        if order == 0:
            rep.merge(head)
        a = arrs[order]
        for i, j, k in itertools.product(range(n), repeat=3):
            if any(x + y for x, y in zip(a[i][j][k], a[j][i][k])):
                rep.fail("skew_symmetry", (i, j, k))
                break
        for i, j, k in itertools.product(range(n), repeat=3):
            if any(x + y + z for x, y, z in zip(a[i][j][k], a[j][k][i], a[k][i][j])):
                rep.fail("cyclic_sum", (i, j, k))
                break
        pairs = [(p, order - p) for p in range(order + 1)]
        for x, y, p, q, s in itertools.product(range(n), repeat=5):
            if rep.failures and not exhaustive:
                break
            lhs = [ZERO] * n
            rhs = [ZERO] * n
            for i, j in pairs:
                A, B = arrs[i], arrs[j]
                lhs = _add(lhs, _slot(A, (x, y, 0), 2, B[p][q][s]))
                rhs = _add(rhs, _slot(A, (0, q, s), 0, B[x][y][p]))
                rhs = _add(rhs, _slot(A, (p, 0, s), 1, B[x][y][q]))
                rhs = _add(rhs, _slot(A, (p, q, 0), 2, B[x][y][s]))
            if lhs != rhs:
                rep.fail("convolution_identity", (x, y, p, q, s))
        for p, q, s in itertools.product(range(n), repeat=3):
            if rep.failures and not exhaustive:
                break
            lhs = [ZERO] * n
            rhs = [D.lam * v for v in arrs[order][p][q][s]]
            for i, j in pairs:
                A = arrs[i]
                dj = D.dmaps[j]
                lhs = _add(lhs, D.dmaps[i].apply(arrs[j][p][q][s]))
                rhs = _add(rhs, _slot(A, (0, q, s), 0, dj.column(p)))
                rhs = _add(rhs, _slot(A, (p, 0, s), 1, dj.column(q)))
                rhs = _add(rhs, _slot(A, (p, q, 0), 2, dj.column(s)))
            if lhs != rhs:
                rep.fail("operator_identity", (p, q, s))
        out.per_order.append(rep)
        out.ok = out.ok and rep.ok
    return out


def _add(u: Sequence, v: Sequence) -> list:
    return [a + b for a, b in zip(u, v)]


def infinitesimal(D: TruncatedDeformation) -> MDCochain:
    """First-order coefficients ``(nu_1, d_1)`` as a level-2 cochain."""
    return MDCochain(2, D.nu[1], TensorCochain.from_matrix(D.dmaps[1]))


# --------------------------------------------------------------------------
# formal isomorphisms


def series_inverse(coeffs: Sequence[Matrix], order: int) -> list[Matrix]:
    """Inverse of ``sum coeffs[i] t^i`` (with ``coeffs[0] = id``) up to ``t^order``."""
    n = coeffs[0].rows
    inv = [Matrix.identity(n)]
    for k in range(1, order + 1):
        acc = Matrix.zeros(n, n)
        for i in range(1, k + 1):
            acc = acc - coeffs[i] @ inv[k - i]
        inv.append(acc)
    return inv


def compose_isomorphisms(first: FormalIsomorphism, second: FormalIsomorphism, dim: int, order: int) -> FormalIsomorphism:
    """Series product ``first_t o second_t`` truncated at ``order``."""
    a = first.coefficients(dim, order)
    b = second.coefficients(dim, order)
    out = []
    for k in range(1, order + 1):
        acc = Matrix.zeros(dim, dim)
        for i in range(k + 1):
            acc = acc + a[i] @ b[k - i]
        out.append(acc)
    return FormalIsomorphism(tuple(out))


def apply_isomorphism(base: MDLTS, D: TruncatedDeformation, phi: FormalIsomorphism) -> TruncatedDeformation:
    """Pull ``D`` back along ``phi``: ``nu' = phi^-1 nu (phi x phi x phi)``, ``d' = phi^-1 d phi``.

    ``phi`` is then a formal isomorphism from the result to ``D``.
    """
    N, n = D.order, D.dim
    ph = phi.coefficients(n, N)
    inv = series_inverse(ph, N)
    arrs = [_to_array(f) for f in D.nu]
    # mu[m] = sum over b+p+q+r = m of nu_b(phi_p x, phi_q y, phi_r z)
    mu = [[[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(N + 1)]
    for b, p, q, r in itertools.product(range(N + 1), repeat=4):
        m = b + p + q + r
        if m > N:
            continue
        part = _transform(arrs[b], ph[p], ph[q], ph[r], None, n)
        tgt = mu[m]
        for i, j, k in itertools.product(range(n), repeat=3):
            tgt[i][j][k] = _add(tgt[i][j][k], part[i][j][k])
    nus = []
    ds = []
    for k in range(N + 1):
        acc = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for a in range(k + 1):
            for i, j, l in itertools.product(range(n), repeat=3):
                acc[i][j][l] = _add(acc[i][j][l], inv[a].apply(mu[k - a][i][j][l]))
        nus.append(_from_array(acc, n, n))
        dk = Matrix.zeros(n, n)
        for a, b in itertools.product(range(k + 1), repeat=2):
            p = k - a - b
            if p >= 0:
                dk = dk + inv[a] @ D.dmaps[b] @ ph[p]
        ds.append(dk)
    return TruncatedDeformation(tuple(nus), tuple(ds), D.lam)


def check_first_order_isomorphism(base: MDLTS, D1: TruncatedDeformation, D2: TruncatedDeformation, phi: FormalIsomorphism) -> ValidationReport:
    """Coefficients of ``t^0`` and ``t^1`` in ``phi nu2 = nu1 (phi x phi x phi)`` and ``phi d2 = d1 phi``."""
    n = base.dim
    rep = ValidationReport()
    ph = phi.coefficients(n, 1)
    nu1 = [_to_array(f) for f in D1.nu[:2]]
    nu2 = [_to_array(f) for f in D2.nu[:2]]
    for order in (0, 1):
        for i, j, k in itertools.product(range(n), repeat=3):
            lhs = [ZERO] * n
            for a in range(order + 1):
                lhs = _add(lhs, ph[a].apply(nu2[order - a][i][j][k]))
            rhs = [ZERO] * n
            for b, p, q, r in itertools.product(range(order + 1), repeat=4):
                if b + p + q + r == order:
                    part = _transform(nu1[b], ph[p], ph[q], ph[r], None, n)
                    rhs = _add(rhs, part[i][j][k])
            if lhs != rhs:
                rep.fail("bracket_intertwining", (order, i, j, k))
                break
        lhs = Matrix.zeros(n, n)
        rhs = Matrix.zeros(n, n)
        for a in range(order + 1):
            lhs = lhs + ph[a] @ D2.dmaps[order - a]
            rhs = rhs + D1.dmaps[order - a] @ ph[a]
        if lhs != rhs:
            rep.fail("operator_intertwining", (order,))
    return rep


def equivalent_infinitesimals_check(
    base: MDLTS,
    D1: TruncatedDeformation,
    D2: TruncatedDeformation,
    phi: FormalIsomorphism,
) -> bool:
    """Whether the infinitesimals of ``D1`` and ``D2`` define the same third cohomology class.

    ``phi`` must map ``D2`` to ``D1`` at first order; otherwise :class:`IsomorphismError`.
    """
    check = check_first_order_isomorphism(base, D1, D2, phi)
    if not check:
        f = check.first
        raise IsomorphismError(f"phi is not a first-order isomorphism: {f.identity} at {f.witness}")
    r = adjoint_rep(base.lts, base.mdo)
    report = cohomology(base.lts, base.mdo, r, 3)
    return report.class_of(infinitesimal(D1)) == report.class_of(infinitesimal(D2))


@dataclass
class RigidityReport:
    dimH3: int
    rigid_certified: bool
    candidate: MDCochain | None
    space_used: str
    note: str = "vanishing third cohomology certifies rigidity; only the first-order elimination step is carried out"
    cohomology: CohomologyReport | None = field(default=None, repr=False)


def rigidity_report(base: MDLTS, r: Representation | None = None) -> RigidityReport:
    r = adjoint_rep(base.lts, base.mdo) if r is None else r
    rep = cohomology(base.lts, base.mdo, r, 3)
    candidate = rep.representatives[0] if rep.representatives else None
    return RigidityReport(rep.dimH, rep.dimH == 0, candidate, rep.space_used, cohomology=rep)


def trivialize_first_order(base: MDLTS, D: TruncatedDeformation) -> tuple[FormalIsomorphism, TruncatedDeformation]:
    """Find ``phi_1`` with ``partial(phi_1) = -(nu_1, d_1)`` and pull ``D`` back along ``id + phi_1 t``.

    The result has vanishing first-order coefficients.  Raises
    :class:`~mdlts.linalg.NoSolutionError` when the infinitesimal is not exact.
    """
    r = adjoint_rep(base.lts, base.mdo)
    report = cohomology(base.lts, base.mdo, r, 3)
    cc = report.complex
    target = cc.to_coords(-infinitesimal(D))
    coords = solve(cc.operator_matrix(1), target)
    phi1 = cc.from_coords(1, coords).f.to_matrix()
    phi = FormalIsomorphism((phi1,))
    return phi, apply_isomorphism(base, D, phi)


__all__ = [
    "DEFAULT_ORDER",
    "MAX_ORDER",
    "DeformationReport",
    "FormalIsomorphism",
    "IsomorphismError",
    "NoSolutionError",
    "RigidityReport",
    "TruncatedDeformation",
    "apply_isomorphism",
    "bracket_cochain",
    "check_first_order_isomorphism",
    "compose_isomorphisms",
    "equivalent_infinitesimals_check",
    "infinitesimal",
    "rigidity_report",
    "series_inverse",
    "trivialize_first_order",
    "verify_deformation",
]
