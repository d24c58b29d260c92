"""Abelian extensions ``0 -> V -> E -> L -> 0`` built from and classified by level-2 cocycles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .cochain import PAPER, CochainComplex, MDCochain, TensorCochain
from .cohomology import NotACocycleError, is_cocycle
from .linalg import Matrix, NoSolutionError, rank, solve
from .lts import (
    MDLTS,
    ModifiedDifferential,
    Representation,
    TripleSystem,
    ValidationReport,
    check_homomorphism,
    dense_from_table,
    twisted_product_table,
    validate_rep,
)

ZERO = Fraction(0)


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExtensionCocycle:
    """``varsigma: L^3 -> V`` and ``varpi: L -> V`` (a ``vdim x dim`` matrix)."""

    varsigma: TensorCochain
    varpi: Matrix

    def __post_init__(self):
        s, w = self.varsigma, self.varpi
        if s.degree != 3 or w.shape != (s.vdim, s.dim):
            raise ValueError("varsigma must be trilinear and varpi must be vdim x dim")

    @classmethod
    def from_mdcochain(cls, x: MDCochain) -> "ExtensionCocycle":
        if x.n != 2:
            raise ValueError("extension data is a level-2 cochain")
        return cls(x.f, x.g.to_matrix())

    @classmethod
    def zero(cls, dim: int, vdim: int) -> "ExtensionCocycle":
        return cls(TensorCochain.zero(3, dim, vdim), Matrix.zeros(vdim, dim))

    def as_mdcochain(self) -> MDCochain:
        return MDCochain(2, self.varsigma, TensorCochain.from_matrix(self.varpi))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtensionCocycle):
            return NotImplemented
        return self.varsigma == other.varsigma and self.varpi == other.varpi


@dataclass(frozen=True, eq=False)
class AbelianExtension:
    base: MDLTS
    total: MDLTS
    inject: Matrix
    project: Matrix
    section: Matrix

    @property
    def vdim(self) -> int:
        return self.inject.cols

    def frame(self) -> Matrix:
        """``[section | inject]``: columns are a basis of the total space adapted to ``L + V``."""
        return self.section.hstack(self.inject)


def build_extension(
    t: TripleSystem,
    m: ModifiedDifferential,
    r: Representation,
    c: ExtensionCocycle,
    check: bool = True,
) -> AbelianExtension:
    """Twisted bracket and ``d_hat = [[d, 0], [varpi, dV]]`` on ``L + V``.

    The cocycle condition is necessary and sufficient for the result to be a
    valid system, so a non-cocycle is rejected when ``check`` is set.
    """
    n, vd = t.dim, r.vdim
    if (c.varsigma.dim, c.varsigma.vdim) != (n, vd):
        raise ValueError("cocycle shape does not match the system and module")
    if check:
        vr = validate_rep(t, m, r)
        if not vr:
            f = vr.first
            raise ExtensionError(f"not a representation: {f.identity} at {f.witness}")
        cc = is_cocycle(t, m, r, c.as_mdcochain())
        if not cc:
            why = "outside the cochain space" if not cc.in_subspace else f"residual {cc.residual}"
            raise NotACocycleError(f"extension data is not a 3-cocycle ({why})")
    cocycle: dict = {}
    for ((i, j, k), o), v in c.varsigma.coords.items():
        cocycle.setdefault((i, j, k), {})[o] = v
    total = n + vd
    lts = TripleSystem(total, dense_from_table(total, twisted_product_table(t, r, cocycle)))
    top = m.d.hstack(Matrix.zeros(n, vd))
    dhat = top.vstack(c.varpi.hstack(r.dV))
    sys_ = MDLTS(lts, ModifiedDifferential(dhat, m.lam))
    inject = Matrix.zeros(n, vd).vstack(Matrix.identity(vd))
    project = Matrix.identity(n).hstack(Matrix.zeros(n, vd))
    section = Matrix.identity(n).vstack(Matrix.zeros(vd, n))
    return AbelianExtension(MDLTS(t, m), sys_, inject, project, section)


def with_section(e: AbelianExtension, section: Matrix) -> AbelianExtension:
    if section.shape != e.section.shape:
        raise ValueError("section has the wrong shape")
    if e.project @ section != Matrix.identity(e.base.dim):
        raise ExtensionError("project o section is not the identity")
    return AbelianExtension(e.base, e.total, e.inject, e.project, section)


def shift_section(e: AbelianExtension, xi: Matrix) -> AbelianExtension:
    """Section ``a -> section(a) + inject(xi a)``."""
    return with_section(e, e.section + e.inject @ xi)


def check_extension(e: AbelianExtension) -> ValidationReport:
    """Exactness, splitting, the abelian-ideal condition and compatibility of both maps."""
    rep = ValidationReport()
    n, vd, N = e.base.dim, e.vdim, e.total.dim
    if e.inject.shape != (N, vd) or e.project.shape != (n, N) or e.section.shape != (N, n):
        raise ValueError("inconsistent extension map shapes")
    if N != n + vd:
        rep.fail("dimension", (N, n, vd))
        return rep
    if not (e.project @ e.inject).is_zero():
        rep.fail("exactness", ())
    if rank(e.inject) != vd:
        rep.fail("inject_injective", ())
    if e.project @ e.section != Matrix.identity(n):
        rep.fail("section_splits", ())
    if not rep.ok:
        return rep
    hom = check_homomorphism(e.total, e.base, e.project)
    for f in hom.failures:
        rep.fail("project_" + f.identity, f.witness, f.detail)
    ucols = e.inject.columns()
    dhat = e.total.d
    for u in ucols:
        if any(e.project.apply(dhat.apply(u))):
            rep.fail("fiber_preserved", ())
            break
    basis = [tuple(Fraction(int(i == j)) for j in range(N)) for i in range(N)]
    for a, b in itertools.product(range(vd), repeat=2):
        for z in basis:
            u, v = ucols[a], ucols[b]
            for args in ((u, v, z), (u, z, v), (z, u, v)):
                if any(e.total.lts.bracket(*args)):
                    rep.fail("abelian_ideal", (a, b))
                    return rep
    return rep


def _fiber_coords(e: AbelianExtension):
    """Return a function mapping a total vector to its ``(L, V)`` coordinates in the section frame."""
    inv = e.frame().inverse()
    n = e.base.dim

    def coords(w):
        c = inv.apply(w)
        return c[:n], c[n:]

    return coords


def extract(e: AbelianExtension) -> tuple[Representation, ExtensionCocycle]:
    """Induced module and the cocycle measuring how far the section is from a homomorphism."""
    rep = check_extension(e)
    if not rep:
        f = rep.first
        raise ExtensionError(f"not an abelian extension: {f.identity} at {f.witness}")
    n, vd = e.base.dim, e.vdim
    coords = _fiber_coords(e)
    br = e.total.lts.bracket
    scols = e.section.columns()
    ucols = e.inject.columns()
    dhat = e.total.d

    def fiber(w) -> tuple:
        a, u = coords(w)
        if any(a):
            raise ExtensionError("value expected in the fiber lies outside it")
        return u

    theta = tuple(
        tuple(
            Matrix.from_columns([fiber(br(ucols[k], scols[i], scols[j])) for k in range(vd)], rows=vd)
            for j in range(n)
        )
        for i in range(n)
    )
    dV = Matrix.from_columns([fiber(dhat.apply(u)) for u in ucols], rows=vd)
    module = Representation(vd, theta, dV)
    t, d = e.base.lts, e.base.d
    sig = e.section
    vs = {}
    for i, j, k in itertools.product(range(n), repeat=3):
        w = tuple(x - y for x, y in zip(br(scols[i], scols[j], scols[k]), sig.apply(t.c[i][j][k])))
        for o, v in enumerate(fiber(w)):
            if v:
                vs[((i, j, k), o)] = v
    varsigma = TensorCochain(3, n, vd, vs)
    diff = dhat @ sig - sig @ d
    varpi = Matrix.from_columns([fiber(col) for col in diff.columns()], rows=vd)
    return module, ExtensionCocycle(varsigma, varpi)


@dataclass
class EquivalenceResult:
    equivalent: bool
    witness: Matrix | None = None
    xi: Matrix | None = None
    verification: ValidationReport = field(default_factory=ValidationReport)

    def __bool__(self) -> bool:
        return self.equivalent


def _same_fiber(e1: AbelianExtension, e2: AbelianExtension) -> None:
    b1, b2 = e1.base, e2.base
    if b1.dim != b2.dim or b1.lts.c != b2.lts.c or b1.d != b2.d or b1.lam != b2.lam:
        raise ExtensionError("extensions have different bases")
    if e1.vdim != e2.vdim:
        raise ExtensionError("extensions have fibers of different dimension")


def are_equivalent(e1: AbelianExtension, e2: AbelianExtension) -> EquivalenceResult:
    """Decide equivalence and, when it holds, return ``zeta: E1 -> E2``.

    ``zeta`` sends ``section1(a) + inject1(u)`` to ``section2(a) + inject2(xi a + u)``
    where ``partial(xi)`` is the difference of the two extracted cocycles.
    """
    _same_fiber(e1, e2)
    r1, c1 = extract(e1)
    r2, c2 = extract(e2)
    if r1.dV != r2.dV:
        raise ExtensionError("fibers carry different differentials")
    if r1.theta != r2.theta:
        # equivalent extensions induce the same module
        return EquivalenceResult(False)
    cc = CochainComplex(e1.base, r1, PAPER)
    diff = c1.as_mdcochain() - c2.as_mdcochain()
    try:
        coords = solve(cc.operator_matrix(1), cc.to_coords(diff))
    except NoSolutionError:
        return EquivalenceResult(False)
    xi = cc.from_coords(1, coords).f.to_matrix()
    target = (e2.section + e2.inject @ xi).hstack(e2.inject)
    zeta = target @ e1.frame().inverse()
    ver = check_homomorphism(e1.total, e2.total, zeta)
    if zeta @ e1.inject != e2.inject:
        ver.fail("fiber_identity", ())
    if e2.project @ zeta != e1.project:
        ver.fail("base_identity", ())
    if not ver.notes.get("isomorphism"):
        ver.fail("invertible", ())
    if not ver:
        raise ArithmeticError(f"constructed witness failed verification: {ver.first}")
    return EquivalenceResult(True, zeta, xi, ver)


__all__ = [
    "AbelianExtension",
    "EquivalenceResult",
    "ExtensionCocycle",
    "ExtensionError",
    "are_equivalent",
    "build_extension",
    "check_extension",
    "extract",
    "shift_section",
    "with_section",
]
