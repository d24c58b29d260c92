"""Cocycles, coboundaries and cohomology with explicit representatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cochain import (
    DEFAULT_LIMITS,
    PAPER,
    SPACES,
    ClosureError,
    CochainComplex,
    Limits,
    MDCochain,
    _basis,
    partial,
)
from .linalg import Matrix, NoSolutionError, nullspace, rref, solve
from .lts import MDLTS, ModifiedDifferential, Representation, TripleSystem

ZERO = Fraction(0)


class NotACocycleError(ValueError):
    pass


@dataclass
class CohomologyReport:
    degree: int
    dimZ: int
    dimB: int
    dimH: int
    representatives: list[MDCochain]
    space_used: str
    complex: CochainComplex = field(repr=False)
    cocycle_basis: Matrix = field(repr=False)
    coboundary_basis: Matrix = field(repr=False)

    @property
    def level(self) -> int:
        """Index ``n`` of the cochain level holding degree ``2n-1``."""
        return (self.degree + 1) // 2

    @property
    def representative_coords(self) -> list[tuple]:
        return self.cocycle_basis.columns()

    def outgoing(self) -> Matrix:
        return self.complex.operator_matrix(self.level)

    def class_of(self, x: MDCochain) -> tuple:
        """Coordinates of the class of ``x`` in the representative basis."""
        if x.n != self.level:
            raise ValueError(f"expected a level-{self.level} cochain, got level {x.n}")
        coords = self.complex.to_coords(x)
        if any(self.outgoing().apply(coords)):
            raise NotACocycleError("cochain is not a cocycle")
        B, R = self.coboundary_basis, self.cocycle_basis
        system = B.hstack(R)
        y = solve(system, coords)
        return y[B.cols:]


def cohomology(
    t: TripleSystem,
    m: ModifiedDifferential,
    r: Representation,
    degree: int,
    space: str | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> CohomologyReport:
    """Cohomology in odd ``degree`` (1, 3, 5, ...).

    The coboundary space in degree 1 is zero.  ``space=None`` falls back to
    the strengthened cochain space only when closure fails in the stated one.
    """
    if degree < 1 or degree % 2 == 0:
        raise ValueError("cohomology is defined in odd positive degrees")
    spaces = SPACES if space is None else (space,)
    err = None
    for sp in spaces:
        try:
            return _cohomology(CochainComplex(MDLTS(t, m), r, sp, limits), degree)
        except ClosureError as exc:
            err = exc
    raise err


def _cohomology(cc: CochainComplex, degree: int) -> CohomologyReport:
    k = (degree + 1) // 2
    out = cc.operator_matrix(k)
    kernel = nullspace(out)
    if k == 1:
        incoming = Matrix.zeros(out.cols, 0)
    else:
        incoming = cc.operator_matrix(k - 1)
    _, pivots = rref(incoming.hstack(kernel))
    image_cols = [p for p in pivots if p < incoming.cols]
    rep_cols = [p - incoming.cols for p in pivots if p >= incoming.cols]
    B = incoming.submatrix(range(incoming.rows), image_cols)
    R = kernel.submatrix(range(kernel.rows), rep_cols)
    dimZ, dimB = kernel.cols, len(image_cols)
    if dimZ - dimB != len(rep_cols):
        raise ArithmeticError("image of the incoming differential is not inside the kernel")
    reps = [cc.from_coords(k, col) for col in R.columns()]
    return CohomologyReport(degree, dimZ, dimB, dimZ - dimB, reps, cc.space, cc, R, B)


@dataclass
class CocycleCheck:
    ok: bool
    residual: Fraction
    in_subspace: bool = True
    image: MDCochain | None = None

    def __bool__(self) -> bool:
        return self.ok


def in_cochain_space(x: MDCochain, space: str = PAPER) -> bool:
    return all(_basis(p.dim, p.vdim, p.degree, space).contains(p) for p in x.parts())


def is_cocycle(t: TripleSystem, m: ModifiedDifferential, r: Representation, x: MDCochain) -> CocycleCheck:
    """Exact test of ``partial x = 0``; ``residual`` is the largest violated coordinate."""
    img = partial(t, m, r, x)
    inside = in_cochain_space(x)
    res = img.max_abs()
    return CocycleCheck(inside and res == 0, res, inside, img)


def cohomology_class(
    t: TripleSystem,
    m: ModifiedDifferential,
    r: Representation,
    x: MDCochain,
    space: str | None = None,
) -> tuple:
    report = cohomology(t, m, r, x.degree, space)
    return report.class_of(x)


def coboundary_preimage(report: CohomologyReport, x: MDCochain) -> MDCochain:
    """A cochain ``y`` one level down with ``partial y = x``; raises if ``x`` is not exact."""
    if report.level < 2:
        raise NoSolutionError("nothing is exact in degree 1")
    cc = report.complex
    coords = solve(cc.operator_matrix(report.level - 1), cc.to_coords(x))
    return cc.from_coords(report.level - 1, coords)
