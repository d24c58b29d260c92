from __future__ import annotations

import importlib
import random

import pytest

from conftest import load_fixture, random_fraction, random_matrix, two_dim
from mdlts.cochain import PAPER, STRENGTHENED, ClosureError, MDCochain, TensorCochain, partial
from mdlts.cohomology import (
    NotACocycleError,
    coboundary_preimage,
    cohomology,
    cohomology_class,
    is_cocycle,
)
from mdlts.linalg import Matrix, NoSolutionError
from mdlts.lts import MDLTS, ModifiedDifferential, Representation, TripleSystem, adjoint_rep, dual_rep
from oracles import PointwiseOracle

ORACLE_CASES = ["fixture2d", "fixture2d_k1", "lie_induced"]


def _dims(s, r):
    h1 = cohomology(s.lts, s.mdo, r, 1)
    h3 = cohomology(s.lts, s.mdo, r, 3)
    return {"Z1": h1.dimZ, "B1": h1.dimB, "H1": h1.dimH, "Z3": h3.dimZ, "B3": h3.dimB, "H3": h3.dimH}


@pytest.mark.parametrize("name", ORACLE_CASES)
def test_dimensions_match_oracle_adjoint(name):
    s = load_fixture(name).system()
    r = adjoint_rep(s.lts, s.mdo)
    assert _dims(s, r) == PointwiseOracle(s, r).dims()


@pytest.mark.parametrize("name", ORACLE_CASES)
def test_dimensions_match_oracle_dual(name):
    s = load_fixture(name).system()
    r = dual_rep(adjoint_rep(s.lts, s.mdo))
    assert _dims(s, r) == PointwiseOracle(s, r).dims()


@pytest.mark.parametrize("k,k1,k2", [(2, -1, 3), (0, 1, 1), (5, 0, -2)])
def test_dimensions_match_oracle_family(k, k1, k2):
    s = two_dim(k, k1, k2, -2 * k2)
    r = adjoint_rep(s.lts, s.mdo)
    assert _dims(s, r) == PointwiseOracle(s, r).dims()


def test_trivial_module_abelian_oracle():
    s = MDLTS(TripleSystem.abelian(2), ModifiedDifferential(Matrix([[1, 0], [2, 3]]), 0))
    zero = Matrix.zeros(1, 1)
    r = Representation(1, ((zero, zero), (zero, zero)), Matrix([[1]]))
    assert _dims(s, r) == PointwiseOracle(s, r).dims()


def test_degree_one_coboundaries_vanish():
    s = two_dim(3, 5, 7, -14)
    rep = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 1)
    assert rep.dimB == 0 and rep.dimH == rep.dimZ


@pytest.mark.parametrize("name", ["fixture2d", "fixture2d_k1", "fixture4d"])
def test_representatives_are_cocycles(name):
    s = load_fixture(name).system()
    r = adjoint_rep(s.lts, s.mdo)
    for degree in (1, 3):
        rep = cohomology(s.lts, s.mdo, r, degree)
        assert len(rep.representatives) == rep.dimH
        for x in rep.representatives:
            assert is_cocycle(s.lts, s.mdo, r, x)


def test_degree_five_dimensions_are_consistent():
    s = two_dim(1, 0, 1, -2)
    rep = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 5)
    assert rep.dimZ - rep.dimB == rep.dimH == len(rep.representatives)
    assert rep.space_used == PAPER


def test_class_invariant_under_random_coboundaries():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    rep = cohomology(s.lts, s.mdo, r, 3)
    rng = random.Random(2024)
    base = rep.representatives[0] + rep.representatives[1].scale(3)
    cls = rep.class_of(base)
    assert cls == (1, 3, 0)
    for _ in range(20):
        xi = random_matrix(rng, 2, 2)
        shifted = base + partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(xi)))
        assert rep.class_of(shifted) == cls
        assert cohomology_class(s.lts, s.mdo, r, shifted) == cls


def test_class_of_rejects_non_cocycles():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    rep = cohomology(s.lts, s.mdo, r, 3)
    bad = MDCochain(2, TensorCochain.zero(3, 2, 2), TensorCochain.from_matrix(Matrix([[0, 0], [1, 0]])))
    assert not is_cocycle(s.lts, s.mdo, r, bad)
    with pytest.raises(NotACocycleError):
        rep.class_of(bad)


def test_is_cocycle_reports_subspace_violation():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    not_skew = MDCochain(2, TensorCochain(3, 2, 2, {((0, 0, 1), 0): 1}), TensorCochain.zero(1, 2, 2))
    check = is_cocycle(s.lts, s.mdo, r, not_skew)
    assert not check.ok and not check.in_subspace


def test_coboundary_preimage():
    s = two_dim(3, 5, 7, -14)
    r = adjoint_rep(s.lts, s.mdo)
    rep = cohomology(s.lts, s.mdo, r, 3)
    xi = Matrix([[1, 2], [3, 4]])
    x = partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(xi)))
    y = coboundary_preimage(rep, x)
    assert partial(s.lts, s.mdo, r, y) == x
    with pytest.raises(NoSolutionError):
        coboundary_preimage(rep, rep.representatives[0])


def _permuted(s: MDLTS, perm) -> MDLTS:
    n = s.dim
    c = [[[[s.lts.c[perm[i]][perm[j]][perm[k]][perm[l]] for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)]
    d = Matrix([[s.d[perm[i], perm[j]] for j in range(n)] for i in range(n)])
    return MDLTS(TripleSystem(n, c), ModifiedDifferential(d, s.lam))


@pytest.mark.parametrize("name", ["fixture2d", "fixture2d_k1", "fixture4d"])
def test_dimensions_invariant_under_basis_permutation(name):
    s = load_fixture(name).system()
    rng = random.Random(name)
    perm = list(range(s.dim))
    rng.shuffle(perm)
    if perm == list(range(s.dim)):
        perm = perm[::-1]
    p = _permuted(s, perm)
    for degree in (1, 3):
        a = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), degree)
        b = cohomology(p.lts, p.mdo, adjoint_rep(p.lts, p.mdo), degree)
        assert (a.dimZ, a.dimB, a.dimH) == (b.dimZ, b.dimB, b.dimH)


def test_spaces_agree_in_low_degree():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    a = cohomology(s.lts, s.mdo, r, 3, PAPER)
    b = cohomology(s.lts, s.mdo, r, 3, STRENGTHENED)
    assert (a.dimZ, a.dimB, a.dimH) == (b.dimZ, b.dimB, b.dimH)


def test_fallback_on_closure_failure(monkeypatch):
    coh = importlib.import_module("mdlts.cohomology")
    real = coh._cohomology

    def fail_on_paper(cc, degree):
        if cc.space == PAPER:
            raise ClosureError("closure violated: forced")
        return real(cc, degree)

    monkeypatch.setattr(coh, "_cohomology", fail_on_paper)
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    assert cohomology(s.lts, s.mdo, r, 3).space_used == STRENGTHENED
    with pytest.raises(ClosureError):
        cohomology(s.lts, s.mdo, r, 3, PAPER)


def test_even_degree_rejected():
    s = two_dim(1, 0, 1, -2)
    with pytest.raises(ValueError):
        cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 2)


def test_random_cocycle_combinations_stay_cocycles():
    s = load_fixture("fixture4d").system()
    r = adjoint_rep(s.lts, s.mdo)
    rep = cohomology(s.lts, s.mdo, r, 3)
    rng = random.Random(9)
    x = MDCochain.zero(2, 4, 4)
    for rv in rep.representatives:
        x = x + rv.scale(random_fraction(rng))
    assert is_cocycle(s.lts, s.mdo, r, x)
