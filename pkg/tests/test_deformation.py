from __future__ import annotations

import random

import pytest

from conftest import load_fixture, random_fraction, random_matrix, two_dim
from mdlts.cochain import CochainComplex, MDCochain, TensorCochain, partial
from mdlts.cohomology import cohomology, is_cocycle
from mdlts.deformation import (
    MAX_ORDER,
    FormalIsomorphism,
    IsomorphismError,
    TruncatedDeformation,
    apply_isomorphism,
    compose_isomorphisms,
    equivalent_infinitesimals_check,
    infinitesimal,
    rigidity_report,
    series_inverse,
    trivialize_first_order,
    verify_deformation,
)
from mdlts.linalg import Matrix, NoSolutionError
from mdlts.lts import MDLTS, ModifiedDifferential, TripleSystem, adjoint_rep
from oracles import PointwiseOracle

BASES = ["fixture2d", "fixture2d_k1", "lie_induced"]


def _complex(s):
    return CochainComplex(s, adjoint_rep(s.lts, s.mdo))


def _order_one(s, x: MDCochain) -> TruncatedDeformation:
    return TruncatedDeformation.from_base(s, [x.f], [x.g.to_matrix()])


@pytest.mark.parametrize("name", BASES + ["fixture4d"])
def test_constant_deformation_passes(name):
    s = load_fixture(name).system()
    D = TruncatedDeformation.constant(s, 2 if s.dim <= 2 else 1)
    assert verify_deformation(s, D)
    assert infinitesimal(D).is_zero()


def test_skew_violation_detected():
    s = two_dim(1, 0, 1, -2)
    nu1 = TensorCochain(3, 2, 2, {((0, 1, 0), 1): 1})
    rep = verify_deformation(s, TruncatedDeformation.from_base(s, [nu1], []))
    assert not rep
    assert rep.first[0] == 1 and rep.first[1].identity == "skew_symmetry"


def test_base_mismatch_reported():
    s = two_dim(1, 0, 1, -2)
    D = TruncatedDeformation.constant(two_dim(1, 1, 1, -2), 1)
    rep = verify_deformation(s, D)
    assert not rep and rep.first[1].identity == "base_operator"


@pytest.mark.parametrize("name", BASES)
def test_order_one_validity_iff_cocycle(name):
    s = load_fixture(name).system()
    cc = _complex(s)
    r = cc.rep
    rng = random.Random(name)
    rep = cohomology(s.lts, s.mdo, r, 3)
    seen = {True: 0, False: 0}
    candidates = list(rep.representatives)
    for _ in range(25):
        coords = [random_fraction(rng) if rng.random() < 0.3 else 0 for _ in range(cc.level_dim(2))]
        candidates.append(cc.from_coords(2, coords))
    for _ in range(5):
        xi = random_matrix(rng, s.dim, s.dim)
        candidates.append(partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(xi))))
    for x in candidates:
        valid = bool(verify_deformation(s, _order_one(s, x)))
        assert valid == is_cocycle(s.lts, s.mdo, r, x).ok
        seen[valid] += 1
    assert seen[True] and seen[False]


def test_derivation_only_infinitesimal():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    h1 = cohomology(s.lts, s.mdo, r, 1)
    # a 1-cocycle commutes with d, so (0, d1) is an order-one deformation with d1 a derivation
    d1 = h1.representatives[0].f.to_matrix()
    D = TruncatedDeformation.from_base(s, [], [d1])
    assert verify_deformation(s, D)
    assert partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(d1))).f.is_zero()


def test_identity_isomorphism_is_neutral():
    s = two_dim(3, 5, 7, -14)
    x = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 3).representatives[0]
    D = _order_one(s, x)
    out = apply_isomorphism(s, D, FormalIsomorphism(()))
    assert out.nu == D.nu and out.dmaps == D.dmaps


@pytest.mark.parametrize("name", BASES)
def test_infinitesimal_shift_is_coboundary(name):
    s = load_fixture(name).system()
    r = adjoint_rep(s.lts, s.mdo)
    rng = random.Random(17)
    reps = cohomology(s.lts, s.mdo, r, 3).representatives
    D = _order_one(s, reps[0]) if reps else TruncatedDeformation.constant(s, 1)
    for _ in range(20):
        phi1 = random_matrix(rng, s.dim, s.dim)
        D2 = apply_isomorphism(s, D, FormalIsomorphism((phi1,)))
        expect = partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(phi1)))
        assert infinitesimal(D2) - infinitesimal(D) == expect


def test_transform_of_constant_deformation_components():
    s = two_dim(1, 0, 1, -2)
    r = adjoint_rep(s.lts, s.mdo)
    phi1 = Matrix([[2, -1], [1, 3]])
    D2 = apply_isomorphism(s, TruncatedDeformation.constant(s, 1), FormalIsomorphism((phi1,)))
    img = partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(phi1)))
    assert D2.nu[1] == img.f
    assert TensorCochain.from_matrix(D2.dmaps[1]) == img.g


def test_transform_preserves_validity_at_order_two():
    s = two_dim(1, 0, 1, -2)
    rng = random.Random(4)
    D = TruncatedDeformation.constant(s, 2)
    for _ in range(3):
        phi = FormalIsomorphism((random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)))
        D2 = apply_isomorphism(s, D, phi)
        assert verify_deformation(s, D2)
        D = D2


def test_transforms_compose():
    s = two_dim(3, 5, 7, -14)
    rng = random.Random(8)
    D = TruncatedDeformation.constant(s, 2)
    a = FormalIsomorphism((random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)))
    b = FormalIsomorphism((random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)))
    left = apply_isomorphism(s, apply_isomorphism(s, D, a), b)
    right = apply_isomorphism(s, D, compose_isomorphisms(a, b, 2, 2))
    assert left.nu == right.nu and left.dmaps == right.dmaps


def test_series_inverse():
    rng = random.Random(1)
    coeffs = [Matrix.identity(3)] + [random_matrix(rng, 3, 3) for _ in range(3)]
    inv = series_inverse(coeffs, 3)
    for k in range(4):
        acc = Matrix.zeros(3, 3)
        for i in range(k + 1):
            acc = acc + coeffs[i] @ inv[k - i]
        assert acc == (Matrix.identity(3) if k == 0 else Matrix.zeros(3, 3))


def test_equivalent_infinitesimals():
    s = two_dim(1, 0, 1, -2)
    reps = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 3).representatives
    D1 = _order_one(s, reps[0])
    phi = FormalIsomorphism((Matrix([[1, 2], [0, -1]]),))
    D2 = apply_isomorphism(s, D1, phi)
    assert equivalent_infinitesimals_check(s, D1, D2, phi)
    assert equivalent_infinitesimals_check(s, D1, D1, FormalIsomorphism(()))
    with pytest.raises(IsomorphismError):
        equivalent_infinitesimals_check(s, D2, D1, phi)


def test_rigidity_one_dimensional_abelian():
    # the trilinear part vanishes, but the operator can still be deformed: d_t = t * d1
    s = MDLTS(TripleSystem.abelian(1), ModifiedDifferential(Matrix.zeros(1, 1), 0))
    rr = rigidity_report(s)
    assert PointwiseOracle(s, adjoint_rep(s.lts, s.mdo)).dims()["H3"] == 1
    assert rr.dimH3 == 1 and not rr.rigid_certified
    assert rr.candidate.f.is_zero() and not rr.candidate.g.is_zero()
    assert "first-order" in rr.note
    D = TruncatedDeformation.from_base(s, [], [Matrix([[1]])])
    assert verify_deformation(s, D)
    with pytest.raises(NoSolutionError):
        trivialize_first_order(s, D)


def test_rigidity_matches_cohomology_and_candidate_is_cocycle():
    s = two_dim(3, 5, 7, -14)
    r = adjoint_rep(s.lts, s.mdo)
    rr = rigidity_report(s)
    assert rr.dimH3 == cohomology(s.lts, s.mdo, r, 3).dimH
    assert not rr.rigid_certified
    assert is_cocycle(s.lts, s.mdo, r, rr.candidate)
    assert verify_deformation(s, _order_one(s, rr.candidate))


def test_trivialize_exact_infinitesimal():
    s = two_dim(3, 5, 7, -14)
    phi = FormalIsomorphism((Matrix([[1, 1], [2, -3]]),))
    D = apply_isomorphism(s, TruncatedDeformation.constant(s, 1), phi)
    found, D0 = trivialize_first_order(s, D)
    assert infinitesimal(D0).is_zero()
    assert verify_deformation(s, D0)


def test_trivialize_fails_on_nontrivial_class():
    s = two_dim(3, 5, 7, -14)
    x = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 3).representatives[0]
    with pytest.raises(NoSolutionError):
        trivialize_first_order(s, _order_one(s, x))


def test_order_limits():
    s = two_dim(1, 0, 1, -2)
    assert TruncatedDeformation.constant(s).order == 2
    with pytest.raises(ValueError):
        TruncatedDeformation.constant(s, MAX_ORDER + 1)
