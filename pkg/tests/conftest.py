from __future__ import annotations

import random
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mdlts.io import SystemFile, parse
from mdlts.linalg import Matrix
from mdlts.lts import MDLTS, ModifiedDifferential, TripleSystem

FIXTURE_NAMES = ["fixture2d", "fixture2d_k1", "fixture4d", "abelian3", "lie_induced"]


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("mdlts") / "fixtures" / f"{name}.json"))


def load_fixture(name: str) -> SystemFile:
    return parse(fixture_path(name).read_bytes())


def two_dim(k, k1, k2, lam) -> MDLTS:
    t = TripleSystem.from_brackets(2, {(0, 1, 1): {0: 1}}, complete_skew=True)
    return MDLTS(t, ModifiedDifferential(Matrix([[k, k1], [0, k2]]), lam))


def four_dim(k, k1, k2, k3, k4, lam) -> MDLTS:
    t = TripleSystem.from_brackets(4, {(0, 1, 0): {3: 1}}, complete_skew=True)
    d = Matrix([[1, 0, k1, 0], [0, 1, k2, 0], [0, 0, k3, 0], [0, 0, k4, k]])
    return MDLTS(t, ModifiedDifferential(d, lam))


def random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def random_matrix(rng: random.Random, rows: int, cols: int) -> Matrix:
    return Matrix([[random_fraction(rng) for _ in range(cols)] for _ in range(rows)])


@pytest.fixture(params=FIXTURE_NAMES)
def valid_fixture(request) -> SystemFile:
    return load_fixture(request.param)
