from __future__ import annotations

import importlib
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURE_NAMES, fixture_path, load_fixture
from mdlts.cli import main
from mdlts.cochain import ClosureError, MDCochain, TensorCochain, partial
from mdlts.cohomology import cohomology
from mdlts.deformation import TruncatedDeformation, apply_isomorphism, FormalIsomorphism
from mdlts.extension import ExtensionCocycle
from mdlts.io import (
    CocycleFile,
    ParseError,
    RepresentationSpec,
    SystemFile,
    emit,
    emit_cocycle,
    emit_deformation,
    parse,
    parse_cocycle,
    parse_deformation,
    parse_rational,
)
from mdlts.linalg import Matrix
from mdlts.lts import adjoint_rep, validate_mdlts
from oracles import PointwiseOracle

FIX2D = {
    "dim": 2,
    "brackets": [{"args": [0, 1, 1], "out": {"0": "1"}}],
    "lambda": "-14",
    "d": [["3", "5"], ["0", "7"]],
    "options": {"complete_skew": True},
}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


def test_parse_two_dim_fixture():
    sf = parse(json.dumps(FIX2D))
    assert sf.lam == -14 and sf.d == Matrix([[3, 5], [0, 7]])
    assert validate_mdlts(sf.system())
    assert sf == load_fixture("fixture2d").__class__(**{**load_fixture("fixture2d").__dict__, "basis": None})


@pytest.mark.parametrize("text", ["1/0", "0.5", "abc", "1/-2", ""])
def test_bad_rationals(text):
    with pytest.raises(ParseError):
        parse_rational(text)


def test_rational_forms():
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert parse_rational(" 4 ") == 4
    with pytest.raises(ParseError):
        parse_rational(0.5)
    with pytest.raises(ParseError):
        parse_rational(True)


def test_lambda_with_zero_denominator():
    with pytest.raises(ParseError, match="lambda"):
        parse(json.dumps({**FIX2D, "lambda": "1/0"}))


def test_float_literal_rejected():
    with pytest.raises(ParseError, match="floating point"):
        parse(json.dumps(FIX2D).replace('"-14"', "-14.0"))


@pytest.mark.parametrize(
    "patch,where",
    [
        ({"colour": 1}, "unknown"),
        ({"options": {"complete_skew": True, "fast": True}}, "options"),
        ({"d": [["1"]]}, "d"),
        ({"brackets": [{"args": [0, 1, 5], "out": {"0": "1"}}]}, "brackets"),
        ({"brackets": [{"args": [0, 1, 1], "out": {"0": "1"}, "extra": 1}]}, "brackets"),
    ],
)
def test_strict_structure(patch, where):
    with pytest.raises(ParseError, match=where):
        parse(json.dumps({**FIX2D, **patch}))


def test_json_syntax_error_has_line():
    with pytest.raises(ParseError, match="line 2"):
        parse('{\n  "dim": ,\n}')


def test_empty_brackets_give_abelian_system():
    sf = parse(json.dumps({"dim": 3, "brackets": [], "lambda": "0", "d": [["0"] * 3] * 3}))
    assert sf.triple_system().is_abelian()


@pytest.mark.parametrize("name", FIXTURE_NAMES + ["broken", "fixture4d_paper"])
def test_fixture_roundtrip(name):
    sf = load_fixture(name)
    assert parse(emit(sf)) == sf


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def system_files(draw):
    n = draw(st.integers(1, 3))
    keys = draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * 3), max_size=5, unique=True))
    brackets = {k: {draw(st.integers(0, n - 1)): draw(rationals)} for k in keys}
    d = Matrix([[draw(rationals) for _ in range(n)] for _ in range(n)])
    rep = None
    if draw(st.booleans()):
        vd = draw(st.integers(1, 2))
        pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3, unique=True))
        theta = {p: Matrix([[draw(rationals) for _ in range(vd)] for _ in range(vd)]) for p in pairs}
        rep = RepresentationSpec(vd, theta, Matrix([[draw(rationals) for _ in range(vd)] for _ in range(vd)]))
    basis = draw(st.one_of(st.none(), st.just([f"e{i}" for i in range(n)])))
    maxdeg = draw(st.one_of(st.none(), st.integers(1, 9)))
    return SystemFile(n, brackets, draw(rationals), d, basis, rep, draw(st.booleans()), maxdeg)


@settings(max_examples=80, deadline=None)
@given(system_files())
def test_emit_parse_roundtrip(sf):
    assert parse(emit(sf)) == sf


def test_deformation_and_cocycle_files_roundtrip():
    s = load_fixture("fixture2d").system()
    D = apply_isomorphism(s, TruncatedDeformation.constant(s, 2), FormalIsomorphism((Matrix([[1, 2], [0, 1]]),)))
    D2 = parse_deformation(emit_deformation(D), s)
    assert D2.nu == D.nu and D2.dmaps == D.dmaps
    cf = CocycleFile(ExtensionCocycle(TensorCochain(3, 2, 2, {((0, 1, 1), 0): 1, ((1, 0, 1), 0): -1}), Matrix([[1, 0], [0, 0]])), Matrix([[0, 1], [1, 0]]))
    back = parse_cocycle(emit_cocycle(cf), 2, 2)
    assert back.cocycle == cf.cocycle and back.section_shift == cf.section_shift


# --------------------------------------------------------------------------
# command line


def test_cli_validate_pass(capsys):
    code, rep = run(capsys, "validate", fixture_path("fixture2d"))
    assert code == 0 and rep["status"] == "pass" and rep["command"] == "validate"


def test_cli_validate_broken(capsys):
    code, rep = run(capsys, "validate", fixture_path("broken"))
    assert code == 1 and rep["status"] == "fail"
    failure = rep["payload"]["lts"]["failures"][0]
    assert failure["identity"] == "skew_symmetry" and failure["witness"] == [0, 1, 1]


def test_cli_cohomology_matches_oracle(capsys):
    code, rep = run(capsys, "cohomology", fixture_path("fixture2d"), "--level", 3)
    s = load_fixture("fixture2d").system()
    o = PointwiseOracle(s, adjoint_rep(s.lts, s.mdo)).dims()
    p = rep["payload"]
    assert code == 0 and (p["dimZ"], p["dimB"], p["dimH"]) == (o["Z3"], o["B3"], o["H3"])
    assert len(p["representatives"]) == p["dimH"]


def test_cli_flags_before_or_after(capsys):
    main(["--text", "validate", str(fixture_path("fixture2d"))])
    before = capsys.readouterr().out
    main(["validate", str(fixture_path("fixture2d")), "--text"])
    assert capsys.readouterr().out == before
    assert before.startswith("command")


def test_cli_reports_are_deterministic(capsys):
    argv = ["validate", fixture_path("fixture4d"), "--seed", 11]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a == b and a["payload"]["sampled"]["consistent"]


def test_cli_parse_and_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**FIX2D, "lambda": "1/0"}))
    code, rep = run(capsys, "validate", bad)
    assert code == 2 and rep["payload"]["error"] == "parse"
    code, rep = run(capsys, "cohomology", fixture_path("fixture2d"))
    assert code == 2 and rep["payload"]["error"] == "usage"
    code, _ = run(capsys, "explode")
    assert code == 2


def test_cli_resource_limit(capsys):
    code, rep = run(capsys, "cohomology", fixture_path("fixture4d"), "--level", 9)
    assert code == 3 and rep["payload"]["error"] == "resource"


def test_cli_strict_space_closure_failure(capsys, monkeypatch):
    coh = importlib.import_module("mdlts.cohomology")

    def broken(cc, degree):
        raise ClosureError(f"closure violated: forced in the {cc.space} space")

    monkeypatch.setattr(coh, "_cohomology", broken)
    code, rep = run(capsys, "cohomology", fixture_path("fixture2d"), "--level", 3, "--strict-space")
    assert code == 1 and "closure violated" in rep["payload"]["diagnostic"]


def test_cli_invalid_system_for_cohomology(capsys):
    code, rep = run(capsys, "cohomology", fixture_path("fixture4d_paper"), "--level", 1)
    assert code == 1 and "invalid_input" in rep["payload"]


@pytest.mark.parametrize("cmd", ["semidirect", "dual"])
def test_cli_constructions(capsys, cmd):
    code, rep = run(capsys, cmd, fixture_path("lie_induced"))
    assert code == 0 and rep["status"] == "pass"


def test_cli_semidirect_output_is_a_valid_system(capsys, tmp_path):
    _, rep = run(capsys, "semidirect", fixture_path("fixture2d"))
    out = tmp_path / "sd.json"
    out.write_text(json.dumps(rep["payload"]["system"]))
    code, rep = run(capsys, "validate", out)
    assert code == 0


def test_cli_deform(capsys, tmp_path):
    s = load_fixture("fixture2d").system()
    x = cohomology(s.lts, s.mdo, adjoint_rep(s.lts, s.mdo), 3).representatives[0]
    good = tmp_path / "good.json"
    good.write_text(emit_deformation(TruncatedDeformation.from_base(s, [x.f], [x.g.to_matrix()])))
    code, rep = run(capsys, "deform", "verify", fixture_path("fixture2d"), good)
    assert code == 0 and rep["payload"]["infinitesimal_is_cocycle"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nu": [[{"args": [0, 1, 0], "out": {"1": "1"}}]], "d": [[["0", "0"], ["0", "0"]]]}))
    code, rep = run(capsys, "deform", "verify", fixture_path("fixture2d"), bad)
    assert code == 1 and rep["payload"]["per_order"][1]["failures"][0]["identity"] == "skew_symmetry"
    code, rep = run(capsys, "deform", "rigidity", fixture_path("fixture2d"))
    assert code == 0 and rep["payload"]["dimH3"] == 1 and not rep["payload"]["rigid_certified"]


def test_cli_extend(capsys, tmp_path):
    s = load_fixture("fixture2d_k1").system()
    r = adjoint_rep(s.lts, s.mdo)
    rep = cohomology(s.lts, s.mdo, r, 3)
    x = rep.representatives[0]
    xi = Matrix([[1, 2], [0, 1]])
    y = x + partial(s.lts, s.mdo, r, MDCochain(1, TensorCochain.from_matrix(xi)))
    paths = []
    for i, (z, shift) in enumerate([(x, None), (y, Matrix([[0, 1], [1, 1]])), (rep.representatives[1], None)]):
        p = tmp_path / f"c{i}.json"
        p.write_text(emit_cocycle(CocycleFile(ExtensionCocycle.from_mdcochain(z), shift)))
        paths.append(p)
    sysf = fixture_path("fixture2d_k1")
    code, out = run(capsys, "extend", "build", sysf, paths[0])
    assert code == 0 and out["payload"]["mdo"]["ok"]
    code, out = run(capsys, "extend", "equiv", sysf, paths[0], paths[1])
    assert code == 0 and out["payload"]["equivalent"] and out["payload"]["verification"]["ok"]
    code, out = run(capsys, "extend", "equiv", sysf, paths[0], paths[2])
    assert code == 1 and not out["payload"]["equivalent"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"varsigma": [], "varpi": [["0", "0"], ["1", "0"]]}))
    code, out = run(capsys, "extend", "build", sysf, bad)
    assert code == 1 and "not a 3-cocycle" in out["payload"]["diagnostic"]
