"""JSON file formats.  Every rational is a string ``"p"`` or ``"p/q"``; floats are refused."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .cochain import Limits, TensorCochain
from .deformation import TruncatedDeformation
from .extension import ExtensionCocycle
from .linalg import Matrix
from .lts import MDLTS, ModifiedDifferential, Representation, TripleSystem

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ParseError(ValueError):
    """Malformed input; ``where`` is a key path or a line number."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def parse_rational(x: Any, where: str = "") -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ParseError(f"expected a rational string, got {x!r}", where)
    if isinstance(x, int):
        return Fraction(x)
    if not isinstance(x, str):
        raise ParseError(f"expected a rational string, got {type(x).__name__}", where)
    m = _RATIONAL.match(x)
    if not m:
        raise ParseError(f"not a rational: {x!r}", where)
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ParseError(f"zero denominator in {x!r}", where)
    return Fraction(int(m.group(1)), den)


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _keys(obj: Any, where: str, required: Sequence[str], optional: Sequence[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    extra = set(obj) - set(required) - set(optional)
    if extra:
        raise ParseError(f"unknown key(s) {sorted(extra)}", where)
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"missing key(s) {missing}", where)
    return obj


def _count(x: Any, where: str, lo: int = 0) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < lo:
        raise ParseError(f"expected an integer >= {lo}", where)
    return x


def _index(x: Any, n: int, where: str) -> int:
    if isinstance(x, str) and x.strip().lstrip("-").isdigit():
        x = int(x)
    if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < n:
        raise ParseError(f"index {x!r} out of range 0..{n - 1}", where)
    return x


def parse_matrix(obj: Any, rows: int, cols: int, where: str) -> Matrix:
    if not isinstance(obj, list) or len(obj) != rows:
        raise ParseError(f"expected {rows} rows", where)
    out = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"expected {cols} entries", f"{where}[{i}]")
        out.append([parse_rational(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return Matrix(out, cols)


def emit_matrix(m: Matrix) -> list:
    return [[rational_str(x) for x in m.row(i)] for i in range(m.rows)]


def parse_sparse_tensor(obj: Any, arity: int, dim: int, out_dim: int, where: str) -> dict:
    """List of ``{args, out}`` records to ``{args: {l: value}}``; repeated args are an error."""
    if not isinstance(obj, list):
        raise ParseError("expected a list", where)
    table: dict = {}
    for n, rec in enumerate(obj):
        w = f"{where}[{n}]"
        _keys(rec, w, ("args", "out"))
        args = rec["args"]
        if not isinstance(args, list) or len(args) != arity:
            raise ParseError(f"args must list {arity} indices", w + ".args")
        key = tuple(_index(a, dim, w + ".args") for a in args)
        if key in table:
            raise ParseError(f"duplicate entry for {list(key)}", w)
        out = rec["out"]
        if not isinstance(out, dict):
            raise ParseError("out must be an object", w + ".out")
        vec = {}
        for l, v in out.items():
            vec[_index(l, out_dim, w + ".out")] = parse_rational(v, f"{w}.out.{l}")
        table[key] = vec
    return table


def emit_sparse_tensor(table: Mapping) -> list:
    out = []
    for key in sorted(table):
        vec = {l: v for l, v in table[key].items() if v}
        if vec:
            out.append({"args": list(key), "out": {str(l): rational_str(v) for l, v in sorted(vec.items())}})
    return out


def cochain_table(f: TensorCochain) -> dict:
    table: dict = {}
    for (args, o), v in f.coords.items():
        table.setdefault(args, {})[o] = v
    return table


def _norm(table: Mapping) -> dict:
    return {k: {l: v for l, v in vec.items() if v} for k, vec in table.items() if any(vec.values())}


# --------------------------------------------------------------------------
# system file


@dataclass
class RepresentationSpec:
    vdim: int
    theta: dict  # {(i, j): Matrix}
    dV: Matrix

    def build(self, dim: int) -> Representation:
        zero = Matrix.zeros(self.vdim, self.vdim)
        grid = tuple(tuple(self.theta.get((i, j), zero) for j in range(dim)) for i in range(dim))
        return Representation(self.vdim, grid, self.dV)

    @classmethod
    def from_representation(cls, r: Representation) -> "RepresentationSpec":
        n = r.dim
        theta = {(i, j): r.theta[i][j] for i in range(n) for j in range(n) if not r.theta[i][j].is_zero()}
        return cls(r.vdim, theta, r.dV)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RepresentationSpec):
            return NotImplemented
        nz = lambda th: {k: m for k, m in th.items() if not m.is_zero()}
        return self.vdim == other.vdim and self.dV == other.dV and nz(self.theta) == nz(other.theta)


@dataclass
class SystemFile:
    dim: int
    brackets: dict
    lam: Fraction
    d: Matrix
    basis: list[str] | None = None
    representation: RepresentationSpec | None = None
    complete_skew: bool = False
    max_degree: int | None = None

    def triple_system(self) -> TripleSystem:
        try:
            return TripleSystem.from_brackets(self.dim, self.brackets, self.complete_skew)
        except ValueError as exc:
            raise ParseError(str(exc), "brackets") from exc

    def mdo(self) -> ModifiedDifferential:
        return ModifiedDifferential(self.d, self.lam)

    def system(self) -> MDLTS:
        return MDLTS(self.triple_system(), self.mdo())

    def rep(self) -> Representation | None:
        return None if self.representation is None else self.representation.build(self.dim)

    def limits(self) -> Limits:
        return Limits() if self.max_degree is None else Limits(max_degree=self.max_degree)

    @classmethod
    def from_system(cls, s: MDLTS, r: Representation | None = None, basis: list[str] | None = None) -> "SystemFile":
        return cls(
            s.dim,
            {k: dict(v) for k, v in s.lts.table.items()},
            s.lam,
            s.d,
            basis,
            None if r is None else RepresentationSpec.from_representation(r),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemFile):
            return NotImplemented
        return (
            self.dim == other.dim
            and _norm(self.brackets) == _norm(other.brackets)
            and self.lam == other.lam
            and self.d == other.d
            and self.basis == other.basis
            and self.representation == other.representation
            and self.complete_skew == other.complete_skew
            and self.max_degree == other.max_degree
        )


def _load_json(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("file is not UTF-8") from exc
    try:
        return json.loads(data, parse_float=_no_float)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc


def _no_float(s: str):
    raise ParseError(f"floating point literal {s} is not allowed; quote it as a rational string")


def parse(data: bytes | str) -> SystemFile:
    return system_from_obj(_load_json(data))


def system_from_obj(obj: Any) -> SystemFile:
    _keys(obj, "", ("dim", "brackets", "lambda", "d"), ("basis", "representation", "options"))
    dim = _count(obj["dim"], "dim", 1)
    basis = obj.get("basis")
    if basis is not None:
        if not isinstance(basis, list) or len(basis) != dim or not all(isinstance(b, str) for b in basis):
            raise ParseError(f"basis must list {dim} names", "basis")
    brackets = parse_sparse_tensor(obj["brackets"], 3, dim, dim, "brackets")
    lam = parse_rational(obj["lambda"], "lambda")
    d = parse_matrix(obj["d"], dim, dim, "d")
    rspec = None
    if obj.get("representation") is not None:
        ro = _keys(obj["representation"], "representation", ("vdim", "theta", "dV"))
        vdim = _count(ro["vdim"], "representation.vdim", 1)
        if not isinstance(ro["theta"], list):
            raise ParseError("expected a list", "representation.theta")
        theta = {}
        for n, rec in enumerate(ro["theta"]):
            w = f"representation.theta[{n}]"
            _keys(rec, w, ("pair", "matrix"))
            pair = rec["pair"]
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError("pair must list 2 indices", w + ".pair")
            key = (_index(pair[0], dim, w + ".pair"), _index(pair[1], dim, w + ".pair"))
            if key in theta:
                raise ParseError(f"duplicate entry for {list(key)}", w)
            theta[key] = parse_matrix(rec["matrix"], vdim, vdim, w + ".matrix")
        rspec = RepresentationSpec(vdim, theta, parse_matrix(ro["dV"], vdim, vdim, "representation.dV"))
    opts = _keys(obj.get("options", {}), "options", (), ("complete_skew", "max_degree"))
    skew = opts.get("complete_skew", False)
    if not isinstance(skew, bool):
        raise ParseError("expected true or false", "options.complete_skew")
    maxdeg = opts.get("max_degree")
    if maxdeg is not None:
        maxdeg = _count(maxdeg, "options.max_degree", 1)
    return SystemFile(dim, brackets, lam, d, basis, rspec, skew, maxdeg)


def system_to_obj(sf: SystemFile) -> dict:
    obj: dict = {"dim": sf.dim}
    if sf.basis is not None:
        obj["basis"] = list(sf.basis)
    obj["brackets"] = emit_sparse_tensor(sf.brackets)
    obj["lambda"] = rational_str(sf.lam)
    obj["d"] = emit_matrix(sf.d)
    if sf.representation is not None:
        r = sf.representation
        obj["representation"] = {
            "vdim": r.vdim,
            "theta": [
                {"pair": list(k), "matrix": emit_matrix(m)} for k, m in sorted(r.theta.items()) if not m.is_zero()
            ],
            "dV": emit_matrix(r.dV),
        }
    opts = {}
    if sf.complete_skew:
        opts["complete_skew"] = True
    if sf.max_degree is not None:
        opts["max_degree"] = sf.max_degree
    if opts:
        obj["options"] = opts
    return obj


def emit(sf: SystemFile) -> str:
    return json.dumps(system_to_obj(sf), indent=2) + "\n"


def load(path: str | Path) -> SystemFile:
    return parse(Path(path).read_bytes())


# --------------------------------------------------------------------------
# deformation and cocycle files


def _skew_fill(table: dict, where: str) -> dict:
    out = dict(table)
    for (i, j, k), vec in table.items():
        partner = (j, i, k)
        neg = {l: -v for l, v in vec.items() if v}
        if partner in table:
            if {l: v for l, v in table[partner].items() if v} != neg:
                raise ParseError(f"entry {list(partner)} contradicts the skew image of {[i, j, k]}", where)
        elif i == j and neg:
            raise ParseError(f"entry {[i, j, k]} must vanish by skew-symmetry", where)
        else:
            out[partner] = neg
    return out


def _tensor(table: Mapping, degree: int, dim: int, vdim: int) -> TensorCochain:
    return TensorCochain(degree, dim, vdim, {(k, l): v for k, vec in table.items() for l, v in vec.items() if v})


def parse_deformation(data: bytes | str, base: MDLTS) -> TruncatedDeformation:
    """``{"nu": [...], "d": [...]}`` holding the coefficients of ``t^1 .. t^N``."""
    obj = _keys(_load_json(data), "", ("nu", "d"), ("order", "complete_skew"))
    n = base.dim
    nus, ds = obj["nu"], obj["d"]
    if not isinstance(nus, list) or not isinstance(ds, list) or len(nus) != len(ds) or not nus:
        raise ParseError("nu and d must be non-empty lists of equal length", "")
    order = obj.get("order", len(nus))
    if _count(order, "order", 1) != len(nus):
        raise ParseError(f"order {order} does not match {len(nus)} coefficient(s)", "order")
    skew = obj.get("complete_skew", False)
    if not isinstance(skew, bool):
        raise ParseError("expected true or false", "complete_skew")
    nu = []
    for i, rec in enumerate(nus):
        table = parse_sparse_tensor(rec, 3, n, n, f"nu[{i}]")
        if skew:
            table = _skew_fill(table, f"nu[{i}]")
        nu.append(_tensor(table, 3, n, n))
    dmaps = [parse_matrix(m, n, n, f"d[{i}]") for i, m in enumerate(ds)]
    try:
        return TruncatedDeformation.from_base(base, nu, dmaps)
    except ValueError as exc:
        raise ParseError(str(exc), "order") from exc


def emit_deformation(D: TruncatedDeformation) -> str:
    obj = {
        "order": D.order,
        "nu": [emit_sparse_tensor(cochain_table(f)) for f in D.nu[1:]],
        "d": [emit_matrix(m) for m in D.dmaps[1:]],
    }
    return json.dumps(obj, indent=2) + "\n"


@dataclass
class CocycleFile:
    cocycle: ExtensionCocycle
    section_shift: Matrix | None = None


def parse_cocycle(data: bytes | str, dim: int, vdim: int) -> CocycleFile:
    obj = _keys(_load_json(data), "", ("varsigma", "varpi"), ("section_shift", "complete_skew"))
    table = parse_sparse_tensor(obj["varsigma"], 3, dim, vdim, "varsigma")
    if obj.get("complete_skew", False):
        table = _skew_fill(table, "varsigma")
    varpi = parse_matrix(obj["varpi"], vdim, dim, "varpi")
    shift = obj.get("section_shift")
    shift = None if shift is None else parse_matrix(shift, vdim, dim, "section_shift")
    return CocycleFile(ExtensionCocycle(_tensor(table, 3, dim, vdim), varpi), shift)


def emit_cocycle(cf: CocycleFile) -> str:
    c = cf.cocycle
    obj: dict = {"varsigma": emit_sparse_tensor(cochain_table(c.varsigma)), "varpi": emit_matrix(c.varpi)}
    if cf.section_shift is not None:
        obj["section_shift"] = emit_matrix(cf.section_shift)
    return json.dumps(obj, indent=2) + "\n"


__all__ = [
    "CocycleFile",
    "ParseError",
    "RepresentationSpec",
    "SystemFile",
    "emit",
    "emit_cocycle",
    "emit_deformation",
    "emit_matrix",
    "emit_sparse_tensor",
    "load",
    "parse",
    "parse_cocycle",
    "parse_deformation",
    "parse_matrix",
    "parse_rational",
    "rational_str",
    "system_from_obj",
    "system_to_obj",
]
