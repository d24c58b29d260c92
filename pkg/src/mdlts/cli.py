"""Command-line front end.

Exit codes: 0 pass, 1 semantic failure, 2 parse or usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .cochain import PAPER, ClosureError, ResourceLimitError
from .cohomology import NotACocycleError, cohomology, is_cocycle
from .deformation import infinitesimal, rigidity_report, verify_deformation
from .extension import ExtensionError, are_equivalent, build_extension, extract, shift_section
from .io import (
    ParseError,
    SystemFile,
    cochain_table,
    emit_matrix,
    emit_sparse_tensor,
    load,
    parse_cocycle,
    parse_deformation,
    rational_str,
    system_to_obj,
)
from .lts import (
    Representation,
    ValidationReport,
    adjoint_rep,
    dual_rep,
    semidirect_product,
    shift_to_derivation,
    validate_lts,
    validate_mdo,
    validate_rep,
)
from .linalg import Matrix

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _report_dict(rep: ValidationReport) -> dict:
    out = rep.to_dict()
    return json.loads(json.dumps(out, default=_jsonable))


def _jsonable(x: Any):
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, Matrix):
        return emit_matrix(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _mdcochain_obj(x) -> dict:
    out = {"f": emit_sparse_tensor(cochain_table(x.f))}
    if x.g is not None:
        out["g"] = emit_sparse_tensor(cochain_table(x.g))
    return out


def _coefficients(sf: SystemFile) -> tuple[Representation, str]:
    r = sf.rep()
    if r is None:
        return adjoint_rep(sf.triple_system(), sf.mdo()), "adjoint"
    return r, "file"


def _sampled_checks(sf: SystemFile, seed: int, samples: int = 8) -> dict:
    """Random rational vectors: weighted Leibniz rule and its derivation form agree."""
    rng = random.Random(seed)
    t, m = sf.triple_system(), sf.mdo()
    n = t.dim
    shifted = shift_to_derivation(m)

    def vec():
        return [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]

    ok = True
    for _ in range(samples):
        a, b, c = vec(), vec(), vec()
        d = m.d
        lhs = d.apply(t.bracket(a, b, c))
        parts = [t.bracket(d.apply(a), b, c), t.bracket(a, d.apply(b), c), t.bracket(a, b, d.apply(c))]
        rhs = [sum(z) + m.lam * w for *z, w in zip(*parts, t.bracket(a, b, c))]
        lhs0 = shifted.apply(t.bracket(a, b, c))
        parts0 = [t.bracket(shifted.apply(a), b, c), t.bracket(a, shifted.apply(b), c), t.bracket(a, b, shifted.apply(c))]
        rhs0 = [sum(z) for z in zip(*parts0)]
        ok = ok and ((list(lhs) == rhs) == (list(lhs0) == rhs0))
    return {"seed": seed, "samples": samples, "consistent": ok}


def cmd_validate(args) -> tuple[str, dict]:
    sf = load(args.file)
    t, m = sf.triple_system(), sf.mdo()
    lts = validate_lts(t, exhaustive=args.exhaustive)
    payload: dict = {"lts": _report_dict(lts)}
    ok = lts.ok
    if lts.ok:
        mdo = validate_mdo(t, m, exhaustive=args.exhaustive)
        payload["mdo"] = _report_dict(mdo)
        ok = ok and mdo.ok
        r = sf.rep()
        if r is not None:
            rep = validate_rep(t, m, r, exhaustive=args.exhaustive)
            payload["representation"] = _report_dict(rep)
            ok = ok and rep.ok
    payload["lambda"] = rational_str(m.lam)
    if args.seed is not None:
        payload["sampled"] = _sampled_checks(sf, args.seed)
    return ("pass" if ok else "fail"), payload


def _require_valid(sf: SystemFile, r: Representation | None = None) -> dict | None:
    t, m = sf.triple_system(), sf.mdo()
    rep = validate_lts(t)
    if rep.ok:
        rep.merge(validate_mdo(t, m))
    if rep.ok and r is not None:
        rep.merge(validate_rep(t, m, r))
    return None if rep.ok else {"invalid_input": _report_dict(rep)}


def cmd_cohomology(args) -> tuple[str, dict]:
    sf = load(args.file)
    r, source = _coefficients(sf)
    bad = _require_valid(sf, r)
    if bad:
        return "fail", bad
    space = PAPER if args.strict_space else None
    try:
        rep = cohomology(sf.triple_system(), sf.mdo(), r, args.level, space, sf.limits())
    except ClosureError as exc:
        return "fail", {"diagnostic": str(exc)}
    payload = {
        "degree": rep.degree,
        "coefficients": source,
        "space": rep.space_used,
        "dimZ": rep.dimZ,
        "dimB": rep.dimB,
        "dimH": rep.dimH,
        "representatives": [_mdcochain_obj(x) for x in rep.representatives],
    }
    return "pass", payload


def cmd_semidirect(args) -> tuple[str, dict]:
    sf = load(args.file)
    r, source = _coefficients(sf)
    bad = _require_valid(sf, r)
    if bad:
        return "fail", bad
    s = semidirect_product(sf.triple_system(), sf.mdo(), r)
    lts = validate_lts(s.lts)
    mdo = validate_mdo(s.lts, s.mdo)
    payload = {
        "coefficients": source,
        "system": system_to_obj(SystemFile.from_system(s)),
        "lts": _report_dict(lts),
        "mdo": _report_dict(mdo),
    }
    return ("pass" if lts.ok and mdo.ok else "fail"), payload


def cmd_dual(args) -> tuple[str, dict]:
    sf = load(args.file)
    r, source = _coefficients(sf)
    bad = _require_valid(sf, r)
    if bad:
        return "fail", bad
    dual = dual_rep(r)
    rep = validate_rep(sf.triple_system(), sf.mdo(), dual)
    out = SystemFile.from_system(sf.system(), dual)
    payload = {
        "coefficients": source,
        "representation": system_to_obj(out)["representation"],
        "validation": _report_dict(rep),
    }
    return ("pass" if rep.ok else "fail"), payload


def cmd_deform_verify(args) -> tuple[str, dict]:
    sf = load(args.file)
    bad = _require_valid(sf)
    if bad:
        return "fail", bad
    base = sf.system()
    D = parse_deformation(Path(args.deformation).read_bytes(), base)
    report = verify_deformation(base, D, exhaustive=args.exhaustive)
    inf = infinitesimal(D)
    cyc = is_cocycle(base.lts, base.mdo, adjoint_rep(base.lts, base.mdo), inf)
    payload = {
        "order": D.order,
        "per_order": [_report_dict(r) for r in report.per_order],
        "infinitesimal_is_cocycle": cyc.ok,
    }
    return ("pass" if report.ok else "fail"), payload


def cmd_deform_rigidity(args) -> tuple[str, dict]:
    sf = load(args.file)
    bad = _require_valid(sf)
    if bad:
        return "fail", bad
    rr = rigidity_report(sf.system())
    payload = {
        "dimH3": rr.dimH3,
        "rigid_certified": rr.rigid_certified,
        "space": rr.space_used,
        "candidate": None if rr.candidate is None else _mdcochain_obj(rr.candidate),
        "note": rr.note,
    }
    return "pass", payload


def _extension(sf: SystemFile, r: Representation, path: str):
    cf = parse_cocycle(Path(path).read_bytes(), sf.dim, r.vdim)
    e = build_extension(sf.triple_system(), sf.mdo(), r, cf.cocycle)
    if cf.section_shift is not None:
        e = shift_section(e, cf.section_shift)
    return e


def cmd_extend_build(args) -> tuple[str, dict]:
    sf = load(args.file)
    r, source = _coefficients(sf)
    bad = _require_valid(sf, r)
    if bad:
        return "fail", bad
    try:
        e = _extension(sf, r, args.cocycle)
    except NotACocycleError as exc:
        return "fail", {"diagnostic": str(exc)}
    lts = validate_lts(e.total.lts)
    mdo = validate_mdo(e.total.lts, e.total.mdo)
    _, c = extract(e)
    payload = {
        "coefficients": source,
        "system": system_to_obj(SystemFile.from_system(e.total)),
        "section": emit_matrix(e.section),
        "lts": _report_dict(lts),
        "mdo": _report_dict(mdo),
        "extracted": {"varsigma": emit_sparse_tensor(cochain_table(c.varsigma)), "varpi": emit_matrix(c.varpi)},
    }
    return ("pass" if lts.ok and mdo.ok else "fail"), payload


def cmd_extend_equiv(args) -> tuple[str, dict]:
    sf = load(args.file)
    r, source = _coefficients(sf)
    bad = _require_valid(sf, r)
    if bad:
        return "fail", bad
    try:
        e1 = _extension(sf, r, args.ext1)
        e2 = _extension(sf, r, args.ext2)
    except NotACocycleError as exc:
        return "fail", {"diagnostic": str(exc)}
    res = are_equivalent(e1, e2)
    payload = {"coefficients": source, "equivalent": res.equivalent}
    if res.equivalent:
        payload["witness"] = emit_matrix(res.witness)
        payload["xi"] = emit_matrix(res.xi)
        payload["verification"] = _report_dict(res.verification)
    return ("pass" if res.equivalent else "fail"), payload


def build_parser() -> argparse.ArgumentParser:
    # flags may appear before or after the subcommand; SUPPRESS keeps a later parser from resetting them
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON report (default)")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text", help="aligned text report")
    common.add_argument("--strict-space", action="store_true", help="never fall back to the strengthened cochain space")
    common.add_argument("--seed", type=int, help="seed for sampled property checks")
    common.add_argument("--exhaustive", action="store_true", help="report every failing tuple, not just the first")

    p = _Parser(prog="mdlts", description="Modified differential Lie triple systems: validation, cohomology, deformations, extensions.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check every defining identity")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("cohomology", parents=[common], help="cocycles, coboundaries and cohomology")
    s.add_argument("file")
    s.add_argument("--level", type=int, required=True, help="odd cochain degree: 1, 3, 5, ...")
    s.set_defaults(func=cmd_cohomology)

    s = sub.add_parser("semidirect", parents=[common], help="semidirect product with the module")
    s.add_argument("file")
    s.set_defaults(func=cmd_semidirect)

    s = sub.add_parser("dual", parents=[common], help="dual module")
    s.add_argument("file")
    s.set_defaults(func=cmd_dual)

    dp = sub.add_parser("deform", parents=[common], help="formal deformations")
    dsub = dp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = dsub.add_parser("verify", parents=[common])
    s.add_argument("file")
    s.add_argument("deformation")
    s.set_defaults(func=cmd_deform_verify)
    s = dsub.add_parser("rigidity", parents=[common])
    s.add_argument("file")
    s.set_defaults(func=cmd_deform_rigidity)

    ep = sub.add_parser("extend", parents=[common], help="abelian extensions")
    esub = ep.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = esub.add_parser("build", parents=[common])
    s.add_argument("file")
    s.add_argument("cocycle")
    s.set_defaults(func=cmd_extend_build)
    s = esub.add_parser("equiv", parents=[common])
    s.add_argument("file")
    s.add_argument("ext1")
    s.add_argument("ext2")
    s.set_defaults(func=cmd_extend_equiv)
    return p


def _text(obj: Any, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            lines.extend(_text(v, f"{prefix}.{k}" if prefix else str(k)))
        return lines or [f"{prefix}: {{}}"]
    if isinstance(obj, list) and obj and any(isinstance(x, (dict, list)) for x in obj):
        lines = []
        for i, v in enumerate(obj):
            lines.extend(_text(v, f"{prefix}[{i}]"))
        return lines
    return [f"{prefix}: {json.dumps(obj)}"]


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        lines = _text(report)
        width = max(line.index(":") for line in lines)
        return "\n".join(f"{k:<{width}} {v}" for k, v in (line.split(":", 1) for line in lines))
    return json.dumps(report, indent=2)


# set after parsing; parser-level defaults would leak into the shared flag actions
_FLAG_DEFAULTS = {"fmt": None, "strict_space": False, "seed": None, "exhaustive": False}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "text" if "--text" in argv else "json"
    command = " ".join(a for a in argv[:2] if not a.startswith("-"))
    try:
        args = build_parser().parse_args(argv)
        for key, value in _FLAG_DEFAULTS.items():
            if not hasattr(args, key):
                setattr(args, key, value)
        command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
        fmt = args.fmt or "json"
        status, payload = args.func(args)
        code = EXIT_PASS if status == "pass" else EXIT_FAIL
    except UsageError as exc:
        status, payload, code = "error", {"error": "usage", "message": str(exc)}, EXIT_USAGE
    except (ParseError, OSError) as exc:
        status, payload, code = "error", {"error": "parse", "message": str(exc)}, EXIT_USAGE
    except ResourceLimitError as exc:
        status, payload, code = "error", {"error": "resource", "message": str(exc)}, EXIT_RESOURCE
    except (ExtensionError, ValueError) as exc:
        status, payload, code = "fail", {"diagnostic": str(exc)}, EXIT_FAIL
    print(render({"command": command, "status": status, "payload": payload}, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
