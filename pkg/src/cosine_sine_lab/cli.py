"""Command-line front end: fixtures in, canonical JSON reports out.

Exit codes: 0 success, 1 verification or classification failure (report still printed),
2 malformed input (message on standard error).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import jsonio
from .classifier import Tolerances, classify, verify_case
from .deviation import (
    cauchy_defect,
    central_defect,
    cosine_deviation,
    multiplicativity_defect,
    sine_deviation,
    sup_deviation,
)
from .errors import DegenerateGram, InconclusiveDependence, LabError, MalformedInput, UnboundedCauchyDefect
from .families import construct_case, params_from_json
from .funcspace.core import DEFAULT_SCHEDULE, GFunction, check_schedule
from .funcspace.descriptors import desc_from_json, desc_to_json
from .group_core import group_from_json, group_to_json, named_group
from .hyers import additive_part
from .oracle import (
    enumerate_multiplicative,
    exhaustive_deviation,
    random_table_triple,
    roundtrip,
)

ROUNDTRIP_PASS_RATE = 0.9
FINITE_TOL = 1e-12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input helpers


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def load_fixture(path: str):
    """Fixture {"group", "functions": {name: descriptor}, "meta"} -> (group, {name: GFunction}, meta)."""
    obj = _read_json(path)
    if not isinstance(obj, dict) or "functions" not in obj:
        raise MalformedInput(f"{path}: fixture needs 'group' and 'functions'")
    group = group_from_json(obj.get("group", {"kind": "lattice", "dim": 1}))
    funcs = obj["functions"]
    if not isinstance(funcs, dict):
        raise MalformedInput(f"{path}: 'functions' must be an object")
    out = {name: GFunction(group, desc_from_json(d)) for name, d in funcs.items()}
    return group, out, obj.get("meta", {})


def fixture_json(group, funcs: dict, meta=None) -> dict:
    return {
        "group": group_to_json(group),
        "functions": {name: desc_to_json(F.desc) for name, F in funcs.items()},
        "meta": meta or {},
    }


def _triple(funcs: dict, names=("f", "g", "h")):
    missing = [n for n in names if n not in funcs]
    if missing:
        raise MalformedInput(f"fixture lacks function(s) {', '.join(missing)}")
    return tuple(funcs[n] for n in names)


def parse_schedule(text: str) -> tuple:
    try:
        return check_schedule(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad schedule {text!r}: {exc}") from exc


def parse_seeds(text: str) -> list:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad seed list {text!r}") from exc


def _emit(obj, out_path: str | None = None):
    text = jsonio.dumps(obj)
    if out_path:
        Path(out_path).write_text(text + "\n")
    sys.stdout.write(text + "\n")


# ---------------------------------------------------------------- subcommands


def cmd_construct(args) -> int:
    obj = _read_json(args.params)
    if isinstance(obj, dict) and "case_id" not in obj:
        obj = {**obj, "case_id": args.case}
    params = params_from_json(obj)
    if params.case_id != args.case:
        raise MalformedInput(f"--case {args.case} disagrees with params case_id {params.case_id}")
    c = construct_case(params)
    _emit(c.to_json(), args.out)
    return 0


_KERNELS = {
    "cosine_sine": (("f", "g", "h"), sup_deviation),
    "sine": (("f", "g"), sine_deviation),
    "cosine": (("f", "g"), cosine_deviation),
    "cauchy": (("f",), cauchy_defect),
    "central": (("f",), central_defect),
    "multiplicative": (("g",), multiplicativity_defect),
}


def cmd_deviation(args) -> int:
    _, funcs, _ = load_fixture(args.funcs)
    names, fn = _KERNELS[args.kernel]
    report = fn(*_triple(funcs, names), schedule=args.schedule)
    out = report.to_json()
    out["verdict"] = report.verdict(args.tau).to_json()
    _emit(out)
    return 0


def cmd_classify(args) -> int:
    _, funcs, _ = load_fixture(args.funcs)
    tol = Tolerances(exact=args.tol_exact, tau=args.tau)
    report = classify(*_triple(funcs), schedule=args.schedule, tol=tol)
    _emit(report.to_json(), args.out)
    return 0 if report.classified else 1


def cmd_hyers(args) -> int:
    obj = _read_json(args.func_path)
    if isinstance(obj, dict) and "functions" in obj:
        _, funcs, _ = load_fixture(args.func_path)
        if args.name not in funcs:
            raise MalformedInput(f"fixture lacks function {args.name!r}")
        F = funcs[args.name]
    else:
        group = group_from_json(obj.get("group", {"kind": "lattice", "dim": 1})) if isinstance(obj, dict) else None
        F = GFunction(group, desc_from_json(obj.get("function") if isinstance(obj, dict) else obj))
    res = additive_part(F, depth=args.depth, tol=args.tol)
    _emit(res.to_json())
    return 0


def cmd_verify(args) -> int:
    obj = _read_json(args.params)
    if isinstance(obj, dict) and "case_id" not in obj:
        obj = {**obj, "case_id": args.case}
    params = params_from_json(obj)
    _, funcs, _ = load_fixture(args.funcs)
    report = verify_case(args.case, params, *_triple(funcs), schedule=args.schedule, tol=Tolerances(identity=args.tol))
    _emit(report.to_json())
    return 0 if report.classified else 1


def _roundtrip_job(job):
    case_id, seed, noise, schedule = job
    return roundtrip(case_id, seed, noise, schedule).to_json()


def cmd_oracle_roundtrip(args) -> int:
    jobs = [(args.case, s, args.noise, args.schedule) for s in parse_seeds(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_roundtrip_job, jobs))
    else:
        results = [_roundtrip_job(j) for j in jobs]
    for r in results:
        sys.stdout.write(jsonio.dumps(r) + "\n")
    passed = sum(r["passed"] for r in results)
    wrong = sum(r["wrong_case"] for r in results)
    return 0 if wrong == 0 and passed >= ROUNDTRIP_PASS_RATE * len(results) else 1


def cmd_oracle_finite(args) -> int:
    group = named_group(args.group)
    diffs = []
    for seed in range(args.trials):
        f, g, h = random_table_triple(group, seed)
        diffs.append(abs(exhaustive_deviation(group, f, g, h) - sup_deviation(f, g, h).sup))
    maps = enumerate_multiplicative(group) if group.order <= 12 else None
    worst_defect = 0.0
    if maps is not None:
        for t in maps:
            worst_defect = max(worst_defect, multiplicativity_defect(GFunction(group, t)).sup)
    max_diff = max(diffs) if diffs else 0.0
    ok = max_diff <= FINITE_TOL and worst_defect <= FINITE_TOL
    _emit(
        {
            "group": args.group,
            "trials": args.trials,
            "max_abs_diff": max_diff,
            "multiplicative_maps": None if maps is None else len(maps),
            "max_multiplicativity_defect": worst_defect,
            "passed": ok,
        }
    )
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cosine-sine-lab", description="Stability analysis of f(xy) = f(x)g(y) + g(x)f(y) + h(x)h(y) on Z^d and finite groups.")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for oracle runs (default 1)")
    sub = p.add_subparsers(dest="command", required=True)
    default_schedule = ",".join(map(str, DEFAULT_SCHEDULE))

    def schedule_arg(sp):
        sp.add_argument("--schedule", type=parse_schedule, default=parse_schedule(default_schedule))

    sp = sub.add_parser("construct", help="build (f, g, h) for a case from parameters")
    sp.add_argument("--case", type=int, required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--out")
    sp.set_defaults(handler=cmd_construct)

    sp = sub.add_parser("deviation", help="sup of a deviation kernel over window pairs")
    sp.add_argument("--funcs", required=True)
    sp.add_argument("--kernel", choices=sorted(_KERNELS), default="cosine_sine")
    sp.add_argument("--tau", type=float, default=0.05)
    schedule_arg(sp)
    sp.set_defaults(handler=cmd_deviation)

    sp = sub.add_parser("classify", help="decide the case of a triple")
    sp.add_argument("--funcs", required=True)
    sp.add_argument("--tol-exact", type=float, default=1e-9)
    sp.add_argument("--tau", type=float, default=0.05)
    sp.add_argument("--out")
    schedule_arg(sp)
    sp.set_defaults(handler=cmd_classify)

    sp = sub.add_parser("hyers", help="dyadic additive part of a function")
    sp.add_argument("--func", dest="func_path", required=True)
    sp.add_argument("--name", default="f")
    sp.add_argument("--depth", type=int, default=40)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(handler=cmd_hyers)

    sp = sub.add_parser("verify", help="check the identities of a case for given parameters")
    sp.add_argument("--case", type=int, required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--funcs", required=True)
    sp.add_argument("--tol", type=float, default=1e-6)
    schedule_arg(sp)
    sp.set_defaults(handler=cmd_verify)

    sp = sub.add_parser("oracle", help="brute-force cross-checks")
    osub = sp.add_subparsers(dest="oracle_command", required=True)
    rp = osub.add_parser("roundtrip", help="construct, perturb and classify seeded draws")
    rp.add_argument("--case", type=int, required=True)
    rp.add_argument("--seeds", default="1..50")
    rp.add_argument("--noise", type=float, default=0.01)
    schedule_arg(rp)
    rp.set_defaults(handler=cmd_oracle_roundtrip)
    fp = osub.add_parser("finite", help="exhaustive deviation and multiplicative maps on a small group")
    fp.add_argument("--group", required=True)
    fp.add_argument("--trials", type=int, default=100)
    fp.set_defaults(handler=cmd_oracle_finite)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (UnboundedCauchyDefect, InconclusiveDependence, DegenerateGram) as exc:
        # a well-formed input that fails a check: report it and exit 1
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return 1
    except (UsageError, LabError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(run(argv))
