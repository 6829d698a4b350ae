"""Command-line front end.  Every command prints one JSON report.

Exit codes: 0 completed (verdict in the report), 1 self-test or certificate
failure, 2 malformed input, 3 violated precondition.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .exactalg import DEFAULT_PRIME, ExactAlgError, ExactMatrix, FieldSpec
from .hardinstances import VerificationFailed, build_Fd, verify_hard_instance
from .ncformula import FormulaSyntaxError, parse, rit, size, to_text
from .nullcone import degree_bounds, in_nullcone, ncrank_lower_bound, skewfield_invertible
from .pencil import DEFAULT_TRIALS, Pencil
from .quiver import is_semistable, kronecker_setup, pq_full_test, quiver_from_json, quiver_to_json
from .selftest import run_selftest
from .verify import CertificateError, verify_report

EXIT_OK, EXIT_FAIL, EXIT_FORMAT, EXIT_PRECONDITION = 0, 1, 2, 3


class InputError(Exception):
    pass


def _field(args) -> FieldSpec:
    if args.rationals:
        return FieldSpec.rationals()
    return FieldSpec(args.prime)


def _config(args, field: FieldSpec) -> dict:
    return {"field": field.to_json(), "seed": args.seed, "trials": args.trials, "dmax": args.dmax}


def _load_json(path: str | None):
    if path is None:
        raise InputError("--input is required")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(str(exc)) from None


def _load_pencil(args) -> Pencil:
    obj = _load_json(args.input)
    try:
        return Pencil.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ExactAlgError):
            raise
        raise InputError(f"bad pencil JSON: {exc}") from None


def cmd_nullcone(args) -> tuple[dict, int]:
    P = _load_pencil(args)
    v = in_nullcone(P, args.trials, args.seed, args.dmax)
    return {"input": {"pencil": P.to_json()}, "result": v.to_json(), "failure_probability_bound": v.failure_bound}, EXIT_OK


def cmd_invertible(args) -> tuple[dict, int]:
    P = _load_pencil(args)
    v = skewfield_invertible(P, args.trials, args.seed, args.dmax)
    return {"input": {"pencil": P.to_json()}, "result": v.to_json(), "failure_probability_bound": v.failure_bound}, EXIT_OK


def cmd_ncrank(args) -> tuple[dict, int]:
    P = _load_pencil(args)
    b = ncrank_lower_bound(P, args.dmax, args.trials, args.seed)
    return {
        "input": {"pencil": P.to_json()},
        "result": b.to_json(),
        "failure_probability_bound": None,
        "note": "best is a certified lower bound on the non-commutative rank",
    }, EXIT_OK


def cmd_rit(args) -> tuple[dict, int]:
    if args.formula is not None:
        text = args.formula
    elif args.input is not None:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise InputError(str(exc)) from None
    else:
        raise InputError("give --formula or --input")
    f = parse(text)
    field = _field(args)
    v = rit(f, args.trials, args.seed, field, args.dim)
    return {
        "input": {"formula": to_text(f), "size": size(f)},
        "result": v.to_json(),
        "failure_probability_bound": v.failure_bound,
    }, EXIT_OK


def cmd_hard_instance(args) -> tuple[dict, int]:
    field = _field(args)
    inst = build_Fd(args.d, field, args.lambdas)
    out = {
        "input": {"d": args.d, "lambdas": list(inst.lambdas)},
        "result": {
            "pencil": inst.pencil.to_json(),
            "canonical_tuple": [T.to_json() for T in inst.canonical_tuple],
        },
    }
    try:
        report = verify_hard_instance(inst, args.trials, args.seed)
    except VerificationFailed as exc:
        out["result"]["verification"] = {"failed_clause": exc.clause, "error": str(exc)}
        return out, EXIT_FAIL
    out["result"]["verification"] = report.to_json()
    out["result"]["conclusion"] = f"delta({report.n}) >= {report.delta_lower}"
    n = inst.size
    out["failure_probability_bound"] = None
    out["note"] = (
        f"clause (a) sampling is Monte Carlo; a substitution at k < {args.d} that was invertible "
        f"would have been reported as a failure (certificates (b) and the N_d kernels are exact); "
        f"pencil size {n}"
    )
    return out, EXIT_OK


def cmd_quiver(args) -> tuple[dict, int]:
    field = _field(args)
    obj = _load_json(args.input)
    if args.action == "pq":
        try:
            mats = [ExactMatrix.from_json(field, X) for X in obj["tuple"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad tuple JSON: {exc}") from None
        v = pq_full_test(mats, args.trials, args.seed)
        Q, dim, weight, rep = kronecker_setup(mats)
    else:
        try:
            Q, dim, weight, rep = quiver_from_json(obj, field)
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad quiver JSON: {exc}") from None
        v = is_semistable(Q, dim, weight, rep, field, args.trials, args.seed)
    return {
        "input": {"quiver": quiver_to_json(Q, dim, weight, rep)},
        "result": v.to_json(),
        "failure_probability_bound": v.failure_bound,
    }, EXIT_OK


def cmd_bounds(args) -> tuple[dict, int]:
    if args.n is None or args.m is None:
        raise InputError("--n and --m are required")
    return {"input": {"n": args.n, "m": args.m}, "result": degree_bounds(args.n, args.m).to_json()}, EXIT_OK


def cmd_selftest(args) -> tuple[dict, int]:
    summary = run_selftest(_field(args), args.seed, args.trials)
    return {"result": summary}, EXIT_OK if summary["passed"] else EXIT_FAIL


def cmd_verify(args) -> tuple[dict, int]:
    report = _load_json(args.verify or args.input)
    try:
        checked = verify_report(report)
    except CertificateError as exc:
        return {"result": {"ok": False, "error": str(exc)}}, EXIT_FAIL
    except (KeyError, TypeError) as exc:
        raise InputError(f"report is missing {exc}") from None
    return {"result": checked}, EXIT_OK


COMMANDS = {
    "nullcone": cmd_nullcone,
    "ncrank": cmd_ncrank,
    "invertible": cmd_invertible,
    "rit": cmd_rit,
    "hard-instance": cmd_hard_instance,
    "quiver": cmd_quiver,
    "bounds": cmd_bounds,
    "selftest": cmd_selftest,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field characteristic (default 2^61-1)")
    common.add_argument("--rationals", action="store_true", help="work over the rationals")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--dmax", type=int, default=None, help="largest blow-up size to try")
    common.add_argument("--input", default=None)
    common.add_argument("--output", default=None)
    common.add_argument("--verify", default=None, metavar="REPORT", help="re-verify the certificates in a report")
    common.add_argument("--timing", action="store_true", help="add wall time (makes reports non-reproducible)")

    parser = argparse.ArgumentParser(prog="ncinv", description=__doc__.splitlines()[0])
    parser.add_argument("--verify", default=None, metavar="REPORT", help="re-verify the certificates in a report")
    sub = parser.add_subparsers(dest="command")
    for name in ("nullcone", "ncrank", "invertible", "selftest", "verify"):
        sub.add_parser(name, parents=[common])
    p = sub.add_parser("rit", parents=[common])
    p.add_argument("--formula", default=None)
    p.add_argument("--dim", type=int, default=None, help="override the evaluation dimension")
    p = sub.add_parser("hard-instance", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambdas", type=int, nargs="+", default=None)
    p = sub.add_parser("quiver", parents=[common])
    p.add_argument("action", choices=["check", "pq"], nargs="?", default="check")
    p = sub.add_parser("bounds", parents=[common])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    if command is None:
        if args.verify is None:
            parser.print_help(sys.stderr)
            return EXIT_FORMAT
        args = parser.parse_args(["verify", "--verify", args.verify])
    if args.verify is not None:
        command = "verify"
    if args.trials < 1:
        print(json.dumps({"error": "--trials must be >= 1"}), file=sys.stderr)
        return EXIT_PRECONDITION

    start = time.perf_counter()
    try:
        body, code = COMMANDS[command](args)
    except (InputError, FormulaSyntaxError) as exc:
        print(json.dumps({"command": command, "error": str(exc)}), file=sys.stderr)
        return EXIT_FORMAT
    except (ExactAlgError, ValueError) as exc:
        print(json.dumps({"command": command, "error": str(exc), "kind": type(exc).__name__}), file=sys.stderr)
        return EXIT_PRECONDITION

    try:
        field = _field(args)
    except ExactAlgError:
        field = None
    report = {"command": command, "config": _config(args, field) if field else None, **body}
    if args.timing:
        report["wall_time_s"] = round(time.perf_counter() - start, 6)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
