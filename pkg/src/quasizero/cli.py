"""Command-line front end.

Exit status: 0 success, 1 a verification failed, 2 usage or input error,
3 the computation gave up (budget, divergence, degenerate contour).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bound as bound_mod
from . import oracles, zeros
from .errors import (
    BudgetExceeded,
    ContourError,
    DivergenceError,
    QuasizeroError,
)
from .moments import MomentTable, default_budget, jacobi_moment_diagnostic, quasi_diagnostic
from .weights import MSequence, gevrey_weight, table_weight, weight_from_M

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GAVE_UP = 0, 1, 2, 3

COMMANDS = ("bound", "curve", "quasi-check", "verify-soundness", "lemma-check", "jacobi-check", "dm-bound")
LEMMAS = ("lemma1", "lavie", "nazarov", "bang", "stirling", "jensen")


class UsageError(Exception):
    pass


# -- serialization ---------------------------------------------------------------


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(v)


def csv_text(request: dict, header, rows) -> str:
    buf = io.StringIO()
    buf.write("# request: " + json.dumps(to_jsonable(request), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([csv_cell(v) for v in r])
    return buf.getvalue()


# -- input parsing -----------------------------------------------------------------


def _read_numbers(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{path}: expected JSON or whitespace-separated numbers") from None


def resolve_weight(args):
    """Build the weight named on the command line; returns ``(W, descriptor)``."""
    kind = args.weight
    if kind == "gevrey":
        if args.alpha is None or args.a is None:
            raise UsageError("--weight gevrey needs --alpha and --a")
        W = gevrey_weight(args.alpha, args.a)
    elif kind == "table":
        if not args.table_file:
            raise UsageError("--weight table needs --table-file")
        data = _read_numbers(args.table_file)
        if isinstance(data, dict):
            if "log_w" not in data:
                raise UsageError("table file object needs a 'log_w' list")
            W = table_weight(data["log_w"], data.get("tail", "infinite-weight"))
        else:
            W = table_weight(data)
    elif kind == "from-m":
        W = weight_from_M(_read_M(args), _need_horizon(args))
    else:
        raise UsageError(f"unknown weight {kind!r}")
    return W, W.descriptor()


def _need_horizon(args) -> int:
    if args.horizon is None:
        raise UsageError("--horizon is required here")
    return args.horizon


def _read_M(args) -> MSequence:
    if not args.m_file:
        raise UsageError("--m-file is required")
    data = _read_numbers(args.m_file)
    if isinstance(data, dict):
        if "log_M" in data:
            return MSequence(tuple(data["log_M"]))
        if "M" in data:
            vals = [float(v) for v in data["M"]]
            if any(v <= 0 for v in vals):
                raise UsageError("M entries must be positive")
            return MSequence(tuple(math.log(v) for v in vals))
        raise UsageError("M file object needs 'log_M' or 'M'")
    return MSequence(tuple(data))


def _complex_list(values):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(complex(float(v)))
    return out


# -- commands ------------------------------------------------------------------------


def cmd_bound(args, request):
    W, request["weight"] = resolve_weight(args)
    if args.A is None:
        raise UsageError("bound needs --A")
    T = MomentTable(W)
    res = bound_mod.zero_count_bound(T, args.A)
    bad = bound_mod.verify_certificate(res, T)
    payload = {"request": request, "result": res.to_dict(), "certificate_violations": bad}
    if bad:
        code = EXIT_FAIL
    elif res.failed_stage is not None and res.trivial_cap is None:
        code = EXIT_GAVE_UP
    else:
        code = EXIT_OK
    return payload, None, code


def cmd_curve(args, request):
    W, request["weight"] = resolve_weight(args)
    if args.A_min is None or args.A_max is None:
        raise UsageError("curve needs --A-min and --A-max")
    request["A_steps"] = args.A_steps
    A_values = bound_mod.log_spaced(args.A_min, args.A_max, args.A_steps)
    curve = bound_mod.bound_curve(MomentTable(W), A_values)
    slope = curve.loglog_slope()
    failed = any(r.failed_stage is not None and r.trivial_cap is None for r in curve.rows)
    code = EXIT_GAVE_UP if failed else EXIT_OK
    if args.format == "csv":
        return None, (bound_mod.CSV_HEADER, list(curve.csv_rows())), code
    payload = {
        "request": request,
        "rows": [r.to_dict() for r in curve.rows],
        "loglog_slope": slope,
        "theory_exponent": curve.theory_exponent,
        "theory_form": curve.theory_form,
    }
    return payload, None, code


def cmd_quasi(args, request):
    W, request["weight"] = resolve_weight(args)
    horizon = args.horizon if args.horizon is not None else 1000
    request["horizon"] = horizon
    rep = quasi_diagnostic(MomentTable(W), horizon)
    return {"request": request, "result": rep.to_dict()}, None, EXIT_OK


def cmd_soundness(args, request):
    W, request["weight"] = resolve_weight(args)
    trials = args.trials if args.trials is not None else 200
    seed = args.seed if args.seed is not None else 0
    config = zeros.TrialConfig()
    request.update({"trials": trials, "seed": seed, "config": config.to_dict()})
    reports = zeros.run_soundness(W, MomentTable(W), config, seed, trials)
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    if args.format == "csv":
        rows = [zeros.soundness_csv_row(r) for r in reports]
        return None, (zeros.SOUNDNESS_CSV_HEADER, rows), code
    payload = {
        "request": request,
        "trials": [r.to_dict() for r in reports],
        "failures": sum(not r.passed for r in reports),
    }
    return payload, None, code


def _lemma(args, request):
    which = args.which
    if which is None:
        raise UsageError("lemma-check needs --which")
    seed = args.seed if args.seed is not None else 0
    request.update({"which": which, "seed": seed})
    if which in ("lemma1", "bang"):
        if args.weight is None:
            args.weight, args.alpha, args.a = "gevrey", 1.0, 1.0
        W, request["weight"] = resolve_weight(args)
        T = MomentTable(W)
        if which == "lemma1":
            rep = oracles.LemmaReport("lemma1")
            for f, eps in oracles.lemma1_fixtures(W):
                rep.merge(oracles.lemma1_check(f, eps, T))
            return rep
        count = args.trials if args.trials is not None else 20
        request["trials"] = count
        rep = oracles.LemmaReport("bang")
        nonvacuous = 0
        for f in oracles.bang_fixtures(W, seed, count):
            b = oracles.bang_sets(f, T, 8)
            rep.merge(oracles.bang_distance_check(b, T, [(4, 2), (6, 3), (8, 4)]))
            nonvacuous += sum(not v for v in b.vacuous.values())
        rep.details["nonvacuous_pairs"] = nonvacuous
        return rep
    if which == "lavie":
        count = args.trials if args.trials is not None else 100
        request["trials"] = count
        rep = oracles.LemmaReport("lavie")
        for coef, region in oracles.lavie_fixtures(seed, count):
            rep.merge(oracles.lavie_check(coef, region))
        return rep
    if which == "nazarov":
        N = args.N if args.N is not None else 25
        count = args.trials if args.trials is not None else 50
        request.update({"N": N, "trials": count})
        rep = oracles.gN_bound_check(N_max=N)
        rep.lemma = "nazarov"
        for i, coef in enumerate(oracles.nazarov_fixtures(seed, count)):
            rep.merge(oracles.nazarov_check(coef, seed=seed * 1000 + i))
        return rep
    if which == "stirling":
        return oracles.stirling_check()
    if which == "jensen":
        count = args.trials if args.trials is not None else 50
        request["trials"] = count
        rep = oracles.jensen_check(seed, count)
        return rep.merge(oracles.argument_principle_check(seed, count))
    raise UsageError(f"unknown lemma {which!r}")


def cmd_lemma(args, request):
    rep = _lemma(args, request)
    code = EXIT_OK if rep.passed else EXIT_FAIL
    return {"request": request, "result": rep.to_dict()}, None, code


def cmd_jacobi(args, request):
    if not args.jacobi_file:
        raise UsageError("jacobi-check needs --jacobi-file")
    data = _read_numbers(args.jacobi_file)
    if not isinstance(data, dict) or not all(k in data for k in "abc"):
        raise UsageError("jacobi file must be an object with lists 'a', 'b', 'c'")
    tail = data.get("tail")
    if tail is not None:
        tail = (float(tail["alpha"]), float(tail["rate"]))
    k_max = args.k_max if args.k_max is not None else 20
    request.update({"k_max": k_max, "tail": tail, "length": len(data["a"])})
    rep = jacobi_moment_diagnostic(
        _complex_list(data["a"]), _complex_list(data["b"]), _complex_list(data["c"]), k_max, tail
    )
    return {"request": request, "result": rep.to_dict()}, None, EXIT_OK


def cmd_dm(args, request):
    if args.A is None:
        raise UsageError("dm-bound needs --A")
    M = _read_M(args)
    horizon = _need_horizon(args)
    request.update({"horizon": horizon, "log_M": list(M.log_M)})
    res = bound_mod.dm_bound(M, args.A, horizon)
    code = EXIT_GAVE_UP if (res.failed_stage is not None and res.trivial_cap is None) else EXIT_OK
    return {"request": request, "result": res.to_dict()}, None, code


HANDLERS = {
    "bound": cmd_bound,
    "curve": cmd_curve,
    "quasi-check": cmd_quasi,
    "verify-soundness": cmd_soundness,
    "lemma-check": cmd_lemma,
    "jacobi-check": cmd_jacobi,
    "dm-bound": cmd_dm,
}


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quasizero",
        description="Zero-count bounds for weighted classes of analytic functions.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--weight", choices=("gevrey", "table", "from-m"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--table-file")
    p.add_argument("--m-file")
    p.add_argument("--A", type=float)
    p.add_argument("--A-min", type=float)
    p.add_argument("--A-max", type=float)
    p.add_argument("--A-steps", type=int, default=12)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--which", choices=LEMMAS)
    p.add_argument("--N", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--jacobi-file")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out")
    return p


def _default_format(command: str) -> str:
    return "csv" if command in ("curve", "verify-soundness") else "json"


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.format is None:
        args.format = _default_format(args.command)
    request = {"command": args.command, "format": args.format}
    try:
        request["budget"] = default_budget()
        if args.A is not None:
            request["A"] = args.A
        if args.A_min is not None:
            request.update({"A_min": args.A_min, "A_max": args.A_max})
        payload, table, code = HANDLERS[args.command](args, request)
    except UsageError as exc:
        print(f"quasizero: {exc}", file=stderr)
        return EXIT_USAGE
    except (BudgetExceeded, DivergenceError, ContourError) as exc:
        print(f"quasizero: computation gave up: {exc}", file=stderr)
        return EXIT_GAVE_UP
    except (QuasizeroError, ValueError, KeyError, TypeError) as exc:
        print(f"quasizero: invalid input: {exc}", file=stderr)
        return EXIT_USAGE
    if table is not None:
        text = csv_text(request, *table)
    else:
        text = dumps(payload)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"quasizero: cannot write {args.out}: {exc}", file=stderr)
            return EXIT_USAGE
    else:
        stdout.write(text)
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
