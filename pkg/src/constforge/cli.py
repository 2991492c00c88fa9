"""Command-line interface: eval, verify, decode, probe and scan.

Exit codes: 0 success, 1 verification or invariant failure, 2 usage or
parse error, 3 numeric non-convergence or precision budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from mpmath import mp

from . import cfrac, seqconst, specfun
from .identities import (
    ManifestError,
    ParseError,
    builtin_registry,
    closed_form_A,
    load_manifest,
    parse_expr,
    verify_all,
)
from .identities.evaluate import _closed_form_A, evaluate
from .numkern import (
    ConstforgeError,
    DomainError,
    NonConvergenceError,
    PrecisionError,
    agreed_digits,
    certify,
    make_context,
    to_decimal_string,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
DIGITS_ENV = "CONSTFORGE_DIGITS"
DEFAULT_DIGITS = 30
R_DISPLAY_DIGITS = 16


class UsageError(ConstforgeError):
    pass


_STR = {"type": "string"}
_INT = {"type": "integer"}
_NULLABLE_STR = {"type": ["string", "null"]}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["name", "requested_digits", "lhs", "rhs", "matched_digits", "pass",
                 "elapsed_ms", "methods"],
    "properties": {
        "name": _STR, "requested_digits": _INT, "lhs": _STR, "rhs": _STR,
        "matched_digits": _INT, "pass": {"type": "boolean"},
        "elapsed_ms": {"type": "number", "minimum": 0}, "methods": {"type": "object"},
        "reason": _NULLABLE_STR,
    },
}

SCHEMAS = {
    "verify": {
        "type": "object",
        "required": ["reports", "summary"],
        "properties": {
            "reports": {"type": "array", "items": REPORT_SCHEMA},
            "summary": {
                "type": "object",
                "required": ["pass", "fail"],
                "properties": {"pass": _INT, "fail": _INT},
            },
        },
    },
    "eval": {
        "type": "object",
        "required": ["command", "target", "digits", "value", "certified_digits"],
        "properties": {"command": {"const": "eval"}, "target": _STR, "digits": _INT,
                       "value": _STR, "certified_digits": _INT},
    },
    "decode": {
        "type": "object",
        "required": ["command", "source", "digits", "start_index", "steps", "failure"],
        "properties": {
            "command": {"const": "decode"}, "source": _STR, "digits": _INT,
            "start_index": {"type": ["integer", "null"]},
            "steps": {"type": "array", "items": {
                "type": "object", "required": ["n", "s", "r", "n_r"],
                "properties": {"n": _INT, "s": _INT, "r": _STR, "n_r": _STR}}},
            "failure": {"type": ["object", "null"], "required": ["index", "reason"],
                        "properties": {"index": _INT, "reason": _STR}},
        },
    },
    "probe": {
        "type": "object",
        "required": ["command", "mode", "source"],
        "properties": {
            "command": {"const": "probe"}, "mode": {"enum": ["truncation", "rational"]},
            "source": _STR, "digits_given": _INT, "failure_depth": _INT,
            "predicted_depth": _INT, "within_tolerance": {"type": "boolean"},
            "p": _STR, "q": _STR, "decoded": {"type": "array", "items": _INT},
            "failure": {"type": ["object", "null"]}, "integral": {"type": "boolean"},
            "min_r": _NULLABLE_STR, "inverse_q": _STR,
            "below_inverse_q": {"type": "boolean"},
        },
    },
    "scan": {
        "type": "object",
        "required": ["command", "digits", "rows"],
        "properties": {
            "command": {"const": "scan"}, "digits": _INT,
            "rows": {"type": "array", "items": {
                "type": "object",
                "required": ["alpha", "beta", "A_series", "A_closed", "matched_digits"],
                "properties": {"alpha": _INT, "beta": _INT, "A_series": _STR,
                               "A_closed": _STR, "matched_digits": _INT}}},
        },
    },
}


# -- argument helpers -------------------------------------------------------

def _default_digits() -> int:
    raw = os.environ.get(DIGITS_ENV)
    if raw is None:
        return DEFAULT_DIGITS
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{DIGITS_ENV} must be an integer, got {raw!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _range(text: str):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    try:
        low = int(lo)
        high = hi.strip() if hi.strip() == "alpha" else int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer bounds, got {text!r}") from None
    return low, high


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=None,
                        help=f"significant digits (default ${DIGITS_ENV} or {DEFAULT_DIGITS})")
    common.add_argument("--guard", type=int, default=10, help="guard digits")
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--deterministic", action="store_true",
                        help="zero timing fields so reports are byte-identical")

    parser = argparse.ArgumentParser(prog="constforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate one quantity")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--A", nargs=2, type=int, metavar=("ALPHA", "BETA"))
    what.add_argument("--cf", type=_rational, metavar="X")
    what.add_argument("--series", type=_rational, metavar="X")
    what.add_argument("--closed-A", nargs=2, type=int, metavar=("ALPHA", "BETA"))
    what.add_argument("--expr", metavar="TEXT")

    p = sub.add_parser("verify", parents=[common], help="verify identities")
    p.add_argument("manifest", nargs="?")
    p.add_argument("--builtin", action="store_true")
    p.add_argument("--slack", type=int, default=2)

    p = sub.add_parser("decode", parents=[common], help="decode a constant")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--A", nargs=2, type=int, metavar=("ALPHA", "BETA"))
    src.add_argument("--primes", action="store_true")
    src.add_argument("--value", metavar="DECIMAL")
    p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("probe", parents=[common], help="truncation / exact-rational probes")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--truncation", type=int, metavar="D")
    mode.add_argument("--rational", nargs=2, type=int, metavar=("P", "Q"))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--A", nargs=2, type=int, metavar=("ALPHA", "BETA"))
    src.add_argument("--primes", action="store_true")
    p.add_argument("--steps", type=int, default=10_000, help="rational probe step cap")

    p = sub.add_parser("scan", parents=[common], help="series vs closed form over a grid")
    p.add_argument("--alpha-range", type=_range, required=True, metavar="A..B")
    p.add_argument("--beta-range", type=_range, required=True, metavar="C..D",
                   help="upper bound may be 'alpha'")
    return parser


# -- output -----------------------------------------------------------------

def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _emit(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sequence(args) -> seqconst.SequenceSource:
    if getattr(args, "primes", False):
        return seqconst.primes()
    alpha, beta = args.A
    return seqconst.linear(alpha, beta)


# -- commands ---------------------------------------------------------------

def cmd_eval(args, ctx):
    if args.A:
        alpha, beta = args.A
        target = f"A({alpha},{beta})"
        enc = seqconst.encode(seqconst.linear(alpha, beta), ctx)
        value, certified = enc.value, enc.certified_digits
    elif args.cf is not None:
        target = f"cf({args.cf})"
        res = cfrac.cf_eval_lentz(cfrac.ramanujan_cf(args.cf), ctx)
        if res.certified_digits < ctx.digits:
            raise NonConvergenceError(f"only {res.certified_digits} digits certified")
        value, certified = res.value, res.certified_digits
    elif args.series is not None:
        target = f"series({args.series})"
        res = specfun.series_double_factorial(args.series, ctx)
        value, certified = res.value, res.certified_digits
    elif args.closed_A:
        alpha, beta = args.closed_A
        target = f"closed_A({alpha},{beta})"
        value, certified = certify(lambda _w: _closed_form_A(alpha, beta), ctx)
    else:
        target = args.expr
        tree = parse_expr(args.expr)
        value, certified = certify(lambda _w: evaluate(tree), ctx)
    rendered = to_decimal_string(value, ctx.digits)
    fmt = args.format or "text"
    if fmt == "json":
        out = _json({"command": "eval", "target": target, "digits": ctx.digits,
                     "value": rendered, "certified_digits": certified})
    elif fmt == "csv":
        out = _csv(["target", "digits", "value", "certified_digits"],
                   [[target, ctx.digits, rendered, certified]])
    else:
        out = f"{rendered}\ncertified_digits: {certified}\n"
    _emit(args, out)
    return EXIT_OK


def cmd_verify(args, ctx):
    if args.builtin == bool(args.manifest):
        raise UsageError("give exactly one of a manifest path or --builtin")
    identities = builtin_registry() if args.builtin else load_manifest(args.manifest)
    reports = verify_all(identities, ctx.digits, args.slack)
    passed = sum(r.passed for r in reports)
    failed = len(reports) - passed
    fmt = args.format or "text"
    if fmt == "json":
        out = _json({"reports": [r.to_json(args.deterministic) for r in reports],
                     "summary": {"pass": passed, "fail": failed}})
    elif fmt == "csv":
        out = _csv(["name", "requested_digits", "matched_digits", "pass", "lhs", "rhs",
                    "reason"],
                   [[r.name, r.requested_digits, r.matched_digits, r.passed, r.lhs_value,
                     r.rhs_value, r.reason or ""] for r in reports])
    else:
        lines = []
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            detail = r.reason or f"{r.matched_digits}/{r.requested_digits} digits"
            lines.append(f"{status} {r.name}: {detail}  lhs={r.lhs_value}")
        lines.append(f"summary: {passed} pass, {failed} fail")
        out = "\n".join(lines) + "\n"
    _emit(args, out)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _decode_rows(trace):
    shown = min(R_DISPLAY_DIGITS, mp.dps)
    rows = []
    for point in seqconst.remainder_profile(trace) if trace.steps else []:
        step = trace.steps[point.n - 1]
        rows.append({"n": point.n, "s": step.s,
                     "r": to_decimal_string(point.r, shown),
                     "n_r": to_decimal_string(point.n_r, shown)})
    return rows


def cmd_decode(args, ctx):
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.value is not None:
        source = "value"
        text = args.value.strip()
        given = len(text.lstrip("+-").split("e")[0].replace(".", "").lstrip("0"))
        dctx = make_context(max(8, min(ctx.digits, given)), ctx.guard)
        with mp.workdps(dctx.working):
            try:
                f1 = mp.mpf(text)
            except ValueError:
                raise UsageError(f"not a decimal number: {text!r}") from None
        n0 = None
        trace = seqconst.decode(f1, args.steps, dctx)
    else:
        seq = _sequence(args)
        source = seq.label
        n0, trace = seqconst.decode_sequence(seq, args.steps, ctx, check=False)
    with mp.workdps(ctx.working):
        rows = _decode_rows(trace)
    failure = None
    if trace.failure is not None:
        failure = {"index": trace.failure.index, "reason": trace.failure.reason}
    fmt = args.format or "text"
    if fmt == "json":
        out = _json({"command": "decode", "source": source, "digits": ctx.digits,
                     "start_index": n0, "steps": rows, "failure": failure})
    elif fmt == "csv":
        out = _csv(["n", "s_n", "r_n", "n_r_n"],
                   [[r["n"], r["s"], r["r"], r["n_r"]] for r in rows])
    else:
        lines = [f"# {source}, start index {n0}" if n0 else f"# {source}",
                 f"{'n':>5} {'s_n':>8} {'r_n':>20} {'n*r_n':>20}"]
        lines += [f"{r['n']:>5} {r['s']:>8} {r['r']:>20} {r['n_r']:>20}" for r in rows]
        if failure:
            lines.append(f"# failure at step {failure['index']}: {failure['reason']}")
        out = "\n".join(lines) + "\n"
    _emit(args, out)
    return EXIT_OK


def cmd_probe(args, ctx):
    seq = _sequence(args)
    if args.truncation is not None:
        res = seqconst.truncation_probe(seq, args.truncation, ctx)
        payload = {"command": "probe", "mode": "truncation", "source": seq.label,
                   "digits_given": args.truncation, "failure_depth": res.failure_depth,
                   "predicted_depth": res.predicted_depth,
                   "within_tolerance": res.within_tolerance,
                   "failure": {"index": res.failure.index, "reason": res.failure.reason}}
        status = EXIT_OK
        text = (f"truncation probe {seq.label}, D={args.truncation}: failure depth "
                f"{res.failure_depth}, predicted {res.predicted_depth} "
                f"({'within' if res.within_tolerance else 'outside'} +/-3)\n")
    else:
        p, q = args.rational
        res = seqconst.rational_probe(p, q, seq, args.steps)
        failure = None
        if res.trace.failure is not None:
            failure = {"index": res.trace.failure.index, "reason": res.trace.failure.reason}
        min_r = None if res.min_r is None else seqconst.format_value(res.min_r, 12)
        payload = {"command": "probe", "mode": "rational", "source": seq.label,
                   "p": str(p), "q": str(q), "decoded": res.trace.sequence,
                   "failure": failure, "integral": res.integral, "min_r": min_r,
                   "inverse_q": seqconst.format_value(Fraction(1, q), 12),
                   "below_inverse_q": res.below_inverse_q}
        status = EXIT_OK if res.integral else EXIT_FAIL
        where = (f"failure at step {failure['index']} ({failure['reason']})"
                 if failure else f"no failure within {args.steps} steps")
        text = (f"rational probe {p}/{q} vs {seq.label}: decoded "
                f"{', '.join(map(str, res.trace.sequence)) or 'nothing'}; {where}\n"
                f"q*f_n integral at every step: {res.integral}\n"
                f"min r_n = {min_r}, 1/q = {payload['inverse_q']}, "
                f"below 1/q: {res.below_inverse_q}\n")
    fmt = args.format or "text"
    if fmt == "json":
        out = _json(payload)
    elif fmt == "csv":
        keys = [k for k in payload if not isinstance(payload[k], (dict, list))]
        out = _csv(keys, [[payload[k] for k in keys]])
    else:
        out = text
    _emit(args, out)
    return status


def cmd_scan(args, ctx):
    a_lo, a_hi = args.alpha_range
    b_lo, b_hi = args.beta_range
    if a_hi == "alpha" or a_lo < 2 or a_hi < a_lo:
        raise UsageError(f"alpha range must satisfy 2 <= a <= b, got {a_lo}..{a_hi}")
    if b_lo < 1 or (b_hi != "alpha" and b_hi < b_lo):
        raise UsageError(f"beta range must satisfy 1 <= c <= d, got {b_lo}..{b_hi}")
    rows = []
    worst_ok = True
    for alpha in range(a_lo, a_hi + 1):
        top = alpha if b_hi == "alpha" else b_hi
        for beta in range(b_lo, top + 1):
            series = seqconst.encode(seqconst.linear(alpha, beta), ctx).value
            closed = closed_form_A(alpha, beta, ctx)
            matched = agreed_digits(series, closed, cap=ctx.digits)
            worst_ok &= matched >= ctx.digits - 2
            rows.append({"alpha": alpha, "beta": beta,
                         "A_series": to_decimal_string(series, ctx.digits),
                         "A_closed": to_decimal_string(closed, ctx.digits),
                         "matched_digits": matched})
    if not rows:
        raise UsageError("empty parameter grid")
    fmt = args.format or "csv"
    header = ["alpha", "beta", "A_series", "A_closed", "matched_digits"]
    if fmt == "json":
        out = _json({"command": "scan", "digits": ctx.digits, "rows": rows})
    elif fmt == "csv":
        out = _csv(header, [[r[k] for k in header] for r in rows])
    else:
        out = "\n".join(" ".join(str(r[k]) for k in header) for r in rows) + "\n"
    _emit(args, out)
    return EXIT_OK if worst_ok else EXIT_FAIL


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "decode": cmd_decode,
            "probe": cmd_probe, "scan": cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        digits = args.digits if args.digits is not None else _default_digits()
        ctx = make_context(digits, args.guard)
        return COMMANDS[args.command](args, ctx)
    except seqconst.PrecisionBudgetError as exc:
        print(f"error: {exc}; rerun with --digits {exc.required} or more", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, PrecisionError, DomainError, ParseError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - exit-code contract allows only 0-3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
