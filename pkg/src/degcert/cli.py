"""Command-line interface.

Exit codes are a contract: 0 success, 1 usage error, 2 predicate false
(a degree that does not qualify, or a failed verification), 3 capacity
exceeded.  All JSON output is key-sorted and schema-versioned; CSV output
is meant for trajectory plotting elsewhere.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import arith, certify, density, dickman
from .errors import CapacityError, DecompositionError, ParameterError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PREDICATE_FALSE = 2
EXIT_CAPACITY = 3

SCHEMA_VERSION = certify.SCHEMA_VERSION


class _UsageExit(Exception):
    pass


def _version() -> str:
    from . import __version__

    return __version__


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 by default; the contract reserves 2 for
    # predicate-false, so usage problems are rerouted to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageExit(message)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"not a rational number: {text!r}") from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(float(tok)) if ("e" in tok or "E" in tok) else int(tok)
                for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ParameterError(f"not a comma-separated integer list: {text!r}") from None


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _mode(text: str) -> certify.Mode:
    return certify.Mode.FULL if text == "full" else certify.Mode.WEAK


def cmd_certify(args) -> int:
    try:
        cert = certify.build_certificate(args.n, args.d, _mode(args.mode))
    except DecompositionError as exc:
        if args.format == "json":
            _emit_json(
                {
                    "schema_version": SCHEMA_VERSION,
                    "command": "certify",
                    "n": args.n,
                    "d": args.d,
                    "mode": args.mode.upper(),
                    "qualifies": False,
                    "reason": str(exc),
                }
            )
        else:
            print(f"degree {args.d} does not qualify: {exc}")
        return EXIT_PREDICATE_FALSE
    report = certify.verify_certificate(cert)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(certify.certificate_to_json(cert))
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "certify",
                "certificate": certify.certificate_to_dict(cert),
                "verification": certify.report_to_dict(report),
            }
        )
    else:
        print(f"d = {cert.d}, n = {cert.n}, mode = {cert.mode.value}")
        for e in cert.entries:
            print(f"  q = {e.q}: i = {e.i}, j = {e.j}, k = {e.k}")
        status = "PASS" if report.passed else "FAIL"
        print(f"verification: {status} ({len(report.checks)} checks)")
        if not report.passed:
            for c in report.failures():
                print(f"  FAIL {c.name} [{c.context}]: {c.detail}")
        print(f"note: {certify.VerificationReport.CONDITIONAL_NOTE}")
    return EXIT_OK if report.passed else EXIT_PREDICATE_FALSE


def cmd_check(args) -> int:
    with open(args.cert) as fh:
        cert = certify.certificate_from_json(fh.read())
    report = certify.verify_certificate(cert)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "check",
                "verification": certify.report_to_dict(report),
            }
        )
    else:
        status = "PASS" if report.passed else "FAIL"
        print(f"certificate for d = {cert.d} (n = {cert.n}, {cert.mode.value}): {status}")
        for c in report.failures():
            print(f"  FAIL {c.name} [{c.context}]: {c.detail}")
    return EXIT_OK if report.passed else EXIT_PREDICATE_FALSE


def cmd_enumerate(args) -> int:
    ds = certify.enumerate_qualifying(args.n, args.d_max, _mode(args.mode), threads=args.threads)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "enumerate",
                "n": args.n,
                "mode": args.mode.upper(),
                "d_max": args.d_max,
                "count": len(ds),
                "degrees": ds,
            }
        )
    elif args.format == "csv":
        print("d")
        for d in ds:
            print(d)
    else:
        print(f"{len(ds)} qualifying degrees <= {args.d_max}")
        for d in ds:
            print(d)
    return EXIT_OK


def cmd_smallest(args) -> int:
    d = certify.smallest_qualifying(args.n, _mode(args.mode), threads=args.threads, budget=args.budget)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "smallest",
                "n": args.n,
                "mode": args.mode.upper(),
                "d": d,
            }
        )
    else:
        print(d)
    return EXIT_OK


def cmd_dickman(args) -> int:
    if args.table:
        table = dickman.rho_table(args.u_max, args.step, args.tol)
        if args.format == "csv":
            out = open(args.out, "w", newline="") if args.out else sys.stdout
            try:
                table.write_csv(out)
            finally:
                if args.out:
                    out.close()
        elif args.format == "json":
            _emit_json(
                {
                    "schema_version": SCHEMA_VERSION,
                    "command": "dickman",
                    "u_max": table.u_max,
                    "step": table.step,
                    "abs_error_bound": table.abs_error_bound,
                    "values": [float(v) for v in table.values],
                }
            )
        else:
            for idx, v in enumerate(table.values):
                print(f"{idx * table.step:.6f} {v!r}")
        return EXIT_OK
    if args.u is None:
        raise ParameterError("dickman needs --u or --table")
    value = dickman.rho(args.u, args.tol)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "dickman",
                "u": args.u,
                "tol": args.tol,
                "rho": value,
            }
        )
    else:
        print(repr(value))
    return EXIT_OK


_DENSITY_MODES = {
    "prop16-full": density.DensityMode.PROP16_FULL,
    "prop16-weak": density.DensityMode.PROP16_WEAK,
    "lambda-primepower": density.DensityMode.LAMBDA_PRIMEPOWER,
    "lambda-prime": density.DensityMode.LAMBDA_PRIME,
}


def cmd_density(args) -> int:
    mode = _DENSITY_MODES[args.mode]
    lam = _parse_fraction(args.lam) if args.lam else None
    lam_pow = _parse_fraction(args.lam_pow) if args.lam_pow else None
    cps = _parse_int_list(args.checkpoints) if args.checkpoints else None
    report = density.empirical_density(
        args.n, args.N, mode, lam=lam, lam_pow=lam_pow, checkpoints=cps, threads=args.threads
    )
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "density",
                "n": report.n,
                "N": report.N,
                "mode": report.mode.value,
                "lambda": str(report.lam) if report.lam is not None else None,
                "lambda_pow": str(report.lam_pow) if report.lam_pow is not None else None,
                "count": report.count,
                "empirical": report.empirical,
                "theoretical": report.theoretical,
                "theoretical_is_heuristic": report.theoretical_is_heuristic,
                "samples": [[m, c] for m, c in report.samples] if report.samples else None,
            }
        )
    elif args.format == "csv":
        print("m,count,empirical,theoretical")
        rows = report.samples or ((report.N, report.count),)
        for m, c in rows:
            print(f"{m},{c},{c / m!r},{report.theoretical!r}")
    else:
        print(f"count = {report.count} of N = {report.N}")
        print(f"empirical = {report.empirical!r}")
        tag = " (heuristic target)" if report.theoretical_is_heuristic else ""
        print(f"theoretical = {report.theoretical!r}{tag}")
        if report.samples:
            for m, c in report.samples:
                print(f"  m = {m}: count = {c}, empirical = {c / m!r}")
    return EXIT_OK


def cmd_ihc(args) -> int:
    report = density.ihc_fraction(args.n, args.N, args.range_lo, threads=args.threads)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "ihc",
                "n": report.n,
                "N": report.N,
                "range_lo": report.range_lo,
                "count": report.count,
                "fraction": report.fraction,
            }
        )
    else:
        print(f"count = {report.count} in [{report.range_lo}, {report.N}]")
        print(f"fraction = {report.fraction!r}")
    return EXIT_OK


def cmd_diagnostics(args) -> int:
    lam = _parse_fraction(args.lam) if args.lam else None
    rows = density.convergence_diagnostics(
        args.n, _parse_int_list(args.checkpoints), lam=lam, threads=args.threads
    )
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "diagnostics",
                "n": args.n,
                "rows": [
                    {
                        "m": r.m,
                        "prime_power_ratio": r.prime_power_ratio,
                        "mertens": r.mertens,
                        "tail_small": r.tail_small,
                        "tail_large": r.tail_large,
                        "ratio_bound": r.ratio_bound,
                    }
                    for r in rows
                ],
            }
        )
    elif args.format == "csv":
        print("m,prime_power_ratio,mertens,tail_small,tail_large,ratio_bound")
        for r in rows:
            print(
                f"{r.m},{r.prime_power_ratio!r},{r.mertens!r},"
                f"{r.tail_small!r},{r.tail_large!r},{r.ratio_bound!r}"
            )
    else:
        for r in rows:
            extra = ""
            if r.ratio_bound is not None:
                extra = f"  exp>=2 bound = {r.ratio_bound!r}"
            print(f"m = {r.m}: Pi(m)/m = {r.prime_power_ratio!r}, mertens = {r.mertens!r}{extra}")
    return EXIT_OK


def cmd_verify_q_example(args) -> int:
    qs = _parse_int_list(args.qs) if args.qs else [p for p, _ in arith.factorize(args.d).factors]
    report = certify.verify_rational_example(args.d, qs)
    if args.format == "json":
        _emit_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "verify-q-example",
                "d": report.d,
                "passed": report.passed,
                "covers_prime_divisors": report.covers_prime_divisors,
                "checks": [
                    {
                        "q": c.q,
                        "k": c.k,
                        "q_is_prime": c.q_is_prime,
                        "q_mod_6_is_1": c.q_mod_6_is_1,
                        "cube_not_above_d": c.cube_not_above_d,
                        "difference_divisible_by_6": c.difference_divisible_by_6,
                        "q_divides_k": c.q_divides_k,
                        "k_ge_38": c.k_ge_38,
                        "near_miss_k": c.near_miss_k,
                        "passed": c.passed,
                    }
                    for c in report.checks
                ],
            }
        )
    else:
        print(f"d = {report.d}: {'PASS' if report.passed else 'FAIL'}")
        if not report.covers_prime_divisors:
            print("  FAIL: qs do not cover the prime divisors of d")
        for c in report.checks:
            print(f"  q = {c.q}: k = {c.k}, passed = {c.passed}" + (" (near-miss k)" if c.near_miss_k else ""))
    return EXIT_OK if report.passed else EXIT_PREDICATE_FALSE


def build_parser() -> _Parser:
    parser = _Parser(prog="degcert", description=__doc__)
    parser.add_argument("--version", action="version", version=f"degcert { _version() }")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=True, fmt=("text", "json")):
        p.add_argument("--format", choices=fmt, default="text")
        if threads:
            p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("certify", help="build and verify a certificate for one degree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mode", choices=("full", "weak"), default="full")
    p.add_argument("--out", help="write the canonical certificate JSON here")
    common(p, threads=False)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("check", help="verify a serialized certificate")
    p.add_argument("--cert", required=True)
    common(p, threads=False)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("enumerate", help="list qualifying degrees up to a bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d-max", dest="d_max", type=int, required=True)
    p.add_argument("--mode", choices=("full", "weak"), default="full")
    common(p, fmt=("text", "json", "csv"))
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("smallest", help="smallest qualifying degree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("full", "weak"), default="full")
    p.add_argument("--budget", type=int, default=None)
    common(p)
    p.set_defaults(fn=cmd_smallest)

    p = sub.add_parser("dickman", help="evaluate rho(u) or tabulate it")
    p.add_argument("--u", type=float)
    p.add_argument("--table", action="store_true")
    p.add_argument("--u-max", dest="u_max", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.125)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    common(p, threads=False, fmt=("text", "json", "csv"))
    p.set_defaults(fn=cmd_dickman)

    p = sub.add_parser("density", help="empirical qualifying-degree density")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mode", choices=tuple(_DENSITY_MODES), default="prop16-full")
    p.add_argument("--lam", help="lambda as a rational, e.g. 4/5")
    p.add_argument(
        "--lam-pow",
        dest="lam_pow",
        help="lambda**n as an exact rational, for irrational lambda such as (C(n,2)-1)**(-1/n)",
    )
    p.add_argument("--checkpoints", help="comma-separated m values")
    common(p, fmt=("text", "json", "csv"))
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("ihc", help="fraction of degrees with certified f_n(d) != 1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--range-lo", dest="range_lo", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_ihc)

    p = sub.add_parser("diagnostics", help="Pi(m)/m and mertens convergence checkpoints")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--lam", help="enable exponent>=2 tail bounds with this lambda")
    common(p, fmt=("text", "json", "csv"))
    p.set_defaults(fn=cmd_diagnostics)

    p = sub.add_parser("verify-q-example", help="check the d = q^3 + 6k example arithmetic")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--qs", help="comma-separated prime list; defaults to the prime divisors of d")
    common(p, threads=False)
    p.set_defaults(fn=cmd_verify_q_example)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version print and leave
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
