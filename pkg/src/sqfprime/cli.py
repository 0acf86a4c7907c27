"""Command-line front end.

Data goes to stdout (or ``--output``); progress and diagnostics go to stderr.
Exit status: 0 when every requested check passes, 1 when a check fails,
2 for usage errors, 3 for I/O or checkpoint problems.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from pathlib import Path

from . import analytic, crt, verify
from .primes import build_prime_table
from .squarefree import DEFAULT_SEGMENT_SIZE

log = logging.getLogger("sqfprime")

CHECKPOINT_ENV = "SQFP_CHECKPOINT_DIR"
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_TOKEN = re.compile(r"\s*(\d+|\*\*|[\^+\-*()])")


def parse_int(text: str) -> int:
    """Exact integer from forms like ``10^9``, ``59^8+1``, ``2*10**6`` or ``1_000``."""
    src = text.replace("_", "")
    tokens, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise argparse.ArgumentTypeError(f"cannot parse integer expression {text!r}")
        tokens.append("^" if m.group(1) == "**" else m.group(1))
        pos = m.end()
    tokens = [t for t in tokens if t.strip()]

    def expr(i):
        val, i = term(i)
        while i < len(tokens) and tokens[i] in "+-":
            rhs, j = term(i + 1)
            val = val + rhs if tokens[i] == "+" else val - rhs
            i = j
        return val, i

    def term(i):
        val, i = power(i)
        while i < len(tokens) and tokens[i] == "*":
            rhs, i = power(i + 1)
            val *= rhs
        return val, i

    def power(i):
        base, i = atom(i)
        if i < len(tokens) and tokens[i] == "^":
            exp, i = power(i + 1)  # right associative
            if exp < 0:
                raise argparse.ArgumentTypeError(f"negative exponent in {text!r}")
            return base**exp, i
        return base, i

    def atom(i):
        if i >= len(tokens):
            raise argparse.ArgumentTypeError(f"truncated integer expression {text!r}")
        if tokens[i] == "(":
            val, i = expr(i + 1)
            if i >= len(tokens) or tokens[i] != ")":
                raise argparse.ArgumentTypeError(f"unbalanced parentheses in {text!r}")
            return val, i + 1
        if tokens[i].isdigit():
            return int(tokens[i]), i + 1
        raise argparse.ArgumentTypeError(f"unexpected {tokens[i]!r} in {text!r}")

    if not tokens:
        raise argparse.ArgumentTypeError("empty integer expression")
    val, i = expr(0)
    if i != len(tokens):
        raise argparse.ArgumentTypeError(f"trailing input in {text!r}")
    return val


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _checkpoint_path(args, name: str) -> Path | None:
    if args.checkpoint:
        return Path(args.checkpoint)
    env = os.environ.get(CHECKPOINT_ENV)
    if env:
        return Path(env) / name
    return None


# --------------------------------------------------------------------------
# commands

def cmd_verify(args) -> int:
    if args.start >= args.end:
        log.error("--start must be below --end")
        return EXIT_USAGE
    ckpt = _checkpoint_path(args, f"verify_{args.start}_{args.end}_{args.segment_size}.json")
    report = verify.verify_range(
        args.start, args.end, args.segment_size, args.workers, ckpt, args.spot_checks
    )
    if args.format == "text":
        out = (
            f"range [{report.range_lo}, {report.range_hi})\n"
            f"exceptions {report.exceptions}\n"
            f"max_checks {report.max_checks} at n={report.max_checks_at}\n"
            f"segments {report.segments_done}\n"
        )
    else:
        out = _dump_json(report.to_dict())
    _emit(out, args.output)

    if args.expect_reference:
        want = [n for n in verify.KNOWN_EXCEPTIONS if args.start <= n < args.end]
        ok = True
        if report.exceptions != want:
            log.error("exceptions %s differ from expected %s", report.exceptions, want)
            ok = False
        if args.end <= verify.STREAK_SEARCH_LIMIT + 1 and report.max_checks > verify.MAX_CHECKS_BOUND:
            log.error("max_checks %d exceeds %d", report.max_checks, verify.MAX_CHECKS_BOUND)
            ok = False
        return EXIT_OK if ok else EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_bk(args) -> int:
    ckpt = _checkpoint_path(args, f"bk_{args.max}_{args.segment_size}.json")
    table = verify.compute_streaks(args.max, args.segment_size, args.workers, ckpt)
    if args.format == "text":
        out = "".join(f"b_{k} = {v}\n" for k, v in table.entries.items())
    else:
        out = _dump_json(table.to_dict())
    _emit(out, args.output)

    if args.expect_reference:
        want = {k: v for k, v in verify.KNOWN_STREAKS.items() if v <= args.max}
        if table.entries != want:
            log.error("streak table %s differs from expected %s", table.entries, want)
            return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_crt(args) -> int:
    if args.naive:
        if args.k is None:
            log.error("--naive needs --k")
            return EXIT_USAGE
        ptable = build_prime_table(1000)
        system = crt.naive_system(args.k, ptable)
        n, cert = crt.naive_bound(args.k, ptable)
        k = args.k
    else:
        system = crt.CongruenceSystem.load(args.system) if args.system else crt.REFERENCE_SYSTEM
        n = crt.crt_solve(system)
        cert = None
        k = args.k if args.k is not None else (16 if not args.system else None)
        if k is not None:
            try:
                cert = crt.certify_streak_bound(n, k, build_prime_table(1000))
            except crt.CertificationError as exc:
                log.error("certification failed at l=%d: %s", exc.l, exc)
                return EXIT_CHECK_FAILED

    doc = {"n": n, "system": system.to_dict()}
    if cert is not None:
        doc["certificate"] = cert.to_dict()
    if args.format == "text":
        out = f"n = {n}\n"
        if cert is not None:
            out += "".join(
                f"l={c.l:2d} p_l={c.p_l:3d}  {c.q}^2 | n - {c.p_l}\n" for c in cert.coverage
            )
    else:
        out = _dump_json(doc)
    _emit(out, args.output)

    ok = cert is None or cert.check()
    if args.expect_reference and not args.system and not args.naive:
        ok = ok and n == crt.B16_UPPER_BOUND
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _row_dict(row: analytic.DeltaRow) -> dict:
    return {
        "k": row.k,
        "interval": row.interval_label,
        "interval_lo": row.interval_lo,
        "interval_hi": row.interval_hi,
        "c1": round(row.c1_val, 10),
        "c2": round(row.c2_val, 10),
        "c": row.c_param,
        "c0_minus_g": round(row.c0_minus_g, 10),
        "delta": round(row.delta, 4),
    }


def cmd_tables(args) -> int:
    ptable = build_prime_table(1000)
    rows = analytic.delta_table(args.variant, ptable, args.convention)
    dicts = [_row_dict(r) for r in rows]
    if args.format == "csv":
        out = _csv(dicts)
    elif args.format == "text":
        out = "".join(
            f"k={d['k']:2d} {d['interval']:<16} c1={d['c1']:.8f} c2={d['c2']:.8f} "
            f"c={d['c']:<4} c0-g={d['c0_minus_g']:.9f} delta={d['delta']:.1f}\n"
            for d in dicts
        )
    else:
        out = _dump_json({"variant": args.variant, "convention": args.convention, "rows": dicts})
    _emit(out, args.output)

    ok = True
    for r in rows:
        if r.delta <= 0:
            log.error("row k=%d: delta %.3f is not positive", r.k, r.delta)
            ok = False
    if args.expect_reference:
        ref = analytic.REFERENCE_TABLES[args.variant]
        for r in rows:
            want = ref[r.k][3]
            if abs(r.delta - want) > max(0.2, 1e-3 * abs(want)):
                log.error("row k=%d: delta %.3f differs from %.1f", r.k, r.delta, want)
                ok = False
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_margin(args) -> int:
    ctx = analytic.BoundContext(args.n, args.c, "f2", C1=args.C1, C2=args.C2)
    m = analytic.margin(ctx, convention=args.convention)
    doc = {"n": args.n, "c": args.c, "C1": args.C1, "C2": args.C2,
           "convention": args.convention, "lhs": analytic.lhs(args.n), "margin": m}
    _emit(_dump_json(doc) if args.format == "json" else f"margin {m:.4f}\n", args.output)
    threshold = analytic.REFERENCE_F2_MARGIN if args.expect_reference else 0
    return EXIT_OK if m > threshold else EXIT_CHECK_FAILED


def cmd_constants(args) -> int:
    if args.B < args.A:
        log.error("--B must be at least --A")
        return EXIT_USAGE
    ptable = build_prime_table(max(args.B, 1000))
    k = analytic.prime_sum_constants(args.A, args.B, ptable)
    doc = {"A": k.A, "B": k.B, "c1": k.c1, "c2": k.c2, "c3": k.c3, "g_A": k.gA,
           "c0_minus_g_A": analytic.C0 - k.gA}
    ok = True
    if args.B >= 59:
        t = analytic.certify_tails(ptable, args.B, args.A)
        doc["tails"] = {"c1_tail": t.c1_tail, "c2_tail": t.c2_tail, "square_tail": t.square_tail,
                        "C1_upper": t.C1_upper, "C2_upper": t.C2_upper}
        if args.expect_reference and args.A == 11:
            ok = t.C1_upper < 0.033 and t.C2_upper < 0.1
    if args.format == "text":
        out = "".join(f"{key} = {val}\n" for key, val in doc.items() if key != "tails")
        out += "".join(f"{key} = {val}\n" for key, val in doc.get("tails", {}).items())
    else:
        out = _dump_json(doc)
    _emit(out, args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all(quick=args.quick)
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
    return EXIT_OK if all(p for _, p, _ in results) else EXIT_CHECK_FAILED


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqfprime", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("json", "text")):
        sp.add_argument("--output", "-o", help="write data here instead of stdout")
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--expect-paper", dest="expect_reference", action="store_true",
                        help="compare with the built-in reference values; nonzero exit on mismatch")

    def scanning(sp):
        sp.add_argument("--segment-size", type=parse_int, default=DEFAULT_SEGMENT_SIZE)
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--checkpoint", help=f"checkpoint file (default: ${CHECKPOINT_ENV}/<run>.json)")

    sp = sub.add_parser("verify", help="verify n = s + p on [start, end)")
    sp.add_argument("--start", type=parse_int, required=True)
    sp.add_argument("--end", type=parse_int, required=True, help="exclusive")
    sp.add_argument("--spot-checks", type=int, default=10_000,
                    help="random n rechecked by trial division")
    scanning(sp)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bk", help="streak table b_k for n <= max")
    sp.add_argument("--max", type=parse_int, required=True)
    scanning(sp)
    common(sp)
    sp.set_defaults(func=cmd_bk)

    sp = sub.add_parser("crt", help="solve a congruence system and certify the streak bound")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--paper-system", action="store_true", help="built-in 8-congruence system (default)")
    g.add_argument("--system", help="JSON file with a congruence list")
    g.add_argument("--naive", action="store_true", help="n = p_l (mod p_l^2) for l <= k")
    sp.add_argument("--k", type=int, help="streak length to certify")
    common(sp)
    sp.set_defaults(func=cmd_crt)

    sp = sub.add_parser("tables", help="Delta table for f4 or f5")
    sp.add_argument("--variant", choices=("f4", "f5"), required=True)
    sp.add_argument("--convention", choices=analytic.CONVENTIONS, default="tabulated")
    common(sp, ("json", "csv", "text"))
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("margin", help="LHS - f2 at n")
    sp.add_argument("--n", type=parse_int, default=analytic.N_59_8 + 1)
    sp.add_argument("--c", type=float, default=4.0)
    sp.add_argument("--C1", type=float, default=0.033)
    sp.add_argument("--C2", type=float, default=0.1)
    sp.add_argument("--convention", choices=analytic.CONVENTIONS, default="tabulated")
    common(sp)
    sp.set_defaults(func=cmd_margin)

    sp = sub.add_parser("constants", help="prime sums c1, c2, c3, g and tail bounds")
    sp.add_argument("--A", type=parse_int, default=11)
    sp.add_argument("--B", type=parse_int, default=10**6)
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("selftest", help="run the lemma and property instance checks")
    sp.add_argument("--quick", action="store_true", help="smaller samples")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except verify.CheckpointError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except KeyboardInterrupt:
        log.error("interrupted; the checkpoint (if any) holds all completed segments")
        return 130


if __name__ == "__main__":
    sys.exit(main())
