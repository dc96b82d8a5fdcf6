"""Command line front end.

Results go to standard output as canonical JSON, diagnostics to standard
error.  Exit codes: 0 success, 1 a requested check failed, 2 bad usage,
3 domain error, 4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import ENGINE_VERSION
from . import characters as C
from ._kernels import BudgetExceeded
from .drinfeld import DrinfeldError, DrinfeldMonomial, factorize, graded_limit_char, membership_violation, wt
from .gendem import GendemError, consistency_report, flag_of, gendem_char
from .interlacing import (
    InterlacingError,
    beta_lambda,
    interlace_decompose,
    interlacing_violation,
    nu_zero,
    r_set,
)
from .rootsys import RankedType, RootSystemError, build_root_system
from .verify import DEFAULT_RANKS, SUITES, parse_ranks, run_suite

__all__ = ["main", "build_parser", "cache_key"]

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DOMAIN, EXIT_BUDGET = 0, 1, 2, 3, 4
DOMAIN_ERRORS = (RootSystemError, C.CharacterError, InterlacingError, GendemError, DrinfeldError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)


def _weights(text: str, rank: int, name: str) -> tuple:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated integers, got {text!r}") from None
    if len(vals) != rank:
        raise UsageError(f"--{name}: expected {rank} entries, got {len(vals)}")
    return vals


def _factors(text: str) -> tuple:
    """'2:0,5:5' -> ((2, 0), (5, 5)); the empty string is the identity."""
    if not text.strip():
        return ()
    out = []
    for part in text.split(","):
        try:
            i, r = part.split(":")
            out.append((int(i), int(r)))
        except ValueError:
            raise UsageError(f"--factors: expected node:exponent pairs, got {part!r}") from None
    return tuple(out)


def _root_system(args):
    return build_root_system(RankedType(args.series, args.rank))


def _pair_dict(pair) -> dict:
    return {"lambda1": list(pair.part1.coords), "lambda2": list(pair.part2.coords)}


def _summary(ch) -> dict:
    dim, per = C.specialize_and_decompose(ch)
    return {
        "dimension": dim,
        "top_grade": ch.top_grade(),
        "decomposition": [
            {"grade": g, "irreducibles": [{"hw": list(w.coords), "mult": m} for w, m in parts]} for g, parts in per
        ],
    }


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit code)


def cmd_char(args) -> tuple:
    R = _root_system(args)
    lam = _weights(args.weight, R.rank, "weight")
    ch = C.demazure_char(R, args.level, lam, budget=args.budget)
    out = {"command": "char", "series": R.series, "rank": R.rank, "level": args.level, "weight": list(lam)}
    out.update(_summary(ch))
    out["character"] = json.loads(ch.to_json())
    return out, EXIT_OK


def cmd_gendem(args) -> tuple:
    R = _root_system(args)
    a = _weights(args.lambda1, R.rank, "lambda1")
    b = _weights(args.lambda2, R.rank, "lambda2")
    nu = _weights(args.nu, R.rank, "nu") if args.nu else (0,) * R.rank
    bad = interlacing_violation(R, a, b)
    if bad is not None:
        raise GendemError(f"({a}, {b}) is not an interlacing pair: {bad}")
    flag = flag_of(R, (a, b), nu)
    ch = gendem_char(R, (a, b), nu, budget=args.budget)
    out = {"command": "gendem", "series": R.series, "rank": R.rank, "lambda1": list(a), "lambda2": list(b), "nu": list(nu)}
    out["flag"] = flag.as_dict()
    out.update(_summary(ch))
    out["character"] = json.loads(ch.to_json())
    code = EXIT_OK
    if args.check:
        rep = consistency_report(R, (a, b), nu, budget=args.budget)
        out["consistency"] = {"passed": rep.passed, "checks": [c.as_dict() for c in rep.checks]}
        if not rep.passed:
            code = EXIT_CHECK
    return out, code


def cmd_decompose(args) -> tuple:
    R = _root_system(args)
    lam = _weights(args.weight, R.rank, "weight")
    pair = interlace_decompose(R, lam)
    out = {"command": "decompose", "series": R.series, "rank": R.rank, "weight": list(lam), "pair": _pair_dict(pair)}
    data = beta_lambda(R, pair)
    if data is None:
        out["beta"] = None
    else:
        nu0, nxt = nu_zero(R, pair)
        out["beta"] = {"root": list(data.beta.coords), "p": data.p, "pprime": data.pprime}
        out["nu0"] = list(nu0.coords)
        out["next_pair"] = _pair_dict(nxt)
    out["r_set"] = [list(b.coords) for b in r_set(R, pair)]
    return out, EXIT_OK


def cmd_drinfeld(args) -> tuple:
    R = _root_system(args)
    m = DrinfeldMonomial(_factors(args.factors))
    bad = membership_violation(R, m)
    out = {"command": "drinfeld", "series": R.series, "rank": R.rank, "monomial": m.as_dict(), "member": bad is None}
    if bad is not None:
        out["violation"] = bad
        return out, EXIT_DOMAIN
    m1, m2 = factorize(R, m)
    out["wt"] = list(wt(R, m).coords)
    out["factors"] = [m1.as_dict(), m2.as_dict()]
    if args.char:
        ch = graded_limit_char(R, m, budget=args.budget)
        out.update(_summary(ch))
        out["character"] = json.loads(ch.to_json())
    return out, EXIT_OK


def cmd_verify(args) -> tuple:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}")
    try:
        ranks = parse_ranks(args.ranks) if args.ranks else DEFAULT_RANKS[args.suite]
    except ValueError as exc:
        raise UsageError(f"--ranks: {exc}") from None

    def progress(k, total):
        if k == total or k % 50 == 0:
            print(f"{args.suite}: {k}/{total} cases", file=sys.stderr)

    rep = run_suite(args.suite, ranks, jobs=args.jobs, budget=args.budget, progress=progress)
    out = {"command": "verify"}
    out.update(rep.as_dict())
    return out, EXIT_OK if rep.passed else EXIT_CHECK


COMMANDS = {"char": cmd_char, "gendem": cmd_gendem, "decompose": cmd_decompose, "drinfeld": cmd_drinfeld, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="demachar", description=__doc__.splitlines()[0])
    p.add_argument("--no-cache", action="store_true", help="neither read nor write the result cache")
    p.add_argument("--budget", type=int, default=C.DEFAULT_BUDGET, help="maximum number of terms per character")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def typed(sp):
        sp.add_argument("--series", choices=["A", "D"], default="D")
        sp.add_argument("--rank", type=int, required=True)

    sp = sub.add_parser("char", help="graded character of D(level, weight)")
    typed(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--weight", required=True)

    sp = sub.add_parser("gendem", help="flag and character of D(lambda1 + nu, lambda2 + nu)")
    typed(sp)
    sp.add_argument("--lambda1", required=True)
    sp.add_argument("--lambda2", required=True)
    sp.add_argument("--nu", default="")
    sp.add_argument("--check", action="store_true", help="run the consistency checks; exit 1 on a violation")

    sp = sub.add_parser("decompose", help="interlacing pair, beta and nu_0 of a weight in P+(1)")
    typed(sp)
    sp.add_argument("--weight", required=True)

    sp = sub.add_parser("drinfeld", help="membership, factorization and graded limit of a Drinfeld monomial")
    typed(sp)
    sp.add_argument("--factors", required=True, help="node:exponent pairs, e.g. 2:0,5:5")
    sp.add_argument("--char", action="store_true", help="also emit the graded limit character")

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite")
    sp.add_argument("--ranks", default="")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def cache_key(args) -> str:
    """Hex digest of the canonical job description."""
    job = {k: v for k, v in sorted(vars(args).items()) if k not in ("no_cache", "jobs")}
    job["engine"] = ENGINE_VERSION
    return hashlib.sha256(_dumps(job).encode()).hexdigest()


def _cache_dir() -> Path:
    return Path(os.environ.get("DEMACHAR_CACHE", ".demachar-cache"))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be positive")
        if args.budget < 1:
            raise UsageError("--budget must be positive")
    except UsageError as exc:
        print(f"demachar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    path = None
    if not args.no_cache:
        path = _cache_dir() / f"{cache_key(args)}.json"
        if path.is_file():
            text = path.read_text()
            sys.stdout.write(text)
            return int(json.loads(text).get("exit_code", EXIT_OK))

    t0 = time.perf_counter()
    try:
        payload, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"demachar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"demachar: resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DOMAIN_ERRORS as exc:
        print(f"demachar: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"demachar: {args.command} finished in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    payload["exit_code"] = code
    text = _dumps(payload) + "\n"
    sys.stdout.write(text)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_text(text)
        os.replace(tmp, path)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
