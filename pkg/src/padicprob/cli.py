"""Command-line front end: `padicprob run <file>` and `padicprob suite <name>`.

Reports are deterministic given scenario and seed; timing appears only in
comment lines (prefix '#') so report bodies can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from .errors import PadicProbError, ScenarioParseError, UnknownSuite
from .scenario import TaskRecord, parse_scenario, run_scenario
from .suites import SUITES, run_suite

SCHEMA = "padicprob-report/1"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicprob",
        description="exact non-Archimedean probability computations at "
                    "finite truncation depth")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=10 ** 6,
                        help="max product leaf-tuple count (default 10^6)")
    common.add_argument("--precision", type=int, default=None,
                        help="working s-adic precision (overrides the scenario)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized batteries")
    common.add_argument("--out", type=str, default=None,
                        help="write the report to a file instead of stdout")
    common.add_argument("--format", choices=("text", "json-like-records"),
                        default="text")

    run_p = sub.add_parser("run", parents=[common],
                           help="execute a scenario file")
    run_p.add_argument("file", help="scenario path")

    suite_p = sub.add_parser("suite", parents=[common],
                             help="run a verification battery")
    suite_p.add_argument("name", help="one of: " + ", ".join(sorted(SUITES)))
    return parser


def _emit(lines: List[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _record_lines(records: List[TaskRecord], fmt: str) -> List[str]:
    lines = []
    for r in records:
        if fmt == "json-like-records":
            lines.append(json.dumps(
                {"task": r.task, "status": r.status,
                 "value": r.value, "detail": r.detail}, sort_keys=True))
        else:
            extra = " ".join(part for part in (r.value, r.detail) if part)
            lines.append("task %s = %s%s"
                         % (r.task, r.status, " " + extra if extra else ""))
    return lines


def _header(mode: str, source: str, seed: int, fmt: str) -> List[str]:
    if fmt == "json-like-records":
        return [json.dumps({"schema": SCHEMA, "mode": mode,
                            "source": source, "seed": seed}, sort_keys=True)]
    return ["schema = %s" % SCHEMA, "mode = %s" % mode,
            "source = %s" % source, "seed = %d" % seed]


def _summary(ok_count: int, total: int, fmt: str) -> List[str]:
    status = "pass" if ok_count == total else "fail"
    if fmt == "json-like-records":
        return [json.dumps({"summary": status, "passed": ok_count,
                            "total": total}, sort_keys=True)]
    return ["summary = %s (%d/%d passed)" % (status, ok_count, total)]


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        if args.command == "run":
            with open(args.file) as fh:
                scn = parse_scenario(fh.read())
            if args.precision is not None:
                scn.precision = args.precision
            records = run_scenario(scn, budget=args.budget)
            lines = _header("run", args.file, args.seed, args.format)
            lines += _record_lines(records, args.format)
            ok = sum(1 for r in records if r.ok)
            lines += _summary(ok, len(records), args.format)
            all_ok = ok == len(records)
        else:
            precision = args.precision if args.precision is not None else 32
            results = run_suite(args.name, seed=args.seed, precision=precision)
            records = [TaskRecord("criterion-%d" % r.cid,
                                  "pass" if r.ok else "fail",
                                  detail=r.detail) for r in results]
            lines = _header("suite", args.name, args.seed, args.format)
            lines += _record_lines(records, args.format)
            ok = sum(1 for r in results if r.ok)
            lines += _summary(ok, len(results), args.format)
            lines += ["# elapsed criterion-%d = %.2fs" % (r.cid, r.elapsed)
                      for r in results]
            all_ok = ok == len(results)
    except ScenarioParseError as exc:
        sys.stderr.write("parse error: %s\n" % exc)
        return 2
    except UnknownSuite as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except (PadicProbError, OSError) as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return 2
    lines.append("# wall time %.2fs" % (time.monotonic() - started))
    _emit(lines, args.out)
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
