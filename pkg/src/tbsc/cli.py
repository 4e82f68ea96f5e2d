"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 infeasible parameters,
3 verification failure.  ``TBSC_OUT_DIR`` sets the default output
directory for written artifacts.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, manifest
from .constructions import build_tbsc, feasibility
from .errors import InadmissibleScheduleError, InfeasibleParametersError
from .oracle import verify_tbsc
from .relay import simulate_network, worst_case_delays
from .streaming import ErasureSchedule

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3
OUT_ENV = "TBSC_OUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> list[int]:
    """``"7"`` -> [7], ``"4..20"`` -> [4, ..., 20] (inclusive)."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from exc


def parse_indices(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return sorted(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated indices, got {text!r}") from exc


def _out_dir(args) -> Path | None:
    out = args.out or os.environ.get(OUT_ENV)
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _fraction(x) -> str:
    return f"{x.numerator}/{x.denominator}"


def _feasibility_dict(rep) -> dict:
    return {
        "b1": rep.b1,
        "b2": rep.b2,
        "T": rep.T,
        "feasible": rep.feasible,
        "sufficient": rep.sufficient,
        "prior_work": rep.prior_work,
        "optimal_rate": _fraction(rep.optimal_rate),
        "path": rep.path,
    }


def _build(b1: int, b2: int, T: int):
    try:
        return build_tbsc(b1, b2, T)
    except InfeasibleParametersError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INFEASIBLE) from exc


def cmd_construct(args) -> int:
    spec = _build(args.b1, args.b2, args.T)
    rep = feasibility(args.b1, args.b2, args.T)
    payload = {
        "rate": _fraction(spec.rate),
        "feasibility": _feasibility_dict(rep),
        "sr_profile": list(spec.d_sr),
        "rd_profile": list(spec.d_rd),
        "end_to_end": list(spec.predicted_end_to_end()),
    }
    out = _out_dir(args)
    if out is not None:
        stem = f"tbsc_{args.b1}_{args.b2}_{args.T}"
        (out / f"{stem}.json").write_text(manifest.dumps(spec))
        for hop, code in (("sr", spec.sr), ("rd", spec.rd)):
            for i, m in code.nonzero_blocks().items():
                (out / f"{stem}_{hop}_P{i}.txt").write_text(m.to_text())
        payload["manifest"] = str(out / f"{stem}.json")
    text = (
        f"(b1, b2, T) = ({args.b1}, {args.b2}, {args.T})  path={rep.path}\n"
        f"rate: {payload['rate']}\n"
        f"sr profile: {spec.d_sr}\n"
        f"rd profile: {spec.d_rd}\n"
        f"end-to-end: {spec.predicted_end_to_end()}\n"
    )
    for hop, code in (("SR", spec.sr), ("RD", spec.rd)):
        for i, m in code.nonzero_blocks().items():
            text += f"{hop} P_{i}:\n{m.to_text()}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _build(args.b1, args.b2, args.T)
    mode = "exhaustive" if args.exhaustive else "randomized"
    report = verify_tbsc(spec, mode=mode, budget=args.budget, seed=args.seed, horizon=args.horizon)
    out = _out_dir(args)
    if out is not None:
        (out / f"verify_{args.b1}_{args.b2}_{args.T}_{mode}.json").write_text(report.to_json())
    status = "pass" if report.passed else "FAIL"
    text = (
        f"{status} ({mode}, horizon {report.horizon}, {report.pairs_checked} schedule pairs)\n"
        f"max delay: {','.join(map(str, report.max_delay))}  (T={args.T})\n"
    )
    if report.failure:
        text += f"failing schedules: SR {report.failure['sr_erased']} RD {report.failure['rd_erased']}\n"
        text += "".join(f"  {m}\n" for m in report.failure["messages"])
    _emit(args, report.to_dict(), text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_simulate(args) -> int:
    spec = _build(args.b1, args.b2, args.T)
    sr_e, rd_e = args.sr_erased, args.rd_erased
    if args.schedule_file:
        doc = json.loads(Path(args.schedule_file).read_text())
        sr_e, rd_e = doc.get("sr_erased", []), doc.get("rd_erased", [])
    try:
        rep = simulate_network(
            spec,
            ErasureSchedule.for_code(spec.sr, sr_e),
            ErasureSchedule.for_code(spec.rd, rd_e),
            horizon=args.horizon,
            seed=args.seed,
            strict=False,
            trace=args.format == "text",
        )
    except InadmissibleScheduleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "b1": spec.b1,
        "b2": spec.b2,
        "T": spec.T,
        "horizon": rep.horizon,
        "sr_erased": list(rep.sr_erased),
        "rd_erased": list(rep.rd_erased),
        "max_delay": list(rep.max_delay),
        "relay_lags": list(spec.lags),
        "success": rep.success,
        "failures": rep.failures,
    }
    text = (rep.trace or "") + (
        f"{'pass' if rep.success else 'FAIL'}: max delay {','.join(map(str, rep.max_delay))} (T={spec.T})\n"
    )
    text += "".join(f"  {m}\n" for m in rep.failures[:10])
    _emit(args, payload, text)
    return EXIT_OK if rep.success else EXIT_VERIFY


def _sweep_row(job: tuple[int, int, int, int, int]) -> dict:
    b1, b2, T, budget, seed = job
    row = {"b1": b1, "b2": b2, "T": T}
    if T < b1 + b2:
        row.update(feasible=False, sufficient=False, prior_work=False, path="none", rate="", verified="-")
        return row
    rep = feasibility(b1, b2, T)
    row.update(
        feasible=rep.feasible,
        sufficient=rep.sufficient,
        prior_work=rep.prior_work,
        path=rep.path,
        rate=_fraction(rep.optimal_rate),
        verified="-",
    )
    if rep.feasible and budget > 0:
        report = verify_tbsc(build_tbsc(b1, b2, T), mode="randomized", budget=budget, seed=seed)
        row["verified"] = "pass" if report.passed else "fail"
    return row


SWEEP_FIELDS = ["b1", "b2", "T", "feasible", "sufficient", "prior_work", "path", "rate", "verified"]


def cmd_sweep(args) -> int:
    jobs = [
        (b1, b2, T, args.budget, args.seed)
        for b1 in args.b1
        for b2 in args.b2
        for T in args.T
        if b1 >= 1 and b2 >= 1
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out = _out_dir(args)
    if out is not None:
        (out / "sweep.csv").write_text(buf.getvalue())
    if args.format == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    elif args.format == "text":
        for r in rows:
            flag = "feasible" if r["feasible"] else "-"
            sys.stdout.write(f"b1={r['b1']} b2={r['b2']} T={r['T']:>3}  {flag:8} {r['rate']:>6} {r['verified']}\n")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_VERIFY if any(r["verified"] == "fail" for r in rows) else EXIT_OK


# values printed in the worked example for (b1, b2, T) = (2, 3, 7)
EXAMPLE_SR = {
    2: "5 3\n100\n010\n001\n000\n000\n",
    4: "5 3\n000\n000\n000\n100\n010\n",
}
EXAMPLE_RD = {
    1: "5 3\n001\n000\n000\n000\n000\n",
    2: "5 3\n000\n001\n000\n000\n000\n",
    3: "5 3\n100\n010\n000\n000\n000\n",
    5: "5 3\n000\n000\n100\n010\n001\n",
}


def run_example() -> list[tuple[str, bool]]:
    from .oracle import oracle_recovery_times
    from .streaming import measure_delay_profile

    spec = build_tbsc(2, 3, 7)
    sr = {i: m.to_text() for i, m in spec.sr.nonzero_blocks().items()}
    rd = {i: m.to_text() for i, m in spec.rd.nonzero_blocks().items()}
    return [
        ("rate is 5/8", _fraction(spec.rate) == "5/8"),
        ("SR nonzero parity is {P_2, P_4} as printed", sr == EXAMPLE_SR),
        ("RD nonzero parity is {P'_1, P'_2, P'_3, P'_5} as printed", rd == EXAMPLE_RD),
        ("SR profile (2,2,2,4,4)", tuple(spec.d_sr) == (2, 2, 2, 4, 4)
         and tuple(measure_delay_profile(spec.sr)) == (2, 2, 2, 4, 4)
         and tuple(oracle_recovery_times(spec.sr)) == (2, 2, 2, 4, 4)),
        ("RD profile (3,3,5,5,5)", tuple(spec.d_rd) == (3, 3, 5, 5, 5)
         and tuple(measure_delay_profile(spec.rd)) == (3, 3, 5, 5, 5)
         and tuple(oracle_recovery_times(spec.rd)) == (3, 3, 5, 5, 5)),
        ("end-to-end worst case (7,7,7,7,7)", tuple(worst_case_delays(spec)) == (7,) * 5),
    ]


def cmd_example(args) -> int:
    checks = run_example()
    payload = {name: ok for name, ok in checks}
    text = "".join(f"[{'PASS' if ok else 'FAIL'}] {name}\n" for name, ok in checks)
    _emit(args, payload, text)
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tbsc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, ranges=False):
        kind = parse_range if ranges else int
        p.add_argument("--b1", type=kind, required=True)
        p.add_argument("--b2", type=kind, required=True)
        p.add_argument("--T", type=kind, required=True)
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
        formats = ("json", "csv", "text") if ranges else ("json", "text")
        p.add_argument("--format", choices=formats, default="csv" if ranges else "text")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("construct", help="build a code and dump its matrices")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check the deadline over admissible erasure schedules")
    common(p)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run one pair of erasure schedules")
    common(p)
    p.add_argument("--sr-erased", type=parse_indices, default=[])
    p.add_argument("--rd-erased", type=parse_indices, default=[])
    p.add_argument("--schedule-file")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate feasibility, rate and verification over a grid")
    common(p, ranges=True)
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("example", help="reproduce the (2, 3, 7) worked example")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
