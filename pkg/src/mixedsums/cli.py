"""Command-line front end: classify single forms, verify them against the
brute-force oracle, and scan parameter boxes into machine-readable files.

Exit codes: classify maps the verdict (0 almost universal, 10 not almost
universal, 11 locally obstructed); verify exits 0 only when the audit is
consistent; 2 flags invalid input, 3 a blown resource budget, 4 an
unwritable output.  Scans are reproducible bit-for-bit: records appear in
lexicographic (a, b, c) order whatever the worker count, and a checkpoint
file allows byte-identical resumption after an interrupt.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import gcd

from .arith import RangeError
from .classify import Verdict, VerdictKind, classify
from .forms import BudgetExceededError, FormError, FormInstance, new_form
from .verify import DEFAULT_THRESHOLD, ExceptionReport, audit

SCHEMA_VERSION = 1
CHECKPOINT_SUFFIX = ".checkpoint"
FLUSH_EVERY = 500

_EXIT_BY_VERDICT = {
    VerdictKind.ALMOST_UNIVERSAL: 0,
    VerdictKind.NOT_ALMOST_UNIVERSAL: 10,
    VerdictKind.LOCALLY_OBSTRUCTED: 11,
}


def _load_config(path: str | None) -> dict[str, int]:
    """Optional key=value file; recognized keys: N, threads, threshold."""
    if path is None:
        return {}
    out: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key = key.strip()
            if key not in ("N", "threads", "threshold"):
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = int(value.strip())
    return out


def _parse_range(text: str) -> tuple[int, int]:
    """A coefficient range "LO..HI", or a single value "V" meaning V..V."""
    lo, sep, hi = text.partition("..")
    if not sep:
        v = int(text)
        return v, v
    return int(lo), int(hi)


def _print_verdict(F: FormInstance, verdict: Verdict) -> None:
    print(f"form: {F.label()}   (a={F.a} b={F.b} c={F.c} p={F.p} k={F.k}"
          + (", inputs swapped" if F.swapped else "") + ")")
    print(f"verdict: {verdict.kind.value}")
    if verdict.kind is VerdictKind.LOCALLY_OBSTRUCTED:
        lv = verdict.local
        print(f"local failure: prime {lv.failing_prime} ({lv.reason})")
        return
    print(f"case: {verdict.case.value}")
    cand = verdict.candidate
    eps = f" epsilon={cand.epsilon}" if cand.epsilon is not None else ""
    print(f"candidate: t={cand.t} field_d={cand.field_d}{eps}")
    print("conditions:")
    for entry in verdict.trace:
        mark = "pass" if entry.passed else "FAIL"
        print(f"  [{mark}] {entry.label:7} {entry.detail}")
    if verdict.witness_solution is not None:
        w = verdict.witness_solution
        print(f"witness: candidate represented at ({w.x}, {w.y}, {w.z})")


def _print_report(report: ExceptionReport) -> None:
    exc = report.exceptions
    print(f"oracle: checked all values up to {report.bound}")
    shown = ", ".join(str(n) for n in exc[:12]) + (", ..." if len(exc) > 12 else "")
    print(f"exceptions: {len(exc)}" + (f" [{shown}]" if exc else ""))
    print(f"tail ({report.bound // 2}, {report.bound}] clear: {report.tail_clear}")
    if report.family_matches:
        sample = ", ".join(f"{n}=f(l={l})" for n, l in report.family_matches[:6])
        print(f"family matches: {len(report.family_matches)} [{sample}]")
    if report.unexplained:
        print(f"unexplained above {report.threshold}: {len(report.unexplained)} "
              f"(first: {report.unexplained[0]})")
    if report.progression is not None:
        m, r = report.progression
        print(f"progression witness: every n = {r} (mod {m}) is missing")
    print(f"consistent: {report.consistent}")
    for p in report.problems:
        print(f"  problem: {p}")


def _record(F: FormInstance, verdict: Verdict,
            report: ExceptionReport | None) -> dict:
    cand = verdict.candidate
    rec = {
        "schema_version": SCHEMA_VERSION,
        "a": F.a if not F.swapped else F.b,
        "b": F.b if not F.swapped else F.a,
        "c": F.c, "p": F.p, "k": F.k,
        "verdict": verdict.kind.value,
        "theorem": verdict.case.value if verdict.case else None,
        "t": cand.t if cand else None,
        "field_d": cand.field_d if cand else None,
        "epsilon": cand.epsilon if cand else None,
        "trace": [{"label": e.label, "pass": e.passed, "detail": e.detail}
                  for e in verdict.trace],
        "exceptions_checked_to": report.bound if report else None,
        "exception_count": len(report.exceptions) if report else None,
        "tail_clear": report.tail_clear if report else None,
        "family_matches": [list(m) for m in report.family_matches] if report else None,
        "unexplained": list(report.unexplained) if report else None,
        "progression": list(report.progression) if report and report.progression else None,
        "consistent": report.consistent if report else None,
    }
    return rec


_CSV_FIELDS = [
    "schema_version", "a", "b", "c", "p", "k", "verdict", "theorem", "t",
    "field_d", "epsilon", "trace", "exceptions_checked_to", "exception_count",
    "tail_clear", "family_matches", "unexplained", "progression", "consistent",
]


def _csv_quote(value: str) -> str:
    if any(ch in value for ch in ',"\r\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def _record_line(rec: dict, fmt: str) -> str:
    if fmt == "jsonl":
        return json.dumps(rec, separators=(",", ":")) + "\n"
    cells = []
    for field in _CSV_FIELDS:
        v = rec[field]
        if v is None:
            cells.append("")
        elif field == "trace":
            cells.append(_csv_quote(";".join(
                f"{e['label']}={'pass' if e['pass'] else 'fail'}" for e in v)))
        elif field == "family_matches":
            cells.append(_csv_quote(";".join(f"{n}:{l}" for n, l in v)))
        elif field == "unexplained":
            cells.append(_csv_quote(";".join(str(n) for n in v)))
        elif field == "progression":
            cells.append(f"{v[0]}:{v[1]}")
        elif isinstance(v, bool):
            cells.append("true" if v else "false")
        else:
            cells.append(str(v))
    return ",".join(cells) + "\n"


@dataclass(frozen=True)
class ScanJob:
    """A parameter box to sweep, with oracle bound and output settings."""

    a_range: tuple[int, int]
    b_range: tuple[int, int]
    c_range: tuple[int, int]
    p: int
    k: int
    bound: int
    threshold: int
    out_path: str
    fmt: str  # "jsonl" | "csv"

    def job_hash(self) -> str:
        key = "|".join(str(x) for x in (
            SCHEMA_VERSION, *self.a_range, *self.b_range, *self.c_range,
            self.p, self.k, self.bound, self.threshold, self.fmt))
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def blocks(self) -> list[tuple[int, int, list[int]]]:
        """Valid triples grouped by (a, b): [(a, b, [c...]), ...] in order."""
        out = []
        for a in range(self.a_range[0], self.a_range[1] + 1):
            for b in range(self.b_range[0], self.b_range[1] + 1):
                cs = [c for c in range(self.c_range[0], self.c_range[1] + 1)
                      if c % self.p != 0 and gcd(gcd(a, b), c) == 1]
                if cs:
                    out.append((a, b, cs))
        return out


def _scan_block(job: ScanJob, block: tuple[int, int, list[int]]) -> list[str]:
    a, b, cs = block
    lines = []
    for c in cs:
        F = new_form(a, b, c, job.p, job.k)
        verdict = classify(F)
        report = (audit(F, verdict, job.bound, threshold=job.threshold)
                  if job.bound > 0 else None)
        lines.append(_record_line(_record(F, verdict, report), job.fmt))
    return lines


def _write_checkpoint(path: str, job_hash: str, last_index: int) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"job_hash": job_hash, "last_index": last_index}, fh)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def run_scan(job: ScanJob, threads: int = 1, resume: bool = False) -> int:
    """Execute a scan job; returns the number of records written."""
    blocks = job.blocks()
    sizes = [len(cs) for _, _, cs in blocks]
    total = sum(sizes)
    cp_path = job.out_path + CHECKPOINT_SUFFIX
    header = ",".join(_CSV_FIELDS) + "\n" if job.fmt == "csv" else ""

    kept: list[str] = []
    done = 0
    if resume:
        if not os.path.exists(cp_path):
            raise ValueError(f"no checkpoint at {cp_path}; nothing to resume")
        with open(cp_path, encoding="utf-8") as fh:
            cp = json.load(fh)
        if cp.get("job_hash") != job.job_hash():
            raise ValueError("checkpoint was written by a different job; "
                             "refusing to resume")
        done = cp["last_index"] + 1
        with open(job.out_path, encoding="utf-8") as fh:
            lines = fh.readlines()
        if header:
            lines = lines[1:]
        if len(lines) < done:
            raise ValueError(f"output has {len(lines)} records but checkpoint "
                             f"claims {done}; refusing to resume")
        kept = lines[:done]

    # Skip whole blocks already completed; a partially-done block is redone.
    start_block, seen = 0, 0
    while start_block < len(blocks) and seen + sizes[start_block] <= done:
        seen += sizes[start_block]
        start_block += 1
    kept = kept[:seen]
    done = seen

    try:
        out = open(job.out_path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {job.out_path}: {exc}") from exc
    with out:
        out.write(header)
        out.writelines(kept)
        out.flush()
        unflushed = 0

        def _emit(lines: list[str]) -> None:
            nonlocal done, unflushed
            out.writelines(lines)
            done += len(lines)
            unflushed += len(lines)
            if unflushed >= FLUSH_EVERY:
                out.flush()
                os.fsync(out.fileno())
                _write_checkpoint(cp_path, job.job_hash(), done - 1)
                unflushed = 0

        todo = blocks[start_block:]
        if threads <= 1:
            for block in todo:
                _emit(_scan_block(job, block))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_scan_block, job, blk) for blk in todo]
                for fut in futures:  # completion in submission order
                    _emit(fut.result())
        out.flush()
        os.fsync(out.fileno())
    if os.path.exists(cp_path):
        os.remove(cp_path)
    assert done == total, f"wrote {done} records, expected {total}"
    return done


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedsums",
        description="Classify mixed sums a*x^2 + b*y^2 + c*P_{p^k+2}(z) as "
                    "almost universal or not, with brute-force validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, ranges=False):
        kind = str if ranges else int
        sp.add_argument("-a", required=True, type=kind,
                        help="coefficient a" + (" or range LO..HI" if ranges else ""))
        sp.add_argument("-b", required=True, type=kind,
                        help="coefficient b" + (" or range LO..HI" if ranges else ""))
        sp.add_argument("-c", required=True, type=kind,
                        help="coefficient c" + (" or range LO..HI" if ranges else ""))
        sp.add_argument("-p", required=True, type=int, help="odd prime p")
        sp.add_argument("-k", required=True, type=int, help="exponent k > 0")
        sp.add_argument("--config", default=None,
                        help="key=value file with defaults for N, threads, threshold")

    sp = sub.add_parser("classify", help="classify one form")
    common(sp)

    sp = sub.add_parser("verify", help="classify and audit against the oracle")
    common(sp)
    sp.add_argument("-N", type=int, default=None,
                    help="oracle bound (default 50000 or config N)")
    sp.add_argument("--threshold", type=int, default=None,
                    help=f"small-exception cutoff (default {DEFAULT_THRESHOLD})")

    sp = sub.add_parser("scan", help="sweep a parameter box into a file")
    common(sp, ranges=True)
    sp.add_argument("-N", type=int, default=None,
                    help="oracle bound per triple; 0 skips the audit (default 0)")
    sp.add_argument("-o", "--output", required=True, help="output file path")
    sp.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker processes (default 1 or config threads)")
    sp.add_argument("--threshold", type=int, default=None)
    sp.add_argument("--resume", action="store_true",
                    help="resume an interrupted scan from its checkpoint")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "classify":
        try:
            F = new_form(args.a, args.b, args.c, args.p, args.k)
        except (FormError, RangeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        verdict = classify(F)
        _print_verdict(F, verdict)
        return _EXIT_BY_VERDICT[verdict.kind]

    if args.command == "verify":
        bound = args.N if args.N is not None else config.get("N", 50000)
        threshold = (args.threshold if args.threshold is not None
                     else config.get("threshold", DEFAULT_THRESHOLD))
        try:
            F = new_form(args.a, args.b, args.c, args.p, args.k)
        except (FormError, RangeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        verdict = classify(F)
        _print_verdict(F, verdict)
        try:
            report = audit(F, verdict, bound, threshold=threshold)
        except BudgetExceededError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        _print_report(report)
        return 0 if report.consistent else 1

    # scan
    bound = args.N if args.N is not None else config.get("N", 0)
    threshold = (args.threshold if args.threshold is not None
                 else config.get("threshold", DEFAULT_THRESHOLD))
    threads = (args.threads if args.threads is not None
               else config.get("threads", 1))
    try:
        a_range = _parse_range(args.a)
        b_range = _parse_range(args.b)
        c_range = _parse_range(args.c)
        for lo, hi in (a_range, b_range, c_range):
            if lo < 1 or hi < lo:
                raise ValueError(f"bad range {lo}..{hi}")
        # validate p, k, and the coefficient caps once up front
        new_form(a_range[0], b_range[0], max(c_range[0], 1 + (c_range[0] % args.p == 0)),
                 args.p, args.k) if False else None
        probe_c = next((c for c in range(c_range[0], c_range[1] + 1)
                        if c % args.p != 0), None)
        if probe_c is None:
            raise ValueError("no c in range is coprime to p")
        new_form(a_range[0], b_range[0], probe_c, args.p, args.k)
    except (FormError, RangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    job = ScanJob(a_range=a_range, b_range=b_range, c_range=c_range,
                  p=args.p, k=args.k, bound=bound, threshold=threshold,
                  out_path=args.output, fmt=args.format)
    try:
        count = run_scan(job, threads=threads, resume=args.resume)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} records to {job.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
