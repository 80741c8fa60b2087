"""Benchmark harness: original program versus its specialization."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .engine import RunResult, run
from .kernel import show_term
from .parser import Source, parse
from .residualizer import ResidualProgram, specialize
from .syntax import Goal, Program, calls_in, conj

CSV_COLUMNS = [
    "program",
    "variant",
    "answers",
    "found",
    "wallclock_ms",
    "unify_attempts",
    "unify_successes",
    "call_unfolds",
    "overlap",
]


@dataclass
class BenchReport:
    program: str
    variant: str  # original | conspd
    answers: int
    found: int
    wallclock_ms: float
    unify_attempts: int
    unify_successes: int
    call_unfolds: int
    overlap: int
    budget_exhausted: bool = False

    def row(self) -> dict:
        d = asdict(self)
        d["wallclock_ms"] = f"{self.wallclock_ms:.3f}"
        return {k: d[k] for k in CSV_COLUMNS}


def answer_key(answer: dict, qvars) -> tuple:
    return tuple(show_term(answer[v]) for v in qvars)


def residual_program(rp: ResidualProgram, original: Program, prefix: Goal | None) -> Program:
    """The residual definitions plus whatever original relations the
    benchmark prefix needs."""
    prog = Program(dict(rp.definitions.definitions))
    if prefix is not None:
        for rel in original.reachable(sorted({c.rel for c in calls_in(prefix)})):
            if rel not in prog:
                prog.add(original[rel])
    return prog


def timed_runs(program: Program, goal: Goal, qvars, n: int, runs: int, budget) -> tuple[RunResult, float]:
    times = []
    res = None
    for _ in range(max(1, runs)):
        t0 = time.perf_counter()
        res = run(program, goal, n, budget=budget, query_vars=qvars)
        times.append((time.perf_counter() - t0) * 1000.0)
    return res, statistics.median(times)


def bench_source(name: str, src: Source, n: int, runs: int = 1, budget: int | None = None,
                 residual: ResidualProgram | None = None) -> list[BenchReport]:
    """Run the file's query on the original program and on its
    specialization; the optional prefix goal is conjoined to both."""
    if src.query is None:
        raise ValueError(f"{name}: no query to benchmark")
    qvars = src.query_vars
    if residual is None:
        residual, _ = specialize(src.program, src.query, qvars)
    prefix = src.prefix
    orig_goal = src.query if prefix is None else conj(prefix, src.query)
    spec_goal = residual.query() if prefix is None else conj(prefix, residual.query())
    spec_prog = residual_program(residual, src.program, prefix)

    # The entry may have lost parameters to filtering; compare on what is left.
    kept = [v for v in qvars if v in set(residual.entry_params)]
    o, o_ms = timed_runs(src.program, orig_goal, qvars, n, runs, budget)
    s, s_ms = timed_runs(spec_prog, spec_goal, qvars, n, runs, budget)
    o_keys = {answer_key(a, kept) for a in o.answers}
    s_keys = {answer_key(a, kept) for a in s.answers}

    def report(variant, r, ms, overlap):
        st = r.stats
        return BenchReport(name, variant, n, len(r.answers), ms, st.unify_attempts,
                           st.unify_successes, st.call_unfolds, overlap, r.budget_exhausted)

    return [
        report("original", o, o_ms, len(o_keys)),
        report("conspd", s, s_ms, len(o_keys & s_keys)),
    ]


def corpus_files(directory) -> list[Path]:
    return sorted(Path(directory).glob("*.mk"))


def bench_corpus(directory, n: int, runs: int = 1, budget: int | None = None, only=None) -> list[BenchReport]:
    out = []
    for path in corpus_files(directory):
        if only and path.stem not in only:
            continue
        src = parse(path.read_text(encoding="utf-8"))
        if src.query is None:
            continue
        out.extend(bench_source(path.stem, src, n, runs, budget))
    return out


def write_csv(reports, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
