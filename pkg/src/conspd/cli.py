"""Command line interface.

    conspd run FILE [--goal G] [--answers N] [--budget S] [--csv OUT]
    conspd specialize FILE [--goal G] [-o OUT] [--no-filter]
    conspd graph FILE [--goal G] --dot OUT [--isolation CALL]
    conspd bench [DIR] [--answers N] [--runs R] [--budget S] [--csv OUT]
    conspd normalize FILE [--goal G | --relation NAME]

Exit codes: 0 success, 1 user error, 2 internal error, 3 step budget
exhausted (partial answers are still printed).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from importlib.resources import files
from pathlib import Path

from . import __version__
from .bench import CSV_COLUMNS, BenchReport, bench_corpus, write_csv
from .driver import DriveError, drive, unfold_in_isolation
from .dot import graph_to_dot, isolation_to_dot
from .engine import default_budget, format_answer, run
from .kernel import EMPTY, VarSupply, apply, show_term
from .normalizer import normalize
from .parser import ParseError, Source, parse, parse_goal, render
from .residualizer import ResidualError, specialize
from .syntax import Call, ProgramError, free_vars, goal_terms

EXIT_OK, EXIT_USER, EXIT_INTERNAL, EXIT_BUDGET = 0, 1, 2, 3


class UserError(Exception):
    pass


def default_corpus() -> Path:
    return Path(str(files("conspd") / "corpus"))


def _load(path: str) -> Source:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse(text)


def _goal(src: Source, text: str | None):
    """The goal to work on: ``--goal`` if given, else the file's query."""
    if text is not None:
        return parse_goal(text, src.program)
    if src.query is None:
        raise UserError("no (query ...) in file and no --goal given")
    qv = src.query_vars or tuple(free_vars(src.query))
    return src.query, qv


def _budget(args) -> int | None:
    return args.budget if args.budget is not None else default_budget()


def cmd_run(args) -> int:
    src = _load(args.file)
    goal, qv = _goal(src, args.goal)
    t0 = time.perf_counter()
    res = run(src.program, goal, args.answers, budget=_budget(args), query_vars=qv)
    ms = (time.perf_counter() - t0) * 1000.0
    for a in res.answers:
        print(format_answer(a) if a else "succeed")
    st = res.stats
    print(
        f"# answers={len(res.answers)} unify_attempts={st.unify_attempts} "
        f"unify_successes={st.unify_successes} call_unfolds={st.call_unfolds} "
        f"steps={st.steps_forced} wallclock_ms={ms:.1f}",
        file=sys.stderr,
    )
    if args.csv:
        rep = BenchReport(Path(args.file).stem, "original", args.answers, len(res.answers), ms,
                          st.unify_attempts, st.unify_successes, st.call_unfolds, len(res.answers),
                          res.budget_exhausted)
        with open(args.csv, "w", encoding="utf-8") as fh:
            write_csv([rep], fh)
    if res.budget_exhausted:
        print(f"# step budget exhausted after {len(res.answers)} answers (partial result)", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_specialize(args) -> int:
    src = _load(args.file)
    goal, qv = _goal(src, args.goal)
    rp, graph = specialize(src.program, goal, qv, filter_args=not args.no_filter)
    text = render(rp.definitions, rp.query(), rp.entry_params)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        sidecar = args.provenance or args.output + ".provenance.json"
    else:
        sys.stdout.write(text)
        sidecar = args.provenance
    if sidecar:
        info = {
            "entry": rp.entry,
            "entry_params": [str(v) for v in rp.entry_params],
            "relations": {
                name: {"node": nid, "configuration": [str(c) for c in graph[nid].conf]}
                for name, nid in rp.provenance.items()
            },
            "copied_from_original": [d.name for d in rp.definitions if d.name not in rp.provenance],
            "graph_nodes": len(graph),
        }
        Path(sidecar).write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_graph(args) -> int:
    src = _load(args.file)
    if args.isolation:
        g, _ = parse_goal(args.isolation, src.program)
        if not isinstance(g, Call):
            raise UserError("--isolation expects a single (call ...) goal")
        supply = VarSupply(src.program.max_var_index() + 1)
        supply.reserve_above(*goal_terms(g))
        tree = unfold_in_isolation(src.program, g, EMPTY, supply)
        text = isolation_to_dot(tree, g.rel)
    else:
        goal, qv = _goal(src, args.goal)
        text = graph_to_dot(drive(src.program, goal, qv), Path(args.file).stem)
    if args.dot and args.dot != "-":
        Path(args.dot).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    directory = Path(args.directory) if args.directory else default_corpus()
    if not directory.is_dir():
        raise UserError(f"not a directory: {directory}")
    reports = bench_corpus(directory, args.answers, args.runs, _budget(args), only=args.only)
    if args.csv and args.csv != "-":
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(reports, fh)
    else:
        write_csv(reports, sys.stdout)
    for r in reports:
        if r.budget_exhausted:
            print(f"# {r.program}/{r.variant}: step budget exhausted", file=sys.stderr)
    return EXIT_OK


def cmd_normalize(args) -> int:
    src = _load(args.file)
    supply = VarSupply(src.program.max_var_index() + 1)
    if args.relation:
        if args.relation not in src.program:
            raise UserError(f"no relation {args.relation}")
        d = src.program[args.relation]
        cg = normalize(d.body, EMPTY, supply, env={p: p for p in d.params})
        shown = list(d.params)
    else:
        goal, qv = _goal(src, args.goal)
        supply.reserve_above(*goal_terms(goal), *qv)
        cg = normalize(goal, EMPTY, supply)
        shown = list(qv)
    for i, cj in enumerate(cg):
        calls = " ∧ ".join(str(c) for c in cj.applied_calls()) or "⊤"
        binds = [f"{v} ↦ {show_term(apply(cj.subst, v), True)}" for v in shown if apply(cj.subst, v) != v]
        print(f"{i}: {calls}  ⟨{', '.join(binds)}⟩")
    if not cg.disjuncts:
        print("fail")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conspd", description="Relational interpreter and conservative partial deduction.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=None, help="seed for Python's random module")
    sub = p.add_subparsers(dest="command", required=True)

    def goal_opt(sp):
        sp.add_argument("--goal", help="goal to use instead of the file's query")

    def budget_opt(sp):
        sp.add_argument("--budget", type=int, default=None,
                        help="maximum stream steps (default: $CONSPD_BUDGET, else unlimited)")

    sp = sub.add_parser("run", help="evaluate a query")
    sp.add_argument("file")
    goal_opt(sp)
    sp.add_argument("--answers", "-n", type=int, default=10)
    budget_opt(sp)
    sp.add_argument("--csv", help="write counters as CSV")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("specialize", help="specialize a program for a goal")
    sp.add_argument("file")
    goal_opt(sp)
    sp.add_argument("-o", "--output", help="residual program file (default: stdout)")
    sp.add_argument("--provenance", help="provenance JSON (default: OUTPUT.provenance.json)")
    sp.add_argument("--no-filter", action="store_true", help="skip redundant argument filtering")
    sp.set_defaults(func=cmd_specialize)

    sp = sub.add_parser("graph", help="export the process graph as DOT")
    sp.add_argument("file")
    goal_opt(sp)
    sp.add_argument("--dot", help="output file (default: stdout)")
    sp.add_argument("--isolation", metavar="CALL", help="export the isolation tree of CALL instead")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("bench", help="compare original and specialized programs")
    sp.add_argument("directory", nargs="?", help="corpus directory (default: bundled corpus)")
    sp.add_argument("--answers", "-n", type=int, default=1000)
    sp.add_argument("--runs", "-r", type=int, default=1)
    budget_opt(sp)
    sp.add_argument("--csv", help="output CSV (default: stdout); columns: " + ",".join(CSV_COLUMNS))
    sp.add_argument("--only", nargs="*", help="restrict to these program names")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("normalize", help="print the canonical normal form of a goal")
    sp.add_argument("file")
    goal_opt(sp)
    sp.add_argument("--relation", help="normalize this relation's body instead")
    sp.set_defaults(func=cmd_normalize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    for name in ("answers", "runs", "budget"):
        v = getattr(args, name, None)
        if v is not None and v < (1 if name == "runs" else 0):
            print(f"conspd: error: --{name} must be {'positive' if name == 'runs' else 'non-negative'}",
                  file=sys.stderr)
            return EXIT_USER
    try:
        return args.func(args)
    except (UserError, ParseError, ProgramError, ValueError) as exc:
        print(f"conspd: error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (DriveError, ResidualError) as exc:
        print(f"conspd: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"conspd: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
