"""Interleaving-search interpreter for the relational core.

A stream is ``None`` (empty), a pair ``(subst, tail)`` (mature) or a
zero-argument callable (immature).  Forcing an immature stream performs one
evaluation step.  Relation calls are always suspended, which keeps the work
per step bounded and makes disjunction fair.
"""

from __future__ import annotations

import gc
import os
import sys
import threading
from dataclasses import dataclass, field

from .kernel import EMPTY, Ctor, Substitution, Var, VarSupply, apply, term_vars, unify
from .syntax import (
    Call,
    Conj,
    Disj,
    Fail,
    Fresh,
    Goal,
    Program,
    Succeed,
    Unify,
    check_goal,
    free_vars,
    goal_terms,
)

BUDGET_ENV = "CONSPD_BUDGET"


@dataclass
class EvalStats:
    unify_attempts: int = 0
    unify_successes: int = 0
    call_unfolds: int = 0
    steps_forced: int = 0


@dataclass
class RunResult:
    answers: list = field(default_factory=list)
    stats: EvalStats = field(default_factory=EvalStats)
    budget_exhausted: bool = False
    exhausted: bool = False  # stream ended before n answers
    query_vars: tuple = ()


def _inst(t, env):
    if type(t) is Var:
        return env.get(t, t)
    if not t.args:
        return t
    return Ctor(t.name, tuple([_inst(a, env) for a in t.args]))


def mplus(s1, s2):
    if s1 is None:
        return s2
    if callable(s1):
        return lambda: mplus(s2, s1())
    return (s1[0], mplus(s1[1], s2))


def bind(stream, k):
    if stream is None:
        return None
    if callable(stream):
        return lambda: bind(stream(), k)
    return mplus(k(stream[0]), bind(stream[1], k))


class Evaluator:
    """One evaluation session: owns the fresh-variable counter and the counters."""

    def __init__(self, program: Program, supply: VarSupply | None = None, stats: EvalStats | None = None):
        self.program = program
        self.defs = program.definitions
        self.supply = supply or VarSupply()
        self.stats = stats or EvalStats()

    def eval(self, g: Goal, env: dict, s: Substitution):
        t = type(g)
        if t is Unify:
            st = self.stats
            st.unify_attempts += 1
            s2 = unify(_inst(g.left, env), _inst(g.right, env), s)
            if s2 is None:
                return None
            st.unify_successes += 1
            return (s2, None)
        if t is Conj:
            right = g.right
            return bind(self.eval(g.left, env, s), lambda s1: self.eval(right, env, s1))
        if t is Disj:
            return mplus(self.eval(g.left, env, s), self.eval(g.right, env, s))
        if t is Fresh:
            env2 = dict(env)
            while type(g) is Fresh:
                env2[g.var] = self.supply.fresh(g.var.hint)
                g = g.body
            return self.eval(g, env2, s)
        if t is Call:
            args = [_inst(a, env) for a in g.args]
            d = self.defs[g.rel]

            def step():
                self.stats.call_unfolds += 1
                return self.eval(d.body, dict(zip(d.params, args)), s)

            return step
        if t is Succeed:
            return (s, None)
        if t is Fail:
            return None
        raise TypeError(f"not a goal: {g!r}")


def eval_goal(program: Program, goal: Goal, s: Substitution = EMPTY, session: Evaluator | None = None):
    """Answer stream of ``goal`` under ``s``; free variables of ``goal`` are
    treated as semantic variables."""
    if session is None:
        session = Evaluator(program)
        session.supply.reserve_above(*goal_terms(goal), *[v for v in s])
    return session.eval(goal, {}, s)


def reify(s: Substitution, query_vars) -> dict:
    """Resolve ``query_vars`` under ``s``; unbound variables become ``_.0``, ``_.1``..."""
    values = [apply(s, v) for v in query_vars]
    names: dict[Var, Var] = {}
    for val in values:
        for v in term_vars(val):
            if v not in names:
                i = len(names)
                names[v] = Var(-1 - i, f"_.{i}")
    from .kernel import rename_term

    return {q: rename_term(val, names) for q, val in zip(query_vars, values)}


def force_all(stream, n: int, stats: EvalStats, budget: int | None):
    """Collect up to ``n`` substitutions.  Returns (subs, budget_hit, ended)."""
    out = []
    while len(out) < n:
        if stream is None:
            return out, False, True
        if callable(stream):
            if budget is not None and stats.steps_forced >= budget:
                return out, True, False
            stats.steps_forced += 1
            stream = stream()
        else:
            out.append(stream[0])
            stream = stream[1]
    return out, False, False


def default_budget() -> int | None:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else None


def run(program: Program, query: Goal, n: int, budget: int | None = None, query_vars=None) -> RunResult:
    """Force the answer stream of ``query`` until ``n`` answers or exhaustion.

    Answers are dicts from query variable to reified term.  ``budget`` bounds
    the number of stream forces; when hit, ``budget_exhausted`` is set and the
    answers found so far are returned.
    """
    if n < 0:
        raise ValueError("answer count must be non-negative")
    check_goal(program, query)
    qvars = tuple(free_vars(query) if query_vars is None else query_vars)
    session = Evaluator(program)
    session.supply.reserve_above(*goal_terms(query), *qvars)
    result = RunResult(stats=session.stats, query_vars=qvars)
    if n == 0:
        return result

    def work():
        # Streams allocate many short-lived closures; the cyclic collector
        # rescanning them makes long runs quadratic, so it is paused here.
        enabled = gc.isenabled()
        gc.disable()
        try:
            stream = session.eval(query, {}, EMPTY)
            subs, hit, ended = force_all(stream, n, session.stats, budget)
            return [reify(s, qvars) for s in subs], hit, ended
        finally:
            if enabled:
                gc.enable()

    result.answers, hit, ended = deep_call(work)
    result.budget_exhausted = hit
    result.exhausted = ended
    return result


_STACK_BYTES = 512 * 1024 * 1024
_RECURSION = 400_000
_local = threading.local()


def deep_call(fn, *args, **kwargs):
    """Run ``fn`` on a thread with a large stack so deeply nested streams and
    recursive graph walks do not hit the interpreter's recursion limit."""
    if getattr(_local, "deep", False):
        return fn(*args, **kwargs)
    box: dict = {}

    def target():
        _local.deep = True
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised on the caller's thread
            box["error"] = exc

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, _RECURSION))
    old_size = threading.stack_size(_STACK_BYTES)
    try:
        th = threading.Thread(target=target, name="conspd-deep")
        th.start()
        th.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box["value"]


def format_answer(answer: dict) -> str:
    from .kernel import show_term

    return ", ".join(f"{v} = {show_term(t, bare_constants=True)}" for v, t in answer.items())
