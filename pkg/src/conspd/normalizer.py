"""Canonical normal form: a disjunction of conjunctions of relation calls,
each paired with the substitution computed from its unifications."""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import EMPTY, Ctor, Substitution, Var, VarSupply, apply, unify, vars_of
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
    conj,
    disj,
    fresh,
)


@dataclass(frozen=True)
class CanonicalConjunct:
    calls: tuple
    subst: Substitution
    fresh_vars: frozenset = field(default_factory=frozenset)

    def applied_calls(self) -> tuple:
        return apply_calls(self.subst, self.calls)


@dataclass(frozen=True)
class CanonicalGoal:
    disjuncts: tuple

    def __len__(self):
        return len(self.disjuncts)

    def __iter__(self):
        return iter(self.disjuncts)


def apply_call(s: Substitution, c: Call) -> Call:
    return Call(c.rel, tuple(apply(s, a) for a in c.args))


def apply_calls(s: Substitution, calls) -> tuple:
    return tuple(apply_call(s, c) for c in calls)


def _inst(t, env):
    if type(t) is Var:
        return env.get(t, t)
    if not t.args:
        return t
    return Ctor(t.name, tuple(_inst(a, env) for a in t.args))


def normalize(
    goal: Goal,
    s: Substitution = EMPTY,
    supply: VarSupply | None = None,
    env: dict | None = None,
    stub_calls: bool = False,
) -> CanonicalGoal:
    """Distribute conjunction over disjunction left to right, hoist every
    ``fresh`` into a new variable from ``supply`` and fold unifications into
    the per-conjunct substitution.  Failed conjuncts are dropped.

    ``env`` maps syntactic variables (relation parameters, binders) to terms.
    With ``stub_calls`` every call is treated as a trivially succeeding
    unification of a fresh variable with itself.
    """
    if supply is None:
        supply = VarSupply()
    env = {} if env is None else env

    def go(g, env, s, acc_calls, acc_fresh):
        # Returns a list of (calls, subst, fresh) triples.
        t = type(g)
        if t is Unify:
            s2 = unify(_inst(g.left, env), _inst(g.right, env), s)
            return [] if s2 is None else [(acc_calls, s2, acc_fresh)]
        if t is Call:
            if stub_calls:
                v = supply.fresh("_")
                s2 = unify(v, v, s)
                return [(acc_calls, s2, acc_fresh | {v})]
            c = Call(g.rel, tuple(_inst(a, env) for a in g.args))
            return [(acc_calls + (c,), s, acc_fresh)]
        if t is Conj:
            out = []
            for calls1, s1, f1 in go(g.left, env, s, acc_calls, acc_fresh):
                out.extend(go(g.right, env, s1, calls1, f1))
            return out
        if t is Disj:
            return go(g.left, env, s, acc_calls, acc_fresh) + go(g.right, env, s, acc_calls, acc_fresh)
        if t is Fresh:
            v = supply.fresh(g.var.hint)
            env2 = dict(env)
            env2[g.var] = v
            return go(g.body, env2, s, acc_calls, acc_fresh | {v})
        if t is Succeed:
            return [(acc_calls, s, acc_fresh)]
        if t is Fail:
            return []
        raise TypeError(f"not a goal: {g!r}")

    parts = go(goal, env, s, (), frozenset())
    return CanonicalGoal(tuple(CanonicalConjunct(c, sub, fr) for c, sub, fr in parts))


def unfold(program: Program, call: Call, s: Substitution, supply: VarSupply) -> CanonicalGoal:
    """One-step unfolding: the normalized body of ``call``'s relation with the
    actual arguments substituted for the parameters."""
    d = program[call.rel]
    return normalize(d.body, s, supply, env=dict(zip(d.params, call.args)))


def max_branch_count(program: Program) -> dict[str, int]:
    """Number of disjuncts of each relation's body when called on distinct
    fresh variables with every call replaced by a trivially succeeding goal."""
    supply = VarSupply(program.max_var_index() + 1)
    out = {}
    for d in program:
        args = {p: supply.fresh(p.hint) for p in d.params}
        out[d.name] = len(normalize(d.body, EMPTY, supply, env=args, stub_calls=True))
    return out


def to_goal(cg: CanonicalGoal, interface) -> Goal:
    """Re-express a canonical goal as an ordinary goal over ``interface``:
    each conjunct becomes its bindings for the interface variables and its
    calls, under a ``fresh`` for every other variable."""
    interface = list(interface)
    keep = set(interface)
    branches = []
    for c in cg:
        eqs = []
        for v in interface:
            t = apply(c.subst, v)
            if t != v:
                eqs.append(Unify(v, t))
        calls = c.applied_calls()
        body = conj(*eqs, *calls)
        inner = [v for v in vars_of([e.right for e in eqs] + [a for cl in calls for a in cl.args]) if v not in keep]
        branches.append(fresh(inner, body))
    return disj(*branches)
