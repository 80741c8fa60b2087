"""Shared test helpers: corpus loading and independent reference evaluators."""

from __future__ import annotations

import itertools
from pathlib import Path

from conspd.kernel import FALSE, NIL, TRUE, ZERO, Ctor, Var, cons, from_list, peano
from conspd.engine import run
from conspd.parser import Source, parse
from conspd.syntax import Call, rename_goal

CORPUS = Path(__file__).resolve().parents[1] / "src" / "conspd" / "corpus"
BOOL_VARIANTS = ["bool_first_plain", "bool_first_nando", "bool_last_plain", "bool_last_nando"]


def load(name: str) -> Source:
    return parse((CORPUS / f"{name}.mk").read_text(encoding="utf-8"))


def to_int(t) -> int:
    """Peano term to int; raises on anything else."""
    n = 0
    while isinstance(t, Ctor) and t.name == "succ":
        n += 1
        (t,) = t.args
    if not (isinstance(t, Ctor) and t.name == "zero"):
        raise ValueError(f"not a Peano numeral: {t}")
    return n


def to_list(t) -> list:
    out = []
    while isinstance(t, Ctor) and t.name == "cons":
        out.append(t.args[0])
        t = t.args[1]
    if t != NIL:
        raise ValueError(f"not a proper list: {t}")
    return out


def decide(program, goal, budget=500_000) -> bool:
    """Whether a ground goal succeeds; the budget guards against divergence."""
    r = run(program, goal, 1, budget=budget)
    assert not r.budget_exhausted
    return bool(r.answers)


def entry_call(rp, values: dict):
    return Call(rp.entry, tuple(values[p] for p in rp.entry_params))


def orig_call(src, values: dict):
    return rename_goal(src.query, values)


def small_lists(maxlen: int, items):
    for k in range(maxlen + 1):
        for xs in itertools.product(items, repeat=k):
            yield list(xs)


# Propositional formulas ----------------------------------------------------


def prop_eval(fm, env: list[bool]) -> bool | None:
    """Reference evaluator; ``None`` when a variable index is out of range."""
    name = fm.name
    if name == "var":
        i = to_int(fm.args[0])
        return env[i] if i < len(env) else None
    if name == "neg":
        v = prop_eval(fm.args[0], env)
        return None if v is None else not v
    a, b = (prop_eval(x, env) for x in fm.args)
    if a is None or b is None:
        return None
    return (a and b) if name == "conj" else (a or b)


def formulas(depth: int, nvars: int) -> list:
    """Every formula of depth at most ``depth`` over variables 0..nvars-1."""
    level = [Ctor("var", (peano(i),)) for i in range(nvars)]
    allf = list(level)
    for _ in range(depth):
        new = [Ctor("neg", (f,)) for f in allf]
        new += [Ctor(op, (a, b)) for op in ("conj", "disj") for a in allf for b in allf]
        allf = list(dict.fromkeys(allf + new))
    return allf


def formula_depth(fm) -> int:
    if fm.name == "var":
        return 0
    return 1 + max(formula_depth(a) for a in fm.args)


def assignments(nvars: int):
    return [list(bits) for bits in itertools.product([False, True], repeat=nvars)]


def bool_term(b: bool):
    return TRUE if b else FALSE


def env_term(env: list[bool]):
    return from_list([bool_term(b) for b in env])


# Arithmetic expressions ----------------------------------------------------


def arith_eval(fm) -> int | None:
    """Reference evaluator for num/sum/prod/sub over naturals; subtraction
    below zero has no value."""
    if fm.name == "num":
        return to_int(fm.args[0])
    a, b = (arith_eval(x) for x in fm.args)
    if a is None or b is None:
        return None
    if fm.name == "sum":
        return a + b
    if fm.name == "prod":
        return a * b
    if fm.name == "sub":
        return a - b if a >= b else None
    raise ValueError(fm.name)


# Typechecker -----------------------------------------------------------------

INT, BOOL = Ctor("integer"), Ctor("boolean")


def type_of(term, gamma: list):
    """Reference typing of the small expression language; ``None`` if ill-typed.
    Unbound leaf payloads (constants' values) are allowed."""
    if isinstance(term, Var):
        raise ValueError("unbound term position")
    n = term.name
    if n == "bconst":
        return BOOL
    if n == "iconst":
        return INT
    if n == "var":
        i = to_int(term.args[0])
        return gamma[i] if i < len(gamma) else None
    if n in ("plus", "mult", "lt"):
        a, b = (type_of(x, gamma) for x in term.args)
        if a == INT and b == INT:
            return INT if n != "lt" else BOOL
        return None
    if n == "eq":
        a, b = (type_of(x, gamma) for x in term.args)
        return BOOL if a is not None and a == b else None
    if n == "let":
        tv = type_of(term.args[0], gamma)
        return None if tv is None else type_of(term.args[1], [tv] + gamma)
    if n == "if":
        c, t, e = (type_of(x, gamma) for x in term.args)
        return t if c == BOOL and t is not None and t == e else None
    raise ValueError(n)


__all__ = [
    "BOOL", "BOOL_VARIANTS", "CORPUS", "INT", "arith_eval", "assignments", "bool_term", "cons",
    "decide", "entry_call", "orig_call", "small_lists", "env_term", "formula_depth", "formulas", "load", "peano", "prop_eval", "to_int", "to_list",
    "type_of", "ZERO",
]
