"""Goals, relation definitions and programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .kernel import Ctor, Term, Var, rename_term, term_vars, vars_of


class ProgramError(Exception):
    """A program or goal is not well formed."""


@dataclass(frozen=True)
class Unify:
    left: Term
    right: Term


@dataclass(frozen=True)
class Conj:
    left: "Goal"
    right: "Goal"


@dataclass(frozen=True)
class Disj:
    left: "Goal"
    right: "Goal"


@dataclass(frozen=True)
class Fresh:
    var: Var
    body: "Goal"


@dataclass(frozen=True)
class Call:
    rel: str
    args: tuple

    def __str__(self):
        from .kernel import show_term

        return f"{self.rel}({' '.join(show_term(a, True) for a in self.args)})"


@dataclass(frozen=True)
class Succeed:
    pass


@dataclass(frozen=True)
class Fail:
    pass


Goal = Union[Unify, Conj, Disj, Fresh, Call, Succeed, Fail]

SUCCEED = Succeed()
FAIL = Fail()


def conj(*goals: Goal) -> Goal:
    """Right-associated conjunction; the empty conjunction is ``Succeed``."""
    goals = [g for g in goals if not isinstance(g, Succeed)]
    if not goals:
        return SUCCEED
    out = goals[-1]
    for g in reversed(goals[:-1]):
        out = Conj(g, out)
    return out


def disj(*goals: Goal) -> Goal:
    """Right-associated disjunction; the empty disjunction is ``Fail``."""
    goals = [g for g in goals if not isinstance(g, Fail)]
    if not goals:
        return FAIL
    out = goals[-1]
    for g in reversed(goals[:-1]):
        out = Disj(g, out)
    return out


def fresh(variables, body: Goal) -> Goal:
    for v in reversed(list(variables)):
        body = Fresh(v, body)
    return body


def conjuncts(g: Goal) -> list[Goal]:
    if isinstance(g, Conj):
        return conjuncts(g.left) + conjuncts(g.right)
    if isinstance(g, Succeed):
        return []
    return [g]


def disjuncts(g: Goal) -> list[Goal]:
    if isinstance(g, Disj):
        return disjuncts(g.left) + disjuncts(g.right)
    if isinstance(g, Fail):
        return []
    return [g]


def subgoals(g: Goal) -> Iterator[Goal]:
    stack = [g]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (Conj, Disj)):
            stack.append(g.right)
            stack.append(g.left)
        elif isinstance(g, Fresh):
            stack.append(g.body)


def calls_in(g: Goal) -> Iterator[Call]:
    return (x for x in subgoals(g) if isinstance(x, Call))


def goal_terms(g: Goal) -> Iterator[Term]:
    for x in subgoals(g):
        if isinstance(x, Unify):
            yield x.left
            yield x.right
        elif isinstance(x, Call):
            yield from x.args
        elif isinstance(x, Fresh):
            yield x.var


def free_vars(g: Goal) -> list[Var]:
    """Free variables of ``g`` in order of first occurrence."""
    out: list[Var] = []
    seen: set[Var] = set()

    def go(g, bound):
        if isinstance(g, Unify):
            terms = (g.left, g.right)
        elif isinstance(g, Call):
            terms = g.args
        elif isinstance(g, (Conj, Disj)):
            go(g.left, bound)
            go(g.right, bound)
            return
        elif isinstance(g, Fresh):
            go(g.body, bound | {g.var})
            return
        else:
            return
        for v in vars_of(terms):
            if v not in bound and v not in seen:
                seen.add(v)
                out.append(v)

    go(g, frozenset())
    return out


def rename_goal(g: Goal, mapping: dict) -> Goal:
    """Rename variables (including binders) according to ``mapping``."""
    if isinstance(g, Unify):
        return Unify(rename_term(g.left, mapping), rename_term(g.right, mapping))
    if isinstance(g, Call):
        return Call(g.rel, tuple(rename_term(a, mapping) for a in g.args))
    if isinstance(g, Conj):
        return Conj(rename_goal(g.left, mapping), rename_goal(g.right, mapping))
    if isinstance(g, Disj):
        return Disj(rename_goal(g.left, mapping), rename_goal(g.right, mapping))
    if isinstance(g, Fresh):
        return Fresh(mapping.get(g.var, g.var), rename_goal(g.body, mapping))
    return g


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple
    body: Goal

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass
class Program:
    """Relation definitions keyed by name, in insertion order."""

    definitions: dict = field(default_factory=dict)

    def __contains__(self, name) -> bool:
        return name in self.definitions

    def __getitem__(self, name) -> Definition:
        return self.definitions[name]

    def __iter__(self):
        return iter(self.definitions.values())

    def __len__(self):
        return len(self.definitions)

    def add(self, d: Definition) -> None:
        if d.name in self.definitions:
            raise ProgramError(f"relation {d.name} defined twice")
        self.definitions[d.name] = d

    def arities(self) -> dict[str, int]:
        return {d.name: d.arity for d in self}

    def max_var_index(self) -> int:
        m = -1
        for d in self:
            for t in list(d.params) + list(goal_terms(d.body)):
                for v in term_vars(t):
                    m = max(m, v.idx)
        return m

    def call_graph(self) -> dict[str, set[str]]:
        return {d.name: {c.rel for c in calls_in(d.body)} for d in self}

    def reachable(self, roots) -> list[str]:
        graph = self.call_graph()
        order, seen = [], set()
        stack = list(reversed(list(roots)))
        while stack:
            r = stack.pop()
            if r in seen or r not in graph:
                continue
            seen.add(r)
            order.append(r)
            stack.extend(sorted(graph[r], reverse=True))
        return order

    def validate(self) -> None:
        """Check arities of calls and constructors, parameter distinctness and
        that every body variable is bound."""
        ctor_arity: dict[str, int] = {}
        for d in self:
            if len(set(d.params)) != len(d.params):
                raise ProgramError(f"{d.name}: repeated parameter")
            check_goal(self, d.body, bound=set(d.params), ctor_arity=ctor_arity, where=d.name)


def check_goal(program: Program, g: Goal, bound=None, ctor_arity=None, where="query") -> None:
    """Validate ``g`` against ``program``.  With ``bound=None`` free variables
    are allowed (query position); otherwise every variable must be bound."""
    ctor_arity = {} if ctor_arity is None else ctor_arity

    def check_term(t, scope):
        stack = [t]
        while stack:
            t = stack.pop()
            if type(t) is Var:
                if scope is not None and t not in scope:
                    raise ProgramError(f"{where}: unbound variable {t}")
            else:
                known = ctor_arity.setdefault(t.name, len(t.args))
                if known != len(t.args):
                    raise ProgramError(
                        f"{where}: constructor {t.name} used with arities {known} and {len(t.args)}"
                    )
                stack.extend(t.args)

    def go(g, scope):
        if isinstance(g, Unify):
            check_term(g.left, scope)
            check_term(g.right, scope)
        elif isinstance(g, Call):
            if g.rel not in program:
                raise ProgramError(f"{where}: call to undefined relation {g.rel}")
            if program[g.rel].arity != len(g.args):
                raise ProgramError(
                    f"{where}: {g.rel} expects {program[g.rel].arity} arguments, got {len(g.args)}"
                )
            for a in g.args:
                check_term(a, scope)
        elif isinstance(g, (Conj, Disj)):
            go(g.left, scope)
            go(g.right, scope)
        elif isinstance(g, Fresh):
            go(g.body, None if scope is None else scope | {g.var})

    go(g, None if bound is None else frozenset(bound))


def show_goal(g: Goal) -> str:
    from .kernel import show_term

    if isinstance(g, Unify):
        return f"{show_term(g.left, True)} == {show_term(g.right, True)}"
    if isinstance(g, Call):
        return str(g)
    if isinstance(g, Conj):
        return " & ".join(_paren(x) for x in conjuncts(g))
    if isinstance(g, Disj):
        return " | ".join(_paren(x) for x in disjuncts(g))
    if isinstance(g, Fresh):
        return f"fresh {g.var}. {show_goal(g.body)}"
    return "succeed" if isinstance(g, Succeed) else "fail"


def _paren(g: Goal) -> str:
    s = show_goal(g)
    return f"({s})" if isinstance(g, (Conj, Disj, Fresh)) else s


def ground_ctor_name(t: Term) -> str:
    """Compact identifier-safe name for a ground term, e.g. ``some_integer``."""
    if type(t) is Var:
        return str(t)
    if not t.args:
        return t.name
    return "_".join([t.name] + [ground_ctor_name(a) for a in t.args])


__all__ = [
    "Call", "Conj", "Ctor", "Definition", "Disj", "FAIL", "Fail", "Fresh", "Goal",
    "Program", "ProgramError", "SUCCEED", "Succeed", "Unify", "calls_in", "check_goal",
    "conj", "conjuncts", "disj", "disjuncts", "free_vars", "fresh", "goal_terms",
    "ground_ctor_name", "rename_goal", "show_goal", "subgoals",
]
