"""Control predicates for driving: variant checks, homeomorphic embedding of
conjunctions and the less-branching call selection."""

from __future__ import annotations

import enum
from functools import cached_property

import networkx as nx

from .kernel import EMPTY, Var, VarSupply
from .normalizer import max_branch_count, unfold
from .syntax import Call, Program


class CallClass(enum.IntEnum):
    """Ordered by selection priority (lower is preferred)."""

    STATIC = 0
    DETERMINISTIC = 1
    LESS_BRANCHING = 2
    UNSAFE = 3


def is_renaming(c1, c2) -> dict | None:
    """Variable bijection mapping configuration ``c1`` onto ``c2``, if the two
    are equal up to consistent renaming."""
    if len(c1) != len(c2):
        return None
    fwd: dict[Var, Var] = {}
    bwd: dict[Var, Var] = {}
    stack = []
    for a, b in zip(c1, c2):
        if a.rel != b.rel or len(a.args) != len(b.args):
            return None
        stack.extend(zip(a.args, b.args))
    while stack:
        x, y = stack.pop()
        if type(x) is Var:
            if type(y) is not Var:
                return None
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return None
        elif type(y) is Var or x.name != y.name or len(x.args) != len(y.args):
            return None
        else:
            stack.extend(zip(x.args, y.args))
    return fwd


def term_embeds(s, t) -> bool:
    """``s`` is homeomorphically embedded in ``t`` (variables embed in variables)."""
    if type(s) is Var and type(t) is Var:
        return True
    if type(t) is Var:
        return False
    if type(s) is not Var and s.name == t.name and len(s.args) == len(t.args):
        if all(term_embeds(a, b) for a, b in zip(s.args, t.args)):
            return True
    return any(term_embeds(s, b) for b in t.args)


def call_embeds(a: Call, b: Call) -> bool:
    return (
        a.rel == b.rel
        and len(a.args) == len(b.args)
        and all(term_embeds(x, y) for x, y in zip(a.args, b.args))
    )


def embeds(c1, c2) -> bool:
    """Conjunction ``c1`` embeds in ``c2``: an order-preserving subsequence of
    ``c2`` couples call-wise with ``c1``."""
    j = 0
    n = len(c2)
    # Greedy leftmost matching is optimal for subsequence embedding.
    for a in c1:
        while j < n and not call_embeds(a, c2[j]):
            j += 1
        if j == n:
            return False
        j += 1
    return True


class Analysis:
    """Per-program facts used by the control: recursive relations and the
    maximal branching of every relation."""

    def __init__(self, program: Program):
        self.program = program

    @cached_property
    def branch_limits(self) -> dict[str, int]:
        return max_branch_count(self.program)

    @cached_property
    def recursive(self) -> frozenset:
        g = nx.DiGraph()
        for name, callees in self.program.call_graph().items():
            g.add_node(name)
            for c in callees:
                g.add_edge(name, c)
        rec = set()
        for comp in nx.strongly_connected_components(g):
            if len(comp) > 1:
                rec |= comp
            else:
                (r,) = comp
                if g.has_edge(r, r):
                    rec.add(r)
        return frozenset(rec)

    def is_static(self, rel: str) -> bool:
        """Non-recursive: no cycle is reachable from ``rel`` in the call graph."""
        return not any(r in self.recursive for r in self.program.reachable([rel]))

    def unfold_count(self, call: Call, supply: VarSupply) -> int:
        return len(unfold(self.program, call, EMPTY, supply))

    def classify(self, call: Call, supply: VarSupply) -> CallClass:
        if self.is_static(call.rel):
            return CallClass.STATIC
        n = self.unfold_count(call, supply)
        if n == 1:
            return CallClass.DETERMINISTIC
        if n < self.branch_limits[call.rel]:
            return CallClass.LESS_BRANCHING
        return CallClass.UNSAFE


def classify_call(program: Program, branch_limits, conj, index: int, supply: VarSupply | None = None,
                  analysis: Analysis | None = None) -> CallClass:
    a = analysis or Analysis(program)
    if branch_limits is not None:
        a.__dict__["branch_limits"] = branch_limits
    supply = supply or VarSupply(_max_idx(program, conj) + 1)
    return a.classify(conj[index], supply)


def candidates(analysis: Analysis, conj, supply: VarSupply) -> list[tuple[int, CallClass]]:
    """Selectable positions ordered by class priority, then leftmost."""
    classes = [(analysis.classify(c, supply), i) for i, c in enumerate(conj)]
    return [(i, k) for k, i in sorted(classes) if k is not CallClass.UNSAFE]


def select_call(program: Program, branch_limits, conj, supply: VarSupply | None = None,
                analysis: Analysis | None = None) -> int | None:
    """Leftmost static call, else leftmost deterministic, else leftmost
    less-branching; ``None`` when every call is unsafe."""
    a = analysis or Analysis(program)
    if branch_limits is not None:
        a.__dict__["branch_limits"] = branch_limits
    supply = supply or VarSupply(_max_idx(program, conj) + 1)
    found = candidates(a, conj, supply)
    return found[0][0] if found else None


def _max_idx(program: Program, conj) -> int:
    from .kernel import vars_of

    m = program.max_var_index()
    for v in vars_of(a for c in conj for a in c.args):
        m = max(m, v.idx)
    return m
