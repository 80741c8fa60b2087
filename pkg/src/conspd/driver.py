"""Driving: builds the process graph of a goal.

Configurations are conjunctions of relation calls with the current
substitution already applied; the substitution itself is kept on the node
but never inspected by folding or by the whistle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import Analysis, CallClass, candidates, embeds, is_renaming
from .kernel import EMPTY, Substitution, VarSupply, apply, vars_of
from .normalizer import apply_calls, normalize, unfold
from .syntax import Call, Goal, Program, free_vars, goal_terms


class DriveError(Exception):
    """Driving exceeded its node limit or met a malformed configuration."""


# ---------------------------------------------------------------------------
# Unfolding in isolation


@dataclass
class IsoNode:
    calls: tuple
    subst: Substitution
    unfolded: frozenset = frozenset()
    status: str = "open"  # expanded | subst | blocked | fail
    selected: int | None = None
    children: list = field(default_factory=list)


@dataclass(frozen=True)
class Leaf:
    kind: str  # "subst" | "rec" | "fail"
    subst: Substitution | None = None
    calls: tuple = ()


@dataclass
class IsolationTree:
    call: Call
    root: IsoNode
    size: int = 0
    truncated: bool = False

    @property
    def leaves(self) -> list[Leaf]:
        out = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.status == "expanded":
                stack.extend(reversed(n.children))
            elif n.status == "fail":
                out.append(Leaf("fail"))
            elif n.status == "subst":
                out.append(Leaf("subst", n.subst))
            else:
                out.append(Leaf("rec", n.subst, n.calls))
        return out

    def nodes(self):
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))


def unfold_in_isolation(
    program: Program,
    call: Call,
    s: Substitution = EMPTY,
    supply: VarSupply | None = None,
    analysis: Analysis | None = None,
    max_nodes: int = 20_000,
) -> IsolationTree:
    """Drive ``call`` alone, always expanding the leftmost call that is not a
    repeated recursive one.  A recursive relation is unfolded at most once
    per path; nothing is folded."""
    analysis = analysis or Analysis(program)
    if supply is None:
        supply = VarSupply(max(program.max_var_index(), *(v.idx for v in vars_of(call.args)), -1) + 1)
    recursive = analysis.recursive
    root = IsoNode((apply_calls(s, (call,))), s)
    tree = IsolationTree(call, root)
    stack = [root]
    while stack:
        node = stack.pop()
        tree.size += 1
        if tree.size > max_nodes:
            tree.truncated = True
            node.status = "blocked"
            continue
        if node.status == "fail":
            continue
        idx = next(
            (i for i, c in enumerate(node.calls) if not (c.rel in recursive and c.rel in node.unfolded)),
            None,
        )
        if idx is None:
            node.status = "blocked" if node.calls else "subst"
            continue
        c = node.calls[idx]
        node.status = "expanded"
        node.selected = idx
        seen = node.unfolded | {c.rel} if c.rel in recursive else node.unfolded
        cg = unfold(program, c, node.subst, supply)
        if not cg.disjuncts:
            node.children.append(IsoNode((), node.subst, seen, status="fail"))
        for cj in cg:
            calls = apply_calls(cj.subst, node.calls[:idx] + cj.calls + node.calls[idx + 1:])
            node.children.append(IsoNode(calls, cj.subst, seen))
        stack.extend(reversed(node.children))
    return tree


def leaves_acceptable(tree: IsolationTree) -> bool:
    """Every non-failing leaf is a computed substitution or a residual call
    whose substitution restricts some variable of the isolated call."""
    if tree.truncated:
        return False
    args = tree.root.calls[0].args
    for leaf in tree.leaves:
        if leaf.kind == "rec" and all(apply(leaf.subst, a) == a for a in args):
            return False
    return True


# ---------------------------------------------------------------------------
# Process graph


@dataclass
class ProcessNode:
    id: int
    kind: str  # disj | conj | split | success | fold | stop
    conf: tuple = ()
    subst: Substitution = EMPTY
    parent: int | None = None
    children: list = field(default_factory=list)
    how: str = ""  # conj nodes: isolation | unfold | split
    selected: int | None = None
    call_class: CallClass | None = None
    target: int | None = None  # fold nodes
    renaming: dict | None = None  # fold nodes: target variable -> this node's variable
    whistled_by: int | None = None


@dataclass
class ProcessGraph:
    root: int
    nodes: dict
    program: Program
    goal: Goal
    query_vars: tuple

    def __getitem__(self, nid) -> ProcessNode:
        return self.nodes[nid]

    def __len__(self):
        return len(self.nodes)

    def of_kind(self, kind: str) -> list[ProcessNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def ancestors(self, nid: int) -> list[int]:
        out = []
        p = self.nodes[nid].parent
        while p is not None:
            out.append(p)
            p = self.nodes[p].parent
        return out

    def fold_targets(self) -> list[int]:
        return sorted({n.target for n in self.nodes.values() if n.kind == "fold"})


class Driver:
    """One specialization session over ``program``."""

    def __init__(self, program: Program, max_nodes: int = 50_000, max_iso_nodes: int = 20_000):
        self.program = program
        self.analysis = Analysis(program)
        self.max_nodes = max_nodes
        self.max_iso_nodes = max_iso_nodes
        self.supply = VarSupply(program.max_var_index() + 1)
        self.nodes: dict[int, ProcessNode] = {}
        self.targets: list[int] = []  # conj nodes eligible as fold targets

    def _new(self, **kw) -> ProcessNode:
        if len(self.nodes) >= self.max_nodes:
            raise DriveError(f"process graph exceeded {self.max_nodes} nodes")
        n = ProcessNode(id=len(self.nodes), **kw)
        self.nodes[n.id] = n
        if n.parent is not None:
            self.nodes[n.parent].children.append(n.id)
        return n

    def drive(self, goal: Goal, query_vars=None) -> ProcessGraph:
        from .engine import deep_call

        qvars = tuple(free_vars(goal) if query_vars is None else query_vars)
        self.supply.reserve_above(*goal_terms(goal), *qvars)
        root = self._new(kind="disj")
        cg = normalize(goal, EMPTY, self.supply)

        def work():
            for cj in cg:
                self.drive_conj(cj.applied_calls(), cj.subst, (), root.id)

        deep_call(work)
        return ProcessGraph(root.id, self.nodes, self.program, goal, qvars)

    def drive_conj(self, conf: tuple, s: Substitution, ancestors: tuple, parent: int) -> int:
        if not conf:
            return self._new(kind="success", subst=s, parent=parent).id

        for t in self.targets:
            ren = is_renaming(self.nodes[t].conf, conf)
            if ren is not None:
                return self._new(kind="fold", conf=conf, subst=s, parent=parent, target=t, renaming=ren).id

        whistle = next((a for a in ancestors if embeds(self.nodes[a].conf, conf)), None)
        if whistle is not None and len(conf) == 1:
            return self._new(kind="stop", conf=conf, subst=s, parent=parent, whistled_by=whistle).id

        node = self._new(kind="conj", conf=conf, subst=s, parent=parent, whistled_by=whistle)
        path = ancestors + (node.id,)
        if whistle is None:
            for idx, klass in candidates(self.analysis, conf, self.supply):
                tree = unfold_in_isolation(
                    self.program, conf[idx], s, self.supply, self.analysis, self.max_iso_nodes
                )
                if not leaves_acceptable(tree):
                    continue
                node.how, node.selected, node.call_class = "isolation", idx, klass
                self.targets.append(node.id)
                for leaf in tree.leaves:
                    if leaf.kind == "fail":
                        continue
                    new = apply_calls(leaf.subst, conf[:idx] + leaf.calls + conf[idx + 1:])
                    self.drive_conj(new, leaf.subst, path, node.id)
                return node.id

            if len(conf) == 1:
                node.how, node.selected, node.call_class = "unfold", 0, CallClass.UNSAFE
                self.targets.append(node.id)
                for cj in unfold(self.program, conf[0], s, self.supply):
                    self.drive_conj(cj.applied_calls(), cj.subst, path, node.id)
                return node.id

        node.how = "split"
        split = self._new(kind="split", conf=conf, subst=s, parent=node.id)
        for c in conf:
            self.drive_conj((c,), s, path, split.id)
        return node.id


def drive(program: Program, goal: Goal, query_vars=None, **kw) -> ProcessGraph:
    return Driver(program, **kw).drive(goal, query_vars)
