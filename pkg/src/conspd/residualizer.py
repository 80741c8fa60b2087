"""Residual program generation from a process graph, followed by redundant
argument filtering."""

from __future__ import annotations

from dataclasses import dataclass

from .driver import ProcessGraph
from .engine import deep_call
from .kernel import Var, apply, is_ground, term_vars, vars_of
from .syntax import (
    Call,
    Conj,
    Definition,
    Disj,
    FAIL,
    Fail,
    Fresh,
    Goal,
    Program,
    Unify,
    conj,
    conjuncts,
    disj,
    disjuncts,
    free_vars,
    fresh,
    ground_ctor_name,
)


class ResidualError(Exception):
    """The process graph is malformed (for instance a dangling fold target)."""


@dataclass
class ResidualProgram:
    definitions: Program
    entry: str
    provenance: dict  # relation name -> process node id

    @property
    def entry_params(self) -> tuple:
        return self.definitions[self.entry].params

    def query(self) -> Call:
        return Call(self.entry, self.entry_params)


def _conj(*goals: Goal) -> Goal:
    parts = [x for g in goals for x in conjuncts(g)]
    if any(isinstance(x, Fail) for x in parts):
        return FAIL
    return conj(*parts)


def _disj(*goals: Goal) -> Goal:
    return disj(*[x for g in goals for x in disjuncts(g)])


def _conf_vars(conf) -> list[Var]:
    return vars_of(a for c in conf for a in c.args)


class _Residualizer:
    def __init__(self, graph: ProcessGraph, original: Program):
        self.g = graph
        self.original = original
        self.names: dict[int, str] = {}
        self.params: dict[int, tuple] = {}
        self.stopped: set[str] = set()

    def check(self):
        nodes = self.g.nodes
        if self.g.root not in nodes:
            raise ResidualError("root node missing")
        for n in nodes.values():
            for c in n.children:
                if c not in nodes:
                    raise ResidualError(f"node {n.id}: dangling child {c}")
            if n.kind == "fold":
                t = nodes.get(n.target)
                if t is None or t.kind != "conj":
                    raise ResidualError(f"fold node {n.id}: dangling target {n.target}")
                if set(n.renaming) != set(_conf_vars(t.conf)):
                    raise ResidualError(f"fold node {n.id}: renaming does not cover target variables")

    def name_for(self, nid: int, taken: set) -> str:
        conf = self.g[nid].conf
        if len(conf) == 1:
            (c,) = conf
            ground = [ground_ctor_name(a) for a in c.args if is_ground(a)]
            base = "_".join([c.rel] + ground) if ground else f"{c.rel}_{nid}"
        else:
            base = "_".join(c.rel for c in conf) + f"_{nid}"
        if base in taken:
            base = f"{base}_{nid}"
        while base in taken:
            base += "_"
        taken.add(base)
        return base

    def render(self, nid: int, iface, defining: int | None = None) -> Goal:
        n = self.g[nid]
        eqs = []
        for v in sorted(iface, key=lambda v: v.idx):
            t = apply(n.subst, v)
            if t != v:
                eqs.append(Unify(v, t))
        inner = vars_of(apply(n.subst, v) for v in iface)
        if n.kind == "success":
            body = conj()
        elif n.kind == "fold":
            body = Call(self.names[n.target], tuple(n.renaming[p] for p in self.params[n.target]))
        elif n.kind == "stop":
            self.stopped.update(c.rel for c in n.conf)
            body = conj(*n.conf)
        elif n.kind == "conj" and nid in self.names and nid != defining:
            body = Call(self.names[nid], self.params[nid])
        elif n.kind == "conj" and n.how == "split":
            (split,) = n.children
            kids = self.g[split].children
            parts = []
            for i, ch in enumerate(kids):
                others = set(_conf_vars(n.conf[:i] + n.conf[i + 1:])) | set(inner)
                parts.append(self.render(ch, [v for v in _conf_vars((n.conf[i],)) if v in others]))
            body = _conj(*parts)
        elif n.kind in ("conj", "disj"):
            body = _disj(*[self.render(ch, inner) for ch in n.children])
        else:
            raise ResidualError(f"node {nid}: unexpected kind {n.kind}")
        return _conj(*eqs, body)

    def definition(self, name: str, params: tuple, body: Goal) -> Definition:
        keep = set(params)
        return Definition(name, params, fresh([v for v in free_vars(body) if v not in keep], body))

    def run(self) -> ResidualProgram:
        self.check()
        g = self.g
        root = g[g.root]
        qv = tuple(g.query_vars)
        entry_node = None
        if len(root.children) == 1:
            c = g[root.children[0]]
            if c.kind == "conj" and _conf_vars(c.conf) == list(qv) and all(apply(c.subst, v) == v for v in qv):
                entry_node = c.id
        rel_nodes = sorted(set(g.fold_targets()) | ({entry_node} if entry_node is not None else set()))
        taken = {d.name for d in self.original}
        for nid in rel_nodes:
            self.names[nid] = self.name_for(nid, taken)
            self.params[nid] = tuple(_conf_vars(g[nid].conf))

        out = Program()
        provenance = {}
        if entry_node is None:
            first = next((c.rel for ch in root.children for c in g[ch].conf), "query")
            entry = f"{first}_{root.id}"
            while entry in taken:
                entry += "_"
            taken.add(entry)
            out.add(self.definition(entry, qv, self.render(root.id, qv)))
            provenance[entry] = root.id
        else:
            entry = self.names[entry_node]
        for nid in rel_nodes:
            body = self.render(nid, self.params[nid], defining=nid)
            out.add(self.definition(self.names[nid], self.params[nid], body))
            provenance[self.names[nid]] = nid
        for rel in self.original.reachable(sorted(self.stopped)):
            out.add(self.original[rel])
        return ResidualProgram(out, entry, provenance)


def residualize(graph: ProcessGraph, original: Program | None = None) -> ResidualProgram:
    """Every fold target becomes a relation over its configuration's
    variables; nodes that are not fold targets are inlined into their parent,
    which removes transient chains."""
    r = _Residualizer(graph, graph.program if original is None else original)
    return deep_call(r.run)


# ---------------------------------------------------------------------------
# Redundant argument filtering


def _walk(g: Goal):
    stack = [g]
    while stack:
        g = stack.pop()
        if isinstance(g, (Conj, Disj)):
            stack += [g.right, g.left]
        elif isinstance(g, Fresh):
            stack.append(g.body)
        else:
            yield g


def redundant_positions(program: Program) -> set[tuple[str, int]]:
    """Greatest set of (relation, position) pairs whose parameter is used
    only as the exact argument of other positions in the set."""
    cand = {(d.name, i) for d in program for i in range(d.arity)}
    changed = True
    while changed:
        changed = False
        for d in program:
            for i, p in enumerate(d.params):
                if (d.name, i) not in cand:
                    continue
                if not _only_passed_through(d.body, p, cand):
                    cand.discard((d.name, i))
                    changed = True
    return cand


def _only_passed_through(body: Goal, p: Var, cand) -> bool:
    for g in _walk(body):
        if isinstance(g, Unify):
            if p in set(term_vars(g.left)) | set(term_vars(g.right)):
                return False
        elif isinstance(g, Call):
            for j, a in enumerate(g.args):
                if a == p and type(a) is Var:
                    if (g.rel, j) not in cand:
                        return False
                elif p in set(term_vars(a)):
                    return False
    return True


def _rewrite(g: Goal, drop) -> Goal:
    if isinstance(g, Call):
        return Call(g.rel, tuple(a for j, a in enumerate(g.args) if (g.rel, j) not in drop))
    if isinstance(g, Conj):
        return Conj(_rewrite(g.left, drop), _rewrite(g.right, drop))
    if isinstance(g, Disj):
        return Disj(_rewrite(g.left, drop), _rewrite(g.right, drop))
    if isinstance(g, Fresh):
        body = _rewrite(g.body, drop)
        return body if g.var not in free_vars(body) else Fresh(g.var, body)
    return g


def filter_redundant_args(rp: ResidualProgram) -> ResidualProgram:
    """Drop argument positions that cannot influence answers and shorten
    every call site accordingly."""
    drop = redundant_positions(rp.definitions)
    if not drop:
        return rp
    out = Program()
    for d in rp.definitions:
        params = tuple(p for i, p in enumerate(d.params) if (d.name, i) not in drop)
        out.add(Definition(d.name, params, _rewrite(d.body, drop)))
    return ResidualProgram(out, rp.entry, dict(rp.provenance))


def specialize(program: Program, goal: Goal, query_vars=None, filter_args: bool = True, **kw):
    """Drive, residualize and filter; returns (residual, graph)."""
    from .driver import drive

    graph = drive(program, goal, query_vars, **kw)
    rp = residualize(graph, program)
    if filter_args:
        rp = filter_redundant_args(rp)
    return rp, graph
