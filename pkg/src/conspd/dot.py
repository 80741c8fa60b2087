"""Graphviz export of process graphs and isolation trees.

Configurations are boxes, splits are diamonds, fold edges are dashed and
substitutions are printed in angle brackets under the configuration.
"""

from __future__ import annotations

from .driver import IsolationTree, ProcessGraph
from .kernel import Substitution, Var, apply, show_term, vars_of


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _conf(calls) -> str:
    return " ∧ ".join(
        f"{c.rel}({' '.join(show_term(a, True) for a in c.args)})" for c in calls
    )


def _subst(s: Substitution, relevant) -> str:
    pairs = []
    for v in sorted(relevant, key=lambda v: v.idx):
        t = apply(s, v)
        if t != v:
            pairs.append(f"{v} → {show_term(t, True)}")
    return "⟨" + ", ".join(pairs) + "⟩" if pairs else ""


def graph_to_dot(g: ProcessGraph, name: str = "process") -> str:
    lines = [f'digraph "{_esc(name)}" {{', "  node [fontname=monospace];"]
    scope = list(g.query_vars)
    for nid in sorted(g.nodes):
        n = g[nid]
        label = ""
        if n.kind == "disj":
            shape, label = "circle", "∨"
        elif n.kind == "split":
            shape, label = "diamond", "split"
        elif n.kind == "success":
            shape, label = "box", "success"
        elif n.kind == "stop":
            shape, label = "box", "stop: " + _conf(n.conf)
        else:
            shape, label = "box", _conf(n.conf)
        sub = _subst(n.subst, set(scope) | set(vars_of(a for c in n.conf for a in c.args)))
        if sub:
            label += "\n" + sub
        style = ', style="rounded"' if n.kind in ("fold", "stop") else ""
        lines.append(f'  n{nid} [shape={shape}{style}, label="{_esc(label)}"];')
    for nid in sorted(g.nodes):
        n = g[nid]
        for c in n.children:
            lines.append(f"  n{nid} -> n{c};")
        if n.kind == "fold":
            lines.append(f'  n{nid} -> n{n.target} [style=dashed, constraint=false, label="fold"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def isolation_to_dot(tree: IsolationTree, name: str = "isolation") -> str:
    lines = [f'digraph "{_esc(name)}" {{', "  node [fontname=monospace, shape=box];"]
    root_vars = vars_of(tree.call.args)
    ids: dict[int, int] = {}
    for node in tree.nodes():
        i = ids.setdefault(id(node), len(ids))
        if node.status == "fail":
            label, extra = "fail", ", shape=plaintext"
        else:
            label = _conf(node.calls) if node.calls else "⊤"
            seen = root_vars + [v for v in vars_of(a for c in node.calls for a in c.args) if v not in root_vars]
            sub = _subst(node.subst, seen + [v for v in node.subst if isinstance(v, Var) and v not in seen])
            if sub:
                label += "\n" + sub
            extra = ""
        lines.append(f'  t{i} [label="{_esc(label)}"{extra}];')
    for node in tree.nodes():
        for ch in node.children:
            lines.append(f"  t{ids[id(node)]} -> t{ids[id(ch)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
