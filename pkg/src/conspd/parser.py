"""Concrete syntax: an s-expression format for programs and queries.

    (def NAME (PARAMS...) GOAL)
    (query (VARS...) GOAL)        ; VARS are the query variables
    (query GOAL)                  ; closed query
    (prefix GOAL)                 ; optional benchmarking context, see bench

    GOAL := (== T T) | (conj G...) | (disj G...) | (fresh (VARS...) G...)
          | (call NAME T...) | (succeed) | (fail)
    T    := SYMBOL                ; a variable, must be bound
          | (CTOR T...)           ; constructor, nullary ones written (zero)

``;`` starts a comment.  n-ary ``conj``/``disj`` right-associate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kernel import Ctor, Term, Var, VarSupply, show_term
from .syntax import (
    FAIL,
    SUCCEED,
    Call,
    Conj,
    Definition,
    Fail,
    Fresh,
    Goal,
    Program,
    ProgramError,
    Succeed,
    Unify,
    conj,
    conjuncts,
    disj,
    disjuncts,
    fresh,
    goal_terms,
)


class ParseError(ProgramError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass
class Source:
    program: Program
    query: Goal | None = None
    query_vars: tuple = ()
    prefix: Goal | None = None


class _Sym(str):
    line: int
    col: int


class _List(list):
    line: int = 0
    col: int = 0


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_KEYWORDS = {"==", "conj", "disj", "fresh", "call", "succeed", "fail"}


def _read(text: str) -> list:
    stack: list[_List] = [_List()]
    line, col_start = 1, 0
    pos = 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        start = m.start()
        col = start - col_start + 1
        if m.start() != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col_start + 1)
        pos = m.end()
        if tok.isspace() or tok.startswith(";"):
            nl = tok.count("\n")
            if nl:
                line += nl
                col_start = start + tok.rindex("\n") + 1
            continue
        if tok == "(":
            lst = _List()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        else:
            sym = _Sym(tok)
            sym.line, sym.col = line, col
            stack[-1].append(sym)
    if pos != len(text):
        raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col_start + 1)
    if len(stack) != 1:
        open_ = stack[-1]
        raise ParseError("unclosed '('", open_.line, open_.col)
    return stack[0]


def _loc(x):
    return getattr(x, "line", 0), getattr(x, "col", 0)


class _Parser:
    def __init__(self, arities: dict, supply: VarSupply, ctor_arity: dict | None = None):
        self.arities = arities
        self.supply = supply
        self.ctor_arity = {} if ctor_arity is None else ctor_arity
        self.free: dict[str, Var] | None = None  # collects free symbols when allowed

    def error(self, msg, node):
        raise ParseError(msg, *_loc(node))

    def term(self, x, scope: dict) -> Term:
        if isinstance(x, _Sym):
            if x in scope:
                return scope[x]
            if self.free is not None:
                if x not in self.free:
                    self.free[x] = self.supply.fresh(str(x))
                return self.free[x]
            self.error(f"unbound variable {x}", x)
        if not x or not isinstance(x[0], _Sym):
            self.error("constructor application must start with a name", x)
        name = str(x[0])
        args = tuple(self.term(a, scope) for a in x[1:])
        known = self.ctor_arity.setdefault(name, len(args))
        if known != len(args):
            self.error(f"constructor {name} used with arity {len(args)}, earlier {known}", x)
        return Ctor(name, args)

    def names(self, x) -> list[str]:
        if not isinstance(x, _List) or not all(isinstance(a, _Sym) for a in x):
            self.error("expected a list of names", x)
        return [str(a) for a in x]

    def goal(self, x, scope: dict) -> Goal:
        if not isinstance(x, _List) or not x or not isinstance(x[0], _Sym):
            self.error("expected a goal", x)
        head, rest = str(x[0]), x[1:]
        if head == "==":
            if len(rest) != 2:
                self.error("== takes two terms", x)
            return Unify(self.term(rest[0], scope), self.term(rest[1], scope))
        if head == "conj":
            return conj(*[self.goal(g, scope) for g in rest]) if rest else SUCCEED
        if head == "disj":
            return disj(*[self.goal(g, scope) for g in rest]) if rest else FAIL
        if head == "fresh":
            if not rest:
                self.error("fresh needs a variable list", x)
            names = self.names(rest[0])
            inner = dict(scope)
            vs = []
            for nm in names:
                v = self.supply.fresh(nm)
                inner[nm] = v
                vs.append(v)
            if len(rest) < 2:
                self.error("fresh needs a body", x)
            body = conj(*[self.goal(g, inner) for g in rest[1:]])
            return fresh(vs, body)
        if head == "call":
            if not rest or not isinstance(rest[0], _Sym):
                self.error("call needs a relation name", x)
            rel = str(rest[0])
            args = tuple(self.term(a, scope) for a in rest[1:])
            if rel not in self.arities:
                self.error(f"call to undefined relation {rel}", x)
            if self.arities[rel] != len(args):
                self.error(f"{rel} expects {self.arities[rel]} arguments, got {len(args)}", x)
            return Call(rel, args)
        if head == "succeed" and not rest:
            return SUCCEED
        if head == "fail" and not rest:
            return FAIL
        self.error(f"unknown goal form {head}", x)


def parse(text: str) -> Source:
    """Parse a source file into a program and optional query."""
    forms = _read(text)
    arities: dict[str, int] = {}
    defs, queries, prefixes = [], [], []
    for f in forms:
        if not isinstance(f, _List) or not f or not isinstance(f[0], _Sym):
            raise ParseError("expected (def ...), (query ...) or (prefix ...)", *_loc(f))
        kind = str(f[0])
        if kind == "def":
            if len(f) != 4 or not isinstance(f[1], _Sym) or not isinstance(f[2], _List):
                raise ParseError("expected (def NAME (PARAMS) GOAL)", *_loc(f))
            if str(f[1]) in arities:
                raise ParseError(f"relation {f[1]} defined twice", *_loc(f))
            arities[str(f[1])] = len(f[2])
            defs.append(f)
        elif kind == "query":
            queries.append(f)
        elif kind == "prefix":
            prefixes.append(f)
        else:
            raise ParseError(f"unknown top-level form {kind}", *_loc(f))
    if len(queries) > 1:
        raise ParseError("more than one query", *_loc(queries[1]))
    if len(prefixes) > 1:
        raise ParseError("more than one prefix", *_loc(prefixes[1]))

    supply = VarSupply()
    p = _Parser(arities, supply)
    program = Program()
    for f in defs:
        names = p.names(f[2])
        if len(set(names)) != len(names):
            raise ParseError(f"{f[1]}: repeated parameter", *_loc(f[2]))
        params = tuple(supply.fresh(nm) for nm in names)
        scope = dict(zip(names, params))
        program.add(Definition(str(f[1]), params, p.goal(f[3], scope)))

    src = Source(program)
    scope: dict[str, Var] = {}
    if queries:
        q = queries[0]
        if len(q) == 3:
            qnames = p.names(q[1])
            src.query_vars = tuple(supply.fresh(nm) for nm in qnames)
            scope = dict(zip(qnames, src.query_vars))
            src.query = p.goal(q[2], scope)
        elif len(q) == 2:
            src.query = p.goal(q[1], {})
        else:
            raise ParseError("expected (query (VARS) GOAL) or (query GOAL)", *_loc(q))
    if prefixes:
        f = prefixes[0]
        if len(f) != 2:
            raise ParseError("expected (prefix GOAL)", *_loc(f))
        src.prefix = p.goal(f[1], scope)
    return src


def parse_goal(text: str, program: Program, start: int | None = None) -> tuple[Goal, tuple]:
    """Parse a standalone goal; unbound symbols become query variables,
    returned in order of first occurrence."""
    forms = _read(text)
    if len(forms) != 1:
        raise ParseError("expected exactly one goal")
    supply = VarSupply(program.max_var_index() + 1 if start is None else start)
    p = _Parser(program.arities(), supply, _ctor_arities(program))
    p.free = {}
    g = p.goal(forms[0], {})
    return g, tuple(p.free.values())


def _ctor_arities(program: Program) -> dict:
    out: dict[str, int] = {}
    for d in program:
        for t in goal_terms(d.body):
            stack = [t]
            while stack:
                t = stack.pop()
                if type(t) is Ctor:
                    out.setdefault(t.name, len(t.args))
                    stack.extend(t.args)
    return out


# --- rendering ---------------------------------------------------------------


class _Namer:
    def __init__(self):
        self.names: dict[Var, str] = {}
        self.used: set[str] = set()

    def name(self, v: Var) -> str:
        if v in self.names:
            return self.names[v]
        base = v.hint if v.hint and _is_symbol(v.hint) and v.hint not in _KEYWORDS else "v"
        nm, i = base, 1
        while nm in self.used:
            nm = f"{base}{i}"
            i += 1
        self.used.add(nm)
        self.names[v] = nm
        return nm


def _is_symbol(s: str) -> bool:
    return re.fullmatch(r"[^\s();]+", s) is not None and not s.startswith("_.")


def _render_term(t: Term, namer: _Namer) -> str:
    if type(t) is Var:
        return namer.name(t)
    if not t.args:
        return f"({t.name})"
    return f"({t.name} {' '.join(_render_term(a, namer) for a in t.args)})"


def _render_goal(g: Goal, namer: _Namer, indent: int) -> str:
    pad = " " * indent
    if isinstance(g, Unify):
        return f"{pad}(== {_render_term(g.left, namer)} {_render_term(g.right, namer)})"
    if isinstance(g, Call):
        args = "".join(" " + _render_term(a, namer) for a in g.args)
        return f"{pad}(call {g.rel}{args})"
    if isinstance(g, Succeed):
        return f"{pad}(succeed)"
    if isinstance(g, Fail):
        return f"{pad}(fail)"
    if isinstance(g, Fresh):
        vs, body = [], g
        while isinstance(body, Fresh):
            vs.append(body.var)
            body = body.body
        names = " ".join(namer.name(v) for v in vs)
        return f"{pad}(fresh ({names})\n{_render_goal(body, namer, indent + 2)})"
    kind, parts = ("conj", conjuncts(g)) if isinstance(g, Conj) else ("disj", disjuncts(g))
    inner = "\n".join(_render_goal(x, namer, indent + 2) for x in parts)
    return f"{pad}({kind}\n{inner})"


def render_definition(d: Definition) -> str:
    namer = _Namer()
    params = " ".join(namer.name(v) for v in d.params)
    return f"(def {d.name} ({params})\n{_render_goal(d.body, namer, 2)})"


def render(program: Program, query: Goal | None = None, query_vars=(), prefix: Goal | None = None) -> str:
    """Render a program (and optional query) back to source text."""
    chunks = [render_definition(d) for d in program]
    namer = _Namer()
    if query is not None:
        if query_vars:
            names = " ".join(namer.name(v) for v in query_vars)
            chunks.append(f"(query ({names})\n{_render_goal(query, namer, 2)})")
        else:
            chunks.append(f"(query\n{_render_goal(query, namer, 2)})")
    if prefix is not None:
        chunks.append(f"(prefix\n{_render_goal(prefix, namer, 2)})")
    return "\n\n".join(chunks) + "\n"


def render_source(src: Source) -> str:
    return render(src.program, src.query, src.query_vars, src.prefix)


def show(t: Term) -> str:
    return show_term(t, bare_constants=True)
