"""Terms, substitutions and most-general unification.

Terms are either :class:`Var` (identified by an integer) or :class:`Ctor`
(a constructor symbol applied to a tuple of terms).  Substitutions are
triangular and persistent: extending one never mutates the parent.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import immutables


class Var:
    """A logic variable.  Identity is the integer ``idx``; ``hint`` is cosmetic."""

    __slots__ = ("idx", "hint")

    def __init__(self, idx: int, hint: str = ""):
        self.idx = idx
        self.hint = hint

    def __eq__(self, other):
        return type(other) is Var and other.idx == self.idx

    def __hash__(self):
        return self.idx

    def __lt__(self, other: Var) -> bool:
        return self.idx < other.idx

    def __repr__(self):
        return f"Var({self.idx}, {self.hint!r})" if self.hint else f"Var({self.idx})"

    def __str__(self):
        return self.hint or f"_v{self.idx}"


class Ctor:
    """Constructor application ``name(args...)``."""

    __slots__ = ("name", "args", "_hash")

    def __init__(self, name: str, args: tuple = ()):
        self.name = name
        self.args = tuple(args)
        self._hash = None

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is Ctor and other.name == self.name and other.args == self.args

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.name, self.args))
        return h

    def __repr__(self):
        if not self.args:
            return f"Ctor({self.name!r})"
        return f"Ctor({self.name!r}, {self.args!r})"

    def __str__(self):
        return show_term(self)


Term = Var | Ctor


def show_term(t: Term, bare_constants: bool = False) -> str:
    """S-expression rendering.  Nullary constructors print as ``(zero)`` unless
    ``bare_constants`` is set, which prints ``zero``."""
    # Iterative, since answer lists can be deeper than the recursion limit.
    out: list[str] = []
    stack: list = [t]
    while stack:
        x = stack.pop()
        if type(x) is str:
            out.append(x)
        elif type(x) is Var:
            out.append(str(x))
        elif not x.args:
            out.append(x.name if bare_constants else f"({x.name})")
        else:
            out.append(f"({x.name}")
            stack.append(")")
            for a in reversed(x.args):
                stack.append(a)
                stack.append(" ")
    return "".join(out)


class Substitution:
    """Persistent triangular substitution ``Var -> Term``."""

    __slots__ = ("_map",)

    def __init__(self, bindings=None):
        if bindings is None:
            self._map = immutables.Map()
        elif isinstance(bindings, immutables.Map):
            self._map = bindings
        else:
            self._map = immutables.Map(bindings)

    def get(self, v: Var, default=None):
        return self._map.get(v, default)

    def bind(self, v: Var, t: Term) -> Substitution:
        return Substitution(self._map.set(v, t))

    def __contains__(self, v) -> bool:
        return v in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self) -> Iterator[Var]:
        return iter(self._map)

    def items(self):
        return self._map.items()

    def resolved(self) -> dict[Var, Term]:
        """Fully applied bindings as a plain dict."""
        return {v: apply(self, v) for v in self._map}

    def __eq__(self, other):
        # Equality after full resolution, so triangular shapes do not matter.
        if not isinstance(other, Substitution):
            return NotImplemented
        return self.resolved() == other.resolved()

    def __hash__(self):
        return hash(frozenset(self.resolved().items()))

    def __repr__(self):
        body = ", ".join(f"{v} -> {show_term(t)}" for v, t in sorted(self._map.items()))
        return "{" + body + "}"


EMPTY = Substitution()


class VarSupply:
    """Monotonic allocator of fresh variables for one session."""

    __slots__ = ("next_idx",)

    def __init__(self, start: int = 0):
        self.next_idx = start

    def fresh(self, hint: str = "") -> Var:
        v = Var(self.next_idx, hint)
        self.next_idx += 1
        return v

    def reserve_above(self, *terms) -> None:
        """Make sure future variables do not collide with ones in ``terms``."""
        for t in terms:
            for v in term_vars(t):
                if v.idx >= self.next_idx:
                    self.next_idx = v.idx + 1


def walk(t: Term, s: Substitution) -> Term:
    m = s._map
    while type(t) is Var:
        nxt = m.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def occurs(v: Var, t: Term, s: Substitution) -> bool:
    stack = [t]
    while stack:
        t = walk(stack.pop(), s)
        if type(t) is Var:
            if t == v:
                return True
        else:
            stack.extend(t.args)
    return False


def unify(t1: Term, t2: Term, s: Substitution) -> Substitution | None:
    """Most-general unifier of ``t1`` and ``t2`` extending ``s``, or ``None``."""
    m = s._map
    stack = [(t1, t2)]
    mutation = None
    while stack:
        a, b = stack.pop()
        while type(a) is Var:
            nxt = m.get(a)
            if nxt is None:
                break
            a = nxt
        while type(b) is Var:
            nxt = m.get(b)
            if nxt is None:
                break
            b = nxt
        if a is b:
            continue
        if type(a) is Var:
            if type(b) is Var and a.idx == b.idx:
                continue
            if _occurs_map(a, b, m):
                return None
            if mutation is None:
                mutation = m.mutate()
            mutation[a] = b
            m = mutation
        elif type(b) is Var:
            if _occurs_map(b, a, m):
                return None
            if mutation is None:
                mutation = m.mutate()
            mutation[b] = a
            m = mutation
        else:
            if a.name != b.name or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
    if mutation is None:
        return s
    return Substitution(mutation.finish())


def _occurs_map(v: Var, t: Term, m) -> bool:
    stack = [t]
    while stack:
        t = stack.pop()
        while type(t) is Var:
            nxt = m.get(t)
            if nxt is None:
                break
            t = nxt
        if type(t) is Var:
            if t.idx == v.idx:
                return True
        else:
            stack.extend(t.args)
    return False


def apply(s: Substitution, t: Term) -> Term:
    """Deep substitution: every bound variable is replaced by its resolved term."""
    t = walk(t, s)
    if type(t) is Var or not t.args:
        return t
    new_args = tuple(apply(s, a) for a in t.args)
    if all(x is y for x, y in zip(new_args, t.args)):
        return t
    return Ctor(t.name, new_args)


def term_vars(t: Term) -> Iterator[Var]:
    """Variables of ``t`` in left-to-right order of first occurrence."""
    seen = set()
    stack = [t]
    while stack:
        t = stack.pop()
        if type(t) is Var:
            if t not in seen:
                seen.add(t)
                yield t
        else:
            stack.extend(reversed(t.args))


def vars_of(terms: Iterable[Term]) -> list[Var]:
    out: list[Var] = []
    seen: set[Var] = set()
    for t in terms:
        for v in term_vars(t):
            if v not in seen:
                seen.add(v)
                out.append(v)
    return out


def rename_term(t: Term, mapping: dict) -> Term:
    if type(t) is Var:
        return mapping.get(t, t)
    if not t.args:
        return t
    return Ctor(t.name, tuple(rename_term(a, mapping) for a in t.args))


def is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


def term_size(t: Term) -> int:
    if type(t) is Var:
        return 1
    return 1 + sum(term_size(a) for a in t.args)


# Small constructors for the fixed encodings used throughout the corpus.

def const(name: str) -> Ctor:
    return Ctor(name)


ZERO = Ctor("zero")
NIL = Ctor("nil")
TRUE = Ctor("true")
FALSE = Ctor("false")


def succ(t: Term) -> Ctor:
    return Ctor("succ", (t,))


def peano(n: int) -> Ctor:
    t = ZERO
    for _ in range(n):
        t = succ(t)
    return t


def cons(h: Term, t: Term) -> Ctor:
    return Ctor("cons", (h, t))


def from_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    items = list(items)
    for x in reversed(items):
        tail = cons(x, tail)
    return tail
