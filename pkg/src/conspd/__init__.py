"""A miniKanren-style relational interpreter with a conservative partial
deduction specializer."""

__version__ = "0.1.0"

from .kernel import Ctor, Substitution, Var, unify, walk  # noqa: E402
from .syntax import Call, Conj, Definition, Disj, Fresh, Program, Unify  # noqa: E402
from .engine import run  # noqa: E402
from .parser import parse, parse_goal, render  # noqa: E402
from .driver import drive  # noqa: E402
from .residualizer import filter_redundant_args, residualize, specialize  # noqa: E402

__all__ = [
    "Call", "Conj", "Ctor", "Definition", "Disj", "Fresh", "Program", "Substitution",
    "Unify", "Var", "drive", "filter_redundant_args", "parse", "parse_goal", "render",
    "residualize", "run", "specialize", "unify", "walk",
]
