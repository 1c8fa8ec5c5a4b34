"""
Termination Database Miner - Terms
First-order symbolic terms: canonical printing, total ordering,
substitution and one-way matching.

Every other module speaks in these terms. All values are immutable.
"""

import re
from dataclasses import dataclass, field
from enum import Enum, auto
from functools import cached_property
from typing import Dict, Iterator, Mapping, Optional, Set, Tuple, Union

from tdm_config import BUILTIN_ARITIES, CONSTANT_SYMBOLS, NIL, STUB_PREFIX, T
from core.errors import SubstitutionError


# ─── Values ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Pair:
    """A cons cell of closed values."""
    car: "Value"
    cdr: "Value"


# A natural number, a constant symbol (lowercase str) or a Pair.
Value = Union[int, str, Pair]


def value_sort_key(v: Value) -> tuple:
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, str):
        return (1, v)
    return (2, value_sort_key(v.car), value_sort_key(v.cdr))


def print_value(v: Value) -> str:
    """Print a value in list notation, without a leading quote."""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    items = []
    while isinstance(v, Pair):
        items.append(print_value(v.car))
        v = v.cdr
    if v == NIL:
        return "(" + " ".join(items) + ")"
    return "(" + " ".join(items) + " . " + print_value(v) + ")"


# ─── Symbols ────────────────────────────────────────────────────────

class SymbolKind(Enum):
    BUILTIN = auto()
    USER_FUNCTION = auto()
    VARIABLE = auto()
    STUB = auto()
    CONSTANT_SYMBOL = auto()


_STUB_RE = re.compile(r"^stub-([1-9][0-9]*)$")


def stub_name(arity: int) -> str:
    """The reserved stub symbol for functions of `arity` arguments."""
    return f"{STUB_PREFIX}{arity}"


def stub_arity(name: str) -> Optional[int]:
    """Arity encoded in a stub name, or None if `name` is not a stub."""
    m = _STUB_RE.match(name)
    return int(m.group(1)) if m else None


def is_stub(name: str) -> bool:
    return _STUB_RE.match(name) is not None


def function_kind(name: str) -> SymbolKind:
    """Classify a symbol used in head position."""
    if name in BUILTIN_ARITIES:
        return SymbolKind.BUILTIN
    if is_stub(name):
        return SymbolKind.STUB
    return SymbolKind.USER_FUNCTION


# ─── Terms ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Const:
    """A quoted closed value."""
    value: Value

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class App:
    head: str
    args: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        return print_term(self)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def kind(self) -> SymbolKind:
        return function_kind(self.head)

    @cached_property
    def sort_key(self) -> tuple:
        return (2, self.head, len(self.args), tuple(term_sort_key(a) for a in self.args))


Term = Union[Var, Const, App]

TRUE = Const(T)
FALSE = Const(NIL)


def app(head: str, *args: Term) -> App:
    return App(head, tuple(args))


def negate(t: Term) -> Term:
    """(not t), collapsing a leading not."""
    if isinstance(t, App) and t.head == "not":
        return t.args[0]
    return app("not", t)


def is_negation(t: Term) -> bool:
    return isinstance(t, App) and t.head == "not"


# ─── Printing ───────────────────────────────────────────────────────

def print_term(t: Term) -> str:
    """Canonical text: lowercase, single spaces, no abbreviations."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        v = t.value
        if isinstance(v, int) or v in CONSTANT_SYMBOLS:
            return print_value(v)
        return "'" + print_value(v)
    return "(" + " ".join([t.head] + [print_term(a) for a in t.args]) + ")"


# ─── Ordering ───────────────────────────────────────────────────────

def term_sort_key(t: Term) -> tuple:
    """Key realizing the total order Const < Var < App."""
    if isinstance(t, Const):
        return (0, value_sort_key(t.value))
    if isinstance(t, Var):
        return (1, t.name)
    return t.sort_key


def compare_terms(a: Term, b: Term) -> int:
    """-1, 0 or 1 as `a` is less than, equal to or greater than `b`."""
    ka, kb = term_sort_key(a), term_sort_key(b)
    return (ka > kb) - (ka < kb)


# ─── Queries ────────────────────────────────────────────────────────

def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk."""
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def variables_of(t: Term) -> Set[str]:
    return {s.name for s in subterms(t) if isinstance(s, Var)}


def heads_of(t: Term) -> Set[str]:
    return {s.head for s in subterms(t) if isinstance(s, App)}


def term_size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def occurrences(t: Term, head: str) -> int:
    return sum(1 for s in subterms(t) if isinstance(s, App) and s.head == head)


def uses_only_builtins(t: Term) -> bool:
    return all(h in BUILTIN_ARITIES for h in heads_of(t))


# ─── Substitution ───────────────────────────────────────────────────

@dataclass(frozen=True)
class Substitution:
    """
    Variable bindings plus a stub-to-function map.

    Extension returns a new Substitution; nothing is mutated.
    """
    bindings: Mapping[str, Term] = field(default_factory=dict)
    stubs: Mapping[str, str] = field(default_factory=dict)

    def bind_var(self, name: str, term: Term) -> "Substitution":
        b = dict(self.bindings)
        b[name] = term
        return Substitution(b, self.stubs)

    def bind_stub(self, stub: str, function: str, arity: int) -> "Substitution":
        if stub_arity(stub) != arity:
            raise SubstitutionError(
                f"{stub} cannot stand for {function} of arity {arity}"
            )
        s = dict(self.stubs)
        s[stub] = function
        return Substitution(self.bindings, s)

    def is_empty(self) -> bool:
        return not self.bindings and not self.stubs

    def sorted_bindings(self) -> Tuple[Tuple[str, Term], ...]:
        return tuple(sorted(self.bindings.items()))

    def sorted_stubs(self) -> Tuple[Tuple[str, str], ...]:
        return tuple(sorted(self.stubs.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        return dict(self.bindings) == dict(other.bindings) and dict(self.stubs) == dict(other.stubs)

    def __hash__(self) -> int:
        return hash((self.sorted_bindings(), self.sorted_stubs()))


EMPTY_SUBST = Substitution()


def renaming(mapping: Mapping[str, str]) -> Substitution:
    """Variable-to-variable substitution from a name map."""
    return Substitution({k: Var(v) for k, v in mapping.items()})


def apply_subst(t: Term, s: Substitution) -> Term:
    """Simultaneous replacement of variables and stub heads."""
    if isinstance(t, Var):
        return s.bindings.get(t.name, t)
    if isinstance(t, Const):
        return t
    head = t.head
    image = s.stubs.get(head)
    if image is not None:
        if stub_arity(head) != len(t.args):
            raise SubstitutionError(f"{head} applied to {len(t.args)} arguments")
        head = image
    return App(head, tuple(apply_subst(a, s) for a in t.args))


# ─── Matching ───────────────────────────────────────────────────────

def match_term(pattern: Term, target: Term, seed: Substitution = EMPTY_SUBST,
               var_to_var_only: bool = False) -> Optional[Substitution]:
    """
    One-way matching: extend `seed` so that pattern/s equals target.

    Stubs in the pattern match heads of user functions of the stub's
    arity. With `var_to_var_only`, variables bind only to variables.
    Returns None when no extension exists.
    """
    if isinstance(pattern, Var):
        bound = seed.bindings.get(pattern.name)
        if bound is not None:
            return seed if bound == target else None
        if var_to_var_only and not isinstance(target, Var):
            return None
        return seed.bind_var(pattern.name, target)

    if isinstance(pattern, Const):
        return seed if pattern == target else None

    if not isinstance(target, App) or len(pattern.args) != len(target.args):
        return None

    if is_stub(pattern.head):
        image = seed.stubs.get(pattern.head)
        if image is not None:
            if image != target.head:
                return None
        elif function_kind(target.head) is SymbolKind.USER_FUNCTION:
            seed = seed.bind_stub(pattern.head, target.head, len(target.args))
        else:
            return None
    elif pattern.head != target.head:
        return None

    for p, t in zip(pattern.args, target.args):
        seed = match_term(p, t, seed, var_to_var_only)
        if seed is None:
            return None
    return seed
