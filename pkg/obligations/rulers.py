"""
Termination Database Miner - Rulers and Measure Conjectures
Per-call proof goals for a recursive definition.

Descending into (if q a b) adds q to the ruler of `a` and (not q) to the
ruler of `b`; no other form governs. Each occurrence of the function's
own name yields exactly one call context, inner calls first.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Tuple

from tdm_config import WELL_FOUNDED_RELATION
from core.terms import (
    App, Substitution, Term, Var, app, apply_subst, print_term, term_sort_key,
    variables_of,
)
from obligations.defuns import FunctionDef


# ─── Clauses ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Clause:
    """A disjunction of literals, sorted and duplicate-free."""
    literals: Tuple[Term, ...] = ()

    @classmethod
    def of(cls, literals: Iterable[Term]) -> "Clause":
        unique = {term_sort_key(t): t for t in literals}
        return cls(tuple(unique[k] for k in sorted(unique)))

    @cached_property
    def sort_key(self) -> tuple:
        return tuple(term_sort_key(t) for t in self.literals)

    def variables(self) -> set:
        out = set()
        for t in self.literals:
            out |= variables_of(t)
        return out

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return "(" + " ".join(print_term(t) for t in self.literals) + ")"


@dataclass(frozen=True)
class ClauseList:
    """A conjunction of clauses; one proof obligation."""
    clauses: Tuple[Clause, ...] = ()

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def __getitem__(self, index: int) -> Clause:
        return self.clauses[index]

    def variables(self) -> set:
        out = set()
        for c in self.clauses:
            out |= c.variables()
        return out

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.clauses)


# ─── Measures ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Measure:
    term: Term
    relation: str = WELL_FOUNDED_RELATION

    def __str__(self) -> str:
        return print_term(self.term)


def default_measure(formal: str) -> Measure:
    return Measure(app("acl2-count", Var(formal)))


# ─── Call Contexts ───────────────────────────────────────────────────

@dataclass(frozen=True)
class CallContext:
    ruler: Tuple[Term, ...]
    call_args: Tuple[Term, ...]
    call_path: int


def call_contexts(d: FunctionDef) -> List[CallContext]:
    """One context per recursive call occurrence, in traversal order."""
    found: List[Tuple[Tuple[Term, ...], Tuple[Term, ...]]] = []

    def walk(t: Term, ruler: Tuple[Term, ...]) -> None:
        if not isinstance(t, App):
            return
        if t.head == "if":
            test, then, other = t.args
            walk(test, ruler)
            walk(then, ruler + (test,))
            walk(other, ruler + (app("not", test),))
            return
        for a in t.args:
            walk(a, ruler)
        if t.head == d.name:
            found.append((ruler, t.args))

    walk(d.body, ())
    return [CallContext(r, a, i) for i, (r, a) in enumerate(found)]


# ─── Measure Conjecture ──────────────────────────────────────────────

def collapse_not_not(t: Term) -> Term:
    while (isinstance(t, App) and t.head == "not"
           and isinstance(t.args[0], App) and t.args[0].head == "not"):
        t = t.args[0].args[0]
    return t


def decrease_literal(d: FunctionDef, m: Measure, call_args: Tuple[Term, ...]) -> Term:
    """(< m[formals := args] m)"""
    s = Substitution(dict(zip(d.formals, call_args)))
    return app("<", apply_subst(m.term, s), m.term)


def measure_conjecture(d: FunctionDef, m: Measure) -> ClauseList:
    """One clause per call context: negated rulers plus the decrease literal."""
    clauses = []
    for ctx in call_contexts(d):
        literals = [collapse_not_not(app("not", r)) for r in ctx.ruler]
        literals.append(decrease_literal(d, m, ctx.call_args))
        clauses.append(Clause.of(literals))
    return ClauseList(tuple(clauses))
