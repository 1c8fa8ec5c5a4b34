"""
Termination Database Miner - Canonical Schemes
Turns a simplified obligation into a storable scheme: formal i becomes
slot v<i+1>, and the function's own name becomes the stub of its arity,
so the scheme can match any function with the same recursion shape.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

from tdm_config import SLOT_PREFIX
from core.errors import CanonicalizationError
from core.terms import App, Term, Var, apply_subst, renaming, stub_name, subterms
from obligations.rulers import Clause, ClauseList


def slot(i: int) -> str:
    """Slot variable for the formal at 0-based position i."""
    return f"{SLOT_PREFIX}{i + 1}"


def slot_names(k: int) -> Tuple[str, ...]:
    return tuple(slot(i) for i in range(k))


@dataclass(frozen=True)
class CanonicalScheme:
    clauses: ClauseList
    slot_count: int

    def __len__(self) -> int:
        return len(self.clauses)


def _replace_head(t: Term, old: str, new: str, arity: int) -> Term:
    if not isinstance(t, App):
        return t
    args = tuple(_replace_head(a, old, new, arity) for a in t.args)
    if t.head == old:
        if len(args) != arity:
            raise CanonicalizationError(
                f"{old} occurs with {len(args)} argument(s), expected {arity}"
            )
        return App(new, args)
    return App(t.head, args)


def canonical_term(t: Term, formals: Sequence[str], self_name: str) -> Term:
    """Rename formals to slots and the function itself to its stub."""
    renamed = apply_subst(t, renaming({f: slot(i) for i, f in enumerate(formals)}))
    return _replace_head(renamed, self_name, stub_name(len(formals)), len(formals))


def canonicalize(cl: ClauseList, formals: Sequence[str], self_name: str) -> CanonicalScheme:
    """Canonical scheme with literal and clause order re-normalized."""
    free = cl.variables() - set(formals)
    if free:
        raise CanonicalizationError(f"non-formal variable(s) {', '.join(sorted(free))}")
    arities = {len(s.args) for c in cl for t in c.literals for s in subterms(t)
               if isinstance(s, App) and s.head == self_name}
    if len(arities) > 1 or (arities and arities != {len(formals)}):
        raise CanonicalizationError(f"{self_name} occurs with inconsistent arity")

    clauses = {}
    for c in cl:
        canon = Clause.of(canonical_term(t, formals, self_name) for t in c.literals)
        clauses.setdefault(canon.sort_key, canon)
    ordered = tuple(clauses[k] for k in sorted(clauses))
    return CanonicalScheme(ClauseList(ordered), len(formals))


def canonical_measure(measure: Term, formals: Sequence[str]) -> Term:
    return apply_subst(measure, renaming({f: slot(i) for i, f in enumerate(formals)}))


def instantiate_slots(t: Term, formals: Sequence[str]) -> Term:
    """Inverse of the slot renaming."""
    return apply_subst(t, renaming({slot(i): f for i, f in enumerate(formals)}))


def is_slot_variable(t: Term) -> bool:
    return isinstance(t, Var) and t.name.startswith(SLOT_PREFIX) and t.name[len(SLOT_PREFIX):].isdigit()
