"""
Termination Database Miner - Subsumption
The clause subsumption test shared by search, dedup and verification.

Old clause C subsumes new clause D when some substitution maps every
literal of C onto a literal of D. Slots map only to variables; stubs
map only to the new function.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from core.terms import EMPTY_SUBST, Substitution, Term, match_term, term_size, term_sort_key
from obligations.rulers import Clause
from normalize.canonical import CanonicalScheme


@dataclass(frozen=True)
class SubsumptionWitness:
    """`literal_map[i]` is the index in the new clause matched by old literal i."""
    substitution: Substitution
    literal_map: Tuple[int, ...]


def _pattern_order(old: Clause) -> List[int]:
    """Most constrained (largest) literals first."""
    return sorted(range(len(old.literals)),
                  key=lambda i: (-term_size(old.literals[i]), term_sort_key(old.literals[i])))


def _stubs_allowed(s: Substitution, target_name: Optional[str]) -> bool:
    return target_name is None or all(f == target_name for f in s.stubs.values())


def clause_subsumes(old: Clause, new: Clause, seed: Substitution = EMPTY_SUBST,
                    target_name: Optional[str] = None) -> Optional[SubsumptionWitness]:
    """
    First witness, in deterministic backtracking order, that `old`
    subsumes `new` extending `seed`; None if there is none.
    """
    order = _pattern_order(old)
    assignment = [0] * len(old.literals)

    def search(k: int, s: Substitution) -> Optional[Substitution]:
        if k == len(order):
            return s
        i = order[k]
        for j, target in enumerate(new.literals):
            extended = match_term(old.literals[i], target, s, var_to_var_only=True)
            if extended is None or not _stubs_allowed(extended, target_name):
                continue
            assignment[i] = j
            found = search(k + 1, extended)
            if found is not None:
                return found
        return None

    result = search(0, seed)
    if result is None:
        return None
    return SubsumptionWitness(result, tuple(assignment))


# ─── Scheme Coverage ─────────────────────────────────────────────────

def clause_contained(small: Clause, big: Clause) -> bool:
    """Subsumption under the identity mapping: literal subset."""
    keys = {term_sort_key(t) for t in big.literals}
    return all(term_sort_key(t) in keys for t in small.literals)


def scheme_covers(existing: CanonicalScheme, candidate: CanonicalScheme) -> bool:
    """Every clause of `candidate` is subsumed by some clause of `existing`."""
    return all(any(clause_contained(c, d) for c in existing.clauses)
               for d in candidate.clauses)
