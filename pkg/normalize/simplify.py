"""
Termination Database Miner - Clause-List Simplifier
Rewrites literals to a fixpoint under the theory, then applies clause
hygiene. Every change is recorded in a RewriteTrace that replays
exactly on the original clause list.

Per literal: innermost-first, rules in id order; literal-top rules only
at the root. Per clause: drop tautologies (a non-nil constant literal
or a complementary pair p / (not p)), drop duplicate literals, sort.
Per list: drop clauses equal to an earlier one.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

from tdm_config import NIL
from core.errors import ReplayError
from core.terms import App, Const, Term, term_sort_key
from obligations.rulers import Clause, ClauseList
from normalize.theory import DEFAULT_THEORY, RuleScope, TheoryRegistry

logger = logging.getLogger(__name__)

Path = Tuple[int, ...]


# ─── Trace ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RewriteStep:
    """Rule `rule_id` fired at `path` inside one literal of one clause."""
    clause_index: int
    literal_index: int
    path: Path
    rule_id: str


class ActionKind(Enum):
    TAUTOLOGY_DROP = "tautology-drop"
    DEDUP = "dedup"
    REORDER = "reorder"
    DUPLICATE_CLAUSE_DROP = "duplicate-clause-drop"


@dataclass(frozen=True)
class ClauseAction:
    """
    Clause-level action. `detail` is the removed positions for DEDUP
    and the new order of positions for REORDER.
    """
    kind: ActionKind
    clause_index: int
    detail: Tuple[int, ...] = ()


@dataclass(frozen=True)
class RewriteTrace:
    steps: Tuple[RewriteStep, ...] = ()
    actions: Tuple[ClauseAction, ...] = ()

    def rules_used(self) -> List[str]:
        return sorted({s.rule_id for s in self.steps})

    def __len__(self) -> int:
        return len(self.steps) + len(self.actions)


# ─── Positions ───────────────────────────────────────────────────────

def subterm_at(t: Term, path: Path) -> Term:
    for i in path:
        if not isinstance(t, App) or i >= len(t.args):
            raise ReplayError(f"no subterm at path {path}")
        t = t.args[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    assert isinstance(t, App)
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(t.head, tuple(args))


# ─── Literal Rewriting ───────────────────────────────────────────────

def _find_redex(t: Term, theory: TheoryRegistry, path: Path = ()) -> Optional[Tuple[Path, str, Term]]:
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            hit = _find_redex(a, theory, path + (i,))
            if hit is not None:
                return hit
    for rule in theory.rules():
        if rule.scope is RuleScope.LITERAL_TOP and path:
            continue
        new = rule.apply(t)
        if new is not None:
            return path, rule.id, new
    return None


def rewrite_literal(lit: Term, theory: TheoryRegistry = DEFAULT_THEORY,
                    record: Optional[Callable[[Path, str], None]] = None) -> Term:
    """Rewrite one literal to its normal form."""
    while True:
        hit = _find_redex(lit, theory)
        if hit is None:
            return lit
        path, rule_id, new = hit
        if record is not None:
            record(path, rule_id)
        lit = replace_at(lit, path, new)


# ─── Clause Hygiene ──────────────────────────────────────────────────

def is_tautology(literals: List[Term]) -> bool:
    keys = {term_sort_key(t) for t in literals}
    for t in literals:
        if isinstance(t, Const) and t.value != NIL:
            return True
        if isinstance(t, App) and t.head == "not" and term_sort_key(t.args[0]) in keys:
            return True
    return False


def _duplicate_positions(literals: List[Term]) -> Tuple[int, ...]:
    seen = set()
    removed = []
    for i, t in enumerate(literals):
        k = term_sort_key(t)
        if k in seen:
            removed.append(i)
        seen.add(k)
    return tuple(removed)


def _sort_order(literals: List[Term]) -> Tuple[int, ...]:
    return tuple(sorted(range(len(literals)), key=lambda i: term_sort_key(literals[i])))


# ─── Simplification ──────────────────────────────────────────────────

def simplify_clause_list(cl: ClauseList, theory: TheoryRegistry = DEFAULT_THEORY
                         ) -> Tuple[ClauseList, RewriteTrace]:
    """Simplify to the theory's fixpoint; idempotent."""
    steps: List[RewriteStep] = []
    actions: List[ClauseAction] = []
    kept: List[Tuple[int, Clause]] = []

    for ci, clause in enumerate(cl.clauses):
        literals = []
        for li, lit in enumerate(clause.literals):
            def record(path: Path, rule_id: str, ci=ci, li=li):
                steps.append(RewriteStep(ci, li, path, rule_id))
            literals.append(rewrite_literal(lit, theory, record))

        if is_tautology(literals):
            actions.append(ClauseAction(ActionKind.TAUTOLOGY_DROP, ci))
            continue
        removed = _duplicate_positions(literals)
        if removed:
            actions.append(ClauseAction(ActionKind.DEDUP, ci, removed))
            literals = [t for i, t in enumerate(literals) if i not in removed]
        order = _sort_order(literals)
        if order != tuple(range(len(literals))):
            actions.append(ClauseAction(ActionKind.REORDER, ci, order))
            literals = [literals[i] for i in order]
        kept.append((ci, Clause(tuple(literals))))

    seen = set()
    result = []
    for ci, clause in kept:
        if clause.sort_key in seen:
            actions.append(ClauseAction(ActionKind.DUPLICATE_CLAUSE_DROP, ci))
            continue
        seen.add(clause.sort_key)
        result.append(clause)

    logger.debug("simplified %d clause(s) to %d with %d rewrite(s)",
                 len(cl), len(result), len(steps))
    return ClauseList(tuple(result)), RewriteTrace(tuple(steps), tuple(actions))


def simplify(cl: ClauseList, theory: TheoryRegistry = DEFAULT_THEORY) -> ClauseList:
    return simplify_clause_list(cl, theory)[0]


# ─── Replay ──────────────────────────────────────────────────────────

def replay_trace(cl: ClauseList, trace: RewriteTrace,
                 theory: TheoryRegistry = DEFAULT_THEORY) -> ClauseList:
    """
    Re-apply a recorded trace to the original clause list. Raises
    ReplayError as soon as a recorded step does not apply.
    """
    working = [list(c.literals) for c in cl.clauses]
    dropped = set()

    for step in trace.steps:
        if step.clause_index >= len(working) or step.literal_index >= len(working[step.clause_index]):
            raise ReplayError(f"step {step} points outside the clause list")
        rule = theory.get(step.rule_id)
        if rule is None:
            raise ReplayError(f"unknown rule {step.rule_id}")
        if rule.scope is RuleScope.LITERAL_TOP and step.path:
            raise ReplayError(f"{step.rule_id} applies only at the top of a literal")
        lit = working[step.clause_index][step.literal_index]
        new = rule.apply(subterm_at(lit, step.path))
        if new is None:
            raise ReplayError(f"{step.rule_id} does not apply at {step.path}")
        working[step.clause_index][step.literal_index] = replace_at(lit, step.path, new)

    for action in trace.actions:
        ci = action.clause_index
        if ci >= len(working) or ci in dropped:
            raise ReplayError(f"action on missing clause {ci}")
        literals = working[ci]
        if action.kind is ActionKind.TAUTOLOGY_DROP:
            if not is_tautology(literals):
                raise ReplayError(f"clause {ci} is not a tautology")
            dropped.add(ci)
        elif action.kind is ActionKind.DEDUP:
            if any(i >= len(literals) for i in action.detail) or \
                    tuple(_duplicate_positions(literals)) != action.detail:
                raise ReplayError(f"clause {ci}: bad duplicate positions {action.detail}")
            working[ci] = [t for i, t in enumerate(literals) if i not in action.detail]
        elif action.kind is ActionKind.REORDER:
            if sorted(action.detail) != list(range(len(literals))):
                raise ReplayError(f"clause {ci}: {action.detail} is not a permutation")
            working[ci] = [literals[i] for i in action.detail]
        else:
            earlier = [working[j] for j in range(ci) if j not in dropped]
            if literals not in earlier:
                raise ReplayError(f"clause {ci} duplicates no earlier clause")
            dropped.add(ci)

    return ClauseList(tuple(Clause(tuple(lits)) for i, lits in enumerate(working)
                            if i not in dropped))
