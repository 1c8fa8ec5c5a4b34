"""
Termination Database Miner - Rewrite Theory
The small, fixed theory used to simplify clause lists.

Stored schemes and new obligations are only comparable when both were
simplified under the same theory, so the registry carries a version
string that is written into every database and certificate header.
"""

from dataclasses import dataclass
from enum import Enum, auto
from typing import Dict, List, Optional

from tdm_config import THEORY_VERSION
from core.errors import TheoryMismatchError
from core.terms import App, Term, Var, app, match_term, apply_subst, term_size


# ─── Rule Scope ──────────────────────────────────────────────────────

class RuleScope(Enum):
    """Where in a literal a rule may fire."""
    ANY_POSITION = auto()
    LITERAL_TOP = auto()


# ─── Individual Rule ─────────────────────────────────────────────────

@dataclass(frozen=True)
class RewriteRule:
    """
    A single left-to-right rewrite.

    Attributes:
        id:          Stable identifier recorded in rewrite traces.
        pattern:     Left-hand side; its variables are pattern variables.
        replacement: Right-hand side over the pattern's variables.
        scope:       Positions at which the rule applies.
    """
    id: str
    pattern: Term
    replacement: Term
    scope: RuleScope = RuleScope.ANY_POSITION

    def apply(self, t: Term) -> Optional[Term]:
        """Rewrite `t` at its root, or None if the rule does not match."""
        s = match_term(self.pattern, t)
        return apply_subst(self.replacement, s) if s is not None else None


def rule_weight(t: Term) -> int:
    """
    Weight strictly decreased by every shipped rule: node count, plus
    one for each application of a rewritable head.
    """
    rewritable = {"atom", "endp", "null", "eq", "eql"}
    bonus = sum(2 for s in _apps(t) if s.head in rewritable)
    return term_size(t) + bonus


def _apps(t: Term):
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from _apps(a)


# ─── The Registry ────────────────────────────────────────────────────

class TheoryRegistry:
    """
    Registry of the rewrite rules making up one theory version.

    Rules are tried in id order:
        theory.rules()  ->  [R1, R2, R3, R4a, R4b, R5]
    """

    def __init__(self, version: str = THEORY_VERSION):
        self.version = version
        self._rules: Dict[str, RewriteRule] = {}
        self._register_all()

    # ── Public API ───────────────────────────────────────────────────

    def get(self, rule_id: str) -> Optional[RewriteRule]:
        return self._rules.get(rule_id)

    def rules(self, scope: Optional[RuleScope] = None) -> List[RewriteRule]:
        return [r for r in self._rules.values() if scope is None or r.scope == scope]

    def require(self, version: str) -> None:
        """Hard error unless `version` names this theory."""
        if version != self.version:
            raise TheoryMismatchError(
                f"theory {version!r} does not match {self.version!r}"
            )

    def __len__(self) -> int:
        return len(self._rules)

    # ── Registration ─────────────────────────────────────────────────

    def _register(self, rule: RewriteRule):
        self._rules[rule.id] = rule

    def _register_all(self):
        x, y, p = Var("x"), Var("y"), Var("p")

        self._register(RewriteRule("R1", app("atom", x), app("not", app("consp", x))))
        self._register(RewriteRule("R2", app("endp", x), app("not", app("consp", x))))
        self._register(RewriteRule("R3", app("null", x), app("not", x)))
        self._register(RewriteRule("R4a", app("eq", x, y), app("equal", x, y)))
        self._register(RewriteRule("R4b", app("eql", x, y), app("equal", x, y)))
        self._register(RewriteRule(
            "R5", app("not", app("not", p)), p, RuleScope.LITERAL_TOP,
        ))


DEFAULT_THEORY = TheoryRegistry()
