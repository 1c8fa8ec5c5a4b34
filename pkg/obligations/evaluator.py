"""
Termination Database Miner - Evaluator
Total, fuel-bounded evaluation over naturals, symbols and pairs, and
the bounded falsifier built on it.

Coercions keep every builtin total: car/cdr of a non-pair is nil,
arithmetic reads non-naturals as 0, subtraction truncates at 0.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from tdm_config import DEFAULT_EVAL_FUEL, DEFAULT_MAX_COUNT, NIL, T
from core.errors import EvaluationError
from core.terms import Const, Pair, Term, Value, Var, print_value, uses_only_builtins, variables_of
from obligations.defuns import FunctionDef
from obligations.rulers import Clause, ClauseList

logger = logging.getLogger(__name__)


# ─── Size ────────────────────────────────────────────────────────────

def acl2_count(v: Value) -> int:
    """Naturals count as themselves, pairs as 1 + both halves, symbols 0."""
    total = 0
    pending = [v]
    while pending:
        x = pending.pop()
        if isinstance(x, Pair):
            total += 1
            pending.append(x.car)
            pending.append(x.cdr)
        elif isinstance(x, int):
            total += x
    return total


# ─── Evaluation ──────────────────────────────────────────────────────

class Nonterminating:
    """Verdict returned when evaluation runs out of fuel."""

    def __repr__(self) -> str:
        return "NONTERMINATING"


NONTERMINATING = Nonterminating()


# Work-stack operations.
_EVAL, _BRANCH, _APPLY = "eval", "branch", "apply"


def _bool(b: bool) -> str:
    return T if b else NIL


def _nat(v: Value) -> int:
    return v if isinstance(v, int) else 0


def _apply_builtin(head: str, args: List[Value]) -> Value:
    if head == "not" or head == "null":
        return _bool(args[0] == NIL)
    if head == "consp":
        return _bool(isinstance(args[0], Pair))
    if head in ("atom", "endp"):
        return _bool(not isinstance(args[0], Pair))
    if head in ("eq", "eql", "equal"):
        return _bool(args[0] == args[1])
    if head == "car":
        return args[0].car if isinstance(args[0], Pair) else NIL
    if head == "cdr":
        return args[0].cdr if isinstance(args[0], Pair) else NIL
    if head == "cons":
        return Pair(args[0], args[1])
    if head == "zp":
        return _bool(not (isinstance(args[0], int) and args[0] > 0))
    if head in ("natp", "integerp"):
        return _bool(isinstance(args[0], int))
    if head == "<":
        return _bool(_nat(args[0]) < _nat(args[1]))
    if head == "+":
        return _nat(args[0]) + _nat(args[1])
    if head == "-":
        return max(0, _nat(args[0]) - _nat(args[1]))
    if head == "acl2-count":
        return acl2_count(args[0])
    raise EvaluationError(f"unknown symbol {head}")


def eval_term(t: Term, env: Mapping[str, Value],
              defs: Optional[Mapping[str, FunctionDef]] = None,
              fuel: int = DEFAULT_EVAL_FUEL) -> Union[Value, Nonterminating]:
    """
    Strict evaluation (lazy only in `if` branches).

    Each user-function call consumes one unit of fuel; exhaustion
    yields NONTERMINATING instead of a value. Runs on an explicit work
    stack, so call depth is bounded by fuel alone.
    """
    defs = defs or {}
    remaining = fuel
    work: List[Tuple[str, Term, Mapping[str, Value]]] = [(_EVAL, t, env)]
    values: List[Value] = []

    while work:
        op, term, frame = work.pop()
        if op == _EVAL:
            if isinstance(term, Const):
                values.append(term.value)
            elif isinstance(term, Var):
                if term.name not in frame:
                    raise EvaluationError(f"unbound variable {term.name}")
                values.append(frame[term.name])
            elif term.head == "if":
                work.append((_BRANCH, term, frame))
                work.append((_EVAL, term.args[0], frame))
            else:
                work.append((_APPLY, term, frame))
                for a in reversed(term.args):
                    work.append((_EVAL, a, frame))
        elif op == _BRANCH:
            test = values.pop()
            work.append((_EVAL, term.args[1] if test != NIL else term.args[2], frame))
        else:
            n = len(term.args)
            args = values[len(values) - n:]
            del values[len(values) - n:]
            d = defs.get(term.head)
            if d is None:
                values.append(_apply_builtin(term.head, args))
                continue
            if remaining <= 0:
                return NONTERMINATING
            remaining -= 1
            work.append((_EVAL, d.body, dict(zip(d.formals, args))))
    return values[-1]


# ─── Enumeration ─────────────────────────────────────────────────────

@lru_cache(maxsize=None)
def values_of_count(count: int) -> Tuple[Value, ...]:
    """Every value of exactly this acl2-count, atoms first."""
    if count == 0:
        return (NIL, T, 0)
    out: List[Value] = [count]
    for left in range(count):
        for a in values_of_count(left):
            for b in values_of_count(count - 1 - left):
                out.append(Pair(a, b))
    return tuple(out)


def _compositions(total: int, parts: int, cap: int) -> Iterator[Tuple[int, ...]]:
    """Ordered splits of `total` into `parts` naturals, each at most `cap`."""
    if parts == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap) + 1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


SizePools = Dict[str, List[Tuple[Value, ...]]]


def _size_pools(variables: List[str], max_count: int) -> SizePools:
    return {v: [values_of_count(c) for c in range(max_count + 1)] for v in variables}


def _assignments(variables: List[str], pools: SizePools,
                 max_count: int) -> Iterator[Dict[str, Value]]:
    """Product of the per-variable pools, smaller total size first."""
    if not variables:
        yield {}
        return
    for total in range(len(variables) * max_count + 1):
        for sizes in _compositions(total, len(variables), max_count):
            chosen = [pools[v][s] for v, s in zip(variables, sizes)]
            for combo in itertools.product(*chosen):
                yield dict(zip(variables, combo))


def environments(variables: List[str], max_count: int) -> Iterator[Dict[str, Value]]:
    """
    Every assignment giving each variable a value of acl2-count at most
    `max_count`, in increasing total size.
    """
    return _assignments(list(variables), _size_pools(list(variables), max_count), max_count)


# ─── Falsifier ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class Counterexample:
    clause_index: int
    env: Tuple[Tuple[str, Value], ...]

    def __str__(self) -> str:
        bindings = " ".join(f"{k}={print_value(v)}" for k, v in self.env)
        return f"clause {self.clause_index}: {bindings}"


def falsifiable_clauses(cl: ClauseList) -> List[int]:
    """Indices of clauses over builtins only."""
    return [i for i, c in enumerate(cl.clauses)
            if all(uses_only_builtins(t) for t in c.literals)]


def _falsify_clause(clause: Clause, max_count: int) -> Optional[Dict[str, Value]]:
    """
    First environment, in `environments` order, making every literal nil.

    Literals over a single variable prune that variable's pool before
    the product is taken; pruned values can never falsify the clause,
    so the first hit is the same as in the unpruned order.
    """
    variables = sorted(clause.variables())
    unary: Dict[str, List[Term]] = {v: [] for v in variables}
    mixed: List[Term] = []
    for lit in clause.literals:
        vs = variables_of(lit)
        if not vs:
            if eval_term(lit, {}) != NIL:
                return None
        elif len(vs) == 1:
            unary[next(iter(vs))].append(lit)
        else:
            mixed.append(lit)

    pools = _size_pools(variables, max_count)
    for v in variables:
        if unary[v]:
            pools[v] = [tuple(x for x in pool
                              if all(eval_term(lit, {v: x}) == NIL for lit in unary[v]))
                        for pool in pools[v]]
        if not any(pools[v]):
            return None

    for env in _assignments(variables, pools, max_count):
        if all(eval_term(lit, env) == NIL for lit in mixed):
            return env
    return None


def falsify(cl: ClauseList, max_count: int = DEFAULT_MAX_COUNT) -> Optional[Counterexample]:
    """
    First assignment, in enumeration order, making every literal of
    some clause nil. Each variable ranges over all values of acl2-count
    up to `max_count`. Clauses mentioning user or stub symbols are skipped.
    """
    checkable = set(falsifiable_clauses(cl))
    for i, clause in enumerate(cl.clauses):
        if i not in checkable:
            logger.debug("clause %d mentions non-builtin symbols; not falsifiable", i)
            continue
        env = _falsify_clause(clause, max_count)
        if env is not None:
            return Counterexample(i, tuple(sorted(env.items())))
    return None
