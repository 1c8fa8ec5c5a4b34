"""
Termination Database Miner - Corpus Mining
Validates each corpus definition's termination obligation with the
structural decrease checker and stores the surviving schemes.

The checker is the trusted validator. A clause it cannot prove is run
through the bounded falsifier for the report, and the definition is
rejected either way.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from tdm_config import DEFAULT_MAX_COUNT
from core.errors import CorpusError, DecreaseLiteralError
from core.events import Event, EventBus, EventType
from core.terms import App, Const, Term, Var, print_term
from obligations.defuns import FunctionDef, SourceDef
from obligations.evaluator import Counterexample, falsify
from obligations.rulers import Clause, ClauseList, Measure, default_measure, measure_conjecture
from normalize.canonical import canonical_measure, canonicalize
from normalize.simplify import simplify
from normalize.theory import DEFAULT_THEORY, TheoryRegistry
from database.schemes import (
    Database, InsertAction, Justification, Provenance, SchemeEntry, insert_entry,
)

logger = logging.getLogger(__name__)


# ─── Structural Decrease Checker ─────────────────────────────────────

class DecreaseVerdict(Enum):
    PROVEN = "proven"
    UNKNOWN = "unknown"


def _is_count_of_variable(t: Term) -> bool:
    return isinstance(t, App) and t.head == "acl2-count" and isinstance(t.args[0], Var)


def decrease_literal_of(c: Clause) -> Tuple[Term, str]:
    """
    The unique positive literal (< m' (acl2-count v)); returns (m', v).
    Raises DecreaseLiteralError if there is not exactly one.
    """
    found = [t for t in c.literals
             if isinstance(t, App) and t.head == "<" and _is_count_of_variable(t.args[1])]
    if len(found) != 1:
        raise DecreaseLiteralError(
            f"expected one decrease literal (< m (acl2-count v)), found {len(found)} in {c}"
        )
    lit = found[0]
    return lit.args[0], lit.args[1].args[0].name


def _is_cxr_chain_on(t: Term, v: str) -> bool:
    """A nonempty car/cdr chain applied to variable v."""
    if not (isinstance(t, App) and t.head in ("car", "cdr")):
        return False
    while isinstance(t, App) and t.head in ("car", "cdr"):
        t = t.args[0]
    return t == Var(v)


def structural_decrease_check(c: Clause) -> DecreaseVerdict:
    """
    Proven when the clause's hypotheses (negated literals) give either
      (a) (consp v) and the smaller measure is the count of a car/cdr chain on v, or
      (b) (not (zp v)) and the smaller measure is (acl2-count (- v 1)).
    """
    smaller, v = decrease_literal_of(c)
    if not (isinstance(smaller, App) and smaller.head == "acl2-count"):
        return DecreaseVerdict.UNKNOWN
    inner = smaller.args[0]
    hyps = set(c.literals)
    var = Var(v)

    if _is_cxr_chain_on(inner, v) and App("not", (App("consp", (var,)),)) in hyps:
        return DecreaseVerdict.PROVEN
    if inner == App("-", (var, Const(1))) and App("zp", (var,)) in hyps:
        return DecreaseVerdict.PROVEN
    return DecreaseVerdict.UNKNOWN


def clauses_proven(cl: ClauseList) -> bool:
    try:
        return all(structural_decrease_check(c) is DecreaseVerdict.PROVEN for c in cl)
    except DecreaseLiteralError:
        return False


# ─── Measure Inference ───────────────────────────────────────────────

def simplified_obligation(d: FunctionDef, m: Measure,
                          theory: TheoryRegistry = DEFAULT_THEORY) -> ClauseList:
    return simplify(measure_conjecture(d, m), theory)


def candidate_measures(d: FunctionDef) -> List[Measure]:
    """The declared measure, or (acl2-count f) for each formal left to right."""
    if d.declared_measure is not None:
        return [Measure(d.declared_measure)]
    return [default_measure(f) for f in d.formals]


def infer_measure(d: FunctionDef, theory: TheoryRegistry = DEFAULT_THEORY
                  ) -> Optional[Tuple[Measure, ClauseList]]:
    """First candidate measure whose every clause the checker proves."""
    for m in candidate_measures(d):
        cl = simplified_obligation(d, m, theory)
        if clauses_proven(cl):
            return m, cl
    return None


@dataclass(frozen=True)
class ClauseCheck:
    """Per-clause verdict of `tdm check`."""
    index: int
    clause: Clause
    verdict: DecreaseVerdict
    counterexample: Optional[Counterexample] = None
    malformed: Optional[str] = None

    def __str__(self) -> str:
        if self.malformed:
            status = f"malformed: {self.malformed}"
        elif self.verdict is DecreaseVerdict.PROVEN:
            status = "proven"
        elif self.counterexample is not None:
            env = str(self.counterexample).split(": ", 1)[1]
            status = f"counterexample {env}"
        else:
            status = "unknown (no counterexample found)"
        return f"clause {self.index}: {status}"


def check_definition(d: FunctionDef, max_count: int = DEFAULT_MAX_COUNT,
                     theory: TheoryRegistry = DEFAULT_THEORY
                     ) -> Tuple[Optional[Measure], List[ClauseCheck]]:
    """
    Checker plus falsifier over the inferred measure's obligation, or
    the first candidate's when no measure is inferred.
    """
    found = infer_measure(d, theory)
    if found is not None:
        m, cl = found
    else:
        candidates = candidate_measures(d)
        if not candidates:
            return None, []
        m = candidates[0]
        cl = simplified_obligation(d, m, theory)

    checks = []
    for i, c in enumerate(cl):
        try:
            verdict = structural_decrease_check(c)
        except DecreaseLiteralError as e:
            checks.append(ClauseCheck(i, c, DecreaseVerdict.UNKNOWN, malformed=str(e)))
            continue
        cex = None
        if verdict is DecreaseVerdict.UNKNOWN:
            cex = falsify(ClauseList((c,)), max_count)
            if cex is not None:
                cex = Counterexample(i, cex.env)
        checks.append(ClauseCheck(i, c, verdict, cex))
    return m, checks


def rejection_reason(d: FunctionDef, max_count: int = DEFAULT_MAX_COUNT,
                     theory: TheoryRegistry = DEFAULT_THEORY) -> str:
    if not d.is_recursive:
        return "not recursive"
    _, checks = check_definition(d, max_count, theory)
    for chk in checks:
        if chk.malformed:
            return chk.malformed
        if chk.counterexample is not None:
            return f"counterexample in {chk.counterexample}"
    failing = [str(chk.index) for chk in checks if chk.verdict is DecreaseVerdict.UNKNOWN]
    if not failing:
        return "obligation simplifies away"
    return f"not machine-checked (clause {', '.join(failing)})"


# ─── Entries ─────────────────────────────────────────────────────────

def scheme_entry(db: Database, d: FunctionDef, m: Measure, obligation: ClauseList,
                 provenance: Provenance) -> SchemeEntry:
    """Canonicalize a simplified obligation into an uninserted entry."""
    scheme = canonicalize(obligation, d.formals, d.name)
    justification = Justification(canonical_measure(m.term, d.formals), m.relation)
    return db.new_entry(scheme, justification, provenance, d.name)


# ─── Mining ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ReportLine:
    name: str
    accepted: bool
    detail: str
    action: Optional[InsertAction] = None

    def __str__(self) -> str:
        if not self.accepted:
            return f"rejected {self.name}: {self.detail}"
        return f"accepted {self.name}: measure {self.detail}; {self.action}"


@dataclass
class MiningReport:
    lines: List[ReportLine]

    @property
    def accepted(self) -> List[str]:
        return [l.name for l in self.lines if l.accepted]

    @property
    def rejected(self) -> List[str]:
        return [l.name for l in self.lines if not l.accepted]

    def __str__(self) -> str:
        return "\n".join(str(l) for l in self.lines)


CorpusItem = Union[SourceDef, Tuple[FunctionDef, Provenance]]


def _normalize_item(item: CorpusItem) -> Tuple[FunctionDef, Provenance]:
    if isinstance(item, SourceDef):
        d = item.definition
        prov = Provenance.from_book(item.book, d.name) if item.book else Provenance.session(d.name)
        return d, prov
    return item


def mine_corpus(corpus: Iterable[CorpusItem], db: Optional[Database] = None,
                bus: Optional[EventBus] = None, max_count: int = DEFAULT_MAX_COUNT,
                theory: TheoryRegistry = DEFAULT_THEORY) -> Tuple[Database, MiningReport]:
    """
    Mine definitions into `db` (a fresh database when None). Mining the
    same corpus again into the result leaves it unchanged.
    """
    items = [_normalize_item(x) for x in corpus]
    seen = set()
    for d, _ in items:
        if d.name in seen:
            raise CorpusError(f"duplicate definition of {d.name}")
        seen.add(d.name)

    if db is None:
        db = Database(theory.version)
    lines = []
    for d, prov in items:
        found = infer_measure(d, theory) if d.is_recursive else None
        if found is None or not found[1].clauses:
            reason = rejection_reason(d, max_count, theory)
            logger.warning("rejected %s: %s", d.name, reason)
            if bus:
                bus.emit(Event(EventType.DEFINITION_REJECTED,
                               {"name": d.name, "reason": reason}, source="mining"))
            lines.append(ReportLine(d.name, False, reason))
            continue

        m, cl = found
        prov = Provenance(prov.origin, prov.book, list(prov.contributors))
        prov.add_contributors([d.name])
        action = insert_entry(db, scheme_entry(db, d, m, cl, prov), theory.version, bus)
        if bus:
            bus.emit(Event(EventType.DEFINITION_ACCEPTED,
                           {"name": d.name, "measure": print_term(m.term)}, source="mining"))
        lines.append(ReportLine(d.name, True, print_term(m.term), action))

    return db, MiningReport(lines)


def mine_definitions(defs: Sequence[FunctionDef], **kwargs) -> Tuple[Database, MiningReport]:
    """Mine session-origin definitions."""
    return mine_corpus([(d, Provenance.session(d.name)) for d in defs], **kwargs)
