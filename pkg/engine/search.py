"""
Termination Database Miner - Search
Two-pass subsumption search for a new definition's termination argument.

Each stored justification, instantiated by an injective slot mapping,
is a candidate measure. A candidate succeeds when every clause of the
new definition's simplified obligation is subsumed by some clause of
some entry in a group that yields that measure. Pass 1 only looks at
session entries; pass 2 at everything.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from tdm_config import DEFAULT_MAX_COUNT, DEFAULT_MAX_SLOT_MAPPINGS, SLOT_PREFIX
from core.errors import ConfigError, DefinitionError
from core.events import Event, EventBus, EventType
from core.terms import Substitution, Term, apply_subst, print_term, renaming
from obligations.defuns import FunctionDef
from obligations.rulers import ClauseList, Measure, default_measure, measure_conjecture
from normalize.simplify import RewriteTrace, simplify_clause_list
from normalize.subsumption import SubsumptionWitness, clause_subsumes
from normalize.theory import DEFAULT_THEORY, TheoryRegistry
from database.mining import clauses_proven, scheme_entry
from database.schemes import (
    Database, InsertAction, Justification, Origin, Provenance, SchemeEntry, insert_entry,
)
from engine.session import SessionSet

logger = logging.getLogger(__name__)

SESSION_PASS = 1
FULL_PASS = 2
FALLBACK_PASS = 0


# ─── Configuration ───────────────────────────────────────────────────

@dataclass
class SearchConfig:
    two_pass: bool = True
    max_slot_mappings: int = DEFAULT_MAX_SLOT_MAPPINGS
    fallback_default_measures: bool = True
    incremental_extend: bool = False
    max_count: int = DEFAULT_MAX_COUNT

    def __post_init__(self):
        if self.max_slot_mappings < 1:
            raise ConfigError(f"max-slot-mappings must be at least 1, got {self.max_slot_mappings}")
        if self.max_count < 0:
            raise ConfigError(f"max-count must be a natural number, got {self.max_count}")


# ─── Measure Candidates ──────────────────────────────────────────────

SlotMapping = Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class MeasureCandidate:
    """
    One instantiated measure. `sources` lists every (justification,
    slot mapping) that instantiates to it, in enumeration order.
    """
    measure: Measure
    sources: Tuple[Tuple[Justification, SlotMapping], ...]


def _slot_number(name: str) -> int:
    return int(name[len(SLOT_PREFIX):])


def enumerate_measure_candidates(db: Database, formals: Sequence[str],
                                 max_slot_mappings: int = DEFAULT_MAX_SLOT_MAPPINGS
                                 ) -> List[MeasureCandidate]:
    """
    Per group in canonical measure order, every injective slot-to-formal
    mapping in lexicographic formal order, at most `max_slot_mappings`
    per group. Equal instantiated measures merge into the first.
    """
    order: List[Term] = []
    sources: Dict[Term, List[Tuple[Justification, SlotMapping]]] = {}
    for j in db.justifications():
        if not db.groups[j]:
            continue
        slots = sorted(j.slots(), key=_slot_number)
        perms = itertools.permutations(formals, len(slots))
        for image in itertools.islice(perms, max_slot_mappings):
            mu = tuple(zip(slots, image))
            term = apply_subst(j.measure, renaming(dict(mu)))
            if term not in sources:
                order.append(term)
                sources[term] = []
            sources[term].append((j, mu))
    return [MeasureCandidate(Measure(t), tuple(sources[t])) for t in order]


# ─── Results ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class UsedEntry:
    entry_id: int
    representative: str
    origin: Origin
    book: Optional[str] = None


@dataclass(frozen=True)
class ClauseWitness:
    """New clause `clause_index` is subsumed by clause `entry_clause` of entry `entry_id`."""
    clause_index: int
    entry_id: int
    entry_clause: int
    witness: SubsumptionWitness


@dataclass
class SearchResult:
    measure: Measure
    obligation: ClauseList
    simplified: ClauseList
    trace: RewriteTrace
    used_entries: Tuple[UsedEntry, ...] = ()
    witnesses: Tuple[ClauseWitness, ...] = ()
    pass_number: int = FULL_PASS
    elapsed_ms: float = field(default=0.0, compare=False)

    @property
    def fallback(self) -> bool:
        return self.pass_number == FALLBACK_PASS

    @property
    def includes_needed(self) -> Tuple[str, ...]:
        books = []
        for u in self.used_entries:
            if u.origin is Origin.BOOK and u.book not in books:
                books.append(u.book)
        return tuple(books)

    def names(self) -> List[str]:
        return [u.representative for u in self.used_entries]

    def book_users(self, book: str) -> List[str]:
        return [u.representative for u in self.used_entries if u.book == book]


def join_names(names: Sequence[str]) -> str:
    """a / a and b / a, b and c"""
    if len(names) <= 1:
        return "".join(names)
    return ", ".join(names[:-1]) + " and " + names[-1]


def serialize_result(r: SearchResult) -> str:
    """Deterministic text form; timing is left out."""
    lines = [f"measure {print_term(r.measure.term)}", f"pass {r.pass_number}"]
    for u in r.used_entries:
        where = f"book {u.book}" if u.origin is Origin.BOOK else "session"
        lines.append(f"used {u.entry_id} {where} {u.representative}")
    for book in r.includes_needed:
        lines.append(f"include {book}")
    for w in r.witnesses:
        s = w.witness.substitution
        binds = " ".join(f"{k}={print_term(v)}" for k, v in s.sorted_bindings())
        stubs = " ".join(f"{k}={v}" for k, v in s.sorted_stubs())
        lmap = " ".join(map(str, w.witness.literal_map))
        lines.append(f"witness {w.clause_index} entry {w.entry_id} clause {w.entry_clause} "
                     f"map [{lmap}] subst [{binds}] stubs [{stubs}]")
    return "\n".join(lines) + "\n"


# ─── Search ──────────────────────────────────────────────────────────

def _candidate_entries(db: Database, cand: MeasureCandidate, session: Optional[SessionSet]
                       ) -> List[Tuple[SchemeEntry, Substitution]]:
    pool = []
    for j, mu in cand.sources:
        seed = renaming(dict(mu))
        for e in db.groups.get(j, []):
            if session is None or session.admits(e):
                pool.append((e, seed))
    pool.sort(key=lambda pair: pair[0].id)
    return pool


def cover_clauses(simplified: ClauseList, pool: List[Tuple[SchemeEntry, Substitution]],
                  target_name: str) -> Optional[List[ClauseWitness]]:
    """First witness per clause, lowest entry id first; None if some clause is uncovered."""
    witnesses = []
    for ci, new in enumerate(simplified.clauses):
        found = None
        for e, seed in pool:
            for k, old in enumerate(e.scheme.clauses):
                w = clause_subsumes(old, new, seed, target_name)
                if w is not None:
                    found = ClauseWitness(ci, e.id, k, w)
                    break
            if found:
                break
        if found is None:
            return None
        witnesses.append(found)
    return witnesses


def _used_entries(db: Database, witnesses: List[ClauseWitness]) -> Tuple[UsedEntry, ...]:
    used = []
    for entry_id in sorted({w.entry_id for w in witnesses}):
        e = db.get(entry_id)
        used.append(UsedEntry(e.id, e.representative, e.provenance.origin, e.provenance.book))
    return tuple(used)


def _run_pass(db: Database, d: FunctionDef, candidates: List[MeasureCandidate],
              session: Optional[SessionSet], pass_number: int,
              theory: TheoryRegistry) -> Optional[SearchResult]:
    for cand in candidates:
        pool = _candidate_entries(db, cand, session)
        if not pool:
            continue
        raw = measure_conjecture(d, cand.measure)
        simplified, trace = simplify_clause_list(raw, theory)
        if not simplified.clauses:
            continue
        witnesses = cover_clauses(simplified, pool, d.name)
        logger.debug("pass %d: %s %s", pass_number, print_term(cand.measure.term),
                     "covers" if witnesses else "fails")
        if witnesses is not None:
            return SearchResult(cand.measure, raw, simplified, trace,
                                _used_entries(db, witnesses), tuple(witnesses), pass_number)
    return None


def _fallback(d: FunctionDef, theory: TheoryRegistry) -> Optional[SearchResult]:
    for f in d.formals:
        m = default_measure(f)
        raw = measure_conjecture(d, m)
        simplified, trace = simplify_clause_list(raw, theory)
        if clauses_proven(simplified):
            return SearchResult(m, raw, simplified, trace, pass_number=FALLBACK_PASS)
    return None


def search(db: Database, session: Optional[SessionSet], d: FunctionDef,
           cfg: Optional[SearchConfig] = None, bus: Optional[EventBus] = None,
           theory: TheoryRegistry = DEFAULT_THEORY) -> Optional[SearchResult]:
    """A SearchResult, or None when nothing covers the obligation."""
    cfg = cfg or SearchConfig()
    if not d.is_recursive:
        raise DefinitionError(f"{d.name} is not recursive")
    if session is None:
        session = SessionSet.from_database(db)
    theory.require(db.theory_version)
    started = time.perf_counter()

    def emit(kind: str, **data):
        if bus:
            bus.emit(Event(kind, data, source="search"))

    candidates = enumerate_measure_candidates(db, d.formals, cfg.max_slot_mappings)
    passes = [(SESSION_PASS, session), (FULL_PASS, None)] if cfg.two_pass else [(FULL_PASS, None)]

    result = None
    for number, restriction in passes:
        emit(EventType.PASS_STARTED, name=d.name, pass_number=number)
        result = _run_pass(db, d, candidates, restriction, number, theory)
        if result is not None:
            break
        emit(EventType.PASS_FAILED, name=d.name, pass_number=number)

    if result is None and cfg.fallback_default_measures:
        result = _fallback(d, theory)
        if result is not None:
            emit(EventType.FALLBACK_USED, name=d.name, measure=print_term(result.measure.term))

    if result is None:
        logger.info("no stored scheme covers %s", d.name)
        emit(EventType.NO_MATCH, name=d.name)
        return None

    result.elapsed_ms = (time.perf_counter() - started) * 1000.0
    if result.used_entries:
        emit(EventType.SCHEMES_USED, name=d.name, names=result.names(),
             pass_number=result.pass_number)
    for book in result.includes_needed:
        emit(EventType.BOOK_REQUIRED, book=book, names=result.book_users(book))
    return result


# ─── Incremental Extension ───────────────────────────────────────────

def extend_database(db: Database, d: FunctionDef, result: SearchResult,
                    cfg: Optional[SearchConfig] = None, bus: Optional[EventBus] = None,
                    theory: TheoryRegistry = DEFAULT_THEORY) -> Optional[InsertAction]:
    """Store the proved definition's scheme as a session entry; None when disabled."""
    cfg = cfg or SearchConfig()
    if not cfg.incremental_extend:
        return None
    entry = scheme_entry(db, d, result.measure, result.simplified, Provenance.session(d.name))
    action = insert_entry(db, entry, theory.version, bus)
    if bus:
        bus.emit(Event(EventType.DATABASE_EXTENDED,
                       {"name": d.name, "action": str(action)}, source="search"))
    return action
