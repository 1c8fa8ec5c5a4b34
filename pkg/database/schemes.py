"""
Termination Database Miner - Scheme Database
Stored termination schemes grouped by justification.

Within a group no entry covers another: inserting a scheme that an
existing entry already covers only records the new contributor, and
inserting a scheme that covers existing entries absorbs them.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from tdm_config import THEORY_VERSION, WELL_FOUNDED_RELATION
from core.errors import TheoryMismatchError
from core.events import Event, EventBus, EventType
from core.terms import Term, print_term, term_sort_key, variables_of
from normalize.canonical import CanonicalScheme
from normalize.subsumption import scheme_covers

logger = logging.getLogger(__name__)


# ─── Provenance ──────────────────────────────────────────────────────

class Origin(Enum):
    SESSION = "session"
    BOOK = "book"


@dataclass
class Provenance:
    """Where a scheme comes from and which functions share it."""
    origin: Origin = Origin.SESSION
    book: Optional[str] = None
    contributors: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.origin is Origin.BOOK and not self.book:
            raise ValueError("book provenance needs a book path")
        if self.origin is Origin.SESSION:
            self.book = None

    @classmethod
    def session(cls, *contributors: str) -> "Provenance":
        return cls(Origin.SESSION, None, list(contributors))

    @classmethod
    def from_book(cls, path: str, *contributors: str) -> "Provenance":
        return cls(Origin.BOOK, path, list(contributors))

    def add_contributors(self, names: List[str]) -> None:
        for n in names:
            if n not in self.contributors:
                self.contributors.append(n)

    def merge_origin(self, other: "Provenance") -> None:
        """Session wins: a scheme some session function shares needs no book."""
        if other.origin is Origin.SESSION:
            self.origin, self.book = Origin.SESSION, None


# ─── Entries ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Justification:
    """Canonical measure over slots plus the well-founded relation."""
    measure: Term
    relation: str = WELL_FOUNDED_RELATION

    @property
    def sort_key(self) -> tuple:
        return (term_sort_key(self.measure), self.relation)

    def slots(self) -> List[str]:
        return sorted(variables_of(self.measure))

    def __str__(self) -> str:
        return f"{print_term(self.measure)} {self.relation}"


@dataclass
class SchemeEntry:
    id: int
    scheme: CanonicalScheme
    justification: Justification
    provenance: Provenance
    representative: str


class InsertKind(Enum):
    ADDED = "added"
    SKIPPED = "skipped"
    REPLACED = "replaced"


@dataclass(frozen=True)
class InsertAction:
    kind: InsertKind
    entry_id: int
    ids: Tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.kind is InsertKind.SKIPPED:
            return f"skipped (covered by entry {self.ids[0]})"
        if self.kind is InsertKind.REPLACED:
            return f"added entry {self.entry_id}, replacing {', '.join(map(str, self.ids))}"
        return f"added entry {self.entry_id}"


# ─── Database ────────────────────────────────────────────────────────

class Database:
    """
    The scheme database.

    Counters are derived from contents, so they stay consistent:
        entries   = sum of group sizes
        functions = sum of contributor counts
    """

    def __init__(self, theory_version: str = THEORY_VERSION, next_id: int = 0):
        self.theory_version = theory_version
        self.groups: Dict[Justification, List[SchemeEntry]] = {}
        self.next_id = next_id

    # ── Queries ──────────────────────────────────────────────────────

    @property
    def entry_count(self) -> int:
        return sum(len(g) for g in self.groups.values())

    @property
    def function_count(self) -> int:
        return sum(len(e.provenance.contributors) for e in self.entries())

    def justifications(self) -> List[Justification]:
        """Groups in canonical measure order."""
        return sorted(self.groups, key=lambda j: j.sort_key)

    def entries(self) -> Iterator[SchemeEntry]:
        for j in self.justifications():
            yield from self.groups[j]

    def get(self, entry_id: int) -> Optional[SchemeEntry]:
        for e in self.entries():
            if e.id == entry_id:
                return e
        return None

    def group_of(self, entry_id: int) -> Optional[Justification]:
        for j, group in self.groups.items():
            if any(e.id == entry_id for e in group):
                return j
        return None

    def contributors(self) -> List[str]:
        names = []
        for e in self.entries():
            names.extend(e.provenance.contributors)
        return names

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Database):
            return NotImplemented
        return (self.theory_version == other.theory_version
                and self.next_id == other.next_id
                and self.groups == other.groups)

    # ── Mutation ─────────────────────────────────────────────────────

    def new_entry(self, scheme: CanonicalScheme, justification: Justification,
                  provenance: Provenance, representative: str) -> SchemeEntry:
        """An entry carrying the next id; not yet inserted."""
        return SchemeEntry(self.next_id, scheme, justification, provenance, representative)


def insert_entry(db: Database, e: SchemeEntry, theory_version: str = THEORY_VERSION,
                 bus: Optional[EventBus] = None) -> InsertAction:
    """Insert keeping the group irredundant."""
    if db.theory_version != theory_version:
        raise TheoryMismatchError(
            f"database theory {db.theory_version!r} does not match {theory_version!r}"
        )
    group = db.groups.setdefault(e.justification, [])

    for existing in group:
        if scheme_covers(existing.scheme, e.scheme):
            existing.provenance.add_contributors(e.provenance.contributors)
            existing.provenance.merge_origin(e.provenance)
            action = InsertAction(InsertKind.SKIPPED, existing.id, (existing.id,))
            logger.info("%s: %s", e.representative, action)
            if bus:
                bus.emit(Event(EventType.ENTRY_SKIPPED,
                               {"name": e.representative, "entry": existing.id},
                               source="database"))
            return action

    covered = [x for x in group if scheme_covers(e.scheme, x.scheme)]
    e.id = max(e.id, db.next_id)
    for x in covered:
        e.provenance.add_contributors(x.provenance.contributors)
        e.provenance.merge_origin(x.provenance)
    group[:] = [x for x in group if x not in covered] + [e]
    group.sort(key=lambda x: x.id)
    db.next_id = e.id + 1

    if covered:
        action = InsertAction(InsertKind.REPLACED, e.id, tuple(x.id for x in covered))
        event = EventType.ENTRY_REPLACED
    else:
        action = InsertAction(InsertKind.ADDED, e.id)
        event = EventType.ENTRY_ADDED
    logger.info("%s: %s", e.representative, action)
    if bus:
        bus.emit(Event(event, {"name": e.representative, "entry": e.id,
                               "replaced": list(action.ids)}, source="database"))
    return action


# ─── Statistics ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class Stats:
    entries: int
    functions: int
    groups: int
    group_sizes: Tuple[Tuple[str, int], ...]

    def summary(self) -> str:
        return f"entries={self.entries} functions={self.functions} groups={self.groups}"


def stats(db: Database) -> Stats:
    sizes = tuple((str(j), len(db.groups[j])) for j in db.justifications() if db.groups[j])
    return Stats(db.entry_count, db.function_count, len(sizes), sizes)
