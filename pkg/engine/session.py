"""
Termination Database Miner - Session
The set of functions "defined in the current session".

Pass 1 of the search only looks at entries this set admits: entries of
session origin, and entries some of whose contributors the user named
in a session file.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Set

from obligations.defuns import SourceDef, read_definition_file
from database.schemes import Database, Origin, SchemeEntry


@dataclass
class SessionSet:
    """Names loaded from the session file plus session-origin contributors."""
    names: Set[str] = field(default_factory=set)

    # ── Construction ─────────────────────────────────────────────────

    @classmethod
    def from_database(cls, db: Database, loaded: Iterable[str] = ()) -> "SessionSet":
        s = cls(set(loaded))
        for e in db.entries():
            if e.provenance.origin is Origin.SESSION:
                s.names.update(e.provenance.contributors)
        return s

    @classmethod
    def from_file(cls, db: Database, path: str) -> "SessionSet":
        """Only the names of the file's definitions are used."""
        defs: List[SourceDef] = read_definition_file(path)
        return cls.from_database(db, (d.definition.name for d in defs))

    def add(self, name: str) -> None:
        self.names.add(name)

    # ── Queries ──────────────────────────────────────────────────────

    def admits(self, e: SchemeEntry) -> bool:
        return (e.provenance.origin is Origin.SESSION
                or any(n in self.names for n in e.provenance.contributors))

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)
