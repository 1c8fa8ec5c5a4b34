"""
Termination Database Miner - Database Files
Line-oriented .tdb persistence.

    format 1
    theory theory-v1
    entries <N>
    functions <M>
    next-id <K>
    entry <id>
    measure <term>
    slots <k>
    origin session | origin book <path>
    contributors <name> ...
    representative <name>
    clause <literal> ...

Entries are written group by group (canonical measure order), by id
within a group, so equal databases always produce identical bytes.
"""

import hashlib
import logging
from typing import Dict, List, Optional, Tuple

from tdm_config import DATABASE_FORMAT, THEORY_VERSION, WELL_FOUNDED_RELATION
from core.errors import DatabaseFormatError, TdmError, TheoryMismatchError
from core.reader import parse_term, parse_terms
from core.terms import print_term
from obligations.rulers import Clause, ClauseList
from normalize.canonical import CanonicalScheme
from database.schemes import (
    Database, Justification, Origin, Provenance, SchemeEntry,
)

logger = logging.getLogger(__name__)

HEADER_KEYS = ("format", "theory", "entries", "functions", "next-id")


# ─── Writing ─────────────────────────────────────────────────────────

def dump_database(db: Database) -> str:
    lines = [
        f"format {DATABASE_FORMAT}",
        f"theory {db.theory_version}",
        f"entries {db.entry_count}",
        f"functions {db.function_count}",
        f"next-id {db.next_id}",
    ]
    for e in db.entries():
        lines.append(f"entry {e.id}")
        lines.append(f"measure {print_term(e.justification.measure)}")
        lines.append(f"slots {e.scheme.slot_count}")
        if e.provenance.origin is Origin.BOOK:
            lines.append(f"origin book {e.provenance.book}")
        else:
            lines.append("origin session")
        lines.append(" ".join(["contributors"] + e.provenance.contributors))
        lines.append(f"representative {e.representative}")
        for c in e.scheme.clauses:
            lines.append(" ".join(["clause"] + [print_term(t) for t in c.literals]))
    return "\n".join(lines) + "\n"


def database_digest(db: Database) -> str:
    """sha256 of the canonical database bytes."""
    return hashlib.sha256(dump_database(db).encode("utf-8")).hexdigest()


def save_database(db: Database, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_database(db))
    logger.info("saved %d entries to %s", db.entry_count, path)


# ─── Reading ─────────────────────────────────────────────────────────

class _Lines:
    """Cursor over (line number, keyword, rest) triples."""

    def __init__(self, text: str):
        self.items: List[Tuple[int, str, str]] = []
        for n, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            key, _, rest = raw.strip().partition(" ")
            self.items.append((n, key, rest.strip()))
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.items[self.pos][1] if self.pos < len(self.items) else None

    def take(self, key: str) -> Tuple[int, str]:
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise DatabaseFormatError(f"unexpected end of file, expected {key!r}", last + 1)
        n, k, rest = self.items[self.pos]
        if k != key:
            raise DatabaseFormatError(f"expected {key!r}, found {k!r}", n)
        self.pos += 1
        return n, rest


def _natural(text: str, n: int, what: str) -> int:
    if not text.isdigit():
        raise DatabaseFormatError(f"{what} must be a natural number, got {text!r}", n)
    return int(text)


def _read_header(lines: _Lines, expected_theory: str) -> Dict[str, Tuple[int, str]]:
    header = {}
    for key in HEADER_KEYS:
        n, rest = lines.take(key)
        header[key] = (n, rest)
        if key == "format" and rest != str(DATABASE_FORMAT):
            raise DatabaseFormatError(f"unsupported database format {rest!r}", n)
        if key == "theory" and rest != expected_theory:
            raise TheoryMismatchError(
                f"database built with theory {rest!r}, this build uses {expected_theory!r}"
            )
    return header


def _read_entry(lines: _Lines) -> SchemeEntry:
    n, rest = lines.take("entry")
    entry_id = _natural(rest, n, "entry id")
    try:
        n, rest = lines.take("measure")
        measure = parse_term(rest)
        n, rest = lines.take("slots")
        slot_count = _natural(rest, n, "slot count")

        n, rest = lines.take("origin")
        kind, _, book = rest.partition(" ")
        if kind == Origin.SESSION.value and not book:
            origin = Origin.SESSION
        elif kind == Origin.BOOK.value and book.strip():
            origin = Origin.BOOK
        else:
            raise DatabaseFormatError(f"bad origin {rest!r}", n)

        n, rest = lines.take("contributors")
        contributors = rest.split()
        n, rest = lines.take("representative")
        if not rest:
            raise DatabaseFormatError("missing representative", n)
        representative = rest

        clauses = []
        while lines.peek() == "clause":
            n, rest = lines.take("clause")
            clauses.append(Clause(tuple(parse_terms(rest))))
    except DatabaseFormatError:
        raise
    except TdmError as e:
        raise DatabaseFormatError(str(e), n) from e

    return SchemeEntry(
        entry_id,
        CanonicalScheme(ClauseList(tuple(clauses)), slot_count),
        Justification(measure, WELL_FOUNDED_RELATION),
        Provenance(origin, book.strip() or None, contributors),
        representative,
    )


def parse_database(text: str, expected_theory: str = THEORY_VERSION) -> Database:
    lines = _Lines(text)
    header = _read_header(lines, expected_theory)
    db = Database(header["theory"][1], _natural(header["next-id"][1], header["next-id"][0], "next-id"))

    ids = set()
    while lines.peek() is not None:
        n = lines.items[lines.pos][0]
        e = _read_entry(lines)
        if e.id in ids:
            raise DatabaseFormatError(f"duplicate entry id {e.id}", n)
        if e.id >= db.next_id:
            raise DatabaseFormatError(f"entry id {e.id} not below next-id {db.next_id}", n)
        ids.add(e.id)
        db.groups.setdefault(e.justification, []).append(e)
    for group in db.groups.values():
        group.sort(key=lambda x: x.id)

    for key, actual in (("entries", db.entry_count), ("functions", db.function_count)):
        n, rest = header[key]
        if _natural(rest, n, key) != actual:
            raise DatabaseFormatError(f"header says {rest} {key}, found {actual}", n)
    return db


def load_database(path: str, expected_theory: str = THEORY_VERSION) -> Database:
    with open(path, encoding="utf-8") as f:
        db = parse_database(f.read(), expected_theory)
    logger.info("loaded %d entries from %s", db.entry_count, path)
    return db
