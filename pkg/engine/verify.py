"""
Termination Database Miner - Certificate Verification
Re-checks a certificate against the database and the definition,
step by step, and names the first step that fails.

Checks run in this order:
    header, order, measure, new-simplify, entry-ref, by | structural,
    coverage, final-defun
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

from core.errors import DecreaseLiteralError, ReplayError, SubstitutionError
from core.terms import Substitution, Var, apply_subst, print_term, stub_arity, stub_name, variables_of
from obligations.defuns import FunctionDef
from obligations.rulers import ClauseList, Measure, measure_conjecture
from normalize.simplify import replay_trace, simplify
from normalize.theory import DEFAULT_THEORY, TheoryRegistry
from database.mining import DecreaseVerdict, structural_decrease_check
from database.schemes import Database, Origin, SchemeEntry
from database.storage import database_digest
from engine.certificate import (
    ByStep, Certificate, EntryRefStep, FinalDefunStep, IncludeStep, NewSimplifyStep,
    StructuralStep, UseStep, definition_digest,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: Optional[str] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted

    def __str__(self) -> str:
        if self.accepted:
            return "accept"
        return f"reject at {self.step}: {self.reason}"


ACCEPT = Verdict(True)


class _Reject(Exception):
    def __init__(self, step: str, reason: str):
        super().__init__(reason)
        self.step = step
        self.reason = reason


# ─── Individual Checks ───────────────────────────────────────────────

def _check_header(db: Database, d: FunctionDef, cert: Certificate,
                  theory: TheoryRegistry) -> None:
    h = cert.header
    if h.theory != theory.version or db.theory_version != theory.version:
        raise _Reject("header", f"theory {h.theory} does not match {theory.version}")
    if h.database_digest != database_digest(db):
        raise _Reject("header", "database digest does not match")
    if h.definition_digest != definition_digest(d):
        raise _Reject("header", "definition digest does not match")


def _check_order(cert: Certificate) -> None:
    """include* entry-ref* new-simplify (by | structural) use final-defun"""
    kinds = [type(s) for s in cert.steps]
    i = 0
    while i < len(kinds) and kinds[i] is IncludeStep:
        i += 1
    while i < len(kinds) and kinds[i] is EntryRefStep:
        i += 1
    tail = kinds[i:]
    if len(tail) != 4 or tail[0] is not NewSimplifyStep or \
            tail[1] not in (ByStep, StructuralStep) or tail[2] is not UseStep or \
            tail[3] is not FinalDefunStep:
        raise _Reject("order", "steps out of order or missing")


def _check_measure(db: Database, d: FunctionDef, cert: Certificate) -> None:
    m = cert.final.measure
    extra = variables_of(m) - set(d.formals)
    if extra:
        raise _Reject("measure", f"measure mentions non-formal(s) {', '.join(sorted(extra))}")
    if cert.by is None:
        return
    for w in cert.by.witnesses:
        j = db.group_of(w.entry_id)
        if j is None:
            raise _Reject("measure", f"entry {w.entry_id} is not in the database")
        slots = {v: w.witness.substitution.bindings.get(v) for v in variables_of(j.measure)}
        if any(t is None for t in slots.values()):
            raise _Reject("measure", f"witness for clause {w.clause_index} leaves measure slots unbound")
        if apply_subst(j.measure, Substitution(slots)) != m:
            raise _Reject("measure", f"entry {w.entry_id} instantiates to a different measure "
                                     f"than {print_term(m)}")


def _check_new_simplify(d: FunctionDef, cert: Certificate, theory: TheoryRegistry) -> ClauseList:
    raw = measure_conjecture(d, Measure(cert.final.measure))
    try:
        replayed = replay_trace(raw, cert.new_simplify.trace, theory)
    except ReplayError as e:
        raise _Reject("new-simplify", str(e))
    if replayed != simplify(raw, theory):
        raise _Reject("new-simplify", "replayed trace differs from simplification")
    return replayed


def _check_entry_refs(db: Database, cert: Certificate) -> Dict[int, SchemeEntry]:
    refs: Dict[int, SchemeEntry] = {}
    for r in cert.entry_refs:
        e = db.get(r.entry_id)
        if e is None:
            raise _Reject("entry-ref", f"entry {r.entry_id} is not in the database")
        if e.representative != r.representative:
            raise _Reject("entry-ref", f"entry {r.entry_id} is {e.representative}, not {r.representative}")
        if r.entry_id in refs:
            raise _Reject("entry-ref", f"entry {r.entry_id} referenced twice")
        refs[r.entry_id] = e

    books: List[str] = []
    for e in sorted(refs.values(), key=lambda x: x.id):
        if e.provenance.origin is Origin.BOOK and e.provenance.book not in books:
            books.append(e.provenance.book)
    if books != cert.includes:
        raise _Reject("entry-ref", f"includes {cert.includes} do not match books {books}")
    return refs


def _check_by(d: FunctionDef, by: ByStep, refs: Dict[int, SchemeEntry],
              simplified: ClauseList) -> None:
    used = set()
    for w in by.witnesses:
        e = refs.get(w.entry_id)
        if e is None:
            raise _Reject("by", f"witness uses unreferenced entry {w.entry_id}")
        used.add(w.entry_id)
        if not 0 <= w.entry_clause < len(e.scheme.clauses):
            raise _Reject("by", f"entry {e.id} has no clause {w.entry_clause}")
        if not 0 <= w.clause_index < len(simplified.clauses):
            raise _Reject("by", f"obligation has no clause {w.clause_index}")
        old = e.scheme.clauses[w.entry_clause]
        new = simplified.clauses[w.clause_index]
        s = w.witness.substitution
        lmap = w.witness.literal_map

        if any(not isinstance(t, Var) for t in s.bindings.values()):
            raise _Reject("by", f"clause {w.clause_index}: slots must map to variables")
        for stub, f in s.stubs.items():
            if f != d.name or stub_arity(stub) != d.arity:
                raise _Reject("by", f"clause {w.clause_index}: {stub} may only stand for {d.name}")
        if len(lmap) != len(old.literals):
            raise _Reject("by", f"clause {w.clause_index}: literal map has wrong length")
        for i, target in enumerate(lmap):
            if not 0 <= target < len(new.literals):
                raise _Reject("by", f"clause {w.clause_index}: literal index {target} out of range")
            try:
                image = apply_subst(old.literals[i], s)
            except SubstitutionError as e:
                raise _Reject("by", str(e))
            if image != new.literals[target]:
                raise _Reject("by", f"clause {w.clause_index}: literal {i} maps to "
                                    f"{print_term(image)}, not {print_term(new.literals[target])}")
    unused = set(refs) - used
    if unused:
        raise _Reject("by", f"entries {sorted(unused)} are referenced but unused")


def _check_structural(cert: Certificate, simplified: ClauseList) -> None:
    if cert.includes or cert.entry_refs:
        raise _Reject("structural", "structural proofs use no stored entries")
    for i in cert.structural.clauses:
        if not 0 <= i < len(simplified.clauses):
            raise _Reject("structural", f"obligation has no clause {i}")
        try:
            verdict = structural_decrease_check(simplified.clauses[i])
        except DecreaseLiteralError as e:
            raise _Reject("structural", str(e))
        if verdict is not DecreaseVerdict.PROVEN:
            raise _Reject("structural", f"clause {i} is not a structural decrease")


def _check_coverage(cert: Certificate, simplified: ClauseList) -> None:
    if cert.by is not None:
        indices = [w.clause_index for w in cert.by.witnesses]
    else:
        indices = list(cert.structural.clauses)
    if sorted(indices) != list(range(len(simplified.clauses))):
        raise _Reject("coverage", "obligation clauses are not each covered exactly once")


def _check_final(d: FunctionDef, final: FinalDefunStep) -> None:
    stubs = dict(final.stubs)
    if stubs.get(stub_name(d.arity)) != d.name:
        raise _Reject("final-defun", f"missing instantiation of {stub_name(d.arity)} by {d.name}")
    if any(f != d.name for f in stubs.values()):
        raise _Reject("final-defun", f"stubs may only stand for {d.name}")


# ─── Verification ────────────────────────────────────────────────────

def verify_certificate(db: Database, d: FunctionDef, cert: Certificate,
                       theory: TheoryRegistry = DEFAULT_THEORY) -> Verdict:
    """Accept, or reject naming the first failing step."""
    try:
        _check_header(db, d, cert, theory)
        _check_order(cert)
        _check_measure(db, d, cert)
        simplified = _check_new_simplify(d, cert, theory)
        refs = _check_entry_refs(db, cert)
        if cert.by is not None:
            _check_by(d, cert.by, refs, simplified)
        else:
            _check_structural(cert, simplified)
        _check_coverage(cert, simplified)
        _check_final(d, cert.final)
    except _Reject as r:
        logger.info("certificate for %s rejected at %s: %s", d.name, r.step, r.reason)
        return Verdict(False, r.step, r.reason)
    return ACCEPT
