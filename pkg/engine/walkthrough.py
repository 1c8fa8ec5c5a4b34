"""
Termination Database Miner - Walkthrough
Traces one definition (f3) through EVERY stage: reading, call contexts,
obligation, simplification, mining the desk corpus, the two-pass search,
the event plan and certificate verification.

Run:
    python3 -m engine.walkthrough

Doubles as a reference for what has to happen when a definition is
proved by reuse.
"""

import os
from typing import Optional

from core.events import EventBus, EventType
from core.terms import print_term
from obligations.defuns import parse_defun, read_definition_file
from obligations.rulers import call_contexts, default_measure, measure_conjecture
from normalize.simplify import simplify_clause_list
from database.mining import mine_corpus
from database.schemes import stats
from database.storage import database_digest
from engine.certificate import emit_plan, parse_certificate, write_certificate
from engine.search import SESSION_PASS, FULL_PASS, SearchConfig, join_names, search
from engine.session import SessionSet
from engine.verify import verify_certificate

DESK_CORPUS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                           "corpus", "desk.tdc")

F3_SOURCE = """
(defunt f3 (x y)
  (if (consp x)
      (if (atom y)
          (list (f3 (cddr x) y) (f3 (cadr x) y))
        (f3 (cdr x) y))
    (list x y)))
"""


def run_walkthrough(corpus_path: Optional[str] = None) -> bool:
    """
    Walk f3 through the whole pipeline against the desk corpus.
    Returns True when every stage checks out.
    """
    print("=" * 70)
    print("  WALKTHROUGH: f3 from source text to a verified certificate")
    print("=" * 70)

    # ── Reading ──────────────────────────────────────────────────
    print("\n── READING ─────────────────────────────────────────────")
    d = parse_defun(F3_SOURCE)
    print(f"  {d.name} ({' '.join(d.formals)})")
    print(f"  body: {print_term(d.body)}")
    assert d.is_recursive

    # ── Call contexts ────────────────────────────────────────────
    print("\n── CALL CONTEXTS ───────────────────────────────────────")
    contexts = call_contexts(d)
    for ctx in contexts:
        rulers = ", ".join(print_term(r) for r in ctx.ruler)
        args = " ".join(print_term(a) for a in ctx.call_args)
        print(f"  call {ctx.call_path}: ({d.name} {args})  under [{rulers}]")
    assert len(contexts) == 3

    # ── Obligation ───────────────────────────────────────────────
    print("\n── OBLIGATION (acl2-count x) ───────────────────────────")
    raw = measure_conjecture(d, default_measure("x"))
    print(f"  {raw}")

    simplified, trace = simplify_clause_list(raw)
    print("\n── SIMPLIFIED ──────────────────────────────────────────")
    print(f"  {simplified}")
    print(f"  rules used: {', '.join(trace.rules_used()) or 'none'}")

    # ── Mining ───────────────────────────────────────────────────
    print("\n── MINING THE DESK CORPUS ──────────────────────────────")
    db, report = mine_corpus(read_definition_file(corpus_path or DESK_CORPUS))
    s = stats(db)
    print(f"  accepted {len(report.accepted)}, rejected {len(report.rejected)}")
    print(f"  {s.summary()}")
    assert s.entries < s.functions, "mining should share schemes"

    # ── Search ───────────────────────────────────────────────────
    print("\n── SEARCH ──────────────────────────────────────────────")
    bus = EventBus()
    result = search(db, SessionSet.from_database(db), d, SearchConfig(), bus)
    assert result is not None, "f3 should be proved by reuse"
    print(f"  measure: {result.measure}")
    print(f"  found in pass {result.pass_number}")
    print(f"  using: {join_names(result.names())}")
    for book in result.includes_needed:
        print(f"  requires book: {book}")
    failed = [e.data["pass_number"] for e in bus.of_type(EventType.PASS_FAILED)]
    if SESSION_PASS in failed:
        print("  ✓ session entries alone were not enough")
    assert result.pass_number in (SESSION_PASS, FULL_PASS)

    # ── Plan and certificate ─────────────────────────────────────
    print("\n── EVENT PLAN ──────────────────────────────────────────")
    cert, plan = emit_plan(d, result, database_digest(db), db.theory_version)
    print(plan.text)

    print("── VERIFY ──────────────────────────────────────────────")
    reread = parse_certificate(write_certificate(cert))
    verdict = verify_certificate(db, d, reread)
    print(f"  {verdict}")

    # ── Summary ──────────────────────────────────────────────────
    print(f"\n{'=' * 70}")
    print("  WALKTHROUGH RESULTS")
    print(f"{'=' * 70}")
    print(f"""
    ✓ Reader          {d.name} with {d.arity} formals
    ✓ Contexts        {len(contexts)} recursive calls
    ✓ Simplifier      {len(trace)} rewrite step(s)
    ✓ Database        {s.summary()}
    ✓ Search          pass {result.pass_number}, {len(result.used_entries)} entries reused
    ✓ Certificate     {verdict}
""")
    print(f"{'=' * 70}")
    return bool(verdict)


if __name__ == "__main__":
    raise SystemExit(0 if run_walkthrough() else 1)
