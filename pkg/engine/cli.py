"""
Termination Database Miner - Command Line
`tdm mine | stats | prove | verify | check`

Exit codes: 0 success, 1 error, 2 rejected definitions,
3 no match, 4 certificate rejected.
"""

import argparse
import logging
import sys
from typing import List, Optional, TextIO

from tdm_config import (
    DEFAULT_MAX_COUNT, DEFAULT_MAX_SLOT_MAPPINGS, EXIT_FAILURE, EXIT_NO_MATCH, EXIT_OK,
    EXIT_REJECTED, EXIT_VERIFY_REJECT, TOOL_NAME, VERSION,
)
from core.errors import DefinitionError, TdmError
from core.events import Event, EventBus, EventType
from obligations.defuns import FunctionDef, read_definition_file
from obligations.evaluator import falsify
from obligations.rulers import default_measure, measure_conjecture
from normalize.simplify import simplify
from database.mining import DecreaseVerdict, check_definition, mine_corpus
from database.schemes import stats
from database.storage import database_digest, load_database, save_database
from engine.certificate import emit_plan, read_certificate, save_certificate
from engine.search import SearchConfig, extend_database, join_names, search
from engine.session import SessionSet
from engine.verify import verify_certificate

logger = logging.getLogger(__name__)

NOTE = "*note*:"


def _single_definition(path: str) -> FunctionDef:
    defs = read_definition_file(path)
    if len(defs) != 1:
        raise DefinitionError(f"{path} must hold exactly one definition, found {len(defs)}")
    return defs[0].definition


def print_stats(db, out: TextIO) -> None:
    s = stats(db)
    print(s.summary(), file=out)
    for justification, size in s.group_sizes:
        print(f"  {justification}: {size}", file=out)


# ─── Commands ────────────────────────────────────────────────────────

def cmd_mine(args, out: TextIO) -> int:
    corpus = read_definition_file(args.corpus)
    db, report = mine_corpus(corpus, max_count=args.max_count)
    for line in report.lines:
        print(line, file=out)
    print_stats(db, out)
    if report.rejected and args.strict:
        print(f"{len(report.rejected)} definition(s) rejected; database not written", file=out)
        return EXIT_FAILURE
    save_database(db, args.output)
    return EXIT_REJECTED if report.rejected else EXIT_OK


def cmd_stats(args, out: TextIO) -> int:
    print_stats(load_database(args.db), out)
    return EXIT_OK


def _subscribe_notes(bus: EventBus, out: TextIO) -> None:
    def used(e: Event):
        print(f"{NOTE} Using termination theorems for {join_names(e.data['names'])}.", file=out)

    def book(e: Event):
        print(f"{NOTE} Requires book {e.data['book']} for {join_names(e.data['names'])}.", file=out)

    def fallback(e: Event):
        print(f"{NOTE} No stored scheme applies; proved by structural decrease.", file=out)

    def no_match(e: Event):
        print(f"{NOTE} No termination scheme found for {e.data['name']}.", file=out)

    bus.subscribe(EventType.SCHEMES_USED, used)
    bus.subscribe(EventType.BOOK_REQUIRED, book)
    bus.subscribe(EventType.FALLBACK_USED, fallback)
    bus.subscribe(EventType.NO_MATCH, no_match)


def _report_counterexample(d: FunctionDef, max_count: int, out: TextIO) -> None:
    for f in d.formals:
        m = default_measure(f)
        cex = falsify(simplify(measure_conjecture(d, m)), max_count)
        if cex is not None:
            print(f"{NOTE} Counterexample for measure {m}: {cex}.", file=out)
            return


def cmd_prove(args, out: TextIO) -> int:
    db = load_database(args.db)
    d = _single_definition(args.definition)
    session = SessionSet.from_file(db, args.session) if args.session else SessionSet.from_database(db)
    cfg = SearchConfig(two_pass=not args.no_two_pass,
                       max_slot_mappings=args.max_slot_mappings,
                       fallback_default_measures=not args.no_fallback,
                       incremental_extend=args.extend,
                       max_count=args.max_count)
    bus = EventBus()
    _subscribe_notes(bus, out)

    result = search(db, session, d, cfg, bus)
    if result is None:
        _report_counterexample(d, cfg.max_count, out)
        return EXIT_NO_MATCH
    print(f"{NOTE} {result.elapsed_ms:.0f} ms taken altogether.", file=out)

    cert, plan = emit_plan(d, result, database_digest(db), db.theory_version)
    save_certificate(cert, args.out)
    if args.plan:
        with open(args.plan, "w", encoding="utf-8", newline="\n") as f:
            f.write(plan.text)
    if cfg.incremental_extend:
        # The certificate is stamped with the digest of the unextended database.
        verdict = verify_certificate(db, d, cert)
        if not verdict.accepted:
            print(verdict, file=out)
            return EXIT_VERIFY_REJECT
        action = extend_database(db, d, result, cfg, bus)
        target = args.extended_db or args.db
        save_database(db, target)
        print(f"{NOTE} Database extended: {action}; written to {target}.", file=out)
        print(f"{NOTE} Certificate {args.out} verifies against the database "
              f"before extension.", file=out)
    return EXIT_OK


def cmd_verify(args, out: TextIO) -> int:
    db = load_database(args.db)
    d = _single_definition(args.definition)
    verdict = verify_certificate(db, d, read_certificate(args.certificate))
    print(verdict, file=out)
    return EXIT_OK if verdict.accepted else EXIT_VERIFY_REJECT


def cmd_check(args, out: TextIO) -> int:
    status = EXIT_OK
    for source in read_definition_file(args.definition):
        d = source.definition
        m, checks = check_definition(d, args.max_count)
        if m is None or not d.is_recursive:
            print(f"{d.name}: not recursive", file=out)
            continue
        print(f"{d.name}: measure {m}", file=out)
        for chk in checks:
            print(f"  {chk}", file=out)
            if chk.verdict is not DecreaseVerdict.PROVEN:
                status = EXIT_REJECTED
    return status


# ─── Parser ──────────────────────────────────────────────────────────

def _add_bounds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-count", type=int, default=DEFAULT_MAX_COUNT,
                   help="falsifier bound on the acl2-count of each variable")
    p.add_argument("--seed", type=int, default=0, help="reserved; all behavior is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Prove termination by reusing mined termination schemes.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("mine", help="Mine a corpus into a database.")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--strict", action="store_true", help="fail without writing on any rejection")
    _add_bounds(p)
    p.set_defaults(func=cmd_mine)

    p = subparsers.add_parser("stats", help="Print database statistics.")
    p.add_argument("db")
    p.set_defaults(func=cmd_stats)

    p = subparsers.add_parser("prove", help="Search the database for a termination argument.")
    p.add_argument("definition")
    p.add_argument("--db", required=True)
    p.add_argument("--session", help="definition file naming the session's functions")
    p.add_argument("--no-two-pass", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--extend", action="store_true",
                   help="store the new scheme after the certificate verifies")
    p.add_argument("--extended-db", help="where to write the extended database (default: --db)")
    p.add_argument("--max-slot-mappings", type=int, default=DEFAULT_MAX_SLOT_MAPPINGS)
    p.add_argument("--out", required=True, help="certificate file")
    p.add_argument("--plan", help="also write the rendered event plan")
    _add_bounds(p)
    p.set_defaults(func=cmd_prove)

    p = subparsers.add_parser("verify", help="Verify a certificate.")
    p.add_argument("certificate")
    p.add_argument("definition")
    p.add_argument("--db", required=True)
    p.set_defaults(func=cmd_verify)

    p = subparsers.add_parser("check", help="Structural checker and falsifier only.")
    p.add_argument("definition")
    _add_bounds(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = out or sys.stdout
    try:
        return int(args.func(args, out))
    except (TdmError, OSError) as e:
        print(f"{TOOL_NAME}: error: {e}", file=sys.stderr)
        return EXIT_FAILURE
