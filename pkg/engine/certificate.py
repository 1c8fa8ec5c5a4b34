"""
Termination Database Miner - Certificates
The replayable record of a proof and its rendering as an event plan.

A certificate chains the new obligation to stored schemes:

    new  <=use=  new_s  <=by=  stored entries

Steps always appear in this order:
    include*  entry-ref*  new-simplify  (by | structural)  use  final-defun
"""

import hashlib
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from tdm_config import CERTIFICATE_FORMAT, THEORY_VERSION
from core.errors import CertificateFormatError, TdmError
from core.reader import parse_term
from core.terms import Substitution, Term, print_term, stub_name
from obligations.defuns import FunctionDef, print_defun
from obligations.rulers import Clause, ClauseList
from normalize.simplify import ActionKind, ClauseAction, RewriteStep, RewriteTrace
from normalize.subsumption import SubsumptionWitness
from engine.search import ClauseWitness, SearchResult

CERTIFICATE_MAGIC = "tdm-certificate"


# ─── Steps ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class IncludeStep:
    path: str


@dataclass(frozen=True)
class EntryRefStep:
    entry_id: int
    representative: str


@dataclass(frozen=True)
class NewSimplifyStep:
    trace: RewriteTrace


@dataclass(frozen=True)
class ByStep:
    witnesses: Tuple[ClauseWitness, ...]


@dataclass(frozen=True)
class StructuralStep:
    """Fallback: clauses proved directly by the structural decrease checker."""
    clauses: Tuple[int, ...]


@dataclass(frozen=True)
class UseStep:
    pass


@dataclass(frozen=True)
class FinalDefunStep:
    measure: Term
    stubs: Tuple[Tuple[str, str], ...]


Step = Union[IncludeStep, EntryRefStep, NewSimplifyStep, ByStep, StructuralStep,
             UseStep, FinalDefunStep]


@dataclass(frozen=True)
class CertificateHeader:
    theory: str
    database_digest: str
    definition_digest: str


@dataclass(frozen=True)
class Certificate:
    header: CertificateHeader
    steps: Tuple[Step, ...]

    def _of(self, kind) -> list:
        return [s for s in self.steps if isinstance(s, kind)]

    @property
    def includes(self) -> List[str]:
        return [s.path for s in self._of(IncludeStep)]

    @property
    def entry_refs(self) -> List[EntryRefStep]:
        return self._of(EntryRefStep)

    @property
    def new_simplify(self) -> Optional[NewSimplifyStep]:
        found = self._of(NewSimplifyStep)
        return found[0] if found else None

    @property
    def by(self) -> Optional[ByStep]:
        found = self._of(ByStep)
        return found[0] if found else None

    @property
    def structural(self) -> Optional[StructuralStep]:
        found = self._of(StructuralStep)
        return found[0] if found else None

    @property
    def final(self) -> Optional[FinalDefunStep]:
        found = self._of(FinalDefunStep)
        return found[0] if found else None


def definition_digest(d: FunctionDef) -> str:
    return hashlib.sha256(print_defun(d).encode("utf-8")).hexdigest()


# ─── Assembly ────────────────────────────────────────────────────────

def build_certificate(d: FunctionDef, result: SearchResult, database_digest: str,
                      theory_version: str = THEORY_VERSION) -> Certificate:
    steps: List[Step] = [IncludeStep(p) for p in result.includes_needed]
    steps += [EntryRefStep(u.entry_id, u.representative) for u in result.used_entries]
    steps.append(NewSimplifyStep(result.trace))
    if result.fallback:
        steps.append(StructuralStep(tuple(range(len(result.simplified)))))
    else:
        steps.append(ByStep(result.witnesses))
    steps.append(UseStep())

    stubs = {stub_name(d.arity): d.name}
    for w in result.witnesses:
        stubs.update(w.witness.substitution.stubs)
    steps.append(FinalDefunStep(result.measure.term, tuple(sorted(stubs.items()))))

    header = CertificateHeader(theory_version, database_digest, definition_digest(d))
    return Certificate(header, tuple(steps))


# ─── Serialization ───────────────────────────────────────────────────

def _path_text(path: Tuple[int, ...]) -> str:
    return ".".join(map(str, path)) if path else "-"


def _witness_line(w: ClauseWitness) -> str:
    s = w.witness.substitution
    parts = ["witness", str(w.clause_index), "entry", str(w.entry_id),
             "clause", str(w.entry_clause), "map"]
    parts += [str(i) for i in w.witness.literal_map]
    parts.append("subst")
    parts += [f"{k}={print_term(v)}" for k, v in s.sorted_bindings()]
    parts.append("stubs")
    parts += [f"{k}={v}" for k, v in s.sorted_stubs()]
    return " ".join(parts)


def write_certificate(cert: Certificate) -> str:
    h = cert.header
    lines = [f"{CERTIFICATE_MAGIC} {CERTIFICATE_FORMAT}", f"theory {h.theory}",
             f"database {h.database_digest}", f"definition {h.definition_digest}"]
    for step in cert.steps:
        if isinstance(step, IncludeStep):
            lines.append(f"include {step.path}")
        elif isinstance(step, EntryRefStep):
            lines.append(f"entry-ref {step.entry_id} {step.representative}")
        elif isinstance(step, NewSimplifyStep):
            lines.append("new-simplify")
            for r in step.trace.steps:
                lines.append(f"  rewrite {r.clause_index} {r.literal_index} "
                             f"{_path_text(r.path)} {r.rule_id}")
            for a in step.trace.actions:
                detail = "".join(f" {i}" for i in a.detail)
                lines.append(f"  action {a.kind.value} {a.clause_index}{detail}")
            lines.append("end")
        elif isinstance(step, ByStep):
            lines.append("by")
            lines += [f"  {_witness_line(w)}" for w in step.witnesses]
            lines.append("end")
        elif isinstance(step, StructuralStep):
            lines.append("structural")
            lines += [f"  proven {i}" for i in step.clauses]
            lines.append("end")
        elif isinstance(step, UseStep):
            lines.append("use")
        else:
            lines.append("final-defun")
            lines.append(f"  measure {print_term(step.measure)}")
            lines += [f"  stub {k} {v}" for k, v in step.stubs]
            lines.append("end")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = [(n, raw.strip().split()) for n, raw in enumerate(text.splitlines(), 1)
                      if raw.strip()]
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.lines)

    def next(self) -> Tuple[int, List[str]]:
        if self.done():
            last = self.lines[-1][0] if self.lines else 0
            raise CertificateFormatError("unexpected end of certificate", last + 1)
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def block(self) -> List[Tuple[int, List[str]]]:
        body = []
        while True:
            n, words = self.next()
            if words == ["end"]:
                return body
            body.append((n, words))


def _int(word: str, n: int) -> int:
    if not word.isdigit():
        raise CertificateFormatError(f"expected a natural number, got {word!r}", n)
    return int(word)


def _split_at(words: List[str], keys: Tuple[str, ...], n: int) -> List[List[str]]:
    """Split `words` into the runs following each keyword in `keys`, in order."""
    runs = []
    pos = 0
    for i, key in enumerate(keys):
        if pos >= len(words) or words[pos] != key:
            raise CertificateFormatError(f"expected {key!r}", n)
        end = pos + 1
        nxt = keys[i + 1] if i + 1 < len(keys) else None
        while end < len(words) and words[end] != nxt:
            end += 1
        runs.append(words[pos + 1:end])
        pos = end
    return runs


def _parse_witness(words: List[str], n: int) -> ClauseWitness:
    ci, entry, clause, lmap, subst, stubs = _split_at(
        words, ("witness", "entry", "clause", "map", "subst", "stubs"), n)
    if len(ci) != 1 or len(entry) != 1 or len(clause) != 1:
        raise CertificateFormatError("malformed witness", n)
    bindings = {}
    for b in subst:
        k, _, v = b.partition("=")
        bindings[k] = parse_term(v)
    stub_map = {}
    for b in stubs:
        k, _, v = b.partition("=")
        stub_map[k] = v
    w = SubsumptionWitness(Substitution(bindings, stub_map), tuple(_int(i, n) for i in lmap))
    return ClauseWitness(_int(ci[0], n), _int(entry[0], n), _int(clause[0], n), w)


def _parse_trace(body: List[Tuple[int, List[str]]]) -> RewriteTrace:
    steps, actions = [], []
    kinds = {k.value: k for k in ActionKind}
    for n, words in body:
        if words[0] == "rewrite" and len(words) == 5:
            path = () if words[3] == "-" else tuple(_int(p, n) for p in words[3].split("."))
            steps.append(RewriteStep(_int(words[1], n), _int(words[2], n), path, words[4]))
        elif words[0] == "action" and len(words) >= 3 and words[1] in kinds:
            actions.append(ClauseAction(kinds[words[1]], _int(words[2], n),
                                        tuple(_int(w, n) for w in words[3:])))
        else:
            raise CertificateFormatError(f"bad simplification line {' '.join(words)!r}", n)
    return RewriteTrace(tuple(steps), tuple(actions))


def _parse_step(reader: _Reader, n: int, words: List[str]) -> Step:
    key = words[0]
    if key == "include" and len(words) == 2:
        return IncludeStep(words[1])
    if key == "entry-ref" and len(words) == 3:
        return EntryRefStep(_int(words[1], n), words[2])
    if key == "new-simplify" and len(words) == 1:
        return NewSimplifyStep(_parse_trace(reader.block()))
    if key == "by" and len(words) == 1:
        return ByStep(tuple(_parse_witness(w, m) for m, w in reader.block()))
    if key == "structural" and len(words) == 1:
        body = reader.block()
        if any(w[0] != "proven" or len(w) != 2 for _, w in body):
            raise CertificateFormatError("bad structural line", n)
        return StructuralStep(tuple(_int(w[1], m) for m, w in body))
    if key == "use" and len(words) == 1:
        return UseStep()
    if key == "final-defun" and len(words) == 1:
        measure, stubs = None, []
        for m, w in reader.block():
            if w[0] == "measure":
                measure = parse_term(" ".join(w[1:]))
            elif w[0] == "stub" and len(w) == 3:
                stubs.append((w[1], w[2]))
            else:
                raise CertificateFormatError(f"bad final-defun line {' '.join(w)!r}", m)
        if measure is None:
            raise CertificateFormatError("final-defun without measure", n)
        return FinalDefunStep(measure, tuple(stubs))
    raise CertificateFormatError(f"unknown step {' '.join(words)!r}", n)


def parse_certificate(text: str) -> Certificate:
    reader = _Reader(text)
    header = {}
    for key in (CERTIFICATE_MAGIC, "theory", "database", "definition"):
        n, words = reader.next()
        if len(words) != 2 or words[0] != key:
            raise CertificateFormatError(f"expected header line {key!r}", n)
        header[key] = words[1]
    if header[CERTIFICATE_MAGIC] != str(CERTIFICATE_FORMAT):
        raise CertificateFormatError(f"unsupported certificate format {header[CERTIFICATE_MAGIC]}", 1)

    steps = []
    while not reader.done():
        n, words = reader.next()
        try:
            steps.append(_parse_step(reader, n, words))
        except CertificateFormatError:
            raise
        except TdmError as e:
            raise CertificateFormatError(str(e), n) from e
    return Certificate(CertificateHeader(header["theory"], header["database"],
                                         header["definition"]), tuple(steps))


def read_certificate(path: str) -> Certificate:
    with open(path, encoding="utf-8") as f:
        return parse_certificate(f.read())


def save_certificate(cert: Certificate, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(write_certificate(cert))


# ─── Event Plan ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class EventPlan:
    text: str

    def __str__(self) -> str:
        return self.text


def _clause_form(c: Clause) -> str:
    lits = [print_term(t) for t in c.literals]
    if len(lits) == 1:
        return lits[0]
    return "(or " + " ".join(lits) + ")"


def _conjunction(cl: ClauseList) -> str:
    if not cl.clauses:
        return "t"
    if len(cl.clauses) == 1:
        return _clause_form(cl.clauses[0])
    return "(and " + " ".join(_clause_form(c) for c in cl.clauses) + ")"


def render_plan(d: FunctionDef, cert: Certificate, obligation: ClauseList,
                simplified: ClauseList) -> EventPlan:
    """Encapsulate-style listing of the certificate."""
    simplified_name = f"{d.name}-termination-simplified"
    theorem_name = f"{d.name}-termination"
    lines = ["(encapsulate ()"]
    for path in cert.includes:
        lines.append(f'  (local (include-book "{path}"))')

    if cert.structural is not None:
        lines.append("  ;; No stored scheme applies; proved by structural decrease.")
        by_hint = ":structural-decrease t"
    else:
        sources = " ".join(r.representative for r in cert.entry_refs)
        by_hint = f":by (:termination-theorems {sources})"
    lines.append(f"  (local (defthm {simplified_name}")
    lines.append(f"           {_conjunction(simplified)}")
    lines.append(f'           :hints (("Goal" {by_hint}))))')
    lines.append(f"  (local (defthm {theorem_name}")
    lines.append(f"           {_conjunction(obligation)}")
    lines.append(f'           :hints (("Goal" :use {simplified_name}))))')

    final = cert.final
    instance = " ".join(f"({k} {v})" for k, v in final.stubs)
    lines.append(f"  (defun {d.name} ({' '.join(d.formals)})")
    lines.append(f"    (declare (xargs :measure {print_term(final.measure)}")
    lines.append(f'                    :hints (("Goal" :by (:functional-instance {theorem_name} '
                 f"{instance})))))")
    lines.append(f"    {print_term(d.body)}))")
    return EventPlan("\n".join(lines) + "\n")


def emit_plan(d: FunctionDef, result: SearchResult, database_digest: str,
              theory_version: str = THEORY_VERSION) -> Tuple[Certificate, EventPlan]:
    cert = build_certificate(d, result, database_digest, theory_version)
    return cert, render_plan(d, cert, result.obligation, result.simplified)
