"""
Termination Database Miner - Definitions
Function definitions and the definition-file format.

    (defun name (formals...) [(declare (xargs :measure m))] body)

`defunt` is read as a synonym of `defun`. A `;; book: <path>` line
directly before a form marks it as coming from that book.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from tdm_config import BUILTIN_NAMES, CONSTANT_SYMBOLS
from core.errors import DefinitionError, TermSyntaxError
from core.reader import Atom, Form, SExpr, atom_symbol, read_sexpr, read_sexprs, sexpr_to_term
from core.terms import App, Term, is_stub, occurrences, print_term, subterms, variables_of


DEFUN_HEADS = ("defun", "defunt")

_BOOK_ANNOTATION_RE = re.compile(r"^[ \t]*;;[ \t]*book:[ \t]*(\S+)[ \t]*$", re.MULTILINE)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    formals: Tuple[str, ...]
    body: Term
    declared_measure: Optional[Term] = None

    @property
    def arity(self) -> int:
        return len(self.formals)

    @property
    def is_recursive(self) -> bool:
        return occurrences(self.body, self.name) > 0

    def __str__(self) -> str:
        return print_defun(self)


def print_defun(d: FunctionDef) -> str:
    """Canonical one-line form; used for digests."""
    parts = [f"(defun {d.name} ({' '.join(d.formals)})"]
    if d.declared_measure is not None:
        parts.append(f"(declare (xargs :measure {print_term(d.declared_measure)}))")
    parts.append(print_term(d.body) + ")")
    return " ".join(parts)


# ─── Parsing ─────────────────────────────────────────────────────────

def _symbol(s: SExpr, what: str) -> str:
    if not isinstance(s, Atom):
        raise DefinitionError(f"{what} must be a symbol")
    try:
        return atom_symbol(s)
    except TermSyntaxError as e:
        raise DefinitionError(f"{what}: {e}") from None


def _read_declare(form: Form) -> Optional[Term]:
    """Extract :measure from (declare (xargs ...))."""
    measure: Optional[Term] = None
    for decl in form.items[1:]:
        if not isinstance(decl, Form) or not decl.items or _symbol(decl.items[0], "declare key") != "xargs":
            raise DefinitionError("only (xargs ...) is supported inside declare")
        keys = decl.items[1:]
        if len(keys) % 2:
            raise DefinitionError("xargs expects keyword/value pairs")
        for key, value in zip(keys[0::2], keys[1::2]):
            name = _symbol(key, "xargs key")
            if name != ":measure":
                raise DefinitionError(f"unknown declare key {name}")
            measure = sexpr_to_term(value)
    return measure


def defun_from_sexpr(s: SExpr) -> FunctionDef:
    """Build and validate a FunctionDef from a raw defun form."""
    if not isinstance(s, Form) or not s.items:
        raise DefinitionError("expected a (defun ...) form")
    head = _symbol(s.items[0], "form head")
    if head == "mutual-recursion":
        raise DefinitionError("mutual recursion is not supported")
    if head not in DEFUN_HEADS:
        raise DefinitionError(f"expected defun, found {head}")
    if len(s.items) < 4:
        raise DefinitionError("defun needs a name, formals and a body")

    name = _symbol(s.items[1], "function name")
    if name in BUILTIN_NAMES or is_stub(name) or name.startswith(":"):
        raise DefinitionError(f"{name} collides with a reserved symbol")

    formals_form = s.items[2]
    if not isinstance(formals_form, Form):
        raise DefinitionError(f"{name}: formals must be a list")
    formals = tuple(_symbol(f, "formal") for f in formals_form.items)
    for f in formals:
        if f in BUILTIN_NAMES or f in CONSTANT_SYMBOLS or is_stub(f) or f.startswith(":"):
            raise DefinitionError(f"{name}: {f} cannot be a formal")
    if len(set(formals)) != len(formals):
        raise DefinitionError(f"{name}: duplicate formal")

    measure: Optional[Term] = None
    middle = s.items[3:-1]
    for item in middle:
        if isinstance(item, Form) and item.items and isinstance(item.items[0], Atom) \
                and item.items[0].text.lower() == "declare":
            measure = _read_declare(item)
        else:
            raise DefinitionError(f"{name}: unexpected form before the body")

    body = sexpr_to_term(s.items[-1])
    d = FunctionDef(name, formals, body, measure)
    _check_scope(d)
    return d


def _check_scope(d: FunctionDef) -> None:
    free = variables_of(d.body) - set(d.formals)
    if free:
        raise DefinitionError(f"{d.name}: free variable(s) {', '.join(sorted(free))}")
    if d.declared_measure is not None:
        extra = variables_of(d.declared_measure) - set(d.formals)
        if extra:
            raise DefinitionError(
                f"{d.name}: measure mentions non-formal(s) {', '.join(sorted(extra))}"
            )
        if occurrences(d.declared_measure, d.name):
            raise DefinitionError(f"{d.name}: measure calls the function itself")
    for t in subterms(d.body):
        if isinstance(t, App):
            if is_stub(t.head):
                raise DefinitionError(f"{d.name}: reserved stub symbol {t.head} in body")
            if t.head == d.name and t.arity != d.arity:
                raise DefinitionError(
                    f"{d.name}: recursive call with {t.arity} argument(s), expected {d.arity}"
                )


def parse_defun(text: str) -> FunctionDef:
    """Parse a single defun form."""
    return defun_from_sexpr(read_sexpr(text))


# ─── Definition Files ────────────────────────────────────────────────

@dataclass(frozen=True)
class SourceDef:
    """A definition read from a file, with its book annotation if any."""
    definition: FunctionDef
    book: Optional[str] = None


def parse_definitions(text: str) -> List[SourceDef]:
    """Read every defun in a definition or corpus file."""
    forms = read_sexprs(text)
    annotations = [(m.start(), m.group(1)) for m in _BOOK_ANNOTATION_RE.finditer(text)]
    result = []
    previous_start = -1
    for form in forms:
        start = form.position
        book = None
        for pos, path in annotations:
            if previous_start < pos < start:
                book = path
        result.append(SourceDef(defun_from_sexpr(form), book))
        previous_start = start
    return result


def read_definition_file(path: str) -> List[SourceDef]:
    with open(path, encoding="utf-8") as f:
        return parse_definitions(f.read())
