"""
Termination Database Miner - Reader
Surface syntax: parenthesized prefix expressions, case-insensitive.

The grammar is a pyparsing s-expression grammar that keeps source
positions; conversion to Term expands abbreviations at read time:

    c[ad]{2,4}r   → car/cdr chains
    (list a b)    → (cons a (cons b nil))
    (1- x) (1+ x) → (- x 1) (+ x 1)
    (and ...) (or ...) (cond ...) → nested if
    (+ a b c)     → (+ a (+ b c))
"""

import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import pyparsing as pp

from tdm_config import (
    BINDER_FORMS, BUILTIN_ARITIES, CONSTANT_SYMBOLS, MAX_CXR_DEPTH,
    MIN_CXR_DEPTH, NIL, T,
)
from core.errors import ArityError, TermSyntaxError
from core.terms import App, Const, Pair, Term, Value, Var, app, is_stub, stub_arity


# ─── Raw S-Expressions ──────────────────────────────────────────────

@dataclass(frozen=True)
class Atom:
    text: str
    position: int


@dataclass(frozen=True)
class Quoted:
    datum: "SExpr"
    position: int


@dataclass(frozen=True)
class Form:
    items: Tuple["SExpr", ...]
    position: int


SExpr = Union[Atom, Quoted, Form]


def _build_grammar() -> Tuple[pp.ParserElement, pp.ParserElement]:
    sexp = pp.Forward()
    atom = pp.Regex(r"[^\s()';]+")
    atom.set_parse_action(lambda s, loc, toks: Atom(toks[0], loc))
    quoted = pp.Suppress("'") + sexp
    quoted.set_parse_action(lambda s, loc, toks: Quoted(toks[0], loc))
    form = pp.Group(pp.Suppress("(") + pp.ZeroOrMore(sexp) + pp.Suppress(")"))
    form.set_parse_action(lambda s, loc, toks: Form(tuple(toks[0]), loc))
    sexp <<= form | quoted | atom

    comment = pp.Regex(r";[^\n]*")
    program = pp.ZeroOrMore(sexp)
    for element in (sexp, program):
        element.ignore(comment)
    return sexp, program


_SEXP, _PROGRAM = _build_grammar()


def read_sexprs(text: str) -> List[SExpr]:
    """Read every top-level expression in `text`."""
    try:
        return list(_PROGRAM.parse_string(text, parse_all=True))
    except pp.ParseException as e:
        raise TermSyntaxError(f"unbalanced or malformed expression: {e.msg}", e.loc) from None


def read_sexpr(text: str) -> SExpr:
    """Read exactly one expression."""
    items = read_sexprs(text)
    if len(items) != 1:
        raise TermSyntaxError(f"expected one expression, found {len(items)}", 0)
    return items[0]


# ─── Tokens ─────────────────────────────────────────────────────────

_SYMBOL_RE = re.compile(r"^[a-z0-9_<>=+*/!?&%$.:~^-]+$")
_NUMBER_LIKE_RE = re.compile(r"^[+-]?[0-9]*\.?[0-9]+(/[0-9]+)?\.?$")
_NATURAL_RE = re.compile(r"^[0-9]+$")
_CXR_RE = re.compile(r"^c([ad]{%d,%d})r$" % (MIN_CXR_DEPTH, MAX_CXR_DEPTH))


def atom_symbol(a: Atom) -> str:
    """Lowercased symbol name of an atom; rejects illegal tokens."""
    name = a.text.lower()
    if (_NUMBER_LIKE_RE.match(name) or not _SYMBOL_RE.match(name)
            or name == "."):
        raise TermSyntaxError(f"illegal token {a.text!r}", a.position)
    return name


def is_keyword(s: SExpr) -> bool:
    return isinstance(s, Atom) and s.text.startswith(":")


# ─── Constants ──────────────────────────────────────────────────────

def sexpr_to_value(s: SExpr) -> Value:
    """Interpret quoted data."""
    if isinstance(s, Atom):
        if _NATURAL_RE.match(s.text):
            return int(s.text)
        return atom_symbol(s)
    if isinstance(s, Quoted):
        return Pair("quote", Pair(sexpr_to_value(s.datum), NIL))
    items = list(s.items)
    tail: Value = NIL
    if len(items) >= 3 and isinstance(items[-2], Atom) and items[-2].text == ".":
        tail = sexpr_to_value(items[-1])
        items = items[:-2]
    for item in items:
        if isinstance(item, Atom) and item.text == ".":
            raise TermSyntaxError("misplaced dot", item.position)
    for item in reversed(items):
        tail = Pair(sexpr_to_value(item), tail)
    return tail


# ─── Terms ──────────────────────────────────────────────────────────

def _check_arity(head: str, args: List[Term], position: int) -> None:
    expected = BUILTIN_ARITIES.get(head)
    if expected is None:
        expected = stub_arity(head)
    if expected is not None and expected != len(args):
        raise ArityError(
            f"{head} expects {expected} argument(s), got {len(args)}", position
        )


def _expand_cxr(letters: str, arg: Term) -> Term:
    for letter in reversed(letters):
        arg = app("car" if letter == "a" else "cdr", arg)
    return arg


def _expand_cond(clauses: Tuple[SExpr, ...], position: int) -> Term:
    if not clauses:
        return Const(NIL)
    first = clauses[0]
    if not isinstance(first, Form) or len(first.items) not in (1, 2):
        raise TermSyntaxError("cond clause must be (test) or (test value)", position)
    test = sexpr_to_term(first.items[0])
    value = sexpr_to_term(first.items[-1])
    if test == Const(T):
        return value
    return app("if", test, value, _expand_cond(clauses[1:], position))


def _fold_right(head: str, args: List[Term]) -> Term:
    result = args[-1]
    for a in reversed(args[:-1]):
        result = app(head, a, result)
    return result


def sexpr_to_term(s: SExpr) -> Term:
    """Convert a raw expression to a Term, expanding abbreviations."""
    if isinstance(s, Quoted):
        return Const(sexpr_to_value(s.datum))
    if isinstance(s, Atom):
        if _NATURAL_RE.match(s.text):
            return Const(int(s.text))
        name = atom_symbol(s)
        if name in CONSTANT_SYMBOLS:
            return Const(name)
        if name.startswith(":"):
            raise TermSyntaxError(f"keyword {name} is not a term", s.position)
        if name in BUILTIN_ARITIES:
            raise TermSyntaxError(f"builtin {name} used as a variable", s.position)
        if is_stub(name):
            raise TermSyntaxError(f"reserved stub name {name} used as a variable", s.position)
        return Var(name)

    if not s.items:
        return Const(NIL)
    head_sexpr = s.items[0]
    if not isinstance(head_sexpr, Atom) or _NATURAL_RE.match(head_sexpr.text):
        raise TermSyntaxError("application head must be a symbol", s.position)
    head = atom_symbol(head_sexpr)
    rest = s.items[1:]

    if head == "quote":
        if len(rest) != 1:
            raise ArityError("quote expects 1 argument", s.position)
        return Const(sexpr_to_value(rest[0]))
    if head in BINDER_FORMS:
        raise TermSyntaxError(f"binding form {head} is not supported", s.position)
    if head == "cond":
        return _expand_cond(rest, s.position)

    args = [sexpr_to_term(a) for a in rest]

    cxr = _CXR_RE.match(head)
    if cxr:
        if len(args) != 1:
            raise ArityError(f"{head} expects 1 argument, got {len(args)}", s.position)
        return _expand_cxr(cxr.group(1), args[0])
    if head == "list":
        result: Term = Const(NIL)
        for a in reversed(args):
            result = app("cons", a, result)
        return result
    if head in ("1-", "1+"):
        if len(args) != 1:
            raise ArityError(f"{head} expects 1 argument, got {len(args)}", s.position)
        return app("-" if head == "1-" else "+", args[0], Const(1))
    if head == "and":
        if not args:
            return Const(T)
        result = args[-1]
        for a in reversed(args[:-1]):
            result = app("if", a, result, Const(NIL))
        return result
    if head == "or":
        if not args:
            return Const(NIL)
        result = args[-1]
        for a in reversed(args[:-1]):
            result = app("if", a, a, result)
        return result
    if head == "+" and len(args) != 2:
        if not args:
            return Const(0)
        if len(args) == 1:
            return app("+", args[0], Const(0))
        return _fold_right("+", args)

    _check_arity(head, args, s.position)
    return App(head, tuple(args))


def parse_term(text: str) -> Term:
    """Parse one term from its surface syntax."""
    return sexpr_to_term(read_sexpr(text))


def parse_terms(text: str) -> List[Term]:
    """Parse a whitespace-separated sequence of terms."""
    return [sexpr_to_term(s) for s in read_sexprs(text)]
