"""
Termination Database Miner - Term and Reader Tests
Printing, ordering, matching and the surface reader.
"""

import functools
import itertools
import random
import sys

import pytest

from core.errors import ArityError, SubstitutionError, TermSyntaxError
from core.events import Event, EventBus, EventType
from core.reader import parse_term, parse_terms, read_sexprs
from core.terms import (
    App, Const, Pair, Substitution, Term, Var, app, apply_subst, compare_terms, match_term,
    print_term, print_value, renaming, stub_name, subterms, term_size, term_sort_key,
    variables_of,
)


def test_print_round_trip():
    """Printing then reading gives back the same term"""
    print("Testing print/parse...")

    for text in ["(consp x)", "(< (acl2-count (cdr x)) (acl2-count x))",
                 "(if (zp n) 0 (+ n (f (- n 1))))", "(equal x '(1 2))", "nil", "7"]:
        t = parse_term(text)
        assert parse_term(print_term(t)) == t, f"round trip failed for {text}"

    assert print_term(parse_term("(CONSP X)")) == "(consp x)", "reader must lowercase"
    print("  ✓ Print/parse tests passed")


def test_reader_abbreviations():
    """c[ad]r chains, list, 1-, and/or/cond expand at read time"""
    print("Testing reader abbreviations...")

    assert parse_term("(cadr x)") == app("car", app("cdr", Var("x")))
    assert parse_term("(cddr x)") == app("cdr", app("cdr", Var("x")))
    assert parse_term("(list a b)") == app("cons", Var("a"), app("cons", Var("b"), Const("nil")))
    assert parse_term("(1- n)") == app("-", Var("n"), Const(1))
    assert parse_term("(and p q)") == app("if", Var("p"), Var("q"), Const("nil"))
    assert parse_term("(+ a b c)") == app("+", Var("a"), app("+", Var("b"), Var("c")))
    assert parse_term("(cond (p a) (t b))") == app("if", Var("p"), Var("a"), Var("b"))
    assert print_term(parse_term("(cadr x)")) == "(car (cdr x))", "no abbreviations in print"
    print("  ✓ Abbreviation tests passed")


def test_reader_errors():
    """Malformed input is rejected with a position"""
    print("Testing reader errors...")

    with pytest.raises(TermSyntaxError):
        parse_term("(consp x")
    with pytest.raises(ArityError):
        parse_term("(consp x y)")
    with pytest.raises(TermSyntaxError):
        parse_term("(let ((y x)) y)")
    with pytest.raises(TermSyntaxError):
        parse_term("(f :key)")
    with pytest.raises(TermSyntaxError):
        parse_term("(f 1.5)")
    with pytest.raises(TermSyntaxError):
        parse_term("car")
    print("  ✓ Reader error tests passed")


def test_comments_ignored():
    """Line comments never reach the term"""
    forms = read_sexprs("; leading\n(consp x) ; trailing\n")
    assert len(forms) == 1
    assert parse_terms("(consp x) ; c\n(atom y)") == [parse_term("(consp x)"), parse_term("(atom y)")]


def test_total_order():
    """Const < Var < App, and the order is total"""
    print("Testing term ordering...")

    c, v, a = Const(0), Var("x"), app("car", Var("x"))
    assert term_sort_key(c) < term_sort_key(v) < term_sort_key(a)
    assert compare_terms(a, a) == 0
    assert compare_terms(app("car", Var("x")), app("cdr", Var("x"))) == -1
    terms = [a, v, c, app("car", Var("a"))]
    assert sorted(terms, key=term_sort_key)[0] == c
    print("  ✓ Ordering tests passed")


def test_values_print():
    assert print_value(Pair("nil", "nil")) == "(nil)"
    assert print_value(Pair(1, 2)) == "(1 . 2)"
    assert print_value(Pair(1, Pair(2, "nil"))) == "(1 2)"


def test_matching():
    """One-way matching extends a seed; stubs bind to user functions only"""
    print("Testing matching...")

    p = parse_term("(< (acl2-count (cdr v1)) (acl2-count v1))")
    t = parse_term("(< (acl2-count (cdr x)) (acl2-count x))")
    s = match_term(p, t)
    assert s is not None and s.bindings["v1"] == Var("x")
    assert match_term(p, t, renaming({"v1": "y"})) is None, "seed must be respected"

    stub = app(stub_name(1), Var("v1"))
    assert match_term(stub, app("f", Var("x"))).stubs == {"stub-1": "f"}
    assert match_term(stub, app("consp", Var("x"))) is None, "stubs never match builtins"

    assert match_term(Var("v1"), app("car", Var("x")), var_to_var_only=True) is None
    print("  ✓ Matching tests passed")


def test_substitution():
    s = Substitution({"v1": Var("x")}, {"stub-1": "f"})
    assert apply_subst(app("stub-1", Var("v1")), s) == app("f", Var("x"))
    with pytest.raises(SubstitutionError):
        s.bind_stub("stub-2", "g", 1)
    assert Substitution({"a": Var("b")}) == renaming({"a": "b"})


def test_event_bus():
    """Subscribers receive events; history records every emit"""
    bus = EventBus()
    seen = []

    def handler(e):
        seen.append(e)

    bus.subscribe(EventType.NO_MATCH, handler)
    bus.emit(Event(EventType.NO_MATCH, {"name": "f"}))
    bus.emit(Event(EventType.PASS_STARTED, {"pass_number": 1}))
    assert [e.data["name"] for e in seen] == ["f"]
    assert len(bus.history) == 2
    assert len(bus.of_type(EventType.PASS_STARTED)) == 1
    bus.emit(Event(EventType.NO_MATCH, {"name": "g"}, source="search"))
    assert [e.data["name"] for e in seen] == ["f", "g"]
    assert [e.source for e in bus.of_type(EventType.NO_MATCH)] == ["", "search"]

# ─── Randomised Properties ───────────────────────────────────────────

LEAVES = [Const(0), Const(1), Const(2), Const(5), Const("nil"), Const("t"), Const(Pair(1, "nil"))]
HEADS = [("car", 1), ("cdr", 1), ("cons", 2), ("consp", 1), ("not", 1), ("if", 3),
         ("+", 2), ("<", 2), ("equal", 2), ("acl2-count", 1), ("f", 1)]


def random_term(rng: random.Random, names, depth: int) -> Term:
    if depth == 0 or rng.random() < 0.35:
        return Var(rng.choice(names)) if rng.random() < 0.5 else rng.choice(LEAVES)
    head, arity = rng.choice(HEADS)
    return App(head, tuple(random_term(rng, names, depth - 1) for _ in range(arity)))


def replace_nth(t: Term, n: int, new: Term) -> Term:
    """Replace the n-th subterm in pre-order."""
    if n == 0:
        return new
    n -= 1
    args = list(t.args)
    for i, a in enumerate(args):
        size = term_size(a)
        if n < size:
            args[i] = replace_nth(a, n, new)
            return App(t.head, tuple(args))
        n -= size
    raise IndexError(n)


def brute_force_match(pattern: Term, target: Term, variables_only: bool = False):
    """Try every binding of the pattern's variables to subterms of the target."""
    names = sorted(variables_of(pattern))
    pool = {term_sort_key(s): s for s in subterms(target)
            if not variables_only or isinstance(s, Var)}
    for image in itertools.product(list(pool.values()), repeat=len(names)):
        s = Substitution(dict(zip(names, image)))
        if apply_subst(pattern, s) == target:
            return s
    return None


def test_random_print_round_trip():
    """Printed random terms read back unchanged"""
    rng = random.Random(5)
    for _ in range(500):
        t = random_term(rng, ["x", "y", "z"], 4)
        assert parse_term(print_term(t)) == t, f"round trip failed for {print_term(t)}"


def test_random_total_order():
    """compare_terms is antisymmetric, exact on equality and transitive"""
    print("Testing term order on random terms...")

    rng = random.Random(17)
    terms = [random_term(rng, ["x", "y"], 3) for _ in range(120)]
    for a in terms:
        for b in terms[:40]:
            assert compare_terms(a, b) == -compare_terms(b, a)
            assert (compare_terms(a, b) == 0) == (a == b)
    for _ in range(2000):
        a, b, c = rng.choice(terms), rng.choice(terms), rng.choice(terms)
        if compare_terms(a, b) <= 0 and compare_terms(b, c) <= 0:
            assert compare_terms(a, c) <= 0, f"{a} <= {b} <= {c} but not {a} <= {c}"
    ordered = sorted(terms, key=functools.cmp_to_key(compare_terms))
    assert ordered == sorted(terms, key=term_sort_key)
    print("  ✓ Random order tests passed")


def test_random_match_soundness():
    """A pattern matches each of its instances, and the match rebuilds it"""
    rng = random.Random(23)
    for _ in range(400):
        pattern = random_term(rng, ["v1", "v2", "v3"], 3)
        s = Substitution({v: random_term(rng, ["x", "y", "z"], 2) for v in variables_of(pattern)})
        target = apply_subst(pattern, s)
        found = match_term(pattern, target)
        assert found is not None, f"{pattern} does not match its instance {target}"
        assert apply_subst(pattern, found) == target
        assert found == s, "every pattern variable occurs, so the match is unique"


def test_random_match_completeness():
    """match_term agrees with trying every binding"""
    print("Testing matching against brute force...")

    rng = random.Random(31)
    matched = 0
    for i in range(300):
        pattern = random_term(rng, ["v1", "v2", "v3"], 3)
        s = Substitution({v: random_term(rng, ["x", "y"], 1) for v in variables_of(pattern)})
        target = apply_subst(pattern, s)
        if i % 2:
            target = replace_nth(target, rng.randrange(term_size(target)),
                                 random_term(rng, ["x", "y"], 1))
        expected = brute_force_match(pattern, target)
        found = match_term(pattern, target)
        assert found == expected, f"{pattern} against {target}: {found} vs {expected}"
        matched += found is not None

        expected = brute_force_match(pattern, target, variables_only=True)
        assert match_term(pattern, target, var_to_var_only=True) == expected
    assert 150 <= matched < 300, "every unreplaced instance matches; some replacements do not"
    print(f"  ✓ Brute-force agreement on 300 pairs ({matched} matched)")



if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
