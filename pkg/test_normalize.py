"""
Termination Database Miner - Normalization Tests
Theory rules, the simplifier and its traces, canonical schemes and
clause subsumption (checked against a brute-force oracle).
"""

import dataclasses
import itertools
import random
import sys

import pytest

from tdm_config import NIL
from core.errors import CanonicalizationError, ReplayError, TheoryMismatchError
from core.reader import parse_term
from core.terms import (
    App, Substitution, Term, Var, app, apply_subst, stub_name, term_sort_key, variables_of,
)
from obligations.defuns import parse_defun
from obligations.evaluator import environments, eval_term
from obligations.rulers import Clause, ClauseList, default_measure, measure_conjecture
from normalize.canonical import canonicalize, instantiate_slots
from normalize.simplify import (
    RewriteStep, RewriteTrace, replay_trace, rewrite_literal, simplify, simplify_clause_list,
)
from normalize.subsumption import clause_subsumes, scheme_covers
from normalize.theory import DEFAULT_THEORY, TheoryRegistry, rule_weight

F3 = """
(defunt f3 (x y)
  (if (consp x)
      (if (atom y)
          (list (f3 (cddr x) y) (f3 (cadr x) y))
        (f3 (cdr x) y))
    (list x y)))
"""


def clause(*texts):
    return Clause.of(parse_term(t) for t in texts)


def f3_obligation() -> ClauseList:
    return measure_conjecture(parse_defun(F3), default_measure("x"))


# ─── Random Clauses ──────────────────────────────────────────────────

def random_literal(rng: random.Random, names, fn=None) -> Term:
    v, w = Var(rng.choice(names)), Var(rng.choice(names))
    shapes = [
        app("consp", v), app("atom", v), app("endp", v), app("null", v),
        app("eq", v, w), app("eql", app("car", v), w), app("equal", v, w),
        app("zp", v), app("natp", app("cdr", v)),
        app("<", app("acl2-count", app("cdr", v)), app("acl2-count", v)),
        app("<", app("acl2-count", app("car", app("cdr", v))), app("acl2-count", v)),
    ]
    if fn is not None:
        shapes += [app(fn, app("car", v)), app(fn, app("cdr", v))]
    lit = rng.choice(shapes)
    for _ in range(rng.randrange(3)):
        lit = app("not", lit)
    return lit


def random_clause(rng: random.Random, names, fn=None, size=(1, 4)) -> Clause:
    return Clause.of(random_literal(rng, names, fn) for _ in range(rng.randint(*size)))


def random_clause_list(rng: random.Random, names=("x", "y")) -> ClauseList:
    return ClauseList(tuple(random_clause(rng, list(names)) for _ in range(rng.randint(1, 4))))


def holds(cl: ClauseList, env) -> bool:
    return all(any(eval_term(t, env) != NIL for t in c.literals) for c in cl.clauses)


# ─── Theory ──────────────────────────────────────────────────────────

def test_theory_registry():
    """The shipped theory, in id order"""
    print("Testing theory registry...")

    assert [r.id for r in DEFAULT_THEORY.rules()] == ["R1", "R2", "R3", "R4a", "R4b", "R5"]
    assert len(DEFAULT_THEORY) == 6
    DEFAULT_THEORY.require(DEFAULT_THEORY.version)
    with pytest.raises(TheoryMismatchError):
        DEFAULT_THEORY.require("theory-v0")
    assert TheoryRegistry("theory-v2").version == "theory-v2"
    print("  ✓ Theory registry tests passed")


def test_rules_decrease_weight():
    """Every rule strictly lowers the weight, so rewriting terminates"""
    for rule in DEFAULT_THEORY.rules():
        new = rule.apply(rule.pattern)
        assert new is not None
        assert rule_weight(new) < rule_weight(rule.pattern), f"{rule.id} must decrease weight"


def test_rewrite_literal():
    assert rewrite_literal(parse_term("(not (atom y))")) == parse_term("(consp y)")
    assert rewrite_literal(parse_term("(endp x)")) == parse_term("(not (consp x))")
    assert rewrite_literal(parse_term("(eql (car x) y)")) == parse_term("(equal (car x) y)")
    assert rewrite_literal(parse_term("(f (not (not x)))")) == parse_term("(f (not (not x)))"), \
        "double negation collapses only at the top of a literal"


# ─── Simplifier ──────────────────────────────────────────────────────

def test_simplify_f3():
    """f3's obligation: atom becomes consp, rulers stay"""
    print("Testing simplifier on f3...")

    simplified, trace = simplify_clause_list(f3_obligation())
    assert len(simplified) == 3, "no clause of f3 is a tautology"
    assert simplified.clauses[0] == clause(
        "(consp y)", "(not (consp x))", "(< (acl2-count (cdr (cdr x))) (acl2-count x))")
    assert simplified.clauses[2] == clause(
        "(not (consp x))", "(not (consp y))", "(< (acl2-count (cdr x)) (acl2-count x))")
    assert "R1" in trace.rules_used() and "R5" in trace.rules_used()
    print("  ✓ Simplifier f3 tests passed")


def test_simplify_hygiene():
    """Tautologies, duplicate literals and duplicate clauses go"""
    cl = ClauseList((
        Clause((parse_term("(consp x)"), parse_term("(not (consp x))"))),
        Clause((parse_term("(atom x)"), parse_term("(endp x)"))),
        Clause((parse_term("(not (consp x))"),)),
    ))
    out = simplify(cl)
    assert out == ClauseList((clause("(not (consp x))"),))


def test_simplify_idempotent():
    """simplify(simplify(L)) == simplify(L), with an empty second trace"""
    print("Testing simplifier idempotence...")

    rng = random.Random(7)
    for _ in range(300):
        once = simplify(random_clause_list(rng))
        twice, trace = simplify_clause_list(once)
        assert twice == once, f"not idempotent on {once}"
        assert len(trace) == 0, "nothing left to do"
    print("  ✓ Idempotence tests passed")


def test_simplify_preserves_meaning():
    """The simplified list holds exactly where the original does"""
    print("Testing simplifier soundness...")

    rng = random.Random(11)
    envs = list(environments(["x", "y"], 2))
    for _ in range(30):
        cl = random_clause_list(rng)
        out = simplify(cl)
        for env in envs:
            assert holds(cl, env) == holds(out, env), f"{cl} changed meaning at {env}"

    single = list(environments(["x"], 4))
    for _ in range(25):
        cl = random_clause_list(rng, names=("x",))
        out = simplify(cl)
        for env in single:
            assert holds(cl, env) == holds(out, env), f"{cl} changed meaning at {env}"
    print("  ✓ Soundness tests passed")


def test_trace_replay():
    """A recorded trace replays to the same result"""
    print("Testing trace replay...")

    rng = random.Random(3)
    lists = [f3_obligation()] + [random_clause_list(rng) for _ in range(200)]
    for cl in lists:
        out, trace = simplify_clause_list(cl)
        assert replay_trace(cl, trace) == out, f"replay differs on {cl}"
    print("  ✓ Replay tests passed")


def test_replay_rejects_bad_steps():
    cl = f3_obligation()
    _, trace = simplify_clause_list(cl)
    step = trace.steps[0]

    out_of_range = dataclasses.replace(step, literal_index=99)
    with pytest.raises(ReplayError):
        replay_trace(cl, RewriteTrace((out_of_range,) + trace.steps[1:], trace.actions))

    unknown = dataclasses.replace(step, rule_id="R9")
    with pytest.raises(ReplayError):
        replay_trace(cl, RewriteTrace((unknown,), ()))

    misplaced = RewriteStep(step.clause_index, step.literal_index, (0, 0, 0), "R1")
    with pytest.raises(ReplayError):
        replay_trace(cl, RewriteTrace((misplaced,), ()))


# ─── Canonical Schemes ───────────────────────────────────────────────

def test_canonicalize_f3():
    """Formals become slots by position; the function becomes its stub"""
    print("Testing canonicalization...")

    scheme = canonicalize(simplify(f3_obligation()), ("x", "y"), "f3")
    assert scheme.slot_count == 2
    assert clause("(consp v2)", "(not (consp v1))",
                  "(< (acl2-count (car (cdr v1))) (acl2-count v1))") in scheme.clauses.clauses
    keys = [c.sort_key for c in scheme.clauses]
    assert keys == sorted(keys), "clauses in canonical order"
    print("  ✓ Canonicalization tests passed")


def test_canonicalize_alpha_invariant():
    """Renaming the function and its formals gives the same scheme"""
    g3 = F3.replace("f3", "g3").replace("x", "a").replace("y", "b")
    a = canonicalize(simplify(f3_obligation()), ("x", "y"), "f3")
    d = parse_defun(g3)
    b = canonicalize(simplify(measure_conjecture(d, default_measure("a"))), d.formals, d.name)
    assert a == b


def test_canonicalize_stub():
    d = parse_defun("(defun all-nested (x) "
                    "(if (consp x) (if (all-nested (car x)) (all-nested (cdr x)) nil) t))")
    scheme = canonicalize(simplify(measure_conjecture(d, default_measure("x"))), d.formals, d.name)
    printed = [str(t) for c in scheme.clauses for t in c.literals]
    assert any(stub_name(1) in p for p in printed), "own name is replaced by its stub"
    assert not any("all-nested" in p for p in printed)


def test_canonicalize_rejects_free_variables():
    with pytest.raises(CanonicalizationError):
        canonicalize(ClauseList((clause("(consp z)"),)), ("x",), "f")


def test_instantiate_slots():
    assert instantiate_slots(parse_term("(acl2-count v2)"), ("x", "y")) == parse_term("(acl2-count y)")


# ─── Subsumption ─────────────────────────────────────────────────────

def oracle_subsumes(old: Clause, new: Clause, target: str) -> bool:
    """Try every variable mapping and stub image; check literal subset."""
    old_vars = sorted(set().union(*(variables_of(t) for t in old.literals)))
    new_vars = sorted(set().union(*(variables_of(t) for t in new.literals))) or ["_"]
    stubs = {s.head for t in old.literals for s in _apps(t) if s.head.startswith("stub-")}
    keys = {term_sort_key(t) for t in new.literals}
    for image in itertools.product(new_vars, repeat=len(old_vars)):
        s = Substitution({v: Var(w) for v, w in zip(old_vars, image)},
                         {stub: target for stub in stubs})
        if all(term_sort_key(apply_subst(t, s)) in keys for t in old.literals):
            return True
    return False


def _apps(t: Term):
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from _apps(a)


def _derived_clause(rng: random.Random, old: Clause) -> Clause:
    """An instance of `old` with extra literals, so positives are common."""
    names = ["x", "y", "z"]
    old_vars = sorted(set().union(*(variables_of(t) for t in old.literals)))
    s = Substitution({v: Var(rng.choice(names)) for v in old_vars}, {stub_name(1): "f"})
    literals = [apply_subst(t, s) for t in old.literals]
    if rng.random() < 0.3 and literals:
        literals.pop(rng.randrange(len(literals)))
    literals += [random_literal(rng, names, "f") for _ in range(rng.randrange(3))]
    return Clause.of(literals)


def test_subsumption_matches_oracle():
    """10,000 random pairs agree with the brute-force oracle"""
    print("Testing subsumption against the oracle...")

    rng = random.Random(2024)
    positives = 0
    for i in range(10_000):
        old = random_clause(rng, ["v1", "v2", "v3"], stub_name(1), size=(1, 3))
        if i % 2:
            new = _derived_clause(rng, old)
        else:
            new = random_clause(rng, ["x", "y", "z"], rng.choice(["f", "g"]), size=(1, 5))
        witness = clause_subsumes(old, new, target_name="f")
        expected = oracle_subsumes(old, new, "f")
        assert (witness is not None) == expected, f"disagree on {old} / {new}"
        if witness is not None:
            positives += 1
            for k, target in enumerate(witness.literal_map):
                image = apply_subst(old.literals[k], witness.substitution)
                assert image == new.literals[target], "witness must map literals exactly"
    assert positives > 1000, "the generator should produce plenty of positives"
    print(f"  ✓ Oracle agreement on 10000 pairs ({positives} subsumed)")


def test_subsumption_seed_and_variables_only():
    old = clause("(not (consp v1))", "(< (acl2-count (cdr v1)) (acl2-count v1))")
    new = clause("(not (consp x))", "(not (consp y))", "(< (acl2-count (cdr x)) (acl2-count x))")
    assert clause_subsumes(old, new) is not None
    assert clause_subsumes(old, new, Substitution({"v1": Var("y")})) is None, "seed binds v1 to y"

    compound = clause("(not (consp (car x)))", "(< (acl2-count (cdr (car x))) (acl2-count (car x)))")
    assert clause_subsumes(old, compound) is None, "slots bind only to variables"


def test_endp_and_not_consp_agree_after_simplification():
    """Both spellings reach one normal form, so they subsume each other"""
    a = parse_defun("(defun a (x) (if (endp x) 0 (a (cdr x))))")
    b = parse_defun("(defun b (x) (if (not (consp x)) 0 (b (cdr x))))")
    sa = simplify(measure_conjecture(a, default_measure("x")))
    sb = simplify(measure_conjecture(b, default_measure("x")))
    assert sa == sb


def test_scheme_covers():
    """Coverage under the identity: clause containment"""
    small = canonicalize(ClauseList((clause("(not (consp x))",
                                            "(< (acl2-count (cdr x)) (acl2-count x))"),)), ("x",), "f")
    big = canonicalize(ClauseList((clause("(not (consp x))", "(natp (car x))",
                                          "(< (acl2-count (cdr x)) (acl2-count x))"),)), ("x",), "g")
    assert scheme_covers(small, big)
    assert not scheme_covers(big, small)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
