"""
Termination Database Miner - Obligation Tests
Definitions, call contexts, measure conjectures and the falsifier.
"""

import sys

import pytest

from core.errors import DefinitionError, TermSyntaxError
from core.reader import parse_term
from core.terms import Pair, Var, app
from obligations.defuns import parse_defun, parse_definitions, print_defun
from obligations.evaluator import (
    NONTERMINATING, acl2_count, environments, eval_term, falsify, values_of_count,
)
from obligations.rulers import (
    Clause, ClauseList, Measure, call_contexts, default_measure, measure_conjecture,
)

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


# ─── Definitions ─────────────────────────────────────────────────────

def test_parse_defun():
    """defun and defunt both read; declared measures are kept"""
    print("Testing definition parsing...")

    d = parse_defun(F3)
    assert d.name == "f3" and d.formals == ("x", "y"), "name and formals"
    assert d.is_recursive and d.arity == 2

    m = parse_defun("(defun len (x) (declare (xargs :measure (acl2-count x))) "
                    "(if (consp x) (+ 1 (len (cdr x))) 0))")
    assert m.declared_measure == parse_term("(acl2-count x)"), "declared measure kept"
    assert parse_defun(print_defun(m)) == m, "canonical print reads back"

    assert not parse_defun("(defun id (x) x)").is_recursive
    print("  ✓ Definition parsing tests passed")


@pytest.mark.parametrize("text", [
    "(defun f (x) y)",                                   # free variable
    "(defun car (x) x)",                                  # builtin name
    "(defun f (x x) x)",                                  # duplicate formal
    "(defun f (x) (f x x))",                              # self-call arity
    "(defun f (x) (stub-1 x))",                           # reserved stub
    "(defun f (x) (declare (xargs :measure (acl2-count y))) (f (cdr x)))",
    "(mutual-recursion (defun f (x) x))",
    "(defun f (x) (let ((y x)) y))",
])
def test_bad_definitions(text):
    """Malformed definitions raise DefinitionError or a reader error"""
    with pytest.raises((DefinitionError, TermSyntaxError)):
        parse_defun(text)


def test_book_annotations():
    """A ;; book: line marks only the next definition"""
    defs = parse_definitions("""
(defun a (x) (if (consp x) (a (cdr x)) t))
;; book: misc/b
(defun b (x) (if (consp x) (b (cdr x)) t))
(defun c (x) (if (consp x) (c (cdr x)) t))
""")
    assert [s.book for s in defs] == [None, "misc/b", None]


# ─── Call Contexts ───────────────────────────────────────────────────

def test_call_contexts_f3():
    """Three calls, inner first, then-branch before else-branch"""
    print("Testing call contexts...")

    d = parse_defun(F3)
    contexts = call_contexts(d)
    assert len(contexts) == 3, "one context per call"
    assert [c.call_args[0] for c in contexts] == [
        parse_term("(cddr x)"), parse_term("(cadr x)"), parse_term("(cdr x)")]
    assert contexts[0].ruler == (parse_term("(consp x)"), parse_term("(atom y)"))
    assert contexts[2].ruler == (parse_term("(consp x)"), parse_term("(not (atom y))"))
    print("  ✓ Call context tests passed")


def test_nested_calls_come_first():
    d = parse_defun("(defun ack (x) (if (consp x) (ack (ack (cdr x))) nil))")
    contexts = call_contexts(d)
    assert contexts[0].call_args == (parse_term("(cdr x)"),)
    assert contexts[1].call_args == (parse_term("(ack (cdr x))"),)


def test_only_if_governs():
    """Tests of other forms never become rulers"""
    d = parse_defun("(defun f (x) (cons (consp x) (if (consp x) (f (cdr x)) nil)))")
    assert call_contexts(d)[0].ruler == (parse_term("(consp x)"),)


def test_measure_conjecture():
    """Negated rulers plus the decrease literal"""
    d = parse_defun(F3)
    cl = measure_conjecture(d, default_measure("x"))
    assert cl.clauses[2] == clause(
        "(not (consp x))", "(atom y)", "(< (acl2-count (cdr x)) (acl2-count x))",
    ), "double negation collapses before simplification"
    assert cl.clauses[0] == clause(
        "(not (consp x))", "(not (atom y))",
        "(< (acl2-count (cdr (cdr x))) (acl2-count x))",
    )
    assert cl[0] == cl.clauses[0] and cl[-1] == cl.clauses[2], "clause lists index like tuples"
    assert list(cl) == list(cl.clauses)


def test_measure_conjecture_substitutes_all_formals():
    d = parse_defun("(defun f (x y) (if (consp y) (f (cdr y) (car y)) x))")
    cl = measure_conjecture(d, Measure(parse_term("(+ (acl2-count x) (acl2-count y))")))
    lit = next(t for t in cl.clauses[0].literals if t.head == "<")
    assert lit == parse_term(
        "(< (+ (acl2-count (cdr y)) (acl2-count (car y))) (+ (acl2-count x) (acl2-count y)))")


# ─── Evaluator ───────────────────────────────────────────────────────

def test_acl2_count():
    print("Testing acl2-count...")

    assert acl2_count(5) == 5
    assert acl2_count("nil") == 0
    assert acl2_count(Pair(1, Pair(2, "nil"))) == 5
    for n in range(4):
        assert all(acl2_count(v) == n for v in values_of_count(n)), f"count {n}"
    assert len(values_of_count(0)) == 3
    assert len(values_of_count(1)) == 10
    print("  ✓ acl2-count tests passed")


def test_environments_bound_each_variable():
    """Each variable ranges up to the bound on its own; smaller totals come first"""
    envs = list(environments(["x", "y"], 2))
    sizes = [(acl2_count(env["x"]), acl2_count(env["y"])) for env in envs]
    totals = [a + b for a, b in sizes]
    assert totals == sorted(totals), "environments come in increasing total size"
    assert max(max(s) for s in sizes) == 2
    assert (2, 2) in sizes, "the bound applies per variable, not to the sum"
    per_variable = sum(len(values_of_count(c)) for c in range(3))
    assert len(envs) == per_variable ** 2


def test_eval_builtins():
    env = {"x": Pair(1, Pair(2, "nil")), "n": 3}
    assert eval_term(parse_term("(car (cdr x))"), env) == 2
    assert eval_term(parse_term("(zp n)"), env) == "nil"
    assert eval_term(parse_term("(- 1 n)"), env) == 0, "subtraction truncates at zero"
    assert eval_term(parse_term("(endp (cddr x))"), env) == "t"


def test_eval_fuel():
    """Non-terminating user functions yield NONTERMINATING, not a hang"""
    loop = parse_defun("(defun loop (x) (loop x))")
    result = eval_term(app("loop", Var("x")), {"x": 0}, {"loop": loop}, fuel=50)
    assert result is NONTERMINATING


def test_eval_default_fuel_is_not_limited_by_call_depth():
    """Deep recursion runs out of fuel, never out of interpreter stack"""
    grow = parse_defun("(defun grow (x) (if (consp x) (grow (cons x x)) nil))")
    assert eval_term(parse_term("(grow x)"), {"x": Pair(1, "nil")}, {"grow": grow}) is NONTERMINATING

    down = parse_defun("(defun down (n) (if (zp n) 0 (down (- n 1))))")
    assert eval_term(parse_term("(down n)"), {"n": 900}, {"down": down}) == 0, \
        "900 nested calls fit in the default fuel"

    build = parse_defun("(defun build (n) (if (zp n) nil (cons n (build (- n 1)))))")
    deep = eval_term(parse_term("(build n)"), {"n": 800}, {"build": build})
    assert acl2_count(deep) == 800 + 800 * 801 // 2


def test_falsify_grow():
    """A growing argument has a small counterexample"""
    print("Testing falsifier...")

    d = parse_defun("(defun grow (x) (if (consp x) (grow (cons x x)) nil))")
    cex = falsify(measure_conjecture(d, default_measure("x")))
    assert cex is not None, "grow must be falsified"
    assert cex.clause_index == 0
    assert dict(cex.env)["x"] == Pair("nil", "nil"), "smallest cons first"
    assert str(cex) == "clause 0: x=(nil)"
    print("  ✓ Falsifier tests passed")


def test_falsify_true_obligation():
    d = parse_defun("(defun len (x) (if (consp x) (len (cdr x)) 0))")
    assert falsify(measure_conjecture(d, default_measure("x")), 4) is None


def test_falsify_bounds_each_variable():
    """Both variables may reach the bound together"""
    cl = ClauseList((clause("(< (acl2-count x) 3)", "(< (acl2-count y) 3)"),))
    cex = falsify(cl, 4)
    assert cex is not None, "x=3, y=3 lies within the bound"
    assert str(cex) == "clause 0: x=3 y=3", "smallest total size first"
    assert falsify(cl, 2) is None


def test_falsify_mixed_literals():
    """Literals over two variables are checked on the pruned product"""
    cl = ClauseList((clause("(not (consp x))", "(< (acl2-count y) (acl2-count x))"),))
    cex = falsify(cl, 2)
    assert str(cex) == "clause 0: x=(nil) y=1"
    assert falsify(ClauseList((clause("(natp 0)", "(atom x)"),)), 4) is None


def test_falsify_skips_user_symbols():
    cl = ClauseList((clause("(f x)"),))
    assert falsify(cl) is None, "clauses with user functions are not evaluated"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
