import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from respi.names import Endpoint, NameSupply, endpoint, session, shared, tag
from respi.syntax import (
    EvalError,
    Inact,
    Lit,
    NIL,
    OpE,
    Par,
    Send,
    VarE,
    eval_expr,
    free_vars,
    substitute,
)
from respi.config import (
    Configuration,
    Thread,
    alpha_canon,
    alpha_tag_equal,
    forgetful_map,
    struct_congruent,
)
from respi.parser import parse_configuration, parse_process
from respi.printer import pretty_print

from .oracles import substitution_agrees
from .strategies import closed_processes


# -- expression evaluation ---------------------------------------------------


def test_eval_arithmetic():
    assert eval_expr(OpE("+", (Lit(1), Lit(2)))) == 3


def test_eval_comparison_with_env():
    assert eval_expr(OpE("<=", (VarE("x"), Lit(100))), {"x": 80}) is True


def test_eval_not():
    assert eval_expr(OpE("not", (Lit(True),))) is False


def test_eval_subtraction_truncates_at_zero():
    assert eval_expr(OpE("-", (Lit(2), Lit(5)))) == 0


def test_eval_sort_mismatch():
    with pytest.raises(EvalError):
        eval_expr(OpE("+", (Lit(1), Lit(True))))


def test_eval_unbound_variable():
    with pytest.raises(EvalError):
        eval_expr(VarE("nope"))


def test_eval_mixed_equality_rejected():
    with pytest.raises(EvalError):
        eval_expr(OpE("==", (Lit(1), Lit(True))))


# -- substitution ------------------------------------------------------------


def test_substitute_into_session_position():
    p = Send("x", Lit(1), NIL)  # open term: x is a free session variable
    got = substitute(p, {"x": endpoint("s", False)})
    assert got == parse_process("~s!<1>. 0")


def test_substitute_empty_is_identity():
    p = parse_process("req a(x). x!<1>. 0")
    assert substitute(p, {}) is p


def test_substitute_avoids_capture():
    p = parse_process("new a in x!<a>. 0")
    got = substitute(p, {"x": shared("a")})
    # expected: new a' in a!<a'>. 0 with a' fresh
    assert substitution_agrees(p, {"x": shared("a")}, got)
    assert got != parse_process("new a in a!<a>. 0")


def test_substitute_shadowed_variable_untouched():
    p = parse_process("req a(x). x!<1>. 0")
    assert substitute(p, {"x": endpoint("s")}) == p


@given(closed_processes(depth=3), st.sampled_from(["x", "y"]), st.integers(0, 5))
@settings(max_examples=80, deadline=None)
def test_substitute_matches_oracle(p, var, val):
    got = substitute(p, {var: val})
    assert substitution_agrees(p, {var: val}, got)


@given(closed_processes(depth=3))
@settings(max_examples=60, deadline=None)
def test_substitute_composes_on_disjoint_domains(p):
    s1 = {"x": 1}
    s2 = {"y": endpoint("s", False)}
    both = substitute(substitute(p, s1), s2)
    merged = substitute(p, {**s1, **s2})
    assert alpha_canon(both) == alpha_canon(merged)


@given(closed_processes(depth=3))
@settings(max_examples=60, deadline=None)
def test_generated_processes_are_closed(p):
    assert not free_vars(p)


# -- structural congruence ---------------------------------------------------


def test_congruence_nil_unit_config():
    m = parse_configuration("t1 : a!<1>. 0")
    n = parse_configuration("t1 : a!<1>. 0 | nil")
    assert struct_congruent(m, n)


def test_congruence_parallel_commutes():
    m = parse_configuration("new s in (t1 : s!<1>. 0 | t2 : ~s?(x). 0)")
    n = parse_configuration("new s in (t2 : ~s?(x). 0 | t1 : s!<1>. 0)")
    assert struct_congruent(m, n)


def test_congruence_unfolds_recursion():
    p = parse_process("rec X. acc a(x). X")
    q = parse_process("acc a(x). rec X. acc a(x). X")
    assert struct_congruent(p, q)


def test_congruence_scope_extrusion():
    p = parse_process("(new d in d?(x). 0 | a!<1>. 0)")
    q = parse_process("new d in (d?(x). 0 | a!<1>. 0)")
    assert struct_congruent(p, q)


def test_congruence_drops_nil_in_processes():
    p = parse_process("(a!<1>. 0 | 0)")
    assert struct_congruent(p, parse_process("a!<1>. 0"))


@given(closed_processes(depth=3))
@settings(max_examples=40, deadline=None)
def test_congruence_reflexive(p):
    assert struct_congruent(p, p)


@given(closed_processes(depth=2), closed_processes(depth=2))
@settings(max_examples=40, deadline=None)
def test_congruence_symmetric(p, q):
    assert struct_congruent(p, q) == struct_congruent(q, p)


def test_congruence_transitive_on_sample():
    texts = [
        "(a!<1>. 0 | 0)",
        "a!<1>. 0",
        "(0 | a!<1>. 0)",
        "new d in (0 | a!<1>. 0)",  # garbage restriction collected
        "b!<1>. 0",
    ]
    terms = [parse_process(t) for t in texts]
    for p in terms:
        for q in terms:
            for r in terms:
                if struct_congruent(p, q) and struct_congruent(q, r):
                    assert struct_congruent(p, r)


# -- alpha equality of configurations ----------------------------------------


def test_alpha_tag_equal_identity():
    m = parse_configuration("new s, t1 in (t1 : s!<1>. 0)")
    assert alpha_tag_equal(m, m)


def test_alpha_tag_equal_renames_tags():
    m = Configuration.make([tag("t1")], [Thread(tag("t1"), NIL)], [])
    n = Configuration.make([tag("t9")], [Thread(tag("t9"), NIL)], [])
    assert alpha_tag_equal(m, n)


def test_alpha_tag_equal_distinguishes_free_tags():
    m = Configuration.make([], [Thread(tag("t1"), NIL)], [])
    n = Configuration.make([], [Thread(tag("t9"), NIL)], [])
    assert not alpha_tag_equal(m, n)


def test_alpha_tag_equal_respects_structure():
    m = parse_configuration("new s in (t1 : s!<1>. 0)")
    n = parse_configuration("new s in (t1 : s!<2>. 0)")
    assert not alpha_tag_equal(m, n)


# -- forgetful map -----------------------------------------------------------


def test_forgetful_single_thread():
    p = parse_process("req a(x). 0")
    cfg = Configuration.make([], [Thread(tag("t1"), p)], [])
    assert forgetful_map(cfg) == p


def test_forgetful_empty_config_is_nil():
    assert forgetful_map(Configuration.make([], [], [])) == Inact()


def test_forgetful_drops_tag_restrictions_keeps_channels():
    cfg = parse_configuration("new s, t1, t2 in (t1 : s!<1>. 0 | t2 : ~s?(x). 0)")
    got = forgetful_map(cfg)
    expected = parse_process("new s in (s!<1>. 0 | ~s?(x). 0)")
    assert struct_congruent(got, expected)


@given(closed_processes(depth=3))
@settings(max_examples=40, deadline=None)
def test_forgetful_identity_on_embedded_processes(p):
    cfg = Configuration.make([], [Thread(tag("t1"), p)], [])
    assert struct_congruent(forgetful_map(cfg), p)


def _no_memory_nodes(obj):
    from respi.config import ActionMem, ChoiceMem, ForkMem

    assert not isinstance(obj, (ActionMem, ChoiceMem, ForkMem))
    if hasattr(obj, "__dataclass_fields__"):
        for f in obj.__dataclass_fields__:
            v = getattr(obj, f)
            if isinstance(v, tuple):
                for item in v:
                    _no_memory_nodes(item)
            elif hasattr(v, "__dataclass_fields__"):
                _no_memory_nodes(v)


def test_forgetful_erases_all_memories():
    from respi.scenario import run_providers_accept

    final, _, _ = run_providers_accept()
    _no_memory_nodes(forgetful_map(final))


# -- fresh names -------------------------------------------------------------


def test_supply_distinct():
    sup = NameSupply()
    assert sup.fresh_tag() != sup.fresh_tag()


def test_supply_seeded_determinism():
    a = NameSupply(seed=7)
    b = NameSupply(seed=7)
    assert [a.fresh_tag() for _ in range(10)] == [b.fresh_tag() for _ in range(10)]
    assert [a.fresh_session() for _ in range(5)] == [b.fresh_session() for _ in range(5)]


def test_supply_hundred_thousand_distinct():
    sup = NameSupply()
    names = {sup.fresh_tag() for _ in range(100_000)}
    assert len(names) == 100_000
