import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from respi.names import NameSupply, endpoint, tag
from respi.syntax import If, Inact, Par, Receive, Send, eval_expr
from respi.config import (
    ActionMem,
    ChoiceMem,
    Configuration,
    ForkMem,
    InitEv,
    Thread,
    alpha_tag_equal,
    supply_for,
)
from respi.parser import parse_configuration, parse_process
from respi.printer import pretty_print
from respi.reduction import (
    ReductionError,
    StaleRedexError,
    apply_backward,
    apply_forward,
    apply_redex,
    endpoint_holders,
    enumerate_backward,
    enumerate_forward,
)
from respi.scenario import providers_config, run_providers_accept, two_sessions_config
from respi.propcheck import build_corpus

from .oracles import oracle_backward_enabled, oracle_forward_redexes


def _cfg(text):
    return parse_configuration(text)


def _redex_set(cfg):
    return {(r.rule, tuple(t.id for t in r.tags)) for r in enumerate_forward(cfg)}


# -- enumeration ---------------------------------------------------------------


def test_enumerate_init():
    cfg = _cfg("t1 : req a(x). 0 | t2 : acc a(y). 0")
    assert _redex_set(cfg) == {("init", ("t1", "t2"))}


def test_enumerate_inaction_empty():
    cfg = _cfg("t1 : 0")
    assert enumerate_forward(cfg) == []


def test_enumerate_com_and_if():
    cfg = _cfg("t1 : ~s!<1>. 0 | t2 : s?(x). 0 | t3 : if true then 0 else 0")
    assert _redex_set(cfg) == {("com", ("t1", "t2")), ("if", ("t3",))}


def test_enumerate_skips_unevaluable_payload():
    cfg = _cfg("t1 : ~s!<1 + true>. 0 | t2 : s?(x). 0")
    assert _redex_set(cfg) == set()


def test_enumerate_sel_requires_label():
    cfg = _cfg("t1 : ~s <| weird. 0 | t2 : s |> { ok: 0 }")
    assert _redex_set(cfg) == set()
    cfg2 = _cfg("t1 : ~s <| ok. 0 | t2 : s |> { ok: 0 }")
    assert _redex_set(cfg2) == {("sel", ("t1", "t2"))}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_enumerate_matches_bruteforce_oracle(seed):
    import random

    rng = random.Random(seed)
    from respi.propcheck import random_initial, random_walk

    cfg = random_walk(random_initial(rng), rng, 4)[-1]
    got = _redex_set(cfg)
    assert got == oracle_forward_redexes(cfg)
    got_b = {r.memory for r in enumerate_backward(cfg)}
    assert got_b == oracle_backward_enabled(cfg)


# -- forward application --------------------------------------------------------


def test_apply_init_example():
    cfg = _cfg("t1 : req a(x). x!<1>. 0 | t2 : acc a(y). y?(z). 0")
    (r,) = enumerate_forward(cfg)
    nxt, step = apply_forward(cfg, r, supply_for(cfg))
    assert len(nxt.memories) == 1
    m = nxt.memories[0]
    assert isinstance(m, ActionMem) and isinstance(m.event, InitEv)
    assert m.consumed == (tag("t1"), tag("t2"))
    s = m.event.s
    bodies = {th.tag: th.proc for th in nxt.threads}
    t1p, t2p = m.produced
    assert bodies[t1p] == Send(endpoint(s.id, False), step.produced_memory.event.p1.expr, Inact())
    assert bodies[t2p] == Receive(endpoint(s.id, True), "z", Inact())
    # requester got the minus endpoint, accepter the plus one
    assert {s, t1p, t2p} <= set(nxt.names)


def test_apply_if_uses_eval():
    cfg = _cfg("t1 : if 1 <= 1 then 0 else a!<9>. 0")
    (r,) = enumerate_forward(cfg)
    assert eval_expr(cfg.threads[0].proc.cond) is True
    nxt, step = apply_forward(cfg, r, supply_for(cfg))
    assert step.redex.branch == "then"
    m = nxt.memories[0]
    assert isinstance(m, ChoiceMem)
    assert nxt.thread(m.produced[0]).proc == Inact()


def test_apply_if_nonbool_guard_rejected():
    cfg = _cfg("t1 : if 5 then 0 else 0")
    (r,) = enumerate_forward(cfg)
    with pytest.raises(ReductionError):
        apply_forward(cfg, r, supply_for(cfg))


def test_apply_fork_of_inactions():
    cfg = _cfg("t1 : (0 | 0)")
    (r,) = enumerate_forward(cfg)
    nxt, _ = apply_forward(cfg, r, supply_for(cfg))
    m = nxt.memories[0]
    assert isinstance(m, ForkMem)
    assert all(nxt.thread(t).proc == Inact() for t in m.produced)
    assert set(m.produced) <= set(nxt.names)


def test_stale_redex_rejected():
    cfg = _cfg("t1 : req a(x). 0 | t2 : acc a(y). 0 | t3 : acc a(z). 0")
    redexes = enumerate_forward(cfg)
    supply = supply_for(cfg)
    nxt, _ = apply_forward(cfg, redexes[0], supply)
    other = [r for r in redexes if r != redexes[0]][0]
    with pytest.raises(StaleRedexError):
        apply_forward(nxt, other, supply)


def test_forced_fresh_names_must_not_clash():
    cfg = _cfg("t1 : req a(x). 0 | t2 : acc a(y). 0")
    (r,) = enumerate_forward(cfg)
    from respi.names import session

    with pytest.raises(ReductionError):
        apply_forward(cfg, r, None, fresh=(session("s"), tag("t1"), tag("t2")))


# -- backward -------------------------------------------------------------------


def test_backward_after_init():
    cfg = _cfg("t1 : req a(x). 0 | t2 : acc a(y). 0")
    (r,) = enumerate_forward(cfg)
    nxt, step = apply_forward(cfg, r, supply_for(cfg))
    back = enumerate_backward(nxt)
    assert len(back) == 1
    assert back[0] == step.mirror()
    restored, _ = apply_backward(nxt, back[0])
    assert alpha_tag_equal(restored, cfg)


def test_backward_only_on_latest_memory_of_chain():
    cfg = _cfg("t1 : req a(x). x!<1>. 0 | t2 : acc a(y). y?(z). 0")
    supply = supply_for(cfg)
    c1, s1 = apply_forward(cfg, enumerate_forward(cfg)[0], supply)
    c2, s2 = apply_forward(c1, enumerate_forward(c1)[0], supply)
    assert len(c2.memories) == 2
    back = enumerate_backward(c2)
    assert [r.memory for r in back] == [s2.to_record()["memory"] or s2.mirror().memory]
    assert back[0].memory == ",".join(t.id for t in s2.produced_tags)


def test_backward_memory_free_empty():
    assert enumerate_backward(providers_config()) == []


def test_backward_fork_uses_live_bodies():
    cfg = _cfg("t1 : (if true then 0 else 0 | 0)")
    supply = supply_for(cfg)
    c1, s1 = apply_forward(cfg, enumerate_forward(cfg)[0], supply)
    # reduce the conditional inside the left fork child
    if_redex = [r for r in enumerate_forward(c1) if r.rule == "if"][0]
    c2, s2 = apply_forward(c1, if_redex, supply)
    # the fork memory is now disabled: one produced tag was consumed
    fork_back = [r for r in enumerate_backward(c2) if r.rule == "fork"]
    assert fork_back == []
    # undo the conditional, then the fork restores the original parallel body
    c3, _ = apply_backward(c2, s2.mirror())
    c4, _ = apply_backward(c3, s1.mirror())
    assert alpha_tag_equal(c4, cfg)


def test_full_rollback_restores_scenario_start():
    final, steps, configs = run_providers_accept()
    cur = final
    while True:
        back = enumerate_backward(cur)
        if not back:
            break
        cur, _ = apply_backward(cur, back[0])
    assert alpha_tag_equal(cur, providers_config())


# -- loop lemma (sampled here; the acceptance suite runs the big corpus) --------


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_loop_lemma_sampled(seed):
    import random

    rng = random.Random(seed)
    from respi.propcheck import random_initial, random_walk

    cfg = random_walk(random_initial(rng), rng, 5)[-1]
    supply = supply_for(cfg)
    for r in enumerate_forward(cfg):
        nxt, step = apply_forward(cfg, r, supply.clone())
        undone, _ = apply_backward(nxt, step.mirror())
        assert alpha_tag_equal(undone, cfg)
    for r in enumerate_backward(cfg):
        nxt, step = apply_backward(cfg, r)
        redone, _ = apply_forward(nxt, step.mirror(), supply.clone())
        assert alpha_tag_equal(redone, cfg)


def test_two_runs_with_different_seeds_alpha_equal():
    cfg = providers_config()
    (r, _) = enumerate_forward(cfg)[:2]
    a, _ = apply_forward(cfg, r, supply_for(cfg, seed=0))
    b, _ = apply_forward(cfg, r, supply_for(cfg, seed=100))
    assert a != b  # different fresh draws
    assert alpha_tag_equal(a, b)


def test_session_linearity_at_runtime():
    for cfg in build_corpus(60, seed=3, walk_len=6):
        for ep, holders in endpoint_holders(cfg).items():
            assert len(holders) <= 1, f"{ep} held by {holders}"
