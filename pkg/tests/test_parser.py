import pytest
from hypothesis import given, settings

from respi.names import endpoint, shared, tag
from respi.syntax import (
    Accept,
    Branch,
    If,
    Inact,
    Lit,
    Par,
    Receive,
    Request,
    Select,
    Send,
)
from respi.config import ActionMem, Configuration, InitEv, Thread
from respi.parser import (
    ParseError,
    parse_configuration,
    parse_process,
    parse_program,
    parse_session_type,
    parse_typedecls,
)
from respi.printer import pretty_print
from respi import types as ty

from .strategies import closed_processes, session_types
from respi.scenario import PROVIDERS_SOURCE


def test_request_send_chain():
    p = parse_process("req a(x). x!<1>. 0")
    assert isinstance(p, Request)
    assert p.u == shared("a") and p.var == "x"
    assert isinstance(p.body, Send) and p.body.k == "x"
    assert p.body.expr == Lit(1)
    assert p.body.body == Inact()


def test_accept_receive_branch():
    p = parse_process("acc a(y). y?(z). y |> { ok: 0, no: 0 }")
    assert isinstance(p, Accept)
    assert isinstance(p.body, Receive)
    br = p.body.body
    assert isinstance(br, Branch)
    assert [l for l, _ in br.branches] == ["ok", "no"]


def test_providers_client_shape():
    cfg = parse_configuration(PROVIDERS_SOURCE)
    client = cfg.thread(tag("t1")).proc
    assert isinstance(client, Request)
    send = client.body
    assert isinstance(send, Send)
    recv = send.body
    assert isinstance(recv, Receive)
    cond = recv.body
    assert isinstance(cond, If)
    assert isinstance(cond.then, Select) and cond.then.label == "l_acc"
    inner = cond.els
    assert isinstance(inner, If)
    assert isinstance(inner.then, Select) and inner.then.label == "l_neg"
    assert isinstance(inner.els, Select) and inner.els.label == "l_rej"


def test_two_thread_configuration():
    cfg = parse_configuration("t1 : 0 | t2 : 0")
    assert {t.tag.id for t in cfg.threads} == {"t1", "t2"}
    assert all(t.proc == Inact() for t in cfg.threads)
    assert not cfg.memories


def test_nil_configuration():
    cfg = parse_configuration("nil")
    assert cfg.empty


def test_configuration_with_action_memory():
    text = (
        "new s, t1, t2 in (t1 : ~s!<1>. 0 | t2 : s?(x). 0 "
        "| [act t0,t9 -> t1,t2 : init(a, x, y, x!<1>. 0, y?(z). 0, s)])"
    )
    cfg = parse_configuration(text)
    assert len(cfg.memories) == 1
    m = cfg.memories[0]
    assert isinstance(m, ActionMem) and isinstance(m.event, InitEv)
    assert [t.id for t in m.consumed] == ["t0", "t9"]
    assert [t.id for t in m.produced] == ["t1", "t2"]
    # round-trips
    assert parse_configuration(pretty_print(cfg)) == cfg


def test_endpoint_polarity():
    p = parse_process("~s!<1>. 0")
    assert p.k == endpoint("s", False)
    q = parse_process("s!<1>. 0")
    assert q.k == endpoint("s", True)
    r = parse_process("~~s!<1>. 0")
    assert r.k == endpoint("s", True)


def test_fork_needs_parens_in_thread_body():
    cfg = parse_configuration("t1 : (0 | 0)")
    assert len(cfg.threads) == 1
    assert isinstance(cfg.threads[0].proc, Par)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_process("req a(x. 0")
    e = exc.value
    assert 0 <= e.span.start <= e.span.end <= len("req a(x. 0")
    assert e.message


def test_duplicate_branch_labels_rejected():
    with pytest.raises(ParseError):
        parse_process("s |> { ok: 0, ok: 0 }")


def test_duplicate_tags_rejected():
    with pytest.raises(ParseError):
        parse_configuration("t1 : 0 | t1 : 0")


def test_tags_forbidden_in_process_literals():
    with pytest.raises(ParseError):
        parse_process("new t1 in 0")


def test_unguarded_recursion_rejected():
    with pytest.raises(ParseError):
        parse_process("rec X. (X | 0)")
    with pytest.raises(ParseError):
        parse_process("rec X. X")


def test_shared_session_conflict_rejected():
    with pytest.raises(ParseError):
        parse_process("req s(x). s!<1>. 0")


def test_program_fallback_wraps_processes():
    cfg = parse_program("0")
    assert len(cfg.threads) == 1 and cfg.threads[0].proc == Inact()


def test_comments_and_whitespace():
    p = parse_process("-- comment\nreq a(x). 0 -- trailing\n")
    assert isinstance(p, Request)


def test_parse_is_deterministic():
    text = PROVIDERS_SOURCE
    assert parse_configuration(text) == parse_configuration(text)


def test_session_type_syntax():
    s = parse_session_type("!(nat). ?(bool). end")
    assert s == ty.Out(ty.SortRef("nat"), ty.In(ty.SortRef("bool"), ty.End()))
    s2 = parse_session_type("+{ l1: end, l2: !(nat). end }")
    assert isinstance(s2, ty.Choose) and len(s2.branches) == 2
    s3 = parse_session_type("rec T. !(nat). T")
    assert s3 == ty.RecT("T", ty.Out(ty.SortRef("nat"), ty.TVar("T")))


def test_typedecls():
    decls = parse_typedecls(
        "sort Request = nat\nchan a : < ?(Request). end >\nendpoint ~s : !(nat). end\n"
    )
    assert decls.sorts == {"Request": "nat"}
    assert shared("a") in decls.chans
    assert endpoint("s", False) in decls.endpoints


# -- round trips ---------------------------------------------------------------


@given(closed_processes(depth=4))
@settings(max_examples=120, deadline=None)
def test_process_round_trip(p):
    assert parse_process(pretty_print(p)) == p


@given(closed_processes(depth=3), closed_processes(depth=3))
@settings(max_examples=40, deadline=None)
def test_config_round_trip(p, q):
    cfg = Configuration.make([], [Thread(tag("t1"), p), Thread(tag("t2"), q)], [])
    assert parse_configuration(pretty_print(cfg)) == cfg


@given(session_types(depth=3))
@settings(max_examples=80, deadline=None)
def test_session_type_round_trip(s):
    assert parse_session_type(pretty_print(s)) == s


def test_engine_state_round_trip():
    from respi.scenario import run_providers_accept

    _, _, configs = run_providers_accept()
    for cfg in configs:
        assert parse_configuration(pretty_print(cfg)) == cfg
