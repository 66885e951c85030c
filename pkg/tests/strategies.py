"""Hypothesis strategies for terms, kept inside the parser's naming
conventions: variables come from a pool disjoint from channel names, and
session channels appear only where the grammar gives kind evidence."""
from __future__ import annotations

from hypothesis import strategies as st

from respi.names import Endpoint, endpoint, session, shared
from respi.syntax import (
    Accept,
    Branch,
    If,
    Inact,
    Lit,
    New,
    NIL,
    OpE,
    Par,
    ProcVar,
    Rec,
    Receive,
    Request,
    Select,
    Send,
    VarE,
)
from respi import types as ty

SHARED_POOL = ["a", "b", "c"]
SESSION_POOL = ["s", "r"]
VAR_POOL = ["x", "y", "z", "w"]
LABELS = ["l1", "l2", "l3"]
PROC_VARS = ["X", "Y"]


def exprs(bound_vars):
    atoms = [
        st.integers(min_value=0, max_value=9).map(Lit),
        st.booleans().map(Lit),
        st.sampled_from(SHARED_POOL).map(lambda c: Lit(shared(c))),
        st.sampled_from(SESSION_POOL).flatmap(
            lambda s: st.booleans().map(lambda plus: Lit(endpoint(s, plus)))
        ),
    ]
    if bound_vars:
        atoms.append(st.sampled_from(sorted(bound_vars)).map(VarE))
    base = st.one_of(*atoms)

    def extend(inner):
        binop = st.sampled_from(["+", "-", "*", "==", "<=", "<", "and", "or"])
        return st.one_of(
            st.tuples(binop, inner, inner).map(lambda t: OpE(t[0], (t[1], t[2]))),
            inner.map(lambda e: OpE("not", (e,))),
        )

    return st.recursive(base, extend, max_leaves=4)


def _k(bound_vars):
    opts = [
        st.sampled_from(SESSION_POOL).flatmap(
            lambda s: st.booleans().map(lambda plus: endpoint(s, plus))
        )
    ]
    if bound_vars:
        opts.append(st.sampled_from(sorted(bound_vars)))
    return st.one_of(*opts)


def _u(bound_vars):
    opts = [st.sampled_from(SHARED_POOL).map(shared)]
    if bound_vars:
        opts.append(st.sampled_from(sorted(bound_vars)))
    return st.one_of(*opts)


@st.composite
def processes(draw, depth: int = 3, bound=frozenset(), procvars=frozenset()):
    if depth <= 0:
        leaf = [st.just(NIL)]
        if procvars:
            leaf.append(st.sampled_from(sorted(procvars)).map(ProcVar))
        return draw(st.one_of(*leaf))
    kind = draw(
        st.sampled_from(
            ["nil", "req", "acc", "send", "recv", "sel", "branch", "if", "par", "new", "rec"]
            + (["pvar"] if procvars else [])
        )
    )
    sub = lambda b=bound, pv=procvars: processes(depth=depth - 1, bound=b, procvars=pv)
    if kind == "nil":
        return NIL
    if kind == "pvar":
        return ProcVar(draw(st.sampled_from(sorted(procvars))))
    if kind in ("req", "acc"):
        u = draw(_u(bound))
        var = draw(st.sampled_from(VAR_POOL))
        body = draw(processes(depth=depth - 1, bound=bound | {var}, procvars=procvars))
        return (Request if kind == "req" else Accept)(u, var, body)
    if kind == "send":
        return Send(draw(_k(bound)), draw(exprs(bound)), draw(sub()))
    if kind == "recv":
        var = draw(st.sampled_from(VAR_POOL))
        body = draw(processes(depth=depth - 1, bound=bound | {var}, procvars=procvars))
        return Receive(draw(_k(bound)), var, body)
    if kind == "sel":
        return Select(draw(_k(bound)), draw(st.sampled_from(LABELS)), draw(sub()))
    if kind == "branch":
        n = draw(st.integers(1, 3))
        labels = draw(st.permutations(LABELS))[:n]
        arms = tuple((l, draw(sub())) for l in labels)
        return Branch(draw(_k(bound)), arms)
    if kind == "if":
        return If(draw(exprs(bound)), draw(sub()), draw(sub()))
    if kind == "par":
        return Par(draw(sub()), draw(sub()))
    if kind == "new":
        chan = shared(draw(st.sampled_from(["d", "e"])))
        return New(chan, draw(sub()))
    # rec: keep the variable guarded under a prefix
    var = draw(st.sampled_from(PROC_VARS))
    inner = draw(processes(depth=depth - 1, bound=bound, procvars=procvars | {var}))
    guard_var = draw(st.sampled_from(VAR_POOL))
    return Rec(var, Accept(draw(_u(bound)), guard_var, inner))


@st.composite
def closed_processes(draw, depth: int = 3):
    return draw(processes(depth=depth))


@st.composite
def session_types(draw, depth: int = 3, recvars=frozenset()):
    if depth <= 0:
        opts = [st.just(ty.End())]
        if recvars:
            opts.append(st.sampled_from(sorted(recvars)).map(ty.TVar))
        return draw(st.one_of(*opts))
    kind = draw(st.sampled_from(["end", "out", "in", "choose", "offer", "rec"]))
    if kind == "end":
        return ty.End()
    if kind == "rec":
        var = draw(st.sampled_from(["T", "U"]))
        # keep recursion guarded: the body is a prefix around the variable
        inner = draw(session_types(depth=depth - 1, recvars=recvars | {var}))
        payload = draw(payloads(depth - 1, recvars | {var}))
        return ty.RecT(var, draw(st.sampled_from([ty.Out, ty.In]))(payload, inner))
    if kind in ("out", "in"):
        payload = draw(payloads(depth - 1, recvars))
        cont = draw(session_types(depth=depth - 1, recvars=recvars))
        return (ty.Out if kind == "out" else ty.In)(payload, cont)
    n = draw(st.integers(1, 3))
    labels = LABELS[:n]
    arms = tuple((l, draw(session_types(depth=depth - 1, recvars=recvars))) for l in labels)
    return (ty.Choose if kind == "choose" else ty.Offer)(arms)


@st.composite
def payloads(draw, depth: int = 1, recvars=frozenset()):
    kind = draw(st.sampled_from(["nat", "bool", "named", "shared", "session"]))
    if kind == "nat":
        return ty.SortRef("nat")
    if kind == "bool":
        return ty.SortRef("bool")
    if kind == "named":
        return ty.SortRef(draw(st.sampled_from(["Request", "Quote"])))
    if kind == "shared":
        return ty.SharedSort(draw(session_types(depth=max(depth, 0), recvars=recvars)))
    return draw(session_types(depth=max(depth, 0), recvars=recvars))
