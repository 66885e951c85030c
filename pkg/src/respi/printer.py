"""Deterministic single-line pretty printing for every surface syntax.

parse(pretty(x)) always reconstructs x. Parallel compositions are always
parenthesised, which keeps thread bodies, branch arms and memory event
arguments unambiguous without precedence tricks. A session endpoint used
as a message value prints with explicit duality marks ("~~s" for the plus
endpoint) so that reparsing recovers its kind without context.
"""
from __future__ import annotations

from .names import Endpoint, Name, TAG
from .syntax import (
    Accept,
    Branch,
    If,
    Inact,
    Lit,
    New,
    OpE,
    Par,
    Process,
    ProcVar,
    Rec,
    Receive,
    Request,
    Select,
    Send,
    VarE,
)
from .config import (
    ActionMem,
    ChoiceMem,
    ComEv,
    Configuration,
    ForkMem,
    InitEv,
    Memory,
    SelEv,
    Thread,
)
from . import types as _types

# expression precedence levels, loosest first
_PREC = {"or": 1, "and": 2, "not": 3, "==": 4, "<=": 4, "<": 4, "+": 5, "-": 5, "*": 6}
_ATOM = 7


def print_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Name):
        return v.id
    if isinstance(v, Endpoint):
        # double dual marks the plus endpoint unambiguously in value position
        return ("~~" if v.plus else "~") + v.chan.id
    raise TypeError(f"not a value: {v!r}")


def print_expr(e, prec: int = 0) -> str:
    if isinstance(e, Lit):
        return print_value(e.value)
    if isinstance(e, VarE):
        return e.name
    if isinstance(e, OpE):
        p = _PREC[e.op]
        if e.op == "not":
            s = f"not {print_expr(e.args[0], p)}"
        else:
            s = f"{print_expr(e.args[0], p)} {e.op} {print_expr(e.args[1], p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"not an expression: {e!r}")


def _print_k(k) -> str:
    if isinstance(k, str):
        return k
    return ("" if k.plus else "~") + k.chan.id


def _print_u(u) -> str:
    return u if isinstance(u, str) else u.id


def print_process(p: Process) -> str:
    if isinstance(p, Inact):
        return "0"
    if isinstance(p, Request):
        return f"req {_print_u(p.u)}({p.var}). {print_process(p.body)}"
    if isinstance(p, Accept):
        return f"acc {_print_u(p.u)}({p.var}). {print_process(p.body)}"
    if isinstance(p, Send):
        return f"{_print_k(p.k)}!<{print_expr(p.expr)}>. {print_process(p.body)}"
    if isinstance(p, Receive):
        return f"{_print_k(p.k)}?({p.var}). {print_process(p.body)}"
    if isinstance(p, Select):
        return f"{_print_k(p.k)} <| {p.label}. {print_process(p.body)}"
    if isinstance(p, Branch):
        arms = ", ".join(f"{l}: {print_process(q)}" for l, q in p.branches)
        return f"{_print_k(p.k)} |> {{ {arms} }}"
    if isinstance(p, If):
        then = print_process(p.then)
        if isinstance(p.then, If):
            then = f"({then})"
        return f"if {print_expr(p.cond)} then {then} else {print_process(p.els)}"
    if isinstance(p, Par):
        return f"({print_process(p.left)} | {print_process(p.right)})"
    if isinstance(p, New):
        names = [p.chan]
        body = p.body
        while isinstance(body, New):
            names.append(body.chan)
            body = body.body
        return f"new {', '.join(n.id for n in names)} in {print_process(body)}"
    if isinstance(p, Rec):
        return f"rec {p.var}. {print_process(p.body)}"
    if isinstance(p, ProcVar):
        return p.name
    raise TypeError(f"not a process: {p!r}")


def _print_event(ev) -> str:
    if isinstance(ev, InitEv):
        return (
            f"init({ev.a.id}, {ev.x}, {ev.y}, {print_process(ev.p1)}, "
            f"{print_process(ev.p2)}, {ev.s.id})"
        )
    if isinstance(ev, ComEv):
        return (
            f"com({_print_k(ev.k)}, {print_expr(ev.expr)}, {ev.x}, "
            f"{print_process(ev.p)}, {print_process(ev.q)})"
        )
    if isinstance(ev, SelEv):
        arms = ", ".join(f"{l}: {print_process(q)}" for l, q in ev.branches)
        return f"sel({_print_k(ev.k)}, {ev.label}, {print_process(ev.p)}, {{ {arms} }})"
    raise TypeError(f"not an action event: {ev!r}")


def print_memory(m: Memory) -> str:
    cons = ",".join(t.id for t in m.consumed)
    prod = ",".join(t.id for t in m.produced)
    if isinstance(m, ActionMem):
        return f"[act {cons} -> {prod} : {_print_event(m.event)}]"
    if isinstance(m, ChoiceMem):
        ev = m.event
        body = (
            f"if {print_expr(ev.cond)} then {print_process(ev.then)} "
            f"else {print_process(ev.els)}"
        )
        return f"[cho {cons} -> {prod} : {body}]"
    if isinstance(m, ForkMem):
        return f"[fork {cons} -> {prod}]"
    raise TypeError(f"not a memory: {m!r}")


def _print_thread(th: Thread) -> str:
    body = print_process(th.proc)
    if isinstance(th.proc, (If, New)):
        body = f"({body})"
    return f"{th.tag.id} : {body}"


def print_configuration(cfg: Configuration) -> str:
    items = [_print_thread(t) for t in cfg.threads]
    items += [print_memory(m) for m in cfg.memories]
    if not items and not cfg.names:
        return "nil"
    inner = " | ".join(items) if items else "nil"
    if cfg.names:
        names = ", ".join(n.id for n in cfg.names)
        return f"new {names} in ({inner})"
    return inner


def print_session_type(s) -> str:
    t = _types
    if isinstance(s, t.End):
        return "end"
    if isinstance(s, t.Out):
        return f"!{_print_payload(s.payload)}.{print_session_type(s.cont)}"
    if isinstance(s, t.In):
        return f"?{_print_payload(s.payload)}.{print_session_type(s.cont)}"
    if isinstance(s, t.Choose):
        arms = ", ".join(f"{l}: {print_session_type(c)}" for l, c in s.branches)
        return f"+{{ {arms} }}"
    if isinstance(s, t.Offer):
        arms = ", ".join(f"{l}: {print_session_type(c)}" for l, c in s.branches)
        return f"&{{ {arms} }}"
    if isinstance(s, t.RecT):
        return f"rec {s.var}. {print_session_type(s.body)}"
    if isinstance(s, t.TVar):
        return s.name
    raise TypeError(f"not a session type: {s!r}")


def _print_payload(p) -> str:
    t = _types
    if isinstance(p, t.SortRef):
        return f"({p.name})"
    if isinstance(p, t.SharedSort):
        return f"(<{print_session_type(p.proto)}>)"
    return f"({print_session_type(p)})"


def pretty_print(x) -> str:
    """Print a process, configuration, memory or session type."""
    if isinstance(x, Configuration):
        return print_configuration(x)
    if isinstance(x, (ActionMem, ChoiceMem, ForkMem)):
        return print_memory(x)
    if isinstance(x, (Lit, VarE, OpE)):
        return print_expr(x)
    if isinstance(
        x, (Inact, Request, Accept, Send, Receive, Select, Branch, If, Par, New, Rec, ProcVar)
    ):
        return print_process(x)
    return print_session_type(x)
