"""Independent oracles the unit tests check the engine against.

These deliberately take the dumbest correct route: pre-freshen every
binder before substituting, enumerate redexes by direct pattern scans,
and so on. They share no logic with the implementation paths they check.
"""
from __future__ import annotations

import itertools

from respi.names import Endpoint, Name
from respi.syntax import (
    Accept,
    Branch,
    If,
    Lit,
    New,
    OpE,
    Par,
    Rec,
    Receive,
    Request,
    Select,
    Send,
    VarE,
    eval_expr,
    expr_vars,
    rename_channel,
)
from respi.config import alpha_canon

_counter = itertools.count(1)


def _freshen_all_binders(p):
    """Rename every channel binder to a globally fresh name, making plain
    textual substitution capture-proof."""
    if isinstance(p, New):
        fresh = Name(p.chan.kind, f"oraclefresh{next(_counter)}")
        return New(fresh, _freshen_all_binders(rename_channel(p.body, p.chan, fresh)))
    if isinstance(p, (Request, Accept)):
        return type(p)(p.u, p.var, _freshen_all_binders(p.body))
    if isinstance(p, Send):
        return Send(p.k, p.expr, _freshen_all_binders(p.body))
    if isinstance(p, Receive):
        return Receive(p.k, p.var, _freshen_all_binders(p.body))
    if isinstance(p, Select):
        return Select(p.k, p.label, _freshen_all_binders(p.body))
    if isinstance(p, Branch):
        return Branch(p.k, tuple((l, _freshen_all_binders(q)) for l, q in p.branches))
    if isinstance(p, If):
        return If(p.cond, _freshen_all_binders(p.then), _freshen_all_binders(p.els))
    if isinstance(p, Par):
        return Par(_freshen_all_binders(p.left), _freshen_all_binders(p.right))
    if isinstance(p, Rec):
        return Rec(p.var, _freshen_all_binders(p.body))
    return p


def _plain_subst(p, sub):
    """Textual substitution; only safe after _freshen_all_binders."""

    def sub_id(x):
        if isinstance(x, str) and x in sub:
            return sub[x]
        return x

    def sub_expr(e):
        if isinstance(e, VarE) and e.name in sub:
            return Lit(sub[e.name])
        if isinstance(e, OpE):
            return OpE(e.op, tuple(sub_expr(a) for a in e.args))
        return e

    def drop(s, var):
        return {k: v for k, v in s.items() if k != var}

    if isinstance(p, (Request, Accept)):
        inner = drop(sub, p.var)
        body = _plain_subst(p.body, inner) if inner else p.body
        return type(p)(sub_id(p.u), p.var, body)
    if isinstance(p, Send):
        return Send(sub_id(p.k), sub_expr(p.expr), _plain_subst(p.body, sub))
    if isinstance(p, Receive):
        inner = drop(sub, p.var)
        body = _plain_subst(p.body, inner) if inner else p.body
        return Receive(sub_id(p.k), p.var, body)
    if isinstance(p, Select):
        return Select(sub_id(p.k), p.label, _plain_subst(p.body, sub))
    if isinstance(p, Branch):
        return Branch(sub_id(p.k), tuple((l, _plain_subst(q, sub)) for l, q in p.branches))
    if isinstance(p, If):
        return If(sub_expr(p.cond), _plain_subst(p.then, sub), _plain_subst(p.els, sub))
    if isinstance(p, Par):
        return Par(_plain_subst(p.left, sub), _plain_subst(p.right, sub))
    if isinstance(p, New):
        return New(p.chan, _plain_subst(p.body, sub))
    if isinstance(p, Rec):
        return Rec(p.var, _plain_subst(p.body, sub))
    return p


def oracle_substitute(p, sub):
    return _plain_subst(_freshen_all_binders(p), sub)


def substitution_agrees(p, sub, result) -> bool:
    return alpha_canon(oracle_substitute(p, sub)) == alpha_canon(result)


def oracle_forward_redexes(cfg):
    """Brute-force scan for enabled forward redexes; returns a set of
    (rule, tag ids) descriptors."""
    out = set()
    threads = list(cfg.threads)
    for th in threads:
        if isinstance(th.proc, If) and not expr_vars(th.proc.cond):
            out.add(("if", (th.tag.id,)))
        if isinstance(th.proc, Par):
            out.add(("fork", (th.tag.id,)))
    for a in threads:
        for b in threads:
            if a.tag == b.tag:
                continue
            pa, pb = a.proc, b.proc
            if isinstance(pa, Request) and isinstance(pb, Accept):
                if isinstance(pa.u, Name) and pa.u == pb.u:
                    out.add(("init", (a.tag.id, b.tag.id)))
            if isinstance(pa, Send) and isinstance(pb, Receive):
                if (
                    isinstance(pa.k, Endpoint)
                    and isinstance(pb.k, Endpoint)
                    and pa.k.chan == pb.k.chan
                    and pa.k.plus != pb.k.plus
                    and not expr_vars(pa.expr)
                ):
                    try:
                        eval_expr(pa.expr)
                        out.add(("com", (a.tag.id, b.tag.id)))
                    except Exception:
                        pass
            if isinstance(pa, Select) and isinstance(pb, Branch):
                if (
                    isinstance(pa.k, Endpoint)
                    and isinstance(pb.k, Endpoint)
                    and pa.k.chan == pb.k.chan
                    and pa.k.plus != pb.k.plus
                    and pa.label in dict(pb.branches)
                ):
                    out.add(("sel", (a.tag.id, b.tag.id)))
    return out


def oracle_backward_enabled(cfg):
    """Memories whose every produced tag is currently a live thread."""
    live = {th.tag for th in cfg.threads}
    return {
        ",".join(t.id for t in m.produced)
        for m in cfg.memories
        if all(t in live for t in m.produced)
    }
