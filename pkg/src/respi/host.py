"""Reference reducer for the plain session pi-calculus.

Used as the independent oracle for the correspondence properties: the
engine's forward steps must project onto exactly these reductions through
the forgetful map. Deliberately separate from the reversible engine: it
normalises away all parallel structure (there is no fork step here) and
never creates memories.
"""
from __future__ import annotations

from dataclasses import dataclass

from .names import Endpoint, Name, SESSION
from .syntax import (
    Accept,
    Branch,
    EvalError,
    If,
    Inact,
    Par,
    Process,
    Receive,
    Request,
    Select,
    Send,
    eval_expr,
    expr_vars,
    free_names,
    rename_channel,
    substitute,
)
from .config import _spine, alpha_canon


@dataclass(frozen=True)
class HostState:
    names: tuple  # restricted channels
    comps: tuple  # parallel components, fully split


def _freshen(name: Name, used: set) -> Name:
    if name not in used:
        return name
    n = 1
    while True:
        cand = Name(name.kind, f"{name.id}_h{n}")
        if cand not in used:
            return cand
        n += 1


def host_state(p: Process) -> HostState:
    used = free_names(p)
    lifted, comps = _spine(p)
    names = []
    for c in lifted:
        f = _freshen(c, used | set(names))
        if f != c:
            comps = [rename_channel(q, c, f) for q in comps]
        names.append(f)
    comps = [q for q in comps if not isinstance(q, Inact)]
    return HostState(tuple(sorted(names)), tuple(comps))


def _rebuild(names, comps):
    if not comps:
        body = Inact()
    else:
        body = comps[-1]
        for c in reversed(comps[:-1]):
            body = Par(c, body)
    from .syntax import New

    for n in sorted(names, reverse=True):
        body = New(n, body)
    return body


def _renorm(state_names, comps) -> HostState:
    return host_state(_rebuild(state_names, comps))


def _closed_value(e):
    if expr_vars(e):
        return None
    try:
        return eval_expr(e)
    except EvalError:
        return None


def host_steps(state: HostState) -> list:
    """All single reductions of a host state."""
    out = []
    comps = list(state.comps)
    used = set(state.names)
    for c in comps:
        used |= free_names(c)
    for i, c in enumerate(comps):
        if isinstance(c, If) and not expr_vars(c.cond):
            try:
                v = eval_expr(c.cond)
            except EvalError:
                continue
            if isinstance(v, bool):
                rest = comps[:i] + comps[i + 1 :]
                out.append(_renorm(state.names, rest + [c.then if v else c.els]))
    for i, a in enumerate(comps):
        for j, b in enumerate(comps):
            if i == j:
                continue
            rest = [c for k, c in enumerate(comps) if k not in (i, j)]
            if (
                isinstance(a, Request)
                and isinstance(b, Accept)
                and isinstance(a.u, Name)
                and a.u == b.u
            ):
                s = _freshen(Name(SESSION, "s"), used)
                p1 = substitute(a.body, {a.var: Endpoint(s, False)})
                p2 = substitute(b.body, {b.var: Endpoint(s, True)})
                out.append(_renorm(tuple(state.names) + (s,), rest + [p1, p2]))
            if (
                isinstance(a, Send)
                and isinstance(b, Receive)
                and isinstance(a.k, Endpoint)
                and isinstance(b.k, Endpoint)
                and b.k == a.k.dual()
            ):
                v = _closed_value(a.expr)
                if v is not None:
                    out.append(
                        _renorm(
                            state.names,
                            rest + [a.body, substitute(b.body, {b.var: v})],
                        )
                    )
            if (
                isinstance(a, Select)
                and isinstance(b, Branch)
                and isinstance(a.k, Endpoint)
                and isinstance(b.k, Endpoint)
                and b.k == a.k.dual()
            ):
                arms = dict(b.branches)
                if a.label in arms:
                    out.append(_renorm(state.names, rest + [a.body, arms[a.label]]))
    return out


def host_equal(a: HostState, b: HostState) -> bool:
    """Equality up to a kind-respecting bijection of restricted names."""
    if len(a.names) != len(b.names) or len(a.comps) != len(b.comps):
        return False
    if sorted(n.kind for n in a.names) != sorted(n.kind for n in b.names):
        return False
    free_a = set()
    for c in a.comps:
        free_a |= free_names(c)
    free_a -= set(a.names)
    free_b = set()
    for c in b.comps:
        free_b |= free_names(c)
    free_b -= set(b.names)
    if free_a != free_b:
        return False

    target = sorted(repr(alpha_canon(c)) for c in b.comps)

    def canon_under(mapping):
        out = []
        for c in a.comps:
            q = c
            for old, new in mapping:
                q = rename_channel(q, old, Name(new.kind, "%swap-" + new.id))
            for old, new in mapping:
                q = rename_channel(q, Name(new.kind, "%swap-" + new.id), new)
            out.append(repr(alpha_canon(q)))
        return sorted(out)

    def extend(i, mapping, usedb):
        if i == len(a.names):
            return canon_under(mapping) == target
        src = a.names[i]
        for dst in b.names:
            if dst in usedb or dst.kind != src.kind:
                continue
            if extend(i + 1, mapping + [(src, dst)], usedb | {dst}):
                return True
        return False

    return extend(0, [], set())


def reduces_to(a: HostState, b: HostState) -> bool:
    return any(host_equal(n, b) for n in host_steps(a))
