"""Configurations: tagged threads, memories and restricted names.

A configuration is kept in a canonical flattened form: one top-level list
of restricted names over a multiset of threads and memories. Restrictions
occurring along the parallel spine of a thread body are extruded to the
top (with freshening), head recursions are unfolded, and parallel spines
are AC-sorted. Inaction is *not* erased inside thread bodies, so that a
fork of inactions remains a visible step; at the configuration level the
empty configuration is the unit of composition.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .names import Endpoint, Name, NameSupply, SESSION, SHARED, TAG
from .syntax import (
    Accept,
    Branch,
    Expr,
    If,
    Inact,
    Lit,
    New,
    NIL,
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
    expr_names,
    free_names,
    rename_channel,
    unfold_rec,
)

REC_FUEL = 32

# ---------------------------------------------------------------------------
# Events and memories


@dataclass(frozen=True)
class InitEv:
    """Session initiation on shared channel a; the requester bound x and
    receives the minus endpoint, the accepter bound y and receives plus."""

    a: Name
    x: str
    y: str
    p1: Process
    p2: Process
    s: Name


@dataclass(frozen=True)
class ComEv:
    k: Endpoint  # sender side endpoint
    expr: Expr
    x: str
    p: Process  # sender continuation
    q: Process  # receiver continuation


@dataclass(frozen=True)
class SelEv:
    k: Endpoint  # selector side endpoint
    label: str
    p: Process
    branches: tuple


@dataclass(frozen=True)
class ChoiceEv:
    cond: Expr
    then: Process
    els: Process


Event = Union[InitEv, ComEv, SelEv]


@dataclass(frozen=True)
class ActionMem:
    consumed: tuple  # (active tag, passive tag)
    event: Event
    produced: tuple  # (active continuation tag, passive continuation tag)


@dataclass(frozen=True)
class ChoiceMem:
    consumed: tuple  # (tag,)
    event: ChoiceEv
    produced: tuple  # (tag,)


@dataclass(frozen=True)
class ForkMem:
    consumed: tuple  # (tag,)
    produced: tuple  # (left tag, right tag)


Memory = Union[ActionMem, ChoiceMem, ForkMem]


def mem_id(m: Memory) -> str:
    return ",".join(t.id for t in m.produced)


def mem_rule(m: Memory) -> str:
    if isinstance(m, ActionMem):
        return {InitEv: "init", ComEv: "com", SelEv: "sel"}[type(m.event)]
    return "if" if isinstance(m, ChoiceMem) else "fork"


@dataclass(frozen=True)
class Thread:
    tag: Name
    proc: Process


# ---------------------------------------------------------------------------
# Name collection


def _expr_procs(e):
    return ()


def mem_processes(m: Memory):
    if isinstance(m, ActionMem):
        ev = m.event
        if isinstance(ev, InitEv):
            return (ev.p1, ev.p2)
        if isinstance(ev, ComEv):
            return (ev.p, ev.q)
        return (ev.p,) + tuple(q for _, q in ev.branches)
    if isinstance(m, ChoiceMem):
        return (m.event.then, m.event.els)
    return ()


def mem_channel_names(m: Memory) -> set:
    out = set()
    for p in mem_processes(m):
        out |= free_names(p)
    if isinstance(m, ActionMem):
        ev = m.event
        if isinstance(ev, InitEv):
            out |= {ev.a, ev.s}
        elif isinstance(ev, ComEv):
            out |= {ev.k.chan} | expr_names(ev.expr)
        else:
            out |= {ev.k.chan}
    elif isinstance(m, ChoiceMem):
        out |= expr_names(m.event.cond)
    return out


def mem_tags(m: Memory) -> set:
    return set(m.consumed) | set(m.produced)


def all_names(names, threads, memories) -> set:
    out = set(names)
    for th in threads:
        out.add(th.tag)
        out |= free_names(th.proc)
    for m in memories:
        out |= mem_tags(m) | mem_channel_names(m)
    return out


# ---------------------------------------------------------------------------
# Alpha-canonical renderings
#
# Bound variables, bound process variables and prefix-guarded bound
# channels are renamed positionally; the rename map handles free channel
# names (used both for restricted-name bijections and for "blind" keys).


def _canon_id(x, cmap):
    if isinstance(x, Name):
        return cmap.get(x, x)
    if isinstance(x, Endpoint):
        c = cmap.get(x.chan, x.chan)
        return Endpoint(c, x.plus)
    return x


def _canon_expr(e, cmap, venv):
    if isinstance(e, Lit):
        if isinstance(e.value, (Name, Endpoint)):
            return Lit(_canon_id(e.value, cmap))
        return e
    if isinstance(e, VarE):
        return VarE(venv.get(e.name, e.name))
    return OpE(e.op, tuple(_canon_expr(a, cmap, venv) for a in e.args))


def alpha_canon(p: Process, cmap: dict | None = None) -> Process:
    """Positional renaming of all bound identifiers; free channels are
    renamed through `cmap` when given."""
    cmap = cmap or {}
    counter = [0]

    def fresh(prefix):
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def go(p, venv, penv, cm):
        if isinstance(p, (Request, Accept)):
            u = _canon_id(p.u, cm) if not isinstance(p.u, str) else venv.get(p.u, p.u)
            v = fresh("%v")
            return type(p)(u, v, go(p.body, {**venv, p.var: v}, penv, cm))
        if isinstance(p, Send):
            k = _canon_id(p.k, cm) if not isinstance(p.k, str) else venv.get(p.k, p.k)
            return Send(k, _canon_expr(p.expr, cm, venv), go(p.body, venv, penv, cm))
        if isinstance(p, Receive):
            k = _canon_id(p.k, cm) if not isinstance(p.k, str) else venv.get(p.k, p.k)
            v = fresh("%v")
            return Receive(k, v, go(p.body, {**venv, p.var: v}, penv, cm))
        if isinstance(p, Select):
            k = _canon_id(p.k, cm) if not isinstance(p.k, str) else venv.get(p.k, p.k)
            return Select(k, p.label, go(p.body, venv, penv, cm))
        if isinstance(p, Branch):
            k = _canon_id(p.k, cm) if not isinstance(p.k, str) else venv.get(p.k, p.k)
            return Branch(k, tuple((l, go(q, venv, penv, cm)) for l, q in p.branches))
        if isinstance(p, If):
            return If(
                _canon_expr(p.cond, cm, venv),
                go(p.then, venv, penv, cm),
                go(p.els, venv, penv, cm),
            )
        if isinstance(p, Par):
            return Par(go(p.left, venv, penv, cm), go(p.right, venv, penv, cm))
        if isinstance(p, New):
            c = Name(p.chan.kind, fresh("%c"))
            return New(c, go(p.body, venv, penv, {**cm, p.chan: c}))
        if isinstance(p, Rec):
            v = fresh("%X")
            return Rec(v, go(p.body, venv, {**penv, p.var: v}, cm))
        if isinstance(p, ProcVar):
            return ProcVar(penv.get(p.name, p.name))
        return p

    return go(p, {}, {}, cmap)


def canon_event(ev, cmap):
    if isinstance(ev, InitEv):
        return InitEv(
            _canon_id(ev.a, cmap),
            "%x",
            "%y",
            alpha_canon(rename_free_var(ev.p1, ev.x, "%x"), cmap),
            alpha_canon(rename_free_var(ev.p2, ev.y, "%y"), cmap),
            _canon_id(ev.s, cmap),
        )
    if isinstance(ev, ComEv):
        return ComEv(
            _canon_id(ev.k, cmap),
            _canon_expr(ev.expr, cmap, {}),
            "%x",
            alpha_canon(ev.p, cmap),
            alpha_canon(rename_free_var(ev.q, ev.x, "%x"), cmap),
        )
    if isinstance(ev, SelEv):
        return SelEv(
            _canon_id(ev.k, cmap),
            ev.label,
            alpha_canon(ev.p, cmap),
            tuple((l, alpha_canon(q, cmap)) for l, q in ev.branches),
        )
    return ChoiceEv(
        _canon_expr(ev.cond, cmap, {}),
        alpha_canon(ev.then, cmap),
        alpha_canon(ev.els, cmap),
    )


def rename_free_var(p: Process, old: str, new: str) -> Process:
    """Rename a free value variable (used to canonicalise event binders)."""
    if old == new:
        return p

    def ren_id(x):
        return new if x == old else x

    def ren_expr(e):
        if isinstance(e, VarE):
            return VarE(ren_id(e.name)) if isinstance(e.name, str) else e
        if isinstance(e, OpE):
            return OpE(e.op, tuple(ren_expr(a) for a in e.args))
        return e

    def go(p):
        if isinstance(p, (Request, Accept)):
            u = ren_id(p.u) if isinstance(p.u, str) else p.u
            if p.var == old:
                return type(p)(u, p.var, p.body)
            return type(p)(u, p.var, go(p.body))
        if isinstance(p, Send):
            k = ren_id(p.k) if isinstance(p.k, str) else p.k
            return Send(k, ren_expr(p.expr), go(p.body))
        if isinstance(p, Receive):
            k = ren_id(p.k) if isinstance(p.k, str) else p.k
            if p.var == old:
                return Receive(k, p.var, p.body)
            return Receive(k, p.var, go(p.body))
        if isinstance(p, Select):
            k = ren_id(p.k) if isinstance(p.k, str) else p.k
            return Select(k, p.label, go(p.body))
        if isinstance(p, Branch):
            k = ren_id(p.k) if isinstance(p.k, str) else p.k
            return Branch(k, tuple((l, go(q)) for l, q in p.branches))
        if isinstance(p, If):
            return If(ren_expr(p.cond), go(p.then), go(p.els))
        if isinstance(p, Par):
            return Par(go(p.left), go(p.right))
        if isinstance(p, New):
            return New(p.chan, go(p.body))
        if isinstance(p, Rec):
            return Rec(p.var, go(p.body))
        return p

    return go(p)


def canon_memory(m: Memory, cmap: dict, tmap: dict):
    def t(x):
        return tmap.get(x, x)

    if isinstance(m, ActionMem):
        return ActionMem(
            tuple(t(x) for x in m.consumed),
            canon_event(m.event, cmap),
            tuple(t(x) for x in m.produced),
        )
    if isinstance(m, ChoiceMem):
        return ChoiceMem(
            tuple(t(x) for x in m.consumed),
            canon_event(m.event, cmap),
            tuple(t(x) for x in m.produced),
        )
    return ForkMem(tuple(t(x) for x in m.consumed), tuple(t(x) for x in m.produced))


# ---------------------------------------------------------------------------
# Thread-body normalisation


def _freshen(name: Name, avoid: set) -> Name:
    if name not in avoid:
        return name
    n = 1
    while True:
        cand = Name(name.kind, f"{name.id}_{n}")
        if cand not in avoid:
            return cand
        n += 1


def _spine(p: Process, unfold: bool = True):
    """Flatten the parallel spine, lifting restrictions encountered on it.

    Restrictions may shadow each other along the spine; each lifted binder
    is renamed apart here so the result is a flat list. With `unfold`, head
    recursions on the spine are unfolded; the budget is shared across the
    whole walk so self-duplicating recursions cannot blow up."""
    lifted = []
    fuel = [REC_FUEL]

    def go(p):
        while unfold and isinstance(p, Rec) and fuel[0] > 0:
            p = unfold_rec(p)
            fuel[0] -= 1
        if isinstance(p, New):
            if p.chan in lifted:
                fresh = _freshen(p.chan, set(lifted) | free_names(p.body))
                lifted.append(fresh)
                return go(rename_channel(p.body, p.chan, fresh))
            lifted.append(p.chan)
            return go(p.body)
        if isinstance(p, Par):
            return go(p.left) + go(p.right)
        return [p]

    comps = go(p)
    return lifted, comps


def _spine_key(p: Process, restricted: set):
    blind = {n: Name(n.kind, f"%{n.kind}") for n in restricted}
    return (repr(alpha_canon(p, blind)), repr(alpha_canon(p)))


def _rebuild_spine(comps):
    if not comps:
        return NIL
    out = comps[-1]
    for c in reversed(comps[:-1]):
        out = Par(c, out)
    return out


def normalize_body(p: Process, avoid: set, restricted: set):
    """Extrude spine restrictions (freshened against `avoid`), unfold head
    recursions, AC-sort the parallel spine. Returns (new names, body).

    Recursion must be guarded: a recursion variable exposed on a parallel
    spine has no stable normal form, so such terms are rejected."""
    lifted, comps = _spine(p)
    if any(isinstance(c, Rec) for c in comps):
        raise ValueError("unguarded recursion: a rec is stuck on a parallel spine")
    renames = []
    fresh_names = []
    for c in lifted:
        f = _freshen(c, avoid)
        avoid.add(f)
        fresh_names.append(f)
        renames.append((c, f))
    if renames:
        def ren(q):
            for old, new in renames:
                q = rename_channel(q, old, new)
            return q
        comps = [ren(c) for c in comps]
    scope = restricted | set(fresh_names)
    if len(comps) > 1:
        comps.sort(key=lambda c: _spine_key(c, scope))
    return fresh_names, _rebuild_spine(comps)


# ---------------------------------------------------------------------------
# Configuration


_NAT_SPLIT = re.compile(r"^(.*?)(\d+)$")


def name_sort_key(n: Name):
    """Numeric-aware ordering so t9 sorts before t10."""
    m = _NAT_SPLIT.match(n.id)
    if m:
        return (n.kind, m.group(1), int(m.group(2)), n.id)
    return (n.kind, n.id, -1, n.id)


def _thread_sort_key(th: Thread):
    return (name_sort_key(th.tag), repr(th.proc))


def _mem_sort_key(m: Memory):
    return (tuple(name_sort_key(t) for t in m.produced), repr(m))


@dataclass(frozen=True)
class Configuration:
    names: tuple  # restricted names, sorted
    threads: tuple  # Thread, sorted by tag
    memories: tuple  # Memory, sorted by produced tags

    @staticmethod
    def make(names: Iterable[Name], threads, memories=()) -> "Configuration":
        names = list(names)
        threads = list(threads)
        memories = list(memories)
        if len(set(names)) != len(names):
            raise ValueError("duplicate restricted names in configuration")
        avoid = all_names(names, threads, memories)
        restricted = set(names)
        out_threads = []
        for th in threads:
            lifted, body = normalize_body(th.proc, avoid, restricted)
            names.extend(lifted)
            restricted |= set(lifted)
            out_threads.append(Thread(th.tag, body))
        out_threads.sort(key=_thread_sort_key)
        memories.sort(key=_mem_sort_key)
        return Configuration(
            tuple(sorted(names, key=name_sort_key)), tuple(out_threads), tuple(memories)
        )

    @staticmethod
    def initial(tagged: Iterable[tuple], names: Iterable[Name] = ()) -> "Configuration":
        return Configuration.make(
            names, [Thread(t, p) for t, p in tagged], []
        )

    @property
    def empty(self) -> bool:
        return not self.threads and not self.memories

    def thread(self, tag: Name) -> Optional[Thread]:
        for th in self.threads:
            if th.tag == tag:
                return th
        return None

    def memory(self, mid: str) -> Optional[Memory]:
        for m in self.memories:
            if mem_id(m) == mid:
                return m
        return None

    def live_tags(self) -> set:
        return {th.tag for th in self.threads}

    def every_name(self) -> set:
        return all_names(self.names, self.threads, self.memories)


EMPTY = Configuration((), (), ())


def _rename_thread(th: Thread, old: Name, new: Name) -> Thread:
    tag = new if th.tag == old else th.tag
    proc = th.proc if old.kind == TAG else rename_channel(th.proc, old, new)
    return Thread(tag, proc)


def _rename_event(ev, old: Name, new: Name):
    if old.kind == TAG:
        return ev

    def rn(p):
        return rename_channel(p, old, new)

    def rid(x):
        if isinstance(x, Name):
            return new if x == old else x
        if isinstance(x, Endpoint):
            return Endpoint(new, x.plus) if x.chan == old else x
        return x

    def rexpr(e):
        if isinstance(e, Lit) and isinstance(e.value, (Name, Endpoint)):
            return Lit(rid(e.value))
        if isinstance(e, OpE):
            return OpE(e.op, tuple(rexpr(a) for a in e.args))
        return e

    if isinstance(ev, InitEv):
        return InitEv(rid(ev.a), ev.x, ev.y, rn(ev.p1), rn(ev.p2), rid(ev.s))
    if isinstance(ev, ComEv):
        return ComEv(rid(ev.k), rexpr(ev.expr), ev.x, rn(ev.p), rn(ev.q))
    if isinstance(ev, SelEv):
        return SelEv(rid(ev.k), ev.label, rn(ev.p), tuple((l, rn(q)) for l, q in ev.branches))
    return ChoiceEv(rexpr(ev.cond), rn(ev.then), rn(ev.els))


def _rename_memory(m: Memory, old: Name, new: Name) -> Memory:
    def rt(t):
        return new if t == old else t

    consumed = tuple(rt(t) for t in m.consumed)
    produced = tuple(rt(t) for t in m.produced)
    if isinstance(m, ActionMem):
        return ActionMem(consumed, _rename_event(m.event, old, new), produced)
    if isinstance(m, ChoiceMem):
        return ChoiceMem(consumed, _rename_event(m.event, old, new), produced)
    return ForkMem(consumed, produced)


def rename_config(cfg: Configuration, mapping: dict) -> Configuration:
    """Rename restricted names through a bijection, renormalising.

    The renaming is simultaneous (swaps are fine): every source name first
    moves to a private placeholder, then to its target."""
    threads = list(cfg.threads)
    memories = list(cfg.memories)
    names = list(cfg.names)
    pairs = [(old, new) for old, new in mapping.items() if old != new]
    temps = [(old, Name(old.kind, f"%tmp{i}"), new) for i, (old, new) in enumerate(pairs)]
    steps = [(old, tmp) for old, tmp, _ in temps] + [(tmp, new) for _, tmp, new in temps]
    for old, new in steps:
        threads = [_rename_thread(t, old, new) for t in threads]
        memories = [_rename_memory(m, old, new) for m in memories]
        names = [new if n == old else n for n in names]
    return Configuration.make(names, threads, memories)


# ---------------------------------------------------------------------------
# Equality up to renaming of restricted names (and bound identifiers)


def _canon_thread(th: Thread, cmap, tmap) -> tuple:
    return (tmap.get(th.tag, th.tag), alpha_canon(th.proc, cmap))


def _canon_parts(cfg: Configuration, mapping: dict):
    cmap = {n: m for n, m in mapping.items() if n.kind != TAG}
    tmap = {n: m for n, m in mapping.items() if n.kind == TAG}
    threads = sorted(
        (_canon_thread(t, cmap, tmap) for t in cfg.threads),
        key=lambda x: (x[0].id, repr(x[1])),
    )
    mems = sorted(
        (canon_memory(m, cmap, tmap) for m in cfg.memories), key=lambda m: repr(m)
    )
    return tuple(threads), tuple(mems)


def _occurrence_signature(cfg: Configuration, name: Name):
    in_threads = 0
    in_mems = 0
    as_tag = 0
    for th in cfg.threads:
        if th.tag == name:
            as_tag += 1
        if name.kind != TAG and name in free_names(th.proc):
            in_threads += 1
    for m in cfg.memories:
        if name in mem_tags(m) or (name.kind != TAG and name in mem_channel_names(m)):
            in_mems += 1
    return (name.kind, as_tag, in_threads, in_mems)


def alpha_tag_equal(m: Configuration, n: Configuration) -> bool:
    """True when some bijection over restricted names makes the two
    configurations structurally identical (up to bound-identifier renaming)."""
    if len(m.names) != len(n.names):
        return False
    if len(m.threads) != len(n.threads) or len(m.memories) != len(n.memories):
        return False
    if sorted(x.kind for x in m.names) != sorted(x.kind for x in n.names):
        return False

    free_m = m.every_name() - set(m.names)
    free_n = n.every_name() - set(n.names)
    if free_m != free_n:
        return False

    sig_m = {x: _occurrence_signature(m, x) for x in m.names}
    sig_n = {x: _occurrence_signature(n, x) for x in n.names}
    if sorted(sig_m.values()) != sorted(sig_n.values()):
        return False

    order = sorted(m.names, key=lambda x: (sig_m[x], x))
    target_n, target_mems = _canon_parts(n, {})

    def extend(i, mapping, used):
        if i == len(order):
            cand = rename_config(m, mapping)
            return _canon_parts(cand, {}) == (target_n, target_mems)
        src = order[i]
        for dst in n.names:
            if dst in used or sig_n[dst] != sig_m[src]:
                continue
            if extend(i + 1, {**mapping, src: dst}, used | {dst}):
                return True
        return False

    return extend(0, {}, set())


# ---------------------------------------------------------------------------
# Bucketing key (heuristic: alpha-equal configurations agree on it in all
# non-degenerate cases; always confirm with alpha_tag_equal within a bucket)


def _collect_restricted(obj, restricted, out):
    if isinstance(obj, Thread):
        if obj.tag in restricted:
            out.append(obj.tag)
        _collect_restricted_proc(obj.proc, restricted, out)
    elif isinstance(obj, (ActionMem, ChoiceMem, ForkMem)):
        for t in obj.consumed + obj.produced:
            if t in restricted:
                out.append(t)
        for nm in sorted(mem_channel_names(obj)):
            if nm in restricted:
                out.append(nm)


def _collect_restricted_proc(p, restricted, out):
    for nm in sorted(free_names(p)):
        if nm in restricted:
            out.append(nm)


def config_key(cfg: Configuration) -> str:
    restricted = set(cfg.names)
    blind = {x: Name(x.kind, f"%{x.kind}") for x in restricted}
    items = list(cfg.threads) + list(cfg.memories)
    blinded = sorted(
        (repr(_blind_item(it, blind)), i) for i, it in enumerate(items)
    )
    numbering = {}
    for _, i in blinded:
        occs = []
        _collect_restricted(items[i], restricted, occs)
        for nm in occs:
            if nm not in numbering:
                numbering[nm] = len(numbering)
    for nm in sorted(restricted):
        if nm not in numbering:
            numbering[nm] = len(numbering)
    final = {x: Name(x.kind, f"%{x.kind}{numbering[x]}") for x in restricted}
    rendered = sorted(repr(_blind_item(it, final)) for it in items)
    bound = ",".join(sorted(f"{x.kind}{numbering[x]}" for x in restricted))
    return "|".join(rendered) + "//" + bound


def _blind_item(it, mapping):
    if isinstance(it, Thread):
        cmap = {o: n for o, n in mapping.items() if o.kind != TAG}
        return (mapping.get(it.tag, it.tag), alpha_canon(it.proc, cmap))
    cmap = {o: n for o, n in mapping.items() if o.kind != TAG}
    tmap = {o: n for o, n in mapping.items() if o.kind == TAG}
    return canon_memory(it, cmap, tmap)


# ---------------------------------------------------------------------------
# Forgetful map and structural congruence


def forgetful_map(cfg: Configuration) -> Process:
    """Erase memories, tags and tag restrictions, keeping channel
    restrictions: the underlying plain session pi-calculus process."""
    procs = [th.proc for th in cfg.threads]
    if not procs:
        body = NIL
    else:
        body = procs[-1]
        for p in reversed(procs[:-1]):
            body = Par(p, body)
    for nm in sorted((x for x in cfg.names if x.kind != TAG), key=name_sort_key, reverse=True):
        body = New(nm, body)
    return body


def contains_memory(p) -> bool:
    if isinstance(p, Configuration):
        return bool(p.memories)
    return False


# -- full structural congruence on plain processes --------------------------


def proc_canon(p: Process) -> Process:
    """Normal form under parallel AC + nil laws, scope extrusion, garbage
    restriction collection and positional renaming of bound identifiers."""

    def norm(p, top=False):
        # head recursions unfold only at the outermost spine, mirroring
        # what thread-body normalisation does
        if isinstance(p, (Par, New, Inact)):
            lifted, comps = _spine(p, unfold=top)
            comps = [rebuild(c) for c in comps]
            comps = [c for c in comps if not isinstance(c, Inact)]
            used = set()
            for c in comps:
                used |= free_names(c)
            lifted = [c for c in lifted if c in used]
            # number lifted names by first occurrence in blind-sorted order
            blind = {c: Name(c.kind, f"%{c.kind}") for c in lifted}
            order = sorted(range(len(comps)), key=lambda i: repr(alpha_canon(comps[i], blind)))
            numbering = {}
            for i in order:
                occ = []
                _collect_restricted_proc(comps[i], set(lifted), occ)
                for nm in occ:
                    if nm not in numbering:
                        numbering[nm] = len(numbering)
            final = {c: Name(c.kind, f"%{c.kind}{numbering[c]}") for c in lifted}
            renamed = comps
            for old in lifted:
                renamed = [rename_channel(c, old, final[old]) for c in renamed]
            renamed.sort(key=lambda c: repr(alpha_canon(c)))
            body = _rebuild_spine(renamed)
            for old in sorted(lifted, key=lambda c: numbering[c], reverse=True):
                body = New(final[old], body)
            return body
        return rebuild(p)

    def rebuild(p):
        if isinstance(p, (Request, Accept)):
            return type(p)(p.u, p.var, norm(p.body))
        if isinstance(p, Send):
            return Send(p.k, p.expr, norm(p.body))
        if isinstance(p, Receive):
            return Receive(p.k, p.var, norm(p.body))
        if isinstance(p, Select):
            return Select(p.k, p.label, norm(p.body))
        if isinstance(p, Branch):
            return Branch(p.k, tuple((l, norm(q)) for l, q in p.branches))
        if isinstance(p, If):
            return If(p.cond, norm(p.then), norm(p.els))
        if isinstance(p, (Par, New)):
            return norm(p)
        if isinstance(p, Rec):
            return Rec(p.var, norm(p.body))
        return p

    if isinstance(p, Rec):
        return alpha_canon(rebuild(p))
    return alpha_canon(norm(p, top=True))


def _proc_congruent(p: Process, q: Process) -> bool:
    cp, cq = proc_canon(p), proc_canon(q)
    if cp == cq:
        return True
    # tolerate one head unfolding of recursion on either side
    for a, b in ((unfold_head(p), q), (p, unfold_head(q))):
        if a is not None and b is not None and proc_canon(a) == proc_canon(b):
            return True
    return False


def unfold_head(p: Process):
    if isinstance(p, Rec):
        return unfold_rec(p)
    return None


def struct_congruent(a, b) -> bool:
    """Structural congruence on processes or configurations."""
    if isinstance(a, Configuration) and isinstance(b, Configuration):
        return alpha_tag_equal(a, b)
    if isinstance(a, Configuration) or isinstance(b, Configuration):
        return False
    return _proc_congruent(a, b)


def supply_for(cfg: Configuration, seed: int = 0) -> NameSupply:
    return NameSupply(seed).ensure_above(cfg.every_name())
