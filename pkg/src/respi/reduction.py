"""Forward and backward reduction.

A forward step consumes whole threads, produces freshly tagged
continuations and a memory recording everything needed to undo it. A
backward step consumes a memory together with the threads carrying its
produced tags and restores the recorded pre-state. Applying a step never
mutates a configuration; callers thread the resulting value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .names import Endpoint, Name, NameSupply, SESSION, TAG
from .syntax import (
    Accept,
    Branch,
    EvalError,
    If,
    Par,
    Process,
    Receive,
    Request,
    Select,
    Send,
    eval_expr,
    expr_vars,
    free_names,
    substitute,
)
from .config import (
    ActionMem,
    ChoiceEv,
    ChoiceMem,
    ComEv,
    Configuration,
    ForkMem,
    InitEv,
    Memory,
    SelEv,
    Thread,
    mem_channel_names,
    mem_id,
    mem_rule,
    mem_tags,
)

FORWARD = "forward"
BACKWARD = "backward"

_MUTATION = None  # test hook; see set_mutation


def set_mutation(name: Optional[str]):
    """Deliberately corrupt one rule (used to prove the property suites
    can catch a broken engine). Supported: "com-swap", None."""
    global _MUTATION
    if name not in (None, "com-swap"):
        raise ValueError(f"unknown mutation {name!r}")
    _MUTATION = name


class StaleRedexError(Exception):
    pass


class ReductionError(Exception):
    pass


@dataclass(frozen=True)
class RedexId:
    direction: str
    rule: str  # init | com | sel | if | fork
    tags: tuple  # consumed thread tags, active party first
    memory: Optional[str] = None  # backward target memory
    branch: Optional[str] = None  # conditional: branch the guard takes

    @property
    def key(self) -> str:
        parts = ["F" if self.direction == FORWARD else "B", self.rule]
        parts.append(",".join(t.id for t in self.tags))
        if self.memory is not None:
            parts.append(self.memory)
        if self.branch is not None:
            parts.append(self.branch)
        return ":".join(parts)

    def resources(self) -> frozenset:
        out = {("tag", t.id) for t in self.tags}
        if self.memory is not None:
            out.add(("mem", self.memory))
        return frozenset(out)


@dataclass(frozen=True)
class Step:
    redex: RedexId
    consumed_tags: tuple
    produced_tags: tuple
    consumed_memory: Optional[Memory]
    produced_memory: Optional[Memory]
    fresh: tuple  # names newly restricted by a forward step
    removed: tuple  # names dropped by a backward step

    @property
    def direction(self) -> str:
        return self.redex.direction

    @property
    def rule(self) -> str:
        return self.redex.rule

    def mirror(self) -> RedexId:
        """The redex undoing (or redoing) this step."""
        if self.direction == FORWARD:
            m = self.produced_memory
            return RedexId(BACKWARD, self.rule, m.produced, memory=mem_id(m))
        m = self.consumed_memory
        return RedexId(FORWARD, self.rule, m.consumed, branch=self.redex.branch)

    def resources(self) -> frozenset:
        out = {("tag", t.id) for t in self.consumed_tags + self.produced_tags}
        for m in (self.consumed_memory, self.produced_memory):
            if m is not None:
                out.add(("mem", mem_id(m)))
        return frozenset(out)

    def to_record(self) -> dict:
        return {
            "dir": "F" if self.direction == FORWARD else "B",
            "rule": self.rule,
            "tags": [t.id for t in self.redex.tags],
            "memory": self.redex.memory,
            "branch": self.redex.branch,
            "fresh": [[n.kind, n.id] for n in self.fresh],
        }


def redex_from_record(rec: dict) -> RedexId:
    direction = FORWARD if rec["dir"] == "F" else BACKWARD
    return RedexId(
        direction,
        rec["rule"],
        tuple(Name(TAG, t) for t in rec["tags"]),
        memory=rec.get("memory"),
        branch=rec.get("branch"),
    )


# ---------------------------------------------------------------------------
# Enumeration


def _closed(e) -> bool:
    return not expr_vars(e)


def _evaluable(e) -> bool:
    if not _closed(e):
        return False
    try:
        eval_expr(e)
        return True
    except EvalError:
        return False


def _if_branch(e) -> Optional[str]:
    try:
        v = eval_expr(e)
    except EvalError:
        return None
    if isinstance(v, bool):
        return "then" if v else "else"
    return None


def enumerate_forward(cfg: Configuration) -> list:
    out = []
    threads = cfg.threads
    for th in threads:
        b = th.proc
        if isinstance(b, If) and _closed(b.cond):
            out.append(RedexId(FORWARD, "if", (th.tag,), branch=_if_branch(b.cond)))
        elif isinstance(b, Par):
            out.append(RedexId(FORWARD, "fork", (th.tag,)))
    for t1 in threads:
        for t2 in threads:
            if t1.tag == t2.tag:
                continue
            b1, b2 = t1.proc, t2.proc
            if (
                isinstance(b1, Request)
                and isinstance(b2, Accept)
                and isinstance(b1.u, Name)
                and b1.u == b2.u
            ):
                out.append(RedexId(FORWARD, "init", (t1.tag, t2.tag)))
            if (
                isinstance(b1, Send)
                and isinstance(b2, Receive)
                and isinstance(b1.k, Endpoint)
                and isinstance(b2.k, Endpoint)
                and b2.k == b1.k.dual()
                and _evaluable(b1.expr)
            ):
                out.append(RedexId(FORWARD, "com", (t1.tag, t2.tag)))
            if (
                isinstance(b1, Select)
                and isinstance(b2, Branch)
                and isinstance(b1.k, Endpoint)
                and isinstance(b2.k, Endpoint)
                and b2.k == b1.k.dual()
                and any(l == b1.label for l, _ in b2.branches)
            ):
                out.append(RedexId(FORWARD, "sel", (t1.tag, t2.tag)))
    out.sort(key=lambda r: r.key)
    return out


def _tags_referenced_elsewhere(cfg: Configuration, mem: Memory) -> bool:
    for m in cfg.memories:
        if m is mem:
            continue
        if set(mem.produced) & mem_tags(m):
            return True
    return False


def _session_removable(cfg: Configuration, mem: Memory) -> bool:
    if not (isinstance(mem, ActionMem) and isinstance(mem.event, InitEv)):
        return True
    s = mem.event.s
    if s not in cfg.names:
        return False
    produced = set(mem.produced)
    for th in cfg.threads:
        if th.tag not in produced and s in free_names(th.proc):
            return False
    for m in cfg.memories:
        if m is not mem and s in mem_channel_names(m):
            return False
    return True


def enumerate_backward(cfg: Configuration) -> list:
    out = []
    live = cfg.live_tags()
    restricted = set(cfg.names)
    for m in cfg.memories:
        if not all(t in live for t in m.produced):
            continue
        if not all(t in restricted for t in m.produced):
            continue
        if _tags_referenced_elsewhere(cfg, m):
            continue
        if not _session_removable(cfg, m):
            continue
        out.append(RedexId(BACKWARD, mem_rule(m), m.produced, memory=mem_id(m)))
    out.sort(key=lambda r: r.key)
    return out


# ---------------------------------------------------------------------------
# Application


def _get_thread(cfg: Configuration, t: Name) -> Thread:
    th = cfg.thread(t)
    if th is None:
        raise StaleRedexError(f"no live thread {t.id}")
    return th


def _draw(supply: NameSupply, kinds, forced):
    if forced is not None:
        if len(forced) != len(kinds) or any(n.kind != k for n, k in zip(forced, kinds)):
            raise ReductionError("forced fresh names do not fit the rule")
        return list(forced)
    out = []
    for k in kinds:
        out.append(supply.fresh_session() if k == SESSION else supply.fresh_tag())
    return out


def apply_forward(
    cfg: Configuration, r: RedexId, supply: NameSupply, fresh: Optional[tuple] = None
):
    """Apply an enabled forward redex; returns (new configuration, step)."""
    if r.direction != FORWARD:
        raise ValueError("apply_forward needs a forward redex")
    taken = set(cfg.every_name())

    def check_fresh(ns):
        clash = [n for n in ns if n in taken]
        if clash:
            raise ReductionError(f"fresh names {clash} already occur in the configuration")

    if r.rule == "init":
        t1, t2 = r.tags
        th1, th2 = _get_thread(cfg, t1), _get_thread(cfg, t2)
        b1, b2 = th1.proc, th2.proc
        if not (
            isinstance(b1, Request)
            and isinstance(b2, Accept)
            and isinstance(b1.u, Name)
            and b1.u == b2.u
        ):
            raise StaleRedexError("threads no longer synchronise on a shared channel")
        s, t1p, t2p = _draw(supply, (SESSION, TAG, TAG), fresh)
        check_fresh((s, t1p, t2p))
        mem = ActionMem((t1, t2), InitEv(b1.u, b1.var, b2.var, b1.body, b2.body, s), (t1p, t2p))
        new_threads = [
            Thread(t1p, substitute(b1.body, {b1.var: Endpoint(s, False)})),
            Thread(t2p, substitute(b2.body, {b2.var: Endpoint(s, True)})),
        ]
        created = (s, t1p, t2p)
    elif r.rule == "com":
        t1, t2 = r.tags
        th1, th2 = _get_thread(cfg, t1), _get_thread(cfg, t2)
        b1, b2 = th1.proc, th2.proc
        if not (
            isinstance(b1, Send)
            and isinstance(b2, Receive)
            and isinstance(b1.k, Endpoint)
            and isinstance(b2.k, Endpoint)
            and b2.k == b1.k.dual()
        ):
            raise StaleRedexError("threads no longer communicate on dual endpoints")
        try:
            value = eval_expr(b1.expr)
        except EvalError as e:
            raise ReductionError(f"payload does not evaluate: {e}") from e
        t1p, t2p = _draw(supply, (TAG, TAG), fresh)
        check_fresh((t1p, t2p))
        mem = ActionMem((t1, t2), ComEv(b1.k, b1.expr, b2.var, b1.body, b2.body), (t1p, t2p))
        new_threads = [
            Thread(t1p, b1.body),
            Thread(t2p, substitute(b2.body, {b2.var: value})),
        ]
        created = (t1p, t2p)
    elif r.rule == "sel":
        t1, t2 = r.tags
        th1, th2 = _get_thread(cfg, t1), _get_thread(cfg, t2)
        b1, b2 = th1.proc, th2.proc
        if not (
            isinstance(b1, Select)
            and isinstance(b2, Branch)
            and isinstance(b1.k, Endpoint)
            and isinstance(b2.k, Endpoint)
            and b2.k == b1.k.dual()
        ):
            raise StaleRedexError("threads no longer agree on a selection")
        arms = dict(b2.branches)
        if b1.label not in arms:
            raise StaleRedexError(f"label {b1.label} is not offered")
        t1p, t2p = _draw(supply, (TAG, TAG), fresh)
        check_fresh((t1p, t2p))
        mem = ActionMem((t1, t2), SelEv(b1.k, b1.label, b1.body, b2.branches), (t1p, t2p))
        new_threads = [Thread(t1p, b1.body), Thread(t2p, arms[b1.label])]
        created = (t1p, t2p)
    elif r.rule == "if":
        (t,) = r.tags
        th = _get_thread(cfg, t)
        b = th.proc
        if not isinstance(b, If):
            raise StaleRedexError("thread is no longer a conditional")
        try:
            v = eval_expr(b.cond)
        except EvalError as e:
            raise ReductionError(f"guard does not evaluate: {e}") from e
        if not isinstance(v, bool):
            raise ReductionError(f"guard evaluates to {v!r}, not a boolean")
        (tp,) = _draw(supply, (TAG,), fresh)
        check_fresh((tp,))
        mem = ChoiceMem((t,), ChoiceEv(b.cond, b.then, b.els), (tp,))
        new_threads = [Thread(tp, b.then if v else b.els)]
        created = (tp,)
        r = RedexId(FORWARD, "if", r.tags, branch="then" if v else "else")
    elif r.rule == "fork":
        (t,) = r.tags
        th = _get_thread(cfg, t)
        b = th.proc
        if not isinstance(b, Par):
            raise StaleRedexError("thread is no longer a parallel composition")
        t1p, t2p = _draw(supply, (TAG, TAG), fresh)
        check_fresh((t1p, t2p))
        mem = ForkMem((t,), (t1p, t2p))
        new_threads = [Thread(t1p, b.left), Thread(t2p, b.right)]
        created = (t1p, t2p)
    else:
        raise ValueError(f"unknown rule {r.rule!r}")

    consumed = set(r.tags)
    threads = [th for th in cfg.threads if th.tag not in consumed] + new_threads
    new_cfg = Configuration.make(
        list(cfg.names) + list(created), threads, list(cfg.memories) + [mem]
    )
    step = Step(
        redex=r,
        consumed_tags=tuple(r.tags),
        produced_tags=mem.produced,
        consumed_memory=None,
        produced_memory=mem,
        fresh=tuple(created),
        removed=(),
    )
    return new_cfg, step


def apply_backward(cfg: Configuration, r: RedexId, supply: NameSupply = None):
    """Undo the step recorded by the target memory; returns (config, step)."""
    if r.direction != BACKWARD:
        raise ValueError("apply_backward needs a backward redex")
    mem = cfg.memory(r.memory) if r.memory else None
    if mem is None:
        raise StaleRedexError(f"no memory {r.memory!r}")
    live = cfg.live_tags()
    if not all(t in live for t in mem.produced):
        raise StaleRedexError("a continuation of this memory was consumed meanwhile")
    if not all(t in set(cfg.names) for t in mem.produced):
        raise StaleRedexError("continuation tags escape the memory's scope")
    if _tags_referenced_elsewhere(cfg, mem) or not _session_removable(cfg, mem):
        raise StaleRedexError("the memory's scope is still in use")

    removed_names = list(mem.produced)
    if isinstance(mem, ActionMem):
        ev = mem.event
        t1, t2 = mem.consumed
        if isinstance(ev, InitEv):
            restored = [
                Thread(t1, Request(ev.a, ev.x, ev.p1)),
                Thread(t2, Accept(ev.a, ev.y, ev.p2)),
            ]
            removed_names.append(ev.s)
        elif isinstance(ev, ComEv):
            k = ev.k.dual() if _MUTATION == "com-swap" else ev.k
            restored = [
                Thread(t1, Send(k, ev.expr, ev.p)),
                Thread(t2, Receive(k.dual(), ev.x, ev.q)),
            ]
        else:
            restored = [
                Thread(t1, Select(ev.k, ev.label, ev.p)),
                Thread(t2, Branch(ev.k.dual(), ev.branches)),
            ]
    elif isinstance(mem, ChoiceMem):
        ev = mem.event
        restored = [Thread(mem.consumed[0], If(ev.cond, ev.then, ev.els))]
    else:  # fork: rebuild from the live bodies
        left = _get_thread(cfg, mem.produced[0]).proc
        right = _get_thread(cfg, mem.produced[1]).proc
        restored = [Thread(mem.consumed[0], Par(left, right))]

    gone = set(mem.produced)
    threads = [th for th in cfg.threads if th.tag not in gone] + restored
    memories = [m for m in cfg.memories if m is not mem]
    names = [n for n in cfg.names if n not in set(removed_names)]
    new_cfg = Configuration.make(names, threads, memories)
    step = Step(
        redex=r,
        consumed_tags=mem.produced,
        produced_tags=mem.consumed,
        consumed_memory=mem,
        produced_memory=None,
        fresh=(),
        removed=tuple(removed_names),
    )
    return new_cfg, step


def apply_redex(cfg, r: RedexId, supply: NameSupply, fresh=None):
    if r.direction == FORWARD:
        return apply_forward(cfg, r, supply, fresh)
    return apply_backward(cfg, r, supply)


def enumerate_all(cfg: Configuration) -> list:
    return enumerate_forward(cfg) + enumerate_backward(cfg)


def endpoint_holders(cfg: Configuration) -> dict:
    """Which live threads mention each session endpoint (runtime linearity:
    at most one holder per endpoint in well-typed runs)."""
    holders = {}

    def scan(p, tag):
        from .syntax import Branch as B, If as I, New as N, Par as P2, Rec as R

        if isinstance(p, (Send, Receive, Select)):
            if isinstance(p.k, Endpoint):
                holders.setdefault(p.k, set()).add(tag)
            scan(p.body, tag)
        elif isinstance(p, B):
            if isinstance(p.k, Endpoint):
                holders.setdefault(p.k, set()).add(tag)
            for _, q in p.branches:
                scan(q, tag)
        elif isinstance(p, (Request, Accept)):
            scan(p.body, tag)
        elif isinstance(p, I):
            scan(p.then, tag)
            scan(p.els, tag)
        elif isinstance(p, P2):
            scan(p.left, tag)
            scan(p.right, tag)
        elif isinstance(p, (N, R)):
            scan(p.body, tag)

    for th in cfg.threads:
        scan(th.proc, th.tag)
    return holders
