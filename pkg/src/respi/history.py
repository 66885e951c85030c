"""Computation history: the memory graph, consistency checking,
causal-consistent rollback, traces and causal equivalence of traces.

Trace equivalence is decided by breadth-first closure under two moves:
swapping adjacent steps with disjoint resources, and cancelling adjacent
inverse pairs. Two traces are equivalent when their closures meet. Created
names are canonicalised positionally, so traces that differ only in fresh
draws compare equal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .names import Name, NameSupply, SESSION, TAG
from .config import (
    Configuration,
    Memory,
    Thread,
    alpha_tag_equal,
    config_key,
    mem_channel_names,
    mem_id,
    mem_rule,
    mem_tags,
    supply_for,
)
from .printer import print_configuration, print_memory, print_process
from .reduction import (
    BACKWARD,
    FORWARD,
    RedexId,
    Step,
    apply_backward,
    apply_forward,
    apply_redex,
    enumerate_backward,
    enumerate_forward,
    redex_from_record,
)

# ---------------------------------------------------------------------------
# Memory graph


@dataclass
class MemoryGraph:
    nodes: list  # (id, kind, label)
    edges: set  # (source id, target id)

    def node_ids(self) -> set:
        return {n[0] for n in self.nodes}

    def memory_nodes(self) -> set:
        return {n[0] for n in self.nodes if n[1] == "memory"}

    def successors(self, node_id: str) -> set:
        return {dst for src, dst in self.edges if src == node_id}

    def to_text(self) -> str:
        lines = [f"node {nid} {kind} {label}" for nid, kind, label in self.nodes]
        lines += [f"edge {src} {dst}" for src, dst in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": nid, "kind": kind, "label": label} for nid, kind, label in self.nodes],
            "edges": sorted([list(e) for e in self.edges]),
        }


def parse_graph_text(text: str) -> MemoryGraph:
    nodes, edges = [], set()
    for line in text.splitlines():
        if not line.strip():
            continue
        head, rest = line.split(" ", 1)
        if head == "node":
            nid, kind, label = rest.split(" ", 2)
            nodes.append((nid, kind, label))
        elif head == "edge":
            src, dst = rest.split(" ", 1)
            edges.add((src, dst))
    return MemoryGraph(nodes, edges)


def build_graph(cfg: Configuration) -> MemoryGraph:
    nodes = []
    edges = set()
    consumers = {}  # tag -> node id consuming it
    for m in cfg.memories:
        mid = f"m:{mem_id(m)}"
        nodes.append((mid, "memory", print_memory(m)))
        for t in m.consumed:
            consumers[t] = mid
    for th in cfg.threads:
        tid = f"t:{th.tag.id}"
        nodes.append((tid, "thread", f"{th.tag.id} : {print_process(th.proc)}"))
        consumers.setdefault(th.tag, tid)
    for m in cfg.memories:
        mid = f"m:{mem_id(m)}"
        for t in m.produced:
            dst = consumers.get(t)
            if dst is not None:
                edges.add((mid, dst))
    return MemoryGraph(nodes, edges)


def graph_delta(old: MemoryGraph, new: MemoryGraph) -> dict:
    old_nodes = {n[0]: n for n in old.nodes}
    new_nodes = {n[0]: n for n in new.nodes}
    return {
        "added_nodes": [list(new_nodes[i]) for i in sorted(set(new_nodes) - set(old_nodes))],
        "removed_nodes": sorted(set(old_nodes) - set(new_nodes)),
        "added_edges": sorted(list(e) for e in new.edges - old.edges),
        "removed_edges": sorted(list(e) for e in old.edges - new.edges),
    }


# ---------------------------------------------------------------------------
# Consistency


@dataclass
class ConsistencyReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str):
        self.violations.append({"kind": kind, "detail": detail})


def check_consistent(cfg: Configuration) -> ConsistencyReport:
    """Structural history consistency: unique tags, unbroken connections
    between memories and continuations, acyclic graph, bound names."""
    report = ConsistencyReport()
    live = [th.tag for th in cfg.threads]
    seen = set()
    for t in live:
        if t in seen:
            report.add("duplicate-tag", f"two live threads carry tag {t.id}")
        seen.add(t)
    produced_by = {}
    for m in cfg.memories:
        for t in m.produced:
            if t in produced_by:
                report.add("duplicate-tag", f"tag {t.id} produced by two memories")
            produced_by[t] = m
    live_set = set(live)
    for m in cfg.memories:
        for t in m.produced:
            consumers = (1 if t in live_set else 0) + sum(
                1 for m2 in cfg.memories if m2 is not m and t in m2.consumed
            )
            if consumers == 0:
                report.add(
                    "broken-connection",
                    f"tag {t.id} produced by [{mem_rule(m)}] has no thread and no consumer",
                )
            elif consumers > 1:
                report.add("duplicate-tag", f"tag {t.id} consumed more than once")
    restricted = set(cfg.names)
    for m in cfg.memories:
        for t in m.produced:
            if t not in restricted:
                report.add("unbound-name", f"produced tag {t.id} is not restricted")
        for ch in sorted(mem_channel_names(m)):
            if ch.kind == SESSION and ch not in restricted:
                report.add("unbound-name", f"session channel {ch.id} in a memory is not bound")
    # cycles over memory-to-memory links
    adj = {mem_id(m): set() for m in cfg.memories}
    for m in cfg.memories:
        for t in m.produced:
            for m2 in cfg.memories:
                if m2 is not m and t in m2.consumed:
                    adj[mem_id(m)].add(mem_id(m2))
    state = {}

    def dfs(v):
        state[v] = 1
        for w in adj[v]:
            if state.get(w) == 1:
                report.add("cycle", f"memory graph cycle through {v}")
                return
            if w not in state:
                dfs(w)
        state[v] = 2

    for v in adj:
        if v not in state:
            dfs(v)
    return report


# ---------------------------------------------------------------------------
# Traces


@dataclass
class Trace:
    initial: Configuration
    steps: list = field(default_factory=list)
    final: Configuration = None

    def __post_init__(self):
        if self.final is None:
            self.final = self.initial

    def extend(self, cfg: Configuration, step: Step) -> "Trace":
        return Trace(self.initial, self.steps + [step], cfg)

    def __len__(self):
        return len(self.steps)


def replay(initial: Configuration, records: Iterable) -> Trace:
    """Re-apply serialised step records from an initial configuration."""
    cfg = initial
    steps = []
    for rec in records:
        if isinstance(rec, Step):
            rec = rec.to_record()
        redex = redex_from_record(rec)
        if redex.direction == FORWARD:
            fresh = tuple(Name(k, i) for k, i in rec["fresh"])
            cfg, step = apply_forward(cfg, redex, None, fresh=fresh)
        else:
            cfg, step = apply_backward(cfg, redex)
        steps.append(step)
    return Trace(initial, steps, cfg)


def save_trace(path: str, trace: Trace):
    with open(path, "w") as fh:
        fh.write(trace_text(trace))


def trace_text(trace: Trace) -> str:
    lines = ["INIT " + print_configuration(trace.initial)]
    lines += [json.dumps(s.to_record(), sort_keys=True) for s in trace.steps]
    return "\n".join(lines) + "\n"


def load_trace(path: str) -> Trace:
    from .parser import parse_configuration

    with open(path) as fh:
        lines = [l for l in fh.read().splitlines() if l.strip()]
    if not lines or not lines[0].startswith("INIT "):
        raise ValueError("trace file must start with an INIT line")
    initial = parse_configuration(lines[0][len("INIT "):])
    records = [json.loads(l) for l in lines[1:]]
    return replay(initial, records)


# ---------------------------------------------------------------------------
# Rollback


class RollbackError(Exception):
    pass


def _resolve_target(cfg: Configuration, target) -> Memory:
    if isinstance(target, Memory):
        if target in cfg.memories:
            return target
        raise RollbackError("target memory is not part of the configuration")
    if isinstance(target, Name):
        for m in cfg.memories:
            if target in m.produced:
                return m
        raise RollbackError(f"no memory produced tag {target.id}")
    for m in cfg.memories:
        if mem_id(m) == target:
            return m
    raise RollbackError(f"no memory {target!r}")


def rollback(cfg: Configuration, target, supply: NameSupply = None):
    """Undo the target memory and exactly its causal descendants, children
    first. Returns (configuration, trace of the backward steps taken)."""
    mem = _resolve_target(cfg, target)
    graph = build_graph(cfg)
    wanted = {f"m:{mem_id(mem)}"}
    frontier = [f"m:{mem_id(mem)}"]
    while frontier:
        nxt = []
        for node in frontier:
            for succ in graph.successors(node):
                if succ.startswith("m:") and succ not in wanted:
                    wanted.add(succ)
                    nxt.append(succ)
        frontier = nxt
    remaining = {node[2:] for node in wanted}
    supply = supply or supply_for(cfg)
    trace = Trace(cfg)
    cur = cfg
    while remaining:
        enabled = [r for r in enumerate_backward(cur) if r.memory in remaining]
        if not enabled:
            raise RollbackError("rollback is stuck; configuration history is inconsistent")
        cur, step = apply_backward(cur, enabled[0], supply)
        remaining.discard(enabled[0].memory)
        trace = trace.extend(cur, step)
    return cur, trace


# ---------------------------------------------------------------------------
# Concurrency and causal equivalence


def concurrent(cfg: Configuration, r1: RedexId, r2: RedexId) -> bool:
    """Two co-enabled redexes are concurrent when their consumed resources
    (tags and memories) are disjoint."""
    if r1 == r2:
        return False
    return not (r1.resources() & r2.resources())


# lean, hashable step records used by the trace-space search
def _lean(step: Step) -> tuple:
    rec = step.to_record()
    return (
        rec["dir"],
        rec["rule"],
        tuple(rec["tags"]),
        rec["memory"],
        rec["branch"],
        tuple((k, i) for k, i in rec["fresh"]),
        tuple(t.id for t in step.produced_tags),
        tuple((n.kind, n.id) for n in step.removed),
    )


def _lean_resources(rec) -> frozenset:
    d, rule, tags, memory, branch, fresh, produced, removed = rec
    out = {("tag", t) for t in tags} | {("tag", t) for t in produced}
    if memory is not None:
        out.add(("mem", memory))
    if d == "F":
        out.add(("mem", ",".join(produced)))
    return frozenset(out)


def _rename_lean(rec, mapping: dict):
    d, rule, tags, memory, branch, fresh, produced, removed = rec

    def rt(t):
        return mapping.get(("tag", t), ("tag", t))[1]

    def rmem(mid):
        if mid is None:
            return None
        return ",".join(rt(t) for t in mid.split(","))

    return (
        d,
        rule,
        tuple(rt(t) for t in tags),
        rmem(memory),
        branch,
        tuple(mapping.get((k, i), (k, i)) for k, i in fresh),
        tuple(rt(t) for t in produced),
        tuple(mapping.get((k, i), (k, i)) for k, i in removed),
    )


def _canon_lean_trace(recs: tuple) -> tuple:
    mapping = {}
    out = []
    for rec in recs:
        fresh = rec[5]
        for kind, ident in fresh:
            if (kind, ident) not in mapping:
                mapping[(kind, ident)] = (kind, f"%{kind}{len(mapping)}")
        out.append(_rename_lean(rec, mapping))
    return tuple(out)


def _inverse_pair(a, b) -> bool:
    """a;b where b undoes a (forward then its mirror backward)."""
    if a[0] == "F" and b[0] == "B":
        return b[3] == ",".join(a[6]) and b[1] == a[1]
    return False


def _redo_pair(a, b):
    """a;b where a is backward on memory m and b redoes the same redex.
    Returns the renaming sending b's fresh names to m's recorded ones, or
    None when the pair does not cancel."""
    if not (a[0] == "B" and b[0] == "F" and a[1] == b[1]):
        return None
    if tuple(b[2]) != tuple(a[6]):  # b must consume exactly what a restored
        return None
    if a[1] == "if" and a[4] is not None and b[4] is not None and a[4] != b[4]:
        return None
    fresh_b = list(b[5])
    removed_a = list(a[7])
    by_kind_b = {"tag": [x for x in fresh_b if x[0] == "tag"],
                 "session": [x for x in fresh_b if x[0] == "session"]}
    by_kind_a = {"tag": [x for x in removed_a if x[0] == "tag"],
                 "session": [x for x in removed_a if x[0] == "session"]}
    if {k: len(v) for k, v in by_kind_b.items()} != {k: len(v) for k, v in by_kind_a.items()}:
        return None
    mapping = {}
    for kind in ("tag", "session"):
        for src, dst in zip(by_kind_b[kind], by_kind_a[kind]):
            mapping[src] = dst
    return mapping


def _trace_neighbours(recs: tuple):
    for i in range(len(recs) - 1):
        a, b = recs[i], recs[i + 1]
        if not (_lean_resources(a) & _lean_resources(b)):
            yield recs[:i] + (b, a) + recs[i + 2 :]
        if _inverse_pair(a, b):
            yield recs[:i] + recs[i + 2 :]
        mapping = _redo_pair(a, b)
        if mapping is not None:
            suffix = tuple(_rename_lean(r, mapping) for r in recs[i + 2 :])
            yield recs[:i] + suffix


def _closure(recs: tuple, limit: int):
    start = _canon_lean_trace(recs)
    seen = {start}
    frontier = [start]
    truncated = False
    while frontier:
        nxt = []
        for cur in frontier:
            for nb in _trace_neighbours(cur):
                cn = _canon_lean_trace(nb)
                if cn not in seen:
                    if len(seen) >= limit:
                        truncated = True
                        continue
                    seen.add(cn)
                    nxt.append(cn)
        frontier = nxt
    return seen, truncated


INDETERMINATE = None


def causally_equivalent(t1: Trace, t2: Trace, limit: int = 20000) -> Optional[bool]:
    """Decide causal equivalence of two coinitial traces.

    Returns True/False, or None when the bounded search gave out before
    reaching a verdict (reported distinctly from False on purpose)."""
    if t1.initial != t2.initial:
        raise ValueError("traces are not coinitial")
    r1 = tuple(_lean(s) for s in t1.steps)
    r2 = tuple(_lean(s) for s in t2.steps)
    c1, trunc1 = _closure(r1, limit)
    c2, trunc2 = _closure(r2, limit)
    if c1 & c2:
        return True
    if trunc1 or trunc2:
        return INDETERMINATE
    return False


def cofinal(t1: Trace, t2: Trace) -> bool:
    if t1.initial != t2.initial:
        raise ValueError("traces are not coinitial")
    return alpha_tag_equal(t1.final, t2.final)


# ---------------------------------------------------------------------------
# Exhaustive exploration


def all_traces(
    cfg: Configuration,
    max_len: int,
    include_backward: bool = True,
    supply: NameSupply = None,
) -> list:
    """Every trace from cfg of length up to max_len, seeded deterministically."""
    supply = supply or supply_for(cfg)
    out = []

    def walk(trace: Trace, cur: Configuration, sup: NameSupply):
        out.append(trace)
        if len(trace) >= max_len:
            return
        redexes = enumerate_forward(cur)
        if include_backward:
            redexes = redexes + enumerate_backward(cur)
        for r in redexes:
            branch_sup = sup.clone()
            nxt, step = apply_redex(cur, r, branch_sup)
            walk(trace.extend(nxt, step), nxt, branch_sup)

    walk(Trace(cfg), cfg, supply)
    return out


class StateSpace:
    """Reachable configurations bucketed up to alpha-equivalence."""

    def __init__(self):
        self.buckets = {}
        self.configs = []

    def add(self, cfg: Configuration) -> bool:
        key = config_key(cfg)
        bucket = self.buckets.setdefault(key, [])
        for other in bucket:
            if alpha_tag_equal(other, cfg):
                return False
        bucket.append(cfg)
        self.configs.append(cfg)
        return True

    def __len__(self):
        return len(self.configs)


def explore(cfg: Configuration, max_depth: int, include_backward: bool = True):
    """Breadth-first reachable state space up to depth, deduplicated up to
    alpha-equality. Returns the StateSpace."""
    space = StateSpace()
    space.add(cfg)
    supply = supply_for(cfg)
    frontier = [(cfg, supply)]
    for _ in range(max_depth):
        nxt = []
        for cur, sup in frontier:
            redexes = enumerate_forward(cur)
            if include_backward:
                redexes = redexes + enumerate_backward(cur)
            for r in redexes:
                bs = sup.clone()
                try:
                    new_cfg, _ = apply_redex(cur, r, bs)
                except Exception:
                    continue
                if space.add(new_cfg):
                    nxt.append((new_cfg, bs))
        frontier = nxt
    return space
