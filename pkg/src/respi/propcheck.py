"""Property suites over random reachable configurations.

Everything here is deterministic given a seed: the same corpus, the same
walks, the same verdicts. Suites return reports instead of raising, so
the command line can print counts and counterexamples.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .names import Name, NameSupply, SESSION, TAG, shared, tag
from .syntax import (
    Accept,
    Branch,
    If,
    Inact,
    Lit,
    NIL,
    OpE,
    Par,
    Receive,
    Request,
    Rec,
    ProcVar,
    Select,
    Send,
    VarE,
)
from .config import Configuration, Thread, alpha_tag_equal, forgetful_map, supply_for
from .history import Trace, all_traces, causally_equivalent, cofinal
from .host import host_equal, host_state, host_steps
from .printer import print_configuration
from .reduction import (
    apply_backward,
    apply_forward,
    apply_redex,
    enumerate_backward,
    enumerate_forward,
)

# ---------------------------------------------------------------------------
# Random reachable configurations


def _random_session_pair(rng: random.Random, chan: str, var_n: int):
    """A requester/accepter pair following one random protocol, so the
    generated term always has forward steps."""
    x, y = f"cx{var_n}", f"cy{var_n}"
    ops = []
    for _ in range(rng.randint(1, 3)):
        ops.append(rng.choice(["send", "recv", "sel"]))
    client: list = []
    server: list = []
    # build bodies back to front
    cbody: object = NIL
    sbody: object = NIL
    recv_i = 0
    for op in reversed(ops):
        if op == "send":
            payload = Lit(rng.randint(0, 9))
            if rng.random() < 0.3:
                payload = OpE("+", (payload, Lit(rng.randint(0, 5))))
            v = f"v{var_n}_{recv_i}"
            recv_i += 1
            cbody = Send(x, payload, cbody)
            if rng.random() < 0.4:
                sbody = Receive(y, v, If(OpE("<=", (VarE(v), Lit(5))), sbody, sbody))
            else:
                sbody = Receive(y, v, sbody)
        elif op == "recv":
            v = f"w{var_n}_{recv_i}"
            recv_i += 1
            cbody = Receive(x, v, cbody)
            sbody = Send(y, Lit(rng.randint(0, 9)), sbody)
        else:
            labels = ["go", "stop"]
            pick = rng.choice(labels)
            cbody = Select(x, pick, cbody)
            sbody = Branch(y, tuple((l, sbody) for l in labels))
    return Request(shared(chan), x, cbody), Accept(shared(chan), y, sbody)


def _random_solo_thread(rng: random.Random):
    roll = rng.random()
    if roll < 0.35:
        guard = OpE(rng.choice(["<=", "<"]), (Lit(rng.randint(0, 5)), Lit(3)))
        return If(guard, NIL, If(OpE("not", (Lit(False),)), NIL, NIL))
    if roll < 0.6:
        return Par(NIL, If(Lit(True), NIL, NIL))
    if roll < 0.75:
        return Par(NIL, NIL)
    if roll < 0.9:
        return Rec("X", Request(shared("spare"), "sx", NIL))
    return NIL


def random_initial(rng: random.Random) -> Configuration:
    threads = []
    n = 0

    def add(proc):
        nonlocal n
        n += 1
        threads.append((tag(f"t{n}"), proc))

    pairs = rng.randint(1, 2)
    for i in range(pairs):
        chan = rng.choice(["a", "b"])
        req, acc = _random_session_pair(rng, chan, i)
        if rng.random() < 0.25:
            add(Par(req, _random_solo_thread(rng)))
        else:
            add(req)
        add(acc)
    for _ in range(rng.randint(0, 2)):
        add(_random_solo_thread(rng))
    return Configuration.initial(threads)


def random_walk(cfg: Configuration, rng: random.Random, length: int):
    """Random forward/backward walk; returns every configuration visited."""
    supply = supply_for(cfg)
    out = [cfg]
    cur = cfg
    for _ in range(length):
        redexes = enumerate_forward(cur) + enumerate_backward(cur)
        if not redexes:
            break
        r = rng.choice(redexes)
        cur, _ = apply_redex(cur, r, supply)
        out.append(cur)
    return out


def build_corpus(count: int, seed: int = 0, walk_len: int = 8):
    """At least `count` reachable configurations from random initial terms."""
    rng = random.Random(seed)
    corpus = []
    while len(corpus) < count:
        cfg = random_initial(rng)
        corpus.extend(random_walk(cfg, rng, walk_len))
    return corpus


# ---------------------------------------------------------------------------
# Suites


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, detail: str):
        if len(self.failures) < 25:
            self.failures.append(detail)
        else:
            self.notes["suppressed"] = self.notes.get("suppressed", 0) + 1

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" {self.notes}" if self.notes else ""
        return f"{status} {self.name}: {self.checked} checks, {len(self.failures)} failures{extra}"


def loop_lemma_suite(corpus) -> SuiteReport:
    """Every forward step is undone by its mirror, and every backward step
    is redone by its mirror, up to alpha-equality."""
    rep = SuiteReport("loop-lemma")
    for cfg in corpus:
        supply = supply_for(cfg)
        for r in enumerate_forward(cfg):
            nxt, step = apply_forward(cfg, r, supply.clone())
            back, _ = apply_backward(nxt, step.mirror())
            rep.checked += 1
            if not alpha_tag_equal(back, cfg):
                rep.fail(f"forward {r.key} not undone in {print_configuration(cfg)}")
        for r in enumerate_backward(cfg):
            nxt, step = apply_backward(cfg, r)
            redo, _ = apply_forward(nxt, step.mirror(), supply.clone())
            rep.checked += 1
            if not alpha_tag_equal(redo, cfg):
                rep.fail(f"backward {r.key} not redone in {print_configuration(cfg)}")
    return rep


def _fork_closure(cfg, supply):
    """Configurations reachable by fork steps only (including cfg)."""
    out = [cfg]
    frontier = [(cfg, supply)]
    while frontier:
        cur, sup = frontier.pop()
        for r in enumerate_forward(cur):
            if r.rule != "fork":
                continue
            bs = sup.clone()
            nxt, _ = apply_forward(cur, r, bs)
            out.append(nxt)
            frontier.append((nxt, bs))
    return out


def correspondence_suite(corpus) -> SuiteReport:
    """Non-fork forward steps project onto host reductions (and forks onto
    host identity); every host reduction is matched, possibly after forks."""
    rep = SuiteReport("correspondence")
    fork_stutters = 0
    fork_matches = 0
    for cfg in corpus:
        supply = supply_for(cfg)
        h = host_state(forgetful_map(cfg))
        succs = host_steps(h)
        for r in enumerate_forward(cfg):
            nxt, _ = apply_forward(cfg, r, supply.clone())
            hn = host_state(forgetful_map(nxt))
            rep.checked += 1
            if r.rule == "fork":
                fork_stutters += 1
                if not host_equal(h, hn):
                    rep.fail(f"fork changed the erasure of {print_configuration(cfg)}")
            elif not any(host_equal(s, hn) for s in succs):
                rep.fail(f"{r.key} has no host counterpart in {print_configuration(cfg)}")
        for target in succs:
            rep.checked += 1
            matched = False
            needed_fork = False
            for stage_i, stage in enumerate(_fork_closure(cfg, supply.clone())):
                for r in enumerate_forward(stage):
                    if r.rule == "fork":
                        continue
                    nxt, _ = apply_forward(stage, r, supply.clone())
                    if host_equal(host_state(forgetful_map(nxt)), target):
                        matched = True
                        needed_fork = stage_i > 0
                        break
                if matched:
                    break
            if matched:
                fork_matches += 1 if needed_fork else 0
            else:
                rep.fail(f"host reduction unmatched from {print_configuration(cfg)}")
    rep.notes["fork_stutters"] = fork_stutters
    rep.notes["matches_after_fork"] = fork_matches
    return rep


def causal_suite(cfg: Configuration, forward_len: int = 5, mixed_len: int = 4) -> SuiteReport:
    """Exhaustive: causal equivalence and cofinality coincide on all pairs
    of coinitial traces (forward-only and mixed-direction families)."""
    from .history import _closure, _lean
    from .config import config_key

    rep = SuiteReport("causal-consistency")
    for include_backward, max_len in ((False, forward_len), (True, mixed_len)):
        traces = all_traces(cfg, max_len, include_backward=include_backward)
        closures = []
        truncated = []
        for t in traces:
            c, trunc = _closure(tuple(_lean(s) for s in t.steps), 20000)
            closures.append(c)
            truncated.append(trunc)
        # final configurations grouped up to alpha-equality (linear scan
        # over class representatives: exact, never trusts hashing)
        final_class = []
        reps = []
        for t in traces:
            for cls_id, other in enumerate(reps):
                if alpha_tag_equal(other, t.final):
                    final_class.append(cls_id)
                    break
            else:
                reps.append(t.final)
                final_class.append(len(reps) - 1)
        for i in range(len(traces)):
            for j in range(i + 1, len(traces)):
                rep.checked += 1
                co = final_class[i] == final_class[j]
                eq = bool(closures[i] & closures[j])
                if not eq and (truncated[i] or truncated[j]):
                    rep.notes["indeterminate"] = rep.notes.get("indeterminate", 0) + 1
                    rep.fail(f"equivalence search gave out on pair {i},{j}")
                elif eq != co:
                    rep.fail(
                        f"pair {i},{j}: causally_equivalent={eq} but cofinal={co} "
                        f"({'fwd' if not include_backward else 'mixed'})"
                    )
        rep.notes[f"traces_{'mixed' if include_backward else 'fwd'}"] = len(traces)
    return rep


def _backward_normal_forms(cfg: Configuration):
    """All backward-only normal forms of cfg, deduplicated up to
    alpha-equality along the way. Terminates: each backward step removes
    one memory, so the reduct space is finite."""
    from .history import StateSpace

    space = StateSpace()
    space.add(cfg)
    out = []
    frontier = [cfg]
    while frontier:
        nxt = []
        for cur in frontier:
            redexes = enumerate_backward(cur)
            if not redexes:
                out.append(cur)
                continue
            for r in redexes:
                new_cfg, _ = apply_backward(cur, r)
                if space.add(new_cfg):
                    nxt.append(new_cfg)
        frontier = nxt
    return out


def unique_origin_suite(corpus) -> SuiteReport:
    """Every maximal backward reduction sequence ends in the same
    configuration up to alpha-equality."""
    rep = SuiteReport("unique-origin")
    for cfg in corpus:
        forms = _backward_normal_forms(cfg)
        rep.checked += 1
        for f in forms[1:]:
            if not alpha_tag_equal(forms[0], f):
                rep.fail(f"two distinct origins from {print_configuration(cfg)}")
                break
    return rep


def subject_reduction_suite(cfg: Configuration, decls, depth: int = 5) -> SuiteReport:
    """Typability is preserved by every forward and backward step over the
    exhaustive state space of a well-typed in-class configuration."""
    from .types import OutOfClass, SessionTypeError, typecheck_config

    rep = SuiteReport("subject-reduction")
    seen = []
    frontier = [(cfg, supply_for(cfg))]
    seen.append(cfg)
    for _ in range(depth):
        nxt = []
        for cur, sup in frontier:
            for r in enumerate_forward(cur) + enumerate_backward(cur):
                bs = sup.clone()
                new_cfg, _ = apply_redex(cur, r, bs)
                if any(alpha_tag_equal(new_cfg, s) for s in seen):
                    continue
                seen.append(new_cfg)
                nxt.append((new_cfg, bs))
                rep.checked += 1
                try:
                    res = typecheck_config(new_cfg, decls)
                    if isinstance(res, OutOfClass):
                        rep.fail(f"left the class: {res.reason} in {print_configuration(new_cfg)}")
                except SessionTypeError as e:
                    rep.fail(f"untypable after {r.key}: {e}")
        frontier = nxt
    rep.notes["states"] = len(seen)
    return rep


def run_all_suites(cfg: Configuration, bound: int = 4) -> list:
    """The property battery the command line runs on one input."""
    from .history import explore

    space = explore(cfg, bound)
    corpus = space.configs
    return [
        loop_lemma_suite(corpus),
        correspondence_suite(corpus),
        causal_suite(cfg, forward_len=min(bound + 1, 5), mixed_len=min(bound, 4)),
        unique_origin_suite(corpus),
    ]
