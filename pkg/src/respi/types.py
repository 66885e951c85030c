"""Binary session types and the type discipline for processes and
memory-carrying configurations.

Process typing is a bottom-up synthesis: each process yields the linear
typing of its free session endpoints. Internal choice synthesises only the
selected labels, so conditionals merge their branches by label union and
duality closure accepts a selector offering a subset of what the dual
branch offers.

Configuration typing covers the restricted class: configurations whose
history starts from initial terms with no open sessions, no top-level
conditional or recursion and no delegation. Session-initiation memories
are checked against the shared channel's declared protocol; later
communication memories of a covered session contribute nothing. A
communication memory whose session has no initiation memory in scope is
typed literally, which is what makes a stray memory clash with the live
threads of the same session (the composition of the two typings is
undefined).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .names import Endpoint, Name, SESSION, SHARED, TAG
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
    forgetful_map,
    mem_processes,
)

# ---------------------------------------------------------------------------
# Session type syntax


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class Out:
    payload: object
    cont: object


@dataclass(frozen=True)
class In:
    payload: object
    cont: object


@dataclass(frozen=True)
class Choose:
    branches: tuple  # ((label, type), ...)


@dataclass(frozen=True)
class Offer:
    branches: tuple


@dataclass(frozen=True)
class RecT:
    var: str
    body: object


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class SortRef:
    name: str  # nat | bool | a declared data sort


@dataclass(frozen=True)
class SharedSort:
    proto: object  # accepter-side session type


@dataclass(frozen=True)
class AnySort:
    """Payload sort of a received value that is never inspected."""


END = End()
ANY = AnySort()


@dataclass
class TypeDecls:
    sorts: dict = field(default_factory=dict)  # name -> "nat" | "bool"
    chans: dict = field(default_factory=dict)  # shared Name -> accepter protocol
    endpoints: dict = field(default_factory=dict)  # Endpoint -> session type

    def base_of(self, name: str) -> str:
        if name in ("nat", "bool"):
            return name
        if name in self.sorts:
            return self.sorts[name]
        raise SessionTypeError("unbound", f"sort {name!r} is not declared")


class SessionTypeError(Exception):
    KINDS = (
        "linearity-violation",
        "duality-mismatch",
        "label-missing",
        "sort-mismatch",
        "unbound",
        "composition-undefined",
    )

    def __init__(self, kind: str, message: str, location: str = ""):
        assert kind in self.KINDS
        super().__init__(f"{kind}: {message}" + (f" (at {location})" if location else ""))
        self.kind = kind
        self.message = message
        self.location = location


@dataclass(frozen=True)
class OutOfClass:
    reason: str


def dual(s):
    """Swap outputs with inputs and selections with offers; an involution."""
    if isinstance(s, End):
        return s
    if isinstance(s, Out):
        return In(s.payload, dual(s.cont))
    if isinstance(s, In):
        return Out(s.payload, dual(s.cont))
    if isinstance(s, Choose):
        return Offer(tuple((l, dual(c)) for l, c in s.branches))
    if isinstance(s, Offer):
        return Choose(tuple((l, dual(c)) for l, c in s.branches))
    if isinstance(s, RecT):
        return RecT(s.var, dual(s.body))
    if isinstance(s, TVar):
        return s
    raise TypeError(f"not a session type: {s!r}")


def _unfold(s):
    seen = 0
    while isinstance(s, RecT) and seen < 64:
        s = _subst_tvar(s.body, s.var, s)
        seen += 1
    return s


def _subst_tvar(s, var, repl):
    if isinstance(s, TVar):
        return repl if s.name == var else s
    if isinstance(s, RecT):
        if s.var == var:
            return s
        return RecT(s.var, _subst_tvar(s.body, var, repl))
    if isinstance(s, Out):
        return Out(s.payload, _subst_tvar(s.cont, var, repl))
    if isinstance(s, In):
        return In(s.payload, _subst_tvar(s.cont, var, repl))
    if isinstance(s, Choose):
        return Choose(tuple((l, _subst_tvar(c, var, repl)) for l, c in s.branches))
    if isinstance(s, Offer):
        return Offer(tuple((l, _subst_tvar(c, var, repl)) for l, c in s.branches))
    return s


def type_equal(a, b, decls: TypeDecls | None = None, _assumed=None) -> bool:
    """Equi-recursive equality; branch label order is irrelevant."""
    decls = decls or TypeDecls()
    assumed = _assumed if _assumed is not None else set()
    key = (a, b)
    if key in assumed:
        return True
    assumed = assumed | {key}
    a, b = _unfold(a), _unfold(b)
    if isinstance(a, End) and isinstance(b, End):
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, (Out, In)):
        return _payload_equal(a.payload, b.payload, decls, assumed) and type_equal(
            a.cont, b.cont, decls, assumed
        )
    if isinstance(a, (Choose, Offer)):
        da, db = dict(a.branches), dict(b.branches)
        if set(da) != set(db):
            return False
        return all(type_equal(da[l], db[l], decls, assumed) for l in da)
    if isinstance(a, TVar):
        return a.name == b.name
    return False


def _payload_equal(pa, pb, decls, assumed):
    if isinstance(pa, AnySort) or isinstance(pb, AnySort):
        return True
    if isinstance(pa, SortRef) and isinstance(pb, SortRef):
        return decls.base_of(pa.name) == decls.base_of(pb.name)
    if isinstance(pa, SharedSort) and isinstance(pb, SharedSort):
        return type_equal(pa.proto, pb.proto, decls, assumed)
    if isinstance(pa, (SortRef, SharedSort)) or isinstance(pb, (SortRef, SharedSort)):
        return False
    return type_equal(pa, pb, decls, assumed)


def compatible(got, want, decls: TypeDecls | None = None, _assumed=None) -> bool:
    """Can behaviour `got` inhabit a slot expecting `want`? Selections may
    choose fewer labels than allowed, offers may accept more."""
    decls = decls or TypeDecls()
    assumed = _assumed if _assumed is not None else set()
    key = (got, want)
    if key in assumed:
        return True
    assumed = assumed | {key}
    got, want = _unfold(got), _unfold(want)
    if isinstance(got, End) and isinstance(want, End):
        return True
    if isinstance(got, (Out, In)) and type(got) is type(want):
        return _payload_equal(got.payload, want.payload, decls, assumed) and compatible(
            got.cont, want.cont, decls, assumed
        )
    if isinstance(got, Choose) and isinstance(want, Choose):
        dg, dw = dict(got.branches), dict(want.branches)
        return set(dg) <= set(dw) and all(
            compatible(dg[l], dw[l], decls, assumed) for l in dg
        )
    if isinstance(got, Offer) and isinstance(want, Offer):
        dg, dw = dict(got.branches), dict(want.branches)
        return set(dg) >= set(dw) and all(
            compatible(dg[l], dw[l], decls, assumed) for l in dw
        )
    if isinstance(got, TVar) and isinstance(want, TVar):
        return got.name == want.name
    return False


def completed(delta: dict) -> bool:
    return all(isinstance(_unfold(t), End) for t in delta.values())


@dataclass
class Typing:
    delta: dict = field(default_factory=dict)  # Endpoint | var name -> session type

    @property
    def is_completed(self) -> bool:
        return completed(self.delta)


def compose(d1: dict, d2: dict, kind: str = "composition-undefined", location: str = "") -> dict:
    overlap = set(d1) & set(d2)
    if overlap:
        k = sorted(str(x) for x in overlap)[0]
        raise SessionTypeError(kind, f"endpoint {k} claimed by two parallel components", location)
    out = dict(d1)
    out.update(d2)
    return out


# ---------------------------------------------------------------------------
# Sort inference for value variables


class _Slot:
    __slots__ = ("sort",)

    def __init__(self):
        self.sort = None  # None | "nat" | "bool" | SharedSort | "session"

    def constrain(self, sort, var):
        if sort is None:
            return
        if self.sort is None:
            self.sort = sort
            return
        if self.sort == sort:
            return
        raise SessionTypeError(
            "sort-mismatch", f"variable {var} used both as {self.sort} and as {sort}"
        )

    def payload(self):
        if self.sort is None:
            return ANY
        if isinstance(self.sort, SharedSort):
            return self.sort
        return SortRef(self.sort)


def _expr_sort(e, venv: dict, decls: TypeDecls, delta0: dict, used_annotations: set):
    """Infer the sort of an expression, constraining variable slots.

    Returns "nat" | "bool" | SharedSort | a session type (delegated
    endpoint) | None for a not-yet-constrained variable."""
    if isinstance(e, Lit):
        v = e.value
        if isinstance(v, bool):
            return "bool"
        if isinstance(v, int):
            return "nat"
        if isinstance(v, Name):
            if v in decls.chans:
                return SharedSort(decls.chans[v])
            raise SessionTypeError("unbound", f"shared channel {v.id} has no declared type")
        if isinstance(v, Endpoint):
            if v in delta0 and v not in used_annotations:
                used_annotations.add(v)
                return delta0[v]
            raise SessionTypeError(
                "unbound",
                f"cannot infer the delegated type of endpoint {v!r}; "
                "declare it with an endpoint annotation",
            )
    if isinstance(e, VarE):
        slot = venv.get(e.name)
        if slot is None:
            raise SessionTypeError("unbound", f"unbound variable {e.name}")
        if slot.sort == "session":
            raise SessionTypeError(
                "unbound", f"cannot infer the delegated type of variable {e.name}"
            )
        return slot.sort
    if isinstance(e, OpE):
        arg_sorts = [
            _expr_sort(a, venv, decls, delta0, used_annotations) for a in e.args
        ]
        if e.op in ("+", "-", "*", "<=", "<"):
            want = "nat"
        elif e.op in ("not", "and", "or"):
            want = "bool"
        else:  # ==
            known = [s for s in arg_sorts if s is not None]
            if len(known) == 2 and known[0] != known[1]:
                raise SessionTypeError("sort-mismatch", f"cannot compare {known[0]} with {known[1]}")
            want = known[0] if known else None
        for a, s in zip(e.args, arg_sorts):
            if want is not None and s is not None and s != want:
                raise SessionTypeError(
                    "sort-mismatch", f"operand of {e.op!r} has sort {s}, expected {want}"
                )
            if isinstance(a, VarE) and want is not None:
                venv[a.name].constrain(want, a.name)
        if e.op in ("+", "-", "*"):
            return "nat"
        return "bool"
    raise SessionTypeError("sort-mismatch", f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Process typing (synthesis)


def _merge_payload(pa, pb, decls):
    if isinstance(pa, AnySort):
        return pb
    if isinstance(pb, AnySort):
        return pa
    if _payload_equal(pa, pb, decls, set()):
        return pa
    raise SessionTypeError("sort-mismatch", f"payload sorts {pa} and {pb} disagree")


def _merge_type(a, b, decls):
    """Join the typings two exclusive branches give one endpoint."""
    ua, ub = _unfold(a), _unfold(b)
    if isinstance(ua, End) and isinstance(ub, End):
        return a
    if isinstance(ua, Choose) and isinstance(ub, Choose):
        da, db = dict(ua.branches), dict(ub.branches)
        labels = list(da) + [l for l in db if l not in da]
        out = []
        for l in labels:
            if l in da and l in db:
                out.append((l, _merge_type(da[l], db[l], decls)))
            else:
                out.append((l, da.get(l, db.get(l))))
        return Choose(tuple(out))
    if type(ua) is type(ub) and isinstance(ua, (Out, In)):
        return type(ua)(
            _merge_payload(ua.payload, ub.payload, decls),
            _merge_type(ua.cont, ub.cont, decls),
        )
    if isinstance(ua, Offer) and isinstance(ub, Offer):
        da, db = dict(ua.branches), dict(ub.branches)
        if set(da) != set(db):
            raise SessionTypeError(
                "duality-mismatch", "branches offer different label sets for one endpoint"
            )
        return Offer(tuple((l, _merge_type(da[l], db[l], decls)) for l, _ in ua.branches))
    if type_equal(a, b, decls):
        return a
    raise SessionTypeError(
        "duality-mismatch", f"conditional branches use an endpoint at {a} versus {b}"
    )


def _merge_deltas(d1, d2, decls):
    out = {}
    for k in set(d1) | set(d2):
        out[k] = _merge_type(d1.get(k, END), d2.get(k, END), decls)
    return out


def _key_of(k):
    return k  # Endpoint or variable name; both hashable


class _Ctx:
    def __init__(self, decls: TypeDecls, delta0: dict):
        self.decls = decls
        self.delta0 = dict(delta0 or {})
        self.used_annotations = set()


def _shared_proto(u, venv, ctx):
    if isinstance(u, Name):
        if u in ctx.decls.chans:
            return ctx.decls.chans[u]
        raise SessionTypeError("unbound", f"shared channel {u.id} has no declared type")
    slot = venv.get(u)
    if slot is None:
        raise SessionTypeError("unbound", f"unbound variable {u}")
    if isinstance(slot.sort, SharedSort):
        return slot.sort.proto
    raise SessionTypeError(
        "unbound", f"variable {u} is not known to carry a shared channel type"
    )


def _close_session_var(delta, var, want, venv, ctx, who):
    got = delta.pop(var, END)
    slot = venv.get(var)
    if slot is not None and slot.sort not in (None, "session"):
        raise SessionTypeError(
            "sort-mismatch", f"session variable {var} also used as {slot.sort} data"
        )
    if not compatible(got, want, ctx.decls):
        raise SessionTypeError(
            "duality-mismatch",
            f"{who} body uses {var} at {got}, declared protocol requires {want}",
        )
    return delta


def _synth(p: Process, venv: dict, ctx: _Ctx) -> dict:
    if isinstance(p, Inact):
        return {}
    if isinstance(p, Request):
        proto = _shared_proto(p.u, venv, ctx)
        inner = dict(venv)
        inner[p.var] = _Slot()
        delta = _synth(p.body, inner, ctx)
        return _close_session_var(delta, p.var, dual(proto), inner, ctx, "request")
    if isinstance(p, Accept):
        proto = _shared_proto(p.u, venv, ctx)
        inner = dict(venv)
        inner[p.var] = _Slot()
        delta = _synth(p.body, inner, ctx)
        return _close_session_var(delta, p.var, proto, inner, ctx, "accept")
    if isinstance(p, Send):
        delta = _synth(p.body, venv, ctx)
        sort = _expr_sort(p.expr, venv, ctx.decls, ctx.delta0, ctx.used_annotations)
        if isinstance(sort, (End, Out, In, Choose, Offer, RecT, TVar)):
            payload = sort  # delegation; the endpoint leaves the sender
            if isinstance(p.expr, Lit) and p.expr.value in delta:
                raise SessionTypeError(
                    "linearity-violation",
                    f"endpoint {p.expr.value!r} used after being delegated",
                )
        elif sort is None:
            payload = ANY
        elif isinstance(sort, SharedSort):
            payload = sort
        else:
            payload = SortRef(sort)
        key = _key_of(p.k)
        delta = dict(delta)
        delta[key] = Out(payload, delta.get(key, END))
        return delta
    if isinstance(p, Receive):
        inner = dict(venv)
        inner[p.var] = _Slot()
        delta = _synth(p.body, inner, ctx)
        if p.var in delta:  # the variable was used as a session: delegation receive
            if inner[p.var].sort not in (None, "session"):
                raise SessionTypeError(
                    "sort-mismatch", f"variable {p.var} used both as data and as a session"
                )
            payload = delta.pop(p.var)
        else:
            payload = inner[p.var].payload()
        key = _key_of(p.k)
        delta = dict(delta)
        delta[key] = In(payload, delta.get(key, END))
        return delta
    if isinstance(p, Select):
        delta = dict(_synth(p.body, venv, ctx))
        key = _key_of(p.k)
        delta[key] = Choose(((p.label, delta.get(key, END)),))
        return delta
    if isinstance(p, Branch):
        key = _key_of(p.k)
        arms = []
        rest = None
        for label, q in p.branches:
            d = _synth(q, venv, ctx)
            arms.append((label, d.pop(key, END)))
            rest = d if rest is None else _merge_deltas(rest, d, ctx.decls)
        rest = rest if rest is not None else {}
        rest[key] = Offer(tuple(arms))
        return rest
    if isinstance(p, If):
        sort = _expr_sort(p.cond, venv, ctx.decls, ctx.delta0, ctx.used_annotations)
        if sort not in (None, "bool"):
            raise SessionTypeError("sort-mismatch", f"condition has sort {sort}, expected bool")
        for v in (p.cond,):
            if isinstance(v, VarE):
                venv[v.name].constrain("bool", v.name)
        d1 = _synth(p.then, venv, ctx)
        d2 = _synth(p.els, venv, ctx)
        return _merge_deltas(d1, d2, ctx.decls)
    if isinstance(p, Par):
        d1 = _synth(p.left, venv, ctx)
        d2 = _synth(p.right, venv, ctx)
        return compose(d1, d2, kind="linearity-violation")
    if isinstance(p, New):
        delta = dict(_synth(p.body, venv, ctx))
        if p.chan.kind == SESSION:
            plus = delta.pop(Endpoint(p.chan, True), END)
            minus = delta.pop(Endpoint(p.chan, False), END)
            if not compatible(plus, dual(minus), ctx.decls):
                raise SessionTypeError(
                    "duality-mismatch",
                    f"endpoints of {p.chan.id} follow non-dual protocols {plus} and {minus}",
                )
        return delta
    if isinstance(p, Rec):
        delta = _synth(p.body, venv, ctx)
        open_entries = {k: t for k, t in delta.items() if not isinstance(_unfold(t), End)}
        if open_entries:
            k = sorted(str(x) for x in open_entries)[0]
            raise SessionTypeError(
                "linearity-violation",
                f"endpoint {k} is still open across the recursion {p.var}",
            )
        return delta
    if isinstance(p, ProcVar):
        return {}
    raise TypeError(f"not a process: {p!r}")


def typecheck_process(
    p: Process, decls: TypeDecls | None = None, delta0: dict | None = None
) -> Typing:
    """Synthesise the session typing of p's free endpoints.

    Raises SessionTypeError on the first violation. When `delta0`
    annotates free endpoints, the synthesised usage is checked against it.
    """
    decls = decls or TypeDecls()
    ctx = _Ctx(decls, delta0)
    delta = _synth(p, {}, ctx)
    for key, want in (delta0 or {}).items():
        if key in ctx.used_annotations:
            continue
        got = delta.get(key, END)
        if not compatible(got, want, decls):
            raise SessionTypeError(
                "duality-mismatch", f"free endpoint {key!r} used at {got}, annotated {want}"
            )
    return Typing(delta=delta)


# ---------------------------------------------------------------------------
# Restricted-class check and configuration typing


def _uses_var_as_session(p: Process, var: str) -> bool:
    if isinstance(p, (Request, Accept)):
        return p.var != var and _uses_var_as_session(p.body, var)
    if isinstance(p, (Send, Select)):
        return p.k == var or _uses_var_as_session(p.body, var)
    if isinstance(p, Receive):
        if p.k == var:
            return True
        return p.var != var and _uses_var_as_session(p.body, var)
    if isinstance(p, Branch):
        return p.k == var or any(_uses_var_as_session(q, var) for _, q in p.branches)
    if isinstance(p, If):
        return _uses_var_as_session(p.then, var) or _uses_var_as_session(p.els, var)
    if isinstance(p, Par):
        return _uses_var_as_session(p.left, var) or _uses_var_as_session(p.right, var)
    if isinstance(p, (New, Rec)):
        return _uses_var_as_session(p.body, var)
    return False


def _expr_has_endpoint(e) -> bool:
    if isinstance(e, Lit):
        return isinstance(e.value, Endpoint)
    if isinstance(e, OpE):
        return any(_expr_has_endpoint(a) for a in e.args)
    return False


def _has_delegation(p: Process) -> bool:
    if isinstance(p, Send):
        if _expr_has_endpoint(p.expr):
            return True
        if isinstance(p.expr, VarE):
            pass  # a bare variable payload is data unless bound as a session
        return _has_delegation(p.body)
    if isinstance(p, Receive):
        if _uses_var_as_session(p.body, p.var):
            return True
        return _has_delegation(p.body)
    if isinstance(p, (Request, Accept, Select)):
        return _has_delegation(p.body)
    if isinstance(p, Branch):
        return any(_has_delegation(q) for _, q in p.branches)
    if isinstance(p, If):
        return _has_delegation(p.then) or _has_delegation(p.els)
    if isinstance(p, Par):
        return _has_delegation(p.left) or _has_delegation(p.right)
    if isinstance(p, (New, Rec)):
        return _has_delegation(p.body)
    return False


def _free_endpoints(p: Process) -> set:
    out = set()

    def go(q):
        if isinstance(q, (Send, Receive, Select, Branch)) and isinstance(q.k, Endpoint):
            out.add(q.k)
        for child in _children(q):
            go(child)

    go(p)
    return out


def _children(p):
    if isinstance(p, (Request, Accept, Send, Receive, Select, New, Rec)):
        return (p.body,)
    if isinstance(p, Branch):
        return tuple(q for _, q in p.branches)
    if isinstance(p, If):
        return (p.then, p.els)
    if isinstance(p, Par):
        return (p.left, p.right)
    return ()


def _event_sessions(m: Memory) -> set:
    if isinstance(m, ActionMem):
        ev = m.event
        if isinstance(ev, InitEv):
            return {ev.s}
        return {ev.k.chan}
    if isinstance(m, ChoiceMem):
        out = set()
        for q in mem_processes(m):
            out |= {ep.chan for ep in _free_endpoints(q)}
        return out
    return set()


def check_restricted_class(cfg: Configuration):
    """Return None when the configuration is in the restricted class,
    otherwise an OutOfClass value naming the first violation."""
    produced = set()
    for m in cfg.memories:
        produced.update(m.produced)
    for th in cfg.threads:
        if _has_delegation(th.proc):
            return OutOfClass(f"thread {th.tag.id} performs delegation")
        if th.tag not in produced:
            if isinstance(th.proc, (If, Rec, Par)):
                return OutOfClass(
                    f"original thread {th.tag.id} has a top-level "
                    f"{type(th.proc).__name__.lower()}"
                )
            if _free_endpoints(th.proc):
                return OutOfClass(f"original thread {th.tag.id} mentions an open session")
    for m in cfg.memories:
        for q in mem_processes(m):
            if _has_delegation(q):
                return OutOfClass("a memory stores a delegating process")
        if isinstance(m, (ChoiceMem, ForkMem)) and m.consumed[0] not in produced:
            kind = "conditional" if isinstance(m, ChoiceMem) else "fork"
            return OutOfClass(f"top-level {kind} memory on original thread {m.consumed[0].id}")
    return None


def _memory_delta(m: Memory, inits_present: set, ctx: _Ctx) -> dict:
    if isinstance(m, ForkMem):
        return {}
    if isinstance(m, ActionMem) and isinstance(m.event, InitEv):
        ev = m.event
        # the stored synchronisation pair must fit the declared shared type
        d = _synth(Request(ev.a, ev.x, ev.p1), {}, ctx)
        d = compose(d, _synth(Accept(ev.a, ev.y, ev.p2), {}, ctx))
        return d
    sessions = _event_sessions(m)
    if sessions <= inits_present:
        return {}
    # no initiation memory covers this one: type the stored term literally
    if isinstance(m, ActionMem) and isinstance(m.event, ComEv):
        ev = m.event
        term = Par(Send(ev.k, ev.expr, ev.p), Receive(ev.k.dual(), ev.x, ev.q))
    elif isinstance(m, ActionMem) and isinstance(m.event, SelEv):
        ev = m.event
        term = Par(Select(ev.k, ev.label, ev.p), Branch(ev.k.dual(), ev.branches))
    else:
        ev = m.event
        term = If(ev.cond, ev.then, ev.els)
    return _synth(term, {}, ctx)


def typecheck_config(cfg: Configuration, decls: TypeDecls | None = None, delta0=None):
    """Type a memory-carrying configuration of the restricted class.

    Returns a Typing or an OutOfClass value; raises SessionTypeError when
    the configuration is in class but ill-typed.
    """
    decls = decls or TypeDecls()
    out = check_restricted_class(cfg)
    if out is not None:
        return out
    ctx = _Ctx(decls, delta0)
    inits_present = {
        m.event.s
        for m in cfg.memories
        if isinstance(m, ActionMem) and isinstance(m.event, InitEv)
    }
    delta: dict = {}
    for th in cfg.threads:
        delta = compose(delta, _synth(th.proc, {}, ctx), location=th.tag.id)
    for m in cfg.memories:
        delta = compose(delta, _memory_delta(m, inits_present, ctx))
    for name in cfg.names:
        if name.kind != SESSION:
            continue
        plus = delta.pop(Endpoint(name, True), END)
        minus = delta.pop(Endpoint(name, False), END)
        if not compatible(plus, dual(minus), decls):
            raise SessionTypeError(
                "duality-mismatch",
                f"endpoints of {name.id} follow non-dual protocols {plus} and {minus}",
            )
    return Typing(delta=delta)


def naive_typecheck_config(cfg: Configuration, decls: TypeDecls | None = None) -> bool:
    """Check the erased process plus each memory's stored term in
    isolation. Kept as a regression witness: it wrongly accepts stray
    communication memories that clash with live threads."""
    decls = decls or TypeDecls()
    try:
        typecheck_process(forgetful_map(cfg), decls)
        ctx = _Ctx(decls, None)
        for m in cfg.memories:
            if isinstance(m, ForkMem):
                continue
            if isinstance(m, ActionMem) and isinstance(m.event, InitEv):
                ev = m.event
                _synth(Par(Request(ev.a, ev.x, ev.p1), Accept(ev.a, ev.y, ev.p2)), {}, ctx)
            elif isinstance(m, ActionMem) and isinstance(m.event, ComEv):
                ev = m.event
                _synth(Par(Send(ev.k, ev.expr, ev.p), Receive(ev.k.dual(), ev.x, ev.q)), {}, ctx)
            elif isinstance(m, ActionMem) and isinstance(m.event, SelEv):
                ev = m.event
                _synth(Par(Select(ev.k, ev.label, ev.p), Branch(ev.k.dual(), ev.branches)), {}, ctx)
            else:
                _synth(If(m.event.cond, m.event.then, m.event.els), {}, ctx)
        return True
    except SessionTypeError:
        return False


def typing_oracle(cfg: Configuration, decls: TypeDecls | None = None):
    """Roll the configuration back to its origin and type the erased
    origin process. An independent cross-check for typecheck_config on
    engine-reachable in-class configurations."""
    from .reduction import enumerate_backward, apply_backward
    from .config import supply_for

    decls = decls or TypeDecls()
    cur = cfg
    supply = supply_for(cfg)
    while True:
        redexes = enumerate_backward(cur)
        if not redexes:
            break
        cur, _ = apply_backward(cur, redexes[0], supply)
    try:
        typecheck_process(forgetful_map(cur), decls)
        return "well-typed"
    except SessionTypeError as e:
        return e.kind


def config_verdict(cfg: Configuration, decls: TypeDecls | None = None) -> str:
    res = None
    try:
        res = typecheck_config(cfg, decls)
    except SessionTypeError as e:
        return e.kind
    return "out-of-class" if isinstance(res, OutOfClass) else "well-typed"
