"""Process, expression and value ASTs, substitution and expression evaluation.

Values are plain Python data: bool, int (naturals), Name (a shared
channel) or Endpoint. Variables are plain strings. All AST nodes are
immutable, so terms can be shared freely and used as dict keys.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .names import Endpoint, Name, SESSION, SHARED

Value = Union[bool, int, Name, Endpoint]

# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Lit:
    value: Value

    # bool and int literals must not collide (True == 1 in Python).
    def __eq__(self, other):
        return (
            isinstance(other, Lit)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __hash__(self):
        return hash((Lit, type(self.value).__name__, self.value))


@dataclass(frozen=True)
class VarE:
    name: str


@dataclass(frozen=True)
class OpE:
    op: str
    args: tuple

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.args) != OPS[self.op][0]:
            raise ValueError(f"operator {self.op!r} expects {OPS[self.op][0]} arguments")


Expr = Union[Lit, VarE, OpE]


class EvalError(Exception):
    pass


def _nat(v, op):
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"operator {op!r} expects a natural number, got {v!r}")
    return v


def _bool(v, op):
    if not isinstance(v, bool):
        raise EvalError(f"operator {op!r} expects a boolean, got {v!r}")
    return v


def _eq(a, b):
    if isinstance(a, bool) != isinstance(b, bool) or type(a) is not type(b):
        raise EvalError(f"cannot compare {a!r} with {b!r}")
    return a == b


# arity, implementation; subtraction truncates at zero since values are naturals
OPS = {
    "+": (2, lambda a, b: _nat(a, "+") + _nat(b, "+")),
    "-": (2, lambda a, b: max(0, _nat(a, "-") - _nat(b, "-"))),
    "*": (2, lambda a, b: _nat(a, "*") * _nat(b, "*")),
    "==": (2, _eq),
    "<=": (2, lambda a, b: _nat(a, "<=") <= _nat(b, "<=")),
    "<": (2, lambda a, b: _nat(a, "<") < _nat(b, "<")),
    "not": (1, lambda a: not _bool(a, "not")),
    "and": (2, lambda a, b: _bool(a, "and") and _bool(b, "and")),
    "or": (2, lambda a, b: _bool(a, "or") or _bool(b, "or")),
}


def eval_expr(e: Expr, env: dict | None = None) -> Value:
    """Evaluate a closed-under-env expression to a value."""
    env = env or {}
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, VarE):
        if e.name not in env:
            raise EvalError(f"unbound variable {e.name!r}")
        return env[e.name]
    if isinstance(e, OpE):
        args = [eval_expr(a, env) for a in e.args]
        return OPS[e.op][1](*args)
    raise EvalError(f"not an expression: {e!r}")


def expr_vars(e: Expr) -> set:
    if isinstance(e, VarE):
        return {e.name}
    if isinstance(e, OpE):
        out = set()
        for a in e.args:
            out |= expr_vars(a)
        return out
    return set()


def expr_names(e: Expr) -> set:
    if isinstance(e, Lit):
        if isinstance(e.value, Name):
            return {e.value}
        if isinstance(e.value, Endpoint):
            return {e.value.chan}
        return set()
    if isinstance(e, OpE):
        out = set()
        for a in e.args:
            out |= expr_names(a)
        return out
    return set()


# ---------------------------------------------------------------------------
# Processes
#
# Channel-ish positions hold either a resolved name or a string variable:
#   u (where sessions are requested/accepted): Name(shared) | str
#   k (session prefix subject): Endpoint | str


SharedId = Union[Name, str]
SessionId = Union[Endpoint, str]


@dataclass(frozen=True)
class Request:
    u: SharedId
    var: str
    body: "Process"


@dataclass(frozen=True)
class Accept:
    u: SharedId
    var: str
    body: "Process"


@dataclass(frozen=True)
class Send:
    k: SessionId
    expr: Expr
    body: "Process"


@dataclass(frozen=True)
class Receive:
    k: SessionId
    var: str
    body: "Process"


@dataclass(frozen=True)
class Select:
    k: SessionId
    label: str
    body: "Process"


@dataclass(frozen=True)
class Branch:
    k: SessionId
    branches: tuple  # ((label, Process), ...), labels pairwise distinct

    def __post_init__(self):
        labels = [l for l, _ in self.branches]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate branch labels")


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Process"
    els: "Process"


@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class New:
    chan: Name  # shared or session channel, never a tag
    body: "Process"


@dataclass(frozen=True)
class Rec:
    var: str
    body: "Process"


@dataclass(frozen=True)
class ProcVar:
    name: str


@dataclass(frozen=True)
class Inact:
    pass


Process = Union[
    Request, Accept, Send, Receive, Select, Branch, If, Par, New, Rec, ProcVar, Inact
]

NIL = Inact()


def _id_names(x) -> set:
    if isinstance(x, Name):
        return {x}
    if isinstance(x, Endpoint):
        return {x.chan}
    return set()


def free_names(p: Process) -> set:
    """Channel names (shared and session) occurring free in p."""
    if isinstance(p, (Request, Accept)):
        return _id_names(p.u) | free_names(p.body)
    if isinstance(p, Send):
        return _id_names(p.k) | expr_names(p.expr) | free_names(p.body)
    if isinstance(p, (Receive, Select)):
        return _id_names(p.k) | free_names(p.body)
    if isinstance(p, Branch):
        out = _id_names(p.k)
        for _, q in p.branches:
            out |= free_names(q)
        return out
    if isinstance(p, If):
        return expr_names(p.cond) | free_names(p.then) | free_names(p.els)
    if isinstance(p, Par):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, New):
        return free_names(p.body) - {p.chan}
    if isinstance(p, Rec):
        return free_names(p.body)
    return set()


def free_vars(p: Process) -> set:
    """Value variables occurring free in p."""

    def go(p, bound):
        if isinstance(p, (Request, Accept)):
            head = {p.u} if isinstance(p.u, str) and p.u not in bound else set()
            return head | go(p.body, bound | {p.var})
        if isinstance(p, Send):
            head = {p.k} if isinstance(p.k, str) and p.k not in bound else set()
            return head | (expr_vars(p.expr) - bound) | go(p.body, bound)
        if isinstance(p, Receive):
            head = {p.k} if isinstance(p.k, str) and p.k not in bound else set()
            return head | go(p.body, bound | {p.var})
        if isinstance(p, Select):
            head = {p.k} if isinstance(p.k, str) and p.k not in bound else set()
            return head | go(p.body, bound)
        if isinstance(p, Branch):
            out = {p.k} if isinstance(p.k, str) and p.k not in bound else set()
            for _, q in p.branches:
                out |= go(q, bound)
            return out
        if isinstance(p, If):
            return (expr_vars(p.cond) - bound) | go(p.then, bound) | go(p.els, bound)
        if isinstance(p, Par):
            return go(p.left, bound) | go(p.right, bound)
        if isinstance(p, (New, Rec)):
            return go(p.body, bound)
        return set()

    return go(p, set())


def is_closed(p: Process) -> bool:
    return not free_vars(p)


# ---------------------------------------------------------------------------
# Substitution


def _value_names(values) -> set:
    out = set()
    for v in values:
        out |= _id_names(v)
    return out


def _subst_id(x, sub):
    """Substitute into a u/k position; values must fit the position."""
    if not isinstance(x, str) or x not in sub:
        return x
    v = sub[x]
    if isinstance(v, (Name, Endpoint)):
        return v
    raise TypeError(f"cannot place value {v!r} in channel position")


def _subst_expr(e: Expr, sub) -> Expr:
    if isinstance(e, VarE):
        return Lit(sub[e.name]) if e.name in sub else e
    if isinstance(e, OpE):
        return OpE(e.op, tuple(_subst_expr(a, sub) for a in e.args))
    return e


def _freshen_chan(chan: Name, avoid: set) -> Name:
    n = 1
    while True:
        cand = Name(chan.kind, f"{chan.id}_{n}")
        if cand not in avoid:
            return cand
        n += 1


def substitute(p: Process, sub: dict) -> Process:
    """Capture-avoiding substitution of values for free variables of p.

    Variables not in the map are left untouched. Bound channels are
    renamed when a substituted value would otherwise be captured.
    """
    if not sub:
        return p
    if isinstance(p, (Request, Accept)):
        u = _subst_id(p.u, sub)
        inner = {k: v for k, v in sub.items() if k != p.var}
        body = substitute(p.body, inner)
        return type(p)(u, p.var, body)
    if isinstance(p, Send):
        return Send(_subst_id(p.k, sub), _subst_expr(p.expr, sub), substitute(p.body, sub))
    if isinstance(p, Receive):
        k = _subst_id(p.k, sub)
        inner = {k2: v for k2, v in sub.items() if k2 != p.var}
        return Receive(k, p.var, substitute(p.body, inner))
    if isinstance(p, Select):
        return Select(_subst_id(p.k, sub), p.label, substitute(p.body, sub))
    if isinstance(p, Branch):
        k = _subst_id(p.k, sub)
        return Branch(k, tuple((l, substitute(q, sub)) for l, q in p.branches))
    if isinstance(p, If):
        return If(_subst_expr(p.cond, sub), substitute(p.then, sub), substitute(p.els, sub))
    if isinstance(p, Par):
        return Par(substitute(p.left, sub), substitute(p.right, sub))
    if isinstance(p, New):
        live = {k: v for k, v in sub.items() if k in free_vars(p.body)}
        if not live:
            return p
        if p.chan in _value_names(live.values()):
            avoid = free_names(p.body) | _value_names(live.values())
            fresh = _freshen_chan(p.chan, avoid)
            body = rename_channel(p.body, p.chan, fresh)
            return New(fresh, substitute(body, live))
        return New(p.chan, substitute(p.body, live))
    if isinstance(p, Rec):
        return Rec(p.var, substitute(p.body, sub))
    return p


def rename_channel(p: Process, old: Name, new: Name):
    """Rename every free occurrence of channel `old` (and its endpoints)."""

    def ren_id(x):
        if isinstance(x, Name) and x == old:
            return new
        if isinstance(x, Endpoint) and x.chan == old:
            return Endpoint(new, x.plus)
        return x

    def ren_expr(e):
        if isinstance(e, Lit):
            v = ren_id(e.value) if isinstance(e.value, (Name, Endpoint)) else e.value
            return Lit(v)
        if isinstance(e, OpE):
            return OpE(e.op, tuple(ren_expr(a) for a in e.args))
        return e

    def go(p):
        if isinstance(p, (Request, Accept)):
            return type(p)(ren_id(p.u), p.var, go(p.body))
        if isinstance(p, Send):
            return Send(ren_id(p.k), ren_expr(p.expr), go(p.body))
        if isinstance(p, Receive):
            return Receive(ren_id(p.k), p.var, go(p.body))
        if isinstance(p, Select):
            return Select(ren_id(p.k), p.label, go(p.body))
        if isinstance(p, Branch):
            return Branch(ren_id(p.k), tuple((l, go(q)) for l, q in p.branches))
        if isinstance(p, If):
            return If(ren_expr(p.cond), go(p.then), go(p.els))
        if isinstance(p, Par):
            return Par(go(p.left), go(p.right))
        if isinstance(p, New):
            if p.chan == old:
                return p
            return New(p.chan, go(p.body))
        if isinstance(p, Rec):
            return Rec(p.var, go(p.body))
        return p

    return go(p)


def unfold_rec(p: Rec) -> Process:
    """One unfolding of a recursive process."""
    return subst_procvar(p.body, p.var, p)


def subst_procvar(p: Process, var: str, repl: Process) -> Process:
    if isinstance(p, ProcVar):
        return repl if p.name == var else p
    if isinstance(p, Rec):
        if p.var == var:
            return p
        return Rec(p.var, subst_procvar(p.body, var, repl))
    if isinstance(p, (Request, Accept)):
        return type(p)(p.u, p.var, subst_procvar(p.body, var, repl))
    if isinstance(p, Send):
        return Send(p.k, p.expr, subst_procvar(p.body, var, repl))
    if isinstance(p, Receive):
        return Receive(p.k, p.var, subst_procvar(p.body, var, repl))
    if isinstance(p, Select):
        return Select(p.k, p.label, subst_procvar(p.body, var, repl))
    if isinstance(p, Branch):
        return Branch(p.k, tuple((l, subst_procvar(q, var, repl)) for l, q in p.branches))
    if isinstance(p, If):
        return If(p.cond, subst_procvar(p.then, var, repl), subst_procvar(p.els, var, repl))
    if isinstance(p, Par):
        return Par(subst_procvar(p.left, var, repl), subst_procvar(p.right, var, repl))
    if isinstance(p, New):
        return New(p.chan, subst_procvar(p.body, var, repl))
    return p
