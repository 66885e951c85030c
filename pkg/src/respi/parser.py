"""Recursive-descent parser for the textual syntax (.respi and .styp files).

Identifier kinds are resolved as follows: identifiers bound by req/acc/?()
binders are variables; "t<digits>" in configuration literals are tags; an
identifier used anywhere under "~" or in a session-operator position is a
session channel; everything else is a shared channel. Process literals may
not name tags.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .names import Endpoint, Name, SESSION, SHARED, TAG, session, shared, tag
from .syntax import (
    Accept,
    Branch,
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
)
from .config import (
    ActionMem,
    ChoiceEv,
    ChoiceMem,
    ComEv,
    Configuration,
    ForkMem,
    InitEv,
    SelEv,
    Thread,
    _rename_memory,
)
from .syntax import rename_channel
from . import types as _ty

KEYWORDS = {
    "req", "acc", "if", "then", "else", "new", "in", "rec",
    "true", "false", "not", "and", "or", "nil",
}

_TAG_RE = re.compile(r"^t\d+$")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUM_RE = re.compile(r"\d+")

_PUNCT = [
    "==", "<=", "<|", "|>", "->", "~",
    "(", ")", "{", "}", "[", "]", "<", ">",
    ",", ":", ".", "|", "!", "?", "+", "-", "*", "&", "=",
]


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str, expected: frozenset = frozenset()):
        if not message:
            raise ValueError("empty parse error message")
        super().__init__(f"{span.line}:{span.column}: {message}")
        self.span = span
        self.message = message
        self.expected = expected


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | punct | eof
    text: str
    start: int
    end: int
    line: int
    column: int


def tokenize(text: str, file: str) -> list:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            toks.append(Token("ident", m.group(), i, m.end(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _NUM_RE.match(text, i)
        if m:
            toks.append(Token("num", m.group(), i, m.end(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, i, i + len(p), line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(
                SourceSpan(file, i, i + 1, line, col), f"unexpected character {c!r}"
            )
    toks.append(Token("eof", "", n, n, line, col))
    return toks


def _session_evidence(toks) -> set:
    """Base identifiers that must denote session channels: used under "~"
    or as the subject of a session operator."""
    out = set()
    for i, t in enumerate(toks):
        if t.kind != "ident" or t.text in KEYWORDS:
            continue
        if i > 0 and toks[i - 1].kind == "punct" and toks[i - 1].text == "~":
            out.add(t.text)
        nxt = toks[i + 1] if i + 1 < len(toks) else None
        if nxt and nxt.kind == "punct" and nxt.text in ("!", "?", "<|", "|>"):
            out.add(t.text)
    return out


def _rec_guarded(body, var: str) -> bool:
    """A recursion variable may not sit on a parallel spine (nothing but
    parallels, restrictions and other recs above it)."""
    if isinstance(body, ProcVar):
        return body.name != var
    if isinstance(body, Par):
        return _rec_guarded(body.left, var) and _rec_guarded(body.right, var)
    if isinstance(body, New):
        return _rec_guarded(body.body, var)
    if isinstance(body, Rec):
        return body.var == var or _rec_guarded(body.body, var)
    return True


# configuration parse tree, flattened after scoping is resolved
@dataclass
class _CThread:
    tag: Name
    proc: Process


@dataclass
class _CMem:
    mem: object


@dataclass
class _CPar:
    items: list


@dataclass
class _CRes:
    names: list
    body: object


@dataclass
class _CNil:
    pass


class _Parser:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.toks = tokenize(text, file)
        self.evidence = _session_evidence(self.toks)
        self.pos = 0

    # -- token plumbing ------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.start, max(tok.start, tok.end), tok.line, tok.column)

    def fail(self, message: str, expected=()):
        raise ParseError(self.span(self.peek()), message, frozenset(expected))

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}", {text})
        return self.next()

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        if t.text in KEYWORDS:
            self.fail(f"keyword {t.text!r} cannot be used as {what}")
        return self.next().text

    def eof_check(self):
        t = self.peek()
        if t.kind != "eof":
            self.fail(f"unexpected trailing input {t.text!r}")

    # -- identifier resolution -----------------------------------------

    def _resolve_u(self, name: str, env: set):
        if name in env:
            return name
        if name in self.evidence:
            self.fail(f"{name!r} is used both as a shared and a session channel")
        return shared(name)

    def _resolve_k(self, name: str, tildes: int, env: set, tok: Token):
        if name in env:
            if tildes:
                raise ParseError(self.span(tok), f"cannot dualise variable {name!r}")
            return name
        return Endpoint(session(name), tildes % 2 == 0)

    def _resolve_expr_ident(self, name: str, tildes: int, env: set):
        if tildes:
            return Lit(Endpoint(session(name), tildes % 2 == 0))
        if name in env:
            return VarE(name)
        if name in self.evidence:
            return Lit(Endpoint(session(name), True))
        return Lit(shared(name))

    def _restriction_name(self, name: str, config_level: bool) -> Name:
        if _TAG_RE.match(name):
            if not config_level:
                self.fail("tags may only be named in configuration literals")
            return tag(name)
        return session(name) if name in self.evidence else shared(name)

    # -- expressions ----------------------------------------------------

    def parse_expr(self, env: set):
        return self._expr_or(env)

    def _expr_or(self, env):
        e = self._expr_and(env)
        while self.at("or"):
            self.next()
            e = OpE("or", (e, self._expr_and(env)))
        return e

    def _expr_and(self, env):
        e = self._expr_not(env)
        while self.at("and"):
            self.next()
            e = OpE("and", (e, self._expr_not(env)))
        return e

    def _expr_not(self, env):
        if self.at("not"):
            self.next()
            return OpE("not", (self._expr_not(env),))
        return self._expr_cmp(env)

    def _expr_cmp(self, env):
        e = self._expr_add(env)
        while self.peek().text in ("==", "<=", "<") and self.peek().kind == "punct":
            op = self.next().text
            e = OpE(op, (e, self._expr_add(env)))
        return e

    def _expr_add(self, env):
        e = self._expr_mul(env)
        while self.peek().kind == "punct" and self.peek().text in ("+", "-"):
            op = self.next().text
            e = OpE(op, (e, self._expr_mul(env)))
        return e

    def _expr_mul(self, env):
        e = self._expr_atom(env)
        while self.at("*"):
            self.next()
            e = OpE("*", (e, self._expr_atom(env)))
        return e

    def _expr_atom(self, env):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Lit(int(t.text))
        if t.text == "true":
            self.next()
            return Lit(True)
        if t.text == "false":
            self.next()
            return Lit(False)
        if t.text == "(":
            self.next()
            e = self.parse_expr(env)
            self.expect(")")
            return e
        if t.text == "~":
            tildes = 0
            while self.at("~"):
                self.next()
                tildes += 1
            return self._resolve_expr_ident(self.ident("channel"), tildes, env)
        if t.kind == "ident" and t.text not in KEYWORDS:
            return self._resolve_expr_ident(self.next().text, 0, env)
        self.fail(f"expected expression, found {t.text or 'end of input'!r}")

    # -- processes -------------------------------------------------------

    def parse_proc(self, env: set, bar_ok: bool) -> Process:
        p = self._proc_one(env, bar_ok)
        if bar_ok:
            while self.at("|"):
                self.next()
                p = Par(p, self._proc_one(env, bar_ok))
        return p

    def _proc_one(self, env: set, bar_ok: bool) -> Process:
        t = self.peek()
        if t.kind == "num":
            if t.text == "0":
                self.next()
                return NIL
            self.fail("a process literal cannot start with a number other than 0")
        if t.text == "(":
            self.next()
            p = self.parse_proc(env, bar_ok=True)
            self.expect(")")
            return p
        if t.text in ("req", "acc"):
            self.next()
            u = self._resolve_u(self.ident("channel"), env)
            self.expect("(")
            var = self.ident("variable")
            self.expect(")")
            self.expect(".")
            body = self.parse_proc(env | {var}, bar_ok=False)
            return (Request if t.text == "req" else Accept)(u, var, body)
        if t.text == "if":
            self.next()
            cond = self.parse_expr(env)
            self.expect("then")
            then = self.parse_proc(env, bar_ok=False)
            self.expect("else")
            els = self.parse_proc(env, bar_ok=False)
            return If(cond, then, els)
        if t.text == "new":
            self.next()
            names = [self._restriction_name(self.ident("channel"), config_level=False)]
            while self.at(","):
                self.next()
                names.append(self._restriction_name(self.ident("channel"), config_level=False))
            self.expect("in")
            body = self.parse_proc(env, bar_ok=False)
            for n in reversed(names):
                body = New(n, body)
            return body
        if t.text == "rec":
            self.next()
            var = self.ident("process variable")
            self.expect(".")
            body = self.parse_proc(env, bar_ok=False)
            if not _rec_guarded(body, var):
                raise ParseError(
                    self.span(t),
                    f"unguarded recursion: {var} occurs on a parallel spine",
                )
            return Rec(var, body)
        if t.text == "~" or (t.kind == "ident" and t.text not in KEYWORDS):
            tildes = 0
            while self.at("~"):
                self.next()
                tildes += 1
            name_tok = self.peek()
            name = self.ident("channel or process variable")
            follower = self.peek().text if self.peek().kind == "punct" else None
            if follower in ("!", "?", "<|", "|>"):
                k = self._resolve_k(name, tildes, env, name_tok)
                return self._session_prefix(k, env)
            if tildes:
                raise ParseError(self.span(name_tok), f"dualised name {name!r} must be used in a session prefix")
            return ProcVar(name)
        self.fail(f"expected a process, found {t.text or 'end of input'!r}")

    def _session_prefix(self, k, env: set) -> Process:
        t = self.next()
        if t.text == "!":
            self.expect("<")
            e = self.parse_expr(env)
            self.expect(">")
            self.expect(".")
            return Send(k, e, self.parse_proc(env, bar_ok=False))
        if t.text == "?":
            self.expect("(")
            var = self.ident("variable")
            self.expect(")")
            self.expect(".")
            return Receive(k, var, self.parse_proc(env | {var}, bar_ok=False))
        if t.text == "<|":
            label = self.ident("label")
            self.expect(".")
            return Select(k, label, self.parse_proc(env, bar_ok=False))
        # |>
        self.expect("{")
        arms = [self._branch_arm(env)]
        labels = {arms[0][0]}
        while self.at(","):
            self.next()
            arm = self._branch_arm(env)
            if arm[0] in labels:
                self.fail(f"duplicate branch label {arm[0]!r}")
            labels.add(arm[0])
            arms.append(arm)
        self.expect("}")
        return Branch(k, tuple(arms))

    def _branch_arm(self, env: set):
        label = self.ident("label")
        self.expect(":")
        return (label, self.parse_proc(env, bar_ok=False))

    # -- configurations ---------------------------------------------------

    def parse_config_tree(self):
        items = [self._config_item()]
        while self.at("|"):
            self.next()
            items.append(self._config_item())
        return _CPar(items) if len(items) > 1 else items[0]

    def _config_item(self):
        t = self.peek()
        if t.text == "nil":
            self.next()
            return _CNil()
        if t.text == "(":
            self.next()
            inner = self.parse_config_tree()
            self.expect(")")
            return inner
        if t.text == "new":
            self.next()
            names = [self._restriction_name(self.ident("name"), config_level=True)]
            while self.at(","):
                self.next()
                names.append(self._restriction_name(self.ident("name"), config_level=True))
            self.expect("in")
            return _CRes(names, self.parse_config_tree())
        if t.text == "[":
            return _CMem(self._memory())
        if t.kind == "ident" and _TAG_RE.match(t.text):
            tag_tok = self.next()
            self.expect(":")
            proc = self.parse_proc(set(), bar_ok=False)
            return _CThread(tag(tag_tok.text), proc)
        self.fail(f"expected a configuration item, found {t.text or 'end of input'!r}")

    def _tag(self) -> Name:
        t = self.peek()
        if t.kind != "ident" or not _TAG_RE.match(t.text):
            self.fail("expected a tag (t followed by digits)")
        return tag(self.next().text)

    def _memory(self):
        self.expect("[")
        kw = self.peek()
        if kw.text == "act":
            self.next()
            c1 = self._tag()
            self.expect(",")
            c2 = self._tag()
            self.expect("->")
            p1 = self._tag()
            self.expect(",")
            p2 = self._tag()
            self.expect(":")
            ev = self._action_event()
            self.expect("]")
            return ActionMem((c1, c2), ev, (p1, p2))
        if kw.text == "cho":
            self.next()
            c = self._tag()
            self.expect("->")
            p = self._tag()
            self.expect(":")
            self.expect("if")
            cond = self.parse_expr(set())
            self.expect("then")
            then = self.parse_proc(set(), bar_ok=False)
            self.expect("else")
            els = self.parse_proc(set(), bar_ok=False)
            self.expect("]")
            return ChoiceMem((c,), ChoiceEv(cond, then, els), (p,))
        if kw.text == "fork":
            self.next()
            c = self._tag()
            self.expect("->")
            p1 = self._tag()
            self.expect(",")
            p2 = self._tag()
            self.expect("]")
            return ForkMem((c,), (p1, p2))
        self.fail("expected a memory kind: act, cho or fork")

    def _action_event(self):
        kw = self.peek()
        if kw.text == "init":
            self.next()
            self.expect("(")
            a = shared(self.ident("shared channel"))
            self.expect(",")
            x = self.ident("variable")
            self.expect(",")
            y = self.ident("variable")
            self.expect(",")
            p1 = self.parse_proc({x}, bar_ok=False)
            self.expect(",")
            p2 = self.parse_proc({y}, bar_ok=False)
            self.expect(",")
            s = session(self.ident("session channel"))
            self.expect(")")
            return InitEv(a, x, y, p1, p2, s)
        if kw.text == "com":
            self.next()
            self.expect("(")
            k = self._event_endpoint()
            self.expect(",")
            e = self.parse_expr(set())
            self.expect(",")
            x = self.ident("variable")
            self.expect(",")
            p = self.parse_proc(set(), bar_ok=False)
            self.expect(",")
            q = self.parse_proc({x}, bar_ok=False)
            self.expect(")")
            return ComEv(k, e, x, p, q)
        if kw.text == "sel":
            self.next()
            self.expect("(")
            k = self._event_endpoint()
            self.expect(",")
            label = self.ident("label")
            self.expect(",")
            p = self.parse_proc(set(), bar_ok=False)
            self.expect(",")
            self.expect("{")
            arms = [self._branch_arm(set())]
            while self.at(","):
                self.next()
                arms.append(self._branch_arm(set()))
            self.expect("}")
            self.expect(")")
            return SelEv(k, label, p, tuple(arms))
        self.fail("expected an event: init, com or sel")

    def _event_endpoint(self) -> Endpoint:
        tildes = 0
        while self.at("~"):
            self.next()
            tildes += 1
        return Endpoint(session(self.ident("session channel")), tildes % 2 == 0)

    # -- session types ------------------------------------------------------

    def parse_session_type(self, recvars: set):
        t = self.peek()
        if t.text == "end":
            self.next()
            return _ty.End()
        if t.text == "!":
            self.next()
            payload = self._payload(recvars)
            self.expect(".")
            return _ty.Out(payload, self.parse_session_type(recvars))
        if t.text == "?":
            self.next()
            payload = self._payload(recvars)
            self.expect(".")
            return _ty.In(payload, self.parse_session_type(recvars))
        if t.text in ("+", "&"):
            ctor = _ty.Choose if t.text == "+" else _ty.Offer
            self.next()
            self.expect("{")
            arms = [self._type_arm(recvars)]
            labels = {arms[0][0]}
            while self.at(","):
                self.next()
                arm = self._type_arm(recvars)
                if arm[0] in labels:
                    self.fail(f"duplicate label {arm[0]!r}")
                labels.add(arm[0])
                arms.append(arm)
            self.expect("}")
            return ctor(tuple(arms))
        if t.text == "rec":
            self.next()
            var = self.ident("type variable")
            self.expect(".")
            return _ty.RecT(var, self.parse_session_type(recvars | {var}))
        if t.text == "(":
            self.next()
            s = self.parse_session_type(recvars)
            self.expect(")")
            return s
        if t.kind == "ident" and t.text in recvars:
            return _ty.TVar(self.next().text)
        self.fail(f"expected a session type, found {t.text or 'end of input'!r}")

    def _type_arm(self, recvars):
        label = self.ident("label")
        self.expect(":")
        return (label, self.parse_session_type(recvars))

    def _payload(self, recvars: set):
        if self.at("("):
            self.next()
            p = self._payload_inner(recvars)
            self.expect(")")
            return p
        return self._payload_inner(recvars)

    def _payload_inner(self, recvars: set):
        t = self.peek()
        if t.text == "<":
            self.next()
            s = self.parse_session_type(recvars)
            self.expect(">")
            return _ty.SharedSort(s)
        if t.text in ("!", "?", "+", "&", "end", "rec") or (
            t.kind == "ident" and t.text in recvars
        ):
            return self.parse_session_type(recvars)
        if t.text == "(":
            self.next()
            p = self._payload_inner(recvars)
            self.expect(")")
            return p
        name = self.ident("sort")
        return _ty.SortRef(name)

    def parse_typedecls(self):
        sorts = {}
        chans = {}
        endpoints = {}
        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "sort":
                self.next()
                name = self.ident("sort name")
                self.expect("=")
                base = self.peek()
                if base.text not in ("nat", "bool"):
                    self.fail("sort base must be nat or bool")
                self.next()
                sorts[name] = base.text
            elif t.text == "chan":
                self.next()
                name = self.ident("channel")
                self.expect(":")
                self.expect("<")
                proto = self.parse_session_type(set())
                self.expect(">")
                chans[shared(name)] = proto
            elif t.text == "endpoint":
                self.next()
                tildes = 0
                while self.at("~"):
                    self.next()
                    tildes += 1
                name = self.ident("session channel")
                self.expect(":")
                endpoints[Endpoint(session(name), tildes % 2 == 0)] = self.parse_session_type(set())
            else:
                self.fail("expected a declaration: sort, chan or endpoint")
        return _ty.TypeDecls(sorts=sorts, chans=chans, endpoints=endpoints)


# ---------------------------------------------------------------------------
# Flattening a configuration parse tree


def _rename_ctree(node, old: Name, new: Name):
    if isinstance(node, _CThread):
        t = new if node.tag == old else node.tag
        p = node.proc if old.kind == TAG else rename_channel(node.proc, old, new)
        return _CThread(t, p)
    if isinstance(node, _CMem):
        return _CMem(_rename_memory(node.mem, old, new))
    if isinstance(node, _CPar):
        return _CPar([_rename_ctree(i, old, new) for i in node.items])
    if isinstance(node, _CRes):
        if old in node.names:
            return node  # shadowed
        return _CRes(node.names, _rename_ctree(node.body, old, new))
    return node


def _freshen_binder(name: Name, used: set) -> Name:
    if name.kind == TAG:
        nums = [int(n.id[1:]) for n in used if n.kind == TAG and _TAG_RE.match(n.id)]
        return tag(f"t{max(nums, default=0) + 1}")
    n = 1
    while True:
        cand = Name(name.kind, f"{name.id}_{n}")
        if cand not in used:
            return cand
        n += 1


def _flatten_ctree(node, used: set, taken: set, out):
    if isinstance(node, _CNil):
        return
    if isinstance(node, _CThread):
        out["threads"].append(Thread(node.tag, node.proc))
        return
    if isinstance(node, _CMem):
        out["memories"].append(node.mem)
        return
    if isinstance(node, _CPar):
        for item in node.items:
            _flatten_ctree(item, used, taken, out)
        return
    if isinstance(node, _CRes):
        body = node.body
        resolved = []
        for n in node.names:
            if n in taken:
                fresh = _freshen_binder(n, used)
                used.add(fresh)
                body = _rename_ctree(body, n, fresh)
                n = fresh
            taken.add(n)
            resolved.append(n)
        out["names"].extend(resolved)
        _flatten_ctree(body, used, taken, out)
        return
    raise TypeError(node)


def _ctree_names(node, acc: set):
    if isinstance(node, _CThread):
        acc.add(node.tag)
        from .syntax import free_names

        acc |= free_names(node.proc)
    elif isinstance(node, _CMem):
        from .config import mem_channel_names, mem_tags

        acc |= mem_tags(node.mem) | mem_channel_names(node.mem)
    elif isinstance(node, _CPar):
        for i in node.items:
            _ctree_names(i, acc)
    elif isinstance(node, _CRes):
        acc.update(node.names)
        _ctree_names(node.body, acc)
    return acc


# ---------------------------------------------------------------------------
# Public entry points


def parse_process(text: str, file: str = "<input>") -> Process:
    p = _Parser(text, file)
    proc = p.parse_proc(set(), bar_ok=True)
    p.eof_check()
    return proc


def parse_configuration(text: str, file: str = "<input>") -> Configuration:
    p = _Parser(text, file)
    tree = p.parse_config_tree()
    p.eof_check()
    used = _ctree_names(tree, set())
    out = {"names": [], "threads": [], "memories": []}
    _flatten_ctree(tree, used, set(), out)
    tags_seen = set()
    for th in out["threads"]:
        if th.tag in tags_seen:
            raise ParseError(
                SourceSpan(file, 0, len(text), 1, 1), f"duplicate tag {th.tag.id}"
            )
        tags_seen.add(th.tag)
    produced = set()
    for m in out["memories"]:
        for t in m.produced:
            if t in produced:
                raise ParseError(
                    SourceSpan(file, 0, len(text), 1, 1),
                    f"tag {t.id} produced by two memories",
                )
            produced.add(t)
    return Configuration.make(out["names"], out["threads"], out["memories"])


def parse_session_type(text: str, file: str = "<types>"):
    p = _Parser(text, file)
    s = p.parse_session_type(set())
    p.eof_check()
    return s


def parse_typedecls(text: str, file: str = "<types>"):
    p = _Parser(text, file)
    return p.parse_typedecls()


def parse_program(text: str, file: str = "<input>") -> Configuration:
    """Parse a configuration; a bare process becomes a single tagged thread."""
    try:
        return parse_configuration(text, file)
    except ParseError as config_err:
        try:
            proc = parse_process(text, file)
        except ParseError:
            raise config_err
        return Configuration.make([], [Thread(tag("t1"), proc)], [])
