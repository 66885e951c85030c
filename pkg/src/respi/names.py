"""Names, session endpoints and the fresh-name supply.

Three kinds of names exist: shared channels (where sessions are requested
and accepted), session channels (private to one session, with two dual
endpoints), and tags (unique thread identifiers).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

SHARED = "shared"
SESSION = "session"
TAG = "tag"

_KINDS = (SHARED, SESSION, TAG)


@dataclass(frozen=True, order=True)
class Name:
    kind: str
    id: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown name kind {self.kind!r}")

    def __repr__(self):
        return f"{self.kind[0]}#{self.id}"


@dataclass(frozen=True, order=True)
class Endpoint:
    """One side of a session channel. The requester ends up with the
    minus endpoint, the accepter with the plus one."""

    chan: Name
    plus: bool = True

    def __post_init__(self):
        if self.chan.kind != SESSION:
            raise ValueError("endpoint over a non-session name")

    def dual(self) -> "Endpoint":
        return Endpoint(self.chan, not self.plus)

    def __repr__(self):
        return ("" if self.plus else "~") + self.chan.id


def shared(ident: str) -> Name:
    return Name(SHARED, ident)


def session(ident: str) -> Name:
    return Name(SESSION, ident)


def tag(ident: str) -> Name:
    return Name(TAG, ident)


def endpoint(ident: str, plus: bool = True) -> Endpoint:
    return Endpoint(session(ident), plus)


_NUM_SUFFIX = re.compile(r"^([a-z]+)(\d+)$")


@dataclass
class NameSupply:
    """Monotonic generator of fresh tags and session channels.

    Never hands out the same id twice. Two supplies built with the same
    seed yield identical sequences; different seeds yield disjoint draws
    for the first steps, which the alpha-equality tests rely on.
    """

    seed: int = 0
    _tag_n: int = field(init=False)
    _ses_n: int = field(init=False)

    def __post_init__(self):
        self._tag_n = self.seed
        self._ses_n = self.seed

    def fresh_tag(self) -> Name:
        self._tag_n += 1
        return Name(TAG, f"t{self._tag_n}")

    def fresh_session(self) -> Name:
        self._ses_n += 1
        return Name(SESSION, f"s{self._ses_n}")

    def ensure_above(self, names) -> "NameSupply":
        """Bump counters past any t<n>/s<n> ids occurring in `names`."""
        for n in names:
            m = _NUM_SUFFIX.match(n.id)
            if not m:
                continue
            stem, num = m.group(1), int(m.group(2))
            if n.kind == TAG and stem == "t":
                self._tag_n = max(self._tag_n, num)
            elif n.kind == SESSION and stem == "s":
                self._ses_n = max(self._ses_n, num)
        return self

    def clone(self) -> "NameSupply":
        c = NameSupply(self.seed)
        c._tag_n = self._tag_n
        c._ses_n = self._ses_n
        return c
