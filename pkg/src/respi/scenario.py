"""Bundled example programs: the client/providers quote negotiation and
the fixtures used by the property suites and the regression tests."""
from __future__ import annotations

from .config import Configuration, supply_for
from .parser import parse_configuration, parse_process, parse_typedecls
from .reduction import apply_forward, enumerate_forward

# A client asks one of two providers for a quote and accepts, negotiates
# or rejects it. Requests and quotes are encoded as naturals; provider 1
# answers 42 (accepted), provider 2 answers 500 (negotiable).
PROVIDERS_SOURCE = """\
-- client and two providers offering the same service
t1 : req a_login(x). x!<7>. x?(y_quote).
     if y_quote <= 100 then x <| l_acc. 0
     else (if y_quote <= 500 then x <| l_neg. 0 else x <| l_rej. 0)
| t2 : acc a_login(y). y?(z_req). y!<z_req + 35>.
       y |> { l_acc: 0, l_neg: 0, l_rej: 0 }
| t3 : acc a_login(y). y?(z_req). y!<z_req + 493>.
       y |> { l_acc: 0, l_neg: 0, l_rej: 0 }
"""

PROVIDERS_TYPES = """\
sort Request = nat
sort Quote = nat
chan a_login : < ?(Request). !(Quote). &{ l_acc: end, l_neg: end, l_rej: end } >
"""

# Two sessions on unrelated shared channels; their steps are concurrent.
TWO_SESSIONS_SOURCE = """\
t1 : req a(x). x!<1>. 0
| t2 : acc a(y). y?(u). 0
| t3 : req b(x2). x2!<2>. 0
| t4 : acc b(y2). y2?(v). 0
"""

TWO_SESSIONS_TYPES = """\
chan a : < ?(nat). end >
chan b : < ?(nat). end >
"""

# Ill-typed: one session serving two parallel requests.
PARALLEL_REQUESTS_SOURCE = """\
req a_login(x). ( x!<1>. 0 | x!<2>. 0 )
"""

# A stray communication memory beside live threads of the same session:
# consistent, but its backward step would duplicate the communication.
DELTA_DELTA_SOURCE = """\
new s, t1, t2 in
  ( t1 : ~s!<1>. 0 | t2 : s?(z). 0 | [act t8,t9 -> t1,t2 : com(~s, 1, z, 0, 0)] )
"""

# A choice memory whose continuation tag t5 exists nowhere.
BROKEN_CHOICE_SOURCE = """\
new t5 in ( t1 : 0 | [cho t4 -> t5 : if true then 0 else 0] )
"""


def providers_config() -> Configuration:
    return parse_configuration(PROVIDERS_SOURCE, "providers.respi")


def providers_decls():
    return parse_typedecls(PROVIDERS_TYPES, "providers.styp")


def two_sessions_config() -> Configuration:
    return parse_configuration(TWO_SESSIONS_SOURCE, "two_sessions.respi")


def two_sessions_decls():
    return parse_typedecls(TWO_SESSIONS_TYPES, "two_sessions.styp")


def parallel_requests_process():
    return parse_process(PARALLEL_REQUESTS_SOURCE, "parallel_requests.respi")


def delta_delta_config() -> Configuration:
    return parse_configuration(DELTA_DELTA_SOURCE, "delta_delta.respi")


def broken_choice_config() -> Configuration:
    return parse_configuration(BROKEN_CHOICE_SOURCE, "broken_choice.respi")


def _step_by_rule(cfg, supply, rule, tags=None):
    for r in enumerate_forward(cfg):
        if r.rule != rule:
            continue
        if tags is not None and tuple(t.id for t in r.tags) != tuple(tags):
            continue
        return apply_forward(cfg, r, supply)
    raise LookupError(f"no enabled {rule} redex")


def run_providers_accept(seed: int = 0):
    """Drive the client/provider-1 session to the accepted state.

    Returns (final configuration, list of steps, list of configurations
    visited, starting with the initial one)."""
    cfg = providers_config()
    supply = supply_for(cfg, seed)
    configs = [cfg]
    steps = []
    for rule, tags in (
        ("init", ("t1", "t2")),
        ("com", None),
        ("com", None),
        ("if", None),
        ("sel", None),
    ):
        cfg, step = _step_by_rule(cfg, supply, rule, tags)
        configs.append(cfg)
        steps.append(step)
    return cfg, steps, configs
