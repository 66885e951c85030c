"""Reversible session pi-calculus: a reduction engine with memories for
causal-consistent backward computation, a history consistency checker, a
binary session type checker and an interactive explorer."""

from .names import Endpoint, Name, NameSupply, endpoint, session, shared, tag
from .syntax import (
    Accept,
    Branch,
    EvalError,
    If,
    Inact,
    Lit,
    New,
    NIL,
    OpE,
    Par,
    ProcVar,
    Rec,
    Receive,
    Request,
    Select,
    Send,
    VarE,
    eval_expr,
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
    SelEv,
    Thread,
    alpha_tag_equal,
    forgetful_map,
    struct_congruent,
    supply_for,
)
from .parser import (
    ParseError,
    SourceSpan,
    parse_configuration,
    parse_process,
    parse_program,
    parse_session_type,
    parse_typedecls,
)
from .printer import pretty_print
from .reduction import (
    RedexId,
    ReductionError,
    StaleRedexError,
    Step,
    apply_backward,
    apply_forward,
    apply_redex,
    enumerate_backward,
    enumerate_forward,
)
from .history import (
    ConsistencyReport,
    MemoryGraph,
    Trace,
    build_graph,
    causally_equivalent,
    check_consistent,
    cofinal,
    concurrent,
    load_trace,
    replay,
    rollback,
    save_trace,
)
from .types import (
    OutOfClass,
    SessionTypeError,
    Typing,
    dual,
    typecheck_config,
    typecheck_process,
    typing_oracle,
)

__version__ = "0.1.0"
