"""otwb: a verification workbench for replicated-list OT protocols.

Replays the client/server protocols (original-forwarding and
transformed-forwarding) and their broadcast-based peer variant over a
deterministic simulated network, then machine-checks convergence, the
weak and strong list specifications, and the structural properties of
the recorded state spaces.
"""

from .checkers import (
    AbstractExecution,
    ListOrder,
    Verdict,
    build_abstract_execution,
    build_list_order,
    check_convergence,
    check_equivalence,
    check_pairwise_compatibility,
    check_strong_spec,
    check_structural,
    check_weak_spec,
)
from .css_space import CssSpace, Oid, ProtoOp, ProtocolError, compare_ops
from .jupiter_space import Dimension, ProtoOp2D, StateSpace2D
from .ot_core import (
    Element,
    ListOp,
    OpKind,
    Priority,
    PriorityRule,
    apply,
    check_cp1,
    priority_of,
    to_text,
    transform,
)
from .protocols import CJClient, CJServer, DJReplica, JClient, JServer
from .simnet import (
    BroadcastService,
    Schedule,
    ScheduleError,
    Trace,
    empty_schedule,
    happens_before,
    podc16_schedule,
    random_schedule,
    run,
    schedule_from_json,
    schedule_to_json,
    trace_to_json,
)

__all__ = [
    "AbstractExecution",
    "BroadcastService",
    "CJClient",
    "CJServer",
    "CssSpace",
    "DJReplica",
    "Dimension",
    "Element",
    "JClient",
    "JServer",
    "ListOp",
    "ListOrder",
    "Oid",
    "OpKind",
    "Priority",
    "PriorityRule",
    "ProtoOp",
    "ProtoOp2D",
    "ProtocolError",
    "Schedule",
    "ScheduleError",
    "StateSpace2D",
    "Trace",
    "Verdict",
    "apply",
    "build_abstract_execution",
    "build_list_order",
    "check_convergence",
    "check_cp1",
    "check_equivalence",
    "check_pairwise_compatibility",
    "check_strong_spec",
    "check_structural",
    "check_weak_spec",
    "compare_ops",
    "empty_schedule",
    "happens_before",
    "podc16_schedule",
    "priority_of",
    "random_schedule",
    "run",
    "schedule_from_json",
    "schedule_to_json",
    "to_text",
    "trace_to_json",
    "transform",
]
