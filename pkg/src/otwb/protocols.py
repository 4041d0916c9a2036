"""Replica state machines for the three protocols.

Handlers are transport-free: they take an operation, mutate replica-local
state, and return what should be sent. The simulator owns channels and
delivery order; replicas never share mutable state, and every message
payload is an immutable value.
"""

from __future__ import annotations

from typing import Dict, List, NamedTuple, Tuple

from .css_space import EMPTY_OIDS, CssSpace, Oid, OidSet, ProtoOp, ProtocolError
from .jupiter_space import Dimension, ProtoOp2D, StateSpace2D
from .ot_core import (
    Element,
    ListOp,
    ListState,
    ListValue,
    OpKind,
    PriorityRule,
    apply,
    priority_of,
)

SERVER_ID = 0


class DoResult(NamedTuple):
    value: ListValue
    message: object  # ProtoOp or ProtoOp2D, addressed to the server


class RecvResult(NamedTuple):
    value: ListValue
    applied: object  # the fully transformed operation that was executed
    ot_seq: Tuple[Oid, ...]


class ServerRecvResult(NamedTuple):
    value: ListValue
    applied: object
    fanout: Tuple[Tuple[int, object], ...]  # (destination cid, message)
    ot_seq: Tuple[Oid, ...]


def _fill_del(o: ListOp, state: ListState) -> ListOp:
    """Record the element a deletion removes; a deletion aimed at an empty
    list degenerates to Nop so it deletes nothing anywhere."""
    if o.kind is not OpKind.DEL:
        return o
    if not state:
        return ListOp.nop()
    return o.with_element(state[min(o.position, len(state) - 1)])


class _ClientBase:
    """Shared local-processing logic: apply, mint identity, record deletes."""

    def __init__(self, cid: int, rule: PriorityRule):
        if cid < 1:
            raise ValueError("client ids start at 1")
        self.cid = cid
        self.rule = rule
        self.seq = 0
        self.state: ListState = ()

    def make_ins(self, glyph: str, position: int) -> ListOp:
        """Build an insert carrying the identity do() will expect."""
        element = Element(glyph, self.cid, self.seq + 1)
        return ListOp.ins(element, position, priority_of(self.cid, self.rule))

    def make_del(self, position: int) -> ListOp:
        return ListOp.del_(position, priority_of(self.cid, self.rule))

    def _generate(self, o: ListOp) -> Tuple[ListOp, Oid, ListValue]:
        if o.kind is OpKind.READ:
            raise ProtocolError("route reads through read(), not do()")
        if o.kind is OpKind.INS and (o.element.origin_cid, o.element.origin_seq) != (
            self.cid,
            self.seq + 1,
        ):
            raise ProtocolError("inserted element identity does not match this client")
        o = _fill_del(o, self.state)
        self.state, value = apply(self.state, o)
        self.seq += 1
        return o, Oid(self.cid, self.seq), value

    def read(self) -> ListValue:
        return self.state


class CJClient(_ClientBase):
    def __init__(self, cid: int, rule: PriorityRule = PriorityRule.SMALLER_WINS):
        super().__init__(cid, rule)
        self.space = CssSpace(rid=cid)

    def do(self, o: ListOp) -> DoResult:
        o, oid, value = self._generate(o)
        op = ProtoOp(o, oid, ctx=self.space.cur.oids, sctx=EMPTY_OIDS)
        self.space.append_local(op)
        return DoResult(value, op)

    def receive(self, op: ProtoOp) -> RecvResult:
        applied = self.space.xform(op)
        self.state, value = apply(self.state, applied.o)
        return RecvResult(value, applied, self.space.last_ot_sequence)


class CJServer:
    """The serializing server: stamps arrival contexts, transforms against
    its own space, and forwards the original (stamped) operation."""

    def __init__(self, n_clients: int):
        self.n_clients = n_clients
        self.state: ListState = ()
        self.soids: set[Oid] = set()
        self.arrival_log: List[Oid] = []
        self.space = CssSpace(rid=SERVER_ID)

    def receive(self, op: ProtoOp) -> ServerRecvResult:
        stamped = op.with_sctx(frozenset(self.soids))
        self.soids.add(stamped.oid)
        self.arrival_log.append(stamped.oid)
        applied = self.space.xform(stamped)
        self.state, value = apply(self.state, applied.o)
        fanout = tuple(
            (c, stamped) for c in range(1, self.n_clients + 1) if c != stamped.oid.cid
        )
        return ServerRecvResult(value, applied, fanout, self.space.last_ot_sequence)

    def read(self) -> ListValue:
        return self.state


class JClient(_ClientBase):
    def __init__(self, cid: int, rule: PriorityRule = PriorityRule.SMALLER_WINS):
        super().__init__(cid, rule)
        self.space = StateSpace2D()

    def do(self, o: ListOp) -> DoResult:
        o, oid, value = self._generate(o)
        op = ProtoOp2D(o, oid, ctx=self.space.cur.oids)
        self.space.cur = self.space.add(op, Dimension.LOCAL, self.space.cur)
        return DoResult(value, op)

    def receive(self, op: ProtoOp2D) -> RecvResult:
        applied = self.space.xform(op, Dimension.LOCAL)
        self.state, value = apply(self.state, applied.o)
        return RecvResult(value, applied, self.space.last_ot_sequence)


class JServer:
    """Keeps one 2D space per client and forwards transformed operations."""

    def __init__(self, n_clients: int):
        self.n_clients = n_clients
        self.state: ListState = ()
        self.arrival_log: List[Oid] = []
        self.spaces: Dict[int, StateSpace2D] = {
            c: StateSpace2D() for c in range(1, n_clients + 1)
        }

    def receive(self, op: ProtoOp2D) -> ServerRecvResult:
        origin = op.oid.cid
        self.arrival_log.append(op.oid)
        applied = self.spaces[origin].xform(op, Dimension.GLOBAL)
        self.state, value = apply(self.state, applied.o)
        fanout = []
        for c in range(1, self.n_clients + 1):
            if c == origin:
                continue
            self.spaces[c].append_global(applied)
            fanout.append((c, applied))
        if __debug__:
            curs = {s.cur.oids for s in self.spaces.values()}
            assert len(curs) == 1, "per-client server spaces diverged"
        return ServerRecvResult(value, applied, tuple(fanout), self.spaces[origin].last_ot_sequence)

    def read(self) -> ListValue:
        return self.state


class DJReplica(_ClientBase):
    """Peer replica over causal atomic broadcast: generates like a client,
    processes deliveries in broadcast order, skipping its own."""

    def __init__(self, rid: int, rule: PriorityRule = PriorityRule.SMALLER_WINS):
        super().__init__(rid, rule)
        self.rid = rid
        self.space = CssSpace(rid=rid)
        self.soids_mirror: OidSet = EMPTY_OIDS

    def generate(self, o: ListOp) -> DoResult:
        o, oid, value = self._generate(o)
        op = ProtoOp(o, oid, ctx=self.space.cur.oids, sctx=EMPTY_OIDS)
        self.space.append_local(op)
        return DoResult(value, op)

    def deliver(self, op: ProtoOp) -> RecvResult:
        if op.oid.cid == self.rid:
            raise ProtocolError("own operations are never delivered back")
        if not self.soids_mirror <= op.sctx:
            raise ProtocolError(
                f"delivery of {op.oid.token()} at replica {self.rid} is behind "
                "the broadcast order already observed"
            )
        self.soids_mirror = op.sctx | {op.oid}
        applied = self.space.xform(op)
        self.state, value = apply(self.state, applied.o)
        return RecvResult(value, applied, self.space.last_ot_sequence)
