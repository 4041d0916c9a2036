"""The n-ary ordered state space: a rooted DAG of list states whose edges
are labeled with contextualized operations and kept totally ordered by the
server serialization order.

A space is single-owner mutable: it is driven by exactly one replica state
machine. Checkers work on immutable snapshots taken via snapshot().
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

from .ot_core import ListOp, ListState, apply, transform


class Oid(NamedTuple):
    """Globally unique operation identifier: (client id, sequence number)."""

    cid: int
    seq: int

    def token(self) -> str:
        return f"{self.cid}:{self.seq}"


OidSet = FrozenSet[Oid]

EMPTY_OIDS: OidSet = frozenset()


class ProtocolError(Exception):
    """A protocol integrity violation: broken FIFO, bad context, or an
    edge/vertex constraint that correct runs can never reach."""


@dataclass(frozen=True)
class ProtoOp:
    """A protocol operation: the signature plus identity and contexts.

    ctx holds the oids causally before the operation (it always equals the
    oids of the vertex the operation was generated at or transformed to);
    sctx holds the oids the server had executed before it, stamped by the
    server, and stays empty on locally generated copies.
    """

    o: ListOp
    oid: Oid
    ctx: OidSet = EMPTY_OIDS
    sctx: OidSet = EMPTY_OIDS

    def __post_init__(self) -> None:
        if self.oid in self.ctx:
            raise ProtocolError(f"operation {self.oid.token()} lists itself in its context")

    def with_sctx(self, sctx: OidSet) -> "ProtoOp":
        return replace(self, sctx=sctx)

    def label(self) -> str:
        return f"{self.oid.token()} {self.o.sig()}"


class Ord(enum.IntEnum):
    LEFT = -1
    RIGHT = 1


def compare_ops(op: ProtoOp, op2: ProtoOp, rid: int) -> Ord:
    """Decide the server order between two operations as visible at replica
    rid (0 is the server).

    The server contexts decide when they can; otherwise exactly one of the
    two must be local to a client replica, and the redirected one orders
    first. Any other configuration is unreachable over FIFO channels.
    """
    if op.oid == op2.oid:
        raise ProtocolError("compare_ops needs two distinct operations")
    if op.oid in op2.sctx:
        return Ord.LEFT
    if op2.oid in op.sctx:
        return Ord.RIGHT
    if rid == 0:
        raise ProtocolError(
            f"server cannot order {op.oid.token()} and {op2.oid.token()}: "
            "both server contexts are silent"
        )
    op_local = op.oid.cid == rid
    op2_local = op2.oid.cid == rid
    if not op_local and op2_local:
        return Ord.LEFT
    if op_local and not op2_local:
        return Ord.RIGHT
    raise ProtocolError(
        f"cannot order {op.oid.token()} and {op2.oid.token()} at replica {rid}: "
        "neither context decides and the pair is not one local, one remote"
    )


class CssEdge(NamedTuple):
    op: ProtoOp
    target: "CssVertex"


class CssVertex:
    """A state-space vertex: the set of executed oids plus ordered out-edges."""

    __slots__ = ("oids", "edges")

    def __init__(self, oids: OidSet):
        self.oids: OidSet = oids
        self.edges: List[CssEdge] = []

    def __repr__(self) -> str:
        return f"CssVertex({sorted(o.token() for o in self.oids)})"


class SnapEdge(NamedTuple):
    op: ProtoOp
    target: OidSet


@dataclass(frozen=True)
class CssSnapshot:
    """Immutable copy of a space: per-vertex ordered edge tuples."""

    rid: int
    cur: OidSet
    vertices: Dict[OidSet, Tuple[SnapEdge, ...]]

    def first_path(self, start: OidSet) -> List[SnapEdge]:
        """Edges along repeated first-edge hops from start to cur."""
        path: List[SnapEdge] = []
        at = start
        while at != self.cur:
            edges = self.vertices[at]
            if not edges:
                raise ProtocolError(f"first-edge path from {sorted(start)} stalled before cur")
            path.append(edges[0])
            at = edges[0].target
            if len(path) > len(self.vertices):
                raise ProtocolError("first-edge path does not terminate")
        return path


class CssSpace:
    """The mutable n-ary ordered state space owned by replica rid."""

    def __init__(self, rid: int):
        self.rid = rid
        root = CssVertex(EMPTY_OIDS)
        self.vertices: Dict[OidSet, CssVertex] = {EMPTY_OIDS: root}
        self.root = root
        self.cur = root
        self.last_ot_sequence: Tuple[Oid, ...] = ()

    def vertex(self, oids: OidSet) -> Optional[CssVertex]:
        return self.vertices.get(oids)

    def _new_vertex(self, oids: OidSet) -> CssVertex:
        if oids in self.vertices:
            raise ProtocolError(f"vertex {sorted(o.token() for o in oids)} already exists")
        v = CssVertex(oids)
        self.vertices[oids] = v
        return v

    def locate(self, op: ProtoOp) -> CssVertex:
        """Find the unique vertex matching op's context.

        Absence means a FIFO/channel invariant broke upstream; the space
        never creates the vertex silently.
        """
        v = self.vertices.get(op.ctx)
        if v is None:
            raise ProtocolError(
                f"no vertex matches ctx of {op.oid.token()} at replica {self.rid}: "
                f"{sorted(o.token() for o in op.ctx)}"
            )
        return v

    def link(self, u: CssVertex, v: CssVertex, op: ProtoOp) -> None:
        """Insert the edge (op, v) into u's ordered edge set.

        Idempotent when an edge with the same oid is already present.
        """
        if op.ctx != u.oids:
            raise ProtocolError(f"link: ctx of {op.oid.token()} does not match source vertex")
        if v.oids != u.oids | {op.oid}:
            raise ProtocolError(f"link: target oids do not extend source by {op.oid.token()}")
        for e in u.edges:
            if e.op.oid == op.oid:
                if e.target is not v:
                    raise ProtocolError(f"link: {op.oid.token()} already linked to a different vertex")
                return
        at = len(u.edges)
        for i, e in enumerate(u.edges):
            if compare_ops(op, e.op, self.rid) is Ord.LEFT:
                at = i
                break
        u.edges.insert(at, CssEdge(op, v))
        if __debug__:
            self._assert_edge_order(u)

    def _assert_edge_order(self, u: CssVertex) -> None:
        # compare_ops must be a strict total order on every co-existing
        # edge set; antisymmetry is asserted rather than proved.
        for i, a in enumerate(u.edges):
            for b in u.edges[i + 1 :]:
                assert compare_ops(a.op, b.op, self.rid) is Ord.LEFT
                assert compare_ops(b.op, a.op, self.rid) is Ord.RIGHT

    def first_edge(self, v: CssVertex) -> CssEdge:
        if not v.edges:
            raise ProtocolError("first_edge on a final vertex")
        return v.edges[0]

    def xform(self, op: ProtoOp) -> ProtoOp:
        """Transform op along the first-edge path from its context vertex to
        cur, materializing every intermediate OT square, and advance cur.

        The sequence of oids transformed against is kept in
        last_ot_sequence for the structural checkers.
        """
        u = self.locate(op)
        v = self._new_vertex(u.oids | {op.oid})
        ot_seq: List[Oid] = []
        while u.oids != self.cur.oids:
            e = self.first_edge(u)
            u2, op2 = e.target, e.op
            op_t = ProtoOp(transform(op.o, op2.o), op.oid, op.ctx | {op2.oid}, op.sctx)
            op2_t = ProtoOp(transform(op2.o, op.o), op2.oid, op2.ctx | {op.oid}, op2.sctx)
            v2 = self._new_vertex(v.oids | {op2.oid})
            self.link(v, v2, op2_t)
            self.link(u, v, op)
            ot_seq.append(op2.oid)
            u, v, op = u2, v2, op_t
        self.link(u, v, op)
        self.cur = v
        self.last_ot_sequence = tuple(ot_seq)
        return op

    def append_local(self, op: ProtoOp) -> None:
        """Extend cur with a locally generated op (ctx must equal cur.oids)."""
        if op.ctx != self.cur.oids:
            raise ProtocolError(f"local op {op.oid.token()} not generated at cur")
        v = self._new_vertex(self.cur.oids | {op.oid})
        self.link(self.cur, v, op)
        self.cur = v

    def first_path_ops(self, v: CssVertex) -> List[ProtoOp]:
        """Operation labels along repeated first-edge hops from v to cur."""
        ops: List[ProtoOp] = []
        at = v
        while at.oids != self.cur.oids:
            e = self.first_edge(at)
            ops.append(e.op)
            at = e.target
            if len(ops) > len(self.vertices):
                raise ProtocolError("first-edge path does not terminate")
        return ops

    def snapshot(self) -> CssSnapshot:
        verts = {
            oids: tuple(SnapEdge(e.op, e.target.oids) for e in v.edges)
            for oids, v in self.vertices.items()
        }
        return CssSnapshot(rid=self.rid, cur=self.cur.oids, vertices=verts)


def materialize(snapshot: CssSnapshot) -> Dict[OidSet, ListState]:
    """Replay every vertex's list state from the root.

    Any in-edge gives the same list (that is the convergence property); all
    of them are replayed and checked to agree.
    """
    states: Dict[OidSet, ListState] = {EMPTY_OIDS: ()}
    in_edges: Dict[OidSet, List[Tuple[OidSet, ProtoOp]]] = {}
    for src, edges in snapshot.vertices.items():
        for e in edges:
            in_edges.setdefault(e.target, []).append((src, e.op))
    for oids in sorted(snapshot.vertices, key=lambda s: (len(s), sorted(s))):
        if oids == EMPTY_OIDS:
            continue
        candidates = []
        for src, op in in_edges.get(oids, []):
            if src in states:
                candidates.append(apply(states[src], op.o)[0])
        if not candidates:
            raise ProtocolError(f"vertex {sorted(o.token() for o in oids)} unreachable from root")
        assert all(c == candidates[0] for c in candidates[1:]), "replay paths disagree"
        states[oids] = candidates[0]
    return states
