"""Tests for the 2D state space."""

import pytest

from conftest import O1, O2, O3, O4
from otwb.css_space import Oid, ProtocolError
from otwb.jupiter_space import Dimension, ProtoOp2D, StateSpace2D, materialize2d
from otwb.ot_core import Element, ListOp, priority_of, to_text
from otwb.protocols import JClient, JServer


def ins(glyph, pos, cid, seq):
    return ListOp.ins(Element(glyph, cid, seq), pos, priority_of(cid))


def op2d(o, oid, ctx=()):
    return ProtoOp2D(o, oid, frozenset(ctx))


def replay_podc16_jupiter():
    server = JServer(3)
    c = {i: JClient(i) for i in (1, 2, 3)}
    _, op1 = c[1].do(c[1].make_ins("x", 0))
    r1 = server.receive(op1)
    for i in (2, 3):
        c[i].receive(r1.fanout[0][1])
    _, op2 = c[1].do(c[1].make_del(0))
    _, op3 = c[2].do(c[2].make_ins("a", 0))
    _, op4 = c[3].do(c[3].make_ins("b", 1))
    r2 = server.receive(op2)
    r3 = server.receive(op3)
    r4 = server.receive(op4)
    fwd = {2: r2.fanout[0][1], 3: r3.fanout[0][1], 4: r4.fanout[0][1]}
    c[2].receive(fwd[2])
    c[3].receive(fwd[2])
    c[1].receive(fwd[3])
    c[2].receive(fwd[4])
    c[3].receive(fwd[3])
    c[1].receive(fwd[4])
    return server, c, fwd


class TestAdd:
    def test_add_to_root_along_local(self):
        s = StateSpace2D()
        v = s.add(op2d(ins("x", 0, 1, 1), Oid(1, 1)), Dimension.LOCAL, s.root)
        assert len(s.vertices) == 2
        assert s.root.edges[Dimension.LOCAL].target is v
        assert s.root.edges[Dimension.GLOBAL] is None

    def test_mismatched_context_rejected(self):
        s = StateSpace2D()
        bad = op2d(ins("x", 0, 1, 2), Oid(1, 2), ctx={Oid(1, 1)})
        with pytest.raises(ProtocolError):
            s.add(bad, Dimension.LOCAL, s.root)

    def test_occupied_dimension_rejected(self):
        s = StateSpace2D()
        s.add(op2d(ins("x", 0, 1, 1), Oid(1, 1)), Dimension.GLOBAL, s.root)
        with pytest.raises(ProtocolError):
            s.add(op2d(ins("y", 0, 2, 1), Oid(2, 1)), Dimension.GLOBAL, s.root)

    def test_server_saves_transformed_op_along_global(self):
        server, _, fwd = replay_podc16_jupiter()
        # The forwarded o3 carries the server-transformed context {o1,o2}.
        assert fwd[3].ctx == frozenset({O1, O2})
        snap3 = server.spaces[3].snapshot()
        local, global_ = snap3.vertices[frozenset({O1, O2})]
        assert global_ is not None and global_.op.oid == O3


class TestXform2D:
    def test_op_at_cur_passes_through(self):
        c1 = JClient(1)
        incoming = op2d(ins("x", 0, 2, 1), Oid(2, 1))
        result = c1.receive(incoming)
        assert result.applied.o == incoming.o
        assert result.ot_seq == ()

    def test_client_single_ot_against_local_op(self):
        # Client 3 transforms the forwarded insert against its own pending
        # one, ends at the four-op vertex with list "ba".
        _, clients, _ = replay_podc16_jupiter()
        c3 = clients[3]
        assert to_text(c3.state) == "ba"
        assert c3.space.cur.oids == frozenset({O1, O2, O3, O4})

    def test_server_global_walk_transforms_o3(self):
        server, _, fwd = replay_podc16_jupiter()
        # o3 arrived with ctx {o1}; the server transformed it against o2
        # along the global dimension of c2's space.
        assert fwd[3].o.sig() == "Ins(a,0)"
        assert fwd[3].ctx == frozenset({O1, O2})

    def test_missing_dimension_edge_is_integrity_error(self):
        s = StateSpace2D()
        s.cur = s.add(op2d(ins("x", 0, 1, 1), Oid(1, 1)), Dimension.LOCAL, s.root)
        # Incoming op located at root must walk GLOBAL edges, none exist.
        incoming = op2d(ins("y", 0, 2, 1), Oid(2, 1))
        with pytest.raises(ProtocolError):
            s.xform(incoming, Dimension.GLOBAL)


class TestStructure:
    def test_at_most_one_edge_per_dimension(self):
        server, clients, _ = replay_podc16_jupiter()
        snaps = [s.snapshot() for s in server.spaces.values()]
        snaps += [c.space.snapshot() for c in clients.values()]
        for snap in snaps:
            for local, global_ in snap.vertices.values():
                assert local is None or local.op is not None
                assert global_ is None or global_.op is not None

    def test_square_closure(self):
        # Wherever both dimensions leave a vertex, the transformed square
        # must be materialized.
        server, clients, _ = replay_podc16_jupiter()
        snaps = [s.snapshot() for s in server.spaces.values()]
        snaps += [c.space.snapshot() for c in clients.values()]
        for snap in snaps:
            for src, (local, global_) in snap.vertices.items():
                if local is None or global_ is None:
                    continue
                corner = src | {local.op.oid, global_.op.oid}
                assert corner in snap.vertices
                via_local = snap.vertices[local.target]
                via_global = snap.vertices[global_.target]
                assert any(
                    e is not None and e.op.oid == global_.op.oid and e.target == corner
                    for e in via_local
                )
                assert any(
                    e is not None and e.op.oid == local.op.oid and e.target == corner
                    for e in via_global
                )

    def test_materialized_lists_match_figure(self):
        _, clients, _ = replay_podc16_jupiter()
        snap = clients[3].space.snapshot()
        states = {k: to_text(v) for k, v in materialize2d(snap).items()}
        assert states[frozenset({O1, O4})] == "xb"
        assert states[frozenset({O1, O2, O4})] == "b"
        assert states[frozenset({O1, O2, O3, O4})] == "ba"
        # c3 never materializes the {o1,o3} vertex in 2D form
        assert frozenset({O1, O3}) not in states
