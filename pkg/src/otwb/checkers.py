"""Builds abstract executions from traces and decides the list
specifications (convergence, weak, strong) and the structural graph
properties of recorded runs.

All checkers are pure functions over immutable trace snapshots; a Verdict
either confirms a property or carries a minimal witness of its failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .css_space import CssSnapshot, Oid, OidSet, ProtocolError, materialize
from .jupiter_space import Snapshot2D
from .simnet import OpRecord, RunResult, Trace, vc_less

Elem = Tuple[str, int, int]  # (glyph, origin cid, origin seq)
Value = Tuple[Elem, ...]


def _text(value: Value) -> str:
    return "".join(v[0] for v in value)


@dataclass(frozen=True)
class DoEvent:
    index: int  # position in H
    replica: int
    op: OpRecord
    value: Value
    vclock: Tuple[int, ...]

    def is_update(self) -> bool:
        return self.op.kind in ("ins", "del")


@dataclass(frozen=True)
class AbstractExecution:
    """The do-event history H plus the visibility relation over it."""

    H: Tuple[DoEvent, ...]
    vis: FrozenSet[Tuple[int, int]]


@dataclass(frozen=True)
class ListOrder:
    """Element-precedence pairs induced by every returned list."""

    pairs: FrozenSet[Tuple[Elem, Elem]]


@dataclass(frozen=True)
class Verdict:
    check: str
    satisfied: bool
    witness: Optional[dict] = None

    def to_json_dict(self) -> dict:
        doc: dict = {"check": self.check, "satisfied": self.satisfied}
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc


def build_abstract_execution(trace: Trace) -> AbstractExecution:
    """H = do events in trace order; vis = causally-before restricted to
    them, which satisfies the visibility axioms by construction."""
    H: List[DoEvent] = []
    for e in trace.events:
        if e.kind == "do":
            H.append(DoEvent(len(H), e.replica, e.op, e.value or (), e.vclock))
    vis = set()
    for a in H:
        for b in H:
            if a.index != b.index and vc_less(a.vclock, b.vclock):
                vis.add((a.index, b.index))
    if __debug__:
        _assert_visibility_axioms(H, vis)
    return AbstractExecution(tuple(H), frozenset(vis))


def _assert_visibility_axioms(H: Sequence[DoEvent], vis: Set[Tuple[int, int]]) -> None:
    for a in H:
        for b in H:
            if a.index < b.index and a.replica == b.replica:
                assert (a.index, b.index) in vis, "per-replica order must be visible"
    for i, j in vis:
        assert i < j, "visibility must respect history order"
    for i, j in vis:
        for j2, k in vis:
            if j2 == j:
                assert (i, k) in vis, "visibility must be transitive"


def _visible_updates(A: AbstractExecution, e: DoEvent, include_self: bool) -> List[DoEvent]:
    out = [u for u in A.H if u.is_update() and (u.index, e.index) in A.vis]
    if include_self and e.is_update():
        out.append(e)
    return out


def check_convergence(A: AbstractExecution) -> Verdict:
    """Reads that observe the same set of list updates must return the
    same list."""
    groups: Dict[FrozenSet[int], Tuple[DoEvent, Value]] = {}
    for e in A.H:
        if e.op.kind != "read":
            continue
        key = frozenset(u.index for u in _visible_updates(A, e, include_self=False))
        if key in groups:
            first, value = groups[key]
            if value != e.value:
                return Verdict(
                    "convergence",
                    False,
                    {
                        "events": [first.index, e.index],
                        "replicas": [first.replica, e.replica],
                        "lists": [_text(value), _text(e.value)],
                    },
                )
        else:
            groups[key] = (e, e.value)
    return Verdict("convergence", True)


def build_list_order(A: AbstractExecution) -> ListOrder:
    pairs: Set[Tuple[Elem, Elem]] = set()
    for e in A.H:
        w = e.value
        for i in range(len(w)):
            for j in range(i + 1, len(w)):
                pairs.add((w[i], w[j]))
    return ListOrder(frozenset(pairs))


def _shortest_cycle(pairs: Iterable[Tuple[Elem, Elem]]) -> Optional[List[Elem]]:
    adj: Dict[Elem, List[Elem]] = {}
    for a, b in pairs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, [])
    best: Optional[List[Elem]] = None
    for start in adj:
        # BFS for the shortest path back to start
        frontier = [(start, [start])]
        seen = {start}
        while frontier:
            nxt = []
            for node, path in frontier:
                for succ in adj[node]:
                    if succ == start:
                        cycle = path
                        if best is None or len(cycle) < len(best):
                            best = cycle
                        nxt = []
                        frontier = []
                        break
                    if succ not in seen:
                        seen.add(succ)
                        nxt.append((succ, path + [succ]))
                else:
                    continue
                break
            else:
                frontier = nxt
                continue
            break
    return best


def check_weak_spec(A: AbstractExecution) -> Verdict:
    """The three per-event conditions plus acyclicity of the constructed
    list order."""
    lo = build_list_order(A)
    for e in A.H:
        visible = _visible_updates(A, e, include_self=True)
        inserted = {u.op.element for u in visible if u.op.kind == "ins"}
        deleted = {u.op.element for u in visible if u.op.kind == "del"}
        expected = inserted - deleted
        got = set(e.value)
        if got != expected:
            return Verdict(
                "weak_spec",
                False,
                {
                    "condition": "1a",
                    "event": e.index,
                    "replica": e.replica,
                    "list": _text(e.value),
                    "missing": sorted(map(str, expected - got)),
                    "extra": sorted(map(str, got - expected)),
                },
            )
        if e.op.kind == "ins":
            n = len(e.value)
            at = min(e.op.pos, n - 1)
            if n == 0 or e.value[at] != e.op.element:
                return Verdict(
                    "weak_spec",
                    False,
                    {"condition": "1c", "event": e.index, "list": _text(e.value)},
                )
        # 1b holds by the constructive list order; assert it anyway.
        for i in range(len(e.value)):
            for j in range(i + 1, len(e.value)):
                assert (e.value[i], e.value[j]) in lo.pairs
    # Condition 2: the list order is irreflexive, and transitive and total
    # on each returned list's elements. Totality holds by construction;
    # transitivity plus irreflexivity on a list fail exactly when some
    # other returned list contradicts its internal order.
    for e in A.H:
        w = e.value
        for i in range(len(w)):
            for j in range(i + 1, len(w)):
                if w[i] == w[j]:
                    return Verdict(
                        "weak_spec",
                        False,
                        {"condition": "2", "event": e.index, "duplicate": str(w[i])},
                    )
                if (w[j], w[i]) in lo.pairs:
                    other = next(
                        (
                            f.index
                            for f in A.H
                            if w[i] in f.value
                            and w[j] in f.value
                            and f.value.index(w[j]) < f.value.index(w[i])
                        ),
                        None,
                    )
                    return Verdict(
                        "weak_spec",
                        False,
                        {
                            "condition": "2",
                            "events": [e.index, other],
                            "elements": [
                                f"{w[i][0]}@{w[i][1]}:{w[i][2]}",
                                f"{w[j][0]}@{w[j][1]}:{w[j][2]}",
                            ],
                            "list": _text(w),
                        },
                    )
    return Verdict("weak_spec", True)


def check_strong_spec(A: AbstractExecution) -> Verdict:
    """A single global list order consistent with every returned list must
    exist and be acyclic; the union order is the only candidate."""
    lo = build_list_order(A)
    cycle = _shortest_cycle(lo.pairs)
    if cycle is not None:
        return Verdict(
            "strong_spec",
            False,
            {
                "cycle": [f"{g}@{c}:{s}" for g, c, s in cycle],
                "elements": sorted(g for g, _, _ in cycle),
            },
        )
    return Verdict("strong_spec", True)


def check_pairwise_compatibility(states: Sequence[Value]) -> Verdict:
    """Every pair of list states must agree on the relative order of their
    common elements."""
    states = list(states)
    for i in range(len(states)):
        pos1 = {e: k for k, e in enumerate(states[i])}
        for j in range(i + 1, len(states)):
            pos2 = {e: k for k, e in enumerate(states[j])}
            common = [e for e in states[i] if e in pos2]
            for x in range(len(common)):
                for y in range(x + 1, len(common)):
                    a, b = common[x], common[y]
                    if (pos1[a] < pos1[b]) != (pos2[a] < pos2[b]):
                        return Verdict(
                            "pairwise_compatibility",
                            False,
                            {
                                "lists": [_text(states[i]), _text(states[j])],
                                "elements": [f"{a[0]}@{a[1]}:{a[2]}", f"{b[0]}@{b[1]}:{b[2]}"],
                            },
                        )
    return Verdict("pairwise_compatibility", True)


def check_equivalence(trace_a: Trace, trace_b: Trace) -> Verdict:
    """Per replica, the sequences of (do/receive event, resulting list)
    must match between the two runs of the same schedule."""
    if trace_a.schedule_sha256 != trace_b.schedule_sha256:
        raise ValueError("equivalence needs two replays of the same schedule")

    def per_replica(trace: Trace) -> Dict[int, List[Tuple[str, Optional[str], Value]]]:
        out: Dict[int, List[Tuple[str, Optional[str], Value]]] = {}
        for e in trace.events:
            if e.kind in ("do", "receive"):
                oid = e.op.oid if e.op else None
                out.setdefault(e.replica, []).append((e.kind, oid, e.value or ()))
        return out

    sa, sb = per_replica(trace_a), per_replica(trace_b)
    for r in sorted(set(sa) | set(sb)):
        ea, eb = sa.get(r, []), sb.get(r, [])
        for k in range(max(len(ea), len(eb))):
            va = ea[k] if k < len(ea) else None
            vb = eb[k] if k < len(eb) else None
            if va != vb:
                return Verdict(
                    "equivalence",
                    False,
                    {
                        "replica": r,
                        "step": k,
                        trace_a.protocol: _fmt_step(va),
                        trace_b.protocol: _fmt_step(vb),
                    },
                )
    return Verdict("equivalence", True)


def _fmt_step(step) -> Optional[dict]:
    if step is None:
        return None
    kind, oid, value = step
    return {"event": kind, "oid": oid, "list": _text(value)}


# --------------------------------------------------------------------------
# Structural checks over state-space snapshots


def _sig(op_record_like) -> Tuple:
    o = op_record_like
    elem = None
    if o.element is not None:
        elem = (o.element.glyph, o.element.origin_cid, o.element.origin_seq)
    return (o.kind.value, elem, o.position)


def _css_edge_set(snap: CssSnapshot) -> Set[Tuple[OidSet, Oid, OidSet, Tuple]]:
    return {
        (src, e.op.oid, e.target, _sig(e.op.o))
        for src, edges in snap.vertices.items()
        for e in edges
    }


def _cscw_edge_set(snap: Snapshot2D) -> Set[Tuple[OidSet, Oid, OidSet, Tuple]]:
    out = set()
    for src, pair in snap.vertices.items():
        for e in pair:
            if e is not None:
                out.add((src, e.op.oid, e.target, _sig(e.op.o)))
    return out


def _fmt_oids(oids: OidSet) -> List[str]:
    return [o.token() for o in sorted(oids)]


class _Graph:
    """Bit-indexed view of a snapshot for ancestor computations."""

    def __init__(self, snap: CssSnapshot):
        self.keys = sorted(snap.vertices, key=lambda s: (len(s), sorted(s)))
        self.idx = {k: i for i, k in enumerate(self.keys)}
        self.children: List[List[int]] = [[] for _ in self.keys]
        self.parents: List[List[int]] = [[] for _ in self.keys]
        for src, edges in snap.vertices.items():
            for e in edges:
                self.children[self.idx[src]].append(self.idx[e.target])
                self.parents[self.idx[e.target]].append(self.idx[src])
        # reflexive ancestor masks, computed in |oids| order (parents first)
        self.anc = [0] * len(self.keys)
        for i in range(len(self.keys)):
            mask = 1 << i
            for p in self.parents[i]:
                mask |= self.anc[p]
            self.anc[i] = mask
        # strict-descendant masks: which vertices have i as a proper ancestor
        self.strict_desc = [0] * len(self.keys)
        for v in range(len(self.keys)):
            m = self.anc[v] & ~(1 << v)
            w = m
            while w:
                low = w & -w
                self.strict_desc[low.bit_length() - 1] |= 1 << v
                w ^= low

    def unique_lca(self, i: int, j: int) -> Tuple[Optional[int], int]:
        common = self.anc[i] & self.anc[j]
        lowest = []
        w = common
        while w:
            low = w & -w
            c = low.bit_length() - 1
            if not (self.strict_desc[c] & common):
                lowest.append(c)
            w ^= low
        if len(lowest) == 1:
            return lowest[0], len(lowest)
        return (None, len(lowest))


def check_structural(result: RunResult, jupiter_result: Optional[RunResult] = None) -> List[Verdict]:
    """Every structural lemma, checked literally against the recorded
    graphs and the server arrival log. Returns one verdict per lemma."""
    verdicts: List[Verdict] = []
    snapshots = dict(result.css_final)
    n = result.schedule.n_clients

    verdicts.append(_check_out_degree(snapshots, n))
    verdicts.append(_check_simple_path(snapshots))
    verdicts.append(_check_closure(snapshots))
    verdicts.append(_check_first_rule(result))
    verdicts.append(_check_ot_sequence(result))
    verdicts.append(_check_unique_lca(snapshots))
    verdicts.append(_check_disjoint_paths(snapshots))
    verdicts.append(_check_vertex_compatibility(snapshots))
    verdicts.append(_check_isomorphism(result))
    if jupiter_result is not None:
        verdicts.append(_check_server_union(result, jupiter_result))
        verdicts.append(_check_client_subgraph(result, jupiter_result))
    return verdicts


def _check_out_degree(snapshots: Dict[int, CssSnapshot], n: int) -> Verdict:
    for rid, snap in sorted(snapshots.items()):
        for key, edges in snap.vertices.items():
            if len(edges) > n:
                return Verdict(
                    "nary_out_degree",
                    False,
                    {"replica": rid, "vertex": _fmt_oids(key), "out_degree": len(edges)},
                )
    return Verdict("nary_out_degree", True)


def _check_simple_path(snapshots: Dict[int, CssSnapshot]) -> Verdict:
    # The edge/vertex matching constraints force oids to grow by exactly
    # the edge label along every edge, so no path can repeat an oid.
    for rid, snap in sorted(snapshots.items()):
        for src, edges in snap.vertices.items():
            for e in edges:
                if e.op.oid in src or e.target != src | {e.op.oid} or e.op.ctx != src:
                    return Verdict(
                        "simple_path",
                        False,
                        {
                            "replica": rid,
                            "vertex": _fmt_oids(src),
                            "edge": e.op.oid.token(),
                            "target": _fmt_oids(e.target),
                        },
                    )
    return Verdict("simple_path", True)


def _check_closure(snapshots: Dict[int, CssSnapshot]) -> Verdict:
    """Square completion: wherever a vertex has two or more children, the
    first edge and each sibling close into the transformed square."""
    for rid, snap in sorted(snapshots.items()):
        for src, edges in snap.vertices.items():
            if len(edges) < 2:
                continue
            first = edges[0]
            for other in edges[1:]:
                target_oids = src | {first.op.oid, other.op.oid}
                witness = {
                    "replica": rid,
                    "vertex": _fmt_oids(src),
                    "first": first.op.oid.token(),
                    "sibling": other.op.oid.token(),
                }
                if target_oids not in snap.vertices:
                    return Verdict("css_closure", False, {**witness, "missing": "vertex"})
                via_first = [
                    e for e in snap.vertices[first.target] if e.op.oid == other.op.oid
                ]
                via_other = [
                    e for e in snap.vertices[other.target] if e.op.oid == first.op.oid
                ]
                if not any(e.target == target_oids for e in via_first):
                    return Verdict("css_closure", False, {**witness, "missing": "edge from first child"})
                if not any(e.target == target_oids for e in via_other):
                    return Verdict("css_closure", False, {**witness, "missing": "edge from sibling child"})
    return Verdict("css_closure", True)


def _check_first_rule(result: RunResult) -> Verdict:
    """After the server's k-th step, the first-edge path from any vertex
    carries exactly the arrived oids missing from it, in arrival order."""
    arrivals = result.arrival_log
    for k, snap in enumerate(result.css_server_steps):
        seen = list(arrivals[:k])
        for key in snap.vertices:
            want = [o for o in seen if o not in key]
            try:
                got = [e.op.oid for e in snap.first_path(key)]
            except ProtocolError as exc:
                return Verdict(
                    "first_rule",
                    False,
                    {"step": k, "vertex": _fmt_oids(key), "error": str(exc)},
                )
            if got != want:
                return Verdict(
                    "first_rule",
                    False,
                    {
                        "step": k,
                        "vertex": _fmt_oids(key),
                        "path": [o.token() for o in got],
                        "expected": [o.token() for o in want],
                    },
                )
    return Verdict("first_rule", True)


def _check_ot_sequence(result: RunResult) -> Verdict:
    """At the server, each operation transforms against exactly the earlier
    arrivals concurrent with it, in arrival order."""
    do_vc: Dict[str, Tuple[int, ...]] = {}
    for e in result.trace.events:
        if e.kind == "do" and e.op is not None and e.op.oid is not None:
            do_vc[e.op.oid] = e.vclock
    arrivals = [o.token() for o in result.arrival_log]
    server_receives = [
        e for e in result.trace.events if e.kind == "receive" and e.replica == 0
    ]
    for k, e in enumerate(server_receives):
        op_tok = e.op.oid
        expected = [
            tok
            for tok in arrivals[:k]
            if not vc_less(do_vc[tok], do_vc[op_tok]) and not vc_less(do_vc[op_tok], do_vc[tok])
        ]
        got = list(e.ot_seq or ())
        if got != expected:
            return Verdict(
                "ot_sequence",
                False,
                {"arrival": k, "oid": op_tok, "transformed_against": got, "expected": expected},
            )
    return Verdict("ot_sequence", True)


def _check_unique_lca(snapshots: Dict[int, CssSnapshot]) -> Verdict:
    for rid, snap in sorted(snapshots.items()):
        g = _Graph(snap)
        for i in range(len(g.keys)):
            for j in range(i + 1, len(g.keys)):
                lca, count = g.unique_lca(i, j)
                if lca is None:
                    return Verdict(
                        "unique_lca",
                        False,
                        {
                            "replica": rid,
                            "vertices": [_fmt_oids(g.keys[i]), _fmt_oids(g.keys[j])],
                            "lca_count": count,
                        },
                    )
    return Verdict("unique_lca", True)


def _check_disjoint_paths(snapshots: Dict[int, CssSnapshot]) -> Verdict:
    # Along any path the oids picked up are exactly the target-minus-source
    # difference, so path disjointness reduces to set disjointness.
    for rid, snap in sorted(snapshots.items()):
        g = _Graph(snap)
        for i in range(len(g.keys)):
            for j in range(i + 1, len(g.keys)):
                lca, _ = g.unique_lca(i, j)
                if lca is None:
                    continue  # reported by unique_lca
                base = g.keys[lca]
                left = g.keys[i] - base
                right = g.keys[j] - base
                overlap = left & right
                if overlap:
                    return Verdict(
                        "disjoint_lca_paths",
                        False,
                        {
                            "replica": rid,
                            "vertices": [_fmt_oids(g.keys[i]), _fmt_oids(g.keys[j])],
                            "lca": _fmt_oids(base),
                            "overlap": _fmt_oids(overlap),
                        },
                    )
    return Verdict("disjoint_lca_paths", True)


def _check_vertex_compatibility(snapshots: Dict[int, CssSnapshot]) -> Verdict:
    for rid, snap in sorted(snapshots.items()):
        try:
            states = materialize(snap)
        except (ProtocolError, AssertionError) as exc:
            return Verdict(
                "vertex_compatibility", False, {"replica": rid, "error": str(exc)}
            )
        values = [
            tuple((e.glyph, e.origin_cid, e.origin_seq) for e in states[k])
            for k in sorted(states, key=lambda s: (len(s), sorted(s)))
        ]
        verdict = check_pairwise_compatibility(values)
        if not verdict.satisfied:
            return Verdict(
                "vertex_compatibility",
                False,
                {"replica": rid, **(verdict.witness or {})},
            )
    return Verdict("vertex_compatibility", True)


def _check_isomorphism(result: RunResult) -> Verdict:
    """At quiescence all spaces are the same graph with the same edge
    order and labels."""
    if not result.quiescent:
        return Verdict("space_isomorphism", True, {"vacuous": "run not quiescent"})

    def shape(snap: CssSnapshot):
        return {
            key: tuple((e.op.oid, _sig(e.op.o), e.target) for e in edges)
            for key, edges in snap.vertices.items()
        }

    shapes = {rid: shape(snap) for rid, snap in result.css_final.items()}
    rids = sorted(shapes)
    base = shapes[rids[0]]
    for rid in rids[1:]:
        if shapes[rid] != base:
            only_base = set(base) - set(shapes[rid])
            only_other = set(shapes[rid]) - set(base)
            return Verdict(
                "space_isomorphism",
                False,
                {
                    "replicas": [rids[0], rid],
                    "only_first": [_fmt_oids(k) for k in sorted(only_base, key=sorted)],
                    "only_second": [_fmt_oids(k) for k in sorted(only_other, key=sorted)],
                },
            )
    return Verdict("space_isomorphism", True)


def _check_server_union(result: RunResult, jupiter_result: RunResult) -> Verdict:
    """The union of the server's per-client 2D spaces equals the n-ary
    server space, vertex for vertex and edge for edge."""
    if not (result.quiescent and jupiter_result.quiescent):
        return Verdict("server_union", True, {"vacuous": "run not quiescent"})
    css = result.css_final[0]
    union_vertices: Set[OidSet] = set()
    union_edges: Set[Tuple[OidSet, Oid, OidSet, Tuple]] = set()
    for snap in jupiter_result.cscw_server_final.values():
        union_vertices |= set(snap.vertices)
        union_edges |= _cscw_edge_set(snap)
    css_vertices = set(css.vertices)
    css_edges = _css_edge_set(css)
    if union_vertices != css_vertices or union_edges != css_edges:
        return Verdict(
            "server_union",
            False,
            {
                "vertices_only_union": [_fmt_oids(k) for k in sorted(union_vertices - css_vertices, key=sorted)],
                "vertices_only_css": [_fmt_oids(k) for k in sorted(css_vertices - union_vertices, key=sorted)],
                "edges_only_union": sorted(str(e[1].token()) for e in union_edges - css_edges),
                "edges_only_css": sorted(str(e[1].token()) for e in css_edges - union_edges),
            },
        )
    return Verdict("server_union", True)


def _check_client_subgraph(result: RunResult, jupiter_result: RunResult) -> Verdict:
    """Per replayed step, each client's 2D space is a subgraph of its
    n-ary space."""
    for cid, steps2d in sorted(jupiter_result.cscw_client_steps.items()):
        steps_nary = result.css_client_steps.get(cid, ())
        if len(steps2d) != len(steps_nary):
            return Verdict(
                "client_subgraph",
                False,
                {"client": cid, "steps_2d": len(steps2d), "steps_nary": len(steps_nary)},
            )
        for k, (snap2d, snap) in enumerate(zip(steps2d, steps_nary)):
            if not set(snap2d.vertices) <= set(snap.vertices):
                return Verdict(
                    "client_subgraph",
                    False,
                    {
                        "client": cid,
                        "step": k,
                        "extra_vertices": [
                            _fmt_oids(v) for v in sorted(set(snap2d.vertices) - set(snap.vertices), key=sorted)
                        ],
                    },
                )
            extra = _cscw_edge_set(snap2d) - _css_edge_set(snap)
            if extra:
                return Verdict(
                    "client_subgraph",
                    False,
                    {
                        "client": cid,
                        "step": k,
                        "extra_edges": sorted(e[1].token() for e in extra),
                    },
                )
    return Verdict("client_subgraph", True)
