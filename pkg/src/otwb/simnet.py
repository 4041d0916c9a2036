"""Deterministic discrete-event harness.

A Schedule fixes an execution completely: which client generates what, and
in which order the FIFO channels (or the broadcast) deliver. run() replays
a schedule under one protocol and records a Trace of do/send/receive
events with vector-time metadata. Identical inputs produce byte-identical
trace JSON.
"""

from __future__ import annotations

import collections
import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .css_space import CssSnapshot, Oid, ProtoOp, ProtocolError
from .jupiter_space import Snapshot2D
from .ot_core import ListOp, ListState, PriorityRule
from .protocols import SERVER_ID, CJClient, CJServer, DJReplica, JClient, JServer

SCHEDULE_FORMAT = 1
TRACE_FORMAT = 1
PRNG_NAME = "py-mt19937/v1"
BROADCAST = -1

GLYPH_POOL = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

PROTOCOLS = ("cjupiter", "jupiter", "djupiter")


class ScheduleError(ValueError):
    """A schedule that no run could execute: bad ids, dangling delivery,
    or a FIFO channel drawn below empty."""


@dataclass(frozen=True)
class OpSpec:
    kind: str  # "ins" | "del" | "read"
    glyph: Optional[str] = None
    pos: Optional[int] = None


@dataclass(frozen=True)
class GenerateStep:
    cid: int
    op: OpSpec


@dataclass(frozen=True)
class DeliverStep:
    to: int  # replica id, 0 = server
    frm: int


Step = Union[GenerateStep, DeliverStep]


@dataclass(frozen=True)
class Schedule:
    n_clients: int
    steps: Tuple[Step, ...]
    priority_rule: PriorityRule = PriorityRule.SMALLER_WINS
    prng: Optional[Tuple[str, int]] = None  # (generator name, seed)


def _replica_name(rid: int) -> str:
    return "server" if rid == SERVER_ID else f"c{rid}"


def _replica_id(name: str) -> int:
    if name == "server":
        return SERVER_ID
    if name.startswith("c") and name[1:].isdigit():
        return int(name[1:])
    raise ScheduleError(f"unknown replica name {name!r}")


def schedule_to_json(schedule: Schedule) -> str:
    steps = []
    for s in schedule.steps:
        if isinstance(s, GenerateStep):
            op: Dict[str, object] = {"kind": s.op.kind}
            if s.op.glyph is not None:
                op["glyph"] = s.op.glyph
            if s.op.pos is not None:
                op["pos"] = s.op.pos
            steps.append({"type": "generate", "cid": s.cid, "op": op})
        else:
            steps.append(
                {"type": "deliver", "to": _replica_name(s.to), "from": _replica_name(s.frm)}
            )
    doc = {
        "format": SCHEDULE_FORMAT,
        "n_clients": schedule.n_clients,
        "priority_rule": schedule.priority_rule.value,
        "steps": steps,
    }
    if schedule.prng is not None:
        doc["prng"] = list(schedule.prng)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def schedule_from_json(text: str) -> Schedule:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleError(f"schedule is not valid JSON: {exc}") from exc
    if doc.get("format") != SCHEDULE_FORMAT:
        raise ScheduleError(f"unsupported schedule format {doc.get('format')!r}")
    try:
        steps: List[Step] = []
        for raw in doc.get("steps", []):
            if raw.get("type") == "generate":
                op = raw.get("op", {})
                steps.append(
                    GenerateStep(raw["cid"], OpSpec(op["kind"], op.get("glyph"), op.get("pos")))
                )
            elif raw.get("type") == "deliver":
                steps.append(DeliverStep(_replica_id(raw["to"]), _replica_id(raw["from"])))
            else:
                raise ScheduleError(f"unknown step type {raw.get('type')!r}")
        rule = PriorityRule(doc.get("priority_rule", "smaller_wins"))
        prng = tuple(doc["prng"]) if "prng" in doc else None
        return Schedule(doc["n_clients"], tuple(steps), rule, prng)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScheduleError):
            raise
        raise ScheduleError(f"malformed schedule document: {exc}") from exc


def schedule_digest(schedule: Schedule) -> str:
    return hashlib.sha256(schedule_to_json(schedule).encode()).hexdigest()


def validate_schedule(schedule: Schedule, protocol: str) -> None:
    """Static well-formedness: every delivery has a matching earlier
    enqueue and channel consumption stays FIFO-feasible."""
    if protocol not in PROTOCOLS:
        raise ScheduleError(f"unknown protocol {protocol!r}")
    n = schedule.n_clients
    if n < 1:
        raise ScheduleError("need at least one client")
    if protocol == "djupiter":
        pending = {c: 0 for c in range(1, n + 1)}
        committed: List[int] = []  # origin cid per commit
        cursor = {c: 0 for c in range(1, n + 1)}
        for i, s in enumerate(schedule.steps):
            if isinstance(s, GenerateStep):
                _check_generate(s, n, i)
                if s.op.kind != "read":
                    pending[s.cid] += 1
            elif s.to == SERVER_ID:
                if not (1 <= s.frm <= n):
                    raise ScheduleError(f"step {i}: bad commit source c{s.frm}")
                if pending[s.frm] == 0:
                    raise ScheduleError(f"step {i}: commit from c{s.frm} with nothing pending")
                pending[s.frm] -= 1
                committed.append(s.frm)
            else:
                if not (1 <= s.to <= n) or s.frm != SERVER_ID:
                    raise ScheduleError(f"step {i}: bad delivery {s}")
                at = cursor[s.to]
                while at < len(committed) and committed[at] == s.to:
                    at += 1
                if at >= len(committed):
                    raise ScheduleError(
                        f"step {i}: delivery to c{s.to} with no committed operation left"
                    )
                cursor[s.to] = at + 1
        return
    up = {c: 0 for c in range(1, n + 1)}  # client -> server counts
    up_origin: Dict[int, collections.deque] = {c: collections.deque() for c in range(1, n + 1)}
    down = {c: 0 for c in range(1, n + 1)}  # server -> client counts
    for i, s in enumerate(schedule.steps):
        if isinstance(s, GenerateStep):
            _check_generate(s, n, i)
            if s.op.kind != "read":
                up[s.cid] += 1
                up_origin[s.cid].append(s.cid)
        elif s.to == SERVER_ID:
            if not (1 <= s.frm <= n):
                raise ScheduleError(f"step {i}: bad delivery source c{s.frm}")
            if up[s.frm] == 0:
                raise ScheduleError(f"step {i}: delivery to server from empty channel c{s.frm}")
            up[s.frm] -= 1
            origin = up_origin[s.frm].popleft()
            for c in range(1, n + 1):
                if c != origin:
                    down[c] += 1
        else:
            if not (1 <= s.to <= n) or s.frm != SERVER_ID:
                raise ScheduleError(f"step {i}: bad delivery {s}")
            if down[s.to] == 0:
                raise ScheduleError(f"step {i}: delivery to c{s.to} from empty server channel")
            down[s.to] -= 1


def _check_generate(s: GenerateStep, n: int, i: int) -> None:
    if not (1 <= s.cid <= n):
        raise ScheduleError(f"step {i}: generate at unknown client c{s.cid}")
    if s.op.kind not in ("ins", "del", "read"):
        raise ScheduleError(f"step {i}: unknown op kind {s.op.kind!r}")
    if s.op.kind == "ins" and s.op.pos is None:
        raise ScheduleError(f"step {i}: ins needs a position")
    if s.op.kind == "del" and s.op.pos is None:
        raise ScheduleError(f"step {i}: del needs a position")


# --------------------------------------------------------------------------
# Trace model


@dataclass(frozen=True)
class OpRecord:
    kind: str
    oid: Optional[str] = None
    element: Optional[Tuple[str, int, int]] = None
    pos: Optional[int] = None


@dataclass(frozen=True)
class TraceEvent:
    index: int
    replica: int
    kind: str  # "do" | "send" | "receive"
    vclock: Tuple[int, ...]
    op: Optional[OpRecord] = None
    value: Optional[Tuple[Tuple[str, int, int], ...]] = None
    msg_id: Optional[str] = None
    src: Optional[int] = None
    dst: Optional[int] = None
    ot_seq: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class Trace:
    protocol: str
    n_clients: int
    priority_rule: str
    schedule_sha256: str
    events: Tuple[TraceEvent, ...]
    prng: Optional[Tuple[str, int]] = None


def _value_tuple(state: ListState) -> Tuple[Tuple[str, int, int], ...]:
    return tuple((e.glyph, e.origin_cid, e.origin_seq) for e in state)


def _op_record_do(o: ListOp, oid: Oid) -> OpRecord:
    elem = None
    if o.element is not None:
        elem = (o.element.glyph, o.element.origin_cid, o.element.origin_seq)
    return OpRecord(o.kind.value, oid.token(), elem, o.position)


def _op_record_applied(incoming_oid: Oid, applied_o: ListOp) -> OpRecord:
    elem = None
    if applied_o.element is not None:
        elem = (applied_o.element.glyph, applied_o.element.origin_cid, applied_o.element.origin_seq)
    return OpRecord(applied_o.kind.value, incoming_oid.token(), elem, applied_o.position)


def trace_to_json(trace: Trace) -> str:
    events = []
    for e in trace.events:
        doc: Dict[str, object] = {
            "i": e.index,
            "replica": e.replica,
            "kind": e.kind,
            "vc": list(e.vclock),
        }
        if e.op is not None:
            op: Dict[str, object] = {"kind": e.op.kind}
            if e.op.oid is not None:
                op["oid"] = e.op.oid
            if e.op.element is not None:
                op["element"] = list(e.op.element)
            if e.op.pos is not None:
                op["pos"] = e.op.pos
            doc["op"] = op
        if e.value is not None:
            doc["value"] = [list(v) for v in e.value]
            doc["text"] = "".join(v[0] for v in e.value)
        if e.msg_id is not None:
            doc["msg"] = e.msg_id
        if e.src is not None:
            doc["src"] = _replica_name(e.src) if e.src != BROADCAST else "broadcast"
        if e.dst is not None:
            doc["dst"] = _replica_name(e.dst) if e.dst != BROADCAST else "broadcast"
        if e.ot_seq is not None:
            doc["ot_seq"] = list(e.ot_seq)
        events.append(doc)
    doc = {
        "format": TRACE_FORMAT,
        "protocol": trace.protocol,
        "n_clients": trace.n_clients,
        "priority_rule": trace.priority_rule,
        "schedule_sha256": trace.schedule_sha256,
        "prng": list(trace.prng) if trace.prng else None,
        "events": events,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def happens_before(trace: Trace) -> frozenset:
    """The causally-before relation on trace events, as index pairs.

    Every event increments its replica's own vector-clock component, so
    e1 causally precedes e2 exactly when vclock(e1) < vclock(e2).
    """
    pairs = set()
    events = trace.events
    for a in events:
        for b in events:
            if a.index != b.index and vc_less(a.vclock, b.vclock):
                pairs.add((a.index, b.index))
    return frozenset(pairs)


def vc_less(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def check_fifo(trace: Trace) -> None:
    """Per point-to-point channel, receive order must equal send order."""
    sent: Dict[Tuple[int, int], List[str]] = {}
    received: Dict[Tuple[int, int], List[str]] = {}
    for e in trace.events:
        if e.kind == "send":
            sent.setdefault((e.src, e.dst), []).append(e.msg_id)
        elif e.kind == "receive":
            received.setdefault((e.src, e.dst), []).append(e.msg_id)
    for chan, got in received.items():
        if BROADCAST in chan:
            continue
        want = sent.get(chan, [])[: len(got)]
        if got != want:
            raise ProtocolError(f"FIFO violation on channel {chan}: {got} vs {want}")


# --------------------------------------------------------------------------
# Broadcast service


class BroadcastService:
    """Causal atomic broadcast: submissions commit into one global sequence
    consistent with causal order; replicas consume it in commit order."""

    def __init__(self, n_clients: int):
        self.pending: Dict[int, collections.deque] = {
            c: collections.deque() for c in range(1, n_clients + 1)
        }
        self.committed: List[Tuple[str, ProtoOp, Tuple[int, ...]]] = []
        self.cursor: Dict[int, int] = {c: 0 for c in range(1, n_clients + 1)}

    def submit(self, cid: int, msg_id: str, op: ProtoOp, vc: Tuple[int, ...]) -> None:
        self.pending[cid].append((msg_id, op, vc))

    def commit_next(self, cid: int) -> Oid:
        if not self.pending[cid]:
            raise ScheduleError(f"nothing pending from c{cid} to commit")
        msg_id, op, vc = self.pending[cid].popleft()
        stamped = op.with_sctx(frozenset(o.oid for _, o, _ in self.committed))
        self.committed.append((msg_id, stamped, vc))
        return stamped.oid

    def deliver_next(self, rid: int) -> Tuple[str, ProtoOp, Tuple[int, ...]]:
        at = self.cursor[rid]
        while at < len(self.committed) and self.committed[at][1].oid.cid == rid:
            at += 1
        if at >= len(self.committed):
            raise ScheduleError(f"no committed operation left to deliver to c{rid}")
        self.cursor[rid] = at + 1
        return self.committed[at]


# --------------------------------------------------------------------------
# Engine


@dataclass
class RunResult:
    protocol: str
    schedule: Schedule
    trace: Trace
    final_values: Dict[int, Tuple[Tuple[str, int, int], ...]]
    arrival_log: Tuple[Oid, ...]
    quiescent: bool
    # cjupiter / djupiter artifacts
    css_final: Dict[int, CssSnapshot] = field(default_factory=dict)
    css_server_steps: Tuple[CssSnapshot, ...] = ()
    css_client_steps: Dict[int, Tuple[CssSnapshot, ...]] = field(default_factory=dict)
    # jupiter artifacts
    cscw_client_final: Dict[int, Snapshot2D] = field(default_factory=dict)
    cscw_server_final: Dict[int, Snapshot2D] = field(default_factory=dict)
    cscw_client_steps: Dict[int, Tuple[Snapshot2D, ...]] = field(default_factory=dict)


class _Recorder:
    def __init__(self, n_clients: int):
        self.n = n_clients
        self.events: List[TraceEvent] = []
        self.vcs = {r: [0] * (n_clients + 1) for r in range(0, n_clients + 1)}
        self.msg_counter = 0

    def _tick(self, rid: int) -> Tuple[int, ...]:
        self.vcs[rid][rid] += 1
        return tuple(self.vcs[rid])

    def next_msg_id(self) -> str:
        self.msg_counter += 1
        return f"m{self.msg_counter}"

    def do(self, rid, op_record, value) -> None:
        self.events.append(
            TraceEvent(len(self.events), rid, "do", self._tick(rid), op=op_record, value=value)
        )

    def send(self, rid, msg_id, dst) -> Tuple[int, ...]:
        vc = self._tick(rid)
        self.events.append(
            TraceEvent(len(self.events), rid, "send", vc, msg_id=msg_id, src=rid, dst=dst)
        )
        return vc

    def receive(self, rid, msg_id, src, msg_vc, op_record, value, ot_seq) -> None:
        own = self.vcs[rid]
        for i, x in enumerate(msg_vc):
            own[i] = max(own[i], x)
        vc = self._tick(rid)
        self.events.append(
            TraceEvent(
                len(self.events),
                rid,
                "receive",
                vc,
                op=op_record,
                value=value,
                msg_id=msg_id,
                src=src,
                dst=rid,
                ot_seq=ot_seq,
            )
        )


def _build_listop(client, spec: OpSpec, glyph_counter: List[int]) -> ListOp:
    if spec.kind == "ins":
        glyph = spec.glyph
        if glyph is None:
            glyph = GLYPH_POOL[glyph_counter[0] % len(GLYPH_POOL)]
            glyph_counter[0] += 1
        return client.make_ins(glyph, spec.pos)
    return client.make_del(spec.pos)


def run(protocol: str, schedule: Schedule, record_snapshots: bool = True) -> RunResult:
    """Replay a schedule under a protocol; deterministic in its arguments."""
    validate_schedule(schedule, protocol)
    if protocol == "djupiter":
        return _run_djupiter(schedule, record_snapshots)
    return _run_client_server(protocol, schedule, record_snapshots)


def _run_client_server(protocol: str, schedule: Schedule, record_snapshots: bool) -> RunResult:
    n = schedule.n_clients
    rule = schedule.priority_rule
    rec = _Recorder(n)
    glyph_counter = [0]
    if protocol == "cjupiter":
        server = CJServer(n)
        clients = {c: CJClient(c, rule) for c in range(1, n + 1)}
    else:
        server = JServer(n)
        clients = {c: JClient(c, rule) for c in range(1, n + 1)}
    channels: Dict[Tuple[int, int], collections.deque] = collections.defaultdict(collections.deque)

    css_server_steps: List[CssSnapshot] = []
    client_steps: Dict[int, list] = {c: [] for c in range(1, n + 1)}
    if record_snapshots:
        for c, cl in clients.items():
            client_steps[c].append(cl.space.snapshot())
        if protocol == "cjupiter":
            css_server_steps.append(server.space.snapshot())

    for step in schedule.steps:
        if isinstance(step, GenerateStep):
            client = clients[step.cid]
            if step.op.kind == "read":
                value = client.read()
                rec.do(step.cid, OpRecord("read"), _value_tuple(value))
                continue
            o = _build_listop(client, step.op, glyph_counter)
            result = client.do(o)
            op = result.message
            rec.do(step.cid, _op_record_do(op.o, op.oid), _value_tuple(result.value))
            msg_id = rec.next_msg_id()
            vc = rec.send(step.cid, msg_id, SERVER_ID)
            channels[(step.cid, SERVER_ID)].append((msg_id, op, vc))
            if record_snapshots:
                client_steps[step.cid].append(client.space.snapshot())
        elif step.to == SERVER_ID:
            msg_id, op, vc = channels[(step.frm, SERVER_ID)].popleft()
            result = server.receive(op)
            rec.receive(
                SERVER_ID,
                msg_id,
                step.frm,
                vc,
                _op_record_applied(op.oid, result.applied.o),
                _value_tuple(result.value),
                tuple(o.token() for o in result.ot_seq),
            )
            for dst, payload in result.fanout:
                out_id = rec.next_msg_id()
                out_vc = rec.send(SERVER_ID, out_id, dst)
                channels[(SERVER_ID, dst)].append((out_id, payload, out_vc))
            if record_snapshots and protocol == "cjupiter":
                css_server_steps.append(server.space.snapshot())
        else:
            msg_id, op, vc = channels[(SERVER_ID, step.to)].popleft()
            client = clients[step.to]
            result = client.receive(op)
            rec.receive(
                step.to,
                msg_id,
                SERVER_ID,
                vc,
                _op_record_applied(op.oid, result.applied.o),
                _value_tuple(result.value),
                tuple(o.token() for o in result.ot_seq),
            )
            if record_snapshots:
                client_steps[step.to].append(client.space.snapshot())

    trace = Trace(
        protocol=protocol,
        n_clients=n,
        priority_rule=rule.value,
        schedule_sha256=schedule_digest(schedule),
        events=tuple(rec.events),
        prng=schedule.prng,
    )
    quiescent = not any(channels[k] for k in channels)
    final_values = {SERVER_ID: _value_tuple(server.state)}
    for c, cl in clients.items():
        final_values[c] = _value_tuple(cl.state)
    result = RunResult(
        protocol=protocol,
        schedule=schedule,
        trace=trace,
        final_values=final_values,
        arrival_log=tuple(server.arrival_log),
        quiescent=quiescent,
    )
    if protocol == "cjupiter":
        result.css_final = {SERVER_ID: server.space.snapshot()}
        for c, cl in clients.items():
            result.css_final[c] = cl.space.snapshot()
        result.css_server_steps = tuple(css_server_steps)
        result.css_client_steps = {c: tuple(v) for c, v in client_steps.items()}
    else:
        result.cscw_client_final = {c: cl.space.snapshot() for c, cl in clients.items()}
        result.cscw_server_final = {c: s.snapshot() for c, s in server.spaces.items()}
        result.cscw_client_steps = {c: tuple(v) for c, v in client_steps.items()}
    return result


def _run_djupiter(schedule: Schedule, record_snapshots: bool) -> RunResult:
    n = schedule.n_clients
    rec = _Recorder(n)
    glyph_counter = [0]
    replicas = {c: DJReplica(c, schedule.priority_rule) for c in range(1, n + 1)}
    service = BroadcastService(n)
    client_steps: Dict[int, list] = {c: [] for c in range(1, n + 1)}
    if record_snapshots:
        for c, r in replicas.items():
            client_steps[c].append(r.space.snapshot())
    arrival: List[Oid] = []

    for step in schedule.steps:
        if isinstance(step, GenerateStep):
            replica = replicas[step.cid]
            if step.op.kind == "read":
                value = replica.read()
                rec.do(step.cid, OpRecord("read"), _value_tuple(value))
                continue
            o = _build_listop(replica, step.op, glyph_counter)
            result = replica.generate(o)
            op = result.message
            rec.do(step.cid, _op_record_do(op.o, op.oid), _value_tuple(result.value))
            msg_id = rec.next_msg_id()
            vc = rec.send(step.cid, msg_id, BROADCAST)
            service.submit(step.cid, msg_id, op, vc)
            if record_snapshots:
                client_steps[step.cid].append(replica.space.snapshot())
        elif step.to == SERVER_ID:
            arrival.append(service.commit_next(step.frm))
        else:
            msg_id, op, vc = service.deliver_next(step.to)
            replica = replicas[step.to]
            result = replica.deliver(op)
            rec.receive(
                step.to,
                msg_id,
                BROADCAST,
                vc,
                _op_record_applied(op.oid, result.applied.o),
                _value_tuple(result.value),
                tuple(o.token() for o in result.ot_seq),
            )
            if record_snapshots:
                client_steps[step.to].append(replica.space.snapshot())

    trace = Trace(
        protocol="djupiter",
        n_clients=n,
        priority_rule=schedule.priority_rule.value,
        schedule_sha256=schedule_digest(schedule),
        events=tuple(rec.events),
        prng=schedule.prng,
    )
    quiescent = all(not q for q in service.pending.values()) and all(
        not _has_foreign_commit(service, c) for c in replicas
    )
    result = RunResult(
        protocol="djupiter",
        schedule=schedule,
        trace=trace,
        final_values={c: _value_tuple(r.state) for c, r in replicas.items()},
        arrival_log=tuple(arrival),
        quiescent=quiescent,
    )
    result.css_final = {c: r.space.snapshot() for c, r in replicas.items()}
    result.css_client_steps = {c: tuple(v) for c, v in client_steps.items()}
    return result


def _has_foreign_commit(service: BroadcastService, rid: int) -> bool:
    return any(
        entry[1].oid.cid != rid for entry in service.committed[service.cursor[rid] :]
    )


# --------------------------------------------------------------------------
# Schedule generation


def random_schedule(
    n_clients: int,
    n_updates: int,
    seed: int,
    priority_rule: PriorityRule = PriorityRule.SMALLER_WINS,
    read_probability: float = 0.15,
) -> Schedule:
    """Seeded-deterministic schedule: updates with in-range positions,
    arbitrary FIFO-respecting interleaving, full drain, and final reads.

    A live replay tracks every client's actual list so deletion positions
    always target an existing element.
    """
    if n_clients < 1:
        raise ScheduleError("need at least one client")
    if n_updates < 0:
        raise ScheduleError("updates cannot be negative")
    rng = random.Random(seed)
    steps: List[Step] = []
    clients = {c: CJClient(c, priority_rule) for c in range(1, n_clients + 1)}
    server = CJServer(n_clients)
    up: Dict[int, collections.deque] = {c: collections.deque() for c in range(1, n_clients + 1)}
    down: Dict[int, collections.deque] = {c: collections.deque() for c in range(1, n_clients + 1)}
    generated = 0
    glyphs = 0

    def deliverables() -> List[Step]:
        acts: List[Step] = []
        for c in range(1, n_clients + 1):
            if up[c]:
                acts.append(DeliverStep(SERVER_ID, c))
            if down[c]:
                acts.append(DeliverStep(c, SERVER_ID))
        return acts

    while True:
        actions: List[object] = deliverables()
        if generated < n_updates:
            actions += ["generate", "generate"]
        if not actions:
            break
        if rng.random() < read_probability:
            steps.append(GenerateStep(rng.randint(1, n_clients), OpSpec("read")))
        act = rng.choice(actions)
        if act == "generate":
            cid = rng.randint(1, n_clients)
            client = clients[cid]
            length = len(client.state)
            if length > 0 and rng.random() < 0.4:
                spec = OpSpec("del", pos=rng.randint(0, length - 1))
            else:
                spec = OpSpec("ins", glyph=GLYPH_POOL[glyphs % len(GLYPH_POOL)], pos=rng.randint(0, length))
                glyphs += 1
            steps.append(GenerateStep(cid, spec))
            op = _build_listop(client, spec, [0])
            up[cid].append(client.do(op).message)
            generated += 1
        else:
            steps.append(act)
            if act.to == SERVER_ID:
                result = server.receive(up[act.frm].popleft())
                for dst, payload in result.fanout:
                    down[dst].append(payload)
            else:
                clients[act.to].receive(down[act.to].popleft())

    for c in range(1, n_clients + 1):
        steps.append(GenerateStep(c, OpSpec("read")))
    return Schedule(n_clients, tuple(steps), priority_rule, prng=(PRNG_NAME, seed))


def podc16_schedule(priority_rule: PriorityRule = PriorityRule.SMALLER_WINS) -> Schedule:
    """The golden four-operation scenario: one insert seen everywhere, then
    three concurrent updates serialized by the server in a fixed order."""
    steps: Tuple[Step, ...] = (
        GenerateStep(1, OpSpec("ins", glyph="x", pos=0)),  # o1
        DeliverStep(SERVER_ID, 1),
        DeliverStep(2, SERVER_ID),
        DeliverStep(3, SERVER_ID),
        GenerateStep(1, OpSpec("del", pos=0)),  # o2
        GenerateStep(2, OpSpec("ins", glyph="a", pos=0)),  # o3
        GenerateStep(3, OpSpec("ins", glyph="b", pos=1)),  # o4
        DeliverStep(SERVER_ID, 1),
        DeliverStep(SERVER_ID, 2),
        DeliverStep(SERVER_ID, 3),
        DeliverStep(2, SERVER_ID),  # o2 at c2
        DeliverStep(3, SERVER_ID),  # o2 at c3
        DeliverStep(1, SERVER_ID),  # o3 at c1
        DeliverStep(2, SERVER_ID),  # o4 at c2
        DeliverStep(3, SERVER_ID),  # o3 at c3
        DeliverStep(1, SERVER_ID),  # o4 at c1
        GenerateStep(1, OpSpec("read")),
        GenerateStep(2, OpSpec("read")),
        GenerateStep(3, OpSpec("read")),
    )
    return Schedule(3, steps, priority_rule)


def empty_schedule(n_clients: int = 1) -> Schedule:
    return Schedule(n_clients, ())
