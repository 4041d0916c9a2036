"""Single-element list editing: elements, operations, application, and the
pairwise transformation functions used to reconcile concurrent edits.

Operations are immutable values and every function here is pure, so the
module is safe for concurrent use from any number of threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Tuple


class OpKind(enum.Enum):
    INS = "ins"
    DEL = "del"
    READ = "read"
    NOP = "nop"


class PriorityRule(enum.Enum):
    """Tie-break convention for concurrent inserts at the same position.

    SMALLER_WINS: the client with the smaller id has the higher priority
    (the default). LARGER_WINS flips the convention.
    """

    SMALLER_WINS = "smaller_wins"
    LARGER_WINS = "larger_wins"


@dataclass(frozen=True)
class Element:
    """A list element: a printable glyph tagged with its origin.

    (origin_cid, origin_seq) must be globally unique within an execution;
    the glyph itself may repeat.
    """

    glyph: str
    origin_cid: int
    origin_seq: int

    def token(self) -> str:
        return f"{self.glyph}@{self.origin_cid}:{self.origin_seq}"


@dataclass(frozen=True)
class Priority:
    """Total-orderable conflict-resolution token derived from a client id.

    Two priorities compare equal only if they come from the same client.
    """

    cid: int
    rule: PriorityRule = PriorityRule.SMALLER_WINS

    def beats(self, other: "Priority") -> bool:
        """True iff self is strictly higher priority than other."""
        if self.rule is not other.rule:
            raise ValueError("cannot compare priorities under different rules")
        if self.rule is PriorityRule.SMALLER_WINS:
            return self.cid < other.cid
        return self.cid > other.cid


def priority_of(cid: int, rule: PriorityRule = PriorityRule.SMALLER_WINS) -> Priority:
    if cid < 1:
        raise ValueError(f"client id must be >= 1, got {cid}")
    return Priority(cid, rule)


@dataclass(frozen=True)
class ListOp:
    """One list operation: Ins, Del, Read, or Nop.

    Ins carries the inserted element; Del records the element it deleted,
    filled in by the generating replica (None until then). Read and Nop
    carry no payload at all.
    """

    kind: OpKind
    element: Optional[Element] = None
    position: Optional[int] = None
    priority: Optional[Priority] = None

    def __post_init__(self) -> None:
        if self.kind in (OpKind.READ, OpKind.NOP):
            if self.element is not None or self.position is not None or self.priority is not None:
                raise ValueError(f"{self.kind.value} carries no element, position, or priority")
        else:
            if self.position is None or self.position < 0:
                raise ValueError(f"{self.kind.value} needs a non-negative position")
            if self.priority is None:
                raise ValueError(f"{self.kind.value} needs a priority")
            if self.kind is OpKind.INS and self.element is None:
                raise ValueError("ins needs an element")

    @classmethod
    def ins(cls, element: Element, position: int, priority: Priority) -> "ListOp":
        return cls(OpKind.INS, element, position, priority)

    @classmethod
    def del_(cls, position: int, priority: Priority, element: Optional[Element] = None) -> "ListOp":
        return cls(OpKind.DEL, element, position, priority)

    @classmethod
    def read(cls) -> "ListOp":
        return cls(OpKind.READ)

    @classmethod
    def nop(cls) -> "ListOp":
        return cls(OpKind.NOP)

    def is_update(self) -> bool:
        return self.kind in (OpKind.INS, OpKind.DEL)

    def with_element(self, element: Element) -> "ListOp":
        return replace(self, element=element)

    def sig(self) -> str:
        """Short human-readable signature, e.g. Ins(x,0) or Del(_,3)."""
        if self.kind is OpKind.INS:
            return f"Ins({self.element.glyph},{self.position})"
        if self.kind is OpKind.DEL:
            glyph = self.element.glyph if self.element is not None else "_"
            return f"Del({glyph},{self.position})"
        return self.kind.value.capitalize()


ListState = Tuple[Element, ...]
ListValue = Tuple[Element, ...]

EMPTY_STATE: ListState = ()


def to_text(state: ListState) -> str:
    return "".join(e.glyph for e in state)


def apply(state: ListState, o: ListOp) -> Tuple[ListState, ListValue]:
    """Apply one operation to a list state, returning (new state, contents).

    Out-of-range positions are legal: Ins clamps to the end, Del to the
    last element. Del on an empty list does nothing.
    """
    if o.kind in (OpKind.READ, OpKind.NOP):
        return state, state
    if o.kind is OpKind.INS:
        for existing in state:
            if (existing.origin_cid, existing.origin_seq) == (o.element.origin_cid, o.element.origin_seq):
                raise ValueError(f"duplicate element {o.element.token()}")
        p = min(o.position, len(state))
        new = state[:p] + (o.element,) + state[p:]
        return new, new
    # Del
    if not state:
        return state, state
    p = min(o.position, len(state) - 1)
    new = state[:p] + state[p + 1 :]
    return new, new


def transform(o1: ListOp, o2: ListOp) -> ListOp:
    """Transform o1 against a concurrent o2, returning o1'.

    Nop absorbs: transform(Nop, _) = Nop and transform(o, Nop) = o. Read
    is local-only and never transforms. An Ins/Del keeps its kind and
    element and only moves position, except two deletions of the same
    position, where o1 degenerates to Nop.
    """
    if o1.kind is OpKind.READ or o2.kind is OpKind.READ:
        raise ValueError("read operations do not transform")
    if o1.kind is OpKind.NOP:
        return o1
    if o2.kind is OpKind.NOP:
        return o1

    p1, p2 = o1.position, o2.position
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if p1 < p2:
            return o1
        if p1 > p2:
            return replace(o1, position=p1 + 1)
        if o1.priority.beats(o2.priority):
            return replace(o1, position=p1 + 1)
        return o1
    if o1.kind is OpKind.INS and o2.kind is OpKind.DEL:
        if p1 <= p2:
            return o1
        return replace(o1, position=p1 - 1)
    if o1.kind is OpKind.DEL and o2.kind is OpKind.INS:
        if p1 < p2:
            return o1
        return replace(o1, position=p1 + 1)
    # Del against Del
    if p1 < p2:
        return o1
    if p1 > p2:
        return replace(o1, position=p1 - 1)
    return ListOp.nop()


def applicable(o: ListOp, state: ListState) -> bool:
    """True iff o's position targets state without clamping.

    Convergence of a transformed pair is only guaranteed for operations
    generated against the state they apply to; clamped positions fall
    outside that contract.
    """
    if o.kind is OpKind.INS:
        return o.position <= len(state)
    if o.kind is OpKind.DEL:
        return o.position < len(state)
    return True


def check_cp1(o1: ListOp, o2: ListOp, state: ListState) -> bool:
    """True iff applying o1 then o2' equals applying o2 then o1' on state."""
    left, _ = apply(apply(state, o1)[0], transform(o2, o1))
    right, _ = apply(apply(state, o2)[0], transform(o1, o2))
    return left == right
