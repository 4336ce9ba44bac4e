"""Focus-space stack engine.

The discourse segment currently under construction is represented by a
focus space; open spaces live on a pushdown stack, with the most recent
segment on top.  Four composite operations move the stack:

* ``Initiate``  - one push (open a new segment),
* ``Retain``    - no push, no pop (stay in the current segment),
* ``Return``    - one or more pops (re-enter an earlier open segment),
* ``Replace``   - one or more pops followed by one push.

An operation may pop several spaces but never pushes more than one.
Replaying a trace of operations reconstructs the hierarchical segment
structure of the discourse: each pushed space becomes a tree node whose
parent is the space directly beneath it at push time.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence, Union

from .jsonl import SCHEMA_VERSION, SchemaError, field, iter_jsonl, write_jsonl


class FocusEngineError(Exception):
    """Base class for stack-engine failures."""


class UnderflowError(FocusEngineError):
    """An operation asked to pop more spaces than the stack holds."""


class EmptyStackError(FocusEngineError):
    """Retain or Return was applied to an empty stack."""


class MalformedOperation(FocusEngineError):
    """An operation violates the kind/pop_count well-formedness rules."""


class OpKind(str, enum.Enum):
    INITIATE = "Initiate"
    RETAIN = "Retain"
    RETURN = "Return"
    REPLACE = "Replace"


#: Cheapest-first preference used by downstream classifiers to break ties.
TIE_ORDER = {OpKind.RETAIN: 0, OpKind.INITIATE: 1, OpKind.RETURN: 2, OpKind.REPLACE: 3}


@dataclass(frozen=True)
class FocusingOperation:
    """One focusing operation with an explicit pop count.

    Initiate and Retain never pop; Return and Replace pop at least once.
    """

    kind: OpKind
    pop_count: int = 0

    def validate(self) -> None:
        if not isinstance(self.kind, OpKind):
            raise MalformedOperation(f"unknown operation kind {self.kind!r}")
        if self.kind in (OpKind.INITIATE, OpKind.RETAIN):
            if self.pop_count != 0:
                raise MalformedOperation(f"{self.kind.value} must have pop_count 0, "
                                         f"got {self.pop_count}")
        elif self.pop_count < 1:
            raise MalformedOperation(f"{self.kind.value} must have pop_count >= 1, "
                                     f"got {self.pop_count}")

    @property
    def pushes(self) -> int:
        return 1 if self.kind in (OpKind.INITIATE, OpKind.REPLACE) else 0


@dataclass(frozen=True)
class FocusSpace:
    """One discourse segment's attentional record.

    closed_at is the fragment index at which the space was popped; it stays
    None for spaces still open when the trace ends.  Implicit discourse-final
    closure is reported, never fabricated.
    """

    id: int
    dsp_label: str = ""
    opened_at: int = 0
    closed_at: int | None = None

    def __post_init__(self) -> None:
        if self.closed_at is not None and self.closed_at <= self.opened_at:
            raise MalformedOperation(
                f"space {self.id}: closed_at {self.closed_at} must exceed "
                f"opened_at {self.opened_at}")


@dataclass(frozen=True)
class HistoryEntry:
    """Audit record for one applied operation.

    Retain entries record the id of the space that stayed on top so that
    later bookkeeping can attribute fragments to segments.  Popped spaces
    are stored with their closed_at already set.
    """

    fragment_index: int
    operation: FocusingOperation
    pushed: FocusSpace | None
    popped: tuple[FocusSpace, ...]
    top_id: int | None


@dataclass(frozen=True)
class FocusStack:
    """Immutable stack state: bottom-to-top spaces plus an append-only history."""

    spaces: tuple[FocusSpace, ...] = ()
    history: tuple[HistoryEntry, ...] = ()
    next_id: int = 0

    @classmethod
    def empty(cls) -> "FocusStack":
        return cls()

    @property
    def depth(self) -> int:
        return len(self.spaces)

    @property
    def top(self) -> FocusSpace | None:
        return self.spaces[-1] if self.spaces else None


def apply(stack: FocusStack, op: FocusingOperation, fragment_index: int,
          label: str = "") -> FocusStack:
    """Apply one focusing operation, returning the new stack state.

    Popped spaces are closed at ``fragment_index``.  The input stack is
    never mutated, so callers can keep earlier states for auditing.

    Raises MalformedOperation for ill-formed operations, EmptyStackError for
    Retain/Return on an empty stack, and UnderflowError when pop_count
    exceeds the current depth.
    """
    op.validate()
    if op.kind in (OpKind.RETAIN, OpKind.RETURN) and not stack.spaces:
        raise EmptyStackError(f"{op.kind.value} requires a nonempty stack")
    if op.pop_count > stack.depth:
        raise UnderflowError(f"{op.kind.value} pops {op.pop_count} but depth is {stack.depth}")

    spaces = list(stack.spaces)
    popped: list[FocusSpace] = []
    for _ in range(op.pop_count):
        popped.append(dataclasses.replace(spaces.pop(), closed_at=fragment_index))

    pushed: FocusSpace | None = None
    next_id = stack.next_id
    if op.pushes:
        pushed = FocusSpace(id=next_id, dsp_label=label, opened_at=fragment_index)
        spaces.append(pushed)
        next_id += 1

    top_id = spaces[-1].id if spaces else None
    entry = HistoryEntry(fragment_index=fragment_index, operation=op,
                         pushed=pushed, popped=tuple(popped), top_id=top_id)
    return FocusStack(spaces=tuple(spaces), history=stack.history + (entry,),
                      next_id=next_id)


def segments_affected(op: FocusingOperation) -> int:
    """Number of segments opened or closed by one operation (pops + pushes)."""
    op.validate()
    return op.pop_count + op.pushes


@dataclass(frozen=True)
class LinguisticTree:
    """Hierarchical segment structure recovered from an operation trace.

    nodes maps space id to its final state (closed_at set if it was popped);
    parent links each pushed space to the space directly beneath it at push
    time, absent for top-level segments.  depths holds the embedding depth
    at push (1 = top level).  open_ids lists spaces still open at trace end,
    bottom to top.  op_affected mirrors the trace: segments opened or closed
    by each operation.
    """

    nodes: dict[int, FocusSpace]
    parent: dict[int, int]
    depths: dict[int, int]
    order: tuple[int, ...]
    open_ids: tuple[int, ...]
    op_affected: tuple[int, ...]

    def depth(self, node_id: int) -> int:
        return self.depths[node_id]

    def children(self, node_id: int) -> tuple[int, ...]:
        kids = [nid for nid in self.order if self.parent.get(nid) == node_id]
        return tuple(kids)

    def roots(self) -> tuple[int, ...]:
        return tuple(nid for nid in self.order if nid not in self.parent)

    def render(self) -> str:
        """Indented text rendering, one segment per line, indent = depth."""
        lines = []
        for nid in self.order:
            node = self.nodes[nid]
            indent = "  " * (self.depths[nid] - 1)
            closed = "open" if node.closed_at is None else f"closed {node.closed_at}"
            label = node.dsp_label or f"segment-{nid}"
            lines.append(f"{indent}[{nid}] {label} (opened {node.opened_at}, {closed})")
        return "\n".join(lines)


Trace = Sequence[tuple[FocusingOperation, int]]


def build_tree(trace: Trace) -> LinguisticTree:
    """Replay a trace from an empty stack and build the segment tree.

    The first operation must be an Initiate.  Engine errors raised while
    replaying are re-raised with the offending trace index in the message.
    Residual open spaces are reported via ``open_ids``; nothing is popped
    on the caller's behalf.
    """
    if not trace:
        raise MalformedOperation("trace is empty")
    first_op = trace[0][0]
    if first_op.kind is not OpKind.INITIATE:
        raise MalformedOperation(f"trace index 0: first operation must be Initiate, "
                                 f"got {first_op.kind.value}")

    stack = FocusStack.empty()
    nodes: dict[int, FocusSpace] = {}
    parent: dict[int, int] = {}
    depths: dict[int, int] = {}
    for idx, (op, fragment_index) in enumerate(trace):
        try:
            stack = apply(stack, op, fragment_index)
        except FocusEngineError as exc:
            raise type(exc)(f"trace index {idx}: {exc}") from exc
        entry = stack.history[-1]
        for space in entry.popped:
            nodes[space.id] = space
        if entry.pushed is not None:
            pushed = entry.pushed
            nodes[pushed.id] = pushed
            if stack.depth >= 2:
                parent[pushed.id] = stack.spaces[-2].id
            depths[pushed.id] = stack.depth

    for space in stack.spaces:
        nodes[space.id] = space
    order = tuple(sorted(nodes, key=lambda nid: (nodes[nid].opened_at, nid)))
    open_ids = tuple(space.id for space in stack.spaces)
    affected = tuple(segments_affected(op) for op, _ in trace)
    return LinguisticTree(nodes=nodes, parent=parent, depths=depths, order=order,
                          open_ids=open_ids, op_affected=affected)


# ---------------------------------------------------------------------------
# Trace serialization: {"index": int, "kind": "...", "pops": int} per line.
# ---------------------------------------------------------------------------

def trace_to_rows(trace: Trace) -> list[dict]:
    return [{"schema_version": SCHEMA_VERSION, "index": idx,
             "kind": op.kind.value, "pops": op.pop_count}
            for op, idx in trace]


def write_trace(target: Union[str, Path, IO[str]], trace: Trace) -> None:
    write_jsonl(target, trace_to_rows(trace))


def read_trace(path: str | Path) -> list[tuple[FocusingOperation, int]]:
    trace: list[tuple[FocusingOperation, int]] = []
    for lineno, obj in iter_jsonl(path):
        kind_name = field(obj, "kind", str, line=lineno, path=str(path))
        try:
            kind = OpKind(kind_name)
        except ValueError:
            raise SchemaError(f"unknown operation kind {kind_name!r}",
                              line=lineno, path=str(path)) from None
        pops = field(obj, "pops", int, line=lineno, path=str(path), optional=True, default=0)
        index = field(obj, "index", int, line=lineno, path=str(path))
        op = FocusingOperation(kind, pops)
        try:
            op.validate()
        except MalformedOperation as exc:
            raise SchemaError(str(exc), line=lineno, path=str(path)) from exc
        trace.append((op, index))
    return trace
