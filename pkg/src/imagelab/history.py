"""Undo/redo history: a bounded stack of pipeline state snapshots.

The current state is the top of the undo stack; it always exists (a fresh
history holds one empty-pipeline snapshot). Any new edit clears the redo
stack. Snapshots share image buffers, which are immutable, so keeping many
of them is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from .blocks import Block
from .engine import Pipeline, PipelineState, carry_outputs, pipeline_to_doc
from .errors import EmptyStackError
from .rules import RuleViolation, tail_state, validate_append


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Snapshot:
    state: PipelineState
    timestamp: str


class HistoryStack:
    def __init__(self, capacity: int = 100):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._undo: list[Snapshot] = [Snapshot(PipelineState(), _now())]
        self._redo: list[Snapshot] = []

    @property
    def current(self) -> PipelineState:
        return self._undo[-1].state

    @property
    def undo_depth(self) -> int:
        return len(self._undo)

    @property
    def redo_depth(self) -> int:
        return len(self._redo)

    def can_undo(self) -> bool:
        return len(self._undo) > 1

    def can_redo(self) -> bool:
        return bool(self._redo)

    def push(self, state: PipelineState) -> None:
        """Record a new edit; clears the redo stack, trims to capacity."""
        self._undo.append(Snapshot(state, _now()))
        self._redo.clear()
        while len(self._undo) > self.capacity:
            del self._undo[0]

    def replace_current(self, state: PipelineState) -> None:
        """Swap in freshly computed outputs; not an edit (keeps timestamps)."""
        if state.pipeline is not self.current.pipeline and state.pipeline != self.current.pipeline:
            raise ValueError("replace_current must keep the same pipeline")
        self._undo[-1].state = state

    def undo(self) -> PipelineState:
        if not self.can_undo():
            raise EmptyStackError("nothing to undo")
        self._redo.append(self._undo.pop())
        return self.current

    def redo(self) -> PipelineState:
        if not self.can_redo():
            raise EmptyStackError("nothing to redo")
        self._undo.append(self._redo.pop())
        return self.current

    def clear_outputs(self) -> None:
        """Drop every cached stage output (e.g. after a new source upload)."""
        for snap in self._undo + self._redo:
            snap.state = PipelineState(snap.state.pipeline, ())

    def export(self) -> dict:
        """Chronological record of every state on the undo path."""
        return {
            "version": 1,
            "snapshots": [
                {"timestamp": snap.timestamp, "pipeline": pipeline_to_doc(snap.state.pipeline)}
                for snap in self._undo
            ],
        }


def append_block(history: HistoryStack, block: Block) -> RuleViolation | None:
    """Validate-then-push: on success the new state becomes current.

    Returns the violation (history untouched) when the block is rejected.
    """
    current = history.current
    blocks = list(current.pipeline.blocks)
    violation = validate_append(blocks, tail_state(blocks), block)
    if violation is not None:
        return violation
    pipeline = Pipeline(current.pipeline.blocks + (block,))
    history.push(carry_outputs(current, pipeline))
    return None
