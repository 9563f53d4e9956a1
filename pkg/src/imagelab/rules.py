"""The rule engine: validates block sequences by simulating abstract state.

Rules are table entries, not code branches: each entry owns one violation
code and a check over the pipeline. ``validate`` runs the whole table and
returns every violation; ``validate_append`` is the O(1) incremental form
used while editing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .blocks import ANY_IMAGE, BINARY, COLOR, DATA_PRODUCT, GRAY, NONE, PASS_THROUGH, Block, spec_for

EMPTY = "EMPTY"


@dataclass(frozen=True)
class FormatState:
    """Abstract content tracked through validation."""

    format: str = EMPTY  # EMPTY | COLOR | GRAY | BINARY
    contours_available: bool = False


@dataclass(frozen=True)
class RuleViolation:
    rule: str
    code: str  # NO_SOURCE | SOURCE_NOT_FIRST | DUPLICATE_CONSECUTIVE | FORMAT_MISMATCH | PARAM_INVALID
    block_index: int  # -1 for pipeline-level violations
    message: str

    def as_dict(self) -> dict:
        return {
            "rule": self.rule,
            "code": self.code,
            "block_index": self.block_index,
            "message": self.message,
        }


def advance(state: FormatState, op: str) -> FormatState:
    """Abstract format after the block runs (assuming it was accepted)."""
    spec = spec_for(op)
    if spec.is_source:
        return replace(state, format=COLOR)
    if spec.output_format in (PASS_THROUGH, DATA_PRODUCT):
        if op == "FIND_CONTOURS":
            return replace(state, contours_available=True)
        return state
    return replace(state, format=spec.output_format)


def _input_satisfied(state: FormatState, requirement: str) -> bool:
    if requirement == NONE:
        return True
    if requirement == ANY_IMAGE:
        return state.format in (COLOR, GRAY, BINARY)
    if requirement == GRAY:
        return state.format in (GRAY, BINARY)
    return state.format == BINARY  # requirement == BINARY


def _format_problem(state: FormatState, op: str) -> str | None:
    spec = spec_for(op)
    if not _input_satisfied(state, spec.input_format):
        return f"{op} needs {spec.input_format} input, have {state.format}"
    if spec.requires_contours and not state.contours_available:
        return f"{op} needs contours from a preceding FIND_CONTOURS block"
    return None


# --- rule table -------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    rule_id: str
    code: str
    description: str
    check: Callable[[list[Block]], Iterable[RuleViolation]] = field(repr=False)


def _check_source_present(blocks):
    if blocks and not any(spec_for(b.op).is_source for b in blocks):
        yield RuleViolation("R1-SOURCE-PRESENT", "NO_SOURCE", -1,
                            "pipeline has no source block (add READ_IMAGE first)")


def _check_source_first(blocks):
    for i, block in enumerate(blocks):
        if i > 0 and spec_for(block.op).is_source:
            yield RuleViolation("R1-SOURCE-FIRST", "SOURCE_NOT_FIRST", i,
                                f"source block {block.op} must be the first block")


def _check_no_duplicate(blocks):
    for i in range(1, len(blocks)):
        if blocks[i].op == blocks[i - 1].op:
            yield RuleViolation("R2-NO-DUPLICATE", "DUPLICATE_CONSECUTIVE", i,
                                f"two consecutive {blocks[i].op} blocks are not allowed")


def _check_formats(blocks):
    state = FormatState()
    for i, block in enumerate(blocks):
        problem = _format_problem(state, block.op)
        if problem is not None:
            yield RuleViolation("R3-FORMAT", "FORMAT_MISMATCH", i, problem)
        state = advance(state, block.op)


def _check_params(blocks):
    for i, block in enumerate(blocks):
        _, problems = spec_for(block.op).normalize_params(block.params)
        for problem in problems:
            yield RuleViolation("R-PARAMS", "PARAM_INVALID", i, f"{block.op}: {problem}")


RULESET = (
    Rule("R1-SOURCE-PRESENT", "NO_SOURCE",
         "a nonempty pipeline must contain a source block", _check_source_present),
    Rule("R1-SOURCE-FIRST", "SOURCE_NOT_FIRST",
         "source blocks may only appear at position 0", _check_source_first),
    Rule("R2-NO-DUPLICATE", "DUPLICATE_CONSECUTIVE",
         "identical operators may not be stacked consecutively", _check_no_duplicate),
    Rule("R3-FORMAT", "FORMAT_MISMATCH",
         "each block's input format must match the simulated state", _check_formats),
    Rule("R-PARAMS", "PARAM_INVALID",
         "every parameter must satisfy its schema", _check_params),
)


def validate(blocks: list[Block], ruleset=RULESET) -> list[RuleViolation]:
    """Run the full rule table; returns all violations (empty means valid).

    Unknown operator ids raise UnknownOperatorError instead of producing a
    violation: they are catalog errors, not sequencing mistakes.
    """
    for block in blocks:
        spec_for(block.op)
    violations = []
    for rule in ruleset:
        violations.extend(rule.check(blocks))
    violations.sort(key=lambda v: (v.block_index if v.block_index >= 0 else -1))
    return violations


def tail_state(blocks: list[Block]) -> FormatState:
    """Abstract state after the (assumed valid) sequence."""
    state = FormatState()
    for block in blocks:
        state = advance(state, block.op)
    return state


def validate_append(blocks: list[Block], state: FormatState, block: Block) -> RuleViolation | None:
    """Incremental check equivalent to validate(blocks + [block]).

    ``state`` must be tail_state(blocks); only the new block is examined.
    """
    spec = spec_for(block.op)
    index = len(blocks)
    _, problems = spec.normalize_params(block.params)
    if problems:
        return RuleViolation("R-PARAMS", "PARAM_INVALID", index, f"{block.op}: {problems[0]}")
    if spec.is_source and index > 0:
        return RuleViolation("R1-SOURCE-FIRST", "SOURCE_NOT_FIRST", index,
                             f"source block {block.op} must be the first block")
    if blocks and blocks[-1].op == block.op:
        return RuleViolation("R2-NO-DUPLICATE", "DUPLICATE_CONSECUTIVE", index,
                             f"two consecutive {block.op} blocks are not allowed")
    problem = _format_problem(state, block.op)
    if problem is not None:
        return RuleViolation("R3-FORMAT", "FORMAT_MISMATCH", index, problem)
    return None
