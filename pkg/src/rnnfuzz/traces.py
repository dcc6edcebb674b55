"""Concrete execution traces of a recurrent model and their on-disk format.

A trace records, for one input sequence, the per-step hidden state vector,
the input feature vector consumed at that step, and the emitted token id,
plus the final hidden state reached after the last step.  Traces always
start from the all-zeros state; files violating that are rejected, not
repaired.

File grammar (UTF-8, ``\\n`` line endings, ``.`` decimal separator)::

    RNNTRACE 1 <state_dim> <input_dim>
    T <trace_id>
    S <y_token> | <x_0> ... <x_{input_dim-1}> | <s_0> ... <s_{state_dim-1}>
    ...
    F <s_0> ... <s_{state_dim-1}>

Floats are written with 9 significant digits, which round-trips float32
exactly; in-memory values are canonicalized to that representation at
construction so ``load_traces(save_traces(ts)) == ts`` holds structurally.
All containers are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import TraceFormatError, ValidationError

TRACE_MAGIC = "RNNTRACE"
TRACE_VERSION = 1


def fmt9(value: float) -> str:
    """Canonical wire rendering of one float: 9 significant digits."""
    return f"{float(value):.9g}"


def canon9(values) -> np.ndarray:
    """Snap a float vector to its canonical 9-significant-digit value.

    The mapping is idempotent: parsing a 9-digit decimal and re-rendering
    it yields the same text, so canonical vectors survive save/load
    byte-exactly.
    """
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite value in vector")
    return np.array([float(fmt9(v)) for v in arr.tolist()], dtype=np.float64)


class TraceStep:
    """One step: state before the step, input consumed, token emitted."""

    __slots__ = ("state", "input", "output")

    def __init__(self, state, input, output: int):
        self.state = canon9(state)
        self.input = canon9(input)
        self.output = int(output)
        if self.output < 0:
            raise ValidationError(f"token id must be non-negative, got {output}")
        self.state.setflags(write=False)
        self.input.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, TraceStep):
            return NotImplemented
        return (
            self.output == other.output
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.input, other.input)
        )

    def __repr__(self):
        return f"TraceStep(output={self.output}, |state|={self.state.size}, |input|={self.input.size})"


class Trace:
    """An ordered, non-empty sequence of steps plus the final state."""

    __slots__ = ("id", "steps", "final_state")

    def __init__(self, id: str, steps: Iterable[TraceStep], final_state):
        if not id or any(c.isspace() for c in id):
            raise ValidationError(f"trace id must be non-empty without whitespace: {id!r}")
        self.id = id
        self.steps = tuple(steps)
        if not self.steps:
            raise ValidationError(f"trace {id}: must contain at least one step")
        self.final_state = canon9(final_state)
        self.final_state.setflags(write=False)
        first = self.steps[0].state
        if np.any(first != 0.0):
            raise ValidationError(f"trace {id}: first state must be the zero vector")
        sdim = self.steps[0].state.size
        idim = self.steps[0].input.size
        for i, step in enumerate(self.steps):
            if step.state.size != sdim or step.input.size != idim:
                raise ValidationError(f"trace {id}: step {i} has inconsistent dimensions")
        if self.final_state.size != sdim:
            raise ValidationError(f"trace {id}: final state dimension mismatch")

    @property
    def state_dim(self) -> int:
        return self.steps[0].state.size

    @property
    def input_dim(self) -> int:
        return self.steps[0].input.size

    def states(self) -> np.ndarray:
        """All states in visit order: s_0 .. s_N (N = len(steps))."""
        return np.vstack([s.state for s in self.steps] + [self.final_state])

    def inputs(self) -> np.ndarray:
        return np.vstack([s.input for s in self.steps])

    def __len__(self):
        return len(self.steps)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.id == other.id
            and self.steps == other.steps
            and np.array_equal(self.final_state, other.final_state)
        )

    def __repr__(self):
        return f"Trace(id={self.id!r}, steps={len(self.steps)})"


class TraceSet:
    """A collection of traces with declared state and input dimensions.

    Immutable after construction; reading from multiple threads is safe.
    """

    __slots__ = ("state_dim", "input_dim", "traces")

    def __init__(self, state_dim: int, input_dim: int, traces: Iterable[Trace] = ()):
        if state_dim < 1 or input_dim < 1:
            raise ValidationError("state_dim and input_dim must be positive")
        self.state_dim = int(state_dim)
        self.input_dim = int(input_dim)
        self.traces = tuple(traces)
        for t in self.traces:
            if t.state_dim != self.state_dim:
                raise ValidationError(
                    f"trace {t.id}: state dimension {t.state_dim} != declared {self.state_dim}"
                )
            if t.input_dim != self.input_dim:
                raise ValidationError(
                    f"trace {t.id}: input dimension {t.input_dim} != declared {self.input_dim}"
                )

    def __len__(self):
        return len(self.traces)

    def __eq__(self, other):
        if not isinstance(other, TraceSet):
            return NotImplemented
        return (
            self.state_dim == other.state_dim
            and self.input_dim == other.input_dim
            and self.traces == other.traces
        )

    def __repr__(self):
        return f"TraceSet(state_dim={self.state_dim}, input_dim={self.input_dim}, traces={len(self.traces)})"


def trace_transitions(t: Trace) -> list[tuple[np.ndarray, np.ndarray, int, np.ndarray]]:
    """Explode a trace into (s_i, x_i, y_i, s_{i+1}) tuples, one per step.

    Entry i's destination is entry i+1's source; the last destination is
    the trace's final state.
    """
    out = []
    for i, step in enumerate(t.steps):
        nxt = t.steps[i + 1].state if i + 1 < len(t.steps) else t.final_state
        out.append((step.state, step.input, step.output, nxt))
    return out


def _fmt_vec(vec: np.ndarray) -> str:
    return " ".join(fmt9(v) for v in vec.tolist())


def save_traces(ts: TraceSet, path) -> None:
    """Write a TraceSet in the canonical trace format."""
    lines = [f"{TRACE_MAGIC} {TRACE_VERSION} {ts.state_dim} {ts.input_dim}"]
    for t in ts.traces:
        lines.append(f"T {t.id}")
        for step in t.steps:
            lines.append(f"S {step.output} | {_fmt_vec(step.input)} | {_fmt_vec(step.state)}")
        lines.append(f"F {_fmt_vec(t.final_state)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(parts: Sequence[str], expected: int, lineno: int, what: str) -> np.ndarray:
    if len(parts) != expected:
        raise TraceFormatError(f"line {lineno}: expected {expected} {what} values, got {len(parts)}")
    try:
        vals = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise TraceFormatError(f"line {lineno}: bad number in {what}: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise TraceFormatError(f"line {lineno}: non-finite {what} value")
    return vals


def load_traces(path) -> TraceSet:
    """Parse a canonical trace file.

    Raises TraceFormatError naming the offending line on malformed input
    and ValidationError naming the trace id on dimension violations.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceFormatError("line 1: empty file, expected header")

    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != TRACE_MAGIC:
        raise TraceFormatError(f"line 1: expected '{TRACE_MAGIC} {TRACE_VERSION} <state_dim> <input_dim>'")
    if header[1] != str(TRACE_VERSION):
        raise TraceFormatError(f"line 1: unsupported version {header[1]}")
    try:
        state_dim, input_dim = int(header[2]), int(header[3])
    except ValueError:
        raise TraceFormatError("line 1: dimensions must be integers") from None

    traces: list[Trace] = []
    cur_id: str | None = None
    cur_steps: list[TraceStep] = []

    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("T "):
            if cur_id is not None:
                raise TraceFormatError(f"line {lineno}: trace {cur_id!r} not closed by an F line")
            cur_id = line[2:]
            if not cur_id or any(c.isspace() for c in cur_id):
                raise TraceFormatError(f"line {lineno}: bad trace id {cur_id!r}")
            cur_steps = []
        elif line.startswith("S "):
            if cur_id is None:
                raise TraceFormatError(f"line {lineno}: step outside of a trace block")
            body = line[2:].split(" | ")
            if len(body) != 3:
                raise TraceFormatError(f"line {lineno}: expected 'S <y> | <x...> | <s...>'")
            try:
                token = int(body[0])
            except ValueError:
                raise TraceFormatError(f"line {lineno}: token id must be an integer") from None
            if token < 0:
                raise TraceFormatError(f"line {lineno}: token id must be non-negative")
            x = _parse_floats(body[1].split(" "), input_dim, lineno, "input")
            s = _parse_floats(body[2].split(" "), state_dim, lineno, "state")
            cur_steps.append(TraceStep(s, x, token))
        elif line.startswith("F "):
            if cur_id is None:
                raise TraceFormatError(f"line {lineno}: final state outside of a trace block")
            final = _parse_floats(line[2:].split(" "), state_dim, lineno, "state")
            traces.append(Trace(cur_id, cur_steps, final))
            cur_id = None
            cur_steps = []
        else:
            raise TraceFormatError(f"line {lineno}: unrecognized record {line[:16]!r}")

    if cur_id is not None:
        raise TraceFormatError(f"line {len(lines)}: trace {cur_id!r} not closed by an F line")
    return TraceSet(state_dim, input_dim, traces)
