"""Abstract state-transition model with empirical transition probabilities.

Profiling traces are pushed through the state and input abstractions; every
concrete transition contributes one count to its (source cell, input cell,
destination cell) bucket.  Counts, not probabilities, are stored — the
conditional probability of a destination given a (state, input) choice is
derived on query as count / total, which keeps merging exact and auditable.

Inputs get their own projection and grid (independent (k_in, m_in),
defaulting to the state parameters): input vectors and state vectors live
in different spaces, so a shared projection would not be dimensionally
coherent.

Models are immutable after construction; queries are safe concurrently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .abstraction import (
    AbstractState,
    GridConfig,
    Projection,
    fit_grid,
    fit_projection,
    grid_indices,
)
from .errors import TraceFormatError, UndefinedDistributionError, ValidationError
from .traces import Trace, TraceSet

MODEL_MAGIC = "RNNMDP"
MODEL_VERSION = 1


@dataclass(frozen=True)
class AbstractInput:
    """An input-space grid cell (same signed-index semantics as states)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return f"AbstractInput{self.indices}"


@dataclass(frozen=True)
class AbstractTransition:
    src: AbstractState
    input: AbstractInput
    dst: AbstractState


class MdpModel:
    """Abstract states, per-(state, input) destination counts, initial set."""

    __slots__ = (
        "state_projection",
        "state_grid",
        "input_projection",
        "input_grid",
        "counts",
        "initial",
        "states",
        "enabled",
        "src_dst",
        "triples",
        "_boundary_cache",
    )

    def __init__(
        self,
        state_projection: Projection,
        state_grid: GridConfig,
        input_projection: Projection,
        input_grid: GridConfig,
        counts: dict,
        initial,
    ):
        self.state_projection = state_projection
        self.state_grid = state_grid
        self.input_projection = input_projection
        self.input_grid = input_grid
        if state_projection.k != state_grid.k or input_projection.k != input_grid.k:
            raise ValidationError("projection/grid dimension mismatch")

        frozen: dict[tuple[AbstractState, AbstractInput], dict[AbstractState, int]] = {}
        states: set[AbstractState] = set(initial)
        enabled: dict[AbstractState, set[AbstractInput]] = {}
        src_dst: set[tuple[AbstractState, AbstractState]] = set()
        triples: set[AbstractTransition] = set()
        for (src, inp), dsts in counts.items():
            if not dsts:
                raise ValidationError(f"empty destination map for {(src, inp)}")
            row = {}
            for dst, c in dsts.items():
                if c <= 0:
                    raise ValidationError(f"non-positive count for {(src, inp, dst)}")
                row[dst] = int(c)
                states.add(dst)
                src_dst.add((src, dst))
                triples.add(AbstractTransition(src, inp, dst))
            frozen[(src, inp)] = row
            states.add(src)
            enabled.setdefault(src, set()).add(inp)
        self.counts = frozen
        self.initial = frozenset(initial)
        self.states = frozenset(states)
        self.enabled = {s: frozenset(xs) for s, xs in enabled.items()}
        self.src_dst = frozenset(src_dst)
        self.triples = frozenset(triples)
        self._boundary_cache: dict[int, frozenset[AbstractState]] = {}

    # -- abstraction application -------------------------------------------

    def abstract_states(self, mat: np.ndarray) -> list[AbstractState]:
        """Map an (n, D) matrix of concrete states to grid cells."""
        idx = grid_indices(self.state_grid, self.state_projection.project_many(mat))
        return [AbstractState(tuple(row)) for row in idx.tolist()]

    def abstract_inputs(self, mat: np.ndarray) -> list[AbstractInput]:
        idx = grid_indices(self.input_grid, self.input_projection.project_many(mat))
        return [AbstractInput(tuple(row)) for row in idx.tolist()]

    def boundary_union(self, k_steps: int) -> frozenset[AbstractState]:
        """Union of the 1..k_steps boundary layers around the visited states."""
        from .abstraction import boundary_region

        if k_steps not in self._boundary_cache:
            layers = boundary_region(self.states, k_steps)
            union: set[AbstractState] = set()
            for layer in layers.values():
                union |= layer
            self._boundary_cache[k_steps] = frozenset(union)
        return self._boundary_cache[k_steps]

    def probability(self, s: AbstractState, x: AbstractInput, d: AbstractState) -> Fraction:
        """Exact conditional probability of d given the (s, x) choice."""
        key = (s, x)
        if key not in self.counts:
            raise UndefinedDistributionError(
                f"input {x} was never observed at state {s} during profiling"
            )
        row = self.counts[key]
        return Fraction(row.get(d, 0), sum(row.values()))

    def fingerprint(self) -> str:
        return hashlib.sha256(to_text(self).encode("utf-8")).hexdigest()

    def __repr__(self):
        return (
            f"MdpModel(states={len(self.states)}, choices={len(self.counts)}, "
            f"transitions={len(self.triples)})"
        )


def build_model(ts: TraceSet, k: int, m: int, k_in: int | None = None, m_in: int | None = None) -> MdpModel:
    """Fit abstractions on a profiling TraceSet and tally its transitions.

    Single pass over concrete transitions; the visit counter is asserted
    against the total step count.  Deterministic: the same TraceSet and
    parameters always produce a structurally identical model.
    """
    if not ts.traces:
        raise ValidationError("cannot build a model from an empty trace set")
    k_in = k if k_in is None else k_in
    m_in = m if m_in is None else m_in

    all_states = np.vstack([t.states() for t in ts.traces])
    all_inputs = np.vstack([t.inputs() for t in ts.traces])
    state_projection = fit_projection(all_states, k)
    state_grid = fit_grid(state_projection.project_many(all_states), m)
    input_projection = fit_projection(all_inputs, k_in)
    input_grid = fit_grid(input_projection.project_many(all_inputs), m_in)

    counts: dict[tuple[AbstractState, AbstractInput], dict[AbstractState, int]] = {}
    initial: set[AbstractState] = set()
    visits = 0
    total_steps = 0
    for t in ts.traces:
        s_idx = grid_indices(state_grid, state_projection.project_many(t.states()))
        x_idx = grid_indices(input_grid, input_projection.project_many(t.inputs()))
        cells = [AbstractState(tuple(r)) for r in s_idx.tolist()]
        inputs = [AbstractInput(tuple(r)) for r in x_idx.tolist()]
        initial.add(cells[0])
        for i, inp in enumerate(inputs):
            row = counts.setdefault((cells[i], inp), {})
            row[cells[i + 1]] = row.get(cells[i + 1], 0) + 1
            visits += 1
        total_steps += len(t)
    assert visits == total_steps, "transition tally must equal total concrete transitions"
    return MdpModel(state_projection, state_grid, input_projection, input_grid, counts, initial)


def transition_probability(mdl: MdpModel, s: AbstractState, x: AbstractInput, d: AbstractState) -> float:
    """Empirical Pr of reaching d from s under input x; 0 if d unseen there.

    Raises UndefinedDistributionError when (s, x) itself was never observed,
    so callers can distinguish an unseen choice from a zero-probability
    destination.
    """
    return float(mdl.probability(s, x, d))


def enabled_inputs(mdl: MdpModel, s: AbstractState) -> frozenset[AbstractInput]:
    """Abstract inputs observed at s during profiling (empty if unvisited)."""
    return mdl.enabled.get(s, frozenset())


def abstract_trace(mdl: MdpModel, t: Trace) -> list[AbstractTransition]:
    """Map one concrete trace through the model's abstractions."""
    if t.state_dim != mdl.state_projection.dim:
        raise ValidationError(f"trace {t.id}: state dimension {t.state_dim} != model {mdl.state_projection.dim}")
    if t.input_dim != mdl.input_projection.dim:
        raise ValidationError(f"trace {t.id}: input dimension {t.input_dim} != model {mdl.input_projection.dim}")
    cells = mdl.abstract_states(t.states())
    inputs = mdl.abstract_inputs(t.inputs())
    return [AbstractTransition(cells[i], inputs[i], cells[i + 1]) for i in range(len(inputs))]


# -- model file format ------------------------------------------------------


def _fmt17(vec) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.asarray(vec, dtype=np.float64).reshape(-1).tolist())


def _fmt_idx(indices) -> str:
    return " ".join(str(int(i)) for i in indices)


def to_text(mdl: MdpModel) -> str:
    """Serialize a model to its canonical text document (sorted, versioned)."""
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION}"]
    for tag, proj, grid in (
        ("STATE", mdl.state_projection, mdl.state_grid),
        ("INPUT", mdl.input_projection, mdl.input_grid),
    ):
        lines.append(f"{tag}_DIM {proj.dim}")
        lines.append(f"{tag}_PCA {proj.k}")
        lines.append(f"{tag}_MEAN {_fmt17(proj.mean)}")
        for row in proj.components:
            lines.append(f"{tag}_COMPONENT {_fmt17(row)}")
        lines.append(f"{tag}_VARIANCE {_fmt17(proj.explained_variance)}")
        lines.append(f"{tag}_GRID {grid.m}")
        lines.append(f"{tag}_LB {_fmt17(grid.lb)}")
        lines.append(f"{tag}_UB {_fmt17(grid.ub)}")
    inits = sorted(mdl.initial, key=lambda s: s.indices)
    lines.append(f"INITIAL {len(inits)}")
    for s in inits:
        lines.append(f"INIT {_fmt_idx(s.indices)}")
    rows = []
    for (src, inp), dsts in mdl.counts.items():
        for dst, c in dsts.items():
            rows.append((src.indices, inp.indices, dst.indices, c))
    rows.sort()
    lines.append(f"TRANSITIONS {len(rows)}")
    for src, inp, dst, c in rows:
        lines.append(f"TRANS {_fmt_idx(src)} | {_fmt_idx(inp)} | {_fmt_idx(dst)} | {c}")
    return "\n".join(lines) + "\n"


def save_model(mdl: MdpModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_text(mdl))


def _parse_vec(rest: str, lineno: int) -> np.ndarray:
    try:
        return np.array([float(p) for p in rest.split(" ")], dtype=np.float64)
    except ValueError:
        raise TraceFormatError(f"line {lineno}: bad float vector") from None


def from_text(text: str) -> MdpModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != f"{MODEL_MAGIC} {MODEL_VERSION}":
        raise TraceFormatError(f"line 1: expected '{MODEL_MAGIC} {MODEL_VERSION}' header")

    pos = 1

    def take(prefix: str) -> tuple[str, int]:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix + " "):
            raise TraceFormatError(f"line {pos + 1}: expected {prefix} record")
        rest = lines[pos][len(prefix) + 1 :]
        pos += 1
        return rest, pos

    sections = {}
    for tag in ("STATE", "INPUT"):
        dim = int(take(f"{tag}_DIM")[0])
        k = int(take(f"{tag}_PCA")[0])
        mean, ln = take(f"{tag}_MEAN")
        mean = _parse_vec(mean, ln)
        comps = []
        for _ in range(k):
            row, ln = take(f"{tag}_COMPONENT")
            comps.append(_parse_vec(row, ln))
        var, ln = take(f"{tag}_VARIANCE")
        var = _parse_vec(var, ln)
        m = int(take(f"{tag}_GRID")[0])
        lb, ln = take(f"{tag}_LB")
        lb = _parse_vec(lb, ln)
        ub, ln = take(f"{tag}_UB")
        ub = _parse_vec(ub, ln)
        if mean.size != dim:
            raise TraceFormatError(f"{tag}_MEAN length {mean.size} != declared dim {dim}")
        proj = Projection(mean, np.vstack(comps), var)
        grid = GridConfig(k, m, lb, ub)
        sections[tag] = (proj, grid)

    n_init = int(take("INITIAL")[0])
    initial = []
    for _ in range(n_init):
        rest, _ = take("INIT")
        initial.append(AbstractState(tuple(int(p) for p in rest.split(" "))))

    n_rows = int(take("TRANSITIONS")[0])
    counts: dict[tuple[AbstractState, AbstractInput], dict[AbstractState, int]] = {}
    for _ in range(n_rows):
        rest, ln = take("TRANS")
        parts = rest.split(" | ")
        if len(parts) != 4:
            raise TraceFormatError(f"line {ln}: expected 'TRANS src | input | dst | count'")
        src = AbstractState(tuple(int(p) for p in parts[0].split(" ")))
        inp = AbstractInput(tuple(int(p) for p in parts[1].split(" ")))
        dst = AbstractState(tuple(int(p) for p in parts[2].split(" ")))
        counts.setdefault((src, inp), {})[dst] = int(parts[3])
    if pos != len(lines):
        raise TraceFormatError(f"line {pos + 1}: trailing content after transition table")

    sp, sg = sections["STATE"]
    ip, ig = sections["INPUT"]
    return MdpModel(sp, sg, ip, ig, counts, initial)


def load_model(path) -> MdpModel:
    with open(path, "r", encoding="utf-8") as fh:
        return from_text(fh.read())
