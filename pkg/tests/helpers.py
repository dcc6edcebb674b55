"""Shared fixture builders and independent test oracles.

The oracles here deliberately re-derive results by brute force (explicit
interval scans, exhaustive lattice enumeration, full-matrix dynamic
programs, dense eigendecompositions) and stay independent of the library
code paths they check.
"""

from __future__ import annotations

import numpy as np

from rnnfuzz import Trace, TraceSet, TraceStep
from rnnfuzz.abstraction import AbstractState
from rnnfuzz.audio import SAMPLE_RATE, AudioClip

# -- fixture builders ---------------------------------------------------------


def random_traceset(
    rng: np.random.Generator,
    state_dim: int | None = None,
    input_dim: int | None = None,
    n_traces: int | None = None,
    max_steps: int = 8,
    float32: bool = True,
) -> TraceSet:
    """A small random TraceSet; float32-precision values by default."""
    state_dim = state_dim or int(rng.integers(1, 6))
    input_dim = input_dim or int(rng.integers(1, 5))
    n_traces = n_traces if n_traces is not None else int(rng.integers(1, 6))
    traces = []
    for ti in range(n_traces):
        n_steps = int(rng.integers(1, max_steps + 1))
        states = rng.normal(size=(n_steps + 1, state_dim)) * 2.0
        states[0] = 0.0
        inputs = rng.normal(size=(n_steps, input_dim))
        if float32:
            states = states.astype(np.float32).astype(np.float64)
            inputs = inputs.astype(np.float32).astype(np.float64)
        steps = [
            TraceStep(states[i], inputs[i], int(rng.integers(0, 10)))
            for i in range(n_steps)
        ]
        traces.append(Trace(f"t{ti}", steps, states[-1]))
    return TraceSet(state_dim, input_dim, traces)


def fig34_traceset() -> TraceSet:
    """Three 1-D traces whose m=4 abstraction is the worked 4-cell example.

    Cells 0..3 partition [0, 4]; inputs 0.0 / 1.0 land in the two input
    cells.  Abstract transition set: {(0,1),(1,0),(1,1),(1,2),(1,3),(3,3)};
    cell 1 has two input choices, and under the low input cell its two
    destinations (cells 2 and 3) each carry probability 1/2.
    """
    a, b = 0.0, 1.0

    def step(s, x):
        return TraceStep([s], [x], 0)

    t1 = Trace("t1", [step(0.0, a), step(1.25, b), step(1.75, a)], [2.5])
    t2 = Trace("t2", [step(0.0, a), step(1.5, b)], [0.5])
    t3 = Trace("t3", [step(0.0, a), step(1.6, a), step(3.2, a)], [4.0])
    return TraceSet(1, 1, [t1, t2, t3])


def synth_clip(seed: int, duration: float = 0.5, rate: int = SAMPLE_RATE) -> AudioClip:
    """Deterministic speech-ish test audio: enveloped tone mix plus noise.

    Like a real utterance, the clip carries quiet leading/trailing room
    noise (strictly below the -40 dBFS trim floor).
    """
    rng = np.random.default_rng(seed)
    n = int(duration * rate)
    t = np.arange(n) / rate
    x = np.zeros(n)
    for _ in range(3):
        freq = rng.uniform(120.0, 2500.0)
        amp = rng.uniform(0.1, 0.3)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        mod = 1.0 + 0.5 * np.sin(2.0 * np.pi * rng.uniform(1.0, 6.0) * t)
        x += amp * mod * np.sin(2.0 * np.pi * freq * t + phase)
    x += 0.02 * rng.standard_normal(n)
    envelope = 0.3 + 0.7 * np.abs(np.sin(2.0 * np.pi * rng.uniform(0.5, 2.0) * t))
    x *= envelope
    peak = np.max(np.abs(x))
    pad = int(0.03 * rate)
    room = rng.uniform(-0.004, 0.004, size=2 * pad)
    return AudioClip(np.concatenate([room[:pad], 0.8 * x / peak, room[pad:]]), rate)


# -- independent oracles ------------------------------------------------------


def interval_scan_index(lb: float, ub: float, m: int, v: float) -> int:
    """Locate v by scanning explicit interval boundaries (1 axis)."""
    w = (ub - lb) / m
    if v == ub:
        return m - 1
    if lb <= v < ub:
        for i in range(m):
            if lb + i * w <= v < lb + (i + 1) * w:
                return i
    # outside the bounds: extend the lattice in the needed direction
    i = 0
    if v < lb:
        while not (lb + (i - 1) * w <= v < lb + i * w):
            i -= 1
            if i < -10_000:
                raise AssertionError("runaway scan")
        return i - 1
    i = m
    while not (lb + i * w <= v < lb + (i + 1) * w):
        i += 1
        if i > 10_000:
            raise AssertionError("runaway scan")
    return i


def lattice_layers(visited: set[AbstractState], k_steps: int) -> dict[int, set[AbstractState]]:
    """Boundary layers by exhaustive scan of the inflated bounding box."""
    dims = len(next(iter(visited)))
    lo = [min(s.indices[d] for s in visited) - k_steps for d in range(dims)]
    hi = [max(s.indices[d] for s in visited) + k_steps for d in range(dims)]
    layers: dict[int, set[AbstractState]] = {i: set() for i in range(1, k_steps + 1)}
    grids = np.meshgrid(*[np.arange(lo[d], hi[d] + 1) for d in range(dims)], indexing="ij")
    for idx in np.stack([g.ravel() for g in grids], axis=1):
        cell = AbstractState(tuple(int(v) for v in idx))
        if cell in visited:
            continue
        dist = min(sum(abs(a - b) for a, b in zip(cell.indices, s.indices)) for s in visited)
        if 1 <= dist <= k_steps:
            layers[dist].add(cell)
    return layers


def pca_oracle(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k components via an explicitly formed covariance matrix."""
    n, d = X.shape
    mean = np.zeros(d)
    for row in X:
        mean += row
    mean /= n
    cov = np.zeros((d, d))
    for row in X:
        c = row - mean
        cov += np.outer(c, c)
    cov /= n - 1
    evals, evecs = np.linalg.eig(cov)
    evals, evecs = np.real(evals), np.real(evecs)
    order = np.argsort(-evals)
    return mean, evecs[:, order[:k]].T, evals[order[:k]]


def full_matrix_edit_distance(a, b) -> int:
    """Unit-cost Levenshtein via the complete DP matrix."""
    n, m = len(a), len(b)
    dp = np.zeros((n + 1, m + 1), dtype=int)
    dp[:, 0] = np.arange(n + 1)
    dp[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i, j] = min(
                dp[i - 1, j] + 1,
                dp[i, j - 1] + 1,
                dp[i - 1, j - 1] + (a[i - 1] != b[j - 1]),
            )
    return int(dp[n, m])


def tally_transitions(mdl, traces) -> dict:
    """Independent per-(src, input, dst) tally over trace_transitions.

    Abstraction goes through the model's own batch mapping (the projection
    floats must match bit-exactly); the counting pass is the oracle.
    """
    from rnnfuzz import trace_transitions

    counts: dict = {}
    for t in traces:
        cells = mdl.abstract_states(t.states())
        inputs = mdl.abstract_inputs(t.inputs())
        for i, _transition in enumerate(trace_transitions(t)):
            key = (cells[i], inputs[i])
            counts.setdefault(key, {})
            counts[key][cells[i + 1]] = counts[key].get(cells[i + 1], 0) + 1
    return counts
