"""State-space abstraction: PCA projection, regular grids, lattice geometry.

Concrete state vectors are projected onto their top-k principal components
and quantized into m^k regular grid cells.  Cell indices are signed: space
beyond the fitted bounds is first-class, so abstract states outside the
profiled region are representable (required by the boundary coverage
criterion).

Projections and grid configs are immutable after fitting; every query here
is pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError


@dataclass(frozen=True)
class AbstractState:
    """A grid cell, identified by one signed interval index per dimension."""

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return f"AbstractState{self.indices}"


class Projection:
    """Mean vector plus k orthonormal component rows (largest variance first)."""

    __slots__ = ("mean", "components", "explained_variance")

    def __init__(self, mean, components, explained_variance):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.components = np.asarray(components, dtype=np.float64)
        self.explained_variance = np.asarray(explained_variance, dtype=np.float64)
        if self.components.ndim != 2 or self.components.shape[1] != self.mean.size:
            raise ValidationError("components must be a k x D matrix matching the mean")
        if self.explained_variance.size != self.components.shape[0]:
            raise ValidationError("explained_variance length must equal k")
        if np.any(np.diff(self.explained_variance) > 0):
            raise ValidationError("explained_variance must be non-increasing")
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(self.k), atol=1e-6):
            raise ValidationError("components are not orthonormal within 1e-6")
        for a in (self.mean, self.components, self.explained_variance):
            a.setflags(write=False)

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.size

    def project_many(self, mat: np.ndarray) -> np.ndarray:
        """Project an (n, D) matrix to (n, k) component coordinates."""
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != self.dim:
            raise ValidationError(f"expected (n, {self.dim}) matrix, got {mat.shape}")
        return (mat - self.mean) @ self.components.T


def fit_projection(states, k: int) -> Projection:
    """Fit the top-k principal components of a row-per-observation matrix.

    Uses the exact symmetric eigendecomposition of the D x D sample
    covariance (ddof=1), components ordered by eigenvalue descending.  Each
    component's largest-magnitude entry is made positive so the fit is
    deterministic despite eigenvector sign ambiguity.
    """
    X = np.asarray(states, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("states must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValidationError("states contain non-finite values")
    n, d = X.shape
    if n < 2:
        raise ConfigurationError("need at least 2 observations to fit a projection")
    if not 1 <= k <= min(n, d):
        raise ConfigurationError(f"k={k} out of range [1, min(N={n}, D={d})]")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")[:k]
    components = evecs[:, order].T.copy()
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    variance = np.clip(evals[order], 0.0, None)
    return Projection(mean, components, variance)


def project(p: Projection, s) -> np.ndarray:
    """Project one concrete vector onto the component basis."""
    v = np.asarray(s, dtype=np.float64).reshape(-1)
    if v.size != p.dim:
        raise ValidationError(f"expected vector of length {p.dim}, got {v.size}")
    return p.components @ (v - p.mean)


class GridConfig:
    """m equal-width intervals per axis over fitted [lb, ub] bounds.

    Intervals are half-open [lb + i*w, lb + (i+1)*w) with the top interval
    closed; values outside the bounds map to indices < 0 or >= m.
    """

    __slots__ = ("k", "m", "lb", "ub")

    def __init__(self, k: int, m: int, lb, ub):
        if m < 1:
            raise ConfigurationError(f"partition count m must be >= 1, got {m}")
        self.k = int(k)
        self.m = int(m)
        self.lb = np.asarray(lb, dtype=np.float64).reshape(-1)
        self.ub = np.asarray(ub, dtype=np.float64).reshape(-1)
        if self.lb.size != self.k or self.ub.size != self.k:
            raise ValidationError("lb/ub length must equal k")
        if np.any(self.ub <= self.lb):
            raise ValidationError("need lb < ub on every axis")
        self.lb.setflags(write=False)
        self.ub.setflags(write=False)

    @property
    def width(self) -> np.ndarray:
        return (self.ub - self.lb) / self.m

    def __eq__(self, other):
        if not isinstance(other, GridConfig):
            return NotImplemented
        return (
            self.k == other.k
            and self.m == other.m
            and np.array_equal(self.lb, other.lb)
            and np.array_equal(self.ub, other.ub)
        )

    def __repr__(self):
        return f"GridConfig(k={self.k}, m={self.m})"


def fit_grid(projected, m: int) -> GridConfig:
    """Fit per-axis bounds from projected data; degenerate axes get ub=lb+1."""
    P = np.asarray(projected, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 1:
        raise ValidationError("projected must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(P)):
        raise ValidationError("projected data contains non-finite values")
    if m < 1:
        raise ConfigurationError(f"partition count m must be >= 1, got {m}")
    lb = P.min(axis=0)
    ub = P.max(axis=0)
    degenerate = ub == lb
    ub = np.where(degenerate, lb + 1.0, ub)
    return GridConfig(P.shape[1], m, lb, ub)


def grid_indices(g: GridConfig, pts: np.ndarray) -> np.ndarray:
    """Vectorized cell indices for an (n, k) matrix of projected points."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != g.k:
        raise ValidationError(f"expected (n, {g.k}) matrix, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points contain non-finite values")
    idx = np.floor((pts - g.lb) / g.width).astype(np.int64)
    # exact upper bound belongs to the top (closed) interval
    return np.where(pts == g.ub, g.m - 1, idx)


def abstract_state(g: GridConfig, v) -> AbstractState:
    """Map one projected point to its grid cell."""
    v = np.asarray(v, dtype=np.float64).reshape(1, -1)
    return AbstractState(tuple(grid_indices(g, v)[0].tolist()))


def distance(a: AbstractState, b: AbstractState) -> int:
    """Manhattan distance between cell index tuples."""
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return int(sum(abs(i - j) for i, j in zip(a.indices, b.indices)))


def boundary_region(visited, k_steps: int) -> dict[int, set[AbstractState]]:
    """Layers of cells at minimal Manhattan distance 1..k_steps from a set.

    BFS over the integer lattice: unit moves along one axis per step, so
    BFS depth equals minimal Manhattan distance.  Layers are disjoint from
    the visited set and from each other.
    """
    visited = set(visited)
    if not visited:
        raise ValidationError("visited set must be non-empty")
    if k_steps < 1:
        raise ConfigurationError("k_steps must be >= 1")
    dims = {len(s) for s in visited}
    if len(dims) != 1:
        raise ValidationError("visited states have mixed dimensionality")
    k = dims.pop()

    seen = set(visited)
    frontier = set(visited)
    layers: dict[int, set[AbstractState]] = {}
    for step in range(1, k_steps + 1):
        nxt: set[AbstractState] = set()
        for cell in frontier:
            for axis in range(k):
                for delta in (-1, 1):
                    idx = list(cell.indices)
                    idx[axis] += delta
                    cand = AbstractState(tuple(idx))
                    if cand not in seen:
                        nxt.add(cand)
        layers[step] = nxt
        seen |= nxt
        frontier = nxt
    return layers
