"""Uniform time grids and reproducible Brownian increments.

Reproducibility contract: a path is a pure function of
(generator algorithm, master seed, path index).  The generator is numpy's
PCG64 seeded with ``SeedSequence(entropy=(master_seed, path_index))``, which
yields independent substreams across path indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*horizon/steps, k = 0..steps."""

    horizon: float
    steps: int

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 1:
            raise ValueError(f"need at least one step, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass(frozen=True)
class BrownianPath:
    """Increments of a (d-1)-dimensional Brownian motion on a grid."""

    grid: TimeGrid
    increments: np.ndarray  # shape (steps, dims), each column N(0, dt) iid
    master_seed: int
    path_index: int

    @property
    def dims(self) -> int:
        return self.increments.shape[1]

    def values(self) -> np.ndarray:
        """W at the grid points, shape (steps + 1, dims), W_0 = 0."""
        out = np.zeros((self.grid.steps + 1, self.dims))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out


def _rng_for(master_seed: int, path_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(master_seed, path_index)))


def sample_brownian(grid: TimeGrid, dims: int, master_seed: int, path_index: int) -> BrownianPath:
    """Draw one path; deterministic in (master_seed, path_index)."""
    if dims < 1:
        raise ValueError(f"need dims >= 1, got {dims}")
    rng = _rng_for(master_seed, path_index)
    increments = rng.normal(0.0, math.sqrt(grid.dt), size=(grid.steps, dims))
    return BrownianPath(grid, increments, master_seed, path_index)


def sample_increments_batch(
    grid: TimeGrid, dims: int, master_seed: int, path_indices: range | list[int]
) -> np.ndarray:
    """Increments for many paths, shape (len(path_indices), steps, dims).

    Row i is bitwise identical to sample_brownian(..., path_indices[i]), so
    batch composition never changes a path.
    """
    out = np.empty((len(path_indices), grid.steps, dims))
    sd = math.sqrt(grid.dt)
    for row, idx in enumerate(path_indices):
        out[row] = _rng_for(master_seed, idx).normal(0.0, sd, size=(grid.steps, dims))
    return out
