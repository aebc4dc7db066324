"""Sampling grids over fundamental domains and scan windows."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .lattice import FundamentalDomain

DEFAULT_SAMPLES = {1: 4096, 2: 256}


def default_samples(d: int) -> int:
    return DEFAULT_SAMPLES.get(d, 32)


@dataclass(frozen=True)
class GridSpec:
    """``n`` samples per axis; optional stratified jitter with a fixed seed."""

    n: Optional[Union[int, tuple]] = None
    jitter: bool = False
    seed: int = 0

    def counts(self, d: int) -> tuple[int, ...]:
        if self.n is None:
            return (default_samples(d),) * d
        if isinstance(self.n, int):
            return (self.n,) * d
        if len(self.n) != d:
            raise ValueError(f"grid has {len(self.n)} axes, domain has {d}")
        return tuple(int(v) for v in self.n)

    def refined(self, d: int) -> "GridSpec":
        """The same grid with twice as many samples per axis."""
        return GridSpec(tuple(2 * v for v in self.counts(d)), self.jitter, self.seed)

    def unit_axes(self, d: int) -> list[np.ndarray]:
        """Per-axis coordinates in [0, 1)."""
        rng = np.random.default_rng(self.seed)
        axes = []
        for n in self.counts(d):
            u = np.arange(n, dtype=float)
            if self.jitter:
                u = u + rng.uniform(0.0, 1.0, size=n)
            axes.append(u / n)
        return axes

    def unit_points(self, d: int) -> np.ndarray:
        axes = self.unit_axes(d)
        if d == 1:
            return axes[0][:, None]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def points(self, domain: FundamentalDomain) -> np.ndarray:
        u = self.unit_points(domain.dim)
        return np.asarray(domain.offset) + u @ domain.edges.T

    def box_points(self, lo, hi) -> np.ndarray:
        lo, hi = np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float))
        u = self.unit_points(len(lo))
        return lo + u * (hi - lo)

    def describe(self, d: int) -> dict:
        return {"samples_per_axis": list(self.counts(d)), "jitter": self.jitter, "seed": self.seed}


def as_grid(grid) -> GridSpec:
    if grid is None:
        return GridSpec()
    if isinstance(grid, GridSpec):
        return grid
    return GridSpec(grid)


def neighbours(shape: tuple[int, ...]):
    """Yield index pairs (flat_i, flat_j) of axis-adjacent samples of a product grid."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    for ax in range(len(shape)):
        a = np.take(idx, range(shape[ax] - 1), axis=ax).ravel()
        b = np.take(idx, range(1, shape[ax]), axis=ax).ravel()
        yield a, b


__all__ = ["GridSpec", "as_grid", "default_samples", "neighbours"]
