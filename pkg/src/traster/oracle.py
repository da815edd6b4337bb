"""Uncompressed reference implementation of the query operations.

Keeps the whole series as one dense array and answers queries by direct
scans. Exists so the compressed structures have something unarguable to be
checked against; never used on the query path itself.
"""
from __future__ import annotations

import numpy as np

from .k2raster import as_grid


class DenseSeries:
    def __init__(self, series):
        grids = [as_grid(m) for m in series]
        if not grids:
            raise ValueError("a series needs at least one frame")
        rows, cols = grids[0].shape
        for g in grids[1:]:
            if g.shape != (rows, cols):
                raise ValueError("all frames must share the same dimensions")
        self.values = np.stack(grids).astype(np.int64)
        self.tau, self.rows, self.cols = self.values.shape

    def _check(self, r, c, t):
        if not 0 <= t < self.tau:
            raise IndexError("time instant out of range")
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError("cell out of range")

    def get_cell(self, r: int, c: int, t: int) -> int:
        self._check(r, c, t)
        return int(self.values[t, r, c])

    def get_cells(self, vb: int, ve: int, r1: int, r2: int, c1: int, c2: int,
                  t: int) -> set[tuple[int, int]]:
        if vb > ve or r1 > r2 or c1 > c2:
            raise ValueError("malformed query")
        self._check(r1, c1, t)
        self._check(r2, c2, t)
        window = self.values[t, r1:r2 + 1, c1:c2 + 1]
        hits = np.argwhere((window >= vb) & (window <= ve))
        return {(int(r) + r1, int(c) + c1) for r, c in hits}

    def frame(self, t: int) -> np.ndarray:
        if not 0 <= t < self.tau:
            raise IndexError("time instant out of range")
        return self.values[t].astype(np.int32)
