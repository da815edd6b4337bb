"""Compressed integer grid built on a k-squared-ary min/max partition.

The grid is conceptually padded to a k-power square and cut recursively into
k x k quadrants. A node stops subdividing when every covered cell holds the
same value or the node is a single cell. The tree is stored level by level:

* ``topology``: one bit per node below the root except nodes at the deepest
  (single-cell) level; 1 = the node subdivides further, 0 = leaf.
* ``max_gaps``: for every node below the root, its maximum encoded as
  ``parent_max - node_max`` (never negative).
* ``min_gaps``: for subdividing nodes only, ``node_min - parent_min``,
  addressed through rank1 over ``topology``.

Positions are 0-based over all non-root nodes in level order. The children
of the node at topology position z start at ``rank1(topology, z+1) * k**2``;
the root's children occupy positions 0..k**2-1. A position at or past
``len(topology)`` belongs to the deepest level and is always a leaf.

Queries run directly on this form; nothing is decompressed along the way.
All values are 32-bit signed integers and structures are immutable after
construction, so concurrent reads need no locking.
"""
from __future__ import annotations

import numpy as np

from .bitvector import RankBitVector
from .intcodes import DacSequence

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1

# Sentinels for padding cells in the min/max tables. Real values are 32-bit,
# so the sentinels survive every reduction unscathed and compare unequal.
_PAD_LO = -(1 << 62)
_PAD_HI = 1 << 62


def as_grid(values) -> np.ndarray:
    """Validate a raster: non-empty 2-D integers within 32-bit signed range."""
    a = np.asarray(values)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("raster must be a non-empty 2-D grid")
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError("raster values must be integers")
    a = a.astype(np.int64, copy=False)
    if int(a.min()) < INT32_MIN or int(a.max()) > INT32_MAX:
        raise ValueError("raster values must fit in a 32-bit signed integer")
    return a


def padded_side(k: int, rows: int, cols: int) -> int:
    """Smallest power of k covering both dimensions."""
    side = 1
    while side < max(rows, cols):
        side *= k
    return side


def build_pyramids(grid: np.ndarray, k: int, side: int):
    """Per-level max/min tables over the padded grid.

    Level L is the padded grid itself (padding cells carry sentinels), level
    L-1 aggregates k x k blocks, and so on down to the 1x1 root at level 0.
    An all-padding region keeps its sentinel, which marks it as fake.
    """
    rows, cols = grid.shape
    levels = 0
    s = side
    while s > 1:
        s //= k
        levels += 1
    mx = np.full((side, side), _PAD_LO, dtype=np.int64)
    mn = np.full((side, side), _PAD_HI, dtype=np.int64)
    mx[:rows, :cols] = grid
    mn[:rows, :cols] = grid
    max_pyr = [np.empty(0)] * (levels + 1)
    min_pyr = [np.empty(0)] * (levels + 1)
    max_pyr[levels] = mx
    min_pyr[levels] = mn
    for lv in range(levels - 1, -1, -1):
        s = k ** lv
        mx = mx.reshape(s, k, s, k).max(axis=(1, 3))
        mn = mn.reshape(s, k, s, k).min(axis=(1, 3))
        max_pyr[lv] = mx
        min_pyr[lv] = mn
    return max_pyr, min_pyr


def child_grids(act_i: np.ndarray, act_j: np.ndarray, k: int):
    """Child coordinates of every active node, row-major within each node."""
    n = act_i.shape[0]
    offs = np.arange(k, dtype=np.int64)
    ci = np.broadcast_to((act_i[:, None] * k + offs)[:, :, None], (n, k, k))
    cj = np.broadcast_to((act_j[:, None] * k + offs)[:, None, :], (n, k, k))
    return ci.reshape(-1), cj.reshape(-1)


class K2Raster:
    """A single compressed grid. Build once, then query or decompress."""

    __slots__ = ("k", "side", "rows", "cols", "root_min", "root_max",
                 "topology", "max_gaps", "min_gaps")

    def __init__(self, k: int, side: int, rows: int, cols: int,
                 root_min: int, root_max: int, topology: RankBitVector,
                 max_gaps: DacSequence, min_gaps: DacSequence):
        self.k = k
        self.side = side
        self.rows = rows
        self.cols = cols
        self.root_min = root_min
        self.root_max = root_max
        self.topology = topology
        self.max_gaps = max_gaps
        self.min_gaps = min_gaps

    @classmethod
    def build(cls, raster, k: int = 2) -> "K2Raster":
        if k < 2:
            raise ValueError("arity k must be at least 2")
        grid = as_grid(raster)
        rows, cols = grid.shape
        side = padded_side(k, rows, cols)
        max_pyr, min_pyr = build_pyramids(grid, k, side)
        return cls._from_pyramids(k, side, rows, cols, max_pyr, min_pyr)

    @classmethod
    def _from_pyramids(cls, k, side, rows, cols, max_pyr, min_pyr) -> "K2Raster":
        levels = len(max_pyr) - 1
        k2 = k * k
        root_max = int(max_pyr[0][0, 0])
        root_min = int(min_pyr[0][0, 0])
        t_parts: list[np.ndarray] = []
        lmax_parts: list[np.ndarray] = []
        lmin_parts: list[np.ndarray] = []
        if root_min != root_max:
            act_i = np.zeros(1, dtype=np.int64)
            act_j = np.zeros(1, dtype=np.int64)
            par_max = np.full(1, root_max, dtype=np.int64)
            par_min = np.full(1, root_min, dtype=np.int64)
            for lv in range(1, levels + 1):
                ci, cj = child_grids(act_i, act_j, k)
                cmax = max_pyr[lv][ci, cj]
                cmin = min_pyr[lv][ci, cj]
                pmax = np.repeat(par_max, k2)
                pmin = np.repeat(par_min, k2)
                fake = cmax == _PAD_LO
                # all-padding quadrants become leaves with gap 0; queries
                # are clamped to the real grid and never reach them
                cmax = np.where(fake, pmax, cmax)
                cmin = np.where(fake, pmax, cmin)
                lmax_parts.append(pmax - cmax)
                if lv == levels:
                    break
                inner = cmin != cmax
                t_parts.append(inner)
                if not inner.any():
                    break
                lmin_parts.append(cmin[inner] - pmin[inner])
                act_i = ci[inner]
                act_j = cj[inner]
                par_max = cmax[inner]
                par_min = cmin[inner]
        empty = np.zeros(0, dtype=np.int64)
        topology = RankBitVector.from_bits(
            np.concatenate(t_parts) if t_parts else empty)
        max_gaps = DacSequence.build(
            np.concatenate(lmax_parts) if lmax_parts else empty)
        min_gaps = DacSequence.build(
            np.concatenate(lmin_parts) if lmin_parts else empty)
        return cls(k, side, rows, cols, root_min, root_max,
                   topology, max_gaps, min_gaps)

    @property
    def node_count(self) -> int:
        """Tree nodes including the root."""
        return 1 + len(self.max_gaps)

    def _check_cell(self, r: int, c: int) -> None:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"cell ({r}, {c}) outside {self.rows}x{self.cols} grid")

    def _check_query(self, vb, ve, r1, r2, c1, c2) -> None:
        if vb > ve:
            raise ValueError("value range lower bound exceeds upper bound")
        if r1 > r2 or c1 > c2:
            raise ValueError("window corners are not ordered")
        if not (0 <= r1 and r2 < self.rows and 0 <= c1 and c2 < self.cols):
            raise IndexError(f"window outside {self.rows}x{self.cols} grid")

    def get_cell(self, r: int, c: int) -> int:
        """Value at (r, c), resolved by a single root-to-leaf descent."""
        self._check_cell(r, c)
        if len(self.max_gaps) == 0:
            return self.root_max
        topo = self.topology
        gaps = self.max_gaps
        nbits = len(topo)
        k = self.k
        k2 = k * k
        size = self.side
        pos = -1
        value = self.root_max
        while True:
            size //= k
            child = (r // size) * k + (c // size)
            pos = (topo.rank1(pos + 1) * k2 if pos >= 0 else 0) + child
            value -= gaps.access(pos)
            if pos >= nbits or not topo.access(pos):
                return value
            r %= size
            c %= size

    def get_cells(self, vb: int, ve: int, r1: int, r2: int,
                  c1: int, c2: int) -> list[tuple[int, int]]:
        """Cells inside the window whose value lies in [vb, ve].

        Subtrees whose min/max range misses [vb, ve] or whose quadrant
        misses the window are skipped; subtrees fully inside both are
        reported without descending. Each matching cell appears exactly
        once; order follows the traversal.
        """
        self._check_query(vb, ve, r1, r2, c1, c2)
        out: list[tuple[int, int]] = []
        topo = self.topology
        gmax = self.max_gaps
        gmin = self.min_gaps
        nbits = len(topo)
        k = self.k
        k2 = k * k

        def emit(br, bc, size):
            for r in range(max(br, r1), min(br + size, r2 + 1)):
                row = [(r, c) for c in range(max(bc, c1), min(bc + size, c2 + 1))]
                out.extend(row)

        def descend(br, bc, size, pos, lo, hi):
            base = topo.rank1(pos + 1) * k2 if pos >= 0 else 0
            csize = size // k
            for di in range(k):
                cbr = br + di * csize
                if cbr > r2 or cbr + csize <= r1:
                    continue
                for dj in range(k):
                    cbc = bc + dj * csize
                    if cbc > c2 or cbc + csize <= c1:
                        continue
                    p = base + di * k + dj
                    cmax = hi - gmax.access(p)
                    if p < nbits and topo.access(p):
                        cmin = lo + gmin.access(topo.rank1(p))
                        if cmax < vb or cmin > ve:
                            continue
                        if vb <= cmin and cmax <= ve:
                            emit(cbr, cbc, csize)
                        else:
                            descend(cbr, cbc, csize, p, cmin, cmax)
                    elif vb <= cmax <= ve:
                        emit(cbr, cbc, csize)

        if len(self.max_gaps) == 0:
            if vb <= self.root_max <= ve:
                emit(0, 0, self.side)
        elif self.root_max < vb or self.root_min > ve:
            pass
        elif vb <= self.root_min and self.root_max <= ve:
            emit(0, 0, self.side)
        else:
            descend(0, 0, self.side, -1, self.root_min, self.root_max)
        return out

    def decompress(self) -> np.ndarray:
        """Reconstruct the original rows x cols grid."""
        out = np.empty((self.rows, self.cols), dtype=np.int64)
        if len(self.max_gaps) == 0:
            out[:] = self.root_max
            return out.astype(np.int32)
        topo = self.topology
        gaps = self.max_gaps
        nbits = len(topo)
        k = self.k
        k2 = k * k
        stack = [(0, 0, self.side, -1, self.root_max)]
        while stack:
            br, bc, size, pos, value = stack.pop()
            base = topo.rank1(pos + 1) * k2 if pos >= 0 else 0
            csize = size // k
            for di in range(k):
                cbr = br + di * csize
                if cbr >= self.rows:
                    break
                for dj in range(k):
                    cbc = bc + dj * csize
                    if cbc >= self.cols:
                        break
                    p = base + di * k + dj
                    cval = value - gaps.access(p)
                    if p < nbits and topo.access(p):
                        stack.append((cbr, cbc, csize, p, cval))
                    else:
                        out[cbr:cbr + csize, cbc:cbc + csize] = cval
        return out.astype(np.int32)

    def stats(self) -> dict:
        """Size breakdown; ``total_bytes`` equals the serialized length."""
        from . import dataio

        return {
            "topology_bits": len(self.topology),
            "max_gap_bits": self.max_gaps.payload_bits,
            "min_gap_bits": self.min_gaps.payload_bits,
            "total_bytes": len(dataio.serialize(self)),
            "node_count": self.node_count,
        }

    def __repr__(self) -> str:
        return (f"K2Raster(k={self.k}, {self.rows}x{self.cols}, "
                f"nodes={self.node_count})")
