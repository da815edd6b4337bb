"""Time series of grids stored as sparse snapshots plus difference trees.

Every ``t_delta``-th frame is kept as a full :class:`~traster.k2raster.K2Raster`
snapshot. Each intermediate frame is a :class:`K2RasterDelta`: the same
quadrant decomposition, but every node describes the frame relative to the
matching region of the preceding snapshot. A node stops subdividing when

* the region is a single cell or holds one uniform value in the target
  frame (flag bit 0), or
* every cell of the region differs from the snapshot by one constant shift,
  identical regions included (flag bit 1).

Leaves carry one bit each, in level order, in ``eq_flags``; a deepest-level
cell always gets a 0 there, since both stop rules coincide for it and cell
leaves are recognised positionally. When a region satisfies both rules the
shift form wins. Max/min gaps are differences against the snapshot region's
own max/min, mapped through zigzag because they can be negative. The root's
two gaps live in the header rather than in the gap sequences.

Queries walk the snapshot and the difference tree in lockstep. Whichever
side reaches a leaf first is frozen: a frozen snapshot side contributes its
uniform region value, a frozen shift leaf contributes its constant offset
while the snapshot side keeps descending. A flag-0 leaf resolves immediately
to ``snapshot_region_max + gap``.
"""
from __future__ import annotations

import numpy as np

from .bitvector import RankBitVector
from .intcodes import (DacSequence, zigzag_decode, zigzag_encode,
                       zigzag_encode_array)
from .k2raster import (K2Raster, _PAD_LO, as_grid, build_pyramids,
                       child_grids, padded_side)


class K2RasterDelta:
    """One frame encoded against a snapshot. Not queryable on its own."""

    __slots__ = ("k", "side", "rows", "cols", "root_max_gap", "root_min_gap",
                 "topology", "eq_flags", "max_gaps", "min_gaps")

    def __init__(self, k: int, side: int, rows: int, cols: int,
                 root_max_gap: int, root_min_gap: int,
                 topology: RankBitVector, eq_flags: RankBitVector,
                 max_gaps: DacSequence, min_gaps: DacSequence):
        self.k = k
        self.side = side
        self.rows = rows
        self.cols = cols
        self.root_max_gap = root_max_gap
        self.root_min_gap = root_min_gap
        self.topology = topology
        self.eq_flags = eq_flags
        self.max_gaps = max_gaps
        self.min_gaps = min_gaps

    @classmethod
    def build(cls, snapshot_raster, target_raster, k: int = 2) -> "K2RasterDelta":
        """Encode ``target_raster`` against ``snapshot_raster``."""
        if k < 2:
            raise ValueError("arity k must be at least 2")
        snap = as_grid(snapshot_raster)
        target = as_grid(target_raster)
        if snap.shape != target.shape:
            raise ValueError("snapshot and target dimensions differ")
        rows, cols = snap.shape
        side = padded_side(k, rows, cols)
        s_maxp, s_minp = build_pyramids(snap, k, side)
        return cls._from_grids(k, side, snap, s_maxp, s_minp, target)

    @classmethod
    def _from_grids(cls, k, side, snap_grid, s_maxp, s_minp, target) -> "K2RasterDelta":
        rows, cols = target.shape
        t_maxp, t_minp = build_pyramids(target, k, side)
        d_maxp, d_minp = build_pyramids(target - snap_grid, k, side)
        levels = len(t_maxp) - 1
        k2 = k * k

        root_max_gap = int(t_maxp[0][0, 0]) - int(s_maxp[0][0, 0])
        root_min_gap = int(t_minp[0][0, 0]) - int(s_minp[0][0, 0])

        t_parts: list[np.ndarray] = []
        eq_parts: list[np.ndarray] = []
        lmax_parts: list[np.ndarray] = []
        lmin_parts: list[np.ndarray] = []

        if levels == 0 or int(t_maxp[0][0, 0]) == int(t_minp[0][0, 0]):
            eq_parts.append(np.zeros(1, dtype=np.int64))
        elif int(d_maxp[0][0, 0]) == int(d_minp[0][0, 0]):
            eq_parts.append(np.ones(1, dtype=np.int64))
        else:
            act_i = np.zeros(1, dtype=np.int64)
            act_j = np.zeros(1, dtype=np.int64)
            for lv in range(1, levels + 1):
                ci, cj = child_grids(act_i, act_j, k)
                tmax = t_maxp[lv][ci, cj]
                tmin = t_minp[lv][ci, cj]
                smax = s_maxp[lv][ci, cj]
                smin = s_minp[lv][ci, cj]
                # padding regions have equal sentinels on both sides, so the
                # gap below collapses to 0 and the node reads as a shift leaf
                max_gaps = tmax - smax
                lmax_parts.append(zigzag_encode_array(max_gaps))
                if lv == levels:
                    # cell level: always a leaf, flag fixed to 0
                    eq_parts.append(np.zeros(max_gaps.shape[0], dtype=np.int64))
                    break
                fake = tmax == _PAD_LO
                shift = (d_maxp[lv][ci, cj] == d_minp[lv][ci, cj]) & ~fake
                unif = (tmax == tmin) & ~fake & ~shift
                inner = ~(fake | shift | unif)
                t_parts.append(inner)
                leaf = ~inner
                eq_parts.append((fake | shift)[leaf].astype(np.int64))
                if not inner.any():
                    break
                lmin_parts.append(zigzag_encode_array((tmin - smin)[inner]))
                act_i = ci[inner]
                act_j = cj[inner]

        empty = np.zeros(0, dtype=np.int64)
        topology = RankBitVector.from_bits(
            np.concatenate(t_parts) if t_parts else empty)
        eq_flags = RankBitVector.from_bits(
            np.concatenate(eq_parts) if eq_parts else empty)
        max_gaps = DacSequence.build(
            np.concatenate(lmax_parts) if lmax_parts else empty)
        min_gaps = DacSequence.build(
            np.concatenate(lmin_parts) if lmin_parts else empty)
        return cls(k, side, rows, cols, root_max_gap, root_min_gap,
                   topology, eq_flags, max_gaps, min_gaps)

    @property
    def node_count(self) -> int:
        return 1 + len(self.max_gaps)

    def __repr__(self) -> str:
        return (f"K2RasterDelta(k={self.k}, {self.rows}x{self.cols}, "
                f"nodes={self.node_count})")


def _delta_get_cell(snap: K2Raster, delta: K2RasterDelta, r: int, c: int) -> int:
    """Lockstep descent over snapshot and difference trees for one cell."""
    k = snap.k
    k2 = k * k
    s_topo, s_gaps = snap.topology, snap.max_gaps
    d_topo, d_gaps, d_eq = delta.topology, delta.max_gaps, delta.eq_flags
    ns = len(s_topo)
    nd = len(d_topo)

    s_value = snap.root_max
    d_gap = delta.root_max_gap
    s_live = len(s_gaps) > 0
    if len(d_gaps) == 0:
        if not d_eq.access(0):
            # uniform frame region: snapshot region max plus gap
            return s_value + d_gap
        d_live = False
    else:
        d_live = True
    if not s_live and not d_live:
        return s_value + d_gap

    s_pos = -1
    d_pos = -1
    size = snap.side
    while True:
        size //= k
        child = (r // size) * k + (c // size)
        r %= size
        c %= size
        if s_live:
            s_pos = (s_topo.rank1(s_pos + 1) * k2 if s_pos >= 0 else 0) + child
            s_value -= s_gaps.access(s_pos)
            s_leaf = s_pos >= ns or not s_topo.access(s_pos)
        else:
            s_leaf = True
        if d_live:
            d_pos = (d_topo.rank1(d_pos + 1) * k2 if d_pos >= 0 else 0) + child
            d_gap = zigzag_decode(d_gaps.access(d_pos))
            d_leaf = d_pos >= nd or not d_topo.access(d_pos)
        else:
            d_leaf = True
        if s_leaf and d_leaf:
            # both sides settled; covers every leaf flavour, because a
            # frozen or uniform snapshot region makes its max the cell value
            return s_value + d_gap
        if s_leaf:
            s_live = False
            continue
        if d_leaf and d_live:
            # the difference tree stopped while the snapshot goes deeper;
            # cell-level stops cannot reach here, so the flag bit exists
            if not d_eq.access(d_topo.rank0(d_pos)):
                return s_value + d_gap
            d_live = False


def _delta_get_cells(snap: K2Raster, delta: K2RasterDelta, vb, ve,
                     r1, r2, c1, c2) -> list[tuple[int, int]]:
    """Windowed range query over one difference-encoded frame."""
    out: list[tuple[int, int]] = []
    s_topo, s_gmax, s_gmin = snap.topology, snap.max_gaps, snap.min_gaps
    d_topo, d_gmax, d_gmin = delta.topology, delta.max_gaps, delta.min_gaps
    d_eq = delta.eq_flags
    ns = len(s_topo)
    nd = len(d_topo)
    k = snap.k
    k2 = k * k

    def emit(br, bc, size):
        for r in range(max(br, r1), min(br + size, r2 + 1)):
            row = [(r, c) for c in range(max(bc, c1), min(bc + size, c2 + 1))]
            out.extend(row)

    # Snapshot side: s_pos None means the region is uniform with value
    # s_min == s_max (leaf reached or frozen). Difference side: d_pos None
    # means a shift leaf was entered and d_a holds the constant offset;
    # otherwise d_a / d_b are the node's max/min gaps.
    def visit(br, bc, size, s_pos, s_min, s_max, d_pos, d_a, d_b):
        if d_pos is None:
            lo = s_min + d_a
            hi = s_max + d_a
        else:
            lo = s_min + d_b
            hi = s_max + d_a
        if hi < vb or lo > ve:
            return
        if vb <= lo and hi <= ve:
            emit(br, bc, size)
            return
        csize = size // k
        s_base = (s_topo.rank1(s_pos + 1) * k2 if s_pos >= 0 else 0) \
            if s_pos is not None else 0
        d_base = (d_topo.rank1(d_pos + 1) * k2 if d_pos >= 0 else 0) \
            if d_pos is not None else 0
        for di in range(k):
            cbr = br + di * csize
            if cbr > r2 or cbr + csize <= r1:
                continue
            for dj in range(k):
                cbc = bc + dj * csize
                if cbc > c2 or cbc + csize <= c1:
                    continue
                child = di * k + dj
                if s_pos is None:
                    cs_pos, cs_min, cs_max = None, s_min, s_max
                else:
                    p = s_base + child
                    m = s_max - s_gmax.access(p)
                    if p < ns and s_topo.access(p):
                        cs_pos = p
                        cs_max = m
                        cs_min = s_min + s_gmin.access(s_topo.rank1(p))
                    else:
                        cs_pos, cs_min, cs_max = None, m, m
                if d_pos is None:
                    visit(cbr, cbc, csize, cs_pos, cs_min, cs_max,
                          None, d_a, 0)
                    continue
                p = d_base + child
                gap = zigzag_decode(d_gmax.access(p))
                if p < nd and d_topo.access(p):
                    gmin = zigzag_decode(d_gmin.access(d_topo.rank1(p)))
                    visit(cbr, cbc, csize, cs_pos, cs_min, cs_max,
                          p, gap, gmin)
                elif p < nd and d_eq.access(d_topo.rank0(p)):
                    visit(cbr, cbc, csize, cs_pos, cs_min, cs_max,
                          None, gap, 0)
                else:
                    # uniform target region (or a single cell)
                    value = cs_max + gap
                    if vb <= value <= ve:
                        emit(cbr, cbc, csize)

    s_pos0 = -1 if len(snap.max_gaps) else None
    if len(delta.max_gaps) == 0:
        if delta.eq_flags.access(0):
            visit(0, 0, snap.side, s_pos0, snap.root_min, snap.root_max,
                  None, delta.root_max_gap, 0)
        else:
            value = snap.root_max + delta.root_max_gap
            if vb <= value <= ve:
                emit(0, 0, snap.side)
    else:
        visit(0, 0, snap.side, s_pos0, snap.root_min, snap.root_max,
              -1, delta.root_max_gap, delta.root_min_gap)
    return out


def _delta_decompress(snap: K2Raster, delta: K2RasterDelta) -> np.ndarray:
    """Materialise a difference-encoded frame on top of its snapshot."""
    base = snap.decompress().astype(np.int64)
    rows, cols = base.shape
    out = np.empty_like(base)
    d_topo, d_gaps, d_eq = delta.topology, delta.max_gaps, delta.eq_flags
    nd = len(d_topo)
    k = delta.k
    k2 = k * k

    if len(delta.max_gaps) == 0:
        if delta.eq_flags.access(0):
            out = base + delta.root_max_gap
        else:
            out[:] = snap.root_max + delta.root_max_gap
        return out.astype(np.int32)

    stack = [(0, 0, delta.side, -1)]
    while stack:
        br, bc, size, pos = stack.pop()
        base_idx = d_topo.rank1(pos + 1) * k2 if pos >= 0 else 0
        csize = size // k
        for di in range(k):
            cbr = br + di * csize
            if cbr >= rows:
                break
            for dj in range(k):
                cbc = bc + dj * csize
                if cbc >= cols:
                    break
                p = base_idx + di * k + dj
                gap = zigzag_decode(d_gaps.access(p))
                sl = (slice(cbr, cbr + csize), slice(cbc, cbc + csize))
                if p < nd and d_topo.access(p):
                    stack.append((cbr, cbc, csize, p))
                elif p < nd and not d_eq.access(d_topo.rank0(p)):
                    out[sl] = int(base[sl].max()) + gap
                else:
                    # constant shift over the region, or a single cell
                    out[sl] = base[sl] + gap
    return out.astype(np.int32)


class TK2Raster:
    """A queryable series of frames: snapshots plus difference trees."""

    __slots__ = ("k", "t_delta", "rows", "cols", "frames", "_snap_idx")

    def __init__(self, k: int, t_delta: int, rows: int, cols: int, frames: list):
        if not frames:
            raise ValueError("a series needs at least one frame")
        if not isinstance(frames[0], K2Raster):
            raise ValueError("the first frame must be a snapshot")
        self.k = k
        self.t_delta = t_delta  # 0 means snapshots were placed adaptively
        self.rows = rows
        self.cols = cols
        self.frames = frames
        snap_idx = []
        last = 0
        for i, frame in enumerate(frames):
            if isinstance(frame, K2Raster):
                last = i
            snap_idx.append(last)
        self._snap_idx = snap_idx

    @classmethod
    def build(cls, series, k: int = 2, t_delta: int = 6,
              auto_snapshot: bool = False, auto_threshold: float = 0.8) -> "TK2Raster":
        """Compress a series of equally sized rasters.

        With ``auto_snapshot`` the fixed cadence is ignored: a frame becomes
        a fresh snapshot whenever its difference tree would exceed
        ``auto_threshold`` times the current snapshot's node count.
        """
        if k < 2:
            raise ValueError("arity k must be at least 2")
        if t_delta < 1:
            raise ValueError("t_delta must be at least 1")
        if not 0 < auto_threshold:
            raise ValueError("auto_threshold must be positive")
        grids = [as_grid(m) for m in series]
        if not grids:
            raise ValueError("a series needs at least one frame")
        rows, cols = grids[0].shape
        for g in grids[1:]:
            if g.shape != (rows, cols):
                raise ValueError("all frames must share the same dimensions")
        side = padded_side(k, rows, cols)

        frames: list = []
        snap_grid = None
        snap_maxp = snap_minp = None
        snap_nodes = 0
        for i, grid in enumerate(grids):
            delta = None
            make_snap = i == 0 or (not auto_snapshot and i % t_delta == 0)
            if not make_snap:
                delta = K2RasterDelta._from_grids(
                    k, side, snap_grid, snap_maxp, snap_minp, grid)
                if auto_snapshot and delta.node_count > auto_threshold * snap_nodes:
                    make_snap = True
            if make_snap:
                maxp, minp = build_pyramids(grid, k, side)
                snap = K2Raster._from_pyramids(k, side, rows, cols, maxp, minp)
                frames.append(snap)
                snap_grid = grid
                snap_maxp, snap_minp = maxp, minp
                snap_nodes = snap.node_count
            else:
                frames.append(delta)
        return cls(k, 0 if auto_snapshot else t_delta, rows, cols, frames)

    @property
    def tau(self) -> int:
        return len(self.frames)

    def snapshot_index(self, t: int) -> int:
        """Index of the snapshot frame t is encoded against (t itself if a snapshot)."""
        self._check_t(t)
        return self._snap_idx[t]

    def _check_t(self, t: int) -> None:
        if not 0 <= t < len(self.frames):
            raise IndexError(f"time instant {t} out of range [0, {len(self.frames)})")

    def get_cell_value(self, r: int, c: int, t: int) -> int:
        """Value of cell (r, c) at instant t."""
        self._check_t(t)
        frame = self.frames[t]
        if isinstance(frame, K2Raster):
            return frame.get_cell(r, c)
        snap = self.frames[self._snap_idx[t]]
        snap._check_cell(r, c)
        return _delta_get_cell(snap, frame, r, c)

    def get_cells(self, vb: int, ve: int, r1: int, r2: int, c1: int, c2: int,
                  t: int) -> list[tuple[int, int]]:
        """Cells of frame t inside the window with value in [vb, ve]."""
        self._check_t(t)
        frame = self.frames[t]
        if isinstance(frame, K2Raster):
            return frame.get_cells(vb, ve, r1, r2, c1, c2)
        snap = self.frames[self._snap_idx[t]]
        snap._check_query(vb, ve, r1, r2, c1, c2)
        return _delta_get_cells(snap, frame, vb, ve, r1, r2, c1, c2)

    def decompress_frame(self, t: int) -> np.ndarray:
        """Reconstruct frame t as a rows x cols array."""
        self._check_t(t)
        frame = self.frames[t]
        if isinstance(frame, K2Raster):
            return frame.decompress()
        return _delta_decompress(self.frames[self._snap_idx[t]], frame)

    def stats(self) -> dict:
        """Per-frame serialized sizes; ``total_bytes`` is the full file size."""
        from . import dataio

        per_frame = []
        for i, frame in enumerate(self.frames):
            is_snap = isinstance(frame, K2Raster)
            per_frame.append({
                "t": i,
                "kind": "snapshot" if is_snap else "delta",
                "bytes": len(dataio.frame_block(frame)),
                "nodes": frame.node_count,
            })
        return {
            "k": self.k,
            "t_delta": self.t_delta,
            "tau": self.tau,
            "rows": self.rows,
            "cols": self.cols,
            "total_bytes": len(dataio.serialize(self)),
            "frames": per_frame,
        }

    def __repr__(self) -> str:
        snaps = sum(1 for f in self.frames if isinstance(f, K2Raster))
        return (f"TK2Raster(k={self.k}, {self.rows}x{self.cols}, "
                f"tau={self.tau}, snapshots={snaps})")
