"""File formats, serialization, and synthetic series generators.

All multi-byte fields are little-endian. Serialization is canonical: the
same structure always produces the same bytes, so round-trips can be
compared byte for byte.

Grid file (dense series interchange)::

    "GRD1" | rows u32 | cols u32 | tau u32 | value_width u8 (32) |
    endian u8 (0 = little) | tau * rows * cols values as i32, row-major

Bit vector block::

    length_bits u64 | payload bytes, LSB-first, zero-padded to whole bytes

Chunked sequence block::

    level_count u8 | per level: width_bits u8 | chunk_count u64 |
    packed chunks (chunk_count * width_bits bits, LSB-first) |
    continuation bit vector block

Snapshot block ("K2R1") and difference block ("K2RD")::

    magic | version u8 | k u8 | side u32 | rows u32 | cols u32 |
    root fields | topology bits | [eq flag bits] | max gaps | min gaps

    snapshot roots: root_min i32, root_max i32
    difference roots: zigzag(root_max_gap) u64, zigzag(root_min_gap) u64

Series container ("TK2R")::

    magic | version u8 | k u8 | t_delta u32 (0 = adaptive) | tau u32 |
    rows u32 | cols u32 | tau frame offsets u64 (relative to the first
    frame byte) | frames, each: kind u8 (0 snapshot / 1 delta) + block
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .bitvector import RankBitVector
from .intcodes import DacSequence, zigzag_decode, zigzag_encode
from .k2raster import INT32_MAX, INT32_MIN, K2Raster, as_grid, padded_side
from .tk2raster import K2RasterDelta, TK2Raster

MAGIC_GRID = b"GRD1"
MAGIC_SNAPSHOT = b"K2R1"
MAGIC_DELTA = b"K2RD"
MAGIC_SERIES = b"TK2R"
FORMAT_VERSION = 1


class FormatError(ValueError):
    """Base class for malformed or unreadable files."""


class BadMagicError(FormatError):
    """The leading magic bytes identify no known format."""


class TruncatedError(FormatError):
    """The data ends before the structure it promises."""


class DimensionError(FormatError):
    """Header dimensions are zero, inconsistent, or out of range."""


class VersionError(FormatError):
    """The format version is not supported."""


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedError(
                f"need {n} bytes at offset {self.pos}, "
                f"only {len(self.data) - self.pos} left")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def i32(self) -> int:
        return struct.unpack("<i", self.take(4))[0]

    def done(self) -> bool:
        return self.pos == len(self.data)


def _write_bitvector(buf: bytearray, v: RankBitVector) -> None:
    buf += struct.pack("<Q", len(v))
    buf += v.payload


def _read_bitvector(rd: _Reader) -> RankBitVector:
    length = rd.u64()
    payload = rd.take((length + 7) // 8)
    try:
        return RankBitVector(payload, length)
    except ValueError as exc:
        raise FormatError(f"corrupt bit vector: {exc}") from None


def _pack_chunks(chunks: list[int], width: int) -> bytes:
    if width == 8:
        return bytes(chunks)
    a = np.asarray(chunks, dtype=np.int64)
    bits = ((a[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def _unpack_chunks(payload: bytes, count: int, width: int) -> list[int]:
    if width == 8:
        return list(payload)
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                         bitorder="little")
    weights = np.int64(1) << np.arange(width, dtype=np.int64)
    vals = bits[:count * width].reshape(count, width).astype(np.int64) @ weights
    return vals.tolist()


def _write_dac(buf: bytearray, seq: DacSequence) -> None:
    levels = seq.levels
    buf += struct.pack("<B", len(levels))
    for chunks, cont, width in levels:
        buf += struct.pack("<BQ", width, len(chunks))
        buf += _pack_chunks(chunks, width)
        _write_bitvector(buf, cont)


def _read_dac(rd: _Reader) -> DacSequence:
    level_count = rd.u8()
    chunks: list[list[int]] = []
    cont: list[RankBitVector] = []
    widths: list[int] = []
    for _ in range(level_count):
        width = rd.u8()
        if not 1 <= width <= 32:
            raise FormatError(f"chunk width {width} out of range")
        count = rd.u64()
        payload = rd.take((count * width + 7) // 8)
        level = _unpack_chunks(payload, count, width)
        if width != 8 and count * width % 8:
            # canonical form keeps padding bits zero
            spare = np.unpackbits(np.frombuffer(payload[-1:], dtype=np.uint8),
                                  bitorder="little")[count * width % 8:]
            if spare.any():
                raise FormatError("corrupt chunk padding")
        flags = _read_bitvector(rd)
        if len(flags) != count:
            raise FormatError("continuation flags do not match chunk count")
        chunks.append(level)
        cont.append(flags)
        widths.append(width)
    for lvl in range(level_count):
        expected = cont[lvl].popcount
        if lvl + 1 < level_count:
            if len(chunks[lvl + 1]) != expected:
                raise FormatError("level sizes disagree with continuation flags")
        elif expected:
            raise FormatError("deepest level still has continuing values")
    length = len(chunks[0]) if chunks else 0
    return DacSequence(chunks, cont, widths, length)


def _check_header(k: int, side: int, rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise DimensionError("dimensions must be positive")
    if k < 2:
        raise FormatError(f"arity {k} out of range")
    if side != padded_side(k, rows, cols):
        raise DimensionError("side does not match k and the grid dimensions")


def _write_snapshot(buf: bytearray, s: K2Raster) -> None:
    buf += MAGIC_SNAPSHOT
    buf += struct.pack("<BBIII", FORMAT_VERSION, s.k, s.side, s.rows, s.cols)
    buf += struct.pack("<ii", s.root_min, s.root_max)
    _write_bitvector(buf, s.topology)
    _write_dac(buf, s.max_gaps)
    _write_dac(buf, s.min_gaps)


def _read_snapshot(rd: _Reader) -> K2Raster:
    if rd.take(4) != MAGIC_SNAPSHOT:
        raise BadMagicError("expected a snapshot block")
    version = rd.u8()
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported snapshot version {version}")
    k = rd.u8()
    side, rows, cols = rd.u32(), rd.u32(), rd.u32()
    _check_header(k, side, rows, cols)
    root_min, root_max = rd.i32(), rd.i32()
    if root_min > root_max:
        raise FormatError("root minimum exceeds root maximum")
    topology = _read_bitvector(rd)
    max_gaps = _read_dac(rd)
    min_gaps = _read_dac(rd)
    if len(min_gaps) != topology.popcount:
        raise FormatError("min gap count does not match inner node count")
    return K2Raster(k, side, rows, cols, root_min, root_max,
                    topology, max_gaps, min_gaps)


def _write_delta(buf: bytearray, d: K2RasterDelta) -> None:
    buf += MAGIC_DELTA
    buf += struct.pack("<BBIII", FORMAT_VERSION, d.k, d.side, d.rows, d.cols)
    buf += struct.pack("<QQ", zigzag_encode(d.root_max_gap),
                       zigzag_encode(d.root_min_gap))
    _write_bitvector(buf, d.topology)
    _write_bitvector(buf, d.eq_flags)
    _write_dac(buf, d.max_gaps)
    _write_dac(buf, d.min_gaps)


def _read_delta(rd: _Reader) -> K2RasterDelta:
    if rd.take(4) != MAGIC_DELTA:
        raise BadMagicError("expected a difference block")
    version = rd.u8()
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported difference block version {version}")
    k = rd.u8()
    side, rows, cols = rd.u32(), rd.u32(), rd.u32()
    _check_header(k, side, rows, cols)
    root_max_gap = zigzag_decode(rd.u64())
    root_min_gap = zigzag_decode(rd.u64())
    topology = _read_bitvector(rd)
    eq_flags = _read_bitvector(rd)
    max_gaps = _read_dac(rd)
    min_gaps = _read_dac(rd)
    if len(min_gaps) != topology.popcount:
        raise FormatError("min gap count does not match inner node count")
    return K2RasterDelta(k, side, rows, cols, root_max_gap, root_min_gap,
                         topology, eq_flags, max_gaps, min_gaps)


def frame_block(frame) -> bytes:
    """Serialized body of one frame, without the container's kind byte."""
    buf = bytearray()
    if isinstance(frame, K2Raster):
        _write_snapshot(buf, frame)
    elif isinstance(frame, K2RasterDelta):
        _write_delta(buf, frame)
    else:
        raise TypeError(f"not a frame: {type(frame).__name__}")
    return bytes(buf)


def serialize(obj) -> bytes:
    """Canonical byte form of a K2Raster or TK2Raster."""
    if isinstance(obj, K2Raster):
        return frame_block(obj)
    if not isinstance(obj, TK2Raster):
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    blocks = []
    offsets = []
    at = 0
    for frame in obj.frames:
        kind = 0 if isinstance(frame, K2Raster) else 1
        block = bytes([kind]) + frame_block(frame)
        offsets.append(at)
        blocks.append(block)
        at += len(block)
    buf = bytearray()
    buf += MAGIC_SERIES
    buf += struct.pack("<BBIIII", FORMAT_VERSION, obj.k, obj.t_delta,
                       obj.tau, obj.rows, obj.cols)
    for off in offsets:
        buf += struct.pack("<Q", off)
    for block in blocks:
        buf += block
    return bytes(buf)


def deserialize(data: bytes):
    """Parse bytes produced by :func:`serialize`; dispatches on the magic."""
    if len(data) < 4:
        raise BadMagicError("data too short to carry a format magic")
    magic = data[:4]
    rd = _Reader(data)
    if magic == MAGIC_SNAPSHOT:
        snap = _read_snapshot(rd)
        if not rd.done():
            raise FormatError("trailing bytes after the snapshot block")
        return snap
    if magic != MAGIC_SERIES:
        raise BadMagicError(f"unknown format magic {magic!r}")
    rd.take(4)
    version = rd.u8()
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported container version {version}")
    k = rd.u8()
    t_delta = rd.u32()
    tau = rd.u32()
    rows, cols = rd.u32(), rd.u32()
    if tau < 1:
        raise DimensionError("container holds no frames")
    if rows < 1 or cols < 1:
        raise DimensionError("dimensions must be positive")
    offsets = [rd.u64() for _ in range(tau)]
    start = rd.pos
    frames: list = []
    for i, off in enumerate(offsets):
        if rd.pos - start != off:
            raise FormatError(f"frame table offset {i} does not match the data")
        kind = rd.u8()
        if kind == 0:
            frame = _read_snapshot(rd)
        elif kind == 1:
            frame = _read_delta(rd)
        else:
            raise FormatError(f"unknown frame kind {kind}")
        if frame.k != k or frame.rows != rows or frame.cols != cols:
            raise FormatError(f"frame {i} header disagrees with the container")
        frames.append(frame)
    if not rd.done():
        raise FormatError("trailing bytes after the last frame")
    if not isinstance(frames[0], K2Raster):
        raise FormatError("the first frame must be a snapshot")
    return TK2Raster(k, t_delta, rows, cols, frames)


def write_container(path, obj) -> None:
    Path(path).write_bytes(serialize(obj))


def read_container(path):
    return deserialize(Path(path).read_bytes())


def _as_series(series) -> np.ndarray:
    grids = [as_grid(m) for m in series]
    if not grids:
        raise ValueError("a series needs at least one frame")
    rows, cols = grids[0].shape
    for g in grids[1:]:
        if g.shape != (rows, cols):
            raise ValueError("all frames must share the same dimensions")
    return np.stack(grids)


def write_grid(path, series) -> None:
    """Write a dense series as a grid file."""
    cube = _as_series(series)
    tau, rows, cols = cube.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC_GRID)
        fh.write(struct.pack("<IIIBB", rows, cols, tau, 32, 0))
        fh.write(cube.astype("<i4").tobytes())


def read_grid(path) -> np.ndarray:
    """Read a grid file back as a (tau, rows, cols) int32 array."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC_GRID:
        raise BadMagicError("not a grid file")
    rd = _Reader(data)
    rd.take(4)
    rows, cols = rd.u32(), rd.u32()
    tau = rd.u32()
    width = rd.u8()
    endian = rd.u8()
    if width != 32:
        raise FormatError(f"unsupported value width {width}")
    if endian != 0:
        raise FormatError(f"unsupported endianness flag {endian}")
    if rows < 1 or cols < 1 or tau < 1:
        raise DimensionError("dimensions must be positive")
    expected = tau * rows * cols * 4
    remaining = len(data) - rd.pos
    if remaining < expected:
        raise TruncatedError(
            f"payload holds {remaining} bytes, header promises {expected}")
    if remaining > expected:
        raise FormatError("trailing bytes after the payload")
    flat = np.frombuffer(data, dtype="<i4", count=tau * rows * cols,
                         offset=rd.pos)
    return flat.reshape(tau, rows, cols).astype(np.int32)


def read_csv_frame(path) -> np.ndarray:
    """One frame per file: comma-separated integer rows."""
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line:
                continue
            try:
                rows.append([int(cell) for cell in line])
            except ValueError as exc:
                raise FormatError(f"non-integer cell in {path}: {exc}") from None
    if not rows:
        raise FormatError(f"{path} holds no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"{path} rows have differing lengths")
    return as_grid(np.array(rows, dtype=np.int64)).astype(np.int32)


def gen_interpolated(m0, m1, steps: int, take: int | None = None) -> np.ndarray:
    """Frames walking from m0 to m1 in ``steps`` linear steps.

    Frame i is the interpolant at fraction i/steps, rounded half away from
    zero, so frame 0 equals m0 and frame ``steps`` equals m1. Returns
    ``steps + 1`` frames, or only the first ``take`` of them.
    """
    a = as_grid(m0)
    b = as_grid(m1)
    if a.shape != b.shape:
        raise ValueError("endpoint dimensions differ")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    tau = steps + 1 if take is None else min(take, steps + 1)
    if tau < 1:
        raise ValueError("take must keep at least one frame")
    diff = b - a
    out = np.empty((tau,) + a.shape, dtype=np.int32)
    for i in range(tau):
        num = diff * i
        mag = (2 * np.abs(num) + steps) // (2 * steps)
        out[i] = (a + np.sign(num) * mag).astype(np.int32)
    return out


def _box_blur(field: np.ndarray, radius: int = 2) -> np.ndarray:
    size = 2 * radius + 1
    padded = np.pad(field, radius, mode="edge")
    for axis in (0, 1):
        c = np.cumsum(padded, axis=axis)
        lead = np.zeros_like(padded.take(range(1), axis=axis))
        c = np.concatenate([lead, c], axis=axis)
        hi = c.take(range(size, c.shape[axis]), axis=axis)
        lo = c.take(range(0, c.shape[axis] - size), axis=axis)
        padded = (hi - lo) / size
    return padded


def gen_random_smooth(rows: int, cols: int, value_range=(0, 255),
                      smoothness: int = 3, seed: int = 0) -> np.ndarray:
    """Spatially correlated random grid; identical seeds give identical grids."""
    if rows < 1 or cols < 1:
        raise ValueError("dimensions must be positive")
    lo, hi = int(value_range[0]), int(value_range[1])
    if lo > hi:
        raise ValueError("value range lower bound exceeds upper bound")
    if not (INT32_MIN <= lo and hi <= INT32_MAX):
        raise ValueError("value range must fit in a 32-bit signed integer")
    if smoothness < 0:
        raise ValueError("smoothness must be non-negative")
    rng = np.random.default_rng(seed)
    field = rng.standard_normal((rows, cols))
    for _ in range(smoothness):
        field = _box_blur(field)
    span = field.max() - field.min()
    if span == 0:
        return np.full((rows, cols), (lo + hi) // 2, dtype=np.int32)
    scaled = lo + (field - field.min()) / span * (hi - lo)
    return np.rint(scaled).astype(np.int64).clip(lo, hi).astype(np.int32)
