"""Integer codes: the zigzag signed/unsigned mapping and chunked
variable-width sequences with direct access.

A DacSequence splits every value into fixed-width chunks, least significant
chunk first. Level 0 holds one chunk per value; a value whose remaining bits
do not fit gets a 1 in that level's continuation bitvector and its next chunk
is stored at the following level, at the index given by rank1 over the
continuation bits. access(i) therefore walks at most (bits/width) levels.
"""
from __future__ import annotations

import numpy as np

from .bitvector import RankBitVector


def zigzag_encode(x: int) -> int:
    """Map a signed integer to an unsigned one: 0,-1,1,-2,2... -> 0,1,2,3,4..."""
    return x << 1 if x >= 0 else ((-x) << 1) - 1


def zigzag_decode(u: int) -> int:
    """Inverse of zigzag_encode."""
    if u < 0:
        raise ValueError("zigzag codes are non-negative")
    return u >> 1 if u & 1 == 0 else -((u + 1) >> 1)


def zigzag_encode_array(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    return np.where(a >= 0, a << 1, ((-a) << 1) - 1)


def zigzag_decode_array(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    return np.where(u & 1 == 0, u >> 1, -((u + 1) >> 1))


class DacSequence:
    """Read-only sequence of non-negative integers with O(levels) access."""

    __slots__ = ("_chunks", "_cont", "_widths", "_length")

    def __init__(self, chunks: list[list[int]], cont: list[RankBitVector],
                 widths: list[int], length: int):
        if not (len(chunks) == len(cont) == len(widths)):
            raise ValueError("level arrays must have equal length")
        self._chunks = chunks
        self._cont = cont
        self._widths = widths
        self._length = length

    @classmethod
    def build(cls, values, chunk_width_bits: int = 8) -> "DacSequence":
        if not 1 <= chunk_width_bits <= 32:
            raise ValueError("chunk width must be between 1 and 32 bits")
        v = np.asarray(values, dtype=np.int64)
        if v.ndim != 1:
            v = v.reshape(-1)
        if v.size and int(v.min()) < 0:
            raise ValueError("values must be non-negative")
        mask = (1 << chunk_width_bits) - 1
        chunks: list[list[int]] = []
        cont: list[RankBitVector] = []
        widths: list[int] = []
        cur = v
        while cur.size:
            more = cur > mask
            chunks.append((cur & mask).tolist())
            cont.append(RankBitVector.from_bits(more))
            widths.append(chunk_width_bits)
            cur = cur[more] >> chunk_width_bits
        return cls(chunks, cont, widths, int(v.size))

    def __len__(self) -> int:
        return self._length

    @property
    def widths(self) -> list[int]:
        return list(self._widths)

    @property
    def levels(self):
        """Per-level (chunks, continuation bitvector, width) triples."""
        return list(zip(self._chunks, self._cont, self._widths))

    def access(self, i: int) -> int:
        if not 0 <= i < self._length:
            raise IndexError(f"sequence index {i} out of range [0, {self._length})")
        value = 0
        shift = 0
        for lvl in range(len(self._chunks)):
            value |= self._chunks[lvl][i] << shift
            cont = self._cont[lvl]
            if not cont.access(i):
                return value
            shift += self._widths[lvl]
            i = cont.rank1(i)
        raise AssertionError("value continues past the deepest level")

    def to_list(self) -> list[int]:
        return [self.access(i) for i in range(self._length)]

    @property
    def payload_bits(self) -> int:
        """Bits spent on chunks and continuation flags, headers excluded."""
        return sum(len(c) * w + len(c) for c, w in zip(self._chunks, self._widths))

    def __repr__(self) -> str:
        return f"DacSequence(length={self._length}, levels={len(self._chunks)})"
