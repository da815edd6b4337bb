"""Immutable bit sequence with constant-time rank and logarithmic select.

Bits are packed LSB-first into a byte payload. A cumulative popcount is kept
for every payload byte, so rank is a table lookup plus one masked popcount.
Vectors never change after construction and are safe to share across threads.
"""
from __future__ import annotations

from bisect import bisect_right

import numpy as np

_POP8 = [bin(i).count("1") for i in range(256)]
_POP8_NP = np.array(_POP8, dtype=np.int64)


class RankBitVector:
    __slots__ = ("_payload", "_length", "_ranks")

    def __init__(self, payload: bytes, length: int):
        """Wrap an already packed payload of `length` bits.

        The payload must hold exactly ceil(length / 8) bytes and any padding
        bits past `length` must be zero, so that equal bit content always has
        equal bytes.
        """
        if length < 0:
            raise ValueError("bit length must be non-negative")
        if len(payload) != (length + 7) // 8:
            raise ValueError("payload size does not match bit length")
        if length % 8 and payload[-1] >> (length % 8):
            raise ValueError("padding bits past the bit length must be zero")
        self._payload = bytes(payload)
        self._length = length
        counts = _POP8_NP[np.frombuffer(self._payload, dtype=np.uint8)]
        # _ranks[b] = ones strictly before byte b; one extra entry = total ones
        self._ranks = np.concatenate(([0], np.cumsum(counts))).tolist()

    @classmethod
    def from_bits(cls, bits) -> "RankBitVector":
        """Build from an iterable of 0/1 values (lists and numpy arrays work)."""
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.size == 0:
            return cls(b"", 0)
        arr = arr.astype(np.uint8)
        if arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        payload = np.packbits(arr, bitorder="little").tobytes()
        return cls(payload, int(arr.size))

    def __len__(self) -> int:
        return self._length

    @property
    def payload(self) -> bytes:
        return self._payload

    @property
    def popcount(self) -> int:
        return self._ranks[-1]

    def access(self, i: int) -> int:
        """Return the bit at position i."""
        if not 0 <= i < self._length:
            raise IndexError(f"bit index {i} out of range [0, {self._length})")
        return (self._payload[i >> 3] >> (i & 7)) & 1

    def rank1(self, i: int) -> int:
        """Count 1 bits strictly before position i; i may equal the length."""
        if not 0 <= i <= self._length:
            raise IndexError(f"rank position {i} out of range [0, {self._length}]")
        r = self._ranks[i >> 3]
        off = i & 7
        if off:
            r += _POP8[self._payload[i >> 3] & ((1 << off) - 1)]
        return r

    def rank0(self, i: int) -> int:
        """Count 0 bits strictly before position i."""
        return i - self.rank1(i)

    def select1(self, j: int) -> int:
        """Position of the j-th 1 bit, counting from 1."""
        if not 1 <= j <= self.popcount:
            raise IndexError(f"select argument {j} out of range [1, {self.popcount}]")
        b = bisect_right(self._ranks, j - 1) - 1
        need = j - self._ranks[b]
        byte = self._payload[b]
        for off in range(8):
            if (byte >> off) & 1:
                need -= 1
                if need == 0:
                    return (b << 3) | off
        raise AssertionError("rank directory out of sync")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RankBitVector):
            return NotImplemented
        return self._length == other._length and self._payload == other._payload

    def __hash__(self):
        return hash((self._length, self._payload))

    def __repr__(self) -> str:
        return f"RankBitVector(length={self._length}, ones={self.popcount})"


def build_bitvector(bits) -> RankBitVector:
    return RankBitVector.from_bits(bits)
