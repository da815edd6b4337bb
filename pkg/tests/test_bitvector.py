from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traster.bitvector import RankBitVector, build_bitvector


def linear_rank1(bits, i):
    return sum(bits[:i])


def linear_select1(bits, j):
    seen = 0
    for pos, b in enumerate(bits):
        seen += b
        if seen == j:
            return pos
    raise AssertionError


def test_empty_vector():
    v = build_bitvector([])
    assert len(v) == 0
    assert v.popcount == 0
    assert v.rank1(0) == 0
    assert v.rank0(0) == 0
    with pytest.raises(IndexError):
        v.access(0)
    with pytest.raises(IndexError):
        v.select1(1)


def test_known_small_vector():
    v = build_bitvector([1, 0, 1, 1])
    assert len(v) == 4
    assert [v.access(i) for i in range(4)] == [1, 0, 1, 1]
    assert v.rank1(4) == 3
    assert v.rank0(4) == 1
    assert v.rank1(0) == 0
    assert v.rank0(2) == 1
    assert v.select1(2) == 2
    assert v.select1(1) == 0
    assert v.select1(3) == 3


def test_bounds_errors():
    v = build_bitvector([1, 0, 1, 1])
    with pytest.raises(IndexError):
        v.access(4)
    with pytest.raises(IndexError):
        v.access(-1)
    with pytest.raises(IndexError):
        v.rank1(5)
    with pytest.raises(IndexError):
        v.select1(0)
    with pytest.raises(IndexError):
        v.select1(4)


def test_matches_linear_oracle_across_byte_boundaries():
    rng = np.random.default_rng(42)
    for length in [1, 7, 8, 9, 15, 16, 17, 63, 64, 65, 200, 1031]:
        bits = rng.integers(0, 2, size=length).tolist()
        v = build_bitvector(bits)
        for i in range(length + 1):
            assert v.rank1(i) == linear_rank1(bits, i)
            assert v.rank0(i) == i - linear_rank1(bits, i)
        for i in range(length):
            assert v.access(i) == bits[i]
        for j in range(1, sum(bits) + 1):
            assert v.select1(j) == linear_select1(bits, j)


@given(st.lists(st.integers(min_value=0, max_value=1), max_size=300))
@settings(max_examples=60, deadline=None)
def test_rank_select_properties(bits):
    v = build_bitvector(bits)
    assert len(v) == len(bits)
    assert v.popcount == sum(bits)
    for i in range(0, len(bits) + 1, max(1, len(bits) // 7)):
        assert v.rank1(i) + v.rank0(i) == i
        assert v.rank1(i) == linear_rank1(bits, i)
    for j in range(1, sum(bits) + 1):
        pos = v.select1(j)
        assert v.access(pos) == 1
        assert v.rank1(pos) == j - 1


def test_payload_is_canonical():
    v = build_bitvector([1, 1, 0, 1, 0, 0, 0, 0, 1])
    w = RankBitVector(v.payload, len(v))
    assert v == w
    assert w.select1(4) == 8


def test_padding_must_be_zero():
    with pytest.raises(ValueError):
        RankBitVector(b"\xff", 4)


def test_payload_length_must_match():
    with pytest.raises(ValueError):
        RankBitVector(b"\x01\x00", 4)


def test_rejects_non_binary_input():
    with pytest.raises(ValueError):
        build_bitvector([0, 2, 1])
