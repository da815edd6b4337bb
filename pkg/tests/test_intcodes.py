from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traster.intcodes import (DacSequence, zigzag_decode, zigzag_decode_array,
                              zigzag_encode, zigzag_encode_array)


def test_zigzag_known_values():
    assert zigzag_encode(0) == 0
    assert zigzag_encode(-1) == 1
    assert zigzag_encode(1) == 2
    assert zigzag_encode(-2) == 3
    assert zigzag_encode(2) == 4
    assert zigzag_decode(0) == 0
    assert zigzag_decode(1) == -1
    assert zigzag_decode(2) == 1


def test_zigzag_rejects_negative_code():
    with pytest.raises(ValueError):
        zigzag_decode(-1)


@given(st.integers(min_value=-(2 ** 35), max_value=2 ** 35))
@settings(max_examples=300, deadline=None)
def test_zigzag_bijection(x):
    u = zigzag_encode(x)
    assert u >= 0
    assert zigzag_decode(u) == x
    # the code orders values by magnitude
    assert u // 2 == abs(x) - (1 if x < 0 else 0) or x >= 0


def test_zigzag_array_matches_scalar():
    xs = np.arange(-1000, 1001)
    enc = zigzag_encode_array(xs)
    assert enc.tolist() == [zigzag_encode(int(x)) for x in xs]
    assert zigzag_decode_array(enc).tolist() == xs.tolist()


def test_empty_sequence():
    seq = DacSequence.build([], 4)
    assert len(seq) == 0
    with pytest.raises(IndexError):
        seq.access(0)


def test_single_value_spanning_two_levels():
    # 16 = 0b10000 does not fit a 4-bit chunk: low nibble 0 continues to a
    # second level holding 1
    seq = DacSequence.build([16], 4)
    levels = seq.levels
    assert len(levels) == 2
    chunks0, cont0, width0 = levels[0]
    chunks1, cont1, width1 = levels[1]
    assert (chunks0, width0) == ([0], 4)
    assert cont0.access(0) == 1
    assert (chunks1, width1) == ([1], 4)
    assert cont1.access(0) == 0
    assert seq.access(0) == 16


def test_all_zero_values_use_one_level():
    seq = DacSequence.build([0, 0, 0], 8)
    assert len(seq.levels) == 1
    assert seq.to_list() == [0, 0, 0]


def test_mixed_widths_roundtrip():
    values = [0, 1, 255, 256, 65535, 70000, 2 ** 33, 5]
    for width in (1, 3, 4, 7, 8, 13, 32):
        seq = DacSequence.build(values, width)
        assert seq.to_list() == values


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        DacSequence.build([1, -1], 8)
    with pytest.raises(ValueError):
        DacSequence.build([1], 0)
    with pytest.raises(ValueError):
        DacSequence.build([1], 33)


def test_continuation_structure_is_consistent():
    rng = np.random.default_rng(3)
    values = rng.integers(0, 2 ** 20, size=500).tolist()
    seq = DacSequence.build(values, 8)
    levels = seq.levels
    assert len(levels[0][0]) == len(values)
    for lvl in range(len(levels) - 1):
        assert levels[lvl][1].popcount == len(levels[lvl + 1][0])
    assert levels[-1][1].popcount == 0


@given(st.lists(st.integers(min_value=0, max_value=2 ** 40), max_size=60),
       st.integers(min_value=1, max_value=16))
@settings(max_examples=120, deadline=None)
def test_access_roundtrip(values, width):
    seq = DacSequence.build(values, width)
    assert len(seq) == len(values)
    assert seq.to_list() == values
