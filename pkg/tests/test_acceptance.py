"""Acceptance gate: one test per shipped guarantee, one line per result.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
summary lines as they pass).
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from conftest import random_walk_series, random_window
from traster import (DenseSeries, K2Raster, TK2Raster, deserialize,
                     gen_interpolated, gen_random_smooth, serialize)
from traster.bitvector import build_bitvector
from traster.cli import run_bench
from traster.intcodes import DacSequence, zigzag_decode, zigzag_encode
from traster.tk2raster import K2RasterDelta


def _passed(line: str) -> None:
    print(f"\nACCEPTANCE {line}: PASS")


# ---------------------------------------------------------------- criterion 1

def test_criterion_1_query_equivalence_with_dense_oracle():
    """200 random series, every cell plus 1000 window queries each."""
    started = time.perf_counter()
    rng = np.random.default_rng(20260814)
    t_deltas = [1, 2, 4, 6, 10]
    n_configs = 200
    for i in range(n_configs):
        if i < 5:
            rows = cols = 64
            tau = 24
        else:
            rows = int(rng.integers(1, 65))
            cols = int(rng.integers(1, 65))
            tau = int(rng.integers(2, 25))
        t_delta = t_deltas[i % len(t_deltas)]
        fast = i % 2 == 0
        series = random_walk_series(rng, rows, cols, tau, fast)
        tk = TK2Raster.build(series, k=2, t_delta=t_delta)
        oracle = DenseSeries(series)

        for t in range(tau):
            dense = oracle.values[t].tolist()
            for r in range(rows):
                row = dense[r]
                for c in range(cols):
                    assert tk.get_cell_value(r, c, t) == row[c], \
                        (i, t, r, c, t_delta)

        for q in range(1000):
            t = int(rng.integers(tau))
            r1, r2, c1, c2 = random_window(rng, rows, cols)
            if q % 10 == 0:
                vb = int(oracle.values[t].min()) - 1
                ve = int(oracle.values[t].max()) + 1
            else:
                v = oracle.get_cell(int(rng.integers(rows)),
                                    int(rng.integers(cols)), t)
                vb = v - int(rng.integers(0, 3))
                ve = v + int(rng.integers(0, 3))
            got = tk.get_cells(vb, ve, r1, r2, c1, c2, t)
            assert len(got) == len(set(got)), (i, q)
            assert set(got) == oracle.get_cells(vb, ve, r1, r2, c1, c2, t), (i, q)

    elapsed = time.perf_counter() - started
    assert elapsed < 300, f"equivalence sweep took {elapsed:.0f}s"
    _passed(f"1 query equivalence ({n_configs} series, {elapsed:.0f}s)")


# ---------------------------------------------------------------- criterion 2

def test_criterion_2_roundtrip_and_canonical_bytes():
    rng = np.random.default_rng(77001)
    structures = []
    for i in range(30):
        rows = int(rng.integers(1, 65))
        cols = int(rng.integers(1, 65))
        tau = int(rng.integers(1, 25))
        series = random_walk_series(rng, rows, cols, max(tau, 1), bool(i % 2))
        tk = TK2Raster.build(series, k=2,
                             t_delta=int(rng.choice([1, 2, 4, 6, 10])))
        for t in range(tk.tau):
            assert np.array_equal(tk.decompress_frame(t), series[t]), (i, t)
        structures.append((tk, series))

    for tk, series in structures[:3]:
        blob = serialize(tk)
        back = deserialize(blob)
        rows, cols, tau = tk.rows, tk.cols, tk.tau
        for _ in range(500):
            t = int(rng.integers(tau))
            r = int(rng.integers(rows))
            c = int(rng.integers(cols))
            assert back.get_cell_value(r, c, t) == tk.get_cell_value(r, c, t)
        for _ in range(500):
            t = int(rng.integers(tau))
            r1, r2, c1, c2 = random_window(rng, rows, cols)
            v = int(series[t][rng.integers(rows), rng.integers(cols)])
            want = tk.get_cells(v - 1, v + 2, r1, r2, c1, c2, t)
            got = back.get_cells(v - 1, v + 2, r1, r2, c1, c2, t)
            assert set(got) == set(want)
        assert serialize(back) == blob
    _passed("2 roundtrip and canonical serialization")


# ------------------------------------------------------- criteria 3 and 4

@pytest.fixture(scope="module")
def space_analogs():
    m0 = gen_random_smooth(256, 256, (0, 400), smoothness=3, seed=11)
    m1 = gen_random_smooth(256, 256, (0, 400), smoothness=3, seed=12)
    slow = gen_interpolated(m0, m1, steps=1000, take=100)
    fast = gen_interpolated(m0, m1, steps=100, take=100)
    return {
        "slow": slow,
        "fast": fast,
        "slow_6": TK2Raster.build(slow, k=2, t_delta=6),
        "slow_1": TK2Raster.build(slow, k=2, t_delta=1),
    }


def test_criterion_3_space_trend(space_analogs):
    slow_6 = len(serialize(space_analogs["slow_6"]))
    slow_1 = len(serialize(space_analogs["slow_1"]))
    ratio_slow = slow_6 / slow_1
    assert ratio_slow <= 0.67, f"slow-series ratio {ratio_slow:.3f}"

    fast_4 = len(serialize(TK2Raster.build(space_analogs["fast"], k=2, t_delta=4)))
    fast_1 = len(serialize(TK2Raster.build(space_analogs["fast"], k=2, t_delta=1)))
    ratio_fast = fast_4 / fast_1
    assert ratio_fast <= 1.0, f"fast-series ratio {ratio_fast:.3f}"
    _passed(f"3 space trend (slow {ratio_slow:.3f} <= 0.67, "
            f"fast {ratio_fast:.3f} <= 1.0)")


def test_criterion_4_query_overhead_bounded(space_analogs):
    tk6 = space_analogs["slow_6"]
    tk1 = space_analogs["slow_1"]
    delta_ts = [t for t, f in enumerate(tk6.frames)
                if not isinstance(f, K2Raster)]
    report = run_bench(tk6, tk1, n_queries=150, repetitions=2, seed=404,
                       t_pool=delta_ts)
    ratio = report["range_ratio"]
    assert ratio <= 3.0, f"windowed query overhead {ratio:.2f}x"
    _passed(f"4 query overhead ({ratio:.2f}x <= 3x)")


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_construction_case_fixtures():
    snap = np.array([
        [6, 6, 9, 1],
        [5, 5, 2, 8],
        [3, 2, 0, 2],
        [2, 3, 5, 9],
    ])
    target = np.array([
        [7, 7, 9, 1],
        [6, 6, 2, 9],
        [4, 4, 0, 2],
        [4, 4, 5, 9],
    ])
    d = K2RasterDelta.build(snap, target, k=2)
    bits = [d.topology.access(i) for i in range(len(d.topology))]
    flags = [d.eq_flags.access(i) for i in range(len(d.eq_flags))]
    gaps = [zigzag_decode(g) for g in d.max_gaps.to_list()]

    # quadrant (0,0): <6,6,5,5> -> <7,7,6,6>, a uniform +1 shift
    assert bits[0] == 0
    assert flags[d.topology.rank0(0)] == 1
    assert gaps[0] == 1
    # quadrant (1,0): uniform 4 over a region with max 3, min 2
    assert bits[2] == 0
    assert flags[d.topology.rank0(2)] == 0
    assert gaps[2] == 4 - 3
    # quadrant (1,1): identical to the snapshot
    assert bits[3] == 0
    assert flags[d.topology.rank0(3)] == 1
    assert gaps[3] == 0
    # the remaining quadrant subdivides
    assert bits[1] == 1

    identical = K2RasterDelta.build(snap, snap, k=2)
    assert len(identical.topology) == 0
    assert identical.eq_flags.access(0) == 1
    assert identical.root_max_gap == 0
    _passed("5 construction case fixtures")


# ---------------------------------------------------------------- criterion 6

def test_criterion_6_bitvector_dac_zigzag_suites():
    rng = np.random.default_rng(606)

    # rank/select versus a linear-scan oracle, exhaustively per vector
    patterns = [
        np.zeros(0, dtype=np.int64),
        np.ones(1, dtype=np.int64),
        np.zeros(513, dtype=np.int64),
        np.ones(997, dtype=np.int64),
        rng.integers(0, 2, size=4096),
        (rng.random(100_000) < 0.5).astype(np.int64),
        (rng.random(100_000) < 0.01).astype(np.int64),
    ]
    for bits in patterns:
        v = build_bitvector(bits)
        prefix = np.concatenate(([0], np.cumsum(bits)))
        for i in range(len(bits) + 1):
            assert v.rank1(i) == prefix[i]
            assert v.rank0(i) == i - prefix[i]
        ones = np.flatnonzero(bits)
        for j, pos in enumerate(ones, start=1):
            assert v.select1(j) == pos

    # direct-access roundtrip over 10_000 random sequences
    for _ in range(10_000):
        n = int(rng.integers(0, 25))
        width = int(rng.integers(1, 17))
        bound = int(rng.choice([2, 16, 2 ** 12, 2 ** 31]))
        values = rng.integers(0, bound, size=n).tolist()
        seq = DacSequence.build(values, width)
        assert seq.to_list() == values
    big = rng.integers(0, 2 ** 20, size=10_000).tolist()
    seq = DacSequence.build(big, 8)
    for i in range(len(big)):
        assert seq.access(i) == big[i]

    # zigzag bijection over the full interval
    lo, hi = -(10 ** 6), 10 ** 6
    for x in range(lo, hi + 1):
        assert zigzag_decode(zigzag_encode(x)) == x
    codes = np.array([zigzag_encode(x) for x in range(-1000, 1001)])
    assert len(np.unique(codes)) == codes.size
    _passed("6 bitvector, direct-access, zigzag suites")
