"""Smoke tests for the Python bindings: every exported entry point once."""

import math

import pytest

import qmpi

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def test_bell_pair_snapshot():
    engine = qmpi.Engine(qubit_cap=4, seed=3)
    a, b = engine.bell()
    assert (a.owner, b.owner) == (0, 1)
    amps = engine.snapshot([a, b])
    assert amps == pytest.approx([INV_SQRT2, 0.0, 0.0, INV_SQRT2], abs=1e-12)
    assert engine.live_count == 2
    assert engine.norm == pytest.approx(1.0, abs=1e-12)


def test_gates_measure_and_free():
    engine = qmpi.Engine(seed=1)
    q = engine.alloc()
    engine.h(q)
    engine.h(q)  # H is self-inverse: back to |0>
    assert engine.snapshot([q]) == pytest.approx([1.0, 0.0], abs=1e-12)
    assert engine.measure(q) == 0
    engine.free(q)
    assert engine.live_count == 0
    assert not engine.is_live(q)


def test_ghz_group():
    engine = qmpi.Engine(seed=5)
    handles = engine.ghz([0, 1, 2])
    amps = engine.snapshot(handles)
    want = [0.0] * 8
    want[0] = want[7] = INV_SQRT2
    assert amps == pytest.approx(want, abs=1e-12)


def test_launch_hello():
    report = qmpi.launch("hello", num_ranks=3)
    assert report.ok
    assert [rank.output for rank in report.ranks] == [
        [f"Hello, rank={r} of 3 processes"] for r in range(3)
    ]


def test_run_shots_ghz():
    counts = qmpi.run_shots("ghz", num_ranks=3, shots=200, seed=7)
    assert set(counts) == {"000", "111"}
    assert sum(counts.values()) == 200
    for count in counts.values():
        assert 60 <= count <= 140


def test_list_programs():
    assert {"ghz", "hello", "nqasm-run"} <= set(qmpi.list_programs())


def test_canonicalize_assembly():
    assert qmpi.canonicalize_assembly("SET r3 7\nH R3\n") == "set R3 7\nh R3\n"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(qmpi.Error, match="no-such-program"):
        qmpi.launch("no-such-program")
