import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rosetta_sim.qubits import (
    CNOT,
    Hadamard,
    Phase,
    QubitRegister,
    apply_gate,
    expect_AN,
    expect_AN_squared,
    make_ghz,
    mz_swapped_port_fringe,
    phase_all,
    phased_ghz,
    rosetta_fringe,
    rosetta_offset,
    rosetta_table,
    run_circuit,
)

SQ2 = 1 / math.sqrt(2)


def basis(n, index):
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1
    return QubitRegister(n, amps)


def test_hadamard_on_zero():
    out = apply_gate(QubitRegister.zeros(1), Hadamard(0))
    assert np.allclose(out.amplitudes, [SQ2, SQ2])


def test_cnot_builds_bell_state():
    reg = QubitRegister(2, np.array([SQ2, 0, SQ2, 0]))
    out = apply_gate(reg, CNOT(0, 1))
    assert np.allclose(out.amplitudes, [SQ2, 0, 0, SQ2])


@pytest.mark.parametrize("control,target", [(0, 2), (2, 0), (1, 2), (2, 1)])
def test_cnot_truth_table(control, target):
    for idx in range(8):
        bits = [(idx >> (2 - q)) & 1 for q in range(3)]
        out = apply_gate(basis(3, idx), CNOT(control, target))
        if bits[control]:
            bits[target] ^= 1
        expected = sum(b << (2 - q) for q, b in enumerate(bits))
        assert out.amplitudes[expected] == 1


def test_qubit_zero_is_most_significant():
    out = apply_gate(QubitRegister.zeros(3), Phase(0, 0.3))
    assert np.allclose(out.amplitudes, QubitRegister.zeros(3).amplitudes)
    flipped = apply_gate(apply_gate(QubitRegister.zeros(3), Hadamard(0)), Phase(0, math.pi))
    assert flipped.amplitudes[4] == pytest.approx(-SQ2)


def test_phase_on_every_qubit_of_ghz():
    n, phi = 5, 0.23
    reg = phased_ghz(n, phi)
    assert reg.amplitudes[-1] / reg.amplitudes[0] == pytest.approx(np.exp(1j * n * phi))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.floats(-math.pi, math.pi), st.integers(0, 2**32 - 1))
def test_phase_all_matches_gate_sequence(n, phi, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    reg = QubitRegister(n, amps / np.linalg.norm(amps))
    by_gates = run_circuit(reg, [Phase(q, phi) for q in range(n)])
    assert np.allclose(phase_all(reg, phi).amplitudes, by_gates.amplitudes, atol=1e-14)


def test_gate_errors():
    reg = QubitRegister.zeros(2)
    with pytest.raises(IndexError):
        apply_gate(reg, Hadamard(2))
    with pytest.raises(ValueError):
        apply_gate(reg, CNOT(1, 1))
    with pytest.raises(ValueError):
        QubitRegister(2, np.array([1, 1, 0, 0]))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=8, max_size=8),
    st.sampled_from([Hadamard(1), Phase(2, 0.4), CNOT(0, 2), CNOT(2, 1)]),
)
def test_gates_preserve_norm(re, gate):
    amps = np.array(re, dtype=complex) + 0.1
    reg = QubitRegister(3, amps / np.linalg.norm(amps))
    assert np.linalg.norm(apply_gate(reg, gate).amplitudes) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("phi,expected", [(0.0, 0.0), (math.pi, 1.0), (math.pi / 2, 0.5)])
def test_rosetta_fringe_points(phi, expected):
    assert rosetta_fringe(phi) == pytest.approx(expected, abs=1e-15)


def test_rosetta_fringe_formula():
    for phi in np.linspace(0, 2 * np.pi, 17):
        assert rosetta_fringe(phi) == pytest.approx((1 - math.cos(phi)) / 2, abs=1e-15)


def test_ghz_one_qubit():
    assert np.allclose(make_ghz(1).amplitudes, [SQ2, SQ2])


def test_ghz_three_qubits():
    expected = np.zeros(8)
    expected[0] = expected[7] = SQ2
    assert np.allclose(make_ghz(3).amplitudes, expected, atol=1e-15)


def test_ghz_ten_qubits_fidelity():
    reg = make_ghz(10)
    analytic = np.zeros(2**10)
    analytic[0] = analytic[-1] = SQ2
    assert abs(np.vdot(analytic, reg.amplitudes)) ** 2 == pytest.approx(1, abs=1e-12)


def test_ghz_range():
    with pytest.raises(ValueError):
        make_ghz(0)
    with pytest.raises(ValueError):
        make_ghz(21)


@pytest.mark.parametrize("n", [1, 2, 4, 7, 12])
def test_expect_an_follows_cos_n_phi(n):
    for phi in np.linspace(0, 2 * np.pi, 37):
        reg = phased_ghz(n, phi)
        assert expect_AN(reg) == pytest.approx(math.cos(n * phi), abs=1e-12)
        assert expect_AN_squared(reg) == pytest.approx(1, abs=1e-12)


def test_expect_an_special_points():
    assert expect_AN(make_ghz(6)) == pytest.approx(1)
    assert expect_AN(phased_ghz(4, math.pi / 8)) == pytest.approx(0, abs=1e-15)


def test_expect_an_rejects_weight_outside_span():
    amps = np.full(4, 0.5)
    with pytest.raises(ValueError):
        expect_AN(QubitRegister(2, amps))


def test_rosetta_offset_is_pi():
    assert rosetta_offset() == pytest.approx(math.pi, abs=1e-12)


def test_swapped_port_fringe_shape():
    for phi in np.linspace(0, 2 * np.pi, 9):
        assert mz_swapped_port_fringe(phi) == pytest.approx((1 + math.cos(phi)) / 2, abs=1e-14)


def test_rosetta_table_agrees():
    qubit, optical, _ = rosetta_table(np.linspace(0, 2 * np.pi, 101))
    assert np.max(np.abs(qubit - optical)) < 1e-10
