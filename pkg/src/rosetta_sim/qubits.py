"""Small dense state-vector simulator for the qubit-circuit picture.

Qubit 0 is the most significant bit of the amplitude index, so |q0 q1 ... >
maps to index q0 * 2**(n-1) + ... + q_{n-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .fock import make_fock, mach_zehnder

DEFAULT_QUBIT_CAP = 20
NORM_TOL = 1e-12


@dataclass(frozen=True)
class QubitRegister:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n <= DEFAULT_QUBIT_CAP:
            raise ValueError(f"qubit count {self.n} outside [1, {DEFAULT_QUBIT_CAP}]")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} amplitudes, got shape {amps.shape}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"register has squared norm {norm2!r}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, n: int) -> "QubitRegister":
        """|0...0> on n qubits."""
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)

    @property
    def all_ones_index(self) -> int:
        return 2**self.n - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _axes(self, q: int) -> np.ndarray:
        # view with the target qubit as the middle axis
        return self.amplitudes.reshape(2**q, 2, 2 ** (self.n - q - 1))


@dataclass(frozen=True)
class Hadamard:
    q: int


@dataclass(frozen=True)
class Phase:
    """diag(1, exp(i phi)) on qubit q."""

    q: int
    phi: float


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


Gate = Union[Hadamard, Phase, CNOT]


def _check_qubit(reg: QubitRegister, q: int) -> None:
    if not 0 <= q < reg.n:
        raise IndexError(f"qubit {q} out of range for {reg.n} qubits")


def apply_gate(reg: QubitRegister, gate: Gate) -> QubitRegister:
    if isinstance(gate, Hadamard):
        _check_qubit(reg, gate.q)
        view = reg._axes(gate.q)
        out = np.empty_like(view)
        out[:, 0, :] = (view[:, 0, :] + view[:, 1, :]) / math.sqrt(2)
        out[:, 1, :] = (view[:, 0, :] - view[:, 1, :]) / math.sqrt(2)
    elif isinstance(gate, Phase):
        _check_qubit(reg, gate.q)
        out = reg._axes(gate.q).copy()
        out[:, 1, :] *= np.exp(1j * gate.phi)
    elif isinstance(gate, CNOT):
        _check_qubit(reg, gate.control)
        _check_qubit(reg, gate.target)
        if gate.control == gate.target:
            raise ValueError("CNOT control and target must differ")
        shape = (2,) * reg.n
        out = reg.amplitudes.reshape(shape).copy()
        sel = [slice(None)] * reg.n
        sel[gate.control] = 1
        sub = out[tuple(sel)]
        # target axis index shifts down by one once the control axis is removed
        t_axis = gate.target - (1 if gate.target > gate.control else 0)
        out[tuple(sel)] = np.flip(sub, axis=t_axis)
    else:
        raise TypeError(f"unsupported gate {gate!r}")
    return QubitRegister(reg.n, out.reshape(-1))


def run_circuit(reg: QubitRegister, gates) -> QubitRegister:
    for gate in gates:
        reg = apply_gate(reg, gate)
    return reg


def rosetta_fringe(phi: float) -> float:
    """P(1) after H, Phase(phi), H on |0>; equals (1 - cos phi)/2."""
    reg = run_circuit(QubitRegister.zeros(1), [Hadamard(0), Phase(0, phi), Hadamard(0)])
    return float(reg.probabilities()[1])


@lru_cache(maxsize=None)
def make_ghz(n: int) -> QubitRegister:
    """H on qubit 0 followed by CNOT(0, k) for k = 1..n-1.

    Registers are immutable, so the result is cached per n.
    """
    if not 1 <= n <= DEFAULT_QUBIT_CAP:
        raise ValueError(f"GHZ size {n} outside [1, {DEFAULT_QUBIT_CAP}]")
    gates = [Hadamard(0)] + [CNOT(0, k) for k in range(1, n)]
    return run_circuit(QubitRegister.zeros(n), gates)


@lru_cache(maxsize=None)
def _popcount(n: int) -> np.ndarray:
    counts = np.zeros(2**n, dtype=np.intp)
    for q in range(n):
        counts += (np.arange(2**n) >> q) & 1
    return counts


def phase_all(reg: QubitRegister, phi: float) -> QubitRegister:
    """Phase(q, phi) on every qubit.

    The product of single-qubit phases is diagonal with entry exp(i phi k)
    on basis states holding k ones, so it is applied in one pass.
    """
    factors = np.exp(1j * phi * np.arange(reg.n + 1))
    return QubitRegister(reg.n, reg.amplitudes * factors[_popcount(reg.n)])


def phased_ghz(n: int, phi: float) -> QubitRegister:
    return phase_all(make_ghz(n), phi)


def ghz_subspace_components(reg: QubitRegister, tol: float = 1e-10) -> tuple[complex, complex]:
    """Amplitudes on |0...0> and |1...1>; rejects weight outside that span."""
    a0 = complex(reg.amplitudes[0])
    a1 = complex(reg.amplitudes[reg.all_ones_index])
    outside = 1.0 - abs(a0) ** 2 - abs(a1) ** 2
    if outside > tol:
        raise ValueError(f"register has weight {outside:.3g} outside span{{|0..0>, |1..1>}}")
    return a0, a1


def expect_AN(reg: QubitRegister) -> float:
    """<A_N> for A_N = |1..1><0..0| + |0..0><1..1|."""
    a0, a1 = ghz_subspace_components(reg)
    return 2.0 * (a0.conjugate() * a1).real


def expect_AN_squared(reg: QubitRegister) -> float:
    """<A_N^2>; A_N^2 is the projector onto span{|0..0>, |1..1>}."""
    a0, a1 = ghz_subspace_components(reg)
    return abs(a0) ** 2 + abs(a1) ** 2


def mz_swapped_port_fringe(phi: float) -> float:
    """Probability that a photon entering mode 0 of a balanced Mach-Zehnder leaves in mode 1."""
    out = mach_zehnder(make_fock([1, 0]), phi)
    return abs(out[(0, 1)]) ** 2


def rosetta_offset() -> float:
    """Phase offset phi0 with rosetta_fringe(phi) == mz_swapped_port_fringe(phi + phi0).

    The interferometer fringe is (1 + cos(phi - delta))/2; delta is read off two
    simulated points and the qubit fringe (1 - cos phi)/2 is that curve shifted by pi.
    """
    c = 2.0 * mz_swapped_port_fringe(0.0) - 1.0
    s = 2.0 * mz_swapped_port_fringe(math.pi / 2) - 1.0
    return float(np.mod(math.pi + math.atan2(s, c), 2 * math.pi))


def rosetta_table(phases) -> tuple[np.ndarray, np.ndarray, float]:
    """Qubit-circuit and calibrated interferometer fringes on a phase grid."""
    phases = np.asarray(phases, dtype=float)
    offset = rosetta_offset()
    qubit = np.array([rosetta_fringe(p) for p in phases])
    optical = np.array([mz_swapped_port_fringe(p + offset) for p in phases])
    return qubit, optical, offset
