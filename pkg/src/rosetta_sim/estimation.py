"""Observables, variances and estimation-theory phase sensitivity.

The phase uncertainty of a fringe observable A is

    delta_phi = Delta A / |d<A>/d phi|,

evaluated on a family of states phi -> |psi(phi)>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .fock import FockState, spin_matrices
from .qubits import QubitRegister, expect_AN

State = Union[FockState, QubitRegister]

VARIANCE_FLOOR = -1e-12
DIVERGENCE_TOL = 1e-9
MAX_CATALOG_PHOTONS = 1000

_SPIN_KINDS = {"Jx": "x", "Jy": "y", "Jz": "z"}
KINDS = ("Jx", "Jy", "Jz", "Jsquared", "NumberDiff", "NumberSum", "ModeNumber", "AN", "SumA")


@dataclass(frozen=True)
class Observable:
    """Named Hermitian operator.

    `ModeNumber` needs `index`. `AN` is |0,N><N,0| + h.c. (two-mode Fock state
    or the all-zeros/all-ones pair of a qubit register). `SumA` is the sum of
    single-qubit sigma_x operators on a register.
    """

    kind: str
    index: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown observable {self.kind!r}; expected one of {KINDS}")
        if self.kind == "ModeNumber" and self.index is None:
            raise ValueError("ModeNumber needs a mode index")

    def __str__(self) -> str:
        return f"{self.kind}({self.index})" if self.index is not None else self.kind


Jx, Jy, Jz = Observable("Jx"), Observable("Jy"), Observable("Jz")
Jsquared = Observable("Jsquared")
NumberDiff, NumberSum = Observable("NumberDiff"), Observable("NumberSum")
AN = Observable("AN")
SumA = Observable("SumA")


def ModeNumber(index: int) -> Observable:
    return Observable("ModeNumber", index)


def _fock_moments(state: FockState, obs: Observable) -> tuple[float, float]:
    if obs.kind == "ModeNumber":
        if not 0 <= obs.index < state.modes:
            raise IndexError(f"mode {obs.index} out of range for a {state.modes}-mode state")
        probs = state.probabilities()
        first = math.fsum(p * occ[obs.index] for occ, p in probs.items())
        second = math.fsum(p * occ[obs.index] ** 2 for occ, p in probs.items())
        return first, second
    if obs.kind == "NumberSum":
        n = state.total_photons
        return float(n), float(n * n)
    if state.modes != 2:
        raise ValueError(f"{obs} needs a two-mode state, got {state.modes} modes")
    if obs.kind == "SumA":
        raise ValueError("SumA acts on qubit registers")

    vec = state.to_vector()
    n = state.total_photons
    if obs.kind in ("Jz", "NumberDiff"):
        scale = 1.0 if obs.kind == "Jz" else 2.0
        eig = scale * (np.arange(n + 1) - n / 2)
        probs = np.abs(vec) ** 2
        return float(probs @ eig), float(probs @ eig**2)
    if obs.kind == "Jsquared":
        j = n / 2
        return j * (j + 1), (j * (j + 1)) ** 2
    if obs.kind == "AN":
        if n == 0:
            raise ValueError("AN needs at least one photon")
        image = np.zeros_like(vec)
        image[0], image[n] = vec[n], vec[0]
    else:
        image = spin_matrices(n)[_SPIN_KINDS[obs.kind]] @ vec
    return float(np.vdot(vec, image).real), float(np.vdot(image, image).real)


def _qubit_moments(reg: QubitRegister, obs: Observable) -> tuple[float, float]:
    if obs.kind == "AN":
        # A_N^2 is the projector onto the two-dimensional span
        a0, a1 = reg.amplitudes[0], reg.amplitudes[reg.all_ones_index]
        return expect_AN(reg), float(abs(a0) ** 2 + abs(a1) ** 2)
    if obs.kind == "SumA":
        psi = reg.amplitudes.reshape((2,) * reg.n)
        image = sum(np.flip(psi, axis=q) for q in range(reg.n)).reshape(-1)
        flat = reg.amplitudes
        return float(np.vdot(flat, image).real), float(np.vdot(image, image).real)
    raise ValueError(f"{obs} is not defined on qubit registers")


def moments(state: State, obs: Observable) -> tuple[float, float]:
    """(<O>, <O^2>)."""
    if isinstance(state, FockState):
        return _fock_moments(state, obs)
    if isinstance(state, QubitRegister):
        return _qubit_moments(state, obs)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def expectation(state: State, obs: Observable) -> float:
    return moments(state, obs)[0]


def variance(state: State, obs: Observable) -> float:
    first, second = moments(state, obs)
    var = second - first * first
    if var < VARIANCE_FLOOR:
        raise ArithmeticError(f"negative variance {var!r} for {obs}")
    return max(var, 0.0)


def std_dev(state: State, obs: Observable) -> float:
    return math.sqrt(variance(state, obs))


# --- Jz-eigenbasis test states --------------------------------------------


def _from_m_amplitudes(amps: np.ndarray) -> FockState:
    # |j=n/2, m> = |n/2 + m, n/2 - m>, i.e. index p = m + n/2
    return FockState.from_vector(amps / np.linalg.norm(amps))


def uniform_jz_state(n: int, phases: Sequence[float] | None = None) -> FockState:
    """Equal-weight superposition of all n+1 Jz eigenstates."""
    phases = np.zeros(n + 1) if phases is None else np.asarray(phases, dtype=float)
    return _from_m_amplitudes(np.exp(1j * phases))


def extreme_jz_state(n: int, phase: float = 0.0) -> FockState:
    """(|m=n/2> + e^{i phase}|m=-n/2>)/sqrt(2), i.e. a NOON state."""
    amps = np.zeros(n + 1, dtype=complex)
    amps[n] = 1.0
    amps[0] += np.exp(1j * phase)
    return _from_m_amplitudes(amps)


def binomial_jz_state(n: int, phases: Sequence[float] | None = None) -> FockState:
    """Amplitudes sqrt(C(n, k)) / 2^(n/2) over Jz eigenstates (log-gamma for large n)."""
    k = np.arange(n + 1)
    log_c = np.array([math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) for i in k])
    mags = np.exp(0.5 * log_c - 0.5 * n * math.log(2.0))
    phases = np.zeros(n + 1) if phases is None else np.asarray(phases, dtype=float)
    return _from_m_amplitudes(mags * np.exp(1j * phases))


@dataclass(frozen=True)
class VarianceCatalog:
    n: int
    uniform: float
    extreme: float
    binomial: float

    def delta_q(self, name: str) -> float:
        """Minimum-uncertainty dual spread 1/(2 Delta Jz) for one of the three states."""
        return 1.0 / (2.0 * math.sqrt(getattr(self, name)))

    def as_dict(self) -> dict[str, float]:
        return {
            "N": self.n,
            "uniform": self.uniform,
            "extreme": self.extreme,
            "binomial": self.binomial,
            "delta_q_uniform": self.delta_q("uniform"),
            "delta_q_extreme": self.delta_q("extreme"),
            "delta_q_binomial": self.delta_q("binomial"),
        }


def variance_catalog(n: int, phases: Sequence[float] | None = None) -> VarianceCatalog:
    if not 1 <= n <= MAX_CATALOG_PHOTONS:
        raise ValueError(f"N={n} outside [1, {MAX_CATALOG_PHOTONS}]")
    return VarianceCatalog(
        n=n,
        uniform=variance(uniform_jz_state(n, phases), Jz),
        extreme=variance(extreme_jz_state(n), Jz),
        binomial=variance(binomial_jz_state(n, phases), Jz),
    )


# --- phase sensitivity -------------------------------------------------------


@dataclass(frozen=True)
class SensitivityReport:
    phi: float
    expectation: float
    std_dev: float
    derivative: float
    delta_phi: float
    divergent: bool

    def as_dict(self) -> dict:
        return {
            "phi": self.phi,
            "expectation": self.expectation,
            "std_dev": self.std_dev,
            "derivative": self.derivative,
            "delta_phi": self.delta_phi,
            "divergent": self.divergent,
        }


def sensitivity(
    family: Callable[[float], State],
    obs: Observable,
    phi: float,
    dphi: float = 1e-5,
    copies: int = 1,
    derivative: Callable[[float], float] | None = None,
) -> SensitivityReport:
    """Delta A / |d<A>/dphi| at `phi`.

    `copies` treats the measurement as repeated on that many independent
    copies: mean, variance and slope all add. `derivative`, when given,
    replaces the central finite difference with an analytic slope of the
    single-copy expectation.
    """
    if not 0.0 < dphi <= 0.1:
        raise ValueError(f"step {dphi} outside (0, 0.1]")
    if copies < 1:
        raise ValueError("copies must be positive")
    first, second = moments(family(phi), obs)
    var = second - first * first
    if var < VARIANCE_FLOOR:
        raise ArithmeticError(f"negative variance {var!r}")
    var = max(var, 0.0)
    if derivative is None:
        slope = (expectation(family(phi + dphi), obs) - expectation(family(phi - dphi), obs)) / (
            2.0 * dphi
        )
    else:
        slope = float(derivative(phi))

    mean, var, slope = copies * first, copies * var, copies * slope
    sd = math.sqrt(var)
    divergent = abs(slope) < DIVERGENCE_TOL
    return SensitivityReport(
        phi=phi,
        expectation=mean,
        std_dev=sd,
        derivative=slope,
        delta_phi=math.inf if divergent else sd / abs(slope),
        divergent=divergent,
    )


def scan_sensitivity(
    family: Callable[[float], State],
    obs: Observable,
    phases: Sequence[float],
    dphi: float = 1e-5,
) -> list[SensitivityReport]:
    return [sensitivity(family, obs, float(p), dphi) for p in phases]


def best_sensitivity(
    family: Callable[[float], State],
    obs: Observable,
    phases: Sequence[float],
    dphi: float = 1e-5,
) -> SensitivityReport:
    """Report with the smallest finite delta_phi on the grid."""
    reports = [r for r in scan_sensitivity(family, obs, phases, dphi) if not r.divergent]
    if not reports:
        raise ValueError("sensitivity diverges everywhere on the grid")
    return min(reports, key=lambda r: r.delta_phi)


@dataclass(frozen=True)
class IntelligentStateCheck:
    lhs: float
    rhs: float
    satisfied: bool


def intelligent_state_check(state: FockState, tol: float = 1e-9) -> IntelligentStateCheck:
    """Compare Delta Jx * Delta Jy with |<Jz>|/2 (equality marks a minimum-uncertainty state)."""
    if not isinstance(state, FockState) or state.modes != 2:
        raise ValueError("needs a two-mode Fock state")
    if state.total_photons < 1:
        raise ValueError("needs at least one photon")
    lhs = std_dev(state, Jx) * std_dev(state, Jy)
    rhs = abs(expectation(state, Jz)) / 2.0
    if lhs < rhs - 1e-12:
        raise ArithmeticError(f"uncertainty relation violated: {lhs!r} < {rhs!r}")
    return IntelligentStateCheck(lhs, rhs, abs(lhs - rhs) <= tol)
