"""Monte Carlo measurement harness for repeated phase-estimation trials.

Every repetition draws from its own Philox stream whose key is (seed, scheme)
and whose counter is (0, 0, repetition, N), so results do not depend on the
order in which repetitions are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .fock import FockState, apply_phase_shift, make_fock, mach_zehnder
from .protocols import noon
from .qubits import Hadamard, Phase, QubitRegister, run_circuit

State = Union[FockState, QubitRegister]

MEASUREMENTS = ("qubit_computational", "mode_counts", "AN_binary")
SCHEMES = {"separable_qubits": 1, "single_fock_mz": 2, "noon": 3}
NORM_TOL = 1e-10
CLAMP_LIMIT = 0.01
MIN_SCALING_POINTS = 4
# {2, 4, 8, 16} is the standard NOON sweep, so "one decade" is read as a factor of 8
MIN_SCALING_SPAN = 8.0


def outcome_distribution(state: State, measurement: str) -> tuple[list, np.ndarray]:
    """Born-rule outcome labels and probabilities.

    qubit_computational labels are basis indices (qubit 0 most significant);
    mode_counts labels are occupation tuples; AN_binary labels are the
    eigenvalues +1, -1 and 0 (weight outside the |N,0>, |0,N> span).
    """
    if measurement not in MEASUREMENTS:
        raise ValueError(f"unknown measurement {measurement!r}; expected one of {MEASUREMENTS}")
    if isinstance(state, FockState):
        if not state.normalized or abs(state.norm_squared() - 1.0) > NORM_TOL:
            raise ValueError("sampling needs a normalized state")
        if measurement == "mode_counts":
            probs = state.probabilities()
            return list(probs), np.array(list(probs.values()))
        if measurement == "AN_binary":
            if state.modes != 2:
                raise ValueError("AN_binary needs a two-mode state")
            n = state.total_photons
            hi, lo = state[(n, 0)], state[(0, n)]
            return _an_split(hi, lo)
        raise ValueError("qubit_computational needs a qubit register")
    if isinstance(state, QubitRegister):
        if measurement == "qubit_computational":
            return list(range(2**state.n)), state.probabilities()
        if measurement == "AN_binary":
            return _an_split(state.amplitudes[0], state.amplitudes[state.all_ones_index])
        raise ValueError("mode_counts needs a Fock state")
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _an_split(a0: complex, a1: complex) -> tuple[list, np.ndarray]:
    # eigenvectors (|0..0> +- |1..1>)/sqrt(2)
    plus = abs(a0 + a1) ** 2 / 2
    minus = abs(a0 - a1) ** 2 / 2
    rest = max(0.0, 1.0 - plus - minus)
    return [1, -1, 0], np.array([plus, minus, rest])


def _normalize(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_outcome(state: State, measurement: str, rng: np.random.Generator, size: int | None = None):
    """One outcome label (or a list of `size` labels)."""
    labels, probs = outcome_distribution(state, measurement)
    idx = rng.choice(len(labels), size=size, p=_normalize(probs))
    if size is None:
        return labels[int(idx)]
    return [labels[int(i)] for i in idx]


def sample_counts(state: State, measurement: str, rng: np.random.Generator, shots: int) -> dict:
    """Histogram of `shots` independent outcomes."""
    labels, probs = outcome_distribution(state, measurement)
    counts = rng.multinomial(shots, _normalize(probs))
    return {label: int(c) for label, c in zip(labels, counts) if c}


def stream(seed: int, scheme: str, n: int, repetition: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFF_FFFF_FFFF_FFFF, SCHEMES[scheme]], dtype=np.uint64)
    counter = np.array([0, 0, repetition, n], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


# --- schemes -------------------------------------------------------------------


@dataclass(frozen=True)
class Scheme:
    name: str
    n: int

    def __post_init__(self) -> None:
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}; expected one of {sorted(SCHEMES)}")
        if self.n < 1:
            raise ValueError("scheme needs at least one particle")

    @property
    def fringe_multiplier(self) -> int:
        """k such that the mean fringe observable is cos(k phi)."""
        return self.n if self.name == "noon" else 1

    def operating_point(self) -> float:
        """Phase of maximum fringe slope."""
        return math.pi / (2 * self.fringe_multiplier)

    def sampled_state(self, phi: float) -> State:
        if self.name == "separable_qubits":
            # H Phase H maps sigma_x of (|0> + e^{i phi}|1>)/sqrt(2) onto Z
            return run_circuit(QubitRegister.zeros(1), [Hadamard(0), Phase(0, phi), Hadamard(0)])
        if self.name == "single_fock_mz":
            return mach_zehnder(make_fock([self.n, 0]), phi)
        return apply_phase_shift(noon(self.n), 0, phi)

    def measurement(self) -> str:
        return {
            "separable_qubits": "qubit_computational",
            "single_fock_mz": "mode_counts",
            "noon": "AN_binary",
        }[self.name]

    def fringe_values(self, labels: list) -> np.ndarray:
        """Map outcome labels to values of the fringe observable (mean cos(k phi))."""
        if self.name == "separable_qubits":
            return np.array([1.0 if lab == 0 else -1.0 for lab in labels])
        if self.name == "single_fock_mz":
            return np.array([(lab[1] - lab[0]) / self.n for lab in labels])
        return np.array([float(lab) for lab in labels])

    def draws_per_trial(self) -> int:
        # each separable trial measures N independent qubits
        return self.n if self.name == "separable_qubits" else 1


@dataclass(frozen=True)
class TrialConfig:
    true_phi: float | None
    trials: int
    repetitions: int
    seed: int
    scheme: Scheme

    def __post_init__(self) -> None:
        if self.trials < 1 or self.repetitions < 1:
            raise ValueError("trials and repetitions must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def phi(self) -> float:
        return self.scheme.operating_point() if self.true_phi is None else self.true_phi


@dataclass(frozen=True)
class PhaseEstimate:
    """Outcome of repeated estimation runs.

    `raw_std` is the spread of single-repetition estimates; `delta_phi` rescales
    it by sqrt(trials) to the uncertainty of one trial.
    """

    phi_hat: float
    delta_phi: float
    raw_std: float
    clamped_fraction: float
    misconfigured: bool
    estimates: np.ndarray = field(repr=False)


def estimate_phase(config: TrialConfig) -> PhaseEstimate:
    """Method-of-moments estimate: invert the mean fringe value with arccos."""
    scheme = config.scheme
    phi = config.phi
    k = scheme.fringe_multiplier
    if not 0.0 < k * phi < math.pi:
        raise ValueError(f"phase {phi} outside the invertible branch (0, pi/{k})")

    state = scheme.sampled_state(phi)
    labels, probs = outcome_distribution(state, scheme.measurement())
    probs = _normalize(probs)
    values = scheme.fringe_values(labels)
    shots = config.trials * scheme.draws_per_trial()

    estimates = np.empty(config.repetitions)
    clamped = 0
    for rep in range(config.repetitions):
        rng = stream(config.seed, scheme.name, scheme.n, rep)
        counts = rng.multinomial(shots, probs)
        mean = float(counts @ values) / shots
        if mean >= 1.0 or mean <= -1.0:
            clamped += 1
        estimates[rep] = math.acos(min(1.0, max(-1.0, mean))) / k

    raw_std = float(np.std(estimates, ddof=1)) if config.repetitions > 1 else 0.0
    frac = clamped / config.repetitions
    return PhaseEstimate(
        phi_hat=float(np.mean(estimates)),
        delta_phi=raw_std * math.sqrt(config.trials),
        raw_std=raw_std,
        clamped_fraction=frac,
        misconfigured=frac >= CLAMP_LIMIT,
        estimates=estimates,
    )


@dataclass(frozen=True)
class ScalingResult:
    scheme: str
    n_values: list[int]
    delta_phi_empirical: list[float]
    fitted_exponent: float
    exponent_stderr: float
    intercept: float

    def as_rows(self) -> list[list]:
        return [[n, d] for n, d in zip(self.n_values, self.delta_phi_empirical)]


def scaling_experiment(
    scheme: str,
    n_values: Sequence[int],
    trials: int = 100,
    repetitions: int = 10_000,
    seed: int = 0,
) -> ScalingResult:
    """Fit log(delta_phi) against log(N) by ordinary least squares.

    Each N runs at its own operating point of maximum fringe slope.
    """
    ns = sorted(set(int(n) for n in n_values))
    if len(ns) < MIN_SCALING_POINTS:
        raise ValueError(f"need at least {MIN_SCALING_POINTS} distinct N values, got {ns}")
    if ns[-1] / ns[0] < MIN_SCALING_SPAN:
        raise ValueError(f"N values {ns} span less than a factor {MIN_SCALING_SPAN:g}")
    if trials < 100:
        raise ValueError("scaling runs need at least 100 trials per estimate")

    deltas = []
    for n in ns:
        cfg = TrialConfig(None, trials, repetitions, seed, Scheme(scheme, n))
        deltas.append(estimate_phase(cfg).delta_phi)
    if min(deltas) <= 0:
        raise ArithmeticError("non-positive empirical uncertainty")
    fit = stats.linregress(np.log(ns), np.log(deltas))
    return ScalingResult(
        scheme=scheme,
        n_values=ns,
        delta_phi_empirical=deltas,
        fitted_exponent=float(fit.slope),
        exponent_stderr=float(fit.stderr),
        intercept=float(fit.intercept),
    )
