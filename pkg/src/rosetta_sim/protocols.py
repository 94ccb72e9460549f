"""Named states, the HOM entangler, lithographic deposition and the peel-off device.

Peel-off device mode layout: (a, b, u, v) = (0, 1, 2, 3). The arms a and b are
tapped into u and v by weak beam splitters, u and v are recombined on a
balanced splitter and then counted by two ideal number-resolving detectors.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .fock import (
    BeamSplitter,
    FockState,
    apply_beam_splitter,
    count_distribution,
    fidelity,
    make_fock,
    project_counts,
    superpose,
)

DEFAULT_GRID_POINTS = 721
DETECTOR_MODES = (2, 3)


# --- named states -------------------------------------------------------------


def dual_fock(n: int) -> FockState:
    _check_photons(n)
    return make_fock([n, n])


def noon(n: int) -> FockState:
    _check_photons(n)
    return superpose({(n, 0): 1.0, (0, n): 1.0})


def yurke(n: int) -> FockState:
    """(|(n+1)/2, (n-1)/2> + |(n-1)/2, (n+1)/2>)/sqrt(2); needs odd n."""
    _check_photons(n)
    if n % 2 == 0:
        raise ValueError(f"Yurke state needs an odd photon number (m = +-1/2), got {n}")
    hi, lo = (n + 1) // 2, (n - 1) // 2
    return superpose({(hi, lo): 1.0, (lo, hi): 1.0})


_NAMED = {"dual_fock": dual_fock, "noon": noon, "yurke": yurke}


def make_named_state(name: str, n: int) -> FockState:
    key = name.replace("-", "_").lower()
    if key not in _NAMED:
        raise ValueError(f"unknown state {name!r}; expected one of {sorted(_NAMED)}")
    return _NAMED[key](n)


def _check_photons(n: int) -> None:
    if n < 1:
        raise ValueError(f"photon number must be >= 1, got {n}")


# --- HOM ----------------------------------------------------------------------


def hom_entangle(state: FockState | None = None) -> FockState:
    """Balanced beam splitter acting on |1,1> (or on `state`)."""
    state = make_fock([1, 1]) if state is None else state
    return apply_beam_splitter(state, BeamSplitter.balanced(), (0, 1))


# --- lithography -----------------------------------------------------------------


@dataclass(frozen=True)
class DepositionCurve:
    phi_grid: np.ndarray
    rate: np.ndarray
    normalized_rate: np.ndarray

    def maxima(self, tol: float = 1e-9) -> np.ndarray:
        """Phases of the local maxima over one period [0, 2 pi)."""
        phi, y = self._one_period()
        left, right = np.roll(y, 1), np.roll(y, -1)
        peaks = (y >= left - tol) & (y >= right - tol) & (y >= y.max() - 1e-6)
        # merge neighbours of a flat-topped peak
        idx = np.flatnonzero(peaks)
        keep = [i for i in idx if not peaks[i - 1] or i == 0]
        return phi[keep]

    def period(self) -> float:
        """Fringe period estimated from the circular autocorrelation."""
        phi, y = self._one_period()
        y = y - y.mean()
        fy = np.fft.rfft(y)
        acf = np.fft.irfft(fy * fy.conj(), n=len(y))
        step = phi[1] - phi[0]
        lags = np.arange(1, len(y))
        vals = acf[1:]
        is_peak = (vals >= np.roll(acf, 1)[1:]) & (vals >= np.roll(acf, -1)[1:])
        top = vals[is_peak].max() if is_peak.any() else None
        if top is None or top < 1e-9 * acf[0]:
            return len(y) * step
        first = lags[is_peak & (vals >= top - 1e-9 * acf[0])][0]
        return float(first * step)

    def _one_period(self) -> tuple[np.ndarray, np.ndarray]:
        phi, y = self.phi_grid, self.normalized_rate
        if np.isclose(phi[-1] - phi[0], 2 * math.pi):
            phi, y = phi[:-1], y[:-1]
        return phi, y


def default_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, points)


def _curve(phi_grid: np.ndarray, rate: np.ndarray) -> DepositionCurve:
    if np.any(rate < -1e-12):
        raise ArithmeticError("negative deposition rate")
    rate = np.clip(rate, 0.0, None)
    peak = rate.max()
    normalized = rate / peak if peak > 0 else rate.copy()
    return DepositionCurve(phi_grid, rate, normalized)


def deposition_rate(state: FockState, phi_grid: Sequence[float] | None = None) -> DepositionCurve:
    """N-photon absorption rate |<0,0|(a e^{i phi} + b)^N|psi>|^2 / N! on a phase grid.

    Dividing by N! keeps the rate O(1); a NOON state gives exactly 1 + cos(N phi).
    """
    if state.modes != 2:
        raise ValueError("deposition needs a two-mode state")
    n = state.total_photons
    if n < 1:
        raise ValueError("deposition needs at least one photon")
    phi = default_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    p = np.arange(n + 1)
    # <0,0| a^p b^(n-p) |p, n-p> * C(n, p) / sqrt(n!) = sqrt(C(n, p))
    log_c = np.array([math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in p])
    weights = np.exp(0.5 * log_c) * state.to_vector()
    amp = np.exp(1j * np.outer(phi, p)) @ weights
    return _curve(phi, np.abs(amp) ** 2)


def uncorrelated_deposition(
    single: FockState, copies: int = 2, phi_grid: Sequence[float] | None = None
) -> DepositionCurve:
    """Independent absorption of `copies` photons, each prepared in the one-photon state `single`."""
    if single.total_photons != 1:
        raise ValueError("uncorrelated exposure is built from one-photon states")
    one = deposition_rate(single, phi_grid)
    return _curve(one.phi_grid, one.rate**copies)


# --- peel-off device ---------------------------------------------------------------


def peel_off_amplitude(n: int, r2: float) -> float:
    """Closed-form |A| = sqrt(N(N-1)/2) r^2 t^(2N-2) of the coincidence branch."""
    if n < 2:
        return 0.0
    if r2 <= 0.0:
        return 0.0
    if r2 >= 1.0:
        return 0.0
    log_a = 0.5 * math.log(n * (n - 1) / 2) + math.log(r2) + (n - 1) * math.log1p(-r2)
    return math.exp(log_a)


def peel_off_probability(n: int, r2: float) -> float:
    return peel_off_amplitude(n, r2) ** 2


def gizmo_output(n: int, r2: float) -> FockState:
    """Four-mode state (a, b, u, v) after the tap splitters and the recombining splitter."""
    if n < 1:
        raise ValueError(f"photon number must be >= 1, got {n}")
    if not 0.0 < r2 < 1.0:
        raise ValueError(f"reflectivity {r2} outside (0, 1)")
    tap = BeamSplitter.from_reflectivity(r2)
    state = make_fock([n, n, 0, 0])
    state = apply_beam_splitter(state, tap, (0, 2))
    state = apply_beam_splitter(state, tap, (1, 3))
    # u' -> (i d - c)/sqrt(2), v' -> (i c - d)/sqrt(2): mode 2 carries d, mode 3 carries c
    return apply_beam_splitter(state, BeamSplitter.balanced(), DETECTOR_MODES)


def _relative_phase(state: FockState, first: tuple[int, int], second: tuple[int, int]) -> float:
    a, b = state[first], state[second]
    if a == 0 or b == 0:
        return math.nan
    return cmath.phase(a / b)


@dataclass(frozen=True)
class PeelOffResult:
    n: int
    conditional_state: FockState
    success_probability: float
    amplitude_A: float
    reflectivity_r2: float
    relative_phase: float

    def target(self) -> FockState:
        n = self.n
        return superpose({(n, n - 2): 1.0, (n - 2, n): 1.0})

    def target_fidelity(self) -> float:
        return fidelity(self.conditional_state, self.target())


def peel_off(n: int, r2: float) -> PeelOffResult:
    """Post-select one photon on each detector; two photons leave arm a or arm b."""
    if n < 2:
        raise ValueError(f"peel-off needs N >= 2, got {n}")
    out = gizmo_output(n, r2)
    residual, prob = project_counts(out, DETECTOR_MODES, (1, 1))
    return PeelOffResult(
        n=n,
        conditional_state=residual,
        success_probability=prob,
        amplitude_A=peel_off_amplitude(n, r2),
        reflectivity_r2=r2,
        relative_phase=_relative_phase(residual, (n, n - 2), (n - 2, n)),
    )


@dataclass(frozen=True)
class OptimalReflectivity:
    n: int
    r2_star: float
    probability_star: float
    r2_analytic: float
    probability_analytic: float
    unimodal: bool

    def as_dict(self) -> dict:
        return {
            "N": self.n,
            "r2_star": self.r2_star,
            "probability_star": self.probability_star,
            "r2_analytic": self.r2_analytic,
            "probability_analytic": self.probability_analytic,
            "unimodal": self.unimodal,
        }


def _is_unimodal(values: np.ndarray) -> bool:
    top = int(np.argmax(values))
    diffs = np.diff(values)
    return bool(np.all(diffs[:top] >= 0) and np.all(diffs[top:] <= 0))


def optimal_reflectivity(
    n: int, tol: float = 1e-8, grid_points: int = 41
) -> OptimalReflectivity:
    """Maximize the simulated coincidence probability over r^2.

    A coarse grid checks unimodality and supplies a three-point bracket for
    golden-section refinement around the best grid point.
    """
    if n < 2:
        raise ValueError(f"peel-off needs N >= 2, got {n}")

    def neg_prob(r2: float) -> float:
        return -peel_off(n, float(r2)).success_probability

    grid = np.linspace(0.0, 1.0, grid_points + 2)[1:-1]
    values = np.array([-neg_prob(x) for x in grid])
    unimodal = _is_unimodal(values)
    k = int(np.clip(np.argmax(values), 1, len(grid) - 2))
    r2_star = optimize.golden(neg_prob, brack=(grid[k - 1], grid[k], grid[k + 1]), tol=tol)
    r2_star = float(r2_star)
    return OptimalReflectivity(
        n=n,
        r2_star=r2_star,
        probability_star=-neg_prob(r2_star),
        r2_analytic=1.0 / n,
        probability_analytic=peel_off_probability(n, 1.0 / n),
        unimodal=unimodal,
    )


def asymptotic_success_probability() -> float:
    """Large-N limit 1/(2 e^2) of the optimized coincidence probability."""
    return 0.5 * math.exp(-2.0)


@dataclass(frozen=True)
class DetectorBranch:
    pattern: tuple[int, int]
    conditional_state: FockState
    probability: float
    relative_phase: float


def peel_off_single_detector(n: int, r2: float) -> list[DetectorBranch]:
    """Branches where exactly one photon fires one detector and the other stays dark."""
    out = gizmo_output(n, r2)
    branches = []
    for pattern in ((1, 0), (0, 1)):
        residual, prob = project_counts(out, DETECTOR_MODES, pattern)
        branches.append(
            DetectorBranch(
                pattern=pattern,
                conditional_state=residual,
                probability=prob,
                relative_phase=_relative_phase(residual, (n, n - 1), (n - 1, n)),
            )
        )
    return branches


def detector_distribution(n: int, r2: float) -> dict[tuple[int, ...], float]:
    """Probabilities of every detector count pattern."""
    return count_distribution(gizmo_output(n, r2), DETECTOR_MODES)
