"""Multimode bosonic Fock states and passive linear optics.

States are sparse maps from occupation tuples to complex amplitudes. Every
passive element conserves the total photon number, so a state always lives in
a single photon-number sector.

Beam splitters follow the convention

    a^dag -> i t a^dag + r b^dag,    b^dag -> i t b^dag + r a^dag,

with t^2 + r^2 = 1. A balanced splitter is t = 1/sqrt(2), r = -1/sqrt(2).
"""

from __future__ import annotations

import cmath
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

PRUNE_TOL = 1e-15
NORM_TOL = 1e-12
DEFAULT_BASIS_CAP = 2_000_000
BASIS_CAP_ENV = "ROSETTA_SIM_BASIS_CAP"

Occupation = tuple[int, ...]


class BasisSizeError(ValueError):
    """Raised when a state's photon-number sector exceeds the basis cap."""


def basis_cap() -> int:
    raw = os.environ.get(BASIS_CAP_ENV)
    if raw is None:
        return DEFAULT_BASIS_CAP
    cap = int(raw)
    if cap <= 0:
        raise ValueError(f"{BASIS_CAP_ENV} must be positive, got {raw!r}")
    return cap


def basis_size(total_photons: int, modes: int) -> int:
    """Number of occupation vectors with `modes` entries summing to `total_photons`."""
    return math.comb(total_photons + modes - 1, modes - 1)


def check_basis_size(total_photons: int, modes: int) -> None:
    size = basis_size(total_photons, modes)
    cap = basis_cap()
    if size > cap:
        raise BasisSizeError(
            f"{modes}-mode sector with {total_photons} photons has {size} kets (cap {cap})"
        )


@dataclass(frozen=True)
class FockState:
    """Pure state of `modes` bosonic modes with definite total photon number.

    `normalized` is False for post-selected residuals that were not (or could
    not be) renormalized; an empty amplitude map is the zero vector.
    """

    modes: int
    amplitudes: Mapping[Occupation, complex]
    normalized: bool = True
    total_photons: int = field(init=False)

    def __post_init__(self) -> None:
        if self.modes < 1:
            raise ValueError("a Fock state needs at least one mode")
        clean: dict[Occupation, complex] = {}
        total = None
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != self.modes:
                raise ValueError(f"occupation {occ} does not have {self.modes} modes")
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            n_tot = sum(occ)
            if total is None:
                total = n_tot
            elif n_tot != total:
                raise ValueError("all kets must carry the same total photon number")
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                clean[occ] = amp
        if self.normalized and clean:
            norm2 = sum(abs(a) ** 2 for a in clean.values())
            if abs(norm2 - 1.0) > NORM_TOL:
                raise ValueError(f"state flagged normalized has squared norm {norm2!r}")
        if self.normalized and not clean:
            raise ValueError("the zero vector cannot be flagged normalized")
        object.__setattr__(self, "amplitudes", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "total_photons", 0 if total is None else total)

    @classmethod
    def from_amplitudes(
        cls, modes: int, amplitudes: Mapping[Sequence[int], complex], normalize: bool = True
    ) -> "FockState":
        """Build a state from an arbitrary amplitude map, rescaling to unit norm."""
        amps = {tuple(k): complex(v) for k, v in amplitudes.items()}
        if not normalize:
            return cls(modes, amps, normalized=False)
        norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(modes, {k: v / norm for k, v in amps.items()})

    def __getitem__(self, occ: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(occ), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    @property
    def is_empty(self) -> bool:
        return not self.amplitudes

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def probabilities(self) -> dict[Occupation, float]:
        return {k: abs(a) ** 2 for k, a in self.amplitudes.items()}

    def to_vector(self) -> np.ndarray:
        """Dense amplitudes of a two-mode state, indexed by the photon count of mode 0."""
        if self.modes != 2:
            raise ValueError("dense two-mode vector requires a two-mode state")
        vec = np.zeros(self.total_photons + 1, dtype=complex)
        for (na, _), amp in self.amplitudes.items():
            vec[na] = amp
        return vec

    @classmethod
    def from_vector(cls, vec: np.ndarray, normalized: bool = True) -> "FockState":
        """Inverse of `to_vector`."""
        n = len(vec) - 1
        return cls(2, {(p, n - p): complex(vec[p]) for p in range(n + 1)}, normalized=normalized)


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter with transmission amplitude i*t and reflection r."""

    t: float
    r: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmission amplitude t={self.t} outside [0, 1]")
        if not -1.0 <= self.r <= 1.0:
            raise ValueError(f"reflection amplitude r={self.r} outside [-1, 1]")
        if abs(self.t**2 + self.r**2 - 1.0) > NORM_TOL:
            raise ValueError(f"t^2 + r^2 = {self.t**2 + self.r**2!r}, expected 1")

    @classmethod
    def balanced(cls) -> "BeamSplitter":
        return cls(1 / math.sqrt(2), -1 / math.sqrt(2))

    @classmethod
    def from_reflectivity(cls, r2: float) -> "BeamSplitter":
        """Splitter with intensity reflectivity r^2 = `r2` (negative r, like the balanced one)."""
        if not 0.0 <= r2 <= 1.0:
            raise ValueError(f"reflectivity {r2} outside [0, 1]")
        return cls(math.sqrt(1.0 - r2), -math.sqrt(r2))

    def inverse(self) -> "BeamSplitter":
        """Splitter that undoes this one up to a global phase."""
        return BeamSplitter(self.t, -self.r)

    @property
    def matrix(self) -> np.ndarray:
        """Single-photon mode matrix [[i t, r], [r, i t]]."""
        return np.array([[1j * self.t, self.r], [self.r, 1j * self.t]])


@lru_cache(maxsize=256)
def _pair_matrices(t: float, r: float, n_max: int) -> tuple[np.ndarray, ...]:
    """Beam-splitter action on every two-mode sector with 0..n_max photons.

    Entry [p, m] of the n-th matrix is the amplitude of |p, n-p> in the image of
    |m, n-m>. Column |m, q> is built from the (n-1)-photon columns through

        |m, q> = (sqrt(m) a^dag |m-1, q> + sqrt(q) b^dag |m, q-1>) / n,

    with a^dag and b^dag replaced by their images. Averaging both orders of
    photon addition keeps the recursion stable; the one-sided version loses
    unitarity beyond a few tens of photons.
    """
    alpha, beta = 1j * t, complex(r)
    mats = [np.ones((1, 1), dtype=complex)]
    for n in range(1, n_max + 1):
        prev = mats[-1]
        up_a = np.zeros((n + 1, n), dtype=complex)
        up_a[1:, :] = np.sqrt(np.arange(1, n + 1))[:, None] * prev
        up_b = np.zeros((n + 1, n), dtype=complex)
        up_b[:n, :] = np.sqrt(n - np.arange(n))[:, None] * prev
        via_a = alpha * up_a + beta * up_b
        via_b = beta * up_a + alpha * up_b
        m = np.arange(n + 1)
        cur = np.zeros((n + 1, n + 1), dtype=complex)
        cur[:, 1:] += via_a * (np.sqrt(m[1:]) / n)[None, :]
        cur[:, :n] += via_b * (np.sqrt(n - m[:n]) / n)[None, :]
        mats.append(cur)
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


def _check_mode(state: FockState, mode: int) -> None:
    if not 0 <= mode < state.modes:
        raise IndexError(f"mode {mode} out of range for a {state.modes}-mode state")


def make_fock(occupations: Sequence[int]) -> FockState:
    """Single basis ket with unit amplitude."""
    if len(occupations) == 0:
        raise ValueError("occupation list must be non-empty")
    occ = tuple(int(n) for n in occupations)
    return FockState(len(occ), {occ: 1.0})


def superpose(kets: Mapping[Sequence[int], complex]) -> FockState:
    """Normalized superposition of the given kets with the given (relative) amplitudes."""
    if not kets:
        raise ValueError("need at least one ket")
    modes = len(next(iter(kets)))
    return FockState.from_amplitudes(modes, kets)


def apply_beam_splitter(
    state: FockState, bs: BeamSplitter, mode_pair: tuple[int, int]
) -> FockState:
    i, j = mode_pair
    _check_mode(state, i)
    _check_mode(state, j)
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    check_basis_size(state.total_photons, state.modes)

    # group kets by the occupations outside the pair and the photons inside it
    groups: dict[tuple[Occupation, int], dict[int, complex]] = defaultdict(dict)
    n_pair_max = 0
    for occ, amp in state.amplitudes.items():
        n_pair = occ[i] + occ[j]
        n_pair_max = max(n_pair_max, n_pair)
        template = list(occ)
        template[i] = template[j] = -1
        groups[(tuple(template), n_pair)][occ[i]] = amp
    mats = _pair_matrices(bs.t, bs.r, n_pair_max)

    out: dict[Occupation, complex] = defaultdict(complex)
    for (template, n_pair), column in groups.items():
        vec = np.zeros(n_pair + 1, dtype=complex)
        for m, amp in column.items():
            vec[m] = amp
        image = mats[n_pair] @ vec
        base = list(template)
        for p in range(n_pair + 1):
            amp = image[p]
            if abs(amp) < PRUNE_TOL:
                continue
            base[i], base[j] = p, n_pair - p
            out[tuple(base)] += amp
    return FockState(state.modes, out, normalized=state.normalized)


def apply_phase_shift(state: FockState, mode: int, phi: float) -> FockState:
    """Multiply each ket by exp(i n phi), n = photons in `mode`."""
    _check_mode(state, mode)
    out = {occ: amp * cmath.exp(1j * occ[mode] * phi) for occ, amp in state.amplitudes.items()}
    return FockState(state.modes, out, normalized=state.normalized)


def spin_matrices(n_photons: int) -> dict[str, np.ndarray]:
    """Schwinger angular-momentum matrices on the two-mode sector with `n_photons`.

    Basis index p labels |p, n-p>, i.e. m = p - n/2.
    """
    n = n_photons
    p = np.arange(n + 1)
    raise_ = np.zeros((n + 1, n + 1), dtype=complex)
    # a^dag b |p, n-p> = sqrt((p+1)(n-p)) |p+1, n-p-1>
    raise_[p[:-1] + 1, p[:-1]] = np.sqrt((p[:-1] + 1) * (n - p[:-1]))
    lower = raise_.conj().T
    jz = np.diag(p - n / 2).astype(complex)
    jx = (raise_ + lower) / 2
    jy = (raise_ - lower) / 2j
    return {"x": jx, "y": jy, "z": jz}


def schwinger_rotation(state: FockState, axis: str, angle: float) -> FockState:
    """Apply exp(i * angle * J_axis) to a two-mode state."""
    if state.modes != 2:
        raise ValueError("Schwinger rotation needs a two-mode state")
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    gen = spin_matrices(state.total_photons)[axis]
    rotated = expm(1j * angle * gen) @ state.to_vector()
    return FockState.from_vector(rotated, normalized=state.normalized)


def mach_zehnder(
    state: FockState,
    phi: float,
    bs: BeamSplitter | None = None,
    phase_mode: int = 0,
) -> FockState:
    """Beam splitter, phase `phi` on `phase_mode`, beam splitter (two-mode)."""
    if state.modes != 2:
        raise ValueError("Mach-Zehnder needs a two-mode state")
    bs = BeamSplitter.balanced() if bs is None else bs
    out = apply_beam_splitter(state, bs, (0, 1))
    out = apply_phase_shift(out, phase_mode, phi)
    return apply_beam_splitter(out, bs, (0, 1))


def _validate_projection(state: FockState, modes: Sequence[int]) -> None:
    for m in modes:
        _check_mode(state, m)
    if len(set(modes)) != len(modes):
        raise ValueError("projected modes must be distinct")


def project_counts(
    state: FockState, modes: Sequence[int], counts: Sequence[int]
) -> tuple[FockState, float]:
    """Post-select `counts` photons on `modes`.

    Returns the renormalized residual on the surviving modes (in their original
    order) and the probability of the outcome. A zero-probability outcome gives
    an empty residual with `normalized=False`.
    """
    modes = list(modes)
    counts = [int(c) for c in counts]
    _validate_projection(state, modes)
    if len(counts) != len(modes):
        raise ValueError("need one count per projected mode")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    keep = [k for k in range(state.modes) if k not in set(modes)]
    if not keep:
        raise ValueError("at least one mode must survive the projection")

    target = tuple(counts)
    kept: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        if tuple(occ[m] for m in modes) == target:
            kept[tuple(occ[k] for k in keep)] = amp
    prob = math.fsum(abs(a) ** 2 for a in kept.values())
    if prob == 0.0:
        return FockState(len(keep), {}, normalized=False), 0.0
    scale = 1.0 / math.sqrt(prob)
    residual = FockState(len(keep), {k: a * scale for k, a in kept.items()})
    return residual, min(prob, 1.0)


def count_distribution(state: FockState, modes: Sequence[int]) -> dict[Occupation, float]:
    """Marginal photon-count distribution on `modes` (ideal number-resolving detectors)."""
    modes = list(modes)
    _validate_projection(state, modes)
    dist: dict[Occupation, float] = defaultdict(float)
    for occ, amp in state.amplitudes.items():
        dist[tuple(occ[m] for m in modes)] += abs(amp) ** 2
    return dict(sorted(dist.items()))


def inner(a: FockState, b: FockState) -> complex:
    """<a|b>."""
    if a.modes != b.modes:
        raise ValueError(f"mode mismatch: {a.modes} vs {b.modes}")
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ, amp in small.amplitudes.items():
        other = large.amplitudes.get(occ)
        if other is not None:
            total += (amp.conjugate() * other) if small is a else (other.conjugate() * amp)
    return total


def fidelity(a: FockState, b: FockState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return min(abs(inner(a, b)) ** 2, 1.0)


def basis_kets(total_photons: int, modes: int) -> Iterable[Occupation]:
    """All occupation tuples of the sector, in lexicographic order."""
    if modes == 1:
        yield (total_photons,)
        return
    for first in range(total_photons, -1, -1):
        for rest in basis_kets(total_photons - first, modes - 1):
            yield (first,) + rest
