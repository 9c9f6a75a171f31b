"""Energy spectra, diagonal states, and free-energy functionals.

All energies are beta-reduced (dimensionless, k_B T = 1 by default) and the
inverse temperature beta enters every formula explicitly.  Natural logarithms
throughout, so that erasing one bit costs ln 2 at beta = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IndexOutOfRange,
    OverflowRisk,
    SpectrumMismatch,
    SupportMismatch,
    ZeroProbability,
)

# Largest |beta * E| fed to exp(); beyond this doubles overflow.
EXP_GUARD = 700.0

PROB_SUM_TOL = 1e-12


def logsumexp(a: np.ndarray) -> float:
    """log(sum(exp(a))) without overflow; -inf entries are allowed."""
    a = np.asarray(a, dtype=float).ravel()
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(a - m))))


def binary_entropy(x: float) -> float:
    """h(x) = -(1-x)ln(1-x) - x ln x, continuous at the endpoints."""
    if x < 0.0 or x > 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    out = 0.0
    if 0.0 < x:
        out -= x * np.log(x)
    if x < 1.0:
        out -= (1.0 - x) * np.log1p(-x)
    return out


@dataclass(frozen=True)
class EnergySpectrum:
    """Ordered energy levels of a system or battery, in units of k_B T."""

    levels: tuple[float, ...]
    label: str = field(default="", compare=False)  # tag only, not identity

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("spectrum needs at least one level")
        arr = np.asarray(self.levels, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectrum levels must be finite")
        object.__setattr__(self, "levels", tuple(float(x) for x in arr))

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    @classmethod
    def trivial(cls, dim: int, label: str = "degenerate") -> "EnergySpectrum":
        """Fully degenerate spectrum (H = 0) with `dim` levels."""
        return cls(levels=(0.0,) * dim, label=label)

    @classmethod
    def oscillator(cls, num_quanta: int, delta: float, label: str = "oscillator") -> "EnergySpectrum":
        """Uniform ladder eps_k = k*delta for k = 0..num_quanta (num_quanta+1 levels)."""
        if num_quanta < 1:
            raise ValueError("oscillator needs num_quanta >= 1")
        if delta <= 0:
            raise ValueError("oscillator spacing must be positive")
        return cls(levels=tuple(k * delta for k in range(num_quanta + 1)), label=label)

    @classmethod
    def wit(cls, delta: float, label: str = "wit") -> "EnergySpectrum":
        """Two-level battery {0, delta}."""
        if delta < 0:
            raise ValueError("wit gap must be non-negative")
        return cls(levels=(0.0, delta), label=label)

    def uniform_spacing(self, tol: float = 1e-12) -> float | None:
        """Spacing delta if the ladder is uniform starting at 0, else None."""
        arr = self.array
        if len(arr) < 2:
            return None
        delta = arr[1] - arr[0]
        if delta <= 0 or abs(arr[0]) > tol:
            return None
        expected = arr[0] + delta * np.arange(len(arr))
        if np.max(np.abs(arr - expected)) > tol * max(1.0, abs(arr[-1])):
            return None
        return float(delta)


def joint_spectrum(sys: EnergySpectrum, battery: EnergySpectrum) -> EnergySpectrum:
    """Product spectrum over pairs (s, k), flattened system-major."""
    levels = (sys.array[:, None] + battery.array[None, :]).ravel()
    return EnergySpectrum(levels=tuple(levels), label=f"{sys.label}*{battery.label}")


@dataclass(frozen=True)
class DiagonalState:
    """Probability vector over an energy spectrum (energy-diagonal state)."""

    probs: np.ndarray
    spectrum: EnergySpectrum = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or len(p) != len(self.spectrum):
            raise SpectrumMismatch(
                f"state has {p.size} entries for a {len(self.spectrum)}-level spectrum"
            )
        if np.min(p) < -1e-15:
            raise ValueError(f"negative probability {np.min(p)}")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def pure(cls, index: int, spectrum: EnergySpectrum) -> "DiagonalState":
        if not 0 <= index < len(spectrum):
            raise IndexOutOfRange(f"level {index} outside spectrum of size {len(spectrum)}")
        p = np.zeros(len(spectrum))
        p[index] = 1.0
        return cls(probs=p, spectrum=spectrum)

    @classmethod
    def product(cls, a: "DiagonalState", b: "DiagonalState") -> "DiagonalState":
        return cls(probs=np.kron(a.probs, b.probs), spectrum=joint_spectrum(a.spectrum, b.spectrum))


def _check_exp_range(spectrum: EnergySpectrum, beta: float) -> None:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    worst = beta * np.max(np.abs(spectrum.array))
    if worst > EXP_GUARD:
        raise OverflowRisk(f"beta*|E| = {worst} exceeds the {EXP_GUARD} guard")


def partition_function(spectrum: EnergySpectrum, beta: float) -> float:
    """Z = sum_i exp(-beta E_i), via log-sum-exp."""
    _check_exp_range(spectrum, beta)
    return float(np.exp(logsumexp(-beta * spectrum.array)))


def gibbs_state(spectrum: EnergySpectrum, beta: float) -> DiagonalState:
    """Thermal state g(i) = exp(-beta E_i)/Z."""
    _check_exp_range(spectrum, beta)
    logw = -beta * spectrum.array
    p = np.exp(logw - logsumexp(logw))
    p /= p.sum()
    return DiagonalState(probs=p, spectrum=spectrum)


def gibbs_weights(spectrum: EnergySpectrum, beta: float) -> np.ndarray:
    """Unnormalized Gibbs weights exp(-beta E_i)."""
    _check_exp_range(spectrum, beta)
    return np.exp(-beta * spectrum.array)


def free_energy(state: DiagonalState, beta: float) -> float:
    """F = <E> - S/beta with S = -sum p ln p (0 ln 0 = 0)."""
    p = state.probs
    energy = float(p @ state.spectrum.array)
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return energy - entropy / beta


def fine_grained_free_energy(state: DiagonalState, beta: float, index: int) -> float:
    """Per-level f_i = E_i + ln(p_i)/beta; its p-average is free_energy."""
    if not 0 <= index < len(state.spectrum):
        raise IndexOutOfRange(f"level {index} outside spectrum")
    p = state.probs[index]
    if p <= 0.0:
        raise ZeroProbability(f"f is -inf on zero-probability level {index}")
    return float(state.spectrum.levels[index] + np.log(p) / beta)


def d_max(state: DiagonalState, reference: DiagonalState) -> float:
    """Max-relative entropy ln max_i p_i/q_i over the support of p."""
    if state.spectrum != reference.spectrum:
        raise SpectrumMismatch("d_max requires a common spectrum")
    p, q = state.probs, reference.probs
    mask = p > 0
    if np.any(q[mask] == 0):
        raise SupportMismatch("reference vanishes on the support of the state")
    return float(np.max(np.log(p[mask]) - np.log(q[mask])))
