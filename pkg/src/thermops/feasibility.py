"""Thermomajorization order, its Lorenz-type curve, and an LP transport oracle.

Two independent routes decide whether p can be taken to q by a
Gibbs-preserving stochastic matrix: the sorted rescaled-cumulative curve
criterion, and a phase-one simplex feasibility solve over the transport
polytope {R >= 0, 1^T R = 1^T, R g = g, R p = q}.  They must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, Infeasible, SolverFailure, SpectrumMismatch
from .spectra import DiagonalState, EnergySpectrum, d_max, joint_spectrum

CURVE_Y_TOL = 1e-12
LP_TOL = 1e-9


@dataclass(frozen=True)
class ThermoCurve:
    """Piecewise-linear concave curve of cumulative (Gibbs weight, probability)."""

    xs: np.ndarray
    ys: np.ndarray

    def value_at(self, x) -> np.ndarray:
        return np.interp(x, self.xs, self.ys)

    @property
    def total_weight(self) -> float:
        return float(self.xs[-1])


def thermo_curve(state: DiagonalState, beta: float) -> ThermoCurve:
    """Sort levels by p_i e^{beta E_i} descending (ties by index) and accumulate."""
    energies = state.spectrum.array
    slopes = state.probs * np.exp(beta * energies)
    order = np.lexsort((np.arange(len(slopes)), -slopes))
    w = np.exp(-beta * energies)[order]
    p = state.probs[order]
    xs = np.concatenate(([0.0], np.cumsum(w)))
    ys = np.concatenate(([0.0], np.cumsum(p)))
    return ThermoCurve(xs=xs, ys=ys)


def thermo_majorizes(p: DiagonalState, q: DiagonalState, beta: float, tol: float = CURVE_Y_TOL) -> bool:
    """True iff curve(p) lies on or above curve(q) at every vertex of curve(q)."""
    if p.spectrum != q.spectrum:
        raise SpectrumMismatch("thermomajorization compares states on one spectrum")
    cp = thermo_curve(p, beta)
    cq = thermo_curve(q, beta)
    return bool(np.all(cp.value_at(cq.xs) >= cq.ys - tol))


def _phase_one_simplex(a: np.ndarray, b: np.ndarray, tol: float = LP_TOL) -> tuple[bool, float]:
    """Feasibility of {A x = b, x >= 0} by minimizing the artificial mass.

    Dense tableau simplex with Bland's rule.  Returns (feasible, residual),
    where residual is the optimal artificial objective.
    """
    m, n = a.shape
    a = a.copy()
    b = b.copy()
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Tableau over [x | artificials | rhs]; objective row selects artificials.
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :n] = -a.sum(axis=0)
    t[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    max_iter = 200 * (n + m)
    for _ in range(max_iter):
        costs = t[m, : n + m]
        enter = -1
        for j in range(n + m):  # Bland: first improving column
            if costs[j] < -1e-11:
                enter = j
                break
        if enter < 0:
            break
        col = t[:m, enter]
        best_ratio, leave = None, -1
        for i in range(m):
            if col[i] > 1e-11:
                ratio = t[i, -1] / col[i]
                if (
                    best_ratio is None
                    or ratio < best_ratio - 1e-13
                    or (abs(ratio - best_ratio) <= 1e-13 and basis[i] < basis[leave])
                ):
                    best_ratio, leave = ratio, i
        if leave < 0:
            raise SolverFailure("phase-one objective unbounded (cannot happen for valid input)")
        piv = t[leave, enter]
        t[leave] /= piv
        for i in range(m + 1):
            if i != leave and t[i, enter] != 0.0:
                t[i] -= t[i, enter] * t[leave]
        basis[leave] = enter
    else:
        raise SolverFailure(f"simplex did not converge within {max_iter} iterations")

    residual = float(-t[m, -1])
    return residual <= tol, residual


def lp_feasible_transport(p: DiagonalState, q: DiagonalState, beta: float) -> bool:
    """Decide existence of R >= 0 with unit column sums, R g = g and R p = q."""
    if p.spectrum != q.spectrum:
        raise SpectrumMismatch("transport requires a common spectrum")
    d = len(p.spectrum)
    g = np.exp(-beta * p.spectrum.array)
    g = g / g.sum()  # normalized fixed point, better conditioned

    # Variables R_ij flattened row-major; constraint rows: column sums,
    # R g = g, R p = q.
    a = np.zeros((3 * d, d * d))
    b = np.zeros(3 * d)
    for j in range(d):
        a[j, j::d] = 1.0
        b[j] = 1.0
    for i in range(d):
        a[d + i, i * d : (i + 1) * d] = g
        b[d + i] = g[i]
        a[2 * d + i, i * d : (i + 1) * d] = p.probs
        b[2 * d + i] = q.probs[i]

    feasible, _ = _phase_one_simplex(a, b)
    return feasible


def _wit_joint_state(sys_state: DiagonalState, wit_level: int, delta: float) -> DiagonalState:
    wit = EnergySpectrum.wit(delta)
    battery = np.zeros(2)
    battery[wit_level] = 1.0
    joint = np.kron(sys_state.probs, battery)
    return DiagonalState(probs=joint, spectrum=joint_spectrum(sys_state.spectrum, wit))


def formation_feasible_at(rho: DiagonalState, sigma: DiagonalState, beta: float, delta: float) -> bool:
    """Is rho (x) |1> -> sigma (x) |0> allowed at wit gap delta?"""
    return thermo_majorizes(
        _wit_joint_state(rho, 1, delta), _wit_joint_state(sigma, 0, delta), beta
    )


def min_formation_gap(
    rho: DiagonalState,
    sigma: DiagonalState,
    beta: float,
    tol: float = 1e-10,
    bracket_max: float = 1e4,
) -> float:
    """Minimal wit gap making the formation transition feasible, by bisection."""
    if rho.spectrum != sigma.spectrum:
        raise SpectrumMismatch("formation gap needs both states on one system spectrum")
    if formation_feasible_at(rho, sigma, beta, 0.0):
        return 0.0
    hi = 1.0
    while not formation_feasible_at(rho, sigma, beta, hi):
        hi *= 2.0
        if hi > bracket_max:
            raise Infeasible(f"no wit gap up to {bracket_max} enables the transition")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if formation_feasible_at(rho, sigma, beta, mid):
            hi = mid
        else:
            lo = mid
    return hi


def formation_gap_from_equilibrium(sigma: DiagonalState, beta: float) -> float:
    """Closed-form gap for forming sigma out of the Gibbs state: D_max/beta."""
    from .spectra import gibbs_state

    tau = gibbs_state(sigma.spectrum, beta)
    try:
        return d_max(sigma, tau) / beta
    except Exception as exc:  # Gibbs state always has full support
        raise DomainError(str(exc)) from exc
