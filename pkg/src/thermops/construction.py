"""Extension of wit thermal operations to finite harmonic-oscillator batteries.

Any valid two-level-battery operation, given by subchannel blocks
(r00, r01, r10, r11), extends to an (N+1)-level ladder battery:

  column k = 0:      r00 r01^i          at level i < N,   r01^N at level N
  column 0 < k < N:  r10 at k-1,  r00 r01^i r11 at k+i,   r01^{N-k} r11 at N
  column k = N:      r10 at N-1,  r11 at N

The top-level completion makes the finite map exactly trace- and
Gibbs-preserving; translation symmetry then holds on the interior band
above the vacuum (threshold level 1) but necessarily breaks at the top
row, the mirror image of the vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ETIReport,
    ThermalChannel,
    ValidationReport,
    WitSubchannels,
    check_eti,
    extract_subchannels,
    validate,
)
from .errors import Infeasible, NonConvergentSeries
from .feasibility import formation_feasible_at, formation_gap_from_equilibrium
from .spectra import DiagonalState, EnergySpectrum, gibbs_state

TAIL_TOL = 1e-12
MAX_BATTERY_SIZE = 2000


def _ladder_spectrum(num_quanta: int, delta: float) -> EnergySpectrum:
    if delta > 0:
        return EnergySpectrum.oscillator(num_quanta, delta)
    # Degenerate gap (delta = 0) arises only for trivial transitions.
    return EnergySpectrum(levels=(0.0,) * (num_quanta + 1), label="oscillator")


def extend_to_oscillator(sub: WitSubchannels, num_quanta: int) -> ThermalChannel:
    """Build the completed (N+1)-level extension of a wit operation."""
    if num_quanta < 2:
        raise ValueError("extension needs at least a 3-level battery (num_quanta >= 2)")
    sub.check()
    d, n = sub.dim, num_quanta
    nb = n + 1

    # Shared block arrays keep repeated blocks bit-identical across columns.
    powers = [np.eye(d)]
    for _ in range(n):
        powers.append(powers[-1] @ sub.r01)
    a_blocks = [sub.r00 @ powers[i] for i in range(n)]       # r00 r01^i
    c_blocks = [a_blocks[i] @ sub.r11 for i in range(n)]     # r00 r01^i r11
    t_blocks = [powers[j] @ sub.r11 for j in range(nb)]      # r01^j r11

    r4 = np.zeros((d, nb, d, nb))
    for i in range(n):
        r4[:, i, :, 0] = a_blocks[i]
    r4[:, n, :, 0] = powers[n]
    for k in range(1, n):
        r4[:, k - 1, :, k] = sub.r10
        for i in range(n - k):
            r4[:, k + i, :, k] = c_blocks[i]
        r4[:, n, :, k] = t_blocks[n - k]
    r4[:, n - 1, :, n] = sub.r10
    r4[:, n, :, n] = sub.r11

    return ThermalChannel(
        r4.reshape(d * nb, d * nb),
        sub.system,
        sub.system,
        _ladder_spectrum(n, sub.delta),
        sub.beta,
    )


def truncation_tail(sub: WitSubchannels, num_quanta: int) -> float:
    """Operator 1-norm of r01^N, the mass the completion folds into the top level."""
    p = np.linalg.matrix_power(sub.r01, num_quanta)
    return float(np.abs(p).sum(axis=0).max())


def auto_battery_size(sub: WitSubchannels, tol: float = TAIL_TOL, cap: int = MAX_BATTERY_SIZE) -> int:
    """Smallest N with ||r01^N||_1 below tol, capped."""
    p = sub.r01.copy()
    n = 1
    while float(np.abs(p).sum(axis=0).max()) > tol and n < cap:
        p = p @ sub.r01
        n += 1
    return max(n, 2)


def _spectral_radius_bound(m: np.ndarray, steps: int = 200, tol: float = 1e-10) -> float:
    """Power iteration on |m|; upper-bounds the spectral radius of m."""
    a = np.abs(m)
    v = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
    radius = 0.0
    for _ in range(steps):
        w = a @ v
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return 0.0
        new_radius = nrm
        if abs(new_radius - radius) <= tol * max(1.0, new_radius):
            return new_radius
        radius = new_radius
        v = w / nrm
    return radius


def closed_form_average_work(sub: WitSubchannels, x: DiagonalState) -> float:
    """<w> = delta (1^T (I - r01)^{-1} r11 x - 1) for interior battery inputs."""
    radius = _spectral_radius_bound(sub.r01)
    if radius >= 1.0 - 1e-10:
        raise NonConvergentSeries(f"spectral radius bound {radius} too close to 1")
    d = sub.dim
    series = np.linalg.solve(np.eye(d) - sub.r01, sub.r11 @ x.probs)
    return float(sub.delta * (series.sum() - 1.0))


@dataclass(frozen=True)
class ExtensionReport:
    """Bundled audits of an extended channel."""

    validation: ValidationReport
    eti: ETIReport
    blocks_ok: bool
    block_max_deviation: float
    block_first_mismatch: int | None
    tail: float | None

    @property
    def ok(self) -> bool:
        return self.validation.ok and self.eti.holds and self.blocks_ok


def verify_extension(channel: ThermalChannel, sub: WitSubchannels | None = None) -> ExtensionReport:
    """Residuals, interior-band translation audit, and block-structure audit.

    The interior band excludes the top battery row, where the completed
    map mirrors the vacuum and translation symmetry necessarily breaks.
    """
    n = channel.n_battery - 1
    report = validate(channel)
    eti = check_eti(channel, k_min=1, row_max=n - 1, col_max=n - 1)

    ref = extract_subchannels(channel, 1, 0)
    blocks_ok = True
    worst = 0.0
    first_bad = None
    for k in range(1, n + 1):
        block = extract_subchannels(channel, k, k - 1)
        if not np.array_equal(block, ref):
            blocks_ok = False
            worst = max(worst, float(np.max(np.abs(block - ref))))
            if first_bad is None:
                first_bad = k
    tail = truncation_tail(sub, n) if sub is not None else None
    return ExtensionReport(
        validation=report,
        eti=eti,
        blocks_ok=blocks_ok,
        block_max_deviation=worst,
        block_first_mismatch=first_bad,
        tail=tail,
    )


def formation_subchannels(sigma: DiagonalState, beta: float, delta: float) -> WitSubchannels:
    """Wit operation sending every system state to sigma while the battery drops.

    Exists exactly when beta*delta >= D_max(sigma||tau): r10 is the constant
    map onto sigma, r11 = 0, r01 = e^{-beta delta} I, and r00 is fixed by the
    Gibbs pair conditions.
    """
    from .spectra import gibbs_weights

    g = gibbs_weights(sigma.spectrum, beta)
    z = g.sum()
    e = float(np.exp(-beta * delta))
    v = g - e * z * sigma.probs
    if np.min(v) < -1e-12:
        raise Infeasible(
            f"constant formation map needs beta*delta >= D_max, residual {np.min(v)}"
        )
    v = np.clip(v, 0.0, None)
    d = len(g)
    return WitSubchannels(
        r00=np.outer(v, np.ones(d)) / z,
        r01=e * np.eye(d),
        r10=np.outer(sigma.probs, np.ones(d)),
        r11=np.zeros((d, d)),
        delta=delta,
        beta=beta,
        system=sigma.spectrum,
    )


def theorem3_deterministic_work(
    rho: DiagonalState, sigma: DiagonalState, beta: float, num_quanta: int
) -> tuple[ThermalChannel, float]:
    """Ladder-battery channel performing rho (x) |k> -> sigma (x) |k-1> exactly.

    Returns the channel and the gap delta = D_max(sigma||tau)/beta it runs
    at; the induced work distribution from any interior battery level is the
    point mass at -delta.
    """
    delta = formation_gap_from_equilibrium(sigma, beta)
    if not formation_feasible_at(rho, sigma, beta, delta):
        raise Infeasible("no wit operation realizes the requested transition")
    sub = formation_subchannels(sigma, beta, delta)
    channel = extend_to_oscillator(sub, num_quanta)
    return channel, delta


def gibbs_product_state(channel: ThermalChannel, which: str = "in") -> DiagonalState:
    """tau_S (x) tau_W for the channel's spectra; the fixed point of any valid map."""
    sys = channel.sys_in if which == "in" else channel.sys_out
    return DiagonalState.product(
        gibbs_state(sys, channel.beta), gibbs_state(channel.battery, channel.beta)
    )
