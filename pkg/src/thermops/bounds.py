"""Jarzynski-type conditional averages and second-law correction terms.

For a channel obeying effective translational invariance above battery
level k_min, the conditional exponential average from level k is bounded
by Z_out (1 + e^{-beta delta_k}) with delta_k = (k - k_min + 1) delta,
and the average work obeys

    <w> <= -dF + A(bat, sys) + B(bat),

where A collects the vacuum-regime contribution and B decays
exponentially with the distance of the battery state to the threshold.
B is certified in its larger (eta_S-weighted) variant; both are reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batteries import CheckReport, average_work, work_distribution
from .channels import ThermalChannel, apply, check_eti, sys_marginal
from .errors import DomainError, ETIViolated, IndexOutOfRange, NonUniformBattery
from .spectra import (
    DiagonalState,
    EnergySpectrum,
    free_energy,
    gibbs_state,
    logsumexp,
    partition_function,
)

THEOREM_TOL = 1e-10


def conditional_jarzynski(channel: ThermalChannel, sys: DiagonalState, k: int) -> float:
    """<e^{beta(w - f_s)}>_k, the exponential average conditioned on battery level k.

    Computed in log-sum-exp form with the exact cancellation
    p(s) e^{-beta f_s} = e^{-beta E_s}, which also covers zero-probability
    levels (the state argument is validated but cannot change the value).
    """
    if not 0 <= k < channel.n_battery:
        raise IndexOutOfRange(f"battery level {k} outside 0..{channel.n_battery - 1}")
    if len(sys.spectrum) != channel.d_in:
        raise IndexOutOfRange("system state does not match the channel input")
    r4 = channel.blocks()
    col = r4[:, :, :, k]  # [s', k', s]
    eps = channel.battery.array
    with np.errstate(divide="ignore"):
        logr = np.log(col, out=np.full_like(col, -np.inf), where=col > 0)
    beta = channel.beta
    terms = (
        logr
        + beta * (eps[None, :, None] - eps[k])
        - beta * channel.sys_in.array[None, None, :]
    )
    return float(np.exp(logsumexp(terms)))


def jarzynski_average(channel: ThermalChannel, sys: DiagonalState, bat: DiagonalState) -> float:
    """Unconditional <e^{beta(w - f_s)}> = sum_k p_W(k) <...>_k."""
    return float(
        sum(
            p * conditional_jarzynski(channel, sys, k)
            for k, p in enumerate(bat.probs)
            if p > 0
        )
    )


def _require_uniform(channel: ThermalChannel) -> float:
    delta = channel.battery.uniform_spacing()
    if delta is None:
        raise NonUniformBattery("bound needs a uniformly spaced battery")
    return delta


def _require_interior_eti(channel: ThermalChannel, k_min: int) -> None:
    n = channel.n_battery - 1
    report = check_eti(channel, k_min, row_max=n - 1, col_max=n - 1)
    if not report.holds:
        raise ETIViolated(
            f"interior-band translation symmetry violated by {report.max_violation}"
        )


def theorem1_certify(
    channel: ThermalChannel,
    sys: DiagonalState,
    k_min: int,
    band_buffer: int = 5,
    tol: float = THEOREM_TOL,
) -> CheckReport:
    """Check <e^{beta(w-f_s)}>_k <= Z_out (1 + e^{-beta delta_k}) on the band."""
    delta = _require_uniform(channel)
    _require_interior_eti(channel, k_min)
    z_out = partition_function(channel.sys_out, channel.beta)
    n = channel.n_battery - 1
    worst_slack = np.inf
    worst_k = None
    rows = []
    for k in range(k_min, n - band_buffer + 1):
        lhs = conditional_jarzynski(channel, sys, k)
        delta_k = (k - k_min + 1) * delta
        rhs = z_out * (1.0 + np.exp(-channel.beta * delta_k))
        slack = rhs - lhs
        rows.append((k, lhs, rhs, slack))
        if slack < worst_slack:
            worst_slack, worst_k = slack, k
    return CheckReport(
        name="jarzynski-family-bound",
        passed=worst_slack >= -tol,
        worst_slack=float(worst_slack),
        details={"worst_k": worst_k, "rows": rows, "z_out": z_out},
    )


def battery_mean_energy(battery: EnergySpectrum, beta: float) -> float:
    """Gibbs-average battery energy <E>_beta."""
    g = gibbs_state(battery, beta)
    return float(g.probs @ battery.array)


def eta_derivative(battery: EnergySpectrum, beta: float, k: int) -> float:
    """d/d beta of eta_k = Z_W e^{beta eps_k}, analytically eta_k (eps_k - <E>_beta)."""
    if not 0 <= k < len(battery):
        raise IndexOutOfRange(f"battery level {k} outside the spectrum")
    eps_k = battery.levels[k]
    eta_k = partition_function(battery, beta) * np.exp(beta * eps_k)
    return float(eta_k * (eps_k - battery_mean_energy(battery, beta)))


@dataclass(frozen=True)
class SecondLawReport:
    """Average-work bound <w> <= -dF + A + B with both B variants."""

    avg_work: float
    delta_F: float
    A_term: float
    B_term_main: float
    B_term_appendix: float
    slack: float  # (-dF + A + B_appendix) - <w>

    @property
    def bound(self) -> float:
        return -self.delta_F + self.A_term + self.B_term_appendix


def theorem2_bound(
    channel: ThermalChannel,
    sys: DiagonalState,
    bat: DiagonalState,
    k_min: int,
) -> SecondLawReport:
    """Evaluate the corrected second law for one (channel, system, battery) run."""
    delta = _require_uniform(channel)
    _require_interior_eti(channel, k_min)
    beta = channel.beta

    avg = average_work(work_distribution(channel, sys, bat))

    out = apply(channel, sys, bat)
    out_sys = DiagonalState(sys_marginal(out, channel.d_out, channel.n_battery), channel.sys_out)
    delta_f = free_energy(out_sys, beta) - free_energy(sys, beta)

    e_max_out = float(np.max(channel.sys_out.array))
    eta_s = partition_function(channel.sys_in, beta) * np.exp(beta * e_max_out)
    f_in = free_energy(sys, beta)

    a_term = 0.0
    for k in range(k_min):
        p = bat.probs[k]
        if p > 0:
            a_term += p * (e_max_out - f_in - eta_s * eta_derivative(channel.battery, beta, k))

    ks = np.arange(k_min, channel.n_battery)
    delta_ks = (ks - k_min + 1) * delta
    tail = float(bat.probs[k_min:] @ np.exp(-beta * delta_ks))
    b_main = np.log1p(tail) / beta
    b_appendix = np.log1p(eta_s * tail) / beta

    slack = (-delta_f + a_term + b_appendix) - avg
    return SecondLawReport(
        avg_work=avg,
        delta_F=delta_f,
        A_term=a_term,
        B_term_main=float(b_main),
        B_term_appendix=float(b_appendix),
        slack=float(slack),
    )


def corollary1_correction(
    eps_star: float,
    bat: DiagonalState,
    sys_params: tuple[int, float],
    beta: float,
    delta: float,
    eps_min: float,
) -> float:
    """Simplified correction C(eps*, rho_W); the bound is <w> <= -dF + C/beta.

    C = p(eps < eps*) [c_S h + ln c_S] + c_S e^{-beta(eps* - eps_min)} with
    h = e^{-beta delta} [1 + beta delta e^{beta eps_min} (1 - e^{-beta delta})^{-2}]
    and c_S = d_S e^{beta E_max_out}.
    """
    if not eps_star > eps_min >= 0:
        raise DomainError(f"need eps_star > eps_min >= 0, got ({eps_star}, {eps_min})")
    if delta <= 0:
        raise DomainError("need a positive ladder spacing")
    d_s, e_max_out = sys_params

    eps_levels = bat.spectrum.array
    p_below = float(bat.probs[eps_levels <= eps_star * (1 + 1e-12) + 1e-300].sum())

    log_c = np.log(d_s) + beta * e_max_out
    c_s = np.exp(log_c)
    bd = beta * delta
    h_corr = np.exp(-bd) * (1.0 + bd * np.exp(beta * eps_min) / np.expm1(-bd) ** 2)
    fixed_term = np.exp(log_c - beta * (eps_star - eps_min))
    return float(p_below * (c_s * h_corr + log_c) + fixed_term)


def gaussian_battery_profile(
    num_quanta: int, delta: float, center: float, beta: float
) -> DiagonalState:
    """Battery state with p(eps) proportional to e^{-beta^2 (eps - center)^2 / 2}."""
    spectrum = EnergySpectrum.oscillator(num_quanta, delta)
    z = beta * (spectrum.array - center)
    logp = -0.5 * z**2
    p = np.exp(logp - logsumexp(logp))
    p /= p.sum()
    return DiagonalState(probs=p, spectrum=spectrum)
