"""Thermal channels as Gibbs-stochastic transition matrices.

A channel acts on the joint (system, battery) level space.  The dense matrix
`r(s'k'|sk)` is column-indexed by input pairs and row-indexed by output
pairs, flattened system-major: index(s, k) = s * n_battery + k.  Validity
means column sums 1 (trace preservation) and R g_in = g_out for the joint
Gibbs weight vectors (fixed-point condition), which is the channel-level
form of Gibbs-stochasticity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSubchannels,
    NonUniformBattery,
    SpectrumMismatch,
)
from .spectra import (
    DiagonalState,
    EnergySpectrum,
    gibbs_weights,
    joint_spectrum,
    logsumexp,
)

STOCHASTIC_TOL = 1e-12
GIBBS_TOL = 1e-10
ETI_TOL = 1e-14


@dataclass(frozen=True)
class ThermalChannel:
    """Dense transition matrix over joint (system, battery) indices."""

    matrix: np.ndarray
    sys_in: EnergySpectrum
    sys_out: EnergySpectrum
    battery: EnergySpectrum
    beta: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        nb = len(self.battery)
        if m.ndim != 2 or m.shape != (len(self.sys_out) * nb, len(self.sys_in) * nb):
            raise DimensionMismatch(
                f"matrix shape {m.shape} inconsistent with "
                f"d_out={len(self.sys_out)}, d_in={len(self.sys_in)}, n_battery={nb}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d_in(self) -> int:
        return len(self.sys_in)

    @property
    def d_out(self) -> int:
        return len(self.sys_out)

    @property
    def n_battery(self) -> int:
        return len(self.battery)

    def blocks(self) -> np.ndarray:
        """View shaped [s', k', s, k]."""
        nb = self.n_battery
        return self.matrix.reshape(self.d_out, nb, self.d_in, nb)

    def joint_in_spectrum(self) -> EnergySpectrum:
        return joint_spectrum(self.sys_in, self.battery)

    def joint_out_spectrum(self) -> EnergySpectrum:
        return joint_spectrum(self.sys_out, self.battery)


def identity_channel(sys: EnergySpectrum, battery: EnergySpectrum, beta: float) -> ThermalChannel:
    dim = len(sys) * len(battery)
    return ThermalChannel(np.eye(dim), sys, sys, battery, beta)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    max_stochasticity_residual: float
    max_gibbs_residual: float
    column_residuals: np.ndarray = field(repr=False)
    row_residuals: np.ndarray = field(repr=False)
    entry_min: float
    entry_max: float
    stoch_tol: float
    gibbs_tol: float


def validate(
    channel: ThermalChannel,
    stoch_tol: float = STOCHASTIC_TOL,
    gibbs_tol: float = GIBBS_TOL,
) -> ValidationReport:
    """Check trace preservation per column and the Gibbs condition per row."""
    m = channel.matrix
    col_res = np.abs(m.sum(axis=0) - 1.0)

    lw_in = -channel.beta * channel.joint_in_spectrum().array
    lw_out = -channel.beta * channel.joint_out_spectrum().array
    row_res = np.empty(m.shape[0])
    with np.errstate(divide="ignore"):
        logm = np.log(m, out=np.full_like(m, -np.inf), where=m > 0)
    for i in range(m.shape[0]):
        # Gibbs condition row i: sum_j r_ij e^{-beta E_j} = e^{-beta E_i}.
        s = logsumexp(logm[i] + lw_in)
        row_res[i] = abs(np.expm1(s - lw_out[i])) if np.isfinite(s) else 1.0

    ok = bool(
        float(col_res.max()) <= stoch_tol
        and float(row_res.max()) <= gibbs_tol
        and m.min() >= -1e-15
        and m.max() <= 1.0 + 1e-12
    )
    return ValidationReport(
        ok=ok,
        max_stochasticity_residual=float(col_res.max()),
        max_gibbs_residual=float(row_res.max()),
        column_residuals=col_res,
        row_residuals=row_res,
        entry_min=float(m.min()),
        entry_max=float(m.max()),
        stoch_tol=stoch_tol,
        gibbs_tol=gibbs_tol,
    )


def apply(
    channel: ThermalChannel,
    sys: DiagonalState | None = None,
    bat: DiagonalState | None = None,
    joint: DiagonalState | None = None,
) -> DiagonalState:
    """Push a product state (or an already-joint distribution) through the channel."""
    if joint is None:
        if sys is None or bat is None:
            raise ValueError("provide either (sys, bat) or joint")
        if len(sys.spectrum) != channel.d_in or len(bat.spectrum) != channel.n_battery:
            raise DimensionMismatch("input state dimensions do not match the channel")
        vec = np.kron(sys.probs, bat.probs)
    else:
        if len(joint.probs) != channel.matrix.shape[1]:
            raise DimensionMismatch("joint input dimension does not match the channel")
        vec = joint.probs
    out = channel.matrix @ vec
    # No renormalization: the state validator enforces the 1e-12 budget, so
    # a channel that leaks probability fails loudly here.
    return DiagonalState(probs=out, spectrum=channel.joint_out_spectrum())


def sys_marginal(joint: DiagonalState, d_sys: int, n_battery: int) -> np.ndarray:
    return joint.probs.reshape(d_sys, n_battery).sum(axis=1)


def battery_marginal(joint: DiagonalState, d_sys: int, n_battery: int) -> np.ndarray:
    return joint.probs.reshape(d_sys, n_battery).sum(axis=0)


def compose(second: ThermalChannel, first: ThermalChannel) -> ThermalChannel:
    """Channel running `first` then `second` (matching spectra required)."""
    if first.sys_out != second.sys_in or first.battery != second.battery:
        raise SpectrumMismatch("composition requires matching intermediate spectra")
    if first.beta != second.beta:
        raise ValueError("composition requires equal beta")
    return ThermalChannel(
        second.matrix @ first.matrix, first.sys_in, second.sys_out, first.battery, first.beta
    )


@dataclass(frozen=True)
class ETIReport:
    """Translation-invariance audit above a threshold battery level."""

    holds: bool
    convention: str
    max_violation: float
    worst: tuple | None
    main_max_violation: float
    appendix_max_violation: float
    k_min: int
    row_max: int
    col_max: int
    tol: float


def _band_violation_main(r4: np.ndarray, k_min: int, row_max: int, col_max: int):
    """Max |r(s'k'|sk) - r(s',k'+n|s,k+n)| over the main-text window.

    Window: rows k, k+n in [k_min, row_max], columns k', k'+n in [0, col_max].
    Equivalent per band d = k'-k: all blocks with k in the valid range equal.
    """
    worst = 0.0
    where = None
    for d in range(-col_max, col_max + 1):
        k_lo = max(k_min, -d)
        k_hi = min(row_max, col_max - d)
        if k_hi - k_lo < 1:
            continue
        ks = np.arange(k_lo, k_hi + 1)
        vals = r4[:, ks + d, :, ks]  # shape (len(ks), d_out, d_in)
        hi = vals.max(axis=0)
        lo = vals.min(axis=0)
        dev = hi - lo
        band_worst = float(dev.max())
        if band_worst > worst:
            worst = band_worst
            a, b = np.unravel_index(np.argmax(dev), dev.shape)
            k_at_hi = ks[int(np.argmax(vals[:, a, b]))]
            k_at_lo = ks[int(np.argmin(vals[:, a, b]))]
            where = (int(a), int(b), int(k_at_hi), int(k_at_lo), int(d))
    return worst, where


def _band_violation_appendix(r4: np.ndarray, k_min: int, row_max: int, col_max: int):
    """Appendix window: base rows k >= k_min with 0 <= k+n <= row_max and
    shifted columns k'+n >= k_min."""
    worst = 0.0
    where = None
    for d in range(-col_max, col_max + 1):
        b_lo, b_hi = max(k_min, -d), min(row_max, col_max - d)
        t_lo, t_hi = max(0, k_min - d), min(row_max, col_max - d)
        if b_hi < b_lo or t_hi < t_lo:
            continue
        if b_lo == t_lo and b_hi == t_hi and b_hi == b_lo:
            continue
        kb = np.arange(b_lo, b_hi + 1)
        kt = np.arange(t_lo, t_hi + 1)
        base = r4[:, kb + d, :, kb]
        targ = r4[:, kt + d, :, kt]
        dev = np.maximum(base.max(axis=0) - targ.min(axis=0), targ.max(axis=0) - base.min(axis=0))
        band_worst = float(dev.max())
        if band_worst > worst:
            worst = band_worst
            a, b = np.unravel_index(np.argmax(dev), dev.shape)
            where = (int(a), int(b), int(kb[0]), int(kt[0]), int(d))
    return worst, where


def check_eti(
    channel: ThermalChannel,
    k_min: int,
    convention: str = "main",
    row_max: int | None = None,
    col_max: int | None = None,
    tol: float = ETI_TOL,
) -> ETIReport:
    """Verify r(s'k'|sk) = r(s',k'+n|s,k+n) for k >= k_min.

    Both window conventions are evaluated and reported; `convention`
    selects which one decides `holds`.  `row_max`/`col_max` restrict the
    audit to an interior band (used to exclude the completed top row).
    """
    if channel.battery.uniform_spacing() is None:
        raise NonUniformBattery("ETI is defined for uniformly spaced batteries")
    if convention not in ("main", "appendix"):
        raise ValueError(f"unknown ETI window convention {convention!r}")
    nb = channel.n_battery
    row_max = nb - 1 if row_max is None else row_max
    col_max = nb - 1 if col_max is None else col_max
    if not (0 <= k_min <= row_max < nb and 0 <= col_max < nb):
        raise IndexOutOfRange("ETI band outside the battery range")

    r4 = channel.blocks()
    v_main, w_main = _band_violation_main(r4, k_min, row_max, col_max)
    v_app, w_app = _band_violation_appendix(r4, k_min, row_max, col_max)
    violation, where = (v_main, w_main) if convention == "main" else (v_app, w_app)
    return ETIReport(
        holds=violation <= tol,
        convention=convention,
        max_violation=violation,
        worst=where,
        main_max_violation=v_main,
        appendix_max_violation=v_app,
        k_min=k_min,
        row_max=row_max,
        col_max=col_max,
        tol=tol,
    )


def extract_subchannels(channel: ThermalChannel, k: int, k_prime: int) -> np.ndarray:
    """The d_out x d_in block taking battery level k to level k'."""
    nb = channel.n_battery
    if not (0 <= k < nb and 0 <= k_prime < nb):
        raise IndexOutOfRange(f"battery indices ({k}, {k_prime}) outside 0..{nb - 1}")
    return channel.blocks()[:, k_prime, :, k].copy()


def random_gibbs_stochastic(
    sys: EnergySpectrum,
    battery: EnergySpectrum,
    beta: float,
    seed: int,
    num_mixes: int,
) -> ThermalChannel:
    """Seeded random valid channel: a composition of partial beta-swaps.

    Each swap mixes two joint levels a, b (g_a >= g_b) with the 2x2
    Gibbs-preserving stochastic block [[1 - lam*g_b/g_a, lam],
    [lam*g_b/g_a, 1 - lam]], so the composition is stochastic and
    Gibbs-preserving by construction.
    """
    if num_mixes < 0:
        raise ValueError("num_mixes must be >= 0")
    rng = np.random.default_rng(seed)
    g = gibbs_weights(joint_spectrum(sys, battery), beta)
    dim = len(g)
    m = np.eye(dim)
    for _ in range(num_mixes):
        a, b = rng.choice(dim, size=2, replace=False)
        if g[a] < g[b]:
            a, b = b, a
        lam = float(rng.uniform())
        ratio = g[b] / g[a]
        row_a = m[a].copy()
        row_b = m[b].copy()
        m[a] = (1.0 - lam * ratio) * row_a + lam * row_b
        m[b] = lam * ratio * row_a + (1.0 - lam) * row_b
    return ThermalChannel(m, sys, sys, battery, beta)


@dataclass(frozen=True)
class WitSubchannels:
    """The four substochastic system-space blocks of a two-level-battery channel.

    r01 maps battery 0 -> 1 and so on; together they satisfy trace
    preservation columnwise and the Gibbs pair conditions
    r00 g + e^{-beta delta} r10 g = g,
    r01 g + e^{-beta delta} r11 g = e^{-beta delta} g,
    with g the unnormalized system Gibbs weights.
    """

    r00: np.ndarray
    r01: np.ndarray
    r10: np.ndarray
    r11: np.ndarray
    delta: float
    beta: float
    system: EnergySpectrum

    def __post_init__(self):
        d = len(self.system)
        for name in ("r00", "r01", "r10", "r11"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (d, d):
                raise DimensionMismatch(f"{name} has shape {m.shape}, expected ({d}, {d})")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.delta < 0:
            raise ValueError("wit gap must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.system)

    def gibbs_vector(self) -> np.ndarray:
        return gibbs_weights(self.system, self.beta)

    def residuals(self) -> tuple[float, float]:
        """(max stochasticity residual, max Gibbs pair residual)."""
        g = self.gibbs_vector()
        e = np.exp(-self.beta * self.delta)
        stoch = max(
            float(np.max(np.abs((self.r00 + self.r01).sum(axis=0) - 1.0))),
            float(np.max(np.abs((self.r10 + self.r11).sum(axis=0) - 1.0))),
        )
        pair0 = self.r00 @ g + e * (self.r10 @ g) - g
        pair1 = self.r01 @ g + e * (self.r11 @ g) - e * g
        gibbs = float(max(np.max(np.abs(pair0 / g)), np.max(np.abs(pair1 / g))))
        return stoch, gibbs

    def check(self, stoch_tol: float = STOCHASTIC_TOL, gibbs_tol: float = GIBBS_TOL) -> None:
        mins = min(m.min() for m in (self.r00, self.r01, self.r10, self.r11))
        if mins < -1e-15:
            raise InvalidSubchannels(f"negative subchannel entry {mins}")
        stoch, gibbs = self.residuals()
        if stoch > stoch_tol:
            raise InvalidSubchannels(f"stochasticity residual {stoch}")
        if gibbs > gibbs_tol:
            raise InvalidSubchannels(f"Gibbs pair residual {gibbs}")

    @classmethod
    def from_channel(cls, channel: ThermalChannel) -> "WitSubchannels":
        if channel.n_battery != 2:
            raise DimensionMismatch("wit subchannels need a two-level battery")
        if channel.sys_in != channel.sys_out:
            raise SpectrumMismatch("wit subchannels assume a fixed system spectrum")
        delta = channel.battery.levels[1] - channel.battery.levels[0]
        return cls(
            r00=extract_subchannels(channel, 0, 0),
            r01=extract_subchannels(channel, 0, 1),
            r10=extract_subchannels(channel, 1, 0),
            r11=extract_subchannels(channel, 1, 1),
            delta=delta,
            beta=channel.beta,
            system=channel.sys_in,
        )

    def as_channel(self) -> ThermalChannel:
        """Assemble the 2-level-battery channel with these blocks."""
        d = self.dim
        r4 = np.zeros((d, 2, d, 2))
        r4[:, 0, :, 0] = self.r00
        r4[:, 1, :, 0] = self.r01
        r4[:, 0, :, 1] = self.r10
        r4[:, 1, :, 1] = self.r11
        return ThermalChannel(
            r4.reshape(2 * d, 2 * d),
            self.system,
            self.system,
            EnergySpectrum.wit(self.delta),
            self.beta,
        )
