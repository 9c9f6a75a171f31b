"""Text formats: flat key-value configs, state/spectrum literals, channel files.

All floats are written with 17 significant digits so that every file
round-trips bit-exactly through repr/parse.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np

from .channels import ThermalChannel, WitSubchannels
from .errors import DimensionMismatch, DomainError
from .spectra import DiagonalState, EnergySpectrum

FLOAT_FMT = "%.17g"


def fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def parse_flat_config(text: str) -> dict[str, Any]:
    """Parse `key = value` lines; values are JSON fragments or bare strings."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno} is not `key = value`: {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise DomainError(f"config line {lineno} has an empty key")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def load_flat_config(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_flat_config(fh.read())


def state_from_config(cfg: dict[str, Any], default_beta: float = 1.0) -> tuple[DiagonalState, float]:
    """Build a state from keys levels/probs or delta/num_levels (+ optional beta).

    A ladder given by delta/num_levels without probs defaults to the Gibbs
    state at the config's beta.
    """
    beta = float(cfg.get("beta", default_beta))
    if "levels" in cfg:
        spectrum = EnergySpectrum(tuple(float(x) for x in cfg["levels"]))
    elif "delta" in cfg and "num_levels" in cfg:
        num_levels = int(cfg["num_levels"])
        spectrum = EnergySpectrum.oscillator(num_levels - 1, float(cfg["delta"]))
    else:
        raise DomainError("state config needs `levels` or `delta` + `num_levels`")
    if "probs" in cfg:
        probs = np.asarray([float(x) for x in cfg["probs"]])
    else:
        from .spectra import gibbs_state

        return gibbs_state(spectrum, beta), beta
    if len(probs) != len(spectrum):
        raise DimensionMismatch("probs length does not match the spectrum")
    return DiagonalState(probs=probs, spectrum=spectrum), beta


def load_state(path: str, default_beta: float = 1.0) -> tuple[DiagonalState, float]:
    return state_from_config(load_flat_config(path), default_beta)


def channel_to_text(channel: ThermalChannel) -> str:
    """Header `d_sys_in d_sys_out n_battery beta`, three spectra lines, matrix rows."""
    lines = [
        f"{channel.d_in} {channel.d_out} {channel.n_battery} {fmt(channel.beta)}",
        " ".join(fmt(x) for x in channel.sys_in.levels),
        " ".join(fmt(x) for x in channel.sys_out.levels),
        " ".join(fmt(x) for x in channel.battery.levels),
    ]
    lines += [" ".join(fmt(x) for x in row) for row in channel.matrix]
    return "\n".join(lines) + "\n"


def channel_from_text(text: str) -> ThermalChannel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 4:
        raise DomainError("channel header must be `d_sys_in d_sys_out n_battery beta`")
    d_in, d_out, nb = int(head[0]), int(head[1]), int(head[2])
    beta = float(head[3])
    sys_in = EnergySpectrum(tuple(float(x) for x in lines[1].split()), "sys_in")
    sys_out = EnergySpectrum(tuple(float(x) for x in lines[2].split()), "sys_out")
    battery = EnergySpectrum(tuple(float(x) for x in lines[3].split()), "battery")
    if len(sys_in) != d_in or len(sys_out) != d_out or len(battery) != nb:
        raise DimensionMismatch("spectra lines disagree with the header dimensions")
    rows = [np.array([float(x) for x in ln.split()]) for ln in lines[4:]]
    matrix = np.vstack(rows)
    return ThermalChannel(matrix, sys_in, sys_out, battery, beta)


def write_channel(path: str, channel: ThermalChannel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(channel_to_text(channel))


def load_channel(path: str) -> ThermalChannel:
    with open(path, "r", encoding="utf-8") as fh:
        return channel_from_text(fh.read())


def subchannels_from_config(cfg: dict[str, Any]) -> WitSubchannels:
    """Keys: delta, beta, sys_levels, R00, R01, R10, R11 (nested JSON lists)."""
    needed = {"delta", "beta", "sys_levels", "R00", "R01", "R10", "R11"}
    missing = needed - cfg.keys()
    if missing:
        raise DomainError(f"subchannel config missing keys: {sorted(missing)}")
    system = EnergySpectrum(tuple(float(x) for x in cfg["sys_levels"]), "sys")
    return WitSubchannels(
        r00=np.asarray(cfg["R00"], dtype=float),
        r01=np.asarray(cfg["R01"], dtype=float),
        r10=np.asarray(cfg["R10"], dtype=float),
        r11=np.asarray(cfg["R11"], dtype=float),
        delta=float(cfg["delta"]),
        beta=float(cfg["beta"]),
        system=system,
    )


def load_subchannels(path: str) -> WitSubchannels:
    return subchannels_from_config(load_flat_config(path))


def csv_text(header: list[str], rows: list[list[Any]]) -> str:
    """Comma-separated text with 17-significant-digit floats, deterministic."""
    lines = [",".join(header)]
    for row in rows:
        cells = [fmt(c) if isinstance(c, float) else str(c) for c in row]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
