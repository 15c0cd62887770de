"""Brute-force grid verification of the worst-case error-gap bounds.

Channels are enumerated over an exact probability-simplex grid (integer
compositions, so every vertex is covered) and the biased-choice
probabilities over their deviation bands with endpoints always
included.  Error rates at each grid point come from first principles
through :mod:`bb84_weakrand.quantum_core`; because both the channel
mixture and the Bell projections are linear, the rates for the whole
simplex follow exactly from the four one-operator channels, which keeps
the scan fast without approximating anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .keyrate import DeviationParams, one_step_delta, phase_gap_bound
from .quantum_core import (
    PauliChannel,
    apply_channel,
    build_source_state,
    error_rates,
)

VIOLATION_TOL = 1e-9

_PURE_CHANNELS = (
    PauliChannel(1.0, 0.0, 0.0, 0.0),
    PauliChannel(0.0, 1.0, 0.0, 0.0),
    PauliChannel(0.0, 0.0, 1.0, 0.0),
    PauliChannel(0.0, 0.0, 0.0, 1.0),
)


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one grid scan against a closed-form bound.

    ``max_violation`` is the scanned maximum minus the bound (positive
    means the bound failed); ``tightness_gap`` is its negation, i.e. how
    far below the bound the scan stayed.  ``max_gap_location`` holds the
    grid point achieving the extreme.
    """

    target: str
    bound: float
    max_difference: float
    max_violation: float
    tightness_gap: float
    max_gap_location: dict
    points_checked: int
    grid_resolution: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= VIOLATION_TOL

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "bound": self.bound,
            "max_difference": self.max_difference,
            "max_violation": self.max_violation,
            "tightness_gap": self.tightness_gap,
            "max_gap_location": dict(self.max_gap_location),
            "points_checked": self.points_checked,
            "grid_resolution": self.grid_resolution,
            "passed": self.passed,
        }


def simplex_grid(resolution: int) -> np.ndarray:
    """All channel probability vectors with denominator ``resolution``.

    Rows are (q00, q01, q10, q11) built from integer compositions, so
    the simplex vertices are always present exactly.
    """
    if resolution < 1:
        raise ValidationError("simplex grid resolution must be positive")
    rows = []
    for a in range(resolution + 1):
        for b in range(resolution + 1 - a):
            for c in range(resolution + 1 - a - b):
                rows.append((a, b, c, resolution - a - b - c))
    return np.array(rows, dtype=float) / float(resolution)


def deviation_band(eps: float, resolution: int) -> np.ndarray:
    """Grid over [1/2 - eps, 1/2 + eps] with both endpoints included."""
    return np.linspace(0.5 - eps, 0.5 + eps, resolution)


def _pure_rates(p_bit0: float, p_basis0: float) -> np.ndarray:
    """(e_bit, e_phase) per one-operator channel, rows ordered I, Z, X, XZ."""
    source = build_source_state(p_bit0)
    rows = []
    for channel in _PURE_CHANNELS:
        pair = error_rates(apply_channel(source, channel, p_basis0))
        rows.append((pair.e_bit, pair.e_phase))
    return np.array(rows)


def evaluate_one_step_point(
    channel: PauliChannel, p_bit0: float, p_basis0: float
) -> float:
    """e_phase - e_bit of the channel output state, built directly."""
    pair = error_rates(apply_channel(build_source_state(p_bit0), channel, p_basis0))
    return pair.e_phase - pair.e_bit


def verify_one_step_bound(dev: DeviationParams, grid_res: int) -> OracleReport:
    """Scan the phase-over-bit error excess against its closed-form bound.

    Enumerates every simplex channel against every banded pair of choice
    probabilities and records the largest e_phase - e_bit found.
    """
    if grid_res < 3:
        raise ValidationError("grid_res must be at least 3")
    bound = one_step_delta(dev)
    channels = simplex_grid(grid_res)
    bit_band = deviation_band(dev.eps0, grid_res)
    basis_band = deviation_band(dev.eps1, grid_res)

    best = -np.inf
    location: dict = {}
    for p_bit0 in bit_band:
        for p_basis0 in basis_band:
            rates = _pure_rates(p_bit0, p_basis0)
            gaps = channels @ (rates[:, 1] - rates[:, 0])
            idx = int(np.argmax(gaps))
            if gaps[idx] > best:
                best = float(gaps[idx])
                q = channels[idx]
                location = {
                    "q00": float(q[0]),
                    "q01": float(q[1]),
                    "q10": float(q[2]),
                    "q11": float(q[3]),
                    "p_bit0": float(p_bit0),
                    "p_basis0": float(p_basis0),
                    "difference": best,
                }
    return OracleReport(
        target="one-step",
        bound=bound,
        max_difference=best,
        max_violation=best - bound,
        tightness_gap=bound - best,
        max_gap_location=location,
        points_checked=len(channels) * len(bit_band) * len(basis_band),
        grid_resolution=grid_res,
    )


def _cross_basis_pure(p_bit0: float) -> tuple[np.ndarray, np.ndarray]:
    """Signed cross-basis gaps per one-operator channel.

    Returns (rec-phase minus dia-bit, dia-phase minus rec-bit), each a
    length-4 array over the channels I, Z, X, XZ.
    """
    source = build_source_state(p_bit0)
    rec_vs_dia = []
    dia_vs_rec = []
    for channel in _PURE_CHANNELS:
        in_rec = error_rates(apply_channel(source, channel, 1.0))
        in_dia = error_rates(apply_channel(source, channel, 0.0))
        rec_vs_dia.append(in_rec.e_phase - in_dia.e_bit)
        dia_vs_rec.append(in_dia.e_phase - in_rec.e_bit)
    return np.array(rec_vs_dia), np.array(dia_vs_rec)


def evaluate_cross_basis_point(
    channel: PauliChannel, p_bit0: float
) -> tuple[float, float]:
    """Signed cross-basis gaps of one channel, built directly per basis."""
    source = build_source_state(p_bit0)
    in_rec = error_rates(apply_channel(source, channel, 1.0))
    in_dia = error_rates(apply_channel(source, channel, 0.0))
    return (in_rec.e_phase - in_dia.e_bit, in_dia.e_phase - in_rec.e_bit)


def verify_cross_basis_bound(eps0: float, grid_res: int) -> OracleReport:
    """Scan both cross-basis phase/bit gaps against the bit-bias bound.

    For each banded encoding probability the basis-conditional states
    are built per channel operator; the checked quantities are the
    absolute differences between the phase error in one basis and the
    bit error in the other.
    """
    if grid_res < 3:
        raise ValidationError("grid_res must be at least 3")
    bound = phase_gap_bound(eps0)
    channels = simplex_grid(grid_res)
    bit_band = deviation_band(eps0, grid_res)

    best = -np.inf
    location: dict = {}
    for p_bit0 in bit_band:
        rec_vs_dia, dia_vs_rec = _cross_basis_pure(p_bit0)
        for family, pure in (
            ("rec_phase_vs_dia_bit", rec_vs_dia),
            ("dia_phase_vs_rec_bit", dia_vs_rec),
        ):
            gaps = np.abs(channels @ pure)
            idx = int(np.argmax(gaps))
            if gaps[idx] > best:
                best = float(gaps[idx])
                q = channels[idx]
                location = {
                    "q00": float(q[0]),
                    "q01": float(q[1]),
                    "q10": float(q[2]),
                    "q11": float(q[3]),
                    "p_bit0": float(p_bit0),
                    "family": family,
                    "difference": best,
                }
    return OracleReport(
        target="cross-basis",
        bound=bound,
        max_difference=best,
        max_violation=best - bound,
        tightness_gap=bound - best,
        max_gap_location=location,
        points_checked=len(channels) * len(bit_band),
        grid_resolution=grid_res,
    )
