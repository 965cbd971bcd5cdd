"""PHYDYAS prototype filter construction and quality metrics.

The filter is the frequency-sampling design with overlap factor ``alpha``:
a handful of frequency-domain coefficients H_i determine a near-perfect
reconstruction pulse of length ``alpha`` symbol periods.  Taps are sampled
at mid-points of the sample grid, which keeps the impulse response exactly
even-symmetric and the half-period energy complementarity exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PHYDYAS_COEFFICIENTS",
    "PrototypeFilter",
    "build_phydyas",
    "nyquist_defect",
    "export_taps",
]

# Frequency-domain coefficients per overlap factor.  Each set satisfies the
# power-complementarity identity H_i^2 + H_{alpha-i}^2 = 1.
PHYDYAS_COEFFICIENTS: dict[int, dict[int, float]] = {
    2: {1: np.sqrt(2.0) / 2.0},
    3: {1: 0.91143783, 2: 0.41143783},
    4: {1: 0.971960, 2: np.sqrt(2.0) / 2.0, 3: 0.235147},
}

SYMMETRY_TOL = 1e-12
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class PrototypeFilter:
    """Sampled prototype impulse response shaping every subcarrier.

    Attributes
    ----------
    overlap_factor : int
        Filter length in symbol periods.
    samples_per_period : int
        Samples per symbol period; must be even and at least 2.
    taps : np.ndarray
        Real taps of length ``overlap_factor * samples_per_period``,
        even-symmetric and normalized to ``sum(taps**2) == samples_per_period``.
    """

    overlap_factor: int
    samples_per_period: int
    taps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.overlap_factor < 1:
            raise ValueError("overlap_factor must be a positive integer")
        if self.samples_per_period < 2 or self.samples_per_period % 2:
            raise ValueError("samples_per_period must be even and >= 2")
        taps = np.asarray(self.taps, dtype=float)
        expected = self.overlap_factor * self.samples_per_period
        if taps.shape != (expected,):
            raise ValueError(
                f"tap count {taps.shape} does not match "
                f"overlap_factor*samples_per_period = {expected}"
            )
        energy = float(np.sum(taps**2))
        if energy == 0.0:
            raise ValueError("zero-energy filter rejected")
        if abs(energy - self.samples_per_period) > NORMALIZATION_TOL * self.samples_per_period:
            raise ValueError("taps are not normalized to sum(taps^2) == samples_per_period")
        scale = float(np.max(np.abs(taps)))
        if np.max(np.abs(taps - taps[::-1])) > SYMMETRY_TOL * scale:
            raise ValueError("taps are not even-symmetric about the filter midpoint")
        taps = taps.copy()
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @property
    def num_taps(self) -> int:
        return self.taps.shape[0]


def build_phydyas(overlap_factor: int, samples_per_period: int) -> PrototypeFilter:
    """Build the PHYDYAS prototype for ``overlap_factor`` in {2, 3, 4}.

    The continuous pulse 1 + 2*sum_i (-1)^i H_i cos(2*pi*i*t/(alpha*T)) is
    sampled at mid-points t_n = (n + 1/2)/N - alpha/2 (units of T), then
    normalized to unit per-sample average energy.  Mid-point sampling makes
    the symmetry and half-period complementarity exact; see the repository
    notes for why an integer-aligned grid cannot provide both.
    """
    if overlap_factor not in PHYDYAS_COEFFICIENTS:
        raise ValueError(f"unsupported overlap factor {overlap_factor!r}; expected one of 2, 3, 4")
    if samples_per_period < 2 or samples_per_period % 2:
        raise ValueError("samples_per_period must be even and >= 2")

    length = overlap_factor * samples_per_period
    u = (np.arange(length) + 0.5) / length
    taps = np.ones(length)
    for i, coeff in PHYDYAS_COEFFICIENTS[overlap_factor].items():
        taps += 2.0 * (-1.0) ** i * coeff * np.cos(2.0 * np.pi * i * u)
    taps *= np.sqrt(samples_per_period / np.sum(taps**2))
    return PrototypeFilter(overlap_factor, samples_per_period, taps)


def nyquist_defect(filt: PrototypeFilter) -> float:
    """Worst-case deviation of the half-period energy partition.

    For each offset n in [0, N/2) the sums sum_m taps[n + m*N/2]^2 should be
    one constant; returns max |sum - mean| / mean.  Zero means the filter
    partitions energy perfectly across half-period shifts (no intersymbol
    energy ripple).
    """
    half = filt.samples_per_period // 2
    per_offset = (filt.taps**2).reshape(-1, half).sum(axis=0)
    mean = float(per_offset.mean())
    if mean == 0.0:
        raise ValueError("zero-energy filter has no defined defect")
    return float(np.max(np.abs(per_offset - mean)) / mean)


def export_taps(filt: PrototypeFilter, path) -> None:
    """Write taps as ``index,tap_value`` CSV rows at full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "tap_value"])
        for i, tap in enumerate(filt.taps):
            writer.writerow([i, repr(float(tap))])
