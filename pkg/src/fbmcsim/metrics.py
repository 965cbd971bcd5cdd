"""PAPR, CCDF, BER and PSD measurements.

PAPR is measured per period-long interval against the steady-state average
power.  The closed-form exceedance model treats each interval as N
independent complex-Gaussian samples whose normalized power is unit-rate
exponential, giving P(PAPR <= g) = (1 - exp(-a*g))^N with a = alpha_t *
mean_power; companded variants swap in their piecewise distribution (an
approximation, kept for curve overlays).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal as _signal

from . import compander as _comp
from . import modem as _modem
from .channel import AwgnSpec, transmit
from .compander import CompanderKind, CompanderSpec
from .modem import Constellation, FbmcFrame
from .prototype import PrototypeFilter, build_phydyas

__all__ = [
    "CcdfKind",
    "CcdfCurve",
    "BerPoint",
    "PsdEstimate",
    "papr_per_interval",
    "papr_ofdm",
    "ccdf_empirical",
    "ccdf_theoretical",
    "steady_state_alpha_t",
    "ccdf_crossing_db",
    "BerRunConfig",
    "ber_run",
    "psd_welch",
    "oob_floor_db",
]


class CcdfKind(str, enum.Enum):
    EMPIRICAL = "empirical"
    THEORETICAL_CONVENTIONAL = "theoretical_conventional"
    THEORETICAL_UNIFORM = "theoretical_uniform"
    THEORETICAL_LINEAR = "theoretical_linear"


@dataclass(frozen=True)
class CcdfCurve:
    gamma_db: np.ndarray = field(repr=False)
    prob_exceed: np.ndarray = field(repr=False)
    kind: CcdfKind = CcdfKind.EMPIRICAL

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma_db, dtype=float)
        p = np.asarray(self.prob_exceed, dtype=float)
        if g.ndim != 1 or g.shape != p.shape:
            raise ValueError("gamma_db and prob_exceed must be matching 1-D arrays")
        if np.any(np.diff(g) <= 0):
            raise ValueError("gamma_db must be strictly ascending")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.diff(p) > 1e-12):
            raise ValueError("prob_exceed must be nonincreasing")
        object.__setattr__(self, "gamma_db", g)
        object.__setattr__(self, "prob_exceed", p)


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bits: int
    errors: int
    target_met: bool = True

    def __post_init__(self) -> None:
        if self.errors > self.bits:
            raise ValueError("errors cannot exceed bits")

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else 0.0


@dataclass(frozen=True)
class PsdEstimate:
    freq_norm: np.ndarray = field(repr=False)
    psd_db: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        f = np.asarray(self.freq_norm, dtype=float)
        p = np.asarray(self.psd_db, dtype=float)
        if f.shape != p.shape:
            raise ValueError("freq_norm and psd_db must match")
        if abs(p.max()) > 1e-9:
            raise ValueError("psd_db must be normalized to a 0 dB peak")
        object.__setattr__(self, "freq_norm", f)
        object.__setattr__(self, "psd_db", p)


# ---------------------------------------------------------------------------
# PAPR
# ---------------------------------------------------------------------------

def papr_per_interval(frame: FbmcFrame) -> np.ndarray:
    """Per-interval PAPR in dB over period-long windows.

    Every interval [i*N, (i+1)*N) is normalized by the one global
    steady-state average power, so filter ramp intervals report genuinely
    lower ratios.  The trailing half-period remainder counts as the final
    interval.
    """
    n = frame.samples_per_period
    if len(frame) < n:
        raise ValueError("frame shorter than one interval")
    p_avg = float(np.mean(np.abs(frame.steady_samples()) ** 2))
    if p_avg == 0.0:
        raise ValueError("zero-power frame")
    count = math.ceil(len(frame) / n)
    out = np.empty(count)
    power = np.abs(frame.samples) ** 2
    for i in range(count):
        out[i] = np.max(power[i * n : (i + 1) * n]) / p_avg
    return 10.0 * np.log10(out)


def steady_interval_slice(frame: FbmcFrame) -> slice:
    """Indices of :func:`papr_per_interval` fully inside the steady-state region."""
    first = (frame.overlap_factor + 1) // 2
    stop = frame.blocks + (frame.overlap_factor - 1) // 2
    return slice(first, stop)


def papr_ofdm(symbol_samples: np.ndarray, n: int) -> np.ndarray:
    """Per-symbol PAPR (dB) of concatenated length-``n`` OFDM symbols."""
    samples = np.asarray(symbol_samples)
    if samples.size == 0 or samples.size % n:
        raise ValueError("sample count must be a positive multiple of n")
    power = np.abs(samples.reshape(-1, n)) ** 2
    p_avg = float(power.mean())
    if p_avg == 0.0:
        raise ValueError("zero average power")
    return 10.0 * np.log10(power.max(axis=1) / p_avg)


# ---------------------------------------------------------------------------
# CCDF
# ---------------------------------------------------------------------------

def ccdf_empirical(paprs_db: np.ndarray, grid: np.ndarray) -> CcdfCurve:
    """Fraction of observed PAPRs strictly above each grid threshold."""
    paprs = np.asarray(paprs_db, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if paprs.size == 0 or grid.size == 0:
        raise ValueError("empty input")
    sorted_paprs = np.sort(paprs)
    exceed = paprs.size - np.searchsorted(sorted_paprs, grid, side="right")
    return CcdfCurve(grid, exceed / paprs.size, CcdfKind.EMPIRICAL)


def steady_state_alpha_t(filt: PrototypeFilter, subcarriers: int) -> float:
    """Exponential rate 2 / (K * sum_m h^2) of the un-normalized power."""
    n = filt.samples_per_period
    overlap_energy = float(np.sum(filt.taps**2)) / (n // 2)  # steady-state sum_m h^2
    return 2.0 / (subcarriers * overlap_energy)


def _per_sample_cdf(
    kind: CcdfKind, z: np.ndarray, spec: CompanderSpec | None
) -> np.ndarray:
    """P(normalized instantaneous power <= z) for one sample."""
    if kind is CcdfKind.THEORETICAL_CONVENTIONAL:
        return 1.0 - np.exp(-z)
    if spec is None:
        raise ValueError("companded theoretical curves need a CompanderSpec")
    sigma = spec.require_sigma()
    mean_power = 2.0 * sigma**2
    z_knee = (spec.c * sigma) ** 2 / mean_power
    if kind is CcdfKind.THEORETICAL_UNIFORM:
        beta = 4.0 * spec.c * sigma * math.exp(-spec.c**2)
        z_cap = spec.uniform_cap() ** 2 / mean_power
    elif kind is CcdfKind.THEORETICAL_LINEAR:
        k1 = spec.linear_slope()
        beta = None
        z_cap = spec.linear_cap() ** 2 / mean_power
    else:
        raise ValueError(f"not a theoretical kind: {kind}")
    out = np.empty_like(z)
    low = z <= z_knee
    out[low] = 1.0 - np.exp(-z[low])
    high = ~low
    if kind is CcdfKind.THEORETICAL_UNIFORM:
        out[high] = beta * z[high]
    else:
        f0 = (2.0 * spec.c / sigma) * math.exp(-spec.c**2)
        # upper-branch distribution of the shaped amplitude, in power units
        y = np.sqrt(z[high] * mean_power)
        u = np.clip(y, spec.c * sigma, spec.linear_cap()) - spec.c * sigma
        out[high] = (1.0 - math.exp(-spec.c**2)) + f0 * u + 0.5 * k1 * u**2
    out[z >= z_cap] = 1.0
    return np.clip(out, 0.0, 1.0)


def ccdf_theoretical(
    kind: CcdfKind,
    grid_db: np.ndarray,
    *,
    alpha_t: float,
    mean_power: float,
    n_samples: int,
    spec: CompanderSpec | None = None,
) -> CcdfCurve:
    """Closed-form exceedance curve on a dB grid.

    ``alpha_t`` is the steady-state rate of the un-normalized power (see
    :func:`steady_state_alpha_t`), ``mean_power`` the steady-state average
    power the empirical PAPR is normalized by, and ``n_samples`` the number
    of per-interval samples in the independence product.
    """
    if alpha_t <= 0 or mean_power <= 0 or n_samples < 1:
        raise ValueError("alpha_t, mean_power must be positive and n_samples >= 1")
    grid_db = np.asarray(grid_db, dtype=float)
    z = 10.0 ** (grid_db / 10.0) * (alpha_t * mean_power)
    cdf = _per_sample_cdf(kind, z, spec)
    prob = 1.0 - cdf**n_samples
    prob = np.minimum.accumulate(np.clip(prob, 0.0, 1.0))
    return CcdfCurve(grid_db, prob, kind)


def ccdf_crossing_db(curve: CcdfCurve, prob: float) -> float:
    """Threshold (dB) where the curve crosses ``prob``, log-interpolated."""
    p = curve.prob_exceed
    logp = np.log10(np.maximum(p, 1e-300))
    above = np.nonzero(p >= prob)[0]
    if above.size == 0 or above[-1] + 1 >= p.size:
        raise ValueError(f"curve never crosses probability {prob}")
    i = above[-1]
    g0, g1 = curve.gamma_db[i], curve.gamma_db[i + 1]
    l0, l1 = logp[i], logp[i + 1]
    t = (math.log10(prob) - l0) / (l1 - l0) if l1 != l0 else 0.0
    return float(g0 + t * (g1 - g0))


# ---------------------------------------------------------------------------
# BER
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BerRunConfig:
    """One BER measurement: full transmit/receive chain at a single SNR.

    ``min_errors`` should stay >= 100 for stable estimates near the 1e-3
    floor.  ``rx_expand_cap`` is the receiver's reconstruction bound in
    sigma units: noise-saturated samples cannot be inverted, so the
    receiver clamps them near the saturation knee instead of launching them
    toward the scalar expander's full dynamic range.  ``expander=False``
    skips receiver de-companding entirely (sign decisions survive the
    compressive transforms).
    """

    scheme: CompanderSpec
    snr_db: float
    min_errors: int = 100
    max_bits: int = 1_000_000
    seed: int = 0
    subcarriers: int = 64
    blocks: int = 16
    constellation: Constellation = Constellation.QPSK
    overlap_factor: int = 4
    expander: bool = True
    rx_expand_cap: float = 2.5


def ber_run(config: BerRunConfig, filt: PrototypeFilter | None = None) -> BerPoint:
    """Count bit errors through bits -> OQAM -> synth -> compand -> AWGN ->
    expand -> analyze -> demap, stopping at ``min_errors`` or ``max_bits``."""
    if filt is None:
        filt = build_phydyas(config.overlap_factor, config.subcarriers)
    bps = _modem.bits_per_symbol(config.constellation)
    bits_per_frame = config.subcarriers * config.blocks * bps
    errors = 0
    bits_sent = 0
    frame_idx = 0
    while errors < config.min_errors and bits_sent < config.max_bits:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, frame_idx]))
        bits = rng.integers(0, 2, size=(config.subcarriers, config.blocks, bps))
        block = _modem.QamSymbolBlock(
            config.subcarriers, config.blocks, _modem.map_bits(bits, config.constellation)
        )
        frame = _modem.synthesize(_modem.oqam_stagger(block), filt)
        spec = _comp.resolve_spec(config.scheme, frame)
        tx = _comp.apply_to_frame(frame, spec)
        noise_seed = np.random.SeedSequence([config.seed, frame_idx, 1]).generate_state(1)[0]
        rx = transmit(tx, AwgnSpec(config.snr_db, int(noise_seed)))
        if config.expander and spec.kind is not CompanderKind.IDENTITY:
            rx_spec = replace(spec, expand_cap=config.rx_expand_cap)
            rx = _comp.expand_frame(rx, rx_spec, clamp=True)
        decided = _modem.oqam_destagger(_modem.analyze(rx, filt))
        hard = _modem.demap_symbols(decided.values, config.constellation)
        errors += int(np.sum(hard != bits))
        bits_sent += bits_per_frame
        frame_idx += 1
    return BerPoint(config.snr_db, bits_sent, errors, target_met=errors >= config.min_errors)


# ---------------------------------------------------------------------------
# PSD
# ---------------------------------------------------------------------------

def psd_welch(samples: np.ndarray, segment: int, overlap_fraction: float) -> PsdEstimate:
    """Hann-windowed averaged periodogram normalized to a 0 dB peak."""
    samples = np.asarray(samples, dtype=complex)
    if segment < 2 or segment & (segment - 1):
        raise ValueError("segment must be a power of two >= 2")
    if segment > samples.size:
        raise ValueError("segment longer than the sample sequence")
    if not 0.0 <= overlap_fraction <= 0.9:
        raise ValueError("overlap_fraction must be within [0, 0.9]")
    freq, psd = _signal.welch(
        samples,
        window="hann",
        nperseg=segment,
        noverlap=int(segment * overlap_fraction),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freq = np.fft.fftshift(freq)
    psd = np.fft.fftshift(psd)
    return PsdEstimate(freq, 10.0 * np.log10(psd / psd.max()))


def oob_floor_db(estimate: PsdEstimate, band: tuple[float, float]) -> float:
    """Median PSD level over a normalized frequency band (guard bands excluded
    by the caller's band choice)."""
    lo, hi = band
    mask = (estimate.freq_norm >= lo) & (estimate.freq_norm <= hi)
    if not np.any(mask):
        raise ValueError("band selects no bins")
    return float(np.median(estimate.psd_db[mask]))
