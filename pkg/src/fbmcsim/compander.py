"""Amplitude companding transforms and their exact inverses.

Three transforms act on sample magnitudes and keep phases untouched:

- ``mulaw``: classic logarithmic compression toward a peak level,
- ``uniform``: reshapes the magnitude density above an inflection point
  c*sigma into a flat density on [c*sigma, A], A = (c + 1/(2c))*sigma,
- ``linear``: reshapes it into a sloped density on [c*sigma, A_c] whose
  slope k1 is fixed by total-probability normalization.

The shaping transforms are CDF compositions h(x) = T^{-1}(F(x)) built on the
magnitude model F(x) = 1 - exp(-x^2/sigma^2).  Matching upper tails instead
of CDFs gives closed forms that stay accurate far into the tail:

    uniform: h(x)  = A - (sigma/(2c)) * exp(c^2 - x^2/sigma^2)
    linear:  h(x)  = c*sigma + 2*d / (f0 + sqrt(f0^2 + 2*k1*d)),
             d     = exp(-c^2) - exp(-x^2/sigma^2),
             f0    = (2c/sigma) * exp(-c^2),
             k1    = 2*exp(-c^2) * (1 - 2c*(A_c - c*sigma)/sigma) / (A_c - c*sigma)^2

both reducing to the identity below c*sigma (the linear form degenerates to
the uniform one at k1 = 0, i.e. when A_c equals the uniform cutoff).  The
derivations live in docs/companding_math.md.

Expansion inverts the tail match.  Near the cutoff the forward map is flat,
so inputs beyond roughly 4*sigma are unrecoverable in double precision; the
expander therefore caps the reconstructed magnitude at a configured
dynamic-range limit (``expand_cap``, in sigma units).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .modem import FbmcFrame

__all__ = [
    "CompanderKind",
    "CompanderSpec",
    "BussgangReport",
    "estimate_sigma",
    "compand_uniform",
    "expand_uniform",
    "compand_linear",
    "expand_linear",
    "compand_mulaw",
    "expand_mulaw",
    "resolve_spec",
    "apply_to_frame",
    "expand_frame",
    "bussgang_report",
]

DEFAULT_EXPAND_CAP = 8.0  # sigma units


class CompanderKind(str, enum.Enum):
    IDENTITY = "identity"
    MULAW = "mulaw"
    UNIFORM = "uniform"
    LINEAR = "linear"


@dataclass(frozen=True)
class CompanderSpec:
    """Parameters of one amplitude transform.

    ``c`` and ``cutoff`` are expressed in units of ``sigma`` (so a spec can
    be validated before the signal scale is known); ``cutoff`` is the linear
    scheme's cap A_c / sigma.  ``sigma`` is the per-component standard
    deviation of the complex signal; ``None`` means "estimate from the frame
    at application time".  ``peak`` plays the same role for the mu-law
    scheme (``None``: use the frame's max magnitude).  ``expand_cap`` bounds
    the expander output, in sigma units.
    """

    kind: CompanderKind
    mu: float = 8.0
    c: float = 1.0
    cutoff: float = 1.25
    sigma: float | None = None
    peak: float | None = None
    expand_cap: float = DEFAULT_EXPAND_CAP

    def __post_init__(self) -> None:
        if self.kind is CompanderKind.MULAW and self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.kind in (CompanderKind.UNIFORM, CompanderKind.LINEAR):
            if self.c <= 0:
                raise ValueError("c must be positive")
        if self.kind is CompanderKind.LINEAR:
            if self.cutoff <= self.c:
                raise ValueError(
                    f"cutoff {self.cutoff} must exceed c {self.c} (cutoff is in sigma units)"
                )
            if self.cutoff > self.c + 1.0 / self.c:
                raise ValueError(
                    "cutoff beyond c + 1/c makes the target density negative at the cap"
                )
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.peak is not None and self.peak <= 0:
            raise ValueError("peak must be positive")
        if self.expand_cap <= 0:
            raise ValueError("expand_cap must be positive")

    # -- defaults used by the experiment harness -------------------------
    @staticmethod
    def identity() -> "CompanderSpec":
        return CompanderSpec(CompanderKind.IDENTITY)

    @staticmethod
    def mulaw(mu: float = 8.0, peak: float | None = None) -> "CompanderSpec":
        return CompanderSpec(CompanderKind.MULAW, mu=mu, peak=peak)

    @staticmethod
    def uniform(c: float = 1.8, sigma: float | None = None) -> "CompanderSpec":
        return CompanderSpec(CompanderKind.UNIFORM, c=c, sigma=sigma)

    @staticmethod
    def linear(
        c: float = 1.0, cutoff: float = 1.25, sigma: float | None = None
    ) -> "CompanderSpec":
        return CompanderSpec(CompanderKind.LINEAR, c=c, cutoff=cutoff, sigma=sigma)

    # -- derived shaping constants ---------------------------------------
    def require_sigma(self) -> float:
        if self.sigma is None:
            raise ValueError("sigma is unresolved; call resolve_spec against a frame first")
        return self.sigma

    def uniform_cap(self) -> float:
        """Maximum output magnitude A = (c + 1/(2c)) * sigma."""
        return (self.c + 0.5 / self.c) * self.require_sigma()

    def linear_cap(self) -> float:
        """Maximum output magnitude A_c = cutoff * sigma."""
        return self.cutoff * self.require_sigma()

    def linear_slope(self) -> float:
        """Target-density slope k1 fixed by unit total probability."""
        sigma = self.require_sigma()
        w = self.linear_cap() - self.c * sigma
        return 2.0 * math.exp(-self.c**2) * (1.0 - 2.0 * self.c * w / sigma) / w**2


@dataclass(frozen=True)
class BussgangReport:
    """Linearized view of a memoryless transform: y = alpha*x + distortion."""

    alpha: float
    distortion_power: float
    signal_power: float
    transform_gain_db: float


def estimate_sigma(samples: np.ndarray) -> float:
    """Per-component standard deviation sqrt(mean(|s|^2) / 2)."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("cannot estimate sigma from an empty sequence")
    return float(np.sqrt(np.mean(np.abs(samples) ** 2) / 2.0))


# ---------------------------------------------------------------------------
# scalar transforms (accept scalars or arrays, odd extension via sign)
# ---------------------------------------------------------------------------

def _tail(x: np.ndarray, sigma: float) -> np.ndarray:
    """Upper-tail probability of the magnitude model, exp(-x^2/sigma^2)."""
    return np.exp(-((x / sigma) ** 2))


def compand_uniform(x, spec: CompanderSpec):
    """Uniform-pdf compressor: identity below c*sigma, tail flattened to [c*sigma, A]."""
    if spec.kind is not CompanderKind.UNIFORM:
        raise ValueError("spec.kind must be UNIFORM")
    sigma = spec.require_sigma()
    x = np.asarray(x, dtype=float)
    mag = np.abs(x)
    cap = spec.uniform_cap()
    shaped = cap - (sigma / (2.0 * spec.c)) * np.exp(spec.c**2) * _tail(mag, sigma)
    out = np.sign(x) * np.where(mag <= spec.c * sigma, mag, shaped)
    return out if out.ndim else float(out)


def expand_uniform(y, spec: CompanderSpec, clamp: bool = False):
    """Inverse of :func:`compand_uniform` on its range.

    Magnitudes above the cap A signal corrupted input and raise unless
    ``clamp`` is set (receiver mode), in which case they clamp to A.  Output
    magnitude is bounded by ``spec.expand_cap * sigma``.
    """
    if spec.kind is not CompanderKind.UNIFORM:
        raise ValueError("spec.kind must be UNIFORM")
    sigma = spec.require_sigma()
    y = np.asarray(y, dtype=float)
    mag = np.abs(y)
    cap = spec.uniform_cap()
    if not clamp and np.any(mag > cap * (1.0 + 1e-9)):
        raise ValueError("input magnitude exceeds the compander cap; corrupted signal?")
    mag = np.minimum(mag, cap)
    tail = np.maximum(2.0 * spec.c * (cap - mag) / sigma * math.exp(-spec.c**2), 0.0)
    with np.errstate(divide="ignore"):
        arg = -np.log(tail)
    inverted = sigma * np.sqrt(np.maximum(arg, 0.0))
    out = np.where(mag <= spec.c * sigma, mag, np.minimum(inverted, spec.expand_cap * sigma))
    out = np.sign(y) * out
    return out if out.ndim else float(out)


def compand_linear(x, spec: CompanderSpec):
    """Linear-pdf compressor: identity below c*sigma, tail reshaped onto a slope."""
    if spec.kind is not CompanderKind.LINEAR:
        raise ValueError("spec.kind must be LINEAR")
    sigma = spec.require_sigma()
    x = np.asarray(x, dtype=float)
    mag = np.abs(x)
    c = spec.c
    f0 = (2.0 * c / sigma) * math.exp(-(c**2))
    k1 = spec.linear_slope()
    d = np.maximum(math.exp(-(c**2)) - _tail(mag, sigma), 0.0)
    # rationalized quadratic root; exact uniform limit at k1 == 0
    u = 2.0 * d / (f0 + np.sqrt(f0**2 + 2.0 * k1 * d))
    out = np.sign(x) * np.where(mag <= c * sigma, mag, c * sigma + u)
    return out if out.ndim else float(out)


def expand_linear(y, spec: CompanderSpec, clamp: bool = False):
    """Inverse of :func:`compand_linear`; see :func:`expand_uniform` for modes."""
    if spec.kind is not CompanderKind.LINEAR:
        raise ValueError("spec.kind must be LINEAR")
    sigma = spec.require_sigma()
    y = np.asarray(y, dtype=float)
    mag = np.abs(y)
    cap = spec.linear_cap()
    if not clamp and np.any(mag > cap * (1.0 + 1e-9)):
        raise ValueError("input magnitude exceeds the compander cap; corrupted signal?")
    c = spec.c
    f0 = (2.0 * c / sigma) * math.exp(-(c**2))
    k1 = spec.linear_slope()
    u = np.clip(mag, c * sigma, cap) - c * sigma
    tail = np.maximum(math.exp(-(c**2)) - (f0 * u + 0.5 * k1 * u**2), 0.0)
    with np.errstate(divide="ignore"):
        arg = -np.log(tail)
    inverted = sigma * np.sqrt(np.maximum(arg, 0.0))
    out = np.where(mag <= c * sigma, mag, np.minimum(inverted, spec.expand_cap * sigma))
    out = np.sign(y) * out
    return out if out.ndim else float(out)


def compand_mulaw(x, peak: float, mu: float):
    """Logarithmic compressor y = peak * sign(x) * ln(1 + mu|x|/peak) / ln(1 + mu)."""
    if peak <= 0 or mu <= 0:
        raise ValueError("peak and mu must be positive")
    x = np.asarray(x, dtype=float)
    out = peak * np.sign(x) * np.log1p(mu * np.abs(x) / peak) / math.log1p(mu)
    return out if out.ndim else float(out)


def expand_mulaw(y, peak: float, mu: float):
    """Exact inverse of :func:`compand_mulaw`."""
    if peak <= 0 or mu <= 0:
        raise ValueError("peak and mu must be positive")
    y = np.asarray(y, dtype=float)
    out = peak * np.sign(y) * np.expm1(np.abs(y) * math.log1p(mu) / peak) / mu
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# frame-level application
# ---------------------------------------------------------------------------

def resolve_spec(spec: CompanderSpec, frame: FbmcFrame) -> CompanderSpec:
    """Fill in sigma (steady-state estimate) and mu-law peak from a frame.

    The resolved spec is what a matched receiver must use to undo the
    transform; simulation chains share it between both ends.
    """
    if spec.kind in (CompanderKind.UNIFORM, CompanderKind.LINEAR) and spec.sigma is None:
        sigma = estimate_sigma(frame.steady_samples())
        if sigma <= 0:
            raise ValueError("frame has zero power; sigma unresolvable")
        spec = replace(spec, sigma=sigma)
    if spec.kind is CompanderKind.MULAW and spec.peak is None:
        peak = float(np.max(np.abs(frame.samples)))
        if peak <= 0:
            raise ValueError("frame has zero power; peak unresolvable")
        spec = replace(spec, peak=peak)
    return spec


def _magnitude_map(mag: np.ndarray, spec: CompanderSpec, inverse: bool, clamp: bool) -> np.ndarray:
    if spec.kind is CompanderKind.IDENTITY:
        return mag
    if spec.kind is CompanderKind.MULAW:
        fn = expand_mulaw if inverse else compand_mulaw
        return fn(mag, spec.peak, spec.mu)
    if spec.kind is CompanderKind.UNIFORM:
        return expand_uniform(mag, spec, clamp=clamp) if inverse else compand_uniform(mag, spec)
    return expand_linear(mag, spec, clamp=clamp) if inverse else compand_linear(mag, spec)


def _apply(frame: FbmcFrame, spec: CompanderSpec, inverse: bool, clamp: bool) -> FbmcFrame:
    spec = resolve_spec(spec, frame)
    if spec.kind is CompanderKind.IDENTITY:
        return frame.with_samples(frame.samples.copy())
    mag = np.abs(frame.samples)
    safe = np.where(mag > 0, mag, 1.0)
    gain = _magnitude_map(safe, spec, inverse, clamp) / safe
    out = np.where(mag > 0, gain, 0.0) * frame.samples
    return frame.with_samples(out)


def apply_to_frame(frame: FbmcFrame, spec: CompanderSpec) -> FbmcFrame:
    """Compand every sample's magnitude, preserving phase exactly."""
    return _apply(frame, spec, inverse=False, clamp=False)


def expand_frame(frame: FbmcFrame, spec: CompanderSpec, clamp: bool = True) -> FbmcFrame:
    """Receiver-side inverse of :func:`apply_to_frame`.

    Noise can push received magnitudes past the compander cap, so the
    default is clamp mode.  ``spec`` must already carry the resolved sigma
    or peak used at the transmitter.
    """
    return _apply(frame, spec, inverse=True, clamp=clamp)


def bussgang_report(original: FbmcFrame, companded: FbmcFrame) -> BussgangReport:
    """Attenuation factor, uncorrelated distortion power and transform gain.

    alpha = Re(sum y conj(x)) / sum |x|^2; distortion u = y - alpha*x;
    gain = 10 log10(PAPR_x / PAPR_y) over the full frame.
    """
    x = original.samples
    y = companded.samples
    if x.shape != y.shape:
        raise ValueError("frames must have the same length")
    px = float(np.mean(np.abs(x) ** 2))
    if px == 0:
        raise ValueError("zero-power original frame")
    alpha = float(np.real(np.vdot(x, y)) / np.real(np.vdot(x, x)))
    pu = float(np.mean(np.abs(y - alpha * x) ** 2))
    papr_x = np.max(np.abs(x) ** 2) / px
    papr_y = np.max(np.abs(y) ** 2) / np.mean(np.abs(y) ** 2)
    gain_db = float(10.0 * np.log10(papr_x / papr_y))
    return BussgangReport(alpha, pu, px, gain_db)
