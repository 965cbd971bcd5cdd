"""Additive white Gaussian noise with calibrated SNR.

``snr_db`` is the ratio of transmitted signal power (measured over the
frame's steady-state region, after any companding) to the complex noise
power N0.  Per-component noise variance is N0/2.  ``math.inf`` is the
noiseless sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modem import FbmcFrame

__all__ = ["AwgnSpec", "transmit"]


@dataclass(frozen=True)
class AwgnSpec:
    snr_db: float
    seed: int = 0

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")


def transmit(frame: FbmcFrame, spec: AwgnSpec) -> FbmcFrame:
    """Add circularly-symmetric white Gaussian noise; deterministic per seed."""
    if len(frame) == 0:
        raise ValueError("empty frame")
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        return frame.with_samples(frame.samples.copy())
    power = float(np.mean(np.abs(frame.steady_samples()) ** 2))
    if power == 0.0:
        raise ValueError("zero-power frame: SNR undefined")
    n0 = power / 10.0 ** (spec.snr_db / 10.0)
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(len(frame)) + 1j * rng.standard_normal(len(frame))
    return frame.with_samples(frame.samples + np.sqrt(n0 / 2.0) * noise)
