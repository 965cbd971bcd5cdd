import math

import numpy as np
import pytest

from fbmcsim.compander import CompanderSpec
from fbmcsim.metrics import (
    BerPoint,
    BerRunConfig,
    CcdfCurve,
    CcdfKind,
    ber_run,
    ccdf_crossing_db,
    ccdf_empirical,
    ccdf_theoretical,
    oob_floor_db,
    papr_ofdm,
    papr_per_interval,
    psd_welch,
    steady_interval_slice,
    steady_state_alpha_t,
)
from fbmcsim.modem import Constellation, FbmcFrame, QamSymbolBlock, ofdm_modulate
from fbmcsim.prototype import build_phydyas


def make_frame(samples, n=4, overlap=1):
    samples = np.asarray(samples, dtype=complex)
    blocks = (2 * samples.size // n + 1 - 2 * overlap) // 2
    return FbmcFrame(samples, n, n, blocks, overlap)


class TestPaprPerInterval:
    def test_constant_modulus_is_zero_db(self):
        frame = make_frame(np.exp(1j * np.arange(10)), n=4)
        np.testing.assert_allclose(papr_per_interval(frame), 0.0, atol=1e-12)

    def test_single_peak_arithmetic(self):
        # steady-state average power 1, peak power 4 -> 6.02 dB
        frame = make_frame([0, 0, 2, 0, 1, 1, 0, 0, 1, 1], n=4)
        assert np.mean(np.abs(frame.steady_samples()) ** 2) == pytest.approx(1.0)
        paprs = papr_per_interval(frame)
        assert paprs[0] == pytest.approx(10 * np.log10(4.0), abs=1e-9)

    def test_frame_shorter_than_interval_rejected(self, phydyas_4_64):
        frame = make_frame([1.0, 1.0], n=4)
        with pytest.raises(ValueError, match="shorter"):
            papr_per_interval(frame)

    def test_interval_count_covers_support(self, frame_64):
        # M + alpha intervals, the last one a half period
        assert papr_per_interval(frame_64).size == frame_64.blocks + 4

    def test_steady_slice_excludes_ramps(self, frame_64):
        sl = steady_interval_slice(frame_64)
        assert sl.start == 2
        assert sl.stop == frame_64.blocks + 1


class TestPaprOfdm:
    def test_single_tone_zero_db(self):
        values = np.zeros((8, 1), dtype=complex)
        values[1, 0] = 1.0
        samples = ofdm_modulate(QamSymbolBlock(8, 1, values))
        assert papr_ofdm(samples, 8)[0] == pytest.approx(0.0, abs=1e-9)

    def test_time_impulse_papr_is_n(self):
        samples = ofdm_modulate(QamSymbolBlock(64, 1, np.ones((64, 1), dtype=complex)))
        assert papr_ofdm(samples, 64)[0] == pytest.approx(10 * np.log10(64), abs=1e-9)

    def test_length_must_divide(self):
        with pytest.raises(ValueError):
            papr_ofdm(np.ones(10, dtype=complex), 4)

    def test_qpsk_512_ccdf_sanity(self):
        from fbmcsim.modem import generate_symbols

        paprs = []
        for seed in range(40):
            block = generate_symbols(512, 50, Constellation.QPSK, seed)
            paprs.extend(papr_ofdm(ofdm_modulate(block), 512))
        curve = ccdf_empirical(np.asarray(paprs), np.arange(6.0, 13.0, 0.05))
        crossing = ccdf_crossing_db(curve, 1e-2)
        assert 9.8 <= crossing <= 11.6


class TestCcdfEmpirical:
    def test_step_function(self):
        curve = ccdf_empirical(np.full(100, 5.0), np.array([4.0, 6.0]))
        np.testing.assert_array_equal(curve.prob_exceed, [1.0, 0.0])

    def test_grid_below_minimum_gives_one(self):
        curve = ccdf_empirical(np.array([3.0, 4.0, 5.0]), np.array([1.0]))
        assert curve.prob_exceed[0] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ccdf_empirical(np.array([]), np.array([1.0]))


class TestCcdfTheoretical:
    def grid(self):
        # reaches far enough down that gamma -> 0 (linear scale) is exercised
        return np.arange(-20.0, 14.0, 0.1)

    def test_limits(self):
        curve = ccdf_theoretical(
            CcdfKind.THEORETICAL_CONVENTIONAL,
            np.array([-40.0, 40.0]),
            alpha_t=1.0,
            mean_power=1.0,
            n_samples=512,
        )
        assert curve.prob_exceed[0] == pytest.approx(1.0, abs=1e-9)
        assert curve.prob_exceed[1] == pytest.approx(0.0, abs=1e-12)

    def test_reference_crossing_at_512_carriers(self):
        gamma = 10 ** (10.3 / 10)
        expected = 1 - (1 - math.exp(-gamma)) ** 512
        curve = ccdf_theoretical(
            CcdfKind.THEORETICAL_CONVENTIONAL,
            np.array([10.3]),
            alpha_t=1 / 512,
            mean_power=512.0,
            n_samples=512,
        )
        assert curve.prob_exceed[0] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(1e-2, rel=0.15)

    @pytest.mark.parametrize("kind", [CcdfKind.THEORETICAL_UNIFORM, CcdfKind.THEORETICAL_LINEAR])
    def test_companded_curves_are_valid_ccdfs(self, kind):
        spec = (
            CompanderSpec.uniform(sigma=16.0)
            if kind is CcdfKind.THEORETICAL_UNIFORM
            else CompanderSpec.linear(sigma=16.0)
        )
        curve = ccdf_theoretical(
            kind, self.grid(), alpha_t=1 / 512, mean_power=512.0, n_samples=512, spec=spec
        )
        assert np.all(curve.prob_exceed >= 0) and np.all(curve.prob_exceed <= 1)
        assert np.all(np.diff(curve.prob_exceed) <= 1e-12)
        assert curve.prob_exceed[0] == pytest.approx(1.0, abs=1e-6)
        assert curve.prob_exceed[-1] == pytest.approx(0.0, abs=1e-9)

    def test_alpha_t_from_filter(self, phydyas_4_64):
        # sum_m h(t - mT/2)^2 == 2 under the unit-energy tap convention
        assert steady_state_alpha_t(phydyas_4_64, 512) == pytest.approx(1 / 512, rel=1e-12)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            ccdf_theoretical(
                CcdfKind.THEORETICAL_CONVENTIONAL,
                self.grid(),
                alpha_t=-1.0,
                mean_power=1.0,
                n_samples=8,
            )


class TestCcdfCurveInvariants:
    def test_rejects_increasing_probabilities(self):
        with pytest.raises(ValueError, match="nonincreasing"):
            CcdfCurve(np.array([1.0, 2.0]), np.array([0.1, 0.5]))

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError, match="ascending"):
            CcdfCurve(np.array([2.0, 1.0]), np.array([0.5, 0.1]))

    def test_crossing_interpolation(self):
        curve = CcdfCurve(np.array([8.0, 9.0, 10.0]), np.array([1e-1, 1e-2, 1e-3]))
        assert ccdf_crossing_db(curve, 1e-2) == pytest.approx(9.0, abs=1e-9)
        assert ccdf_crossing_db(curve, 10 ** -2.5) == pytest.approx(9.5, abs=1e-9)
        with pytest.raises(ValueError, match="never crosses"):
            ccdf_crossing_db(curve, 1e-5)


class TestBerRun:
    @pytest.mark.parametrize("seed", [0, 5, 123])
    def test_noiseless_identity_is_error_free(self, seed):
        config = BerRunConfig(
            scheme=CompanderSpec.identity(),
            snr_db=math.inf,
            min_errors=1,
            max_bits=20_000,
            seed=seed,
        )
        point = ber_run(config)
        assert point.errors == 0
        assert point.bits >= 20_000
        assert not point.target_met

    def test_stops_at_min_errors(self):
        config = BerRunConfig(
            scheme=CompanderSpec.identity(),
            snr_db=0.0,
            min_errors=50,
            max_bits=10_000_000,
            seed=5,
        )
        point = ber_run(config)
        assert point.errors >= 50
        assert point.target_met

    def test_berpoint_validation(self):
        with pytest.raises(ValueError):
            BerPoint(snr_db=0.0, bits=10, errors=11)
        assert BerPoint(snr_db=0.0, bits=100, errors=10).ber == pytest.approx(0.1)


class TestPsdWelch:
    def test_pure_tone_peaks_at_its_frequency(self):
        n = np.arange(65536)
        tone = np.exp(2j * np.pi * 0.25 * n)
        est = psd_welch(tone, 1024, 0.5)
        peak_freq = est.freq_norm[np.argmax(est.psd_db)]
        assert peak_freq == pytest.approx(0.25, abs=1 / 1024)
        assert est.psd_db.max() == 0.0

    def test_white_noise_is_flat(self):
        rng = np.random.default_rng(8)
        noise = rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)
        est = psd_welch(noise, 1024, 0.5)
        assert est.psd_db.min() > -1.5

    def test_segment_too_large_rejected(self):
        with pytest.raises(ValueError, match="segment"):
            psd_welch(np.ones(100, dtype=complex), 1024, 0.5)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            psd_welch(np.ones(4096, dtype=complex), 1000, 0.5)

    def test_oob_floor_band_selection(self):
        est = psd_welch(np.exp(2j * np.pi * 0.25 * np.arange(65536)), 1024, 0.5)
        floor = oob_floor_db(est, (-0.4, -0.1))
        assert floor < -100.0
