import numpy as np
import pytest
from scipy import stats

from fbmcsim.modem import (
    Constellation,
    FbmcFrame,
    OqamSequence,
    QamSymbolBlock,
    analyze,
    demap_symbols,
    generate_symbols,
    map_bits,
    ofdm_modulate,
    oqam_destagger,
    oqam_stagger,
    synthesize,
    write_iq,
)
from fbmcsim.prototype import build_phydyas


def direct_synthesize(seq, filt):
    """Oracle: literal triple-sum of the transmit model, mid-point time grid."""
    n = filt.samples_per_period
    alpha = filt.overlap_factor
    total = (seq.half_symbols - 1 + 2 * alpha) * n // 2
    out = np.zeros(total, dtype=complex)
    for k in range(seq.subcarriers):
        for m in range(seq.half_symbols):
            phi = np.pi / 2 * (m + k) - np.pi * m * k
            for i in range(alpha * n):
                t = m * n // 2 + i
                carrier = np.exp(1j * (2 * np.pi * k * (t + 0.5) / n + phi))
                out[t] += seq.values[k, m] * filt.taps[i] * carrier
    return out


class TestGenerateSymbols:
    def test_deterministic_per_seed(self):
        a = generate_symbols(16, 8, Constellation.QPSK, 42)
        b = generate_symbols(16, 8, Constellation.QPSK, 42)
        np.testing.assert_array_equal(a.values, b.values)

    def test_qpsk_gray_convention(self):
        sym = map_bits(np.array([0, 0]), Constellation.QPSK)
        assert sym == pytest.approx((1 + 1j) / np.sqrt(2))

    @pytest.mark.parametrize("constellation", list(Constellation))
    def test_unit_average_energy(self, constellation):
        block = generate_symbols(100, 1000, constellation, 7)
        assert np.mean(np.abs(block.values) ** 2) == pytest.approx(1.0, abs=0.01)

    @pytest.mark.parametrize("constellation", list(Constellation))
    def test_demap_inverts_map(self, constellation):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, size=(64, 16, 4 if constellation is Constellation.QAM16 else 2))
        np.testing.assert_array_equal(demap_symbols(map_bits(bits, constellation), constellation), bits)

    def test_rejects_nonpositive_dims(self):
        with pytest.raises(ValueError):
            generate_symbols(0, 4, Constellation.QPSK, 0)


class TestOqamStagger:
    def test_direct_definition(self):
        block = QamSymbolBlock(1, 1, np.array([[0.6 + 0.8j]]))
        seq = oqam_stagger(block)
        assert seq.values[0, 0] == 0.6
        assert seq.values[0, 1] == 0.8

    def test_all_real_block_zeroes_odd_columns(self):
        block = QamSymbolBlock(4, 3, np.ones((4, 3), dtype=complex))
        seq = oqam_stagger(block)
        assert np.all(seq.values[:, 1::2] == 0)

    def test_destagger_is_exact_inverse(self):
        block = generate_symbols(32, 9, Constellation.QAM16, 5)
        back = oqam_destagger(oqam_stagger(block))
        np.testing.assert_array_equal(back.values, block.values)


class TestSynthesize:
    def test_zero_sequence_gives_zero_frame(self, phydyas_4_64):
        seq = OqamSequence(8, 4, np.zeros((8, 4)))
        frame = synthesize(seq, phydyas_4_64)
        assert np.all(frame.samples == 0)

    def test_single_carrier_single_pulse_equals_taps(self):
        filt = build_phydyas(4, 8)
        seq = OqamSequence(1, 2, np.array([[1.0, 0.0]]))
        frame = synthesize(seq, filt)
        np.testing.assert_allclose(frame.samples[: filt.num_taps], filt.taps, atol=1e-12)
        assert np.max(np.abs(frame.samples[filt.num_taps :])) < 1e-12

    def test_fast_path_matches_direct_triple_sum(self):
        filt = build_phydyas(4, 8)
        rng = np.random.default_rng(7)
        seq = OqamSequence(4, 4, rng.normal(size=(4, 4)))
        fast = synthesize(seq, filt)
        np.testing.assert_allclose(fast.samples, direct_synthesize(seq, filt), atol=1e-9)

    def test_linear_superposition(self, phydyas_4_64):
        rng = np.random.default_rng(11)
        a = OqamSequence(16, 6, rng.normal(size=(16, 6)))
        b = OqamSequence(16, 6, rng.normal(size=(16, 6)))
        combined = OqamSequence(16, 6, a.values + b.values)
        lhs = synthesize(combined, phydyas_4_64).samples
        rhs = synthesize(a, phydyas_4_64).samples + synthesize(b, phydyas_4_64).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_frame_length_matches_support(self, frame_64):
        # (M + alpha - 1/2) * N with M=10, alpha=4, N=64
        assert len(frame_64) == (10 + 4) * 64 - 32

    def test_too_many_subcarriers_rejected(self):
        filt = build_phydyas(4, 8)
        with pytest.raises(ValueError, match="samples_per_period"):
            synthesize(OqamSequence(16, 2, np.zeros((16, 2))), filt)


class TestAnalyze:
    def test_round_trip_interference_floor(self, phydyas_4_64):
        block = generate_symbols(64, 10, Constellation.QPSK, 0)
        seq = oqam_stagger(block)
        frame = synthesize(seq, phydyas_4_64)
        back = analyze(frame, phydyas_4_64)
        rms = np.sqrt(np.mean((back.values - seq.values) ** 2))
        assert rms < 1e-3

    def test_zero_frame_gives_zero_sequence(self, phydyas_4_64):
        frame = synthesize(OqamSequence(8, 4, np.zeros((8, 4))), phydyas_4_64)
        assert np.all(analyze(frame, phydyas_4_64).values == 0)

    def test_scaling_linearity(self, phydyas_4_64, frame_64):
        doubled = frame_64.with_samples(2.0 * frame_64.samples)
        np.testing.assert_allclose(
            analyze(doubled, phydyas_4_64).values,
            2.0 * analyze(frame_64, phydyas_4_64).values,
            atol=1e-12,
        )

    def test_geometry_mismatch_rejected(self, frame_64):
        with pytest.raises(ValueError, match="sample rates"):
            analyze(frame_64, build_phydyas(4, 128))


class TestOfdmModulate:
    def test_dc_impulse_gives_constant(self):
        values = np.zeros((8, 1), dtype=complex)
        values[0, 0] = 1.0
        out = ofdm_modulate(QamSymbolBlock(8, 1, values))
        np.testing.assert_allclose(out, np.full(8, 1 / 8), atol=1e-15)

    def test_all_ones_gives_time_impulse(self):
        out = ofdm_modulate(QamSymbolBlock(8, 1, np.ones((8, 1), dtype=complex)))
        expected = np.zeros(8, dtype=complex)
        expected[0] = 1.0
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_parseval_per_symbol(self):
        block = generate_symbols(64, 5, Constellation.QAM16, 9)
        out = ofdm_modulate(block).reshape(5, 64)
        lhs = np.sum(np.abs(out) ** 2, axis=1)
        rhs = np.sum(np.abs(block.values) ** 2, axis=0) / 64
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestSignalStatistics:
    def test_real_part_is_gaussian_for_many_carriers(self):
        filt = build_phydyas(4, 512)
        block = generate_symbols(512, 12, Constellation.QPSK, 17)
        frame = synthesize(oqam_stagger(block), filt)
        real = frame.steady_samples().real[:10_000]
        sigma = np.sqrt(512 / 2)  # per-component variance K/2 by construction
        _, pvalue = stats.kstest(real / sigma, "norm")
        assert pvalue > 0.01

    def test_normalized_power_follows_unit_exponential(self):
        filt = build_phydyas(4, 512)
        samples = []
        for seed in range(4):
            block = generate_symbols(512, 8, Constellation.QPSK, 100 + seed)
            frame = synthesize(oqam_stagger(block), filt)
            samples.append(frame.steady_samples())
        power = np.abs(np.concatenate(samples)) ** 2
        z = power / power.mean()
        grid = np.linspace(0.0, 6.0, 61)
        empirical = np.array([(z <= g).mean() for g in grid])
        expected = 1.0 - np.exp(-grid)
        assert np.max(np.abs(empirical - expected)) < 0.02

    def test_steady_power_stable_across_seeds(self, frame_factory):
        powers = [
            np.mean(np.abs(frame_factory(seed=s, k=128, m=12).steady_samples()) ** 2)
            for s in range(5)
        ]
        assert np.max(np.abs(np.array(powers) / 128 - 1.0)) < 0.02


def test_write_iq_interleaved_little_endian(tmp_path):
    samples = np.array([1.0 + 2.0j, -3.5 + 0.25j])
    path = tmp_path / "dump.iq"
    write_iq(samples, path)
    raw = np.fromfile(path, dtype="<f8")
    np.testing.assert_array_equal(raw, [1.0, 2.0, -3.5, 0.25])


def test_frame_geometry_validation():
    with pytest.raises(ValueError, match="frame length"):
        FbmcFrame(np.zeros(10, dtype=complex), 64, 8, 2, 4)
