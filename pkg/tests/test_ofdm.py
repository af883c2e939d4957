"""Transforms, symbol generation and the modulator against explicit oracles."""

import numpy as np
import pytest

from ambc.ofdm import (
    ComplexSignal,
    Domain,
    OfdmParams,
    SymbolVector,
    dft,
    generate_symbols,
    idft,
    modulation_matrix,
    ofdm_demodulate,
    ofdm_modulate,
)

SMALL = OfdmParams(n_subcarriers=8, n_cp=2, data_duration_s=3.2e-6, cp_duration_s=8.0e-7)


def brute_force_dft(samples: np.ndarray) -> np.ndarray:
    """O(N^2) unitary DFT straight from the definition."""
    n = samples.size
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        for m in range(n):
            out[k] += samples[m] * np.exp(-2j * np.pi * k * m / n)
    return out / np.sqrt(n)


def random_signal(rng, n, domain):
    return ComplexSignal(rng.standard_normal(n) + 1j * rng.standard_normal(n), domain)


class TestOfdmParams:
    def test_defaults_match_standard_numerology(self):
        params = OfdmParams()
        assert params.n_subcarriers == 64
        assert params.n_cp == 16
        assert params.n_total == 80
        assert params.symbol_duration_s == pytest.approx(4.0e-6)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_subcarriers": 0},
            {"n_cp": -1},
            {"n_cp": 64},
            {"n_cp": 80},
            {"data_duration_s": 0.0},
            {"cp_duration_s": -1.0e-7},
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(ValueError):
            OfdmParams(**kwargs)


class TestDft:
    def test_constant_vector_is_dc_only(self):
        spec = dft(ComplexSignal(np.ones(4), Domain.TIME_NO_CP))
        assert spec.domain is Domain.FREQUENCY
        np.testing.assert_allclose(spec.samples, [2.0, 0.0, 0.0, 0.0], atol=1e-14)

    def test_impulse_gives_flat_spectrum(self):
        impulse = np.zeros(4)
        impulse[0] = 1.0
        spec = dft(ComplexSignal(impulse, Domain.TIME_NO_CP))
        np.testing.assert_allclose(spec.samples, np.full(4, 0.5), atol=1e-14)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        v = random_signal(rng, 8, Domain.TIME_NO_CP)
        np.testing.assert_allclose(
            dft(v).samples, brute_force_dft(v.samples), atol=1e-12
        )

    def test_wrong_domain_rejected(self):
        with pytest.raises(ValueError):
            dft(ComplexSignal(np.ones(4), Domain.FREQUENCY))


class TestIdft:
    def test_inverts_dft(self):
        rng = np.random.default_rng(7)
        v = random_signal(rng, 64, Domain.TIME_NO_CP)
        back = idft(dft(v))
        assert back.domain is Domain.TIME_NO_CP
        np.testing.assert_allclose(back.samples, v.samples, atol=1e-12)

    def test_dft_of_ones_spectrum_roundtrip(self):
        spec = ComplexSignal(np.ones(4), Domain.FREQUENCY)
        np.testing.assert_allclose(
            dft(idft(spec)).samples, spec.samples, atol=1e-13
        )

    def test_zero_spectrum_gives_zero_signal(self):
        out = idft(ComplexSignal(np.zeros(8), Domain.FREQUENCY))
        np.testing.assert_array_equal(out.samples, np.zeros(8))

    def test_matches_brute_force_inverse(self):
        rng = np.random.default_rng(43)
        v = random_signal(rng, 8, Domain.FREQUENCY)
        # The inverse transform is the conjugate-transposed forward one.
        oracle = np.conj(brute_force_dft(np.conj(v.samples)))
        np.testing.assert_allclose(idft(v).samples, oracle, atol=1e-12)

    def test_wrong_domain_rejected(self):
        with pytest.raises(ValueError):
            idft(ComplexSignal(np.ones(4), Domain.TIME_NO_CP))

    def test_parseval_energy_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            v = random_signal(rng, 16, Domain.TIME_NO_CP)
            spec = dft(v)
            assert spec.power() == pytest.approx(v.power(), rel=1e-10)


class TestGenerateSymbols:
    def test_unit_energy_constellation_membership(self):
        rng = np.random.default_rng(1)
        s = generate_symbols(OfdmParams(), 1.0, rng)
        assert s.symbols.size == 64
        assert np.all(np.isin(s.symbols.real, (-1.0, 1.0)))
        assert np.all(s.symbols.imag == 0.0)

    def test_scaled_energy(self):
        rng = np.random.default_rng(2)
        s = generate_symbols(OfdmParams(), 4.0, rng)
        np.testing.assert_allclose(np.abs(s.symbols), 2.0)

    def test_fixed_seed_reproducible(self):
        a = generate_symbols(OfdmParams(), 1.0, np.random.default_rng(99))
        b = generate_symbols(OfdmParams(), 1.0, np.random.default_rng(99))
        np.testing.assert_array_equal(a.symbols, b.symbols)

    def test_large_sample_statistics(self):
        params = OfdmParams(n_subcarriers=100_000, n_cp=0)
        s = generate_symbols(params, 1.0, np.random.default_rng(5))
        n = s.symbols.size
        # Mean of +/-1 symbols has standard deviation 1/sqrt(n).
        assert abs(s.symbols.real.mean()) < 3.0 / np.sqrt(n)
        assert abs(np.mean(np.abs(s.symbols) ** 2) - 1.0) < 0.01

    def test_nonpositive_energy_rejected(self):
        with pytest.raises(ValueError):
            generate_symbols(OfdmParams(), 0.0, np.random.default_rng(0))


class TestOfdmModulate:
    def test_all_zero_symbols_give_zero_signal(self):
        out = ofdm_modulate(SymbolVector(np.zeros(8)), SMALL)
        assert out.domain is Domain.TIME_WITH_CP
        assert len(out) == 10
        np.testing.assert_array_equal(out.samples, np.zeros(10))

    def test_prefix_copies_body_tail(self):
        rng = np.random.default_rng(11)
        s = generate_symbols(SMALL, 1.0, rng)
        out = ofdm_modulate(s, SMALL)
        np.testing.assert_allclose(out.samples[:2], out.samples[-2:], atol=1e-15)

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(12)
        u = modulation_matrix(SMALL)
        for _ in range(100):
            s = generate_symbols(SMALL, 1.0, rng)
            np.testing.assert_allclose(
                ofdm_modulate(s, SMALL).samples, u @ s.symbols, atol=1e-10
            )

    def test_matrix_oracle_medium_size(self):
        params = OfdmParams(n_subcarriers=16, n_cp=4)
        rng = np.random.default_rng(13)
        u = modulation_matrix(params)
        s = generate_symbols(params, 2.0, rng)
        np.testing.assert_allclose(
            ofdm_modulate(s, params).samples, u @ s.symbols, atol=1e-10
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ofdm_modulate(SymbolVector(np.ones(4)), SMALL)


class TestOfdmDemodulate:
    def test_roundtrip_recovers_symbols(self):
        params = OfdmParams()
        rng = np.random.default_rng(21)
        s = generate_symbols(params, 1.0, rng)
        r = ofdm_demodulate(ofdm_modulate(s, params), params)
        assert r.domain is Domain.FREQUENCY
        np.testing.assert_allclose(r.samples, s.symbols, atol=1e-12)

    def test_zero_input_zero_spectrum(self):
        out = ofdm_demodulate(ComplexSignal(np.zeros(10), Domain.TIME_WITH_CP), SMALL)
        np.testing.assert_array_equal(out.samples, np.zeros(8))

    def test_flat_gain_commutes_to_subcarriers(self):
        rng = np.random.default_rng(22)
        s = generate_symbols(SMALL, 1.0, rng)
        gain = 0.3 - 1.7j
        scaled = ComplexSignal(gain * ofdm_modulate(s, SMALL).samples, Domain.TIME_WITH_CP)
        r = ofdm_demodulate(scaled, SMALL)
        np.testing.assert_allclose(r.samples, gain * s.symbols, atol=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ofdm_demodulate(ComplexSignal(np.zeros(9), Domain.TIME_WITH_CP), SMALL)

    def test_wrong_domain_rejected(self):
        with pytest.raises(ValueError):
            ofdm_demodulate(ComplexSignal(np.zeros(10), Domain.TIME_NO_CP), SMALL)


class TestComplexSignal:
    def test_power_sums_squared_magnitudes(self):
        sig = ComplexSignal(np.array([3.0, 4.0j]), Domain.FREQUENCY)
        assert sig.power() == pytest.approx(25.0)

    def test_rejects_matrix_input(self):
        with pytest.raises(ValueError):
            ComplexSignal(np.zeros((2, 2)), Domain.FREQUENCY)
