"""Fast invariant suite behind `ambc selftest`.

Every check re-derives its expectation from scratch (explicit matrices,
exhaustive enumeration, closed-form identities), so a regression in any
core routine flips the exit code.  Checks call through the module
namespaces on purpose: a patched-in bug must be seen, not a stale
reference.
"""

from __future__ import annotations

import time

import numpy as np

from . import analysis, channel, montecarlo, ofdm, reader, tag


def _check_transforms() -> None:
    ones = ofdm.ComplexSignal(np.ones(4), ofdm.Domain.TIME_NO_CP)
    spectrum = ofdm.dft(ones)
    assert np.allclose(spectrum.samples, [2.0, 0.0, 0.0, 0.0], atol=1e-12), "constant -> impulse"
    rng = np.random.default_rng(11)
    v = ofdm.ComplexSignal(rng.standard_normal(64) + 1j * rng.standard_normal(64),
                           ofdm.Domain.TIME_NO_CP)
    back = ofdm.idft(ofdm.dft(v))
    assert np.allclose(back.samples, v.samples, atol=1e-12), "idft(dft) is not identity"
    assert abs(ofdm.dft(v).power() - v.power()) < 1e-9, "transform is not unitary"


def _check_ofdm_matrix() -> None:
    params = ofdm.OfdmParams(8, 2, 3.2e-6, 8.0e-7)
    u = ofdm.modulation_matrix(params)
    rng = np.random.default_rng(5)
    for _ in range(20):
        s = ofdm.generate_symbols(params, 1.0, rng)
        fast = ofdm.ofdm_modulate(s, params)
        assert np.allclose(fast.samples, u @ s.symbols, atol=1e-10), "modulator != matrix"


def _check_backscatter_matrix() -> None:
    params = ofdm.OfdmParams(8, 2, 3.2e-6, 8.0e-7)
    rng = np.random.default_rng(6)
    for _ in range(20):
        s = ofdm.generate_symbols(params, 1.0, rng)
        x = ofdm.ofdm_modulate(s, params)
        mask = tag.ook_mask(rng.integers(0, 2, size=8))
        fast = tag.backscatter(x, mask, 1.0, params)
        ref = tag.backscatter_matrix(mask, params) @ x.samples
        assert np.allclose(fast.samples, ref, atol=1e-10), "backscatter != matrix"


def _check_im_codebook() -> None:
    usable = analysis.im_bit_count(8, 2)
    seen = set()
    for index in range(2**usable):
        mask = tag.im_encode(index, 8, 2)
        assert mask.n_active == 2, "wrong active count"
        decoded = tag.im_decode(mask, 2)
        assert decoded == index, "encode/decode mismatch"
        seen.add(tuple(mask.mask.tolist()))
    assert len(seen) == 2**usable, "codewords are not distinct"


def _check_threshold() -> None:
    cfg = reader.DetectorConfig(direct_gain=1.0, backscatter_gain=1.0, n0=1.0)
    assert abs(reader.optimal_threshold(cfg) - 1.5) < 1e-12, "bad midpoint threshold"


def _check_closed_form_identity() -> None:
    for snr in np.logspace(0.0, 3.0, 7):
        point = analysis.ber_closed_form(1.0, 1.0, float(snr))
        mean = 0.5 * (point.error_given_off + point.error_given_on)
        assert abs(point.error - mean) < 1e-12, "conditional average broken"


def _check_exact_numbers() -> None:
    assert analysis.im_bit_count(64, 32) == 60
    assert abs(analysis.bri_ook(64) - 2.0) < 1e-12
    assert abs(analysis.bri_im(64, 32) - 1.875) < 1e-12
    assert abs(analysis.data_rate(52, 4.0e-6) - 13.0e6) < 1e-6
    assert abs(analysis.data_rate(1, 4.0e-6) - 250.0e3) < 1e-9
    assert abs(channel.coverage_ratio(10, 0.5, 1.0, 1.0) - np.sqrt(60.0)) < 1e-12


def _check_detector_agreement() -> None:
    rng = np.random.default_rng(17)
    n = 100_000
    snr = 100.0
    n0 = 1.0 / snr
    bits = rng.integers(0, 2, size=n)
    signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
    noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(n0 / 2.0)
    r = ofdm.ComplexSignal((1.0 + bits) * signs + noise, ofdm.Domain.FREQUENCY)
    cfg = reader.DetectorConfig(direct_gain=1.0, backscatter_gain=1.0, n0=n0)
    hard = reader.detect_ook_threshold(r, cfg).bits
    soft = reader.detect_ook_exact_ml(r, cfg).bits
    agreement = float(np.mean(hard == soft))
    assert agreement >= 0.999, f"detectors agree on only {agreement:.4%}"


def _check_trials() -> None:
    cfg = montecarlo.ExperimentConfig(
        snr_grid_db=(60.0,), trials_per_point=4, stop_at_errors=None, master_seed=9
    )
    first = montecarlo.run_trial(cfg, 60.0, 0)
    again = montecarlo.run_trial(cfg, 60.0, 0)
    assert first == again, "trial is not deterministic"
    total = sum(montecarlo.run_trial(cfg, 60.0, t).bit_errors for t in range(4))
    assert total == 0, "errors in a near-noiseless channel"


_CHECKS = [
    ("unitary transforms", _check_transforms),
    ("ofdm matrix oracle", _check_ofdm_matrix),
    ("backscatter matrix oracle", _check_backscatter_matrix),
    ("index-modulation codebook", _check_im_codebook),
    ("threshold midpoint", _check_threshold),
    ("closed-form identity", _check_closed_form_identity),
    ("exact rate numbers", _check_exact_numbers),
    ("detector agreement", _check_detector_agreement),
    ("trial determinism", _check_trials),
]


def run_selftest() -> int:
    """Run all checks; print one line each; 0 when everything passes."""
    started = time.perf_counter()
    failures = 0
    for name, check in _CHECKS:
        try:
            check()
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    elapsed = time.perf_counter() - started
    status = "passed" if failures == 0 else f"{failures} failed"
    print(f"selftest {status} in {elapsed:.2f}s")
    return 0 if failures == 0 else 1
