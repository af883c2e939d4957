"""End-to-end Monte Carlo experiments: SNR sweeps with error counting.

Trials are reproducible and order-independent: every trial owns a
counter-based RNG stream derived from (master_seed, point_index,
trial_index), batches have a fixed size, and aggregation is integer
addition, so results are bit-identical for any degree of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from . import analysis
from .channel import (
    RisLinkConfig,
    add_awgn,
    apply_flat_channel,
    build_composite,
    coverage_ratio,
)
from .ofdm import ComplexSignal, Domain, OfdmParams, generate_symbols, ofdm_demodulate, ofdm_modulate
from .reader import (
    DetectorConfig,
    DetectorMode,
    detect_im,
    detect_ook_exact_ml,
    detect_ook_threshold,
)
from .tag import Modulation, TagMessage, backscatter, im_encode, ook_mask

# Trials per scheduling batch; fixed so early stopping sees the same trial
# set no matter how the batch is split across workers.
BATCH_TRIALS = 512

_Z95 = float(ndtri(0.975))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one BER sweep needs, RNG seed included."""

    ofdm: OfdmParams = OfdmParams()
    forward: RisLinkConfig = RisLinkConfig()
    direct: RisLinkConfig = RisLinkConfig()
    backward: RisLinkConfig = RisLinkConfig()
    tag_attenuation: float = 1.0
    modulation: Modulation = Modulation.OOK
    n_active: int = 32
    detector_mode: DetectorMode = DetectorMode.THRESHOLD
    energy: float = 1.0
    snr_grid_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)
    trials_per_point: int = 60_000
    stop_at_errors: int | None = 500
    master_seed: int = 2026

    def __post_init__(self) -> None:
        object.__setattr__(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be non-empty")
        if len(set(self.snr_grid_db)) != len(self.snr_grid_db):
            raise ValueError("snr_grid_db entries must be unique")
        if not 0.0 <= self.tag_attenuation <= 1.0:
            raise ValueError("tag_attenuation must lie in [0, 1]")
        if self.energy <= 0.0:
            raise ValueError("energy must be positive")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be at least 1")
        if self.stop_at_errors is not None and self.stop_at_errors < 1:
            raise ValueError("stop_at_errors must be positive when set")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.modulation is Modulation.IM:
            if not 1 <= self.n_active <= self.ofdm.n_subcarriers:
                raise ValueError("n_active must lie in 1..n_subcarriers")
            if analysis.im_bit_count(self.ofdm.n_subcarriers, self.n_active) < 1:
                raise ValueError("index modulation carries no bits for this (n, k)")


@dataclass(frozen=True)
class TrialResult:
    """Error counts from one transmitted OFDM symbol."""

    bits_sent: int
    bit_errors: int
    im_errors: int = 0
    zeros_sent: int = 0
    zeros_errors: int = 0
    ones_sent: int = 0
    ones_errors: int = 0
    out_of_codebook: int = 0

    def counts(self) -> np.ndarray:
        return np.array(
            [
                self.bits_sent,
                self.bit_errors,
                self.im_errors,
                self.zeros_sent,
                self.zeros_errors,
                self.ones_sent,
                self.ones_errors,
                self.out_of_codebook,
            ],
            dtype=np.int64,
        )


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated counts and reference curves at one SNR point."""

    snr_db: float
    trials: int
    bits_sent: int
    bit_errors: int
    ber_estimate: float
    ci95_low: float
    ci95_high: float
    closed_form_ber: float
    approx_ber: float
    baseline_ber: float
    closed_form_given_off: float
    closed_form_given_on: float
    zeros_sent: int
    zeros_errors: int
    ones_sent: int
    ones_errors: int
    im_errors: int
    out_of_codebook: int


@dataclass(frozen=True)
class SweepResult:
    """One BER sweep: per-point records plus the gains its references used."""

    points: tuple[SweepPoint, ...]
    nominal_direct_gain: float
    nominal_backscatter_gain: float
    config: ExperimentConfig


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial of one sweep point.

    Philox is keyed by the master seed; the (trial, point) pair selects a
    disjoint counter block, so streams never overlap and any subset of
    trials can run in any order.
    """
    counter = [0, int(trial_index), int(point_index), 0]
    return np.random.Generator(np.random.Philox(key=int(master_seed), counter=counter))


def nominal_gains(cfg: ExperimentConfig) -> tuple[float, float]:
    """(direct, round-trip) amplitudes the closed-form references use.

    Exact for fixed reflector gains; the per-link mean otherwise.
    """

    def link_amp(link: RisLinkConfig) -> float:
        return link.los_gain + link.q_reflectors * link.gain_mean

    direct = link_amp(cfg.direct)
    dyadic = cfg.tag_attenuation * link_amp(cfg.backward) * link_amp(cfg.forward)
    return direct, dyadic


def run_trial(cfg: ExperimentConfig, snr_db: float, trial_index: int) -> TrialResult:
    """Simulate one OFDM symbol end to end and count detection errors.

    snr_db must be a member of cfg.snr_grid_db (it selects the RNG
    stream); draws happen in a fixed order: channel gains, data symbols,
    tag message, noise.
    """
    try:
        point_index = cfg.snr_grid_db.index(float(snr_db))
    except ValueError:
        raise ValueError("snr_db is not on the configured snr_grid_db") from None
    snr_linear = 10.0 ** (snr_db / 10.0)
    n0 = cfg.energy / snr_linear
    rng = trial_rng(cfg.master_seed, point_index, trial_index)

    gains = build_composite(cfg.forward, cfg.direct, cfg.backward, cfg.tag_attenuation, rng)
    symbols = generate_symbols(cfg.ofdm, cfg.energy, rng)

    if cfg.modulation is Modulation.OOK:
        bits = rng.integers(0, 2, size=cfg.ofdm.n_subcarriers)
        message = TagMessage(Modulation.OOK, ook_bits=bits)
        mask = ook_mask(message.ook_bits)
    else:
        n_bits = analysis.im_bit_count(cfg.ofdm.n_subcarriers, cfg.n_active)
        index = int(rng.integers(0, 2**n_bits, dtype=np.uint64))
        message = TagMessage(Modulation.IM, im_index=index)
        mask = im_encode(index, cfg.ofdm.n_subcarriers, cfg.n_active)

    x = ofdm_modulate(symbols, cfg.ofdm)
    at_tag = apply_flat_channel(x, gains.forward)
    reflected = backscatter(at_tag, mask, cfg.tag_attenuation, cfg.ofdm)
    via_tag = apply_flat_channel(reflected, gains.backward)
    via_direct = apply_flat_channel(x, gains.direct)
    received = ComplexSignal(via_direct.samples + via_tag.samples, Domain.TIME_WITH_CP)
    received = add_awgn(received, n0, rng)
    r = ofdm_demodulate(received, cfg.ofdm)

    # Undo the common phase so detection sees real, co-phased amplitudes.
    phase = np.angle(gains.direct)
    r = ComplexSignal(r.samples * np.exp(-1j * phase), Domain.FREQUENCY)
    det_cfg = DetectorConfig(
        direct_gain=abs(gains.direct),
        backscatter_gain=abs(gains.dyadic),
        n0=n0,
        energy=cfg.energy,
        mode=cfg.detector_mode,
    )

    if cfg.modulation is Modulation.OOK:
        if cfg.detector_mode is DetectorMode.EXACT_ML:
            det = detect_ook_exact_ml(r, det_cfg)
        else:
            det = detect_ook_threshold(r, det_cfg)
        sent = message.ook_bits
        wrong = det.bits != sent
        ones = sent == 1
        return TrialResult(
            bits_sent=int(sent.size),
            bit_errors=int(wrong.sum()),
            zeros_sent=int((~ones).sum()),
            zeros_errors=int((wrong & ~ones).sum()),
            ones_sent=int(ones.sum()),
            ones_errors=int((wrong & ones).sum()),
        )

    det = detect_im(r, cfg.n_active, det_cfg)
    n_bits = analysis.im_bit_count(cfg.ofdm.n_subcarriers, cfg.n_active)
    diff = message.im_index ^ det.recovered_index
    return TrialResult(
        bits_sent=n_bits,
        bit_errors=int(diff).bit_count(),
        im_errors=int(diff != 0),
        out_of_codebook=int(det.out_of_codebook),
    )


def wilson_interval(errors: int, total: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if total < 1:
        raise ValueError("total must be positive")
    if not 0 <= errors <= total:
        raise ValueError("errors must lie in 0..total")
    z = _Z95
    p = errors / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2.0 * total)) / denom
    half = z * np.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    # The bounds are exactly 0 / 1 in the degenerate cases; center - half
    # only agrees up to rounding there.
    low = 0.0 if errors == 0 else max(0.0, float(center - half))
    high = 1.0 if errors == total else min(1.0, float(center + half))
    return low, high


def _range_counts(cfg: ExperimentConfig, snr_db: float, start: int, count: int) -> np.ndarray:
    totals = np.zeros(8, dtype=np.int64)
    for t in range(start, start + count):
        totals += run_trial(cfg, snr_db, t).counts()
    return totals


def _range_counts_star(payload) -> np.ndarray:
    return _range_counts(*payload)


def _point_reference(
    cfg: ExperimentConfig, snr_db: float, direct: float, dyadic: float
) -> tuple[float, float, float, float, float]:
    snr_linear = 10.0 ** (snr_db / 10.0)
    baseline = (
        analysis.baseline_ber(snr_linear, cfg.ofdm.n_cp) if snr_linear > 1.0 else float("nan")
    )
    if cfg.modulation is not Modulation.OOK:
        nan = float("nan")
        return nan, nan, baseline, nan, nan
    point = analysis.ber_closed_form(direct, dyadic, snr_linear)
    return point.error, point.error_approx, baseline, point.error_given_off, point.error_given_on


def ber_sweep(cfg: ExperimentConfig, jobs: int = 1) -> SweepResult:
    """Run the Monte Carlo BER experiment over the configured SNR grid.

    Honors stop_at_errors (checked between fixed-size batches) and the
    trials_per_point cap.  jobs > 1 distributes each batch over worker
    processes without changing any result bit.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    direct, dyadic = nominal_gains(cfg)
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    points = []
    try:
        for snr_db in cfg.snr_grid_db:
            totals = np.zeros(8, dtype=np.int64)
            trials_done = 0
            while trials_done < cfg.trials_per_point:
                batch = min(BATCH_TRIALS, cfg.trials_per_point - trials_done)
                if pool is None:
                    totals += _range_counts(cfg, snr_db, trials_done, batch)
                else:
                    splits = np.array_split(np.arange(trials_done, trials_done + batch), jobs)
                    work = [
                        (cfg, snr_db, int(chunk[0]), int(chunk.size))
                        for chunk in splits
                        if chunk.size
                    ]
                    for counts in pool.map(_range_counts_star, work):
                        totals += counts
                trials_done += batch
                if cfg.stop_at_errors is not None and totals[1] >= cfg.stop_at_errors:
                    break
            bits, errs = int(totals[0]), int(totals[1])
            low, high = wilson_interval(errs, bits)
            closed, approx, baseline, given_off, given_on = _point_reference(
                cfg, snr_db, direct, dyadic
            )
            points.append(
                SweepPoint(
                    snr_db=snr_db,
                    trials=trials_done,
                    bits_sent=bits,
                    bit_errors=errs,
                    ber_estimate=errs / bits,
                    ci95_low=low,
                    ci95_high=high,
                    closed_form_ber=closed,
                    approx_ber=approx,
                    baseline_ber=baseline,
                    closed_form_given_off=given_off,
                    closed_form_given_on=given_on,
                    zeros_sent=int(totals[3]),
                    zeros_errors=int(totals[4]),
                    ones_sent=int(totals[5]),
                    ones_errors=int(totals[6]),
                    im_errors=int(totals[2]),
                    out_of_codebook=int(totals[7]),
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(
        points=tuple(points),
        nominal_direct_gain=direct,
        nominal_backscatter_gain=dyadic,
        config=cfg,
    )


@dataclass(frozen=True)
class CoverageRow:
    q_b: int
    c0: float
    ratio: float


def coverage_sweep(
    q_b_grid: Sequence[int],
    c0_grid: Sequence[float],
    mu_c_sq: float = 0.5,
    sigma_c_sq: float = 1.0,
) -> list[CoverageRow]:
    """Coverage-ratio table over the (reflector count, direct gain) grid."""
    if not len(q_b_grid) or not len(c0_grid):
        raise ValueError("grids must be non-empty")
    rows = []
    for q in q_b_grid:
        for c0 in c0_grid:
            rows.append(
                CoverageRow(int(q), float(c0), coverage_ratio(int(q), mu_c_sq, sigma_c_sq, c0))
            )
    return rows


@dataclass(frozen=True)
class BriRow:
    k: int
    eta_im: int
    lambda_im: float
    eta_ook: int
    lambda_ook: float


def bri_table(
    n_subcarriers: int, k_grid: Sequence[int] | None = None, energy: float = 1.0
) -> list[BriRow]:
    """Bits-per-symbol and bits-per-reflected-energy for both tag modes.

    The on-off columns do not depend on k and repeat in every row for
    side-by-side comparison.
    """
    if k_grid is None:
        k_grid = range(1, n_subcarriers + 1)
    rows = []
    for k in k_grid:
        if not 1 <= k <= n_subcarriers:
            raise ValueError("k values must lie in 1..n_subcarriers")
        rows.append(
            BriRow(
                k=int(k),
                eta_im=analysis.im_bit_count(n_subcarriers, int(k)),
                lambda_im=analysis.bri_im(n_subcarriers, int(k), energy),
                eta_ook=n_subcarriers,
                lambda_ook=analysis.bri_ook(n_subcarriers, energy),
            )
        )
    return rows
