"""Closed-form error rates, legacy-detector baseline and rate metrics.

SNR is the linear ratio energy / n0 throughout; CLI layers convert from
dB.  The conditional error probabilities are exact for the midpoint
threshold detector operating on |Re r_l| under circularly symmetric
Gaussian noise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb, log, sqrt

import numpy as np
from scipy.special import erfc

_clamp_count = 0


def q_function(x):
    """Gaussian tail probability Q(x), vectorized."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def clamp_event_count() -> int:
    """How many closed-form values needed clamping into [0, 1] so far."""
    return _clamp_count


def reset_clamp_count() -> None:
    global _clamp_count
    _clamp_count = 0


def _clamp01(p: float, label: str) -> float:
    global _clamp_count
    if 0.0 <= p <= 1.0:
        return p
    _clamp_count += 1
    warnings.warn(f"{label} fell outside [0, 1] and was clamped", RuntimeWarning)
    return min(max(p, 0.0), 1.0)


def _check_gains_snr(direct_gain: float, backscatter_gain: float, snr_linear: float) -> None:
    if direct_gain < 0.0 or backscatter_gain < 0.0:
        raise ValueError("gains must be nonnegative")
    if snr_linear <= 0.0:
        raise ValueError("snr_linear must be positive")


def ber_given_bit0(direct_gain: float, backscatter_gain: float, snr_linear: float) -> float:
    """Error probability when the tag absorbs (bit 0).

    The detector errs when noise pushes |Re r| above the midpoint, from
    either side of the +/- direct-path points.
    """
    _check_gains_snr(direct_gain, backscatter_gain, snr_linear)
    a, g = direct_gain, snr_linear
    b = backscatter_gain
    p = q_function(sqrt(b * b * g / 2.0)) + q_function(
        sqrt(2.0 * (2.0 * a + b / 2.0) ** 2 * g)
    )
    return _clamp01(float(p), "ber_given_bit0")


def ber_given_bit1(direct_gain: float, backscatter_gain: float, snr_linear: float) -> float:
    """Error probability when the tag reflects (bit 1)."""
    _check_gains_snr(direct_gain, backscatter_gain, snr_linear)
    a, g = direct_gain, snr_linear
    b = backscatter_gain
    # 1 - Q(-x) written as Q(x); the direct form cancels to 0 once x > ~9.
    p = q_function(sqrt(b * b * g / 2.0)) - q_function(
        sqrt(2.0 * (2.0 * a + 3.0 * b / 2.0) ** 2 * g)
    )
    return _clamp01(float(p), "ber_given_bit1")


@dataclass(frozen=True)
class BerPoint:
    """Closed-form error probabilities at one SNR."""

    snr_linear: float
    error_given_off: float
    error_given_on: float
    error: float
    error_approx: float


def ber_closed_form(
    direct_gain: float, backscatter_gain: float, snr_linear: float
) -> BerPoint:
    """Average and conditional error probabilities for equiprobable bits.

    error_approx keeps only the dominant tail term, which both
    conditional probabilities share.
    """
    p0 = ber_given_bit0(direct_gain, backscatter_gain, snr_linear)
    p1 = ber_given_bit1(direct_gain, backscatter_gain, snr_linear)
    approx = float(
        q_function(sqrt(backscatter_gain**2 * snr_linear / 2.0))
    )
    return BerPoint(
        snr_linear=snr_linear,
        error_given_off=p0,
        error_given_on=p1,
        error=_clamp01(0.5 * (p0 + p1), "ber_closed_form"),
        error_approx=_clamp01(approx, "ber_approx"),
    )


def baseline_qfunc_arg(snr_linear: float, n_cp: int = 16) -> float:
    """Q-function argument of the legacy energy-difference detector.

    Grows like sqrt(n_cp + 2 ln snr) at high SNR, so the baseline error
    floor is set by the prefix length rather than by SNR alone.  Only
    defined for snr_linear > 1.
    """
    if n_cp < 1:
        raise ValueError("n_cp must be a positive integer")
    if snr_linear <= 1.0:
        raise ValueError("baseline detector is defined for snr_linear > 1")
    g = snr_linear
    ln_g = log(g)
    inner = (g * g + (1.0 - sqrt(1.0 + 2.0 * ln_g / n_cp)) * g) ** 2
    return sqrt(n_cp * inner / g**4 + 2.0 * ln_g)


def baseline_ber(snr_linear: float, n_cp: int = 16) -> float:
    """Bit error rate of the legacy detector without any surface assist."""
    return float(q_function(baseline_qfunc_arg(snr_linear, n_cp) / sqrt(2.0)))


def signal_power(
    direct_gain: float,
    backscatter_gain: float,
    n_active: int,
    n_subcarriers: int,
    energy: float = 1.0,
) -> float:
    """Mean received signal power per subcarrier with n_active reflecting.

    Inactive subcarriers see only the direct path, active ones the sum of
    direct and round-trip amplitudes.
    """
    if not 0 <= n_active <= n_subcarriers:
        raise ValueError("n_active must lie in 0..n_subcarriers")
    if n_subcarriers < 1 or energy <= 0.0:
        raise ValueError("n_subcarriers and energy must be positive")
    if direct_gain < 0.0 or backscatter_gain < 0.0:
        raise ValueError("gains must be nonnegative")
    a, b = direct_gain, backscatter_gain
    idle = n_subcarriers - n_active
    return (idle * a * a + n_active * (a + b) ** 2) * energy / n_subcarriers


def im_bit_count(n_subcarriers: int, n_active: int) -> int:
    """Bits carried by choosing n_active subcarriers out of n_subcarriers.

    floor(log2 C(n, k)), computed exactly in integer arithmetic.
    """
    if not 0 <= n_active <= n_subcarriers:
        raise ValueError("n_active must lie in 0..n_subcarriers")
    return comb(n_subcarriers, n_active).bit_length() - 1


def bri_ook(n_subcarriers: int, energy: float = 1.0) -> float:
    """Bits per unit of reflected energy for on-off keying.

    One bit per subcarrier while only the half carrying ones reflects,
    so the ratio is 2 / energy regardless of the subcarrier count.
    """
    if n_subcarriers < 1 or energy <= 0.0:
        raise ValueError("n_subcarriers and energy must be positive")
    return n_subcarriers / (0.5 * n_subcarriers * energy)


def bri_im(n_subcarriers: int, n_active: int, energy: float = 1.0) -> float:
    """Bits per unit of reflected energy for index modulation."""
    if not 1 <= n_active <= n_subcarriers:
        raise ValueError("n_active must lie in 1..n_subcarriers")
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    return im_bit_count(n_subcarriers, n_active) / (n_active * energy)


def data_rate(bits_per_symbol: float, symbol_duration_s: float) -> float:
    """Throughput in bits per second for one symbol per duration."""
    if bits_per_symbol < 0.0 or symbol_duration_s <= 0.0:
        raise ValueError("bad rate arguments")
    return bits_per_symbol / symbol_duration_s
