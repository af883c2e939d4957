"""Reader-side detection of the tag message from per-subcarrier samples.

Both the tag-on and tag-off hypotheses leave the received symbol on the
real axis (gains are co-phased), so detection works on the real part:
its magnitude against a midpoint threshold, or the exact likelihood
ratio that accounts for the unknown BPSK sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ofdm import ComplexSignal, Domain
from .tag import OutOfCodebookError, SubcarrierMask, _usable_bits, im_decode


class DetectorMode(enum.Enum):
    THRESHOLD = "threshold"
    EXACT_ML = "exact_ml"


@dataclass(frozen=True)
class DetectorConfig:
    """Channel knowledge the reader detects with.

    direct_gain is the source-to-reader amplitude, backscatter_gain the
    tag's round-trip amplitude; both are the co-phased (real) values.
    """

    direct_gain: float
    backscatter_gain: float
    n0: float
    energy: float = 1.0
    mode: DetectorMode = DetectorMode.THRESHOLD

    def __post_init__(self) -> None:
        if self.direct_gain < 0.0 or self.backscatter_gain < 0.0:
            raise ValueError("gains must be nonnegative")
        if self.n0 <= 0.0 or self.energy <= 0.0:
            raise ValueError("n0 and energy must be positive")


@dataclass
class DetectionResult:
    """Detected message plus the per-subcarrier decision amplitudes."""

    amplitudes: np.ndarray
    bits: np.ndarray | None = None
    recovered_index: int | None = None
    out_of_codebook: bool = False


def optimal_threshold(cfg: DetectorConfig) -> float:
    """Midpoint between the two hypothesis amplitudes, in |real part| units."""
    return (2.0 * cfg.direct_gain + cfg.backscatter_gain) * np.sqrt(cfg.energy) / 2.0


def _real_part(r: ComplexSignal) -> np.ndarray:
    if r.domain is not Domain.FREQUENCY:
        raise ValueError("detection expects a frequency-domain signal")
    return r.samples.real


def detect_ook_threshold(r: ComplexSignal, cfg: DetectorConfig) -> DetectionResult:
    """Declare tag-on wherever |Re r_l| exceeds the midpoint threshold.

    Ties resolve to 0 (strict comparison).
    """
    amplitudes = np.abs(_real_part(r))
    bits = (amplitudes > optimal_threshold(cfg)).astype(np.int64)
    return DetectionResult(amplitudes=amplitudes, bits=bits)


def _log_cosh(t: np.ndarray) -> np.ndarray:
    # log(cosh(t)) without overflow: |t| + log1p(exp(-2|t|)) - log(2).
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def detect_ook_exact_ml(r: ComplexSignal, cfg: DetectorConfig) -> DetectionResult:
    """Exact per-subcarrier likelihood-ratio test, BPSK sign marginalized.

    Declares tag-on iff
        logcosh(c1 x) - logcosh(c0 x) > (2 A a + a^2) E / N0,
    where x = Re r_l, c0 = 2 A sqrt(E) / N0 and c1 = 2 (A + a) sqrt(E) / N0.
    """
    x = _real_part(r)
    amp = np.sqrt(cfg.energy)
    c0 = 2.0 * cfg.direct_gain * amp / cfg.n0
    c1 = 2.0 * (cfg.direct_gain + cfg.backscatter_gain) * amp / cfg.n0
    offset = (
        (2.0 * cfg.direct_gain + cfg.backscatter_gain)
        * cfg.backscatter_gain
        * cfg.energy
        / cfg.n0
    )
    llr = _log_cosh(c1 * x) - _log_cosh(c0 * x) - offset
    bits = (llr > 0.0).astype(np.int64)
    return DetectionResult(amplitudes=np.abs(x), bits=bits)


def detect_im(r: ComplexSignal, n_active: int, cfg: DetectorConfig) -> DetectionResult:
    """Pick the n_active strongest subcarriers and decode their set rank.

    Ties keep the lowest subcarrier index.  A top set outside the
    codebook clamps to the largest message and flags out_of_codebook.
    """
    if r.domain is not Domain.FREQUENCY:
        raise ValueError("detection expects a frequency-domain signal")
    n = len(r)
    if not 1 <= n_active <= n:
        raise ValueError("n_active must lie in 1..len(r)")
    amplitudes = np.abs(r.samples)
    order = np.argsort(-amplitudes, kind="stable")
    mask = np.zeros(n, dtype=np.int64)
    mask[order[:n_active]] = 1
    detected = SubcarrierMask(mask)
    try:
        index = im_decode(detected, n_active)
        clipped = False
    except OutOfCodebookError:
        index = 2 ** _usable_bits(n, n_active) - 1
        clipped = True
    return DetectionResult(
        amplitudes=amplitudes,
        bits=detected.mask,
        recovered_index=index,
        out_of_codebook=clipped,
    )
