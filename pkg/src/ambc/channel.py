"""Flat-fading link model for the RIS-assisted backscatter geometry.

Each of the three links (source to tag, source to reader, tag to reader)
is a line-of-sight path plus a set of co-phased reflector paths, which
collapses into a single complex gain per link once the surface aligns the
phases.  The tag's round trip is the product of the forward gain, the
tag attenuation and the backward gain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ofdm import ComplexSignal


class GainDistribution(enum.Enum):
    """How individual reflector amplitudes are drawn."""

    UNIFORM = "uniform_nonneg"
    FIXED = "fixed"


@dataclass(frozen=True)
class RisLinkConfig:
    """One link: a line-of-sight path plus q co-phased reflector paths."""

    q_reflectors: int = 0
    los_gain: float = 1.0
    los_phase_rad: float = 0.0
    gain_mean: float = 0.2
    gain_distribution: GainDistribution = GainDistribution.UNIFORM

    def __post_init__(self) -> None:
        if self.q_reflectors < 0:
            raise ValueError("q_reflectors must be nonnegative")
        if self.los_gain <= 0.0:
            raise ValueError("los_gain must be positive")
        if self.gain_mean <= 0.0:
            raise ValueError("gain_mean must be positive")


@dataclass(frozen=True)
class CompositeGains:
    """Per-link complex gains for one channel realization.

    `dyadic` is the tag's round-trip gain backward * tag_attenuation *
    forward; construction rejects inconsistent values.
    """

    forward: complex
    direct: complex
    backward: complex
    tag_attenuation: float
    dyadic: complex

    def __post_init__(self) -> None:
        if not 0.0 <= self.tag_attenuation <= 1.0:
            raise ValueError("tag_attenuation must lie in [0, 1]")
        expected = self.backward * self.tag_attenuation * self.forward
        if abs(self.dyadic - expected) > 1e-12 * (1.0 + abs(expected)):
            raise ValueError("dyadic gain inconsistent with its factors")


def sample_reflector_gains(cfg: RisLinkConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw the q reflector amplitudes for one realization.

    UNIFORM draws from [0, 2 * gain_mean] (mean gain_mean, variance
    gain_mean^2 / 3); FIXED returns gain_mean for every reflector.
    """
    if cfg.gain_distribution is GainDistribution.FIXED:
        return np.full(cfg.q_reflectors, cfg.gain_mean)
    return rng.uniform(0.0, 2.0 * cfg.gain_mean, size=cfg.q_reflectors)


def composite_gain_aligned(
    los_gain: float, los_phase_rad: float, reflector_gains: np.ndarray
) -> complex:
    """Collapse a link into one complex gain under perfect phase alignment.

    With every reflector steered onto the line-of-sight phase the
    amplitudes add coherently and the common phase factors out.
    """
    gains = np.asarray(reflector_gains, dtype=float)
    if los_gain <= 0.0:
        raise ValueError("los_gain must be positive")
    if gains.size and gains.min() < 0.0:
        raise ValueError("reflector gains must be nonnegative")
    return complex((los_gain + gains.sum()) * np.exp(-1j * los_phase_rad))


def build_composite(
    forward_cfg: RisLinkConfig,
    direct_cfg: RisLinkConfig,
    backward_cfg: RisLinkConfig,
    tag_attenuation: float,
    rng: np.random.Generator,
) -> CompositeGains:
    """Realize all three links and the round-trip gain.

    Draw order is fixed (forward, direct, backward) so a given generator
    state always produces the same realization.
    """
    if not 0.0 <= tag_attenuation <= 1.0:
        raise ValueError("tag_attenuation must lie in [0, 1]")
    forward = composite_gain_aligned(
        forward_cfg.los_gain,
        forward_cfg.los_phase_rad,
        sample_reflector_gains(forward_cfg, rng),
    )
    direct = composite_gain_aligned(
        direct_cfg.los_gain,
        direct_cfg.los_phase_rad,
        sample_reflector_gains(direct_cfg, rng),
    )
    backward = composite_gain_aligned(
        backward_cfg.los_gain,
        backward_cfg.los_phase_rad,
        sample_reflector_gains(backward_cfg, rng),
    )
    dyadic = backward * tag_attenuation * forward
    return CompositeGains(forward, direct, backward, tag_attenuation, dyadic)


def apply_flat_channel(x: ComplexSignal, gain: complex) -> ComplexSignal:
    """Scale a signal by a single complex gain (frequency-flat channel)."""
    return ComplexSignal(gain * x.samples, x.domain)


def add_awgn(y: ComplexSignal, n0: float, rng: np.random.Generator) -> ComplexSignal:
    """Add circularly symmetric complex Gaussian noise of variance n0 per sample."""
    if n0 <= 0.0:
        raise ValueError("n0 must be positive")
    n = len(y)
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return ComplexSignal(y.samples + np.sqrt(n0 / 2.0) * noise, y.domain)


def coverage_ratio(
    n_backward_reflectors: int,
    gain_mean_sq: float = 0.5,
    gain_var: float = 1.0,
    direct_path_gain: float = 1.0,
) -> float:
    """Ratio of tag-to-reader coverage radius with the surface to without.

    Grows like sqrt(q^2 * mean^2 + q * variance) / direct_path_gain, where
    q counts the backward-link reflectors; q = 0 recovers ratio 0 (no
    reflected path at all).
    """
    if n_backward_reflectors < 0:
        raise ValueError("reflector count must be nonnegative")
    if gain_mean_sq < 0.0 or gain_var < 0.0:
        raise ValueError("moments must be nonnegative")
    if direct_path_gain <= 0.0:
        raise ValueError("direct_path_gain must be positive")
    q = float(n_backward_reflectors)
    return float(
        np.sqrt((q * q * gain_mean_sq + q * gain_var) / direct_path_gain**2)
    )
