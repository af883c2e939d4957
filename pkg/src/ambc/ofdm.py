"""OFDM symbol construction and recovery.

All transforms use the unitary DFT convention (1/sqrt(N) scaling in both
directions), so white noise keeps its per-sample variance when moving
between the time and subcarrier domains.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Domain(enum.Enum):
    """Which domain a block of samples lives in."""

    TIME_WITH_CP = "time_with_cp"
    TIME_NO_CP = "time_no_cp"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology: subcarrier count, cyclic-prefix length and timing."""

    n_subcarriers: int = 64
    n_cp: int = 16
    data_duration_s: float = 3.2e-6
    cp_duration_s: float = 0.8e-6

    def __post_init__(self) -> None:
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be a positive integer")
        if not 0 <= self.n_cp < self.n_subcarriers:
            # CP copies the tail of the body, so it cannot be longer than it.
            raise ValueError("n_cp must satisfy 0 <= n_cp < n_subcarriers")
        if self.data_duration_s <= 0.0 or self.cp_duration_s < 0.0:
            raise ValueError("symbol durations must be positive")

    @property
    def n_total(self) -> int:
        """Samples per transmitted symbol, prefix included."""
        return self.n_subcarriers + self.n_cp

    @property
    def symbol_duration_s(self) -> float:
        """Wall-clock duration of one prefixed symbol."""
        return self.data_duration_s + self.cp_duration_s


@dataclass
class ComplexSignal:
    """A block of complex samples tagged with the domain it lives in."""

    samples: np.ndarray
    domain: Domain

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")

    def __len__(self) -> int:
        return self.samples.size

    def power(self) -> float:
        """Total energy of the block (sum of squared magnitudes)."""
        return float(np.sum(np.abs(self.samples) ** 2))


@dataclass
class SymbolVector:
    """Data symbols, one per subcarrier, nominally +/- sqrt(energy) BPSK.

    The container does not police constellation membership (the modulator
    must also accept degenerate vectors such as all zeros); generate_symbols
    guarantees the BPSK invariant for everything it produces.
    """

    symbols: np.ndarray
    energy: float = 1.0

    def __post_init__(self) -> None:
        self.symbols = np.asarray(self.symbols, dtype=np.complex128)
        if self.symbols.ndim != 1 or self.symbols.size == 0:
            raise ValueError("symbols must be a non-empty vector")
        if self.energy <= 0.0:
            raise ValueError("energy must be positive")


def dft(v: ComplexSignal) -> ComplexSignal:
    """Unitary DFT of a time-domain block (no prefix)."""
    if v.domain is not Domain.TIME_NO_CP:
        raise ValueError("dft expects a time_no_cp signal")
    return ComplexSignal(np.fft.fft(v.samples, norm="ortho"), Domain.FREQUENCY)


def idft(v: ComplexSignal) -> ComplexSignal:
    """Unitary inverse DFT of a subcarrier-domain block."""
    if v.domain is not Domain.FREQUENCY:
        raise ValueError("idft expects a frequency signal")
    return ComplexSignal(np.fft.ifft(v.samples, norm="ortho"), Domain.TIME_NO_CP)


def generate_symbols(
    params: OfdmParams, energy: float, rng: np.random.Generator
) -> SymbolVector:
    """Draw independent equiprobable BPSK symbols for every subcarrier."""
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    signs = 2.0 * rng.integers(0, 2, size=params.n_subcarriers) - 1.0
    return SymbolVector(np.sqrt(energy) * signs.astype(np.complex128), energy)


def ofdm_modulate(s: SymbolVector, params: OfdmParams) -> ComplexSignal:
    """Inverse-transform a symbol vector and prepend its cyclic prefix."""
    if s.symbols.size != params.n_subcarriers:
        raise ValueError("symbol vector length does not match n_subcarriers")
    body = np.fft.ifft(s.symbols, norm="ortho")
    out = np.concatenate([body[params.n_subcarriers - params.n_cp :], body])
    return ComplexSignal(out, Domain.TIME_WITH_CP)


def ofdm_demodulate(z: ComplexSignal, params: OfdmParams) -> ComplexSignal:
    """Strip the cyclic prefix and transform back to the subcarrier domain."""
    if z.domain is not Domain.TIME_WITH_CP:
        raise ValueError("ofdm_demodulate expects a time_with_cp signal")
    if len(z) != params.n_total:
        raise ValueError("signal length does not match n_subcarriers + n_cp")
    body = z.samples[params.n_cp :]
    return ComplexSignal(np.fft.fft(body, norm="ortho"), Domain.FREQUENCY)


def modulation_matrix(params: OfdmParams) -> np.ndarray:
    """Explicit (n_total x n_subcarriers) matrix form of ofdm_modulate.

    Row block one repeats the last n_cp rows of the unitary inverse-DFT
    matrix (the prefix); row block two is the inverse-DFT matrix itself.
    Intended as a test oracle; the fast path never builds it.
    """
    n = params.n_subcarriers
    k = np.arange(n)
    finv = np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    return np.vstack([finv[n - params.n_cp :, :], finv])
