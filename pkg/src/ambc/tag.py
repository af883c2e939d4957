"""Tag-side modulation: on-off keying and subcarrier index modulation.

The tag toggles its reflection per subcarrier, which multiplies the
incident symbol vector by a 0/1 mask.  For index modulation the mask has
exactly k active subcarriers and the message is the rank of the active
set in lexicographic order; only the first 2**usable_bits ranks form the
codebook.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb

import numpy as np

from .ofdm import ComplexSignal, Domain, OfdmParams, modulation_matrix


class Modulation(enum.Enum):
    """Tag operating mode."""

    OOK = "ook"
    IM = "im"


class OutOfCodebookError(ValueError):
    """An active-subcarrier set whose rank falls outside the codebook."""


@dataclass(frozen=True)
class SubcarrierMask:
    """Per-subcarrier reflect (1) / absorb (0) pattern."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        # Validate before the integer cast; casting first would truncate
        # fractional entries into valid-looking 0s.
        arr = np.asarray(self.mask)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("mask must be a non-empty vector")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "mask", arr.astype(np.int64))

    def __len__(self) -> int:
        return self.mask.size

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class TagMessage:
    """What the tag wants to send in one symbol period."""

    modulation: Modulation
    ook_bits: np.ndarray | None = None
    im_index: int | None = None

    def __post_init__(self) -> None:
        if self.modulation is Modulation.OOK:
            if self.ook_bits is None:
                raise ValueError("OOK message needs ook_bits")
            bits = np.asarray(self.ook_bits)
            if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
                raise ValueError("ook_bits must be a vector of 0/1")
            object.__setattr__(self, "ook_bits", bits.astype(np.int64))
        else:
            if self.im_index is None or self.im_index < 0:
                raise ValueError("IM message needs a nonnegative im_index")


def _usable_bits(n: int, k: int) -> int:
    """floor(log2 C(n, k)), exact in integer arithmetic."""
    return comb(n, k).bit_length() - 1


def ook_mask(bits: np.ndarray) -> SubcarrierMask:
    """One on-off bit per subcarrier; the mask is the bit vector itself."""
    return SubcarrierMask(np.asarray(bits))


def im_encode(index: int, n_subcarriers: int, n_active: int) -> SubcarrierMask:
    """Mask for the index-th k-subset of subcarriers in lexicographic order.

    Valid indices are 0 .. 2**usable_bits - 1 where usable_bits =
    floor(log2 C(n, k)); the remaining subsets are never transmitted.
    """
    n, k = n_subcarriers, n_active
    if not 1 <= k <= n:
        raise ValueError("n_active must lie in 1..n_subcarriers")
    if not 0 <= index < 2 ** _usable_bits(n, k):
        raise ValueError("index outside the codebook")
    mask = np.zeros(n, dtype=np.int64)
    remainder = index
    candidate = 0
    for remaining in range(k, 0, -1):
        # Skip leading candidates whose subtree of subsets is too small.
        while comb(n - candidate - 1, remaining - 1) <= remainder:
            remainder -= comb(n - candidate - 1, remaining - 1)
            candidate += 1
        mask[candidate] = 1
        candidate += 1
    return SubcarrierMask(mask)


def im_decode(mask: SubcarrierMask, n_active: int | None = None) -> int:
    """Lexicographic rank of the mask's active set.

    When n_active is given, a mask with a different number of active
    subcarriers is rejected.  Raises OutOfCodebookError when the rank is
    representable as a subset but not as a message (rank >= 2**usable_bits).
    """
    n = len(mask)
    members = np.flatnonzero(mask.mask)
    k = members.size
    if k == 0:
        raise ValueError("mask has no active subcarriers")
    if n_active is not None and k != n_active:
        raise ValueError(f"mask has {k} active subcarriers, expected {n_active}")
    rank = 0
    previous = 0
    remaining = k
    for m in members:
        for skipped in range(previous, int(m)):
            rank += comb(n - skipped - 1, remaining - 1)
        previous = int(m) + 1
        remaining -= 1
    if rank >= 2 ** _usable_bits(n, k):
        raise OutOfCodebookError(f"active set rank {rank} is outside the codebook")
    return rank


def backscatter(
    u: ComplexSignal, mask: SubcarrierMask, tag_attenuation: float, params: OfdmParams
) -> ComplexSignal:
    """Reflect the incident symbol with per-subcarrier gating.

    Equivalent to stripping the prefix, masking in the subcarrier domain,
    rebuilding the prefixed waveform and scaling by the tag attenuation.
    """
    if u.domain is not Domain.TIME_WITH_CP:
        raise ValueError("backscatter expects a time_with_cp signal")
    if len(u) != params.n_total:
        raise ValueError("signal length does not match n_subcarriers + n_cp")
    if len(mask) != params.n_subcarriers:
        raise ValueError("mask length does not match n_subcarriers")
    if not 0.0 <= tag_attenuation <= 1.0:
        raise ValueError("tag_attenuation must lie in [0, 1]")
    spectrum = np.fft.fft(u.samples[params.n_cp :], norm="ortho")
    body = np.fft.ifft(spectrum * mask.mask, norm="ortho")
    out = np.concatenate([body[params.n_subcarriers - params.n_cp :], body])
    return ComplexSignal(tag_attenuation * out, Domain.TIME_WITH_CP)


def backscatter_matrix(mask: SubcarrierMask, params: OfdmParams) -> np.ndarray:
    """Explicit (n_total x n_total) matrix form of the unattenuated reflection.

    Prefix samples of the input are discarded (zero block), the body is
    transformed, gated per subcarrier and re-modulated.  Test oracle for
    the fast path in `backscatter`.
    """
    if len(mask) != params.n_subcarriers:
        raise ValueError("mask length does not match n_subcarriers")
    n = params.n_subcarriers
    k = np.arange(n)
    fwd = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    discard_cp = np.hstack([np.zeros((n, params.n_cp)), fwd])
    return modulation_matrix(params) @ np.diag(mask.mask.astype(float)) @ discard_cp
