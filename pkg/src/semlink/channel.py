"""Frequency-selective OFDM link abstraction.

The link is modelled as per-subcarrier linear SNRs drawn from a seeded
tapped-delay-line fading process.  A single exponential effective-SNR
mapping collapses the non-uniform subcarrier SNRs into one AWGN-equivalent
figure, subcarriers can be split into quality-sorted subchannel groups,
and bit transmission corrupts each bit with the closed-form Gray-coded
4-QAM error probability of its subcarrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc, logsumexp


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x_lin: float) -> float:
    return 10.0 * np.log10(x_lin)


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def qam4_ber(snr_linear):
    """Bit error probability of Gray-coded 4-QAM at per-symbol SNR gamma."""
    return q_function(np.sqrt(np.asarray(snr_linear, dtype=float)))


@dataclass(frozen=True)
class McsProfile:
    """Modulation and coding scheme parameters.

    ``beta`` shapes the effective-SNR mapping and depends on the MCS; the
    default targets 4-QAM with a rate-1/2 code.
    """

    modulation_order: int = 4
    code_rate: float = 0.5
    beta: float = 1.0

    def __post_init__(self):
        if self.modulation_order < 2 or (self.modulation_order & (self.modulation_order - 1)) != 0:
            raise ValueError("modulation_order must be a power of two >= 2")
        if not 0.0 < self.code_rate <= 1.0:
            raise ValueError("code_rate must be in (0, 1]")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw: per-subcarrier linear SNRs for K subcarriers."""

    snr_linear: np.ndarray
    mean_snr_db: float
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.snr_linear, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("snr_linear must be a nonempty 1-D array")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("snr_linear entries must be finite and positive")
        object.__setattr__(self, "snr_linear", arr)
        arr.setflags(write=False)

    @property
    def num_subcarriers(self) -> int:
        return self.snr_linear.size


@dataclass(frozen=True)
class SubchannelPlan:
    """Three disjoint subcarrier index groups, best mean SNR first."""

    groups: tuple
    priorities: tuple = (1, 2, 3)

    def group_indices(self, group: int) -> np.ndarray:
        if group not in (1, 2, 3):
            raise ValueError("group must be 1, 2 or 3")
        return self.groups[group - 1]


def sample_channel(seed: int, K: int, mean_snr_db: float,
                   n_taps: int = 8, tap_decay: float = 0.5) -> ChannelRealization:
    """Draw one frequency-selective realization.

    Taps are complex Gaussian with exponentially decaying power (unit total
    power); the length-K frequency response is normalized per realization so
    the mean linear subcarrier SNR equals the requested mean exactly.  A
    single tap therefore degenerates to a flat AWGN channel at the mean SNR.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if n_taps < 1:
        raise ValueError("n_taps must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), K, n_taps)))
    powers = tap_decay ** np.arange(n_taps)
    powers = powers / powers.sum()
    taps = np.sqrt(powers / 2.0) * (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps))
    freq = np.fft.fft(taps, n=max(K, n_taps))[:K]
    gain = np.abs(freq) ** 2
    gain = gain / gain.mean()
    # Deep nulls are floored so SNRs stay strictly positive.
    gain = np.maximum(gain, 1e-9)
    snr = gain * db_to_linear(mean_snr_db)
    return ChannelRealization(snr_linear=snr, mean_snr_db=float(mean_snr_db), seed=int(seed))


def flat_channel(snr_db: float, K: int = 64, seed: int = 0) -> ChannelRealization:
    """Degenerate AWGN realization: every subcarrier at the same SNR."""
    snr = np.full(K, db_to_linear(snr_db))
    return ChannelRealization(snr_linear=snr, mean_snr_db=float(snr_db), seed=int(seed))


def effective_snr(snr_linear, beta: float) -> float:
    """Collapse per-subcarrier SNRs into one AWGN-equivalent linear SNR.

    Computes -beta * ln(mean(exp(-snr/beta))) in a numerically stable way;
    the result always lies in [min(snr), max(snr)].
    """
    arr = np.asarray(snr_linear, dtype=float)
    if arr.size == 0:
        raise ValueError("snr_linear must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("snr_linear entries must be finite")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    scaled = arr / beta
    if scaled.max() < 700.0:
        val = -beta * np.log(np.exp(-scaled).mean())
    else:
        # exp underflow territory: fall back to the stable evaluation.
        val = -beta * (logsumexp(-scaled) - np.log(arr.size))
    # Clip tiny numerical excursions outside the attainable range.
    return float(np.clip(val, arr.min(), arr.max()))


def effective_snr_db(snr_linear, beta: float) -> float:
    return linear_to_db(effective_snr(snr_linear, beta))


def partition_subchannels(realization: ChannelRealization, part_bit_lengths) -> SubchannelPlan:
    """Split subcarriers into three quality-sorted groups.

    Sizes are proportional to the three part bit lengths (largest-remainder
    rounding); the best-SNR subcarriers go to part 1.  Any part with nonzero
    length is guaranteed at least one subcarrier when K allows.
    """
    lengths = [int(x) for x in part_bit_lengths]
    if len(lengths) != 3:
        raise ValueError("part_bit_lengths must have exactly three entries")
    total = sum(lengths)
    if total <= 0:
        raise ValueError("part bit lengths must sum to > 0")
    if any(x < 0 for x in lengths):
        raise ValueError("part bit lengths must be non-negative")

    K = realization.num_subcarriers
    quotas = [K * l / total for l in lengths]
    sizes = [int(np.floor(q)) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    for _ in range(K - sum(sizes)):
        # Largest remainder wins; ties go to the lower part index.
        j = max(range(3), key=lambda i: (remainders[i], -i))
        sizes[j] += 1
        remainders[j] = -1.0
    # Every nonzero-length part needs at least one subcarrier.
    nonzero = sum(1 for l in lengths if l > 0)
    if K >= nonzero:
        for i in range(3):
            while lengths[i] > 0 and sizes[i] == 0:
                donor = max(range(3), key=lambda j: sizes[j])
                sizes[donor] -= 1
                sizes[i] += 1

    # Sort descending by SNR, ties broken by ascending subcarrier index.
    order = np.lexsort((np.arange(K), -realization.snr_linear))
    groups = []
    start = 0
    for s in sizes:
        idx = np.sort(order[start:start + s])
        idx.setflags(write=False)
        groups.append(idx)
        start += s
    return SubchannelPlan(groups=tuple(groups))


def group_esnr(realization: ChannelRealization, plan: SubchannelPlan,
               group: int, beta: float) -> float:
    """Effective SNR restricted to one subchannel group (linear)."""
    idx = plan.group_indices(group)
    if idx.size == 0:
        raise ValueError(f"subchannel group {group} is empty")
    return effective_snr(realization.snr_linear[idx], beta)


def group_esnr_db(realization: ChannelRealization, plan: SubchannelPlan,
                  group: int, beta: float) -> float:
    return linear_to_db(group_esnr(realization, plan, group, beta))


def transmit_bits(bits, realization: ChannelRealization, indices,
                  mcs: McsProfile, seed: int) -> np.ndarray:
    """Send hard bits over a subcarrier subset; flip each independently.

    Bits are mapped round-robin onto the (ascending-sorted) subcarrier
    indices; bit i flips with the 4-QAM error probability of its subcarrier.
    Output length equals input length; deterministic per seed.
    """
    idx = np.sort(np.asarray(indices, dtype=int))
    if idx.size == 0:
        raise ValueError("subcarrier index set must be nonempty")
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return bits.copy()
    per_bit_snr = realization.snr_linear[idx[np.arange(bits.size) % idx.size]]
    p_flip = qam4_ber(per_bit_snr)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    flips = rng.random(bits.size) < p_flip
    return bits ^ flips.astype(np.uint8)


def bit_flip_probs(realization: ChannelRealization, indices, n_bits: int) -> np.ndarray:
    """Per-bit flip probabilities for the same round-robin mapping."""
    idx = np.sort(np.asarray(indices, dtype=int))
    if idx.size == 0:
        raise ValueError("subcarrier index set must be nonempty")
    per_bit_snr = realization.snr_linear[idx[np.arange(n_bits) % idx.size]]
    return qam4_ber(per_bit_snr)
