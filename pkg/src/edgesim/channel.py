"""Block-fading data channel: Rayleigh gain draws, received SNR, maximal
ratio combining of retransmissions, and AWGN corruption of a payload.

The channel is abstracted at the received-SNR level: complex Rayleigh
fading enters only through the gain power |h|^2 ~ Exponential(1), and a
payload received at combined SNR g carries additive real Gaussian noise
of variance P_SIG / g per component. Payloads are normalized upstream so
the reference signal power P_SIG is 1.
"""

import math
from dataclasses import dataclass

import numpy as np

P_SIG = 1.0


def db_to_linear(db):
    """Convert decibels to a linear power ratio."""
    if not math.isfinite(db):
        raise ValueError(f"dB value must be finite, got {db}")
    return 10.0 ** (db / 10.0)


def linear_to_db(value):
    """Convert a positive linear power ratio to decibels."""
    if not value > 0:
        raise ValueError(f"linear power ratio must be > 0, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class TxSnr:
    """Per-block transmit SNR before fading, as a linear power ratio."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"transmit SNR must be > 0, got {self.value}")

    @classmethod
    def from_db(cls, db):
        return cls(db_to_linear(db))

    @property
    def db(self):
        return linear_to_db(self.value)


@dataclass(frozen=True)
class ChannelDraw:
    """One resource block's fading gain power and resulting received SNR."""

    gain_power: float
    received_snr: float


def draw_block(rng, tx_snr):
    """Draw one block: gain power |h|^2 ~ Exp(1), received SNR = |h|^2 * tx."""
    g = float(rng.standard_exponential())
    return ChannelDraw(g, g * tx_snr.value)


def mrc_combine(draws):
    """Output SNR after maximal ratio combining: the sum of branch SNRs."""
    if not draws:
        raise ValueError("cannot MRC-combine an empty list of draws")
    return float(sum(d.received_snr for d in draws))


@dataclass
class CombinedSignal:
    """Noisy payload estimate after combining one or more blocks."""

    payload_estimate: np.ndarray
    combined_snr: float
    blocks_used: int


def corrupt_payload(payload, combined_snr, rng, blocks_used=1, p_sig=P_SIG):
    """Corrupt `payload` with i.i.d. Gaussian noise of variance p_sig / combined_snr."""
    payload = np.asarray(payload, dtype=np.float64)
    if payload.size == 0:
        raise ValueError("payload must be nonempty")
    if not combined_snr > 0:
        raise ValueError(f"combined SNR must be > 0, got {combined_snr}")
    sigma = math.sqrt(p_sig / combined_snr)
    estimate = payload + sigma * rng.standard_normal(payload.shape)
    return CombinedSignal(estimate, float(combined_snr), int(blocks_used))
