"""BPSK over AWGN and block Rayleigh fading, plus SNR bookkeeping.

SNR is ``10 log10(1 / sigma^2)`` with unit-energy BPSK symbols (0 -> +1, 1 -> -1).
LLRs are positive when bit 0 is more likely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .code_model import CodeSpec, layer_bits

LLR_CLIP = 50.0


def sigma_from_snr_db(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 20.0)


def snr_db_from_sigma(sigma: float) -> float:
    return -20.0 * math.log10(sigma)


def ebn0_db(rate: float, snr_db: float) -> float:
    """E_b/N_0 in dB for a code of rate ``rate`` at the given SNR."""
    if not 0 < rate < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    return snr_db - 10.0 * math.log10(2.0 * float(rate))


def snr_db_from_ebn0(rate: float, ebn0: float) -> float:
    if not 0 < rate < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    return ebn0 + 10.0 * math.log10(2.0 * float(rate))


@dataclass(frozen=True)
class ChannelParams:
    sigma: float
    coherence_len: int | None = None
    noise_seed: int = 0
    fading_seed: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.coherence_len is not None and self.coherence_len < 1:
            raise ValueError(f"coherence length must be >= 1, got {self.coherence_len}")

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "ChannelParams":
        return cls(sigma=sigma_from_snr_db(snr_db), **kw)

    @property
    def snr_db(self) -> float:
        return snr_db_from_sigma(self.sigma)

    def noise_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.noise_seed))

    def fading_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.fading_seed))


@dataclass
class ReceivedFrame:
    y: np.ndarray
    a: np.ndarray


def bpsk_modulate(bits) -> np.ndarray:
    bits = np.asarray(bits)
    return 1.0 - 2.0 * bits.astype(np.float64)


def awgn_transmit(symbols, params: ChannelParams, rng: np.random.Generator | None = None) -> ReceivedFrame:
    symbols = np.asarray(symbols, dtype=np.float64)
    rng = params.noise_rng() if rng is None else rng
    y = symbols + params.sigma * rng.standard_normal(symbols.shape)
    return ReceivedFrame(y=y, a=np.ones_like(symbols))


def fading_coefficients(shape, coherence_len: int, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh amplitudes with E[a^2] = 1, constant over runs of ``coherence_len``
    symbols along the last axis and independent across runs."""
    shape = (int(shape),) if np.isscalar(shape) else tuple(shape)
    n = shape[-1]
    runs = -(-n // coherence_len)
    a = rng.rayleigh(scale=1.0 / math.sqrt(2.0), size=shape[:-1] + (runs,))
    return np.repeat(a, coherence_len, axis=-1)[..., :n]


def block_fading_transmit(symbols, params: ChannelParams,
                          rng: np.random.Generator | None = None,
                          fading_rng: np.random.Generator | None = None) -> ReceivedFrame:
    """y = a * s + z with block Rayleigh ``a`` (known at the receiver)."""
    if params.coherence_len is None:
        raise ValueError("block fading needs a coherence length")
    symbols = np.asarray(symbols, dtype=np.float64)
    fading_rng = params.fading_rng() if fading_rng is None else fading_rng
    rng = params.noise_rng() if rng is None else rng
    a = fading_coefficients(symbols.shape, params.coherence_len, fading_rng)
    y = a * symbols + params.sigma * rng.standard_normal(symbols.shape)
    return ReceivedFrame(y=y, a=a)


def llr(received: ReceivedFrame, params: ChannelParams | float) -> np.ndarray:
    sigma = params.sigma if isinstance(params, ChannelParams) else float(params)
    out = 2.0 * received.a * received.y / sigma**2
    return np.clip(out, -LLR_CLIP, LLR_CLIP)


def fades_per_layer(spec: CodeSpec, coherence_len: int) -> Fraction:
    """Independent fading values seen by one data layer, (N*K - K_p) / B_f."""
    return Fraction(layer_bits(spec), coherence_len)
