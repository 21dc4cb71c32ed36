"""Monte Carlo BER/FER/WER sweeps over an SNR grid."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import (ChannelParams, awgn_transmit, block_fading_transmit, bpsk_modulate,
                      ebn0_db, llr, sigma_from_snr_db)
from .code_model import CodeSpec, terminated_rate
from .decoder import DecoderConfig, WindowDecoder, hard_decision_decode
from .encoder import BmstCode, encode_frame

log = logging.getLogger(__name__)

CSV_HEADER = ["snr_db", "ebn0_db", "frames", "bit_errors", "frame_errors", "word_errors",
              "ber", "fer", "wer", "seconds", "seed"]
MODES = ("window", "hard")


@dataclass(frozen=True)
class SweepConfig:
    spec: CodeSpec
    snr_db: tuple[float, ...]
    decoder: DecoderConfig | None = None
    mode: str = "window"
    min_bit_errors: int = 100
    max_frames: int = 10_000
    master_seed: int = 0
    coherence_len: int | None = None
    batch_frames: int = 32

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if not self.snr_db:
            raise ValueError("SNR grid is empty")
        if self.min_bit_errors < 1:
            raise ValueError("min_bit_errors must be >= 1")
        if self.max_frames < 1 or self.batch_frames < 1:
            raise ValueError("max_frames and batch_frames must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "window" and self.decoder is None:
            object.__setattr__(self, "decoder", DecoderConfig(delay=2 * self.spec.m))


@dataclass
class SimRecord:
    snr_db: float
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    word_errors: int
    ber: float
    fer: float
    wer: float
    seconds: float = field(default=0.0, compare=False)
    seed: int = 0
    stopped_by: str = field(default="", compare=False)


def point_seed(master_seed: int, index: int) -> int:
    """Seed of SNR point ``index``; independent of the rest of the grid."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, dtype=np.uint64)[0])


def _chunk_rngs(seed: int, chunk: int) -> tuple[np.random.Generator, np.random.Generator]:
    ss = np.random.SeedSequence([seed, chunk])
    data, fade = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(data)), np.random.Generator(np.random.PCG64(fade))


def simulate_point(code: BmstCode, cfg: SweepConfig, snr_db: float, seed: int) -> SimRecord:
    spec = code.spec
    sigma = sigma_from_snr_db(snr_db)
    params = ChannelParams(sigma=sigma, coherence_len=cfg.coherence_len)
    dec = WindowDecoder(code, cfg.decoder) if cfg.mode == "window" else None
    frames = bit_err = frame_err = word_err = 0
    chunk = 0
    t0 = time.perf_counter()
    while frames < cfg.max_frames and bit_err < cfg.min_bit_errors:
        B = min(cfg.batch_frames, cfg.max_frames - frames)
        rng, fade_rng = _chunk_rngs(seed, chunk)
        u = rng.integers(0, 2, size=(B, spec.L, spec.K), dtype=np.uint8)
        x = bpsk_modulate(encode_frame(code, u)[0])
        if cfg.coherence_len is None:
            rx = awgn_transmit(x, params, rng=rng)
        else:
            rx = block_fading_transmit(x, params, rng=rng, fading_rng=fade_rng)
        lam = llr(rx, params)
        u_hat = dec.decode(lam) if dec is not None else hard_decision_decode(lam, code)
        wrong = u_hat != u
        bit_err += int(wrong.sum())
        frame_err += int(wrong.any(axis=(1, 2)).sum())
        word_err += int(wrong.any(axis=2).sum())
        frames += B
        chunk += 1
    seconds = time.perf_counter() - t0
    k = spec.k
    return SimRecord(
        snr_db=snr_db,
        ebn0_db=ebn0_db(float(terminated_rate(spec)), snr_db),
        frames=frames, bit_errors=bit_err, frame_errors=frame_err, word_errors=word_err,
        ber=bit_err / (k * frames), fer=frame_err / frames, wer=word_err / (spec.L * frames),
        seconds=seconds, seed=seed,
        stopped_by="min_errors" if bit_err >= cfg.min_bit_errors else "max_frames",
    )


def run_sweep(cfg: SweepConfig, code: BmstCode | None = None) -> list[SimRecord]:
    """Simulate every SNR point of ``cfg`` and return one record per point."""
    code = BmstCode(cfg.spec) if code is None else code
    out = []
    for idx, snr in enumerate(cfg.snr_db):
        rec = simulate_point(code, cfg, snr, point_seed(cfg.master_seed, idx))
        log.info("snr=%.3f dB frames=%d ber=%.3g fer=%.3g (%s)", snr, rec.frames, rec.ber, rec.fer, rec.stopped_by)
        out.append(rec)
    return out


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def emit_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text: str) -> list[SimRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    ints = {"frames", "bit_errors", "frame_errors", "word_errors", "seed"}
    return [SimRecord(**{k: (int(v) if k in ints else float(v)) for k, v in row.items()}) for row in rows]
