"""Systematic BMST-R codes: encoder, sliding-window decoder, ensemble weight
enumerators, MAP bit-error bounds and a Monte Carlo harness."""

from .code_model import (CodeSpec, FrameLayout, SpecError, complexity_estimate, decoding_latency_bits,
                         frame_layout, terminated_rate, unterminated_rate, validate)
from .encoder import BmstCode, Encoder, encode_frame
from .channel import ChannelParams, awgn_transmit, block_fading_transmit, llr
from .decoder import DecoderConfig, WindowDecoder, decode_frame, hard_decision_decode
from .wef import IRWEFTable, compute_irwef, crwef_closed_form, spectrum
from .bounds import (lower_bound_ensemble, lower_bound_per_bit, plan_code, required_memory,
                     shannon_limit_snr, upper_bound_truncated)
from .simulator import SimRecord, SweepConfig, emit_csv, run_sweep

__version__ = "0.1.0"
