"""Code parameters for systematic BMST-R codes and the figures derived from them.

A code instance is fully described by :class:`CodeSpec`: repetition degree ``N``,
subsequence length ``K``, punctured bits per layer ``K_p``, number of data
blocks ``L``, encoding memory ``m`` and two seeds (interleavers, puncturing).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Any

SEED_BOUND = 2**64


class SpecError(ValueError):
    """Raised when a CodeSpec violates one of its invariants.

    ``invariant`` holds the name of the first violated rule.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


@dataclass(frozen=True)
class CodeSpec:
    repetition_degree: int
    info_block_len: int
    puncture_len: int
    data_blocks: int
    memory: int
    interleaver_seed: int = 0
    puncture_seed: int = 0

    # short aliases used throughout the numerics
    @property
    def N(self) -> int:
        return self.repetition_degree

    @property
    def K(self) -> int:
        return self.info_block_len

    @property
    def Kp(self) -> int:
        return self.puncture_len

    @property
    def L(self) -> int:
        return self.data_blocks

    @property
    def m(self) -> int:
        return self.memory

    @property
    def theta(self) -> Fraction:
        """Puncturing fraction K_p / K, kept exact."""
        return Fraction(self.puncture_len, self.info_block_len)

    @property
    def num_layers(self) -> int:
        return self.data_blocks + self.memory

    @property
    def num_interleavers(self) -> int:
        return (self.memory + 1) * (self.repetition_degree - 1)

    @property
    def k(self) -> int:
        return self.info_block_len * self.data_blocks

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["interleaver_seed"] = str(self.interleaver_seed)
        d["puncture_seed"] = str(self.puncture_seed)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CodeSpec":
        d = {_ALIASES.get(k, k): v for k, v in d.items()}
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise SpecError("fields", f"unknown field(s) {sorted(unknown)}")
        missing = names - set(d) - {"interleaver_seed", "puncture_seed"}
        if missing:
            raise SpecError("fields", f"missing field(s) {sorted(missing)}")
        return cls(**{k: int(v) for k, v in d.items()})

    @classmethod
    def from_json(cls, text: str) -> "CodeSpec":
        return cls.from_dict(json.loads(text))


_ALIASES = {"N": "repetition_degree", "K": "info_block_len", "Kp": "puncture_len",
            "L": "data_blocks", "m": "memory"}


@dataclass(frozen=True)
class FrameLayout:
    """Bit counts of one terminated frame.

    Data layers carry ``K`` systematic bits followed by the parity bits; tail
    layers carry parity only.
    """

    systematic_bits: int
    parity_bits: int
    data_layers: int
    tail_layers: int

    @property
    def data_layer_bits(self) -> int:
        return self.systematic_bits + self.parity_bits

    @property
    def tail_layer_bits(self) -> int:
        return self.parity_bits

    @property
    def n(self) -> int:
        return self.data_layers * self.data_layer_bits + self.tail_layers * self.parity_bits

    @property
    def k(self) -> int:
        return self.data_layers * self.systematic_bits

    def layer_bits(self, t: int) -> int:
        return self.data_layer_bits if t < self.data_layers else self.tail_layer_bits

    def layer_offsets(self) -> list[int]:
        """Start index of every layer in the flat frame (length L+m+1)."""
        out = [0]
        for t in range(self.data_layers + self.tail_layers):
            out.append(out[-1] + self.layer_bits(t))
        return out


def validate(spec: CodeSpec) -> CodeSpec:
    """Return ``spec`` unchanged if it is a usable code, else raise SpecError."""
    if spec.repetition_degree < 2:
        raise SpecError("repetition_degree", f"N={spec.repetition_degree} < 2, no parity branch exists")
    if spec.info_block_len < 1:
        raise SpecError("info_block_len", f"K={spec.info_block_len} < 1")
    if spec.data_blocks < 1:
        raise SpecError("data_blocks", f"L={spec.data_blocks} < 1")
    if spec.memory < 0:
        raise SpecError("memory", f"m={spec.memory} < 0")
    if not 0 <= spec.puncture_len <= spec.info_block_len:
        raise SpecError("puncture_len", f"K_p={spec.puncture_len} outside [0, K={spec.info_block_len}]")
    if spec.puncture_len == spec.info_block_len:
        if spec.repetition_degree == 2:
            raise SpecError("puncture_fraction", "theta=1 with N=2 leaves no redundancy (rate 1)")
        raise SpecError("puncture_fraction", "theta=1 removes the whole last branch; use N-1 instead")
    for name in ("interleaver_seed", "puncture_seed"):
        seed = getattr(spec, name)
        if not 0 <= seed < SEED_BOUND:
            raise SpecError(name, f"{seed} is not a 64-bit unsigned integer")
    return spec


def frame_layout(spec: CodeSpec) -> FrameLayout:
    K, N = spec.info_block_len, spec.repetition_degree
    return FrameLayout(
        systematic_bits=K,
        parity_bits=K * (N - 1) - spec.puncture_len,
        data_layers=spec.data_blocks,
        tail_layers=spec.memory,
    )


def terminated_rate(spec: CodeSpec) -> Fraction:
    """Exact rate K*L / n of the zero-tail terminated code."""
    layout = frame_layout(validate(spec))
    return Fraction(layout.k, layout.n)


def unterminated_rate(spec: CodeSpec) -> Fraction:
    """1 / (N - theta), the rate without the zero tail."""
    return 1 / (spec.repetition_degree - spec.theta)


def layer_bits(spec: CodeSpec) -> int:
    """Bits emitted for one data layer: N*K - K_p."""
    return frame_layout(spec).data_layer_bits


def decoding_latency_bits(spec: CodeSpec, d: int) -> int:
    """Latency of the sliding-window decoder with delay ``d``, in bits."""
    if d < 0:
        raise ValueError(f"decoding delay must be >= 0, got {d}")
    return layer_bits(spec) * (d + 1)


def complexity_estimate(spec: CodeSpec, d: int) -> int:
    """Decoding work in units of N*m*d (node updates per decided layer, up to a constant)."""
    return spec.repetition_degree * spec.memory * d
