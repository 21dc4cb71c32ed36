"""Systematic BMST-R encoder.

Each data block ``u(t)`` is sent as is; parity branch ``i`` (1 <= i <= N-1) of
layer ``t`` is the mod-2 sum of ``Pi[i, j](u(t - j))`` over ``0 <= j <= m``.
The last branch has ``K_p`` bits removed at a fixed pattern. After ``L`` data
blocks, ``m`` zero blocks drive the encoder back to the all-zero state and only
their parity is transmitted.

Interleaver convention: ``Pi(v)[k] = v[perm[k]]``.

All randomness comes from numpy's PCG64 generator seeded with the 64-bit seeds
of the CodeSpec; permutations are drawn with ``Generator.permutation`` (a
Fisher-Yates shuffle) in the order (1,0), (1,1), ..., (1,m), (2,0), ...
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .code_model import CodeSpec, FrameLayout, frame_layout, validate


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Interleaver:
    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.intp)
        if sorted(perm.tolist()) != list(range(perm.size)):
            raise ValueError("interleaver is not a permutation")
        object.__setattr__(self, "perm", perm)

    @property
    def size(self) -> int:
        return self.perm.size

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v)[..., self.perm]

    def invert(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w)[..., self.inverse]


def build_interleavers(spec: CodeSpec) -> list[Interleaver]:
    """The (m+1)(N-1) interleavers of ``spec``, in (i, j) order."""
    validate(spec)
    rng = make_rng(spec.interleaver_seed)
    return [Interleaver(rng.permutation(spec.K)) for _ in range(spec.num_interleavers)]


def build_puncture_pattern(spec: CodeSpec) -> np.ndarray:
    """Sorted positions of branch N-1 removed in every layer."""
    if not 0 <= spec.Kp <= spec.K:
        raise ValueError(f"K_p={spec.Kp} outside [0, {spec.K}]")
    if spec.Kp == 0:
        return np.zeros(0, dtype=np.intp)
    rng = make_rng(spec.puncture_seed)
    return np.sort(rng.choice(spec.K, size=spec.Kp, replace=False)).astype(np.intp)


def kept_positions(K: int, pattern: np.ndarray) -> np.ndarray:
    keep = np.ones(K, dtype=bool)
    keep[np.asarray(pattern, dtype=np.intp)] = False
    return np.flatnonzero(keep)


class BmstCode:
    """A concrete code: spec plus its interleavers and puncture pattern.

    ``perms`` may be overridden (shape ``(N-1, m+1, K)``), e.g. with identity
    interleavers for hand-checked examples.
    """

    def __init__(self, spec: CodeSpec, perms: np.ndarray | None = None,
                 pattern: np.ndarray | None = None):
        self.spec = validate(spec)
        N, m, K = spec.N, spec.m, spec.K
        if perms is None:
            ils = build_interleavers(spec)
            perms = np.array([il.perm for il in ils], dtype=np.intp).reshape(N - 1, m + 1, K)
        perms = np.asarray(perms, dtype=np.intp)
        if perms.shape != (N - 1, m + 1, K):
            raise ValueError(f"perms must have shape {(N - 1, m + 1, K)}, got {perms.shape}")
        for p in perms.reshape(-1, K):
            Interleaver(p)  # bijection check
        self.perms = perms
        self.inv_perms = np.argsort(perms, axis=-1)
        self.pattern = build_puncture_pattern(spec) if pattern is None else np.sort(np.asarray(pattern, dtype=np.intp))
        if self.pattern.size != spec.Kp:
            raise ValueError(f"puncture pattern must have {spec.Kp} positions")
        self.keep = kept_positions(K, self.pattern)
        self.layout: FrameLayout = frame_layout(spec)

    @classmethod
    def identity(cls, spec: CodeSpec) -> "BmstCode":
        N, m, K = spec.N, spec.m, spec.K
        return cls(spec, perms=np.broadcast_to(np.arange(K), (N - 1, m + 1, K)).copy())

    def interleavers(self) -> list[Interleaver]:
        return [Interleaver(p) for p in self.perms.reshape(-1, self.spec.K)]

    def encode(self, u: np.ndarray) -> np.ndarray:
        return encode_frame(self, u)[0]


def parity_blocks(u: np.ndarray, perms: np.ndarray, m: int) -> np.ndarray:
    """Parity branches for every layer of a terminated frame.

    ``u`` has shape (..., L, K). ``perms`` is (N-1, m+1, K) for fixed interleavers
    or (L+m, N-1, m+1, K) for layer-dependent ones. Returns (..., L+m, N-1, K)
    uint8 before puncturing.
    """
    u = np.asarray(u, dtype=np.uint8)
    L, K = u.shape[-2:]
    T = L + m
    N1 = perms.shape[-3]
    rows = np.arange(L)[:, None, None]
    out = np.zeros(u.shape[:-2] + (T, N1, K), dtype=np.uint8)
    for j in range(m + 1):
        # layers t = j .. j+L-1 receive u(t - j)
        idx = perms[j:j + L, :, j, :] if perms.ndim == 4 else perms[None, :, j, :]
        out[..., j:j + L, :, :] ^= u[..., rows, idx]
    return out


def assemble_frame(u: np.ndarray, parity: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Flatten systematic and (punctured) parity bits in layer-major order.

    ``keep`` is (K-K_p,) for a fixed pattern or (L+m, K-K_p) per layer.
    """
    u = np.asarray(u, dtype=np.uint8)
    L = u.shape[-2]
    T = parity.shape[-3]
    lead = u.shape[:-2]
    last = parity[..., -1, :]  # (..., T, K)
    if keep.ndim == 1:
        last = last[..., keep]
    else:
        last = np.take_along_axis(last, np.broadcast_to(keep, lead + keep.shape), axis=-1)
    full = parity[..., :-1, :].reshape(lead + (T, -1))
    par = np.concatenate([full, last], axis=-1)  # (..., T, parity_bits)
    data = np.concatenate([u, par[..., :L, :]], axis=-1).reshape(lead + (-1,))
    tail = par[..., L:, :].reshape(lead + (-1,))
    return np.concatenate([data, tail], axis=-1)


def encode_frame(code: BmstCode | CodeSpec, u) -> tuple[np.ndarray, FrameLayout]:
    """Encode L blocks (shape (L, K), or (B, L, K) for a batch) into frame bits."""
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    spec = code.spec
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-2:] != (spec.L, spec.K):
        raise ValueError(f"expected message blocks of shape (L={spec.L}, K={spec.K}), got {u.shape}")
    if np.any(u > 1):
        raise ValueError("message must be binary")
    par = parity_blocks(u, code.perms, spec.m)
    return assemble_frame(u, par, code.keep), code.layout


@dataclass
class CodewordBlock:
    systematic: np.ndarray | None
    parity: list[np.ndarray]
    punctured: np.ndarray
    puncture_positions: np.ndarray

    def bits(self) -> np.ndarray:
        parts = ([] if self.systematic is None else [self.systematic]) + list(self.parity) + [self.punctured]
        return np.concatenate(parts).astype(np.uint8)


@dataclass
class EncoderState:
    """Last m input blocks, newest first (all branches share them)."""

    history: np.ndarray

    @classmethod
    def zero(cls, m: int, K: int) -> "EncoderState":
        return cls(np.zeros((m, K), dtype=np.uint8))

    def is_zero(self) -> bool:
        return not self.history.any()


@dataclass
class Encoder:
    """Block-by-block encoder, one layer per call."""

    code: BmstCode
    state: EncoderState = field(init=False)

    def __post_init__(self):
        self.state = EncoderState.zero(self.code.spec.m, self.code.spec.K)

    def encode_block(self, u_t, _tail: bool = False) -> CodewordBlock:
        spec = self.code.spec
        u_t = np.asarray(u_t, dtype=np.uint8)
        if u_t.shape != (spec.K,):
            raise ValueError(f"block must have length K={spec.K}, got shape {u_t.shape}")
        window = np.concatenate([u_t[None, :], self.state.history], axis=0)  # u(t-j), j=0..m
        branches = []
        for i in range(spec.N - 1):
            c = np.zeros(spec.K, dtype=np.uint8)
            for j in range(spec.m + 1):
                c ^= window[j][self.code.perms[i, j]]
            branches.append(c)
        if spec.m:
            self.state.history = window[:-1].copy()
        return CodewordBlock(
            systematic=None if _tail else u_t.copy(),
            parity=branches[:-1],
            punctured=branches[-1][self.code.keep],
            puncture_positions=self.code.pattern,
        )

    def terminate(self) -> list[CodewordBlock]:
        zero = np.zeros(self.code.spec.K, dtype=np.uint8)
        return [self.encode_block(zero, _tail=True) for _ in range(self.code.spec.m)]
