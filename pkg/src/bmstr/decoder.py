"""Sliding-window iterative decoding over the layered normal graph.

Layer ``t`` holds one equality node (the K bits of ``u(t)``) and ``N-1`` check
nodes (parity branches). Equality node ``t`` is wired to check node ``(t+j, i)``
through interleaver ``Pi[i, j]``. A window of ``d+1`` layers is decoded with a
flooding schedule (all check nodes, then all equality nodes) until the entropy
criterion fires or ``max_iterations`` is reached; then the oldest (target) layer
is decided and the window slides by one layer.

Messages are stored per edge in the information-bit domain and persist as the
window moves: check nodes that have not yet entered the window send 0, and
equality nodes that have left it keep sending their last message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LLR_CLIP
from .code_model import CodeSpec
from .encoder import BmstCode

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DecoderConfig:
    delay: int
    max_iterations: int = 18
    entropy_threshold: float = 1e-6

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.entropy_threshold > 0:
            raise ValueError("entropy threshold must be positive")


@dataclass(frozen=True)
class LayerGraph:
    """Per-layer node and edge counts of the normal graph."""

    equality_degree: int  # full edges, excluding the systematic half-edge
    check_nodes: int
    check_degree: int  # full edges per check node, excluding the parity half-edge
    interleaver_edges: int
    punctured_positions: int


def layer_graph(spec: CodeSpec) -> LayerGraph:
    n_edges = (spec.m + 1) * (spec.N - 1)
    return LayerGraph(
        equality_degree=n_edges,
        check_nodes=spec.N - 1,
        check_degree=spec.m + 1,
        interleaver_edges=n_edges,
        punctured_positions=spec.Kp,
    )


def boxplus(x, y):
    """2 atanh(tanh(x/2) tanh(y/2)) in sign-magnitude form.

    The two correction terms are evaluated exactly with log1p.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ax, ay = np.abs(x), np.abs(y)
    return (np.sign(x) * np.sign(y) * np.minimum(ax, ay)
            + np.log1p(np.exp(-np.abs(x + y))) - np.log1p(np.exp(-np.abs(x - y))))


def check_node_update(incoming, axis: int = 0) -> np.ndarray:
    """Extrinsic outputs of a parity constraint, one per incoming edge along ``axis``."""
    msgs = np.moveaxis(np.asarray(incoming, dtype=np.float64), axis, 0)
    D = msgs.shape[0]
    if D < 2:
        raise ValueError("a check node needs at least two edges")
    pre = [msgs[0]]
    for k in range(1, D - 1):
        pre.append(boxplus(pre[-1], msgs[k]))
    suf = [msgs[D - 1]]
    for k in range(D - 2, 0, -1):
        suf.append(boxplus(msgs[k], suf[-1]))
    suf = suf[::-1]  # suf[k-1] combines msgs[k:]
    out = np.empty_like(msgs)
    out[0] = suf[0]
    out[D - 1] = pre[D - 2]
    for k in range(1, D - 1):
        out[k] = boxplus(pre[k - 1], suf[k])
    return np.moveaxis(out, 0, axis)


def equality_node_update(incoming, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Extrinsic outputs and posterior of a repetition (equality) constraint."""
    msgs = np.asarray(incoming, dtype=np.float64)
    total = msgs.sum(axis=axis, keepdims=True)
    out = np.clip(total - msgs, -LLR_CLIP, LLR_CLIP)
    return out, np.clip(np.squeeze(total, axis=axis), -LLR_CLIP, LLR_CLIP)


def mean_binary_entropy(llrs, axis=None) -> np.ndarray:
    """Mean entropy (bits) of the bit distributions described by ``llrs``."""
    a = np.abs(np.asarray(llrs, dtype=np.float64))
    e = np.exp(-a)
    h = (np.log1p(e) + a * e / (1.0 + e)) / _LN2
    return h.mean(axis=axis)


def entropy_stop(current, previous, threshold: float = 1e-6):
    """True where the mean entropy moved by less than ``threshold`` since the last iteration."""
    if previous is None:
        return np.zeros(np.shape(current), dtype=bool) if np.ndim(current) else False
    return np.abs(np.asarray(current) - np.asarray(previous)) < threshold


def split_llrs(llrs, code: BmstCode) -> tuple[np.ndarray, np.ndarray]:
    """Flat frame LLRs -> systematic (..., L, K) and parity (..., L+m, N-1, K).

    Punctured parity positions get LLR 0.
    """
    spec, lay = code.spec, code.layout
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[-1] != lay.n:
        raise ValueError(f"expected {lay.n} LLRs per frame, got {llrs.shape[-1]}")
    lead = llrs.shape[:-1]
    K, L, m, N1 = spec.K, spec.L, spec.m, spec.N - 1
    P = lay.parity_bits
    data = llrs[..., :L * (K + P)].reshape(lead + (L, K + P))
    tail = llrs[..., L * (K + P):].reshape(lead + (m, P))
    sys = data[..., :K]
    flat = np.concatenate([data[..., K:], tail], axis=-2)
    par = np.zeros(lead + (L + m, N1, K))
    par[..., :N1 - 1, :] = flat[..., :(N1 - 1) * K].reshape(lead + (L + m, N1 - 1, K))
    last = np.zeros(lead + (L + m, K))
    last[..., code.keep] = flat[..., (N1 - 1) * K:]
    par[..., N1 - 1, :] = last
    return sys, par


def hard_decision_decode(llrs, code: BmstCode | CodeSpec) -> np.ndarray:
    """Sign of the systematic channel LLRs; parity is ignored."""
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    sys, _ = split_llrs(llrs, code)
    return (sys < 0).astype(np.uint8)


class WindowDecoder:
    def __init__(self, code: BmstCode, cfg: DecoderConfig):
        self.code = code
        self.cfg = cfg
        spec = code.spec
        n1 = np.arange(spec.N - 1)[:, None]
        # gather index per (j): check-domain position k reads u-domain perms[i, j, k]
        self._fwd = [(n1, code.perms[:, j, :]) for j in range(spec.m + 1)]
        self._inv = [(n1, code.inv_perms[:, j, :]) for j in range(spec.m + 1)]

    def decode(self, llrs, return_posteriors: bool = False):
        """Decode one frame (n,) or a batch (B, n) of channel LLRs.

        Returns decided message bits shaped (L, K) or (B, L, K), and the final
        target-layer posteriors if requested.
        """
        llrs = np.asarray(llrs, dtype=np.float64)
        single = llrs.ndim == 1
        llrs = np.clip(np.atleast_2d(llrs), -LLR_CLIP, LLR_CLIP)
        spec, cfg = self.code.spec, self.cfg
        B, K, L, m, N1 = llrs.shape[0], spec.K, spec.L, spec.m, spec.N - 1
        T = L + m
        sys, par = split_llrs(llrs, self.code)
        prior = np.full((B, T, K), LLR_CLIP)
        prior[:, :L] = sys
        up = np.repeat(np.repeat(prior[:, :, None, None, :], N1, axis=2), m + 1, axis=3)
        down = np.zeros_like(up)

        bits = np.zeros((B, L, K), dtype=np.uint8)
        posts = np.zeros((B, L, K))
        for t in range(L):
            b = min(t + cfg.delay, T - 1)
            e = min(b, L - 1)
            lo = max(t - m, 0)
            active = np.ones(B, dtype=bool)
            h_prev = None
            for it in range(cfg.max_iterations):
                frozen = ~active
                if frozen.any():
                    saved_down = down[frozen, lo:b + 1].copy()
                    saved_up = up[frozen, t:e + 1].copy()
                self._check_pass(up, down, par, t, b)
                self._equality_pass(prior, up, down, t, e)
                if frozen.any():
                    down[frozen, lo:b + 1] = saved_down
                    up[frozen, t:e + 1] = saved_up
                post = prior[:, t:e + 1] + down[:, t:e + 1].sum(axis=(2, 3))
                h = mean_binary_entropy(post.reshape(B, -1), axis=1)
                active &= ~entropy_stop(h, h_prev, cfg.entropy_threshold)
                h_prev = h
                if not active.any():
                    break
            post_t = np.clip(prior[:, t] + down[:, t].sum(axis=(1, 2)), -LLR_CLIP, LLR_CLIP)
            posts[:, t] = post_t
            bits[:, t] = post_t < 0

        if single:
            bits, posts = bits[0], posts[0]
        return (bits, posts) if return_posteriors else bits

    def _check_pass(self, up, down, par, a, b):
        B, K = up.shape[0], up.shape[-1]
        nS = b - a + 1
        inputs = [par[:, a:b + 1]]
        spans = []
        for j in range(self.code.spec.m + 1):
            src_lo, src_hi = max(a - j, 0), b - j
            skip = src_lo - (a - j)  # layers whose source is before t=0 (known zero)
            msg = np.full((B, nS) + up.shape[2:3] + (K,), LLR_CLIP)
            if src_hi >= src_lo:
                msg[:, skip:] = up[:, src_lo:src_hi + 1, :, j, :][..., self._fwd[j][0], self._fwd[j][1]]
            inputs.append(msg)
            spans.append((src_lo, src_hi, skip))
        ext = check_node_update(np.stack(inputs))
        for j, (src_lo, src_hi, skip) in enumerate(spans):
            if src_hi >= src_lo:
                out = ext[j + 1][:, skip:]
                down[:, src_lo:src_hi + 1, :, j, :] = out[..., self._inv[j][0], self._inv[j][1]]

    @staticmethod
    def _equality_pass(prior, up, down, a, e):
        dn = down[:, a:e + 1]
        total = prior[:, a:e + 1] + dn.sum(axis=(2, 3))
        np.clip(total[:, :, None, None, :] - dn, -LLR_CLIP, LLR_CLIP, out=up[:, a:e + 1])


def decode_frame(llrs, code: BmstCode | CodeSpec, cfg: DecoderConfig, return_posteriors: bool = False):
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    return WindowDecoder(code, cfg).decode(llrs, return_posteriors=return_posteriors)
