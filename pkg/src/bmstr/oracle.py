"""Brute-force references for tiny codes.

Everything here is exponential in some code parameter and exists to check the
production paths: full codebooks (k <= 16), exact bitwise MAP / ML / list
decoding, per-bit minimum distances, a block trellis over the 2^(mK) encoder
states (exact MAP and exact weight enumerators for a specific code when the
codebook is too large), and the exhaustive average over interleaver ensembles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .bounds import q_function
from .code_model import CodeSpec, frame_layout, validate
from .encoder import BmstCode, assemble_frame, encode_frame, kept_positions, parity_blocks
from .wef import IRWEFTable

MAX_K = 16
MAX_TRANSITIONS = 2**16
MAX_TUPLES = 2**16


class OracleSizeError(ValueError):
    pass


def _all_messages(k: int) -> np.ndarray:
    """All 2^k binary vectors; row index = sum_i u_i 2^i."""
    idx = np.arange(2**k, dtype=np.int64)[:, None]
    return ((idx >> np.arange(k)) & 1).astype(np.uint8)


@dataclass
class Codebook:
    messages: np.ndarray  # (2^k, k)
    codewords: np.ndarray  # (2^k, n)

    @property
    def k(self) -> int:
        return self.messages.shape[1]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]

    @property
    def size(self) -> int:
        return self.messages.shape[0]

    def weights(self) -> np.ndarray:
        return self.codewords.sum(axis=1, dtype=np.int64)

    def symbols(self) -> np.ndarray:
        return 1.0 - 2.0 * self.codewords

    @classmethod
    def from_generator(cls, G) -> "Codebook":
        G = np.asarray(G, dtype=np.int64) % 2
        k = G.shape[0]
        if k > MAX_K:
            raise OracleSizeError(f"k={k} exceeds the oracle limit {MAX_K}")
        msgs = _all_messages(k)
        return cls(messages=msgs, codewords=((msgs.astype(np.int64) @ G) % 2).astype(np.uint8))

    def generator(self) -> np.ndarray:
        rows = [int(1 << i) for i in range(self.k)]
        return self.codewords[rows]


def enumerate_codebook(code: BmstCode | CodeSpec) -> Codebook:
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    spec = code.spec
    if spec.k > MAX_K:
        raise OracleSizeError(f"K*L={spec.k} exceeds the oracle limit {MAX_K}")
    msgs = _all_messages(spec.k)
    bits, _ = encode_frame(code, msgs.reshape(-1, spec.L, spec.K))
    return Codebook(messages=msgs, codewords=bits)


def row_weights(code: BmstCode | CodeSpec) -> np.ndarray:
    """Hamming weights of the generator rows (codewords of the unit messages)."""
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    spec = code.spec
    eye = np.eye(spec.k, dtype=np.uint8).reshape(spec.k, spec.L, spec.K)
    bits, _ = encode_frame(code, eye)
    return bits.sum(axis=1, dtype=np.int64)


def dmin_per_bit(book: Codebook) -> np.ndarray:
    """d_min,i: smallest codeword weight among messages with u_i = 1."""
    w = book.weights()
    out = np.empty(book.k, dtype=np.int64)
    for i in range(book.k):
        out[i] = w[book.messages[:, i] == 1].min()
    return out


def dmin(book: Codebook) -> int:
    return int(dmin_per_bit(book).min())


def _metrics(y, book: Codebook, sigma: float) -> np.ndarray:
    """Log-likelihood (up to a constant) of every codeword: <y, x> / sigma^2."""
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    return y @ book.symbols().T / sigma**2


def map_decode(y, book: Codebook, sigma: float):
    """Exact bitwise MAP: returns (Pr(u_i = 0 | y), decisions). Ties decide 0."""
    y = np.asarray(y, dtype=np.float64)
    single = y.ndim == 1
    M = _metrics(y, book, sigma)
    llr = np.empty((M.shape[0], book.k))
    for i in range(book.k):
        one = book.messages[:, i] == 1
        llr[:, i] = logsumexp(M[:, ~one], axis=1) - logsumexp(M[:, one], axis=1)
    p0 = expit(llr)
    bits = (llr < 0).astype(np.uint8)
    return (p0[0], bits[0]) if single else (p0, bits)


def ml_decode(y, book: Codebook, rng: np.random.Generator | None = None):
    """Maximum-likelihood codeword; ties are broken uniformly with ``rng``.

    Returns (message, codeword) for one received vector.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    M = np.asarray(y, dtype=np.float64) @ book.symbols().T
    best = np.flatnonzero(M >= M.max() - 1e-12 * max(1.0, abs(M.max())))
    idx = best[0] if best.size == 1 else rng.choice(best)
    return book.messages[idx].copy(), book.codewords[idx].copy()


def _sphere(center: np.ndarray, radius: int) -> np.ndarray:
    k = center.size
    count = sum(math.comb(k, r) for r in range(min(radius, k) + 1))
    if count > 2**MAX_K:
        raise OracleSizeError(f"Hamming sphere holds {count} sequences")
    out = []
    for r in range(min(radius, k) + 1):
        for pos in itertools.combinations(range(k), r):
            v = center.copy()
            v[list(pos)] ^= 1
            out.append(v)
    return np.array(out, dtype=np.uint8)


def list_decode(y, code: BmstCode | CodeSpec, r_star: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """List decoding around the systematic hard decisions.

    The hard decisions on the systematic part define a Hamming sphere of radius
    ``r_star``; every message in it is re-encoded and the one closest to ``y``
    in Euclidean distance is returned, shape (L, K).
    """
    if isinstance(code, CodeSpec):
        code = BmstCode(code)
    spec = code.spec
    y = np.asarray(y, dtype=np.float64)
    from .decoder import split_llrs  # systematic positions of the frame

    sys, _ = split_llrs(y, code)
    center = (sys.reshape(-1) < 0).astype(np.uint8)
    cands = _sphere(center, r_star)
    bits, _ = encode_frame(code, cands.reshape(-1, spec.L, spec.K))
    book = Codebook(messages=cands, codewords=bits)
    msg, _ = ml_decode(y, book, rng)
    return msg.reshape(spec.L, spec.K)


# -- block trellis -------------------------------------------------------------

class BlockTrellis:
    """Trellis of a specific code whose state is the last m input blocks.

    States are integers holding u(t-1) in the low K bits, u(t-2) in the next K,
    and so on. Stage t < L takes any K-bit input; tail stages take zero only.
    """

    def __init__(self, code: BmstCode):
        spec = code.spec
        self.code, self.spec = code, spec
        K, m = spec.K, spec.m
        self.S = 2 ** (m * K)
        self.U = 2**K
        if self.S * self.U > MAX_TRANSITIONS:
            raise OracleSizeError(f"{self.S} states x {self.U} inputs exceeds {MAX_TRANSITIONS} transitions")
        self.low = 2 ** ((m - 1) * K) if m else 1
        blocks = _all_messages(K)  # (U, K), row index = block integer
        states = np.arange(self.S)
        hist = np.stack([blocks[(states >> (j * K)) & (self.U - 1)] for j in range(m)], axis=1) \
            if m else np.zeros((self.S, 0, K), dtype=np.uint8)
        par = np.zeros((self.S, self.U, spec.N - 1, K), dtype=np.uint8)
        for i in range(spec.N - 1):
            par[:, :, i, :] ^= blocks[:, code.perms[i, 0]][None, :, :]
            for j in range(1, m + 1):
                par[:, :, i, :] ^= hist[:, j - 1][:, code.perms[i, j]][:, None, :]
        full = par[:, :, :-1, :].reshape(self.S, self.U, -1)
        last = par[:, :, -1, :][:, :, code.keep]
        self.parity = np.concatenate([full, last], axis=-1)  # (S, U, parity_bits)
        self.blocks = blocks
        self.parity_weight = self.parity.sum(axis=-1, dtype=np.int64)
        self.input_weight = blocks.sum(axis=1, dtype=np.int64)

    def next_state(self, s, u):
        if self.spec.m == 0:
            return np.zeros(np.broadcast(s, u).shape, dtype=np.int64)
        return u + (np.asarray(s) % self.low) * self.U

    def _stage_metrics(self, y_sys, y_par, sigma2):
        """Branch metrics (B, S, U) for one stage; y_sys may be None (tail)."""
        x_par = 1.0 - 2.0 * self.parity.reshape(self.S * self.U, -1)
        g = ((y_par / sigma2) @ x_par.T).reshape(-1, self.S, self.U)
        if y_sys is not None:
            g += ((y_sys / sigma2) @ (1.0 - 2.0 * self.blocks).T)[:, None, :]
        return g

    def map_decode(self, y, sigma: float, chunk: int = 64):
        """Exact bitwise MAP by forward-backward over the block trellis.

        ``y`` is (n,) or (B, n) channel outputs. Returns LLRs ln Pr(0)/Pr(1)
        shaped (..., L, K) and hard decisions (ties decide 0).
        """
        spec = self.spec
        y = np.asarray(y, dtype=np.float64)
        single = y.ndim == 1
        y = np.atleast_2d(y)
        out = np.empty((y.shape[0], spec.L, spec.K))
        for a in range(0, y.shape[0], chunk):
            out[a:a + chunk] = self._map_chunk(y[a:a + chunk], sigma**2)
        bits = (out < 0).astype(np.uint8)
        return (out[0], bits[0]) if single else (out, bits)

    def _split(self, y):
        lay = frame_layout(self.spec)
        offs = lay.layer_offsets()
        K = self.spec.K
        res = []
        for t in range(self.spec.L + self.spec.m):
            seg = y[:, offs[t]:offs[t + 1]]
            res.append((seg[:, :K], seg[:, K:]) if t < self.spec.L else (None, seg))
        return res

    def _map_chunk(self, y, sigma2):
        # probability domain, each stage scaled by its largest branch metric
        spec = self.spec
        B, S, U, m = y.shape[0], self.S, self.U, spec.m
        old, low = (U, self.low) if m else (1, 1)
        E = []
        for t, (ys, yp) in enumerate(self._split(y)):
            g = self._stage_metrics(ys, yp, sigma2)
            if t >= spec.L:
                g[:, :, 1:] = -np.inf
            g -= g.max(axis=(1, 2), keepdims=True)
            E.append(np.exp(g, out=g).reshape(B, old, low, U))
        # the next state of (s_old, s_low, u) is s_low * U + u, independent of s_old
        alpha = [np.zeros((B, S))]
        alpha[0][:, 0] = 1.0
        for e in E:
            a = alpha[-1].reshape(B, old, low).transpose(0, 2, 1)[:, :, None, :]  # (B, low, 1, old)
            new = np.matmul(a, e.transpose(0, 2, 1, 3))[:, :, 0, :].reshape(B, -1)
            if m == 0:
                new = new.sum(axis=1, keepdims=True)
            alpha.append(new / new.sum(axis=1, keepdims=True))
        beta = np.zeros((B, S))
        beta[:, 0] = 1.0
        llr = np.empty((B, spec.L, spec.K))
        ubits = self.blocks.astype(np.float64)
        with np.errstate(divide="ignore"):
            for t in range(len(E) - 1, -1, -1):
                joint = E[t]
                joint *= (beta.reshape(B, 1, low, U) if m else beta[:, :, None, None])
                if t < spec.L:
                    post = np.matmul(alpha[t][:, None, :], joint.reshape(B, S, U))[:, 0, :]
                    p1 = post @ ubits
                    p0 = post.sum(axis=1, keepdims=True) - p1
                    llr[:, t] = np.log(np.maximum(p0, 0.0)) - np.log(p1)
                beta = joint.reshape(B, S, U).sum(axis=2)
                beta /= beta.sum(axis=1, keepdims=True)
        return llr

    def irwef(self, T: int | None = None) -> IRWEFTable:
        """Exact IRWEF of this specific code, input weights up to T."""
        spec = self.spec
        T = spec.k if T is None else min(T, spec.k)
        I = T + 1
        pw = self.parity.shape[-1]
        J = pw * (spec.L + spec.m) + 1
        S, U = self.S, self.U
        cnt = np.zeros((S, I, J))
        cnt[0, 0, 0] = 1.0
        nxt = self.next_state(np.arange(S)[:, None], np.arange(U)[None, :])
        for t in range(spec.L + spec.m):
            new = np.zeros_like(cnt)
            inputs = range(U) if t < spec.L else [0]
            for u in inputs:
                wx = self.input_weight[u]
                if wx >= I:
                    continue
                for wy in np.unique(self.parity_weight[:, u]):
                    src = np.flatnonzero(self.parity_weight[:, u] == wy)
                    for dst in np.unique(nxt[src, u]):
                        sel = src[nxt[src, u] == dst]
                        block = cnt[sel].sum(axis=0)
                        new[dst, wx:, wy:] += block[:I - wx, :J - wy]
            cnt = new
        return IRWEFTable(A=cnt[0], T=T, k=spec.k)

    def dmin_per_bit(self) -> np.ndarray:
        """d_min,i for every message bit, by min-plus passes over the trellis."""
        spec = self.spec
        S, U = self.S, self.U
        nxt = self.next_state(np.arange(S)[:, None], np.arange(U)[None, :])
        nstages = spec.L + spec.m
        w = [self.parity_weight + (self.input_weight[None, :] if t < spec.L else 0) for t in range(nstages)]
        allowed = [np.ones(U, dtype=bool) if t < spec.L else (np.arange(U) == 0) for t in range(nstages)]
        inf = np.iinfo(np.int64).max // 4
        fwd = [np.full(S, inf, dtype=np.int64)]
        fwd[0][0] = 0
        for t in range(nstages):
            new = np.full(S, inf, dtype=np.int64)
            cost = np.where(allowed[t][None, :], fwd[t][:, None] + w[t], inf)
            np.minimum.at(new, nxt.reshape(-1), cost.reshape(-1))
            fwd.append(new)
        bwd = [None] * (nstages + 1)
        bwd[nstages] = np.where(np.arange(S) == 0, 0, inf)
        for t in range(nstages - 1, -1, -1):
            cost = np.where(allowed[t][None, :], w[t] + bwd[t + 1][nxt], inf)
            bwd[t] = cost.min(axis=1)
        out = np.empty(spec.k, dtype=np.int64)
        ubits = self.blocks.astype(bool)
        for t in range(spec.L):
            total = fwd[t][:, None] + w[t] + bwd[t + 1][nxt]  # (S, U)
            best_u = total.min(axis=0)
            for b in range(spec.K):
                out[t * spec.K + b] = best_u[ubits[:, b]].min()
        return out


# -- ensemble average ----------------------------------------------------------

def _irwef_from_codewords(msgs: np.ndarray, bits: np.ndarray, k: int, n: int) -> np.ndarray:
    i = msgs.sum(axis=1)
    j = bits.sum(axis=1) - i
    A = np.zeros((k + 1, n - k + 1))
    np.add.at(A, (i, j), 1.0)
    return A


def ensemble_irwef_exhaustive(spec: CodeSpec, per_layer: bool = True) -> IRWEFTable:
    """Average IRWEF over every interleaver assignment (and puncture pattern).

    With ``per_layer`` the (m+1)(N-1) interleavers and the puncture pattern are
    drawn afresh for every layer, which is the ensemble the weight trellis
    describes. Without it one fixed set is shared by all layers.
    """
    validate(spec)
    K, L, m, N, Kp = spec.K, spec.L, spec.m, spec.N, spec.Kp
    if spec.k > 12:
        raise OracleSizeError(f"K*L={spec.k} exceeds 12")
    layers = L + m if per_layer else 1
    n_perm = layers * (m + 1) * (N - 1)
    perms = list(itertools.permutations(range(K)))
    patterns = list(itertools.combinations(range(K), Kp))
    total = len(perms) ** n_perm * len(patterns) ** layers
    if total > MAX_TUPLES:
        raise OracleSizeError(f"{total} interleaver/puncture assignments exceed {MAX_TUPLES}")
    msgs = _all_messages(spec.k)
    u = msgs.reshape(-1, L, K)
    n = frame_layout(spec).n
    acc = np.zeros((spec.k + 1, n - spec.k + 1))
    count = 0
    for ptuple in itertools.product(perms, repeat=n_perm):
        P = np.array(ptuple, dtype=np.intp).reshape(layers, N - 1, m + 1, K)
        if not per_layer:
            P = P[0]
        par = parity_blocks(u, P, m)
        for pats in itertools.product(patterns, repeat=layers):
            keep = np.array([kept_positions(K, np.array(p, dtype=np.intp)) for p in pats])
            bits = assemble_frame(u, par, keep if per_layer else keep[0])
            acc += _irwef_from_codewords(msgs, bits, spec.k, n)
            count += 1
    return IRWEFTable(A=acc / count, T=spec.k, k=spec.k)


def specific_irwef(code: BmstCode) -> IRWEFTable:
    """Exact IRWEF of one code from its full codebook."""
    book = enumerate_codebook(code)
    return IRWEFTable(A=_irwef_from_codewords(book.messages, book.codewords, book.k, book.n),
                      T=book.k, k=book.k)


# -- toy product code ----------------------------------------------------------

CODE_A = Codebook.from_generator([[1, 0]])  # {00, 10}, d_min = 1
CODE_B = Codebook.from_generator([[1, 1]])  # {00, 11}, d_min = 2


def product_code_ber(J: int, sigma: float) -> float:
    """Exact MAP BER of A x B^J: one weak bit and J bits at distance 2."""
    return (q_function(1.0 / sigma) + J * q_function(math.sqrt(2.0) / sigma)) / (J + 1)


def simulate_product_code(J: int, sigma: float, frames: int, rng: np.random.Generator) -> tuple[int, int]:
    """Monte Carlo exact-MAP decoding of A x B^J; returns (bit errors, bits).

    The product code's MAP decoder factors into independent MAP decoders of the
    components, each run here on its own 2-word codebook.
    """
    errors = 0
    for book, count in ((CODE_A, 1), (CODE_B, J)):
        B = frames * count
        msg = rng.integers(0, 2, size=B)
        x = book.symbols()[msg]
        y = x + sigma * rng.standard_normal(x.shape)
        _, dec = map_decode(y, book, sigma)
        errors += int(np.sum(dec[:, 0] != book.messages[msg, 0]))
    return errors, frames * (J + 1)
