"""Ensemble weight enumerators of systematic BMST-R codes.

With uniform interleavers and random puncturing drawn independently per layer,
the parity weight of a layer depends only on the Hamming weights of the last
m+1 information blocks. The average input-redundancy weight enumerator (IRWEF)
is then obtained from a trellis whose states are the weight vectors of the
previous m blocks, running over the polynomial ring in X (input weight) and
Y (redundancy weight).

Polynomials in Y are plain 1-D float arrays indexed by degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

from .code_model import CodeSpec, validate

OVERFLOW_SENTINEL = 1e300
DEFAULT_MAX_CELLS = 30_000_000


class ResourceLimitError(RuntimeError):
    pass


def _log_binom(n, k):
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    ok = (k >= 0) & (k <= n)
    with np.errstate(invalid="ignore"):
        out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.where(ok, out, -np.inf)


@lru_cache(maxsize=None)
def binom_float(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


@lru_cache(maxsize=8)
def superposition_table(K: int) -> np.ndarray:
    """G[p, q, r] = g(r | p, q): weight of the sum of a weight-p vector and a
    uniformly interleaved weight-q vector of length K."""
    p = np.arange(K + 1)[:, None, None]
    q = np.arange(K + 1)[None, :, None]
    r = np.arange(K + 1)[None, None, :]
    w = p + q - r
    half = w // 2
    logg = _log_binom(q, half) + _log_binom(K - q, p - half) - _log_binom(K, p)
    g = np.where((w >= 0) & (w % 2 == 0), np.exp(logg), 0.0)
    g.setflags(write=False)
    return g


def superpose_dist(p: int, q: int, K: int) -> np.ndarray:
    if not (0 <= p <= K and 0 <= q <= K):
        raise ValueError(f"weights must lie in [0, {K}]")
    return superposition_table(K)[p, q].copy()


def branch_dist(p, q0: int, K: int) -> np.ndarray:
    """f(r | p, q0): parity weight of one branch given the current block weight q0
    and previous block weights p."""
    G = superposition_table(K)
    alpha = np.zeros(K + 1)
    alpha[q0] = 1.0
    for pj in p:
        alpha = alpha @ G[:, pj, :]
    return alpha


@lru_cache(maxsize=32)
def thinning_matrix(K: int, Kp: int) -> np.ndarray:
    """H[r, s]: probability that a weight-r vector keeps weight s after K_p of its
    K positions are removed at random."""
    r = np.arange(K + 1)[:, None]
    s = np.arange(K + 1)[None, :]
    w = r - s  # ones removed
    logh = _log_binom(r, w) + _log_binom(K - r, Kp - w) - _log_binom(K, Kp)
    H = np.where(w >= 0, np.exp(logh), 0.0)
    H.setflags(write=False)
    return H


def punctured_branch_dist(p, q0: int, K: int, Kp: int) -> np.ndarray:
    if not 0 <= Kp <= K:
        raise ValueError(f"K_p={Kp} outside [0, {K}]")
    return branch_dist(p, q0, K) @ thinning_matrix(K, Kp)


def _polymul_last(a: np.ndarray, b: np.ndarray, length: int | None = None) -> np.ndarray:
    """Row-wise polynomial product along the last axis."""
    n = a.shape[-1] + b.shape[-1] - 1
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (n,)
    out = np.zeros(shape)
    for d in range(a.shape[-1]):
        out[..., d:d + b.shape[-1]] += a[..., d:d + 1] * b
    return out if length is None else out[..., :length]


@dataclass
class IRWEFTable:
    """Truncated IRWEF: ``A[i, j]`` for input weight ``i <= T``.

    If ``max_weight`` is set, only entries with ``i + j <= max_weight`` were kept.
    """

    A: np.ndarray
    T: int
    k: int
    max_weight: int | None = None

    def row(self, i: int) -> np.ndarray:
        return self.A[i]

    def count(self, i: int) -> float:
        return float(self.A[i].sum())

    def entries(self):
        for i, j in zip(*np.nonzero(self.A)):
            yield int(i), int(j), float(self.A[i, j])

    def to_csv(self) -> str:
        lines = ["i,j,A_ij"]
        lines += [f"{i},{j},{a:.12g}" for i, j, a in self.entries()]
        return "\n".join(lines) + "\n"


def _branch_polys(spec: CodeSpec, T: int, R: int) -> np.ndarray:
    """Gamma[s, pl, q0, r]: C(K, q0) * punctured branch * (branch)^(N-2),
    for history p = (s, pl); zero on branches removed by truncation."""
    K, m, N, Kp = spec.K, spec.m, spec.N, spec.Kp
    G = superposition_table(K)
    if m == 0:
        F = np.eye(K + 1)[None, None]
        psum = np.zeros((1, 1))
    else:
        F = np.broadcast_to(np.eye(K + 1), (1, K + 1, K + 1))
        for _ in range(m):
            # F[p..., q0, r] @ G[:, pj, :]  (fold in the next history weight)
            F = np.einsum("sab,bpc->spac", F, G).reshape(-1, K + 1, K + 1)
        F = F.reshape((K + 1) ** (m - 1), K + 1, K + 1, K + 1)
        grids = np.indices((K + 1,) * m).reshape(m, -1).sum(axis=0)
        psum = grids.reshape((K + 1) ** (m - 1), K + 1)
    gam = F @ thinning_matrix(K, Kp)
    for _ in range(N - 2):
        gam = _polymul_last(gam, F, length=R)
    if gam.shape[-1] < R:
        gam = np.concatenate([gam, np.zeros(gam.shape[:-1] + (R - gam.shape[-1],))], axis=-1)
    gam = gam[..., :R]
    q0 = np.arange(K + 1)
    coef = np.array([binom_float(K, int(x)) for x in q0])
    gam = gam * coef[None, None, :, None]
    cut = (psum[:, :, None] + q0[None, None, :]) > T
    gam[cut] = 0.0
    return gam


def compute_irwef(spec: CodeSpec, T: int, max_weight: int | None = None,
                  max_cells: int = DEFAULT_MAX_CELLS) -> IRWEFTable:
    """Average IRWEF of the code ensemble, truncated at input weight ``T``.

    Branches whose total input weight over the state and current block exceeds
    ``T`` are removed. With ``max_weight`` set, terms of total weight ``i + j``
    above it are also dropped (enough for the spectrum, much cheaper).
    """
    validate(spec)
    K, L, m, N, Kp = spec.K, spec.L, spec.m, spec.N, spec.Kp
    T = min(int(T), spec.k)
    if T < 0:
        raise ValueError("T must be >= 0")
    I = T + 1
    per_layer_parity = (N - 1) * K - Kp
    jmax = min(per_layer_parity * (L + m), (m + 1) * (N - 1) * T)
    if max_weight is not None:
        jmax = min(jmax, max_weight)
    J = jmax + 1
    R = min(per_layer_parity, jmax) + 1
    S = (K + 1) ** max(m - 1, 0)
    n_states = (K + 1) ** m
    cells = n_states * I * J + (K + 1) * R * I * J + n_states * (K + 1) * max(K + 1, R)
    if cells > max_cells:
        raise ResourceLimitError(
            f"trellis needs ~{cells:.3g} cells ({n_states} states, I={I}, J={J}); budget is {max_cells:.3g}")

    gam = _branch_polys(spec, T, R)  # (S, P, K+1, R), P = K+1 or 1 when m = 0
    gam_rev = gam[..., ::-1]
    npl = gam.shape[1]
    if max_weight is not None:
        keep = (np.arange(I)[:, None] + np.arange(J)[None, :]) <= max_weight

    beta = np.zeros((S, npl, I, J))
    beta[0, 0, 0, 0] = 1.0
    for t in range(L + m):
        q0max = K if t < L else 0
        new = np.zeros((q0max + 1, S, I, J))
        for s in range(S):
            blk = beta[s]
            if not blk.any():
                continue
            padded = np.zeros((npl, I, J + R - 1))
            padded[:, :, R - 1:] = blk
            win = sliding_window_view(padded, J, axis=2)  # (P, I, R, J), win[.., w, j] = blk[.., j + w - R + 1]
            out = np.tensordot(gam_rev[s, :, :q0max + 1, :], win, axes=([0, 2], [0, 2]))  # (q0, I, J)
            for q0 in range(q0max + 1):
                if q0 < I:
                    new[q0, s, q0:, :] += out[q0, :I - q0, :]
        if m == 0:
            beta = new.sum(axis=0)[:, None]
        else:
            full = np.zeros((K + 1, S, I, J))
            full[:q0max + 1] = new
            beta = full.reshape(S, K + 1, I, J)
        if max_weight is not None:
            beta *= keep
        peak = beta.max()
        if not np.isfinite(peak) or peak > OVERFLOW_SENTINEL:
            raise OverflowError(f"IRWEF coefficients exceed {OVERFLOW_SENTINEL:g} at stage {t}")
    return IRWEFTable(A=beta[0, 0].copy(), T=T, k=spec.k, max_weight=max_weight)


def b1_poly(K: int, Kp: int) -> np.ndarray:
    """Weight enumerator of a weight-1 vector after random puncturing."""
    return thinning_matrix(K, Kp)[1, :2].copy()


def b2_poly(K: int, Kp: int) -> np.ndarray:
    """Weight enumerator of a weight-2 vector after random puncturing."""
    if K < 2:
        return np.array([0.0, 0.0, 0.0])
    return thinning_matrix(K, Kp)[2, :3].copy()


def crwef_closed_form(spec: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form CRWEFs A_1(Y) and A_2(Y) of the ensemble (coefficients by degree)."""
    validate(spec)
    K, L, m, N, Kp = spec.K, spec.L, spec.m, spec.N, spec.Kp
    B1 = b1_poly(K, Kp)
    B2 = b2_poly(K, Kp)
    Yn = lambda d: np.eye(1, d + 1, d)[0]  # noqa: E731  Y**d
    A1 = L * K * P.polymul(Yn((m + 1) * (N - 2)), P.polypow(B1, m + 1))

    same = K * (K - 1) * L / 2 * P.polymul(Yn(2 * (m + 1) * (N - 2)), P.polypow(B2, m + 1))
    A2 = np.atleast_1d(same)
    overlap_full = np.array([1.0 / K, 0.0, (K - 1) / K])
    overlap_punct = np.array([1.0 / K, 0.0, 0.0]) + (K - 1) / K * B2
    for gap in range(1, min(m, L - 1) + 1):
        term = (L - gap) * K**2 * P.polymul(Yn(2 * gap * (N - 2)), P.polypow(B1, 2 * gap))
        term = P.polymul(term, P.polypow(overlap_full, (m + 1 - gap) * (N - 2)))
        term = P.polymul(term, P.polypow(overlap_punct, m + 1 - gap))
        A2 = P.polyadd(A2, term)
    far = sum(L - gap for gap in range(m + 1, L))
    if far:
        term = far * K**2 * P.polymul(Yn(2 * (m + 1) * (N - 2)), P.polypow(B1, 2 * (m + 1)))
        A2 = P.polyadd(A2, term)
    return np.asarray(A1, dtype=float), np.asarray(A2, dtype=float)


def spectrum(table: IRWEFTable, k: int | None = None) -> np.ndarray:
    """D[s] = sum_i (i/k) A[i, s-i] for 0 < s <= T (D[0] = 0)."""
    k = table.k if k is None else k
    T = table.T
    D = np.zeros(T + 1)
    A = table.A
    for i in range(1, T + 1):
        js = np.arange(0, T - i + 1)
        js = js[js < A.shape[1]]
        D[i + js] += i / k * A[i, js]
    return D


def min_distance(D: np.ndarray) -> int | None:
    nz = np.flatnonzero(np.asarray(D)[1:] > 0)
    return int(nz[0]) + 1 if nz.size else None
