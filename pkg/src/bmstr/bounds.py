"""MAP bit-error bounds, the BI-AWGN Shannon limit and the code planner.

Upper bound: list decoding inside a Hamming sphere of radius r* around the hard
decisions, evaluated from a truncated IRWEF and minimized over r*.
Lower bounds: genie-aided per-bit bound from per-bit minimum weights, and its
ensemble form driven by the (random) row weights of the generator matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc
from scipy.stats import binom

from .channel import ebn0_db, sigma_from_snr_db, snr_db_from_sigma
from .code_model import CodeSpec, terminated_rate
from .wef import IRWEFTable

MEMORY_CAP = 256
_GH_NODES = 160


def q_function(x):
    """Gaussian tail probability Q(x)."""
    out = 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


# -- upper bound ---------------------------------------------------------------

def union_term(table: IRWEFTable, sigma: float, max_input_weight: int, k: int | None = None) -> float:
    """sum over 1 <= i <= max_input_weight of (i/k) sum_j A_ij Q(sqrt(i+j)/sigma)."""
    k = table.k if k is None else k
    imax = min(max_input_weight, table.T)
    if imax < 1:
        return 0.0
    A = table.A[1:imax + 1]
    i = np.arange(1, imax + 1)[:, None]
    j = np.arange(A.shape[1])[None, :]
    q = q_function(np.sqrt(i + j) / sigma)
    return float(np.sum(i / k * A * q))


def list_tail_term(k: int, r_star: int, eps: float) -> float:
    """sum_{i > r*} min(i + r*, k)/k * Binom(k, eps)(i), summed from log-pmfs."""
    if r_star >= k:
        return 0.0
    i = np.arange(r_star + 1, k + 1)
    logp = binom.logpmf(i, k, eps)
    w = np.minimum(i + r_star, k) / k
    return float(np.sum(w * np.exp(logp)))


def list_bound(table: IRWEFTable, sigma: float, r_star: int, k: int | None = None) -> float:
    """Bit-error bound of the radius-r* list decoder for one value of r*."""
    k = table.k if k is None else k
    eps = q_function(1.0 / sigma)
    return union_term(table, sigma, 2 * r_star, k) + list_tail_term(k, r_star, eps)


def upper_bound_truncated(table: IRWEFTable, sigma: float, T: int | None = None,
                          k: int | None = None) -> tuple[float, int]:
    """Minimum over 0 <= r* <= T/2 of the list-decoding bound.

    Returns the bound and the minimizing r*.
    """
    T = table.T if T is None else min(T, table.T)
    k = table.k if k is None else k
    best, arg = math.inf, 0
    for r in range(0, T // 2 + 1):
        v = list_bound(table, sigma, r, k)
        if v < best:
            best, arg = v, r
    return min(best, 1.0), arg


def union_bound(table: IRWEFTable, sigma: float, k: int | None = None) -> float:
    """Union bound over every input weight present in ``table``."""
    return union_term(table, sigma, table.T, k)


# -- lower bounds --------------------------------------------------------------

def lower_bound_per_bit(dmin_list, sigma: float) -> float:
    """(1/k) sum_i Q(sqrt(d_min,i)/sigma)."""
    d = np.asarray(dmin_list, dtype=np.float64)
    if d.size == 0 or np.any(d <= 0):
        raise ValueError("per-bit minimum weights must be a nonempty list of positive values")
    return float(np.mean(q_function(np.sqrt(d) / sigma)))


def lower_bound_dmin(dmin: int, k: int, sigma: float) -> float:
    """(1/k) Q(sqrt(d_min)/sigma): valid for MAP but usually loose."""
    return q_function(math.sqrt(dmin) / sigma) / k


def lower_bound_uniform(d: int, sigma: float) -> float:
    """Per-bit bound when every d_min,i equals d."""
    return q_function(math.sqrt(d) / sigma)


def lower_bound_row_weights(row_weights, sigma: float) -> float:
    """Per-bit bound with generator row weights in place of d_min,i (looser)."""
    return lower_bound_per_bit(row_weights, sigma)


def _theta(theta) -> Fraction:
    th = Fraction(theta).limit_denominator(10**9) if isinstance(theta, float) else Fraction(theta)
    if not 0 <= th < 1:
        raise ValueError(f"puncturing fraction must lie in [0, 1), got {theta}")
    return th


def lower_bound_ensemble(N: int, m: int, theta, sigma: float) -> float:
    """Ensemble lower bound: average of Q(sqrt(W)/sigma) over the random row weight W."""
    th = float(_theta(theta))
    if N < 2 or m < 0:
        raise ValueError("need N >= 2 and m >= 0")
    base = N + m * (N - 2) - 1
    total = 0.0
    for ell in range(m + 2):
        w = math.comb(m + 1, ell) * th ** (m + 1 - ell) * (1 - th) ** ell
        if w:
            total += w * q_function(math.sqrt(base + ell) / sigma)
    return total


def row_weight_pmf(N: int, m: int, theta) -> dict[int, float]:
    """Distribution of a generator row weight in the punctured ensemble."""
    th = float(_theta(theta))
    base = N + m * (N - 2) - 1
    return {base + ell: math.comb(m + 1, ell) * th ** (m + 1 - ell) * (1 - th) ** ell
            for ell in range(m + 2)}


# -- capacity and planning -----------------------------------------------------

def biawgn_capacity(sigma: float, nodes: int = _GH_NODES) -> float:
    """Capacity (bits/use) of BPSK over AWGN with noise std ``sigma``."""
    x, w = np.polynomial.hermite.hermgauss(nodes)
    y = 1.0 + math.sqrt(2.0) * sigma * x
    z = -2.0 * y / sigma**2
    loss = np.logaddexp(0.0, z) / math.log(2.0)
    return float(1.0 - np.dot(w, loss) / math.sqrt(math.pi))


def shannon_limit_snr(rate, target_ber: float) -> float:
    """Smallest SNR (dB) at which BI-AWGN capacity reaches R(1 - H2(p))."""
    R = float(rate)
    if not 0 < R < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    if not 0 < target_ber < 0.5:
        raise ValueError(f"target BER must lie in (0, 0.5), got {target_ber}")
    need = R * (1.0 - binary_entropy(target_ber))
    f = lambda s: biawgn_capacity(sigma_from_snr_db(s)) - need  # noqa: E731
    lo, hi = -40.0, 30.0
    while f(lo) > 0:
        lo -= 20.0
    return brentq(f, lo, hi, xtol=1e-10)


def required_memory(N: int, theta, snr_db: float, target_ber: float, cap: int = MEMORY_CAP) -> int:
    """Smallest m whose ensemble lower bound at ``snr_db`` is at most ``target_ber``."""
    if not 0 < target_ber < 0.5:
        raise ValueError(f"target BER must lie in (0, 0.5), got {target_ber}")
    sigma = sigma_from_snr_db(snr_db)
    for m in range(cap + 1):
        if lower_bound_ensemble(N, m, theta, sigma) <= target_ber:
            return m
    raise ValueError(f"no encoding memory up to {cap} reaches BER {target_ber:g} at {snr_db:.3f} dB")


def rate_params(rate) -> tuple[int, Fraction]:
    """N and theta with 1/(N - theta) = R."""
    R = Fraction(rate).limit_denominator(10**6) if isinstance(rate, float) else Fraction(rate)
    if not 0 < R < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    inv = 1 / R
    N = math.ceil(inv)
    return N, N - inv


@dataclass
class PlanResult:
    rate: Fraction
    N: int
    theta: Fraction
    K: int
    Kp: int
    L: int
    m: int
    rate_L: Fraction
    shannon_limit_snr_db: float
    shannon_limit_ebn0_db: float
    predicted_floor: float
    target_ber: float
    spec: CodeSpec

    @property
    def rate_loss(self) -> float:
        return float(self.rate - self.rate_L)

    def to_dict(self) -> dict:
        return {
            "rate": str(self.rate), "N": self.N, "theta": str(self.theta),
            "K": self.K, "Kp": self.Kp, "L": self.L, "m": self.m,
            "rate_L": float(self.rate_L), "rate_loss": self.rate_loss,
            "shannon_limit_snr_db": self.shannon_limit_snr_db,
            "shannon_limit_ebn0_db": self.shannon_limit_ebn0_db,
            "predicted_floor": self.predicted_floor, "target_ber": self.target_ber,
            "spec": self.spec.to_dict(),
        }


def plan_code(rate, target_ber: float, K: int, L: int, seed: int = 0) -> PlanResult:
    """Pick N, K_p and m for a target rate and BER with no search beyond m."""
    N, theta = rate_params(rate)
    R = 1 / (N - theta)
    Kp = round(theta * K)
    snr = shannon_limit_snr(R, target_ber)
    m = required_memory(N, theta, snr, target_ber)
    seeds = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    spec = CodeSpec(N, K, Kp, L, m, interleaver_seed=int(seeds[0]), puncture_seed=int(seeds[1]))
    return PlanResult(
        rate=R, N=N, theta=theta, K=K, Kp=Kp, L=L, m=m,
        rate_L=terminated_rate(spec),
        shannon_limit_snr_db=snr,
        shannon_limit_ebn0_db=ebn0_db(float(R), snr),
        predicted_floor=lower_bound_ensemble(N, m, theta, sigma_from_snr_db(snr)),
        target_ber=target_ber,
        spec=spec,
    )


@dataclass
class BoundCurve:
    tag: str
    points: list[tuple[float, float]] = field(default_factory=list)

    def snr_db(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def bound_curves(spec: CodeSpec, table: IRWEFTable, snr_grid) -> list[dict]:
    """Lower (ensemble) and upper (truncated IRWEF) bounds over an SNR grid."""
    rows = []
    for s in snr_grid:
        sigma = sigma_from_snr_db(s)
        up, r = upper_bound_truncated(table, sigma)
        rows.append({
            "snr_db": float(s),
            "lower": lower_bound_ensemble(spec.N, spec.m, spec.theta, sigma),
            "upper": up,
            "r_star": r,
        })
    return rows


def snr_for_lower_bound(N: int, m: int, theta, target: float) -> float:
    """SNR (dB) where the ensemble lower bound equals ``target``."""
    def f(s):
        v = lower_bound_ensemble(N, m, theta, sigma_from_snr_db(s))
        return math.log(max(v, 1e-300)) - math.log(target)

    return brentq(f, -20.0, 20.0, xtol=1e-12)


__all__ = [
    "q_function", "binary_entropy", "union_term", "list_tail_term", "list_bound",
    "upper_bound_truncated", "union_bound", "lower_bound_per_bit", "lower_bound_dmin",
    "lower_bound_uniform", "lower_bound_row_weights", "lower_bound_ensemble", "row_weight_pmf",
    "biawgn_capacity", "shannon_limit_snr", "required_memory", "rate_params", "PlanResult",
    "plan_code", "BoundCurve", "bound_curves", "snr_for_lower_bound", "snr_db_from_sigma",
]
