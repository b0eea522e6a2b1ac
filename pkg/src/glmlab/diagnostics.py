"""Sampler convergence diagnostics.

Implements the rank-normalized split R-hat (maximum of the bulk and folded
variants) and the bulk effective sample size with Geyer's initial monotone
sequence truncation, operating on a (chains, draws) array for one scalar
parameter. Degenerate inputs (constant chains, bit-identical duplicated
chains) yield a +inf sentinel rather than an exception.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["split_rhat", "ess", "is_degenerate"]


def _as_chains(draws) -> np.ndarray:
    arr = np.asarray(draws, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a (chains, draws) array")
    if arr.shape[0] < 2:
        raise ValueError("need at least two chains")
    if arr.shape[1] < 8:
        raise ValueError("need at least eight draws per chain")
    return arr


def is_degenerate(draws) -> bool:
    """Constant chains, any constant chain, or duplicated chains."""
    arr = _as_chains(draws)
    if np.ptp(arr) == 0.0:
        return True
    if np.any(np.ptp(arr, axis=1) == 0.0):
        return True
    m = arr.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            if np.array_equal(arr[i], arr[j]):
                return True
    return False


def _split(arr: np.ndarray) -> np.ndarray:
    m, n = arr.shape
    half = n // 2
    return np.vstack([arr[:, :half], arr[:, half:2 * half]])


def _rank_normalize(arr: np.ndarray) -> np.ndarray:
    # average ranks over the pooled draws, mapped through the normal quantile
    flat = arr.reshape(-1)
    order = np.argsort(flat, kind="stable")
    ranks = np.empty_like(flat)
    ranks[order] = np.arange(1, flat.size + 1, dtype=np.float64)
    # average tied ranks
    sorted_vals = flat[order]
    i = 0
    while i < flat.size:
        j = i
        while j + 1 < flat.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            ranks[order[i:j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    z = ndtri((ranks - 0.375) / (flat.size + 0.25))
    return z.reshape(arr.shape)


def _rhat_basic(arr: np.ndarray) -> float:
    m, n = arr.shape
    means = arr.mean(axis=1)
    variances = arr.var(axis=1, ddof=1)
    W = variances.mean()
    B = n * means.var(ddof=1)
    if W <= 0.0:
        return np.inf
    var_plus = (n - 1) / n * W + B / n
    return float(np.sqrt(var_plus / W))


def split_rhat(draws) -> float:
    """Rank-normalized split R-hat; +inf for degenerate chains."""
    arr = _as_chains(draws)
    if is_degenerate(arr):
        return np.inf
    split = _split(arr)
    bulk = _rhat_basic(_rank_normalize(split))
    folded = _rhat_basic(_rank_normalize(np.abs(split - np.median(split))))
    return max(bulk, folded)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    # biased autocovariance (divides by n) via FFT
    n = x.size
    xc = x - x.mean()
    size = int(2 ** np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real / n
    return acov


def ess(draws) -> float:
    """Bulk effective sample size; degenerate chains yield 0.0."""
    arr = _as_chains(draws)
    if is_degenerate(arr):
        return 0.0
    split = _rank_normalize(_split(_as_chains(arr)))
    m, n = split.shape
    acovs = np.vstack([_autocovariance(split[i]) for i in range(m)])
    chain_var = split.var(axis=1, ddof=1)
    W = chain_var.mean()
    var_plus = (n - 1) / n * W + n * split.mean(axis=1).var(ddof=1) / n
    if var_plus <= 0.0:
        return 0.0
    rho = 1.0 - (W - acovs.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # Geyer: pair sums, keep while positive, enforce monotone decrease
    max_pairs = (n - 1) // 2
    prev = np.inf
    total = 0.0
    for k in range(max_pairs):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev)
        prev = pair
        total += pair
    tau = max(-1.0 + 2.0 * total, 1.0 / np.log10(m * n + 10.0))
    if tau <= 0.0:
        return 0.0
    return float(m * n / tau)
