"""Adaptive random-walk Metropolis sampler.

A deliberately simple, dependency-free posterior sampler: Gaussian proposals
with a global step size adapted toward a 0.234 acceptance rate during warmup
(Robbins-Monro on the log scale) and a diagonal preconditioner estimated from
the warmup history. Adaptation freezes when sampling starts, so the kept
draws come from a valid (non-adaptive) Markov chain.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SamplerStuckError", "run_chains", "CHAINS", "WARMUP", "DRAWS"]

CHAINS = 2
WARMUP = 500
DRAWS = 2000

_INIT_BOX = 0.1
_TARGET_ACCEPT = 0.234
_STUCK_WINDOW = 100
_MAX_INIT_TRIES = 200


class SamplerStuckError(RuntimeError):
    """The sampler could not move: bad initialization or a dead warmup window."""


def _find_start(log_post, dim: int, rng: np.random.Generator) -> np.ndarray:
    for _ in range(_MAX_INIT_TRIES):
        theta = rng.uniform(-_INIT_BOX, _INIT_BOX, size=dim)
        if np.isfinite(log_post(theta)):
            return theta
    raise SamplerStuckError(
        "no finite log-posterior point found in the initialization box"
    )


def _run_single(log_post, dim, rng, warmup, draws):
    theta = _find_start(log_post, dim, rng)
    lp = float(log_post(theta))

    log_scale = np.log(2.38 / np.sqrt(dim))
    sds = np.ones(dim)

    # Welford accumulators, restarted at each adaptation window so early
    # (badly located) states do not pollute the preconditioner.
    count = 0
    mean = np.zeros(dim)
    m2 = np.zeros(dim)
    # the step scale re-adapts quickly after each preconditioner update
    rm_clock = 0
    window_end = max(warmup // 5, 1)

    window_accepts = 0
    for t in range(warmup):
        step = np.exp(log_scale) * sds
        prop = theta + rng.normal(size=dim) * step
        lp_prop = float(log_post(prop))
        log_alpha = lp_prop - lp
        accept_prob = 1.0 if log_alpha >= 0.0 else np.exp(log_alpha)
        if np.log(rng.uniform()) < log_alpha:
            theta, lp = prop, lp_prop
            window_accepts += 1

        rm_clock += 1
        log_scale += rm_clock ** -0.6 * (accept_prob - _TARGET_ACCEPT)

        count += 1
        delta = theta - mean
        mean += delta / count
        m2 += delta * (theta - mean)
        if t + 1 == window_end and t + 1 < warmup:
            if count > 10:
                sds = np.sqrt(np.maximum(m2 / (count - 1), 1e-8))
                count = 0
                mean = np.zeros(dim)
                m2 = np.zeros(dim)
                rm_clock = 0
            window_end += max(warmup // 5, 1)

        if (t + 1) % _STUCK_WINDOW == 0:
            if window_accepts == 0:
                raise SamplerStuckError(
                    "an entire warmup window rejected every proposal"
                )
            window_accepts = 0

    step = np.exp(log_scale) * sds
    out = np.empty((draws, dim))
    accepted = 0
    for s in range(draws):
        prop = theta + rng.normal(size=dim) * step
        lp_prop = float(log_post(prop))
        if np.log(rng.uniform()) < lp_prop - lp:
            theta, lp = prop, lp_prop
            accepted += 1
        out[s] = theta
    return out, accepted / draws


def run_chains(log_post, dim, seed, chains=CHAINS, warmup=WARMUP, draws=DRAWS):
    """Run independent adaptive RWM chains.

    Returns ``(draws, accept_rate, n_divergent)`` where ``draws`` has shape
    ``(chains, draws, dim)``. Random-walk Metropolis has no divergence
    mechanism, so ``n_divergent`` is structurally zero; it is reported so
    downstream convergence checks can treat every sampler uniformly.
    """
    seq = np.random.SeedSequence(seed)
    out = np.empty((chains, draws, dim))
    rates = np.empty(chains)
    for c, child in enumerate(seq.spawn(chains)):
        rng = np.random.default_rng(child)
        out[c], rates[c] = _run_single(log_post, dim, rng, warmup, draws)
    return out, float(rates.mean()), 0
