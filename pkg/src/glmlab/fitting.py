"""Model specification and fitting.

A model is a (family, link, formula) triple fitted to a simulated dataset in
one of two modes:

* ``wald`` -- maximum likelihood via L-BFGS-B with analytic gradients,
  followed by a Newton polish on a finite-difference observed-information
  matrix; intervals are Wald intervals from the inverse information.
* ``mcmc`` -- flat-prior posterior sampling with the adaptive random-walk
  Metropolis sampler from :mod:`glmlab.mcmc`; intervals are central
  posterior quantiles.

Both modes parameterize the shape parameter on the log scale, so the free
parameter vector is ``(intercept, slopes..., log_phi)``. The exposure
coefficient (the quantity every downstream metric tracks) is always the
second entry.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.special import ndtri

from . import kernels
from .distributions import MEAN, Family, get_family, link_compatible
from .links import Link, get_link
from .mcmc import CHAINS, DRAWS, SamplerStuckError, run_chains
from . import diagnostics as _diag

__all__ = [
    "FORMULAS", "LEVELS", "MODES", "GRAD_TOL",
    "ModelSpec", "FitResult", "FitError", "StartingPointError",
    "RankDeficientError", "design_matrix", "starting_point",
    "negative_log_likelihood", "fit", "fit_mle", "fit_mcmc", "converged",
]

# formula token -> covariate columns entering the linear predictor (after
# the implicit intercept). "x+z1+z2" is the correctly-specified adjustment
# set for the simulated causal graph; the other two drop a confounder or
# add a collider.
FORMULAS = {
    "x+z1": ("x", "z1"),
    "x+z1+z2": ("x", "z1", "z2"),
    "x+z1+z2+z3": ("x", "z1", "z2", "z3"),
}

LEVELS = (0.5, 0.8, 0.9, 0.95)
MODES = ("wald", "mcmc")

GRAD_TOL = 1e-5           # sup-norm gradient tolerance for MLE convergence
_NEWTON_MAX_ITER = 40
_ESS_FLOOR_PER_4000 = 400.0
_RHAT_MAX = 1.01
_DIVERGENT_MAX = 10
_ACCEPT_RANGE = (0.1, 0.6)


class FitError(RuntimeError):
    """A fit could not be carried out (as opposed to merely not converging)."""


class StartingPointError(FitError):
    """The likelihood is not finite at the deterministic starting point."""


class RankDeficientError(FitError):
    """The design matrix does not have full column rank."""


@dataclass(frozen=True)
class ModelSpec:
    """What to fit: response family, link, adjustment formula, and mode."""

    family: str
    link: str
    formula: str = "x+z1+z2"
    mode: str = "wald"

    def __post_init__(self):
        fam = get_family(self.family)
        lnk = get_link(self.link)
        if self.formula not in FORMULAS:
            raise ValueError(
                f"unknown formula {self.formula!r}; expected one of {sorted(FORMULAS)}"
            )
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not link_compatible(fam, lnk):
            raise ValueError(
                f"link {lnk.name!r} is incompatible with family {fam.name!r}"
            )

    @property
    def family_obj(self) -> Family:
        return get_family(self.family)

    @property
    def link_obj(self) -> Link:
        return get_link(self.link)

    @property
    def terms(self) -> tuple:
        return FORMULAS[self.formula]

    @property
    def param_names(self) -> tuple:
        return ("intercept",) + self.terms + ("log_phi",)

    @property
    def n_params(self) -> int:
        return len(self.terms) + 2


@dataclass
class FitResult:
    """Fitted parameters plus everything needed for downstream metrics."""

    spec: ModelSpec
    estimates: np.ndarray                   # (P,) MLE or posterior mean
    intervals: dict                         # level -> (lo, hi) for the x slope
    diagnostics: dict
    vcov: Optional[np.ndarray] = None       # wald mode only
    draws: Optional[np.ndarray] = None      # mcmc mode only, (chains, S, P)
    wall_time: float = 0.0

    @property
    def mode(self) -> str:
        return self.spec.mode

    @property
    def beta_x(self) -> float:
        return float(self.estimates[1])

    @property
    def converged(self) -> bool:
        return converged(self)

    def pooled_draws(self) -> np.ndarray:
        if self.draws is None:
            raise ValueError("no posterior draws in wald mode")
        return self.draws.reshape(-1, self.draws.shape[-1])


def design_matrix(spec: ModelSpec, data) -> np.ndarray:
    """Intercept column followed by the formula's covariates, in order."""
    cols = [np.ones_like(data.x)]
    for term in spec.terms:
        cols.append(getattr(data, term))
    X = np.column_stack(cols)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficientError(
            f"design for formula {spec.formula!r} is rank deficient"
        )
    return X


def _objective(spec: ModelSpec, data, X=None):
    fam_id = spec.family_obj.kid
    link_id = spec.link_obj.kid
    y = np.asarray(data.y, dtype=np.float64)
    if X is None:
        X = design_matrix(spec, data)

    def value(theta):
        return kernels.nll(fam_id, link_id, y, X, theta)

    def value_and_grad(theta):
        return kernels.nll_and_grad(fam_id, link_id, y, X, theta)

    return value, value_and_grad, X


def negative_log_likelihood(spec: ModelSpec, data, theta) -> float:
    """NLL of ``theta = (intercept, slopes..., log_phi)``; +inf if invalid."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (spec.n_params,):
        raise ValueError(
            f"theta must have shape ({spec.n_params},) for formula {spec.formula!r}"
        )
    value, _, _ = _objective(spec, data)
    return value(theta)


def starting_point(spec: ModelSpec, data) -> np.ndarray:
    """Deterministic start: link of the sample location, zero slopes, log_phi=0.

    The sample location matches the family's own location parameter (mean
    or median), so the intercept-only model is roughly centered from the
    first iteration. The Frechet family needs phi > 1 for its mean to
    exist, so its shape starts at log 2 instead of 0.
    """
    fam = spec.family_obj
    y = np.asarray(data.y, dtype=np.float64)
    central = float(np.mean(y)) if fam.location == MEAN else float(np.median(y))
    if fam.support == "unit":
        central = min(max(central, 1e-9), 1.0 - 1e-9)
    elif fam.support == "positive":
        central = max(central, 1e-9)
    theta = np.zeros(spec.n_params)
    theta[0] = spec.link_obj(central)
    theta[-1] = np.log(2.0) if spec.family == "frechet" else 0.0
    return theta


# ---------------------------------------------------------------------------
# Maximum likelihood
# ---------------------------------------------------------------------------

def _fd_hessian(value_and_grad, theta, rel_step=1e-5):
    """Central finite differences of the analytic gradient; None if any
    probe point falls outside the likelihood's finite region."""
    p = theta.size
    H = np.empty((p, p))
    for j in range(p):
        h = rel_step * max(1.0, abs(theta[j]))
        probe = theta.copy()
        probe[j] = theta[j] + h
        f_hi, g_hi = value_and_grad(probe)
        probe[j] = theta[j] - h
        f_lo, g_lo = value_and_grad(probe)
        if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
            return None
        H[:, j] = (g_hi - g_lo) / (2.0 * h)
    return 0.5 * (H + H.T)


def _newton_direction(H, g):
    """Newton step; saddle points get a modified (eigenvalue-flipped) step
    so the direction is always descent."""
    try:
        return -cho_solve(cho_factor(H), g)
    except LinAlgError:
        w, V = np.linalg.eigh(H)
        w = np.maximum(np.abs(w), 1e-8 * max(1.0, np.max(np.abs(w))))
        return -(V @ ((V.T @ g) / w))


def _newton_polish(value_and_grad, theta, f, g):
    """Drive the gradient toward zero from the L-BFGS-B solution."""
    for _ in range(_NEWTON_MAX_ITER):
        gnorm = np.max(np.abs(g))
        if gnorm < GRAD_TOL * 1e-3:
            break
        H = _fd_hessian(value_and_grad, theta)
        if H is None or not np.all(np.isfinite(H)):
            break
        direction = _newton_direction(H, g)
        step = 1.0
        improved = False
        for _ in range(40):
            cand = theta + step * direction
            f_cand, g_cand = value_and_grad(cand)
            if np.isfinite(f_cand) and (
                f_cand < f
                # flat region: accept sideways moves that shrink the gradient
                or (f_cand <= f + 1e-11 * max(1.0, abs(f))
                    and np.max(np.abs(g_cand)) < gnorm)
            ):
                theta, f, g = cand, f_cand, g_cand
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return theta, f, g


def _minimize_once(value_and_grad, theta0):
    res = minimize(
        value_and_grad, theta0, jac=True, method="L-BFGS-B",
        options={"maxiter": 500, "maxfun": 2000},
    )
    theta = np.asarray(res.x, dtype=np.float64)
    f, g = value_and_grad(theta)
    if not np.isfinite(f):
        theta = np.asarray(theta0, dtype=np.float64)
        f, g = value_and_grad(theta)
    theta, f, g = _newton_polish(value_and_grad, theta, f, g)
    return theta, f, g, int(res.nit)


# deterministic restart offsets for log_phi, tried in order when the primary
# start stalls (fragile likelihoods routinely abort the first line search)
_RESTART_LOGPHI_OFFSETS = (-1.5, 1.0, 2.5)


def fit_mle(spec: ModelSpec, data) -> FitResult:
    """Maximum-likelihood fit with Wald intervals for the x slope."""
    t0 = time.perf_counter()
    value, value_and_grad, X = _objective(spec, data)
    theta0 = starting_point(spec, data)
    f0 = value(theta0)
    if not np.isfinite(f0):
        raise StartingPointError(
            f"{spec.family}/{spec.link}: likelihood not finite at the start"
        )

    theta, f, g, nit = _minimize_once(value_and_grad, theta0)
    if not np.all(np.isfinite(g)) or np.max(np.abs(g)) >= GRAD_TOL:
        for offset in _RESTART_LOGPHI_OFFSETS:
            alt0 = theta0.copy()
            alt0[-1] += offset
            if not np.isfinite(value(alt0)):
                continue
            alt, f_alt, g_alt, nit_alt = _minimize_once(value_and_grad, alt0)
            better = (np.all(np.isfinite(g_alt))
                      and (f_alt < f or not np.all(np.isfinite(g))))
            if better:
                theta, f, g, nit = alt, f_alt, g_alt, nit_alt
            if np.all(np.isfinite(g)) and np.max(np.abs(g)) < GRAD_TOL:
                break

    grad_norm = float(np.max(np.abs(g))) if np.all(np.isfinite(g)) else np.inf
    H = _fd_hessian(value_and_grad, theta)
    vcov = None
    information_pd = False
    if H is not None and np.all(np.isfinite(H)):
        try:
            c = cho_factor(H)
            vcov = cho_solve(c, np.eye(theta.size))
            vcov = 0.5 * (vcov + vcov.T)
            information_pd = bool(np.all(np.diag(vcov) > 0.0))
            if not information_pd:
                vcov = None
        except LinAlgError:
            vcov = None

    optimizer_converged = bool(grad_norm < GRAD_TOL and information_pd)
    intervals = {}
    if vcov is not None:
        se = float(np.sqrt(vcov[1, 1]))
        for level in LEVELS:
            z = float(ndtri(0.5 + level / 2.0))
            intervals[level] = (theta[1] - z * se, theta[1] + z * se)
    else:
        intervals = {level: (np.nan, np.nan) for level in LEVELS}

    diag = {
        "grad_norm": grad_norm,
        "information_pd": information_pd,
        "optimizer_converged": optimizer_converged,
        "nll": float(f),
        "n_lbfgs_iter": nit,
    }
    return FitResult(
        spec=spec, estimates=theta, intervals=intervals, diagnostics=diag,
        vcov=vcov, wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Posterior sampling
# ---------------------------------------------------------------------------

def fit_mcmc(spec: ModelSpec, data, seed: int) -> FitResult:
    """Flat-prior posterior fit; intervals are central posterior quantiles."""
    t0 = time.perf_counter()
    value, _, X = _objective(spec, data)

    def log_post(theta):
        return -value(theta)

    chain_draws, accept_rate, n_divergent = run_chains(
        log_post, spec.n_params, seed
    )
    pooled = chain_draws.reshape(-1, spec.n_params)
    estimates = pooled.mean(axis=0)

    x_draws = chain_draws[:, :, 1]
    rhat = _diag.split_rhat(x_draws)
    ess = _diag.ess(x_draws)

    intervals = {}
    for level in LEVELS:
        alpha = (1.0 - level) / 2.0
        lo, hi = np.quantile(pooled[:, 1], [alpha, 1.0 - alpha])
        intervals[level] = (float(lo), float(hi))

    diag = {
        "rhat": float(rhat),
        "ess": float(ess),
        "accept_rate": float(accept_rate),
        "n_divergent": int(n_divergent),
    }
    return FitResult(
        spec=spec, estimates=estimates, intervals=intervals, diagnostics=diag,
        draws=chain_draws, wall_time=time.perf_counter() - t0,
    )


def fit(spec: ModelSpec, data, seed: Optional[int] = None) -> FitResult:
    """Dispatch on ``spec.mode``; mcmc mode requires a seed."""
    if spec.mode == "mcmc":
        if seed is None:
            raise ValueError("mcmc mode needs an explicit seed")
        return fit_mcmc(spec, data, seed)
    return fit_mle(spec, data)


def converged(result: FitResult) -> bool:
    """Mode-appropriate convergence check.

    Wald fits converge when the gradient vanished and the observed
    information was positive definite. Posterior fits additionally must
    show mixed chains (R-hat), enough effective draws (scaled to the total
    draw count), no divergences, and a sane acceptance rate.
    """
    d = result.diagnostics
    if result.mode == "wald":
        return bool(d.get("optimizer_converged", False)
                    and d.get("information_pd", True))
    total = result.draws.shape[0] * result.draws.shape[1]
    ess_floor = _ESS_FLOOR_PER_4000 * total / 4000.0
    lo, hi = _ACCEPT_RANGE
    return bool(
        d["rhat"] < _RHAT_MAX
        and d["ess"] > ess_floor
        and d["n_divergent"] < _DIVERGENT_MAX
        and lo <= d["accept_rate"] <= hi
    )
