"""NumPy implementation of the hot numerical kernels.

This module mirrors the compiled Cython backend (`_compiled`) exactly: link
maps, per-family log densities with derivatives, and the negative
log-likelihood entry points used by the optimizer and the MCMC sampler.
Everything is vectorized over observations and broadcasts over parameter
grids; invalid parameter regions yield NaN log densities which the NLL entry
points convert into a +inf sentinel.
"""

from __future__ import annotations

import numpy as np
from scipy.special import digamma, gammaln

BACKEND = "python"

# Clamp for inverse-link output, distinct from the DGP truncation epsilon.
EPS_CLAMP = 1e-12
# Cap on exp() arguments to keep intermediates finite.
EXP_CAP = 700.0

LINK_LOGIT = 0
LINK_CAUCHIT = 1
LINK_CLOGLOG = 2
LINK_LOG = 3
LINK_SOFTPLUS = 4
LINK_IDENTITY = 5

FAM_BETA = 0
FAM_KUMARASWAMY = 1
FAM_SIMPLEX = 2
FAM_LOGIT_NORMAL = 3
FAM_CAUCHIT_NORMAL = 4
FAM_CLOGLOG_NORMAL = 5
FAM_GAMMA = 6
FAM_WEIBULL = 7
FAM_FRECHET = 8
FAM_BETA_PRIME = 9
FAM_GOMPERTZ = 10
FAM_LOG_NORMAL = 11
FAM_SOFTPLUS_NORMAL = 12
FAM_NORMAL = 13

_LOG_2PI = float(np.log(2.0 * np.pi))
_LOG_2 = float(np.log(2.0))


# ---------------------------------------------------------------------------
# Links
# ---------------------------------------------------------------------------

def inv_link(link_id: int, eta):
    """Inverse link, clamped to the interior of the location domain."""
    eta = np.asarray(eta, dtype=np.float64)
    with np.errstate(over="ignore", under="ignore"):
        if link_id == LINK_LOGIT:
            e = np.exp(-np.abs(eta))
            mu = np.where(eta >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
            return np.clip(mu, EPS_CLAMP, 1.0 - EPS_CLAMP)
        if link_id == LINK_CAUCHIT:
            mu = np.arctan(eta) / np.pi + 0.5
            return np.clip(mu, EPS_CLAMP, 1.0 - EPS_CLAMP)
        if link_id == LINK_CLOGLOG:
            mu = -np.expm1(-np.exp(np.minimum(eta, EXP_CAP)))
            return np.clip(mu, EPS_CLAMP, 1.0 - EPS_CLAMP)
        if link_id == LINK_LOG:
            return np.maximum(np.exp(np.minimum(eta, EXP_CAP)), EPS_CLAMP)
        if link_id == LINK_SOFTPLUS:
            return np.maximum(np.logaddexp(0.0, eta), EPS_CLAMP)
        if link_id == LINK_IDENTITY:
            return eta + 0.0
    raise ValueError(f"unknown link id {link_id}")


def link(link_id: int, mu):
    """Forward link; assumes mu strictly inside the domain."""
    mu = np.asarray(mu, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore"):
        if link_id == LINK_LOGIT:
            return np.log(mu) - np.log1p(-mu)
        if link_id == LINK_CAUCHIT:
            return np.tan(np.pi * (mu - 0.5))
        if link_id == LINK_CLOGLOG:
            return np.log(-np.log1p(-mu))
        if link_id == LINK_LOG:
            return np.log(mu)
        if link_id == LINK_SOFTPLUS:
            return mu + np.log(-np.expm1(-mu))
        if link_id == LINK_IDENTITY:
            return mu + 0.0
    raise ValueError(f"unknown link id {link_id}")


def inv_link_deriv(link_id: int, eta):
    """Derivative d(inv_link)/d(eta)."""
    eta = np.asarray(eta, dtype=np.float64)
    with np.errstate(over="ignore", under="ignore"):
        if link_id == LINK_LOGIT:
            e = np.exp(-np.abs(eta))
            return e / (1.0 + e) ** 2
        if link_id == LINK_CAUCHIT:
            return 1.0 / (np.pi * (1.0 + eta * eta))
        if link_id == LINK_CLOGLOG:
            capped = np.minimum(eta, EXP_CAP)
            return np.exp(capped - np.exp(capped))
        if link_id == LINK_LOG:
            return np.exp(np.minimum(eta, EXP_CAP))
        if link_id == LINK_SOFTPLUS:
            e = np.exp(-np.abs(eta))
            return np.where(eta >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
        if link_id == LINK_IDENTITY:
            return np.ones_like(eta)
    raise ValueError(f"unknown link id {link_id}")


# Transform derivative d link(y) / dy, used by the transformed-normal families.
def _link_dy(link_id: int, y):
    if link_id == LINK_LOGIT:
        return 1.0 / (y * (1.0 - y))
    if link_id == LINK_CAUCHIT:
        t = np.tan(np.pi * (y - 0.5))
        return np.pi * (1.0 + t * t)
    if link_id == LINK_CLOGLOG:
        return -1.0 / ((1.0 - y) * np.log1p(-y))
    if link_id == LINK_LOG:
        return 1.0 / y
    if link_id == LINK_SOFTPLUS:
        return 1.0 / (-np.expm1(-y))
    raise ValueError(f"no transform derivative for link id {link_id}")


# ---------------------------------------------------------------------------
# Family log densities with derivatives wrt mu and phi
# ---------------------------------------------------------------------------
# Each _lp_* returns (lp, dmu, dphi) with full numpy broadcasting across
# y/mu/phi. Derivatives are only consumed where lp is finite.

def _lp_beta(y, mu, phi, deriv):
    a = mu * phi
    b = (1.0 - mu) * phi
    ly = np.log(y)
    l1y = np.log1p(-y)
    lp = gammaln(phi) - gammaln(a) - gammaln(b) + (a - 1.0) * ly + (b - 1.0) * l1y
    if not deriv:
        return lp, None, None
    da, db = digamma(a), digamma(b)
    dmu = phi * (ly - l1y - da + db)
    dphi = digamma(phi) - mu * da - (1.0 - mu) * db + mu * ly + (1.0 - mu) * l1y
    return lp, dmu, dphi


def _lp_kumaraswamy(y, mu, phi, deriv):
    # a = phi, b chosen so that the median equals mu.
    a = phi
    lmu = np.log(mu)
    t = np.log(-np.expm1(a * lmu))          # log(1 - mu^a) < 0
    b = -_LOG_2 / t
    ly = np.log(y)
    ya = np.exp(a * ly)
    one_m_ya = -np.expm1(a * ly)            # 1 - y^a
    L = np.log(one_m_ya)
    lp = np.log(a) + np.log(b) + (a - 1.0) * ly + (b - 1.0) * L
    if not deriv:
        return lp, None, None
    mua = np.exp(a * lmu)
    one_m_mua = -np.expm1(a * lmu)
    dt_dmu = -a * mua / (mu * one_m_mua)
    dt_da = -mua * lmu / one_m_mua
    db_dt = _LOG_2 / (t * t)
    common = 1.0 / b + L
    dmu = db_dt * dt_dmu * common
    dL_da = -ya * ly / one_m_ya
    dphi = 1.0 / a + db_dt * dt_da * common + ly + (b - 1.0) * dL_da
    return lp, dmu, dphi


def _lp_simplex(y, mu, phi, deriv):
    D = y * (1.0 - y)
    M = (mu * (1.0 - mu)) ** 2
    r = y - mu
    phi2 = phi * phi
    dev = r * r / (D * M)
    lp = -0.5 * (_LOG_2PI + 2.0 * np.log(phi) + 3.0 * np.log(D)) - dev / (2.0 * phi2)
    if not deriv:
        return lp, None, None
    Mp = 2.0 * mu * (1.0 - mu) * (1.0 - 2.0 * mu)
    dmu = r / (phi2 * D * M) + r * r * Mp / (2.0 * phi2 * D * M * M)
    dphi = -1.0 / phi + dev / (phi2 * phi)
    return lp, dmu, dphi


def _lp_transformed_normal(tlink, y, mu, phi, deriv):
    z = link(tlink, y)
    m = link(tlink, mu)
    resid = z - m
    phi2 = phi * phi
    lp = (-0.5 * _LOG_2PI - np.log(phi) - resid * resid / (2.0 * phi2)
          + np.log(_link_dy(tlink, y)))
    if not deriv:
        return lp, None, None
    # d m / d mu is the reciprocal of the inverse-link derivative at eta = m.
    dm_dmu = _link_dy(tlink, mu)
    dmu = resid / phi2 * dm_dmu
    dphi = -1.0 / phi + resid * resid / (phi2 * phi)
    return lp, dmu, dphi


def _lp_gamma(y, mu, phi, deriv):
    ly = np.log(y)
    lmu = np.log(mu)
    lp = phi * (np.log(phi) - lmu) - gammaln(phi) + (phi - 1.0) * ly - phi * y / mu
    if not deriv:
        return lp, None, None
    dmu = phi * (y - mu) / (mu * mu)
    dphi = np.log(phi) - lmu + 1.0 - digamma(phi) + ly - y / mu
    return lp, dmu, dphi


def _lp_weibull(y, mu, phi, deriv):
    k = phi
    lgk = gammaln(1.0 + 1.0 / k)
    llam = np.log(mu) - lgk                 # log scale
    ly = np.log(y)
    lw = k * (ly - llam)
    w = np.exp(np.minimum(lw, EXP_CAP))
    lp = np.log(k) + (k - 1.0) * ly - k * llam - w
    if not deriv:
        return lp, None, None
    dmu = (k / mu) * (w - 1.0)
    q = digamma(1.0 + 1.0 / k) / (k * k)
    dphi = 1.0 / k + (1.0 - w) * ((ly - llam) - k * q)
    return lp, dmu, dphi


def _lp_frechet(y, mu, phi, deriv):
    # Mean parameterization requires shape > 1.
    k = phi
    invalid = k <= 1.0 + 1e-8
    k_safe = np.where(invalid, 2.0, k)
    lgk = gammaln(1.0 - 1.0 / k_safe)
    ls = np.log(mu) - lgk                   # log scale
    ly = np.log(y)
    lv = k_safe * (ls - ly)
    v = np.exp(np.minimum(lv, EXP_CAP))
    lp = np.log(k_safe) + k_safe * ls - (1.0 + k_safe) * ly - v
    lp = np.where(invalid, np.nan, lp)
    if not deriv:
        return lp, None, None
    dmu = (k_safe / mu) * (1.0 - v)
    p = digamma(1.0 - 1.0 / k_safe) / (k_safe * k_safe)
    dphi = 1.0 / k_safe + (1.0 - v) * ((ls - ly) - k_safe * p)
    dmu = np.where(invalid, np.nan, dmu)
    dphi = np.where(invalid, np.nan, dphi)
    return lp, dmu, dphi


def _lp_beta_prime(y, mu, phi, deriv):
    a = mu * (phi + 1.0)
    b = phi + 2.0
    ly = np.log(y)
    l1y = np.log1p(y)
    lp = (a - 1.0) * ly - (a + b) * l1y - gammaln(a) - gammaln(b) + gammaln(a + b)
    if not deriv:
        return lp, None, None
    dab = digamma(a + b)
    dcore = ly - l1y - digamma(a) + dab
    dmu = (phi + 1.0) * dcore
    dphi = mu * dcore + (-l1y - digamma(b) + dab)
    return lp, dmu, dphi


def _lp_gompertz(y, mu, phi, deriv):
    # F(y) = 1 - exp(-phi*(e^{b y}-1)), median-parameterized:
    # b = log1p(log 2 / phi) / mu.
    b = np.log1p(_LOG_2 / phi) / mu
    by = np.minimum(b * y, EXP_CAP)
    eby = np.exp(by)
    lp = np.log(phi) + np.log(b) + by - phi * np.expm1(by)
    if not deriv:
        return lp, None, None
    dlp_db = 1.0 / b + y * (1.0 - phi * eby)
    dmu = dlp_db * (-b / mu)
    db_dphi = -_LOG_2 / (mu * phi * (phi + _LOG_2))
    dphi = 1.0 / phi - np.expm1(by) + dlp_db * db_dphi
    return lp, dmu, dphi


def _lp_normal(y, mu, phi, deriv):
    r = y - mu
    phi2 = phi * phi
    lp = -0.5 * _LOG_2PI - np.log(phi) - r * r / (2.0 * phi2)
    if not deriv:
        return lp, None, None
    dmu = r / phi2
    dphi = -1.0 / phi + r * r / (phi2 * phi)
    return lp, dmu, dphi


_FAMILY_TABLE = {
    FAM_BETA: _lp_beta,
    FAM_KUMARASWAMY: _lp_kumaraswamy,
    FAM_SIMPLEX: _lp_simplex,
    FAM_GAMMA: _lp_gamma,
    FAM_WEIBULL: _lp_weibull,
    FAM_FRECHET: _lp_frechet,
    FAM_BETA_PRIME: _lp_beta_prime,
    FAM_GOMPERTZ: _lp_gompertz,
    FAM_NORMAL: _lp_normal,
}

_TRANSFORMED = {
    FAM_LOGIT_NORMAL: LINK_LOGIT,
    FAM_CAUCHIT_NORMAL: LINK_CAUCHIT,
    FAM_CLOGLOG_NORMAL: LINK_CLOGLOG,
    FAM_LOG_NORMAL: LINK_LOG,
    FAM_SOFTPLUS_NORMAL: LINK_SOFTPLUS,
}


def _family_fn(family_id: int):
    try:
        return _FAMILY_TABLE[family_id]
    except KeyError:
        raise ValueError(f"unknown family id {family_id}") from None


def logpdf(family_id: int, y, mu, phi):
    """Log density, broadcast over y/mu/phi. NaN marks invalid parameters."""
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    with np.errstate(all="ignore"):
        if family_id in _TRANSFORMED:
            lp, _, _ = _lp_transformed_normal(_TRANSFORMED[family_id], y, mu, phi, False)
        else:
            lp, _, _ = _family_fn(family_id)(y, mu, phi, False)
    return lp


def logpdf_derivs(family_id: int, y, mu, phi):
    """(lp, dlp/dmu, dlp/dphi), broadcast like `logpdf`."""
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    with np.errstate(all="ignore"):
        if family_id in _TRANSFORMED:
            return _lp_transformed_normal(_TRANSFORMED[family_id], y, mu, phi, True)
        return _family_fn(family_id)(y, mu, phi, True)


# ---------------------------------------------------------------------------
# Negative log-likelihood entry points
# ---------------------------------------------------------------------------

def nll(family_id: int, link_id: int, y, X, theta) -> float:
    """NLL of (beta..., log phi); +inf sentinel on invalid interior points."""
    theta = np.asarray(theta, dtype=np.float64)
    logphi = theta[-1]
    if not np.isfinite(logphi) or logphi > EXP_CAP:
        return np.inf
    eta = X @ theta[:-1]
    mu = inv_link(link_id, eta)
    lp = logpdf(family_id, y, mu, np.exp(logphi))
    total = np.sum(lp)
    if not np.isfinite(total):
        return np.inf
    return float(-total)


def nll_and_grad(family_id: int, link_id: int, y, X, theta):
    """NLL and its gradient wrt (beta..., log phi); sentinel (+inf, 0)."""
    theta = np.asarray(theta, dtype=np.float64)
    p = theta.shape[0]
    logphi = theta[-1]
    if not np.isfinite(logphi) or logphi > EXP_CAP:
        return np.inf, np.zeros(p)
    phi = np.exp(logphi)
    eta = X @ theta[:-1]
    mu = inv_link(link_id, eta)
    lp, dmu, dphi = logpdf_derivs(family_id, y, mu, phi)
    total = np.sum(lp)
    if not np.isfinite(total):
        return np.inf, np.zeros(p)
    with np.errstate(all="ignore"):
        w = dmu * inv_link_deriv(link_id, eta)
        grad = np.empty(p)
        grad[:-1] = -(X.T @ w)
        grad[-1] = -np.sum(dphi) * phi
    if not np.all(np.isfinite(grad)):
        return np.inf, np.zeros(p)
    return float(-total), grad


def nll_grid(family_id: int, link_id: int, y, X, thetas, chunk: int = 4096):
    """NLL for each row of `thetas` (G x P). Used by grid-search oracles."""
    thetas = np.asarray(thetas, dtype=np.float64)
    G = thetas.shape[0]
    out = np.empty(G)
    for lo in range(0, G, chunk):
        hi = min(lo + chunk, G)
        block = thetas[lo:hi]
        eta = block[:, :-1] @ X.T                       # (g, n)
        mu = inv_link(link_id, eta)
        phi = np.exp(np.minimum(block[:, -1], EXP_CAP))[:, None]
        lp = logpdf(family_id, y[None, :], mu, phi)
        tot = np.sum(lp, axis=1)
        tot[~np.isfinite(tot)] = -np.inf
        out[lo:hi] = -tot
    return out
