# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the hot numerical kernels.

Semantics mirror `_pure` exactly (same formulas, clamps, and sentinels); the
negative log-likelihood entry points run as scalar C loops, which is where
the optimizer and the sampler spend their time. The cold array utilities
(link maps and broadcastable log densities) are re-exported from `_pure`:
they run once per dataset, not once per optimizer step.
"""

import numpy as np

from libc.math cimport (atan, exp, expm1, fabs, fmax, fmin, lgamma, log,
                        log1p, isfinite, tan, INFINITY, NAN, M_PI)
from scipy.special.cython_special cimport psi

from . import _pure

BACKEND = "compiled"

EPS_CLAMP = _pure.EPS_CLAMP
EXP_CAP = _pure.EXP_CAP

LINK_LOGIT = _pure.LINK_LOGIT
LINK_CAUCHIT = _pure.LINK_CAUCHIT
LINK_CLOGLOG = _pure.LINK_CLOGLOG
LINK_LOG = _pure.LINK_LOG
LINK_SOFTPLUS = _pure.LINK_SOFTPLUS
LINK_IDENTITY = _pure.LINK_IDENTITY

FAM_BETA = _pure.FAM_BETA
FAM_KUMARASWAMY = _pure.FAM_KUMARASWAMY
FAM_SIMPLEX = _pure.FAM_SIMPLEX
FAM_LOGIT_NORMAL = _pure.FAM_LOGIT_NORMAL
FAM_CAUCHIT_NORMAL = _pure.FAM_CAUCHIT_NORMAL
FAM_CLOGLOG_NORMAL = _pure.FAM_CLOGLOG_NORMAL
FAM_GAMMA = _pure.FAM_GAMMA
FAM_WEIBULL = _pure.FAM_WEIBULL
FAM_FRECHET = _pure.FAM_FRECHET
FAM_BETA_PRIME = _pure.FAM_BETA_PRIME
FAM_GOMPERTZ = _pure.FAM_GOMPERTZ
FAM_LOG_NORMAL = _pure.FAM_LOG_NORMAL
FAM_SOFTPLUS_NORMAL = _pure.FAM_SOFTPLUS_NORMAL
FAM_NORMAL = _pure.FAM_NORMAL

# Cold paths: once-per-dataset array operations stay in NumPy.
inv_link = _pure.inv_link
link = _pure.link
inv_link_deriv = _pure.inv_link_deriv
logpdf = _pure.logpdf
logpdf_derivs = _pure.logpdf_derivs

cdef double C_EPS = 1e-12
cdef double C_CAP = 700.0
cdef double C_LOG_2PI = log(2.0 * M_PI)
cdef double C_LOG_2 = log(2.0)

cdef enum:
    L_LOGIT = 0
    L_CAUCHIT = 1
    L_CLOGLOG = 2
    L_LOG = 3
    L_SOFTPLUS = 4
    L_IDENTITY = 5

cdef enum:
    F_BETA = 0
    F_KUMARASWAMY = 1
    F_SIMPLEX = 2
    F_LOGIT_NORMAL = 3
    F_CAUCHIT_NORMAL = 4
    F_CLOGLOG_NORMAL = 5
    F_GAMMA = 6
    F_WEIBULL = 7
    F_FRECHET = 8
    F_BETA_PRIME = 9
    F_GOMPERTZ = 10
    F_LOG_NORMAL = 11
    F_SOFTPLUS_NORMAL = 12
    F_NORMAL = 13

# The module-level ids in _pure are the source of truth; the enums above
# must agree with them (checked once at import).
assert (L_LOGIT, L_CAUCHIT, L_CLOGLOG, L_LOG, L_SOFTPLUS, L_IDENTITY) == (
    LINK_LOGIT, LINK_CAUCHIT, LINK_CLOGLOG, LINK_LOG, LINK_SOFTPLUS,
    LINK_IDENTITY)
assert (F_BETA, F_KUMARASWAMY, F_SIMPLEX, F_LOGIT_NORMAL, F_CAUCHIT_NORMAL,
        F_CLOGLOG_NORMAL, F_GAMMA, F_WEIBULL, F_FRECHET, F_BETA_PRIME,
        F_GOMPERTZ, F_LOG_NORMAL, F_SOFTPLUS_NORMAL, F_NORMAL) == (
    FAM_BETA, FAM_KUMARASWAMY, FAM_SIMPLEX, FAM_LOGIT_NORMAL,
    FAM_CAUCHIT_NORMAL, FAM_CLOGLOG_NORMAL, FAM_GAMMA, FAM_WEIBULL,
    FAM_FRECHET, FAM_BETA_PRIME, FAM_GOMPERTZ, FAM_LOG_NORMAL,
    FAM_SOFTPLUS_NORMAL, FAM_NORMAL)


cdef inline double c_inv_link(int link_id, double eta) noexcept:
    cdef double e, mu
    if link_id == L_LOGIT:
        e = exp(-fabs(eta))
        mu = 1.0 / (1.0 + e) if eta >= 0.0 else e / (1.0 + e)
        return fmin(fmax(mu, C_EPS), 1.0 - C_EPS)
    if link_id == L_CAUCHIT:
        mu = atan(eta) / M_PI + 0.5
        return fmin(fmax(mu, C_EPS), 1.0 - C_EPS)
    if link_id == L_CLOGLOG:
        mu = -expm1(-exp(fmin(eta, C_CAP)))
        return fmin(fmax(mu, C_EPS), 1.0 - C_EPS)
    if link_id == L_LOG:
        return fmax(exp(fmin(eta, C_CAP)), C_EPS)
    if link_id == L_SOFTPLUS:
        if eta >= 0.0:
            mu = eta + log1p(exp(-eta))
        else:
            mu = log1p(exp(eta))
        return fmax(mu, C_EPS)
    return eta                               # identity


cdef inline double c_inv_link_deriv(int link_id, double eta) noexcept:
    cdef double e, capped
    if link_id == L_LOGIT:
        e = exp(-fabs(eta))
        return e / ((1.0 + e) * (1.0 + e))
    if link_id == L_CAUCHIT:
        return 1.0 / (M_PI * (1.0 + eta * eta))
    if link_id == L_CLOGLOG:
        capped = fmin(eta, C_CAP)
        return exp(capped - exp(capped))
    if link_id == L_LOG:
        return exp(fmin(eta, C_CAP))
    if link_id == L_SOFTPLUS:
        e = exp(-fabs(eta))
        return 1.0 / (1.0 + e) if eta >= 0.0 else e / (1.0 + e)
    return 1.0                               # identity


cdef inline double c_link(int link_id, double mu) noexcept:
    if link_id == L_LOGIT:
        return log(mu) - log1p(-mu)
    if link_id == L_CAUCHIT:
        return tan(M_PI * (mu - 0.5))
    if link_id == L_CLOGLOG:
        return log(-log1p(-mu))
    if link_id == L_LOG:
        return log(mu)
    if link_id == L_SOFTPLUS:
        return mu + log(-expm1(-mu))
    return mu                                # identity


cdef inline double c_link_dy(int link_id, double y) noexcept:
    cdef double t
    if link_id == L_LOGIT:
        return 1.0 / (y * (1.0 - y))
    if link_id == L_CAUCHIT:
        t = tan(M_PI * (y - 0.5))
        return M_PI * (1.0 + t * t)
    if link_id == L_CLOGLOG:
        return -1.0 / ((1.0 - y) * log1p(-y))
    if link_id == L_LOG:
        return 1.0 / y
    return 1.0 / (-expm1(-y))                # softplus


cdef inline int c_transform_of(int family_id) noexcept:
    if family_id == F_LOGIT_NORMAL:
        return L_LOGIT
    if family_id == F_CAUCHIT_NORMAL:
        return L_CAUCHIT
    if family_id == F_CLOGLOG_NORMAL:
        return L_CLOGLOG
    if family_id == F_LOG_NORMAL:
        return L_LOG
    if family_id == F_SOFTPLUS_NORMAL:
        return L_SOFTPLUS
    return -1


cdef int c_logpdf(int family_id, double y, double mu, double phi,
                  bint deriv, double* out) noexcept:
    """out[0] = lp, out[1] = dlp/dmu, out[2] = dlp/dphi. NaN marks invalid."""
    cdef double a, b, ly, l1y, lp, da, db, dab, lmu, t, ya, one_m_ya, L
    cdef double mua, one_m_mua, dt_dmu, dt_da, db_dt, common, dL_da
    cdef double D, M, r, phi2, dev, Mp, z, m, resid, k, lgk, llam, lw, w, q
    cdef double ls, lv, v, p, by, eby, dlp_db, db_dphi
    cdef int tlink

    out[0] = NAN
    out[1] = NAN
    out[2] = NAN

    tlink = c_transform_of(family_id)
    if tlink >= 0:
        z = c_link(tlink, y)
        m = c_link(tlink, mu)
        resid = z - m
        phi2 = phi * phi
        out[0] = (-0.5 * C_LOG_2PI - log(phi) - resid * resid / (2.0 * phi2)
                  + log(c_link_dy(tlink, y)))
        if deriv:
            out[1] = resid / phi2 * c_link_dy(tlink, mu)
            out[2] = -1.0 / phi + resid * resid / (phi2 * phi)
        return 0

    if family_id == F_BETA:
        a = mu * phi
        b = (1.0 - mu) * phi
        ly = log(y)
        l1y = log1p(-y)
        out[0] = (lgamma(phi) - lgamma(a) - lgamma(b)
                  + (a - 1.0) * ly + (b - 1.0) * l1y)
        if deriv:
            da = psi(a)
            db = psi(b)
            out[1] = phi * (ly - l1y - da + db)
            out[2] = (psi(phi) - mu * da - (1.0 - mu) * db
                      + mu * ly + (1.0 - mu) * l1y)
        return 0

    if family_id == F_KUMARASWAMY:
        a = phi
        lmu = log(mu)
        t = log(-expm1(a * lmu))
        b = -C_LOG_2 / t
        ly = log(y)
        ya = exp(a * ly)
        one_m_ya = -expm1(a * ly)
        L = log(one_m_ya)
        out[0] = log(a) + log(b) + (a - 1.0) * ly + (b - 1.0) * L
        if deriv:
            mua = exp(a * lmu)
            one_m_mua = -expm1(a * lmu)
            dt_dmu = -a * mua / (mu * one_m_mua)
            dt_da = -mua * lmu / one_m_mua
            db_dt = C_LOG_2 / (t * t)
            common = 1.0 / b + L
            out[1] = db_dt * dt_dmu * common
            dL_da = -ya * ly / one_m_ya
            out[2] = 1.0 / a + db_dt * dt_da * common + ly + (b - 1.0) * dL_da
        return 0

    if family_id == F_SIMPLEX:
        D = y * (1.0 - y)
        M = (mu * (1.0 - mu)) * (mu * (1.0 - mu))
        r = y - mu
        phi2 = phi * phi
        dev = r * r / (D * M)
        out[0] = (-0.5 * (C_LOG_2PI + 2.0 * log(phi) + 3.0 * log(D))
                  - dev / (2.0 * phi2))
        if deriv:
            Mp = 2.0 * mu * (1.0 - mu) * (1.0 - 2.0 * mu)
            out[1] = (r / (phi2 * D * M)
                      + r * r * Mp / (2.0 * phi2 * D * M * M))
            out[2] = -1.0 / phi + dev / (phi2 * phi)
        return 0

    if family_id == F_GAMMA:
        ly = log(y)
        lmu = log(mu)
        out[0] = (phi * (log(phi) - lmu) - lgamma(phi)
                  + (phi - 1.0) * ly - phi * y / mu)
        if deriv:
            out[1] = phi * (y - mu) / (mu * mu)
            out[2] = log(phi) - lmu + 1.0 - psi(phi) + ly - y / mu
        return 0

    if family_id == F_WEIBULL:
        k = phi
        lgk = lgamma(1.0 + 1.0 / k)
        llam = log(mu) - lgk
        ly = log(y)
        lw = k * (ly - llam)
        w = exp(fmin(lw, C_CAP))
        out[0] = log(k) + (k - 1.0) * ly - k * llam - w
        if deriv:
            out[1] = (k / mu) * (w - 1.0)
            q = psi(1.0 + 1.0 / k) / (k * k)
            out[2] = 1.0 / k + (1.0 - w) * ((ly - llam) - k * q)
        return 0

    if family_id == F_FRECHET:
        k = phi
        if k <= 1.0 + 1e-8:
            return 0                        # NaN already set: invalid region
        lgk = lgamma(1.0 - 1.0 / k)
        ls = log(mu) - lgk
        ly = log(y)
        lv = k * (ls - ly)
        v = exp(fmin(lv, C_CAP))
        out[0] = log(k) + k * ls - (1.0 + k) * ly - v
        if deriv:
            out[1] = (k / mu) * (1.0 - v)
            p = psi(1.0 - 1.0 / k) / (k * k)
            out[2] = 1.0 / k + (1.0 - v) * ((ls - ly) - k * p)
        return 0

    if family_id == F_BETA_PRIME:
        a = mu * (phi + 1.0)
        b = phi + 2.0
        ly = log(y)
        l1y = log1p(y)
        out[0] = ((a - 1.0) * ly - (a + b) * l1y
                  - lgamma(a) - lgamma(b) + lgamma(a + b))
        if deriv:
            dab = psi(a + b)
            common = ly - l1y - psi(a) + dab
            out[1] = (phi + 1.0) * common
            out[2] = mu * common + (-l1y - psi(b) + dab)
        return 0

    if family_id == F_GOMPERTZ:
        b = log1p(C_LOG_2 / phi) / mu
        by = fmin(b * y, C_CAP)
        eby = exp(by)
        out[0] = log(phi) + log(b) + by - phi * expm1(by)
        if deriv:
            dlp_db = 1.0 / b + y * (1.0 - phi * eby)
            out[1] = dlp_db * (-b / mu)
            db_dphi = -C_LOG_2 / (mu * phi * (phi + C_LOG_2))
            out[2] = 1.0 / phi - expm1(by) + dlp_db * db_dphi
        return 0

    if family_id == F_NORMAL:
        r = y - mu
        phi2 = phi * phi
        out[0] = -0.5 * C_LOG_2PI - log(phi) - r * r / (2.0 * phi2)
        if deriv:
            out[1] = r / phi2
            out[2] = -1.0 / phi + r * r / (phi2 * phi)
        return 0

    return -1                                # unknown family id


def nll(int family_id, int link_id, y, X, theta):
    """NLL of (beta..., log phi); +inf sentinel on invalid interior points."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0], p = th.shape[0], i, j
    cdef double logphi = th[p - 1]
    cdef double phi, eta, mu, total
    cdef double out[3]

    if Xv.shape[0] != n or Xv.shape[1] != p - 1:
        raise ValueError("design matrix does not match y/theta")
    if not isfinite(logphi) or logphi > C_CAP:
        return float(INFINITY)
    phi = exp(logphi)
    total = 0.0
    for i in range(n):
        eta = 0.0
        for j in range(p - 1):
            eta += Xv[i, j] * th[j]
        mu = c_inv_link(link_id, eta)
        if c_logpdf(family_id, yv[i], mu, phi, False, out) != 0:
            raise ValueError(f"unknown family id {family_id}")
        if not isfinite(out[0]):
            return float(INFINITY)
        total += out[0]
    if not isfinite(total):
        return float(INFINITY)
    return float(-total)


def nll_and_grad(int family_id, int link_id, y, X, theta):
    """NLL and its gradient wrt (beta..., log phi); sentinel (+inf, 0)."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0], p = th.shape[0], i, j
    cdef double logphi = th[p - 1]
    cdef double phi, eta, mu, total, w, dphi_sum
    cdef double out[3]

    if Xv.shape[0] != n or Xv.shape[1] != p - 1:
        raise ValueError("design matrix does not match y/theta")
    grad_arr = np.zeros(p, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    if not isfinite(logphi) or logphi > C_CAP:
        return float(INFINITY), grad_arr
    phi = exp(logphi)
    total = 0.0
    dphi_sum = 0.0
    for i in range(n):
        eta = 0.0
        for j in range(p - 1):
            eta += Xv[i, j] * th[j]
        mu = c_inv_link(link_id, eta)
        if c_logpdf(family_id, yv[i], mu, phi, True, out) != 0:
            raise ValueError(f"unknown family id {family_id}")
        if not isfinite(out[0]):
            grad_arr[:] = 0.0
            return float(INFINITY), grad_arr
        total += out[0]
        w = out[1] * c_inv_link_deriv(link_id, eta)
        for j in range(p - 1):
            grad[j] -= Xv[i, j] * w
        dphi_sum += out[2]
    grad[p - 1] = -dphi_sum * phi
    if not isfinite(total):
        grad_arr[:] = 0.0
        return float(INFINITY), grad_arr
    for j in range(p):
        if not isfinite(grad[j]):
            grad_arr[:] = 0.0
            return float(INFINITY), grad_arr
    return float(-total), grad_arr


def nll_grid(int family_id, int link_id, y, X, thetas, int chunk=4096):
    """NLL for each row of `thetas` (G x P). Used by grid-search oracles."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] tv = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef Py_ssize_t G = tv.shape[0], n = yv.shape[0], p = tv.shape[1]
    cdef Py_ssize_t g, i, j
    cdef double logphi, phi, eta, mu, total
    cdef double out[3]
    cdef bint bad

    if Xv.shape[0] != n or Xv.shape[1] != p - 1:
        raise ValueError("design matrix does not match y/thetas")
    res = np.empty(G, dtype=np.float64)
    cdef double[::1] rv = res
    for g in range(G):
        logphi = tv[g, p - 1]
        if not isfinite(logphi) or logphi > C_CAP:
            rv[g] = INFINITY
            continue
        phi = exp(fmin(logphi, C_CAP))
        total = 0.0
        bad = False
        for i in range(n):
            eta = 0.0
            for j in range(p - 1):
                eta += Xv[i, j] * tv[g, j]
            mu = c_inv_link(link_id, eta)
            if c_logpdf(family_id, yv[i], mu, phi, False, out) != 0:
                raise ValueError(f"unknown family id {family_id}")
            if not isfinite(out[0]):
                bad = True
                break
            total += out[0]
        rv[g] = INFINITY if (bad or not isfinite(total)) else -total
    return res
