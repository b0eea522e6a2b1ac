"""Link functions mapping locations to the unconstrained linear-predictor scale.

Six links are provided: logit, cauchit, cloglog (unit-interval domain), log,
softplus (positive domain), and identity (real domain). Inverse links clamp
their output to the interior of the domain ([1e-12, 1-1e-12] on the unit
interval, [1e-12, inf) on the positive half-line) so that downstream densities
never see boundary values. Forward links validate their input strictly.
"""

from __future__ import annotations

import numpy as np

from . import kernels

__all__ = [
    "Link",
    "LOGIT",
    "CAUCHIT",
    "CLOGLOG",
    "LOG",
    "SOFTPLUS",
    "IDENTITY",
    "LINKS",
    "get_link",
    "apply_link",
    "apply_inv_link",
    "inv_link_deriv",
    "LinkDomainError",
    "EPS_CLAMP",
]

EPS_CLAMP = kernels.EPS_CLAMP

DOMAIN_UNIT = "unit"
DOMAIN_POSITIVE = "positive"
DOMAIN_REAL = "real"


class LinkDomainError(ValueError):
    """Raised when a location sits on or outside the link's domain."""


class Link:
    """A named link with its domain and kernel dispatch id."""

    def __init__(self, name: str, domain: str, kid: int):
        self.name = name
        self.domain = domain
        self.kid = kid

    def __repr__(self):
        return f"Link({self.name})"

    def inv(self, eta):
        return kernels.inv_link(self.kid, eta)

    def __call__(self, mu):
        return kernels.link(self.kid, mu)

    def deriv(self, eta):
        return kernels.inv_link_deriv(self.kid, eta)


LOGIT = Link("logit", DOMAIN_UNIT, kernels.LINK_LOGIT)
CAUCHIT = Link("cauchit", DOMAIN_UNIT, kernels.LINK_CAUCHIT)
CLOGLOG = Link("cloglog", DOMAIN_UNIT, kernels.LINK_CLOGLOG)
LOG = Link("log", DOMAIN_POSITIVE, kernels.LINK_LOG)
SOFTPLUS = Link("softplus", DOMAIN_POSITIVE, kernels.LINK_SOFTPLUS)
IDENTITY = Link("identity", DOMAIN_REAL, kernels.LINK_IDENTITY)

LINKS = {lk.name: lk for lk in (LOGIT, CAUCHIT, CLOGLOG, LOG, SOFTPLUS, IDENTITY)}


def get_link(name: str) -> Link:
    try:
        return LINKS[name]
    except KeyError:
        raise KeyError(f"unknown link {name!r}; expected one of {sorted(LINKS)}") from None


def _check_domain(lk: Link, mu) -> None:
    arr = np.asarray(mu, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise LinkDomainError(f"{lk.name}: non-finite location")
    if lk.domain == DOMAIN_UNIT:
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise LinkDomainError(f"{lk.name}: location must lie strictly in (0, 1)")
    elif lk.domain == DOMAIN_POSITIVE:
        if np.any(arr <= 0.0):
            raise LinkDomainError(f"{lk.name}: location must be strictly positive")


def _ret(value, like):
    if np.isscalar(like) or getattr(like, "ndim", 1) == 0:
        return float(value)
    return value


def apply_link(lk: Link, mu):
    """link(mu). Raises LinkDomainError on boundary or out-of-domain input."""
    _check_domain(lk, mu)
    return _ret(lk(mu), mu)


def apply_inv_link(lk: Link, eta):
    """inv_link(eta) for finite eta, clamped into the domain interior."""
    arr = np.asarray(eta, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise LinkDomainError(f"{lk.name}: non-finite linear predictor")
    return _ret(lk.inv(eta), eta)


def inv_link_deriv(lk: Link, eta):
    """d inv_link / d eta at eta (finite input required)."""
    arr = np.asarray(eta, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise LinkDomainError(f"{lk.name}: non-finite linear predictor")
    return _ret(lk.deriv(eta), eta)
