"""Kernel backend selection.

The compiled Cython extension is preferred; the NumPy implementation is the
fallback. `GLMLAB_PURE_PYTHON=1` forces the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

from . import _pure

if os.environ.get("GLMLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND

EPS_CLAMP = _pure.EPS_CLAMP

inv_link = _impl.inv_link
link = _impl.link
inv_link_deriv = _impl.inv_link_deriv
logpdf = _impl.logpdf
logpdf_derivs = _impl.logpdf_derivs
nll = _impl.nll
nll_and_grad = _impl.nll_and_grad
nll_grid = _impl.nll_grid

# Stable integer ids shared by both backends (defined once, in _pure).
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
