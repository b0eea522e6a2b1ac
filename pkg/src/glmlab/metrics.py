"""Parameter-recovery metrics and the per-fit results record.

All metrics target the exposure slope. For posterior fits they are
sampling-based (mean over draws); for Wald fits the point estimate and its
standard error play the roles of posterior mean and sd. ``rmse`` follows the
population-variance convention, so ``rmse**2 == bias**2 + var(draws)``
exactly.

Bias and RMSE live on the linear-predictor scale, which is only comparable
between two models that share one link. Aggregation must therefore never pool
bias/RMSE across links (see :func:`glmlab.harness.aggregate_cells`); rate
metrics (FPR, TPR, ROC, AUC) compare significance decisions and remain valid
across links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "LEVELS", "CSV_COLUMNS", "CellRecord",
    "bias", "rmse", "wald_rmse", "significance",
    "error_rates", "roc_and_auc",
]

LEVELS = (0.5, 0.8, 0.9, 0.95)

# one row of the results table, in exact output order
CSV_COLUMNS = (
    "domain", "dgp_family", "dgp_shape", "dgp_link", "effect",
    "fit_family", "fit_link", "formula", "replicate", "seed", "mode",
    "converged", "bias", "abs_bias", "rmse",
    "sig50", "sig80", "sig90", "sig95", "error",
)

_SIG_KEYS = {"sig50": 0.5, "sig80": 0.8, "sig90": 0.9, "sig95": 0.95}


def bias(values, truth: float) -> float:
    """Mean of the draws (or the point estimate) minus the true slope."""
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("bias needs at least one draw")
    return float(arr.mean() - truth)


def rmse(draws, truth: float) -> float:
    """Root-mean-squared error of the draws around the truth (Var + bias^2)."""
    arr = np.atleast_1d(np.asarray(draws, dtype=np.float64))
    if arr.size < 2:
        raise ValueError("rmse needs at least two draws")
    b = arr.mean() - truth
    var = arr.var()                     # population convention
    return float(math.sqrt(b * b + var))


def wald_rmse(estimate: float, se: float, truth: float) -> float:
    """Wald-mode RMSE: the standard error stands in for the posterior sd."""
    b = estimate - truth
    return float(math.sqrt(b * b + se * se))


def significance(interval) -> bool:
    """True iff zero lies strictly outside the interval; a boundary at
    exactly zero counts as overlap. Non-finite bounds are never significant."""
    lo, hi = interval
    return bool(lo > 0.0 or hi < 0.0)


@dataclass
class CellRecord:
    """One fitted model's outcome: DGP descriptor x model descriptor x metrics."""

    domain: str
    dgp_family: str
    dgp_shape: str
    dgp_link: str
    effect: str                         # "zero" | "positive"
    fit_family: str
    fit_link: str
    formula: str
    replicate: int
    seed: int
    mode: str                           # "wald" | "mcmc"
    converged: bool
    bias: float = math.nan              # nan when cross-link or errored
    abs_bias: float = math.nan
    rmse: float = math.nan
    significant: dict = field(default_factory=dict)   # level -> bool
    error: Optional[str] = None

    @property
    def same_link(self) -> bool:
        return self.fit_link == self.dgp_link

    @property
    def cell_key(self) -> tuple:
        """Everything that identifies an aggregation cell except the replicate."""
        return (self.domain, self.dgp_family, self.dgp_shape, self.dgp_link,
                self.effect, self.fit_family, self.fit_link, self.formula,
                self.mode)

    def to_row(self) -> list:
        def num(v):
            return "" if v is None or not math.isfinite(v) else format(v, ".17g")

        def flag(v):
            return "" if v is None else ("true" if v else "false")

        return [
            self.domain, self.dgp_family, self.dgp_shape, self.dgp_link,
            self.effect, self.fit_family, self.fit_link, self.formula,
            str(self.replicate), str(self.seed), self.mode,
            flag(self.converged), num(self.bias), num(self.abs_bias),
            num(self.rmse),
            flag(self.significant.get(0.5)), flag(self.significant.get(0.8)),
            flag(self.significant.get(0.9)), flag(self.significant.get(0.95)),
            self.error or "",
        ]

    @classmethod
    def from_row(cls, row) -> "CellRecord":
        vals = dict(zip(CSV_COLUMNS, row))

        def num(s):
            return float(s) if s else math.nan

        def flag(s):
            return None if s == "" else s == "true"

        significant = {}
        for col, level in _SIG_KEYS.items():
            v = flag(vals[col])
            if v is not None:
                significant[level] = v
        return cls(
            domain=vals["domain"], dgp_family=vals["dgp_family"],
            dgp_shape=vals["dgp_shape"], dgp_link=vals["dgp_link"],
            effect=vals["effect"], fit_family=vals["fit_family"],
            fit_link=vals["fit_link"], formula=vals["formula"],
            replicate=int(vals["replicate"]), seed=int(vals["seed"]),
            mode=vals["mode"], converged=vals["converged"] == "true",
            bias=num(vals["bias"]), abs_bias=num(vals["abs_bias"]),
            rmse=num(vals["rmse"]), significant=significant,
            error=vals["error"] or None,
        )


def _rate(records, level: float):
    n = 0
    hits = 0
    for r in records:
        n += 1
        if r.significant.get(level, False):
            hits += 1
    return None if n == 0 else hits / n


def error_rates(records, level: float) -> dict:
    """FPR / TPR of the level-ℓ interval over converged fits.

    An empty stratum yields ``None`` (an undefined rate is not a zero rate).
    """
    usable = [r for r in records if r.converged]
    fpr = _rate([r for r in usable if r.effect == "zero"], level)
    tpr = _rate([r for r in usable if r.effect == "positive"], level)
    return {"fpr": fpr, "tpr": tpr}


def roc_and_auc(records, levels=LEVELS):
    """ROC polyline through (0,0), one point per interval level, and (1,1).

    Returns ``(points, auc)``; both are ``None`` when either effect stratum
    has no converged fits.
    """
    pts = []
    for level in levels:
        rates = error_rates(records, level)
        if rates["fpr"] is None or rates["tpr"] is None:
            return None, None
        pts.append((rates["fpr"], rates["tpr"]))
    pts.sort()
    points = [(0.0, 0.0)] + pts + [(1.0, 1.0)]
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    auc = float(np.trapezoid(ys, xs))
    return points, auc
