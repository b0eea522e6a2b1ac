"""Grid orchestration: expand the crossed design, execute it in parallel with
crash isolation and resume support, and aggregate results into report tables.

The unit of work handed to a worker is one dataset together with every model
specification that must be fitted to it, so all specs for a replicate are
guaranteed to see the identical simulated data. Finished rows are journaled
as they arrive; the results CSV is rebuilt in canonical order at the end,
which makes reruns and interrupted-then-resumed runs byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .dgp import DgpConfig, config_for, derive_seed, generate
from .distributions import (POSITIVE_SHAPES, UNIT_SHAPES, get_family)
from .fitting import FORMULAS, MODES, ModelSpec, fit
from .links import get_link
from .metrics import (CSV_COLUMNS, LEVELS, CellRecord, bias as bias_of,
                      error_rates, rmse as rmse_of, roc_and_auc,
                      significance, wald_rmse)

__all__ = [
    "ConfigError",
    "SimConfig",
    "Job",
    "expand_grid",
    "iter_grid",
    "grid_size",
    "run",
    "aggregate",
    "report",
    "read_records",
    "write_records",
    "write_summary",
    "nonconvergence_summary",
    "DOMAINS",
    "WORKERS_ENV",
    "DEFAULT_AGGREGATE_KEYS",
]

WORKERS_ENV = "GLMLAB_WORKERS"

# Canonical domain tokens plus the spelled-out aliases used in prose.
DOMAINS = ("unit", "positive")
_DOMAIN_ALIASES = {
    "unit": "unit",
    "double_bounded": "unit",
    "positive": "positive",
    "lower_bounded": "positive",
}

# The per-link resolution of the "transformed_normal" grid token.
TRANSFORMED_NORMAL = "transformed_normal"
_TRANSFORMED_BY_LINK = {
    "logit": "logit_normal",
    "cauchit": "cauchit_normal",
    "cloglog": "cloglog_normal",
    "log": "log_normal",
    "softplus": "softplus_normal",
}

_DGP_FAMILIES = {
    "unit": ("beta", "kumaraswamy", "simplex", TRANSFORMED_NORMAL),
    "positive": ("gamma", "weibull", TRANSFORMED_NORMAL, "frechet",
                 "beta_prime", "gompertz"),
}
_FIT_FAMILIES = {
    "unit": ("beta", "kumaraswamy", "simplex", TRANSFORMED_NORMAL, "normal"),
    "positive": ("gamma", "weibull", TRANSFORMED_NORMAL, "frechet",
                 "beta_prime", "gompertz", "normal"),
}
_LINKS = {
    "unit": ("logit", "cauchit", "cloglog"),
    "positive": ("log", "softplus"),
}
_SHAPES = {"unit": UNIT_SHAPES, "positive": POSITIVE_SHAPES}

_EFFECTS = ("zero", "positive")
_ALL_FORMULAS = tuple(FORMULAS)

DEFAULT_REPLICATES = 50


class ConfigError(ValueError):
    """A SimConfig that cannot be expanded into a valid grid."""


def _as_tuple(value, what: str) -> tuple:
    if value is None:
        return ()
    if isinstance(value, str):
        value = value.split(",") if "," in value else [value]
    out = tuple(str(v).strip() for v in value if str(v).strip())
    if not out:
        raise ConfigError(f"empty selection for {what}")
    if out == ("none",):
        # Explicit empty selection: keeps only the always-appended
        # normal+identity baseline in the fit grid.
        if what == "fit_families":
            return ()
        raise ConfigError(f"'none' is only meaningful for fit_families, "
                          f"not {what}")
    return out


@dataclass(frozen=True)
class SimConfig:
    """Resolved description of one simulation run.

    Every field is a plain token so the config serializes cleanly into the
    run manifest. Unset grid factors default to the full factorial design
    for the chosen domain; ``normal`` + identity is always appended to the
    fit grid as the baseline and is not listed here.
    """

    domain: str = "unit"
    dgp_families: tuple = ()
    dgp_links: tuple = ()
    shapes: tuple = ()
    effects: tuple = _EFFECTS
    fit_families: tuple = ()
    fit_links: tuple = ()
    formulas: tuple = _ALL_FORMULAS
    replicates: int = DEFAULT_REPLICATES
    fit_mode: str = "wald"
    master_seed: int = 20260815
    workers: int = 0                      # 0 = auto (cpu count, capped at 8)
    output_path: str = "results.csv"
    n_obs: int = 100
    keep_datasets: bool = False

    def __post_init__(self):
        domain = _DOMAIN_ALIASES.get(str(self.domain))
        if domain is None:
            raise ConfigError(
                f"unknown domain {self.domain!r}; expected one of "
                f"{sorted(set(_DOMAIN_ALIASES))}")
        object.__setattr__(self, "domain", domain)

        def resolve(name, default):
            raw = getattr(self, name)
            vals = _as_tuple(raw, name) if raw else tuple(default)
            object.__setattr__(self, name, vals)
            return vals

        dgp_families = resolve("dgp_families", _DGP_FAMILIES[domain])
        dgp_links = resolve("dgp_links", _LINKS[domain])
        shapes = resolve("shapes", _SHAPES[domain])
        effects = resolve("effects", _EFFECTS)
        fit_families = resolve("fit_families", _FIT_FAMILIES[domain])
        fit_links = resolve("fit_links", _LINKS[domain])
        formulas = resolve("formulas", _ALL_FORMULAS)

        for fam in dgp_families:
            self._check_family(fam, domain, allow_normal=False)
        for fam in fit_families:
            self._check_family(fam, domain, allow_normal=True)
        for name in dgp_links + fit_links:
            try:
                link = get_link(name)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
            if link.domain != domain:
                raise ConfigError(
                    f"link {name!r} does not target the {domain} domain "
                    "(identity participates only through the always-appended "
                    "normal baseline)")
        for shape in shapes:
            if shape not in _SHAPES[domain]:
                raise ConfigError(
                    f"shape {shape!r} not defined for the {domain} domain; "
                    f"expected one of {list(_SHAPES[domain])}")
        for effect in effects:
            if effect not in _EFFECTS:
                raise ConfigError(f"unknown effect {effect!r}")
        for formula in formulas:
            if formula not in FORMULAS:
                raise ConfigError(
                    f"unknown formula {formula!r}; expected one of "
                    f"{list(FORMULAS)}")
        if self.fit_mode not in MODES:
            raise ConfigError(f"fit_mode must be one of {MODES}")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be at least 1")
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "workers", int(self.workers))
        object.__setattr__(self, "n_obs", int(self.n_obs))
        if self.n_obs < 1:
            raise ConfigError("n_obs must be at least 1")

    @staticmethod
    def _check_family(token: str, domain: str, allow_normal: bool) -> None:
        if token == TRANSFORMED_NORMAL:
            return
        if token == "normal":
            if allow_normal:
                return
            raise ConfigError(
                "normal is not a data-generating family; it enters only as "
                "a fit likelihood")
        try:
            fam = get_family(token)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        if fam.support != domain:
            raise ConfigError(
                f"family {token!r} has {fam.support} support, not {domain}")

    def to_manifest(self) -> dict:
        return {
            "domain": self.domain,
            "dgp_families": list(self.dgp_families),
            "dgp_links": list(self.dgp_links),
            "shapes": list(self.shapes),
            "effects": list(self.effects),
            "fit_families": list(self.fit_families),
            "fit_links": list(self.fit_links),
            "formulas": list(self.formulas),
            "replicates": self.replicates,
            "fit_mode": self.fit_mode,
            "master_seed": self.master_seed,
            "n_obs": self.n_obs,
        }

    def grid_hash(self) -> str:
        """Stable digest of everything that determines the result rows."""
        text = json.dumps(self.to_manifest(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def resolve_family(token: str, link_name: str) -> str:
    """Concrete family name for a grid token under a given link."""
    if token == TRANSFORMED_NORMAL:
        return _TRANSFORMED_BY_LINK[link_name]
    return token


def fit_specs(config: SimConfig) -> tuple:
    """The deterministic list of ModelSpecs fitted to every dataset."""
    specs = []
    for token in config.fit_families:
        for link in config.fit_links:
            family = resolve_family(token, link)
            for formula in config.formulas:
                specs.append(ModelSpec(family, link, formula,
                                       mode=config.fit_mode))
    for formula in config.formulas:
        specs.append(ModelSpec("normal", "identity", formula,
                               mode=config.fit_mode))
    return tuple(specs)


class Job(NamedTuple):
    """One (dataset, model) pair of the expanded grid."""
    dgp: DgpConfig
    spec: ModelSpec
    replicate: int
    seed: int


class DatasetTask(NamedTuple):
    """One dataset plus every spec fitted to it; jobs are consecutive."""
    job_start: int
    domain: str
    dgp: DgpConfig
    replicate: int
    seed: int
    specs: tuple


def _dgp_configs(config: SimConfig) -> list:
    configs = []
    for token in config.dgp_families:
        for link in config.dgp_links:
            family = resolve_family(token, link)
            for shape in config.shapes:
                for effect in config.effects:
                    configs.append(config_for(family, link, shape, effect,
                                              n_obs=config.n_obs))
    return configs


def iter_tasks(config: SimConfig) -> Iterator[DatasetTask]:
    """Dataset-major iteration over the grid, in canonical order."""
    specs = fit_specs(config)
    job = 0
    for dgp in _dgp_configs(config):
        descriptor = dgp.descriptor()
        for replicate in range(config.replicates):
            seed = derive_seed(config.master_seed, descriptor, replicate)
            yield DatasetTask(job, config.domain, dgp, replicate, seed, specs)
            job += len(specs)


def iter_grid(config: SimConfig) -> Iterator[Job]:
    """Flat deterministic iteration over every (dataset, spec) job."""
    for task in iter_tasks(config):
        for spec in task.specs:
            yield Job(task.dgp, spec, task.replicate, task.seed)


def expand_grid(config: SimConfig) -> list:
    """Materialized grid; every spec for a replicate shares one seed."""
    jobs = list(iter_grid(config))
    if not jobs:
        raise ConfigError("the configuration expands to an empty grid")
    return jobs


def grid_size(config: SimConfig) -> dict:
    """Closed-form grid arithmetic (datasets, specs per dataset, jobs)."""
    n_datasets = (len(config.dgp_families) * len(config.dgp_links)
                  * len(config.shapes) * len(config.effects)
                  * config.replicates)
    n_specs = (len(config.fit_families) * len(config.fit_links) + 1) \
        * len(config.formulas)
    return {"datasets": n_datasets, "specs_per_dataset": n_specs,
            "jobs": n_datasets * n_specs}


# --------------------------------------------------------------------------
# Execution


def _clean_error(exc: Exception) -> str:
    text = f"{type(exc).__name__}: {exc}"
    return " ".join(text.split())


def _record_for(domain: str, dgp: DgpConfig, spec: ModelSpec, replicate: int,
                seed: int, data) -> CellRecord:
    """Fit one spec to one dataset and summarize it as a CellRecord."""
    base = dict(
        domain=domain, dgp_family=dgp.family.name, dgp_shape=dgp.shape,
        dgp_link=dgp.link.name, effect=dgp.effect, fit_family=spec.family,
        fit_link=spec.link, formula=spec.formula, replicate=replicate,
        seed=seed, mode=spec.mode)
    try:
        fit_seed = None
        if spec.mode == "mcmc":
            fit_seed = derive_seed(seed, spec.family, spec.link,
                                   spec.formula, "mcmc")
        result = fit(spec, data, seed=fit_seed)
        significant = {lv: significance(result.intervals[lv])
                       for lv in LEVELS}
        b = abs_b = rm = math.nan
        if spec.link == dgp.link.name:
            truth = data.truth.beta_xy
            if spec.mode == "wald":
                b = result.beta_x - truth
                if result.vcov is not None:
                    se = math.sqrt(max(float(result.vcov[1, 1]), 0.0))
                    rm = wald_rmse(result.beta_x, se, truth)
            else:
                draws = result.pooled_draws()[:, 1]
                b = bias_of(draws, truth)
                rm = rmse_of(draws, truth)
            abs_b = abs(b)
        return CellRecord(converged=result.converged, bias=b, abs_bias=abs_b,
                          rmse=rm, significant=significant, **base)
    except Exception as exc:                      # crash isolation
        return CellRecord(converged=False, error=_clean_error(exc), **base)


_WORKER_KEEP_DIR: Optional[str] = None


def _init_worker(keep_dir: Optional[str]) -> None:
    global _WORKER_KEEP_DIR
    _WORKER_KEEP_DIR = keep_dir


def _dataset_filename(dgp: DgpConfig, replicate: int) -> str:
    return (f"{dgp.family.name}_{dgp.link.name}_{dgp.shape}_{dgp.effect}"
            f"_r{replicate:05d}.csv")


def _run_task(task: DatasetTask) -> list:
    """Worker entry: one dataset, all its fits. Returns (job_index, row)."""
    rows = []
    try:
        data = generate(task.dgp, task.seed)
    except Exception as exc:
        err = _clean_error(exc)
        for offset, spec in enumerate(task.specs):
            rec = CellRecord(
                domain=task.domain, dgp_family=task.dgp.family.name,
                dgp_shape=task.dgp.shape, dgp_link=task.dgp.link.name,
                effect=task.dgp.effect, fit_family=spec.family,
                fit_link=spec.link, formula=spec.formula,
                replicate=task.replicate, seed=task.seed, mode=spec.mode,
                converged=False, error=err)
            rows.append((task.job_start + offset, rec.to_row()))
        return rows
    if _WORKER_KEEP_DIR is not None:
        path = os.path.join(_WORKER_KEEP_DIR,
                            _dataset_filename(task.dgp, task.replicate))
        if not os.path.exists(path):
            data.write_csv(path)
    for offset, spec in enumerate(task.specs):
        rec = _record_for(task.domain, task.dgp, spec, task.replicate,
                          task.seed, data)
        rows.append((task.job_start + offset, rec.to_row()))
    return rows


def resolve_workers(config: SimConfig) -> int:
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(
                f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    else:
        value = config.workers
    if value <= 0:
        value = min(os.cpu_count() or 1, 8)
    return max(value, 1)


def _journal_path(output_path: str) -> str:
    return str(output_path) + ".journal.jsonl"


def _manifest_path(output_path: str) -> str:
    return str(output_path) + ".manifest.json"


def _read_journal(path: str, expected_hash: str) -> dict:
    """Completed rows keyed by job index; last write wins."""
    rows = {}
    if not os.path.exists(path):
        return rows
    with open(path) as fh:
        header = fh.readline()
        if not header:
            return rows
        try:
            meta = json.loads(header)
        except json.JSONDecodeError:
            raise ConfigError(
                f"journal {path} is corrupt; remove it to start over") from None
        if meta.get("grid_hash") != expected_hash:
            raise ConfigError(
                f"journal {path} belongs to a different configuration; "
                "remove it (or change output_path) to start over")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                continue                      # torn tail line after a crash
            rows[int(entry["j"])] = entry["r"]
    return rows


def write_records(rows: Iterable[Sequence[str]], path: str) -> None:
    """Write the canonical results CSV atomically."""
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row)
    os.replace(tmp, path)


def read_records(path: str) -> list:
    """Load a results CSV back into CellRecords."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{path} is not a results table "
                              f"(unexpected header {header!r})")
        for row in reader:
            records.append(CellRecord.from_row(row))
    return records


def nonconvergence_summary(records: Iterable[CellRecord]) -> list:
    """Share of non-converged fits by (fit_family, fit_link), descending."""
    counts = {}
    for rec in records:
        key = (rec.fit_family, rec.fit_link)
        total, bad, errs = counts.get(key, (0, 0, 0))
        counts[key] = (total + 1, bad + (not rec.converged),
                       errs + (rec.error is not None))
    out = []
    for (family, link), (total, bad, errs) in counts.items():
        out.append({"fit_family": family, "fit_link": link, "n": total,
                    "nonconverged_share": bad / total,
                    "error_share": errs / total})
    out.sort(key=lambda r: (-r["nonconverged_share"],
                            r["fit_family"], r["fit_link"]))
    return out


def run(config: SimConfig, echo: bool = False) -> list:
    """Execute the grid; returns the CellRecords in canonical order.

    Side effects: results CSV at ``config.output_path`` (atomic, canonical
    order), an append-only journal next to it (kept for resume), and a run
    manifest. A failing job contributes an error row and never aborts the
    run; I/O failures abort with the journal intact.
    """
    t0 = time.time()
    tasks = list(iter_tasks(config))
    if not tasks:
        raise ConfigError("the configuration expands to an empty grid")
    n_specs = len(tasks[0].specs)
    n_jobs = len(tasks) * n_specs
    grid_hash = config.grid_hash()

    out_path = str(config.output_path)
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    keep_dir = None
    if config.keep_datasets:
        keep_dir = out_path + ".datasets"
        os.makedirs(keep_dir, exist_ok=True)

    journal = _journal_path(out_path)
    rows = _read_journal(journal, grid_hash)
    pending = [t for t in tasks
               if not all(t.job_start + k in rows for k in range(n_specs))]
    if echo:
        print(f"grid: {len(tasks)} datasets x {n_specs} specs = {n_jobs} "
              f"jobs ({len(tasks) - len(pending)} datasets already journaled)")

    manifest = {
        "config": config.to_manifest(),
        "grid_hash": grid_hash,
        "columns": list(CSV_COLUMNS),
        "datasets": len(tasks),
        "specs_per_dataset": n_specs,
        "jobs": n_jobs,
        "version": _package_version(),
    }
    with open(_manifest_path(out_path), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

    fresh_journal = not os.path.exists(journal)
    with open(journal, "a") as jfh:
        if fresh_journal:
            jfh.write(json.dumps({"grid_hash": grid_hash}) + "\n")
            jfh.flush()

        def consume(result_rows):
            for idx, row in result_rows:
                rows[idx] = row
                jfh.write(json.dumps({"j": idx, "r": row},
                                     separators=(",", ":")) + "\n")
            jfh.flush()

        workers = resolve_workers(config)
        if pending:
            if workers == 1:
                _init_worker(keep_dir)
                try:
                    for i, task in enumerate(pending):
                        consume(_run_task(task))
                        if echo and (i + 1) % 50 == 0:
                            print(f"  {i + 1}/{len(pending)} datasets")
                finally:
                    _init_worker(None)
            else:
                with multiprocessing.Pool(
                        workers, initializer=_init_worker,
                        initargs=(keep_dir,)) as pool:
                    done = 0
                    for result_rows in pool.imap_unordered(
                            _run_task, pending, chunksize=1):
                        consume(result_rows)
                        done += 1
                        if echo and done % 50 == 0:
                            print(f"  {done}/{len(pending)} datasets")

    ordered = [rows[i] for i in sorted(rows)]
    if len(ordered) != n_jobs:
        missing = n_jobs - len(ordered)
        raise RuntimeError(f"{missing} jobs missing after execution; "
                           f"journal kept at {journal}")
    write_records(ordered, out_path)

    records = [CellRecord.from_row(row) for row in ordered]
    if echo:
        elapsed = time.time() - t0
        n_err = sum(1 for r in records if r.error is not None)
        print(f"wrote {len(records)} rows to {out_path} "
              f"({elapsed:.1f}s, {n_err} error rows)")
        print("non-convergence by fit family/link:")
        for item in nonconvergence_summary(records)[:12]:
            print(f"  {item['fit_family']:>16s} + {item['fit_link']:<9s} "
                  f"{item['nonconverged_share']:6.1%} of {item['n']}")
    return records


def _package_version() -> str:
    from . import __version__
    return __version__


# --------------------------------------------------------------------------
# Aggregation


DEFAULT_AGGREGATE_KEYS = ("domain", "dgp_family", "dgp_shape", "dgp_link",
                          "fit_family", "fit_link", "formula", "mode")

_LEVEL_TAGS = {0.5: "50", 0.8: "80", 0.9: "90", 0.95: "95"}


def _quant117(values: list) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    med, lo, hi = np.quantile(arr, [0.5, 0.025, 0.975])
    return float(med), float(lo), float(hi)


def aggregate(records: Iterable[CellRecord],
              by: Sequence[str] = DEFAULT_AGGREGATE_KEYS) -> list:
    """Per-group summary: recovery quantiles, error rates, ROC and AUC.

    Median and central-95% range of rmse / abs_bias are reported only when
    every record in the group has fit link == dgp link (cross-link recovery
    comparisons are refused; the corresponding fields are None). FPR/TPR
    per level, ROC points, and AUC are computed over converged fits and are
    None whenever the needed effect stratum is empty. Never pools modes:
    include "mode" in the keys (the default does).
    """
    records = list(records)
    if not records:
        raise ValueError("aggregate needs a nonempty record collection")
    by = tuple(by)
    for key in by:
        if key not in CSV_COLUMNS:
            raise ConfigError(f"unknown grouping key {key!r}")

    groups = {}
    for rec in records:
        groups.setdefault(tuple(getattr(rec, k) for k in by), []).append(rec)

    out = []
    for key in sorted(groups):
        grp = groups[key]
        row = dict(zip(by, key))
        row["n_models"] = len(grp)
        row["n_converged"] = sum(r.converged for r in grp)
        row["converged_share"] = row["n_converged"] / row["n_models"]
        row["error_share"] = sum(r.error is not None for r in grp) / len(grp)

        same_link = all(r.same_link for r in grp)
        for metric in ("rmse", "abs_bias"):
            med = lo = hi = None
            if same_link:
                vals = [getattr(r, metric) for r in grp
                        if r.converged and math.isfinite(getattr(r, metric))]
                if vals:
                    med, lo, hi = _quant117(vals)
            row[f"{metric}_median"] = med
            row[f"{metric}_q025"] = lo
            row[f"{metric}_q975"] = hi

        for level, tag in _LEVEL_TAGS.items():
            rates = error_rates(grp, level)
            row[f"fpr{tag}"] = rates["fpr"]
            row[f"tpr{tag}"] = rates["tpr"]
        points, auc = roc_and_auc(grp)
        row["roc_points"] = points
        row["auc"] = auc
        out.append(row)
    return out


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_summary(rows: list, path: str,
                  drop: Sequence[str] = ("roc_points",)) -> None:
    """Serialize aggregate() output; list-valued columns are dropped."""
    if not rows:
        raise ValueError("no summary rows to write")
    columns = [c for c in rows[0] if c not in drop]
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(c)) for c in columns])
    os.replace(tmp, path)


def _roc_point_rows(records: list, by: Sequence[str]) -> list:
    """Long-format ROC points (level, fpr, tpr) per group."""
    out = []
    for row in aggregate(records, by=by):
        for level, tag in _LEVEL_TAGS.items():
            fpr, tpr = row[f"fpr{tag}"], row[f"tpr{tag}"]
            if fpr is None or tpr is None:
                continue
            point = {k: row[k] for k in by}
            point.update(level=level, fpr=fpr, tpr=tpr)
            out.append(point)
    return out


def report(records_or_path, out_dir: str) -> dict:
    """Emit the standard report tables; returns {name: path}.

    Tables: same-link RMSE by data x fit likelihood, ROC points by fit
    configuration, AUC marginals by likelihood pair and by link pair, and
    the non-convergence table by fit family/link.
    """
    if isinstance(records_or_path, (str, os.PathLike)):
        records = read_records(str(records_or_path))
    else:
        records = list(records_or_path)
    if not records:
        raise ConfigError("no records to report on")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    same_link = [r for r in records if r.same_link]
    if same_link:
        rows = aggregate(same_link, by=("domain", "dgp_link", "dgp_shape",
                                        "dgp_family", "fit_family", "mode"))
        keep = ["domain", "dgp_link", "dgp_shape", "dgp_family",
                "fit_family", "mode", "n_models", "n_converged",
                "rmse_median", "rmse_q025", "rmse_q975",
                "abs_bias_median", "abs_bias_q025", "abs_bias_q975"]
        trimmed = [{k: row[k] for k in keep} for row in rows]
        paths["rmse_by_likelihood"] = os.path.join(
            out_dir, "rmse_by_likelihood.csv")
        write_summary(trimmed, paths["rmse_by_likelihood"])

    roc_by = ("domain", "dgp_family", "dgp_link", "fit_family", "fit_link",
              "mode")
    roc_rows = _roc_point_rows(records, roc_by)
    if roc_rows:
        paths["roc_points"] = os.path.join(out_dir, "roc_points.csv")
        write_summary(roc_rows, paths["roc_points"])

    for name, keys in (
            ("auc_by_likelihood", ("domain", "dgp_family", "fit_family",
                                   "mode")),
            ("auc_by_link", ("domain", "dgp_link", "fit_link", "mode"))):
        rows = aggregate(records, by=keys)
        keep = list(keys) + ["n_models", "n_converged", "auc"]
        trimmed = [{k: row[k] for k in keep} for row in rows]
        paths[name] = os.path.join(out_dir, f"{name}.csv")
        write_summary(trimmed, paths[name])

    conv = nonconvergence_summary(records)
    paths["convergence"] = os.path.join(out_dir, "convergence.csv")
    write_summary(conv, paths["convergence"])
    return paths
