"""Monte-Carlo experiment harness.

A ScenarioConfig is a grid of process/estimator settings plus a seed
count. run_scenario expands the grid, derives one independent seed per
(cell, replication) from the scenario content (so results are independent
of execution order and worker count), runs every configured method, and
returns flat ResultRecords. Records serialize to a stable CSV whose
digest ignores only the wall-clock column.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import estimate_homl, estimate_oml, ols_joint
from .dgp import NONLINEARITY_NAMES, Dataset, PlrSpec, multi_treatment_theta, simulate
from .distributions import NoiseSpec
from .ica import CONTRASTS, estimate_ica

WORKERS_ENV = "PLRICA_WORKERS"
METHOD_NAMES = ("ica", "oml", "homl", "ols")

CSV_HEADER = (
    "scenario,n,dim_x,n_treat,beta,nonlinearity,contrast,method,seed,"
    "theta_true,theta_hat,mse,rel_err,converged,wall_ms"
)

# grid axes in canonical order; the first four plus nonlinearity/contrast
# have dedicated CSV columns, the rest are folded into the scenario id
AXIS_ORDER = ("n", "dim_x", "n_treat", "beta", "nonlinearity", "slope",
              "location", "scale", "contrast", "sparsity", "coefficient")
SUFFIX_AXES = ("slope", "location", "scale", "sparsity", "coefficient")


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


class MetricError(ValueError):
    """Incomparable effect vectors."""


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True)
class Metrics:
    """Error summary for one estimate: mse is the Euclidean distance
    ||theta_true - theta_hat||_2, relative_error divides it by
    ||theta_true||_2."""

    mse: float
    relative_error: float


def metrics(theta_true, theta_hat, multi_match: bool = False) -> Metrics:
    """Distance between true and estimated effect vectors.

    With multi_match the estimate is first aligned to the truth by the
    best signed permutation (source labels and signs are not ordered
    across treatments), which can only reduce the distance. Non-finite
    estimates yield nan metrics.
    """
    tt = np.atleast_1d(np.asarray(theta_true, dtype=float))
    th = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    if tt.shape != th.shape or tt.ndim != 1:
        raise MetricError(f"shape mismatch: {tt.shape} vs {th.shape}")
    if not np.all(np.isfinite(tt)):
        raise MetricError("theta_true must be finite")
    norm_true = float(np.linalg.norm(tt))
    if not np.all(np.isfinite(th)):
        return Metrics(mse=math.nan, relative_error=math.nan)
    m = tt.size
    if multi_match and m > 1:
        best = math.inf
        for perm in itertools.permutations(range(m)):
            errs = np.minimum(np.abs(tt - th[list(perm)]), np.abs(tt + th[list(perm)]))
            best = min(best, float(errs @ errs))
        dist = math.sqrt(best)
    else:
        dist = float(np.linalg.norm(tt - th))
    rel = dist / norm_true if norm_true > 0 else math.nan
    return Metrics(mse=dist, relative_error=rel)


# ----------------------------------------------------------- result rows


@dataclass(eq=False)
class ResultRecord:
    """One estimator run on one simulated dataset."""

    scenario: str
    n: int
    dim_x: int
    n_treat: int
    beta: Optional[float]
    nonlinearity: str
    contrast: str
    method: str
    seed: int
    theta_true: np.ndarray
    theta_hat: np.ndarray
    mse: float
    relative_error: float
    converged: bool
    wall_ms: float
    notes: str = ""

    @property
    def squared_error(self) -> float:
        return self.mse * self.mse


# ------------------------------------------------------------- scenarios


@dataclass(eq=False)
class ScenarioConfig:
    """Grid of settings for one study.

    Swept axes multiply: every combination of the non-empty axis lists
    becomes one cell, run with `seeds` independent replications. The plr
    field is a template; per cell its dimensions, noises, and coefficient
    policy are rewritten by the axis values (a dim_x or n_treat value that
    differs from the template therefore requires drawn, not supplied,
    coefficient blocks). location/scale axes additionally disable noise
    standardization, since they exist to move the noise away from the
    standardized regime.
    """

    scenario: str
    plr: PlrSpec
    sample_sizes: tuple = (100, 200, 500, 1000, 2000, 5000)
    covariate_dims: tuple = (2, 5, 10, 20, 50)
    treatment_counts: tuple = ()
    beta_values: tuple = ()
    nonlinearities: tuple = ()
    leaky_slopes: tuple = ()
    locations: tuple = ()
    scales: tuple = ()
    contrasts: tuple = ("logcosh",)
    sparsity_levels: tuple = ()
    coefficient_values: tuple = ()
    seeds: int = 20
    methods: tuple = ("ica",)
    lambda_scale: float = 1.0
    folds: int = 2
    tol: float = 1e-4
    max_iter: int = 1000
    ica_mode: str = "parallel"

    def validate(self) -> None:
        if not self.scenario or not isinstance(self.scenario, str):
            raise ConfigError("scenario must be a non-empty name")
        for name in ("sample_sizes", "covariate_dims", "contrasts", "methods"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        for name in ("sample_sizes", "covariate_dims", "treatment_counts"):
            vals = getattr(self, name)
            if any((not isinstance(v, int)) or v < 1 for v in vals):
                raise ConfigError(f"{name} entries must be positive integers, got {vals}")
        for name in ("beta_values", "leaky_slopes", "scales"):
            if any(not v > 0 for v in getattr(self, name)):
                raise ConfigError(f"{name} entries must be positive")
        if any(not 0 < v <= 1 for v in self.sparsity_levels):
            raise ConfigError("sparsity_levels must lie in (0, 1]")
        for v in self.nonlinearities:
            if v not in NONLINEARITY_NAMES:
                raise ConfigError(f"unknown nonlinearity {v!r}; expected one of {NONLINEARITY_NAMES}")
        for v in self.contrasts:
            if v not in CONTRASTS:
                raise ConfigError(f"unknown contrast {v!r}; expected one of {tuple(CONTRASTS)}")
        for v in self.methods:
            if v not in METHOD_NAMES:
                raise ConfigError(f"unknown method {v!r}; expected one of {METHOD_NAMES}")
        if self.seeds < 1:
            raise ConfigError("seeds must be at least 1")
        if self.folds < 2 or self.max_iter < 1 or not self.tol > 0 or not self.lambda_scale > 0:
            raise ConfigError("invalid estimator settings (folds/max_iter/tol/lambda_scale)")
        if self.ica_mode not in ("parallel", "deflation"):
            raise ConfigError(f"unknown ica_mode {self.ica_mode!r}")
        dims_vary = any(d != self.plr.p for d in self.covariate_dims)
        treat_vary = bool(self.treatment_counts)
        if (dims_vary or treat_vary or self.sparsity_levels) and (
            self.plr.a_block is not None or self.plr.b_block is not None
        ):
            raise ConfigError(
                "dim/treatment/sparsity sweeps need drawn coefficient blocks; "
                "remove a_block/b_block from the template"
            )
        if self.coefficient_values and self.plr.tie_ab:
            raise ConfigError("coefficient_values supplies blocks; incompatible with tie_ab")

    def cells(self) -> list[dict]:
        """All axis combinations in canonical order."""
        axes: list[tuple[str, tuple]] = [
            ("n", tuple(self.sample_sizes)),
            ("dim_x", tuple(self.covariate_dims)),
        ]
        optional = (
            ("n_treat", self.treatment_counts),
            ("beta", self.beta_values),
            ("nonlinearity", self.nonlinearities),
            ("slope", self.leaky_slopes),
            ("location", self.locations),
            ("scale", self.scales),
        )
        for name, vals in optional:
            if vals:
                axes.append((name, tuple(vals)))
        axes.append(("contrast", tuple(self.contrasts)))
        for name, vals in (("sparsity", self.sparsity_levels),
                           ("coefficient", self.coefficient_values)):
            if vals:
                axes.append((name, tuple(vals)))
        names = [name for name, _ in axes]
        return [dict(zip(names, combo))
                for combo in itertools.product(*(vals for _, vals in axes))]


def scenario_id_for_cell(config: ScenarioConfig, cell: dict) -> str:
    """Scenario name, suffixed with axis values that lack CSV columns."""
    extras = [f"{k}={cell[k]:g}" for k in SUFFIX_AXES if k in cell]
    if extras:
        return f"{config.scenario}[{','.join(extras)}]"
    return config.scenario


def cell_seed(scenario: str, cell: dict, index: int) -> int:
    """Deterministic 63-bit seed derived from cell content, not order."""
    parts = [scenario]
    for key in AXIS_ORDER:
        if key in cell:
            parts.append(f"{key}={cell[key]!r}")
    parts.append(f"replication={index}")
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def spec_for_cell(config: ScenarioConfig, cell: dict) -> PlrSpec:
    """Instantiate the plr template at one grid cell."""
    base = config.plr
    p = cell["dim_x"]
    if "n_treat" in cell:
        m = cell["n_treat"]
        theta = multi_treatment_theta(m)
    else:
        m = base.m
        theta = base.theta
    a_block = base.a_block if p == base.p and m == base.m else None
    b_block = base.b_block if p == base.p else None
    if "coefficient" in cell:
        c = cell["coefficient"]
        a_block = np.zeros((m, p))
        a_block[:, 0] = c
        b_block = np.zeros(p)
        b_block[0] = c
    noise_x = base.noise_x
    if "beta" in cell:
        noise_x = NoiseSpec.generalized_normal(cell["beta"])
    noise_t, noise_y = base.noise_t, base.noise_y
    standardize = base.standardize_noise
    if "location" in cell or "scale" in cell:
        kw = {}
        if "location" in cell:
            kw["location"] = float(cell["location"])
        if "scale" in cell:
            kw["scale"] = float(cell["scale"])
        noise_x = replace(noise_x, **kw)
        noise_t = replace(noise_t, **kw)
        noise_y = replace(noise_y, **kw)
        standardize = False
    tie = base.tie_ab and a_block is None and b_block is None
    return PlrSpec(
        p=p,
        m=m,
        theta=theta,
        a_block=a_block,
        b_block=b_block,
        nuisance=cell.get("nonlinearity", base.nuisance),
        leaky_slope=cell.get("slope", base.leaky_slope),
        noise_x=noise_x,
        noise_t=noise_t,
        noise_y=noise_y,
        sparsity_keep_prob=cell.get("sparsity", base.sparsity_keep_prob),
        standardize_noise=standardize,
        tie_ab=tie,
    )


def _estimate_for_method(method: str, dataset: Dataset, config: ScenarioConfig,
                         cell: dict, ica_seed):
    if method == "ica":
        return estimate_ica(dataset, contrast=cell["contrast"], tol=config.tol,
                            max_iter=config.max_iter, mode=config.ica_mode, seed=ica_seed)
    if method == "oml":
        return estimate_oml(dataset, lambda_scale=config.lambda_scale, folds=config.folds,
                            tol=config.tol, max_iter=config.max_iter)
    if method == "homl":
        estimate, _ = estimate_homl(dataset, lambda_scale=config.lambda_scale,
                                    folds=config.folds, tol=config.tol,
                                    max_iter=config.max_iter)
        return estimate
    return ols_joint(dataset)


def _record_beta(cell: dict, spec: PlrSpec) -> Optional[float]:
    if "beta" in cell:
        return float(cell["beta"])
    if spec.noise_x.family == "generalized_normal":
        return float(spec.noise_x.shape_beta)
    return None


def run_cell_replication(config: ScenarioConfig, cell: dict, index: int) -> list[ResultRecord]:
    """One simulated dataset, every configured method."""
    seed = cell_seed(config.scenario, cell, index)
    data_seq, ica_seq = np.random.SeedSequence(seed).spawn(2)
    spec = spec_for_cell(config, cell)
    dataset = simulate(spec, cell["n"], data_seq)
    truth = dataset.ground_truth.theta
    resolved = dataset.ground_truth.spec
    scenario_id = scenario_id_for_cell(config, cell)
    records = []
    for method in config.methods:
        start = time.perf_counter()
        notes = ""
        try:
            est = _estimate_for_method(method, dataset, config, cell, ica_seq)
            theta_hat = np.atleast_1d(np.asarray(est.theta_hat, dtype=float))
            converged = est.diagnostics.converged
            notes = est.diagnostics.notes
        except Exception as exc:  # a failed run is a data point, not a crash
            theta_hat = np.full(spec.m, math.nan)
            converged = False
            notes = f"{type(exc).__name__}: {exc}"
        wall_ms = (time.perf_counter() - start) * 1e3
        if theta_hat.shape != truth.shape:
            theta_hat = np.full(truth.shape, math.nan)
            converged = False
            notes = notes or "estimator returned wrong effect count"
        met = metrics(truth, theta_hat, multi_match=spec.m > 1)
        records.append(ResultRecord(
            scenario=scenario_id,
            n=int(cell["n"]),
            dim_x=int(cell["dim_x"]),
            n_treat=int(spec.m),
            beta=_record_beta(cell, resolved),
            nonlinearity=spec.nuisance,
            contrast=cell["contrast"] if method == "ica" else "",
            method=method,
            seed=seed,
            theta_true=truth.copy(),
            theta_hat=theta_hat,
            mse=met.mse,
            relative_error=met.relative_error,
            converged=bool(converged),
            wall_ms=wall_ms,
            notes=notes,
        ))
    return records


def _run_task(args) -> list[ResultRecord]:
    return run_cell_replication(*args)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit argument wins, then the PLRICA_WORKERS variable, then 1."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        if raw:
            try:
                workers = int(raw)
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        else:
            workers = 1
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}")
    return workers


def run_scenario(config: ScenarioConfig, workers: Optional[int] = None) -> list[ResultRecord]:
    """Run every (cell, replication, method) combination.

    Output order and content are independent of the worker count; each
    replication's seed is derived from the scenario content. Estimator
    failures become nan-valued records instead of aborting the sweep.
    """
    config.validate()
    workers = resolve_workers(workers)
    tasks = [(config, cell, i) for cell in config.cells() for i in range(config.seeds)]
    if workers == 1 or len(tasks) <= 1:
        chunks = map(_run_task, tasks)
        return [rec for chunk in chunks for rec in chunk]
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_run_task, tasks, chunksize=chunksize))
    return [rec for chunk in chunks for rec in chunk]


# ------------------------------------------------------------- csv layer


def _fmt(value: float) -> str:
    return "%.17g" % float(value)


def _fmt_vector(vec: np.ndarray) -> str:
    return ";".join(_fmt(v) for v in np.atleast_1d(vec))


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(";")], dtype=float)


def emit_csv(records: list[ResultRecord], path) -> None:
    """Write records in their given order; floats carry 17 significant
    digits so they round-trip exactly."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for r in records:
            writer.writerow([
                r.scenario,
                str(r.n),
                str(r.dim_x),
                str(r.n_treat),
                "" if r.beta is None else _fmt(r.beta),
                r.nonlinearity,
                r.contrast,
                r.method,
                str(r.seed),
                _fmt_vector(r.theta_true),
                _fmt_vector(r.theta_hat),
                _fmt(r.mse),
                _fmt(r.relative_error),
                "true" if r.converged else "false",
                _fmt(r.wall_ms),
            ])


def read_records(path) -> list[ResultRecord]:
    """Parse a results CSV back into records (notes are not serialized)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or rows[0] != CSV_HEADER.split(","):
        raise ConfigError(f"unexpected results header in {path}")
    records = []
    for row in rows[1:]:
        if len(row) != 15:
            raise ConfigError(f"expected 15 columns, got {len(row)} in {path}")
        records.append(ResultRecord(
            scenario=row[0],
            n=int(row[1]),
            dim_x=int(row[2]),
            n_treat=int(row[3]),
            beta=None if row[4] == "" else float(row[4]),
            nonlinearity=row[5],
            contrast=row[6],
            method=row[7],
            seed=int(row[8]),
            theta_true=_parse_vector(row[9]),
            theta_hat=_parse_vector(row[10]),
            mse=float(row[11]),
            relative_error=float(row[12]),
            converged=row[13] == "true",
            wall_ms=float(row[14]),
        ))
    return records


def csv_digest(path) -> str:
    """Content hash of a results CSV, ignoring the wall-clock column.

    Two runs of the same scenario (any worker count) produce the same
    digest; wall_ms is the only field that legitimately differs.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"empty csv {path}")
    wall_idx = rows[0].index("wall_ms")
    hasher = hashlib.sha256()
    for row in rows:
        kept = row[:wall_idx] + row[wall_idx + 1 :]
        hasher.update("\x1f".join(kept).encode("utf-8"))
        hasher.update(b"\x1e")
    return hasher.hexdigest()


# ----------------------------------------------------------- aggregation


@dataclass(frozen=True)
class CellStats:
    """Per-cell summary over replications.

    Means and standard deviations cover the runs that produced a finite
    distance; n_failed counts the rest. std_mse uses ddof=1 (0.0 for a
    single run).
    """

    count: int
    n_failed: int
    n_converged: int
    mean_mse: float
    std_mse: float
    mean_rel_err: float
    mean_squared_error: float


AGG_KEY_FIELDS = ("scenario", "n", "dim_x", "n_treat", "beta", "nonlinearity",
                  "contrast", "method")


def record_key(record: ResultRecord) -> tuple:
    return tuple(getattr(record, f) for f in AGG_KEY_FIELDS)


def aggregate(records: list[ResultRecord]) -> dict[tuple, CellStats]:
    """Group records by cell key and summarize the error distributions."""
    groups: dict[tuple, list[ResultRecord]] = {}
    for rec in records:
        groups.setdefault(record_key(rec), []).append(rec)
    out = {}
    for key, recs in groups.items():
        mses = np.array([r.mse for r in recs])
        ok = np.isfinite(mses)
        n_ok = int(ok.sum())
        mean_mse = float(mses[ok].mean()) if n_ok else math.nan
        std_mse = float(mses[ok].std(ddof=1)) if n_ok > 1 else 0.0
        rels = np.array([r.relative_error for r in recs])[ok]
        mean_rel = float(rels[np.isfinite(rels)].mean()) if np.isfinite(rels).any() else math.nan
        msq = float((mses[ok] ** 2).mean()) if n_ok else math.nan
        out[key] = CellStats(
            count=len(recs),
            n_failed=len(recs) - n_ok,
            n_converged=sum(1 for r in recs if r.converged),
            mean_mse=mean_mse,
            std_mse=std_mse,
            mean_rel_err=mean_rel,
            mean_squared_error=msq,
        )
    return out


def overlap_band(mean_a: float, std_a: float, mean_b: float, std_b: float) -> bool:
    """True when the one-standard-deviation bands intersect."""
    return (mean_a - std_a) <= (mean_b + std_b) and (mean_b - std_b) <= (mean_a + std_a)


def band_verdict(stats_a: CellStats, stats_b: CellStats) -> str:
    """'a_better' / 'b_better' when one band sits strictly below the
    other, 'overlap' otherwise."""
    if overlap_band(stats_a.mean_mse, stats_a.std_mse, stats_b.mean_mse, stats_b.std_mse):
        return "overlap"
    return "a_better" if stats_a.mean_mse < stats_b.mean_mse else "b_better"


# ------------------------------------------------------------ config I/O


_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def _split_list_items(inner: str) -> list[str]:
    items, depth, cur = [], 0, []
    for ch in inner:
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"unbalanced parentheses in {inner!r}")
        cur.append(ch)
    if depth != 0:
        raise ConfigError(f"unbalanced parentheses in {inner!r}")
    tail = "".join(cur).strip()
    if tail:
        items.append(tail)
    if any(item == "" for item in items):
        raise ConfigError(f"empty item in list {inner!r}")
    return items


def _parse_atom(text: str):
    s = text.strip()
    if (s.startswith('"') and s.endswith('"')) or (s.startswith("'") and s.endswith("'")):
        return s[1:-1]
    if re.fullmatch(r"[+-]?\d+", s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        pass
    if s in ("true", "false"):
        return s == "true"
    return s


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines; `[a, b]` values become lists.

    # starts a comment. Duplicate keys are rejected.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        if value.startswith("[") and value.endswith("]"):
            out[key] = [_parse_atom(item) for item in _split_list_items(value[1:-1])]
        else:
            out[key] = _parse_atom(value)
    return out


_NOISE_ALIASES = {
    "gaussian": "gaussian", "normal": "gaussian",
    "laplace": "laplace",
    "uniform": "uniform",
    "gennorm": "generalized_normal", "generalized_normal": "generalized_normal",
    "three_point": "discrete_symmetric", "discrete": "discrete_symmetric",
}
_NOISE_ARG_ALIASES = {"loc": "location", "location": "location",
                      "scale": "scale", "beta": "shape_beta", "shape_beta": "shape_beta"}


def parse_noise(text) -> NoiseSpec:
    """Noise string like `laplace`, `gennorm(1.5)`, `uniform(loc=1, scale=2)`.

    The positional argument is shape beta for gennorm, location otherwise.
    """
    if isinstance(text, NoiseSpec):
        return text
    s = str(text).strip()
    m = re.fullmatch(r"([a-z_]+)\s*(?:\((.*)\))?", s)
    if not m or m.group(1) not in _NOISE_ALIASES:
        raise ConfigError(
            f"bad noise {text!r}; expected one of {sorted(set(_NOISE_ALIASES))} "
            "optionally with (args)"
        )
    family = _NOISE_ALIASES[m.group(1)]
    kwargs: dict = {}
    positional: list[float] = []
    if m.group(2) is not None and m.group(2).strip():
        for item in _split_list_items(m.group(2)):
            if "=" in item:
                k, _, v = item.partition("=")
                k = k.strip()
                if k not in _NOISE_ARG_ALIASES:
                    raise ConfigError(f"unknown noise argument {k!r} in {text!r}")
                kwargs[_NOISE_ARG_ALIASES[k]] = float(v)
            else:
                positional.append(float(item))
    if positional:
        pos_keys = (["shape_beta", "location", "scale"] if family == "generalized_normal"
                    else ["location", "scale"])
        if len(positional) > len(pos_keys):
            raise ConfigError(f"too many positional arguments in {text!r}")
        for k, v in zip(pos_keys, positional):
            if k in kwargs:
                raise ConfigError(f"argument {k!r} given twice in {text!r}")
            kwargs[k] = v
    try:
        if family == "generalized_normal":
            if "shape_beta" not in kwargs:
                raise ConfigError(f"gennorm needs a beta value, e.g. gennorm(1.5): {text!r}")
            return NoiseSpec.generalized_normal(kwargs.pop("shape_beta"), **kwargs)
        if family == "discrete_symmetric":
            return NoiseSpec.three_point(**kwargs)
        return NoiseSpec(family, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"bad noise {text!r}: {exc}") from None


_SPEC_KEYS = ("m", "theta", "nuisance", "leaky_slope", "noise_x", "noise_t",
              "noise_y", "sparsity_keep_prob", "standardize_noise", "tie_ab")
_INT_LIST_KEYS = ("sample_sizes", "covariate_dims", "treatment_counts")
_FLOAT_LIST_KEYS = ("beta_values", "leaky_slopes", "locations", "scales",
                    "sparsity_levels", "coefficient_values")
_STR_LIST_KEYS = ("nonlinearities", "contrasts", "methods")
_SCALAR_KEYS = {"seeds": int, "folds": int, "max_iter": int,
                "lambda_scale": float, "tol": float, "ica_mode": str, "label": str}


def _as_tuple(value) -> tuple:
    return tuple(value) if isinstance(value, list) else (value,)


def build_plr_spec(overrides: dict, base: Optional[PlrSpec] = None, p: Optional[int] = None) -> PlrSpec:
    """PlrSpec from flat config keys, on top of an optional template."""
    unknown = set(overrides) - set(_SPEC_KEYS) - {"p"}
    if unknown:
        raise ConfigError(f"unknown spec keys {sorted(unknown)}; expected {('p',) + _SPEC_KEYS}")
    if base is None:
        base = PlrSpec(
            p=10, m=1, theta=[3.0],
            noise_x=NoiseSpec.generalized_normal(1.0),
            noise_t=NoiseSpec.three_point(),
            noise_y=NoiseSpec.uniform(),
            sparsity_keep_prob=0.4,
        )
    m = int(overrides.get("m", base.m))
    if "theta" in overrides:
        theta = [float(v) for v in _as_tuple(overrides["theta"])]
    elif m == base.m:
        theta = base.theta
    else:
        theta = multi_treatment_theta(m)
    try:
        return PlrSpec(
            p=int(overrides.get("p", p if p is not None else base.p)),
            m=m,
            theta=theta,
            nuisance=str(overrides.get("nuisance", base.nuisance)),
            leaky_slope=float(overrides.get("leaky_slope", base.leaky_slope)),
            noise_x=parse_noise(overrides.get("noise_x", base.noise_x)),
            noise_t=parse_noise(overrides.get("noise_t", base.noise_t)),
            noise_y=parse_noise(overrides.get("noise_y", base.noise_y)),
            sparsity_keep_prob=float(overrides.get("sparsity_keep_prob", base.sparsity_keep_prob)),
            standardize_noise=bool(overrides.get("standardize_noise", base.standardize_noise)),
            tie_ab=bool(overrides.get("tie_ab", base.tie_ab)),
        )
    except ValueError as exc:
        raise ConfigError(f"bad process spec: {exc}") from None


def spec_from_config(source) -> PlrSpec:
    """PlrSpec from config text or a parsed dict (process keys only)."""
    d = dict(parse_config_text(source)) if isinstance(source, str) else dict(source)
    return build_plr_spec(d)


def scenario_from_config(source) -> ScenarioConfig:
    """ScenarioConfig from config text or a parsed dict.

    The `scenario` key picks a registered template (see BUILTIN_SCENARIOS;
    default `custom`); every other key overrides that template. Unknown
    keys are errors, never silently ignored.
    """
    d = dict(parse_config_text(source)) if isinstance(source, str) else dict(source)
    name = str(d.pop("scenario", "custom"))
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError(
            f"unknown scenario {name!r}; available: {sorted(BUILTIN_SCENARIOS)}"
        )
    config = BUILTIN_SCENARIOS[name]()
    label = str(d.pop("label", config.scenario))
    spec_overrides = {k: d.pop(k) for k in list(d) if k in _SPEC_KEYS}
    kwargs: dict = {}
    for key in list(d):
        if key in _INT_LIST_KEYS:
            kwargs[key] = tuple(int(v) for v in _as_tuple(d.pop(key)))
        elif key in _FLOAT_LIST_KEYS:
            kwargs[key] = tuple(float(v) for v in _as_tuple(d.pop(key)))
        elif key in _STR_LIST_KEYS:
            kwargs[key] = tuple(str(v) for v in _as_tuple(d.pop(key)))
        elif key in _SCALAR_KEYS:
            kwargs[key] = _SCALAR_KEYS[key](d.pop(key))
    if d:
        known = sorted(set(("scenario",) + _INT_LIST_KEYS + _FLOAT_LIST_KEYS
                           + _STR_LIST_KEYS + tuple(_SCALAR_KEYS) + _SPEC_KEYS))
        raise ConfigError(f"unknown config keys {sorted(d)}; expected a subset of {known}")
    plr = build_plr_spec(spec_overrides, base=config.plr) if spec_overrides else config.plr
    for key, value in kwargs.items():
        setattr(config, key, value)
    config.plr = plr
    config.scenario = label
    config.validate()
    return config


# ------------------------------------------------------ builtin scenarios


def _linear_benchmark_spec(p: int = 10, beta: float = 1.0, theta: float = 3.0,
                           tie_ab: bool = False) -> PlrSpec:
    return PlrSpec(
        p=p, m=1, theta=[theta],
        noise_x=NoiseSpec.generalized_normal(beta),
        noise_t=NoiseSpec.three_point(),
        noise_y=NoiseSpec.uniform(),
        sparsity_keep_prob=0.4,
        tie_ab=tie_ab,
    )


def _laplace_spec(p: int = 10, m: int = 1, nuisance: str = "linear") -> PlrSpec:
    return PlrSpec(
        p=p, m=m, theta=multi_treatment_theta(m),
        nuisance=nuisance,
        noise_x=NoiseSpec.laplace(),
        noise_t=NoiseSpec.laplace(),
        noise_y=NoiseSpec.laplace(),
        sparsity_keep_prob=0.4 if nuisance == "linear" else 1.0,
    )


def _fig2_linear_homl():
    return ScenarioConfig(
        scenario="fig2_linear_homl",
        plr=_linear_benchmark_spec(),
        beta_values=(1.0,),
        methods=("ica", "oml", "homl"),
    )


def _fig2_right_variance():
    return ScenarioConfig(
        scenario="fig2_right_variance",
        plr=_linear_benchmark_spec(p=10, theta=1.0),
        sample_sizes=(10_000,),
        covariate_dims=(10,),
        coefficient_values=(0.0, 0.25, 0.5, 0.75, 1.0),
        seeds=50,
        methods=("ica", "homl"),
    )


def _fig3_left_multi():
    return ScenarioConfig(
        scenario="fig3_left_multi",
        plr=_laplace_spec(),
        sample_sizes=(5000,),
        treatment_counts=(1, 2, 5),
        methods=("ica", "ols"),
    )


def _fig3_right_nonlinear():
    return ScenarioConfig(
        scenario="fig3_right_nonlinear",
        plr=PlrSpec(p=10, m=1, theta=[1.55], nuisance="tanh",
                    noise_x=NoiseSpec.laplace(), noise_t=NoiseSpec.laplace(),
                    noise_y=NoiseSpec.laplace()),
        sample_sizes=(5000,),
        nonlinearities=("relu", "leaky_relu", "sigmoid", "tanh"),
        methods=("ica",),
    )


def _appE_contrast():
    return ScenarioConfig(
        scenario="appE_contrast",
        plr=_linear_benchmark_spec(p=50),
        sample_sizes=(5000,),
        covariate_dims=(50,),
        contrasts=("logcosh", "exp", "cube"),
        methods=("ica",),
    )


def _appE_sparsity():
    return ScenarioConfig(
        scenario="appE_sparsity",
        plr=_linear_benchmark_spec(p=50),
        sample_sizes=(5000,),
        covariate_dims=(50,),
        sparsity_levels=(0.2, 0.4, 0.6, 0.8, 1.0),
        methods=("ica",),
    )


def _appE_locscale():
    return ScenarioConfig(
        scenario="appE_locscale",
        plr=_laplace_spec(p=50),
        sample_sizes=(5000,),
        covariate_dims=(50,),
        locations=(0.0, 1.0, 2.0, 4.0),
        scales=(0.5, 1.0, 2.0, 4.0),
        methods=("ica",),
    )


def _appE_slopes():
    return ScenarioConfig(
        scenario="appE_slopes",
        plr=_laplace_spec(nuisance="leaky_relu"),
        sample_sizes=(5000,),
        leaky_slopes=(0.01, 0.1, 0.2, 0.5),
        methods=("ica",),
    )


def _appF_robustness():
    return ScenarioConfig(
        scenario="appF_robustness",
        plr=_linear_benchmark_spec(tie_ab=True),
        methods=("ica", "oml", "homl"),
    )


def _default_test():
    return ScenarioConfig(
        scenario="default_test",
        plr=PlrSpec(p=2, m=1, theta=[3.0],
                    noise_x=NoiseSpec.laplace(), noise_t=NoiseSpec.laplace(),
                    noise_y=NoiseSpec.laplace()),
        sample_sizes=(200, 500),
        covariate_dims=(2,),
        seeds=3,
        methods=("ica", "oml", "homl", "ols"),
    )


def _custom():
    return ScenarioConfig(
        scenario="custom",
        plr=_linear_benchmark_spec(),
        sample_sizes=(1000,),
        covariate_dims=(10,),
        methods=("ica",),
    )


BUILTIN_SCENARIOS = {
    "fig2_linear_homl": _fig2_linear_homl,
    "fig2_right_variance": _fig2_right_variance,
    "fig3_left_multi": _fig3_left_multi,
    "fig3_right_nonlinear": _fig3_right_nonlinear,
    "appE_contrast": _appE_contrast,
    "appE_sparsity": _appE_sparsity,
    "appE_locscale": _appE_locscale,
    "appE_slopes": _appE_slopes,
    "appF_robustness": _appF_robustness,
    "default_test": _default_test,
    "custom": _custom,
}
