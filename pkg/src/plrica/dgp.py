"""Partially linear data-generating processes.

Covariates X are independent noise, treatments follow T = f(X) + eta, and
the outcome follows Y = g(X) + theta . T + eps. With linear f and g the
full vector (X, T, Y) is an invertible linear mixing of the independent
sources (xi, eta, eps), and build_linear_mixing exposes that mixing and
its exact inverse.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit

from .distributions import NoiseSpec

NONLINEARITY_NAMES = ("linear", "relu", "leaky_relu", "sigmoid", "tanh")

# canonical per-treatment effects used when theta is not supplied
DEFAULT_MULTI_THETA = (1.55, 0.65, -2.45, 1.75, -1.35)


class DgpError(ValueError):
    """Invalid process specification or simulation request."""


class UnknownNonlinearityError(DgpError):
    """Nuisance name outside the supported set."""


def multi_treatment_theta(m: int) -> np.ndarray:
    """First m entries of the canonical effect vector."""
    if not 1 <= m <= len(DEFAULT_MULTI_THETA):
        raise DgpError(f"m must be in [1, {len(DEFAULT_MULTI_THETA)}], got {m}")
    return np.asarray(DEFAULT_MULTI_THETA[:m], dtype=float)


def apply_nonlinearity(name: str, x, slope: float = 0.2) -> np.ndarray:
    """Apply a named scalar nonlinearity elementwise.

    slope only affects leaky_relu, where negative inputs are multiplied
    by it (slope 0.2 maps -5 to -1).
    """
    u = np.asarray(x, dtype=float)
    if name == "linear":
        return u
    if name == "relu":
        return np.maximum(u, 0.0)
    if name == "leaky_relu":
        return np.where(u >= 0.0, u, slope * u)
    if name == "sigmoid":
        return expit(u)
    if name == "tanh":
        return np.tanh(u)
    raise UnknownNonlinearityError(
        f"unknown nonlinearity {name!r}; expected one of {NONLINEARITY_NAMES}"
    )


def _coerce_block(value, shape, name):
    if value is None:
        return None
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and len(shape) == 2 and shape[0] == 1:
        arr = arr[None, :]
    if arr.shape != shape:
        raise DgpError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DgpError(f"{name} contains non-finite entries")
    return arr.copy()


@dataclass(eq=False)
class PlrSpec:
    """Specification of one partially linear process.

    a_block ((m, p), X -> T) and b_block ((p,), X -> Y) may be left None;
    resolve() then draws them. For the linear nuisance the draws are
    uniform on [-1, 1] masked entrywise by Bernoulli(sparsity_keep_prob);
    for nonlinear nuisances they are unit-norm Gaussian directions (no
    mask) so the nonlinearity operates in its responsive range. tie_ab
    forces the drawn single-treatment a row to equal b.

    standardize_noise replaces each noise family member by its zero-mean
    unit-variance version before sampling (on by default).
    """

    p: int
    m: int = 1
    theta: Optional[object] = None
    a_block: Optional[object] = None
    b_block: Optional[object] = None
    nuisance: str = "linear"
    leaky_slope: float = 0.2
    noise_x: NoiseSpec = field(default_factory=NoiseSpec.laplace)
    noise_t: NoiseSpec = field(default_factory=NoiseSpec.laplace)
    noise_y: NoiseSpec = field(default_factory=NoiseSpec.laplace)
    sparsity_keep_prob: float = 1.0
    standardize_noise: bool = True
    tie_ab: bool = False

    def __post_init__(self):
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise DgpError(f"p must be a positive integer, got {self.p!r}")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise DgpError(f"m must be a positive integer, got {self.m!r}")
        self.p = int(self.p)
        self.m = int(self.m)
        if self.theta is None:
            self.theta = multi_treatment_theta(self.m)
        else:
            th = np.atleast_1d(np.asarray(self.theta, dtype=float))
            if th.shape != (self.m,):
                raise DgpError(f"theta must have {self.m} entries, got shape {th.shape}")
            if not np.all(np.isfinite(th)):
                raise DgpError("theta contains non-finite entries")
            self.theta = th.copy()
        if self.nuisance not in NONLINEARITY_NAMES:
            raise UnknownNonlinearityError(
                f"unknown nuisance {self.nuisance!r}; expected one of {NONLINEARITY_NAMES}"
            )
        if not (math.isfinite(self.leaky_slope) and self.leaky_slope >= 0):
            raise DgpError("leaky_slope must be finite and nonnegative")
        if not 0.0 < self.sparsity_keep_prob <= 1.0:
            raise DgpError("sparsity_keep_prob must lie in (0, 1]")
        self.a_block = _coerce_block(self.a_block, (self.m, self.p), "a_block")
        self.b_block = _coerce_block(self.b_block, (self.p,), "b_block")
        for name in ("noise_x", "noise_t", "noise_y"):
            if not isinstance(getattr(self, name), NoiseSpec):
                raise DgpError(f"{name} must be a NoiseSpec")
        if self.tie_ab:
            if self.m != 1 or self.nuisance != "linear":
                raise DgpError("tie_ab requires a single treatment and a linear nuisance")
            if self.a_block is not None or self.b_block is not None:
                raise DgpError("tie_ab only applies when the blocks are drawn, not supplied")

    @property
    def dim(self) -> int:
        """Total column count p + m + 1."""
        return self.p + self.m + 1

    @property
    def is_resolved(self) -> bool:
        return self.a_block is not None and self.b_block is not None

    def effective_noises(self) -> tuple[NoiseSpec, NoiseSpec, NoiseSpec]:
        if self.standardize_noise:
            return (self.noise_x.standardized(), self.noise_t.standardized(),
                    self.noise_y.standardized())
        return (self.noise_x, self.noise_t, self.noise_y)


def _masked_uniform(rng, shape, keep_prob):
    coef = rng.uniform(-1.0, 1.0, shape)
    if keep_prob < 1.0:
        coef = coef * (rng.random(shape) < keep_prob)
    return coef


def _unit_rows(rng, shape):
    rows = rng.standard_normal(shape)
    norms = np.linalg.norm(rows, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise DgpError("degenerate zero draw for a nuisance direction")
    return rows / norms


def resolve(spec: PlrSpec, rng) -> PlrSpec:
    """Fill in any missing coefficient blocks.

    A fully resolved spec is returned unchanged without consuming
    randomness. Draw order is a_block then b_block (b first under tie_ab,
    where the single a row is set equal to b).
    """
    if spec.is_resolved:
        return spec
    rng = np.random.default_rng(rng)
    if spec.nuisance == "linear":
        if spec.tie_ab:
            b = _masked_uniform(rng, spec.p, spec.sparsity_keep_prob)
            a = b[None, :].copy()
        else:
            a = spec.a_block
            if a is None:
                a = _masked_uniform(rng, (spec.m, spec.p), spec.sparsity_keep_prob)
            b = spec.b_block
            if b is None:
                b = _masked_uniform(rng, spec.p, spec.sparsity_keep_prob)
    else:
        a = spec.a_block if spec.a_block is not None else _unit_rows(rng, (spec.m, spec.p))
        b = spec.b_block if spec.b_block is not None else _unit_rows(rng, spec.p)
    out = PlrSpec(
        p=spec.p, m=spec.m, theta=spec.theta.copy(), a_block=a, b_block=b,
        nuisance=spec.nuisance, leaky_slope=spec.leaky_slope,
        noise_x=spec.noise_x, noise_t=spec.noise_t, noise_y=spec.noise_y,
        sparsity_keep_prob=spec.sparsity_keep_prob,
        standardize_noise=spec.standardize_noise, tie_ab=False,
    )
    return out


def nuisance_t(spec: PlrSpec, x: np.ndarray) -> np.ndarray:
    """f(X): (n, m) conditional treatment mean."""
    base = x @ spec.a_block.T
    return apply_nonlinearity(spec.nuisance, base, spec.leaky_slope)


def nuisance_y(spec: PlrSpec, x: np.ndarray) -> np.ndarray:
    """g(X): (n,) structural outcome term before treatment effects."""
    base = x @ spec.b_block
    return apply_nonlinearity(spec.nuisance, base, spec.leaky_slope)


@dataclass(eq=False)
class GroundTruth:
    """Resolved spec and the exact source draws behind a simulated dataset."""

    spec: PlrSpec
    sources: np.ndarray  # (n, p + m + 1) columns xi, eta, eps

    @property
    def theta(self) -> np.ndarray:
        return self.spec.theta


@dataclass(eq=False)
class Dataset:
    """Observed columns of one simulated (or loaded) sample.

    columns stacks X (p columns), T (m columns), Y (one column) in that
    order. ground_truth is present only for simulated data.
    """

    columns: np.ndarray
    p: int
    m: int
    ground_truth: Optional[GroundTruth] = None

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2:
            raise DgpError(f"columns must be 2-d, got shape {cols.shape}")
        if cols.shape[1] != self.p + self.m + 1:
            raise DgpError(
                f"expected {self.p + self.m + 1} columns for p={self.p}, m={self.m}; "
                f"got {cols.shape[1]}"
            )
        self.columns = cols

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.columns[:, : self.p]

    @property
    def t(self) -> np.ndarray:
        return self.columns[:, self.p : self.p + self.m]

    @property
    def y(self) -> np.ndarray:
        return self.columns[:, -1]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(
            [f"x_{i}" for i in range(self.p)]
            + [f"t_{j}" for j in range(self.m)]
            + ["y"]
        )

    def take(self, k: int) -> "Dataset":
        """First k rows as a new dataset (ground truth sliced along)."""
        if not 1 <= k <= self.n:
            raise DgpError(f"k must be in [1, {self.n}], got {k}")
        gt = self.ground_truth
        if gt is not None:
            gt = GroundTruth(spec=gt.spec, sources=gt.sources[:k])
        return Dataset(columns=self.columns[:k].copy(), p=self.p, m=self.m, ground_truth=gt)

    def to_csv(self, path) -> None:
        """Write rows with a x_0,..,t_0,..,y header; floats round-trip."""
        header = ",".join(self.column_names)
        np.savetxt(path, self.columns, delimiter=",", header=header, comments="", fmt="%.17g")

    @staticmethod
    def from_csv(path) -> "Dataset":
        if isinstance(path, io.IOBase):
            text = path.read()
        else:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        lines = text.strip().splitlines()
        if len(lines) < 2:
            raise DgpError("csv needs a header line and at least one row")
        names = [s.strip() for s in lines[0].split(",")]
        pat_x = re.compile(r"x_(\d+)$")
        pat_t = re.compile(r"t_(\d+)$")
        p = sum(1 for s in names if pat_x.match(s))
        m = sum(1 for s in names if pat_t.match(s))
        expected = [f"x_{i}" for i in range(p)] + [f"t_{j}" for j in range(m)] + ["y"]
        if p < 1 or m < 1 or names != expected:
            raise DgpError(f"bad csv header {names!r}; expected x_0..x_{{p-1}},t_0..t_{{m-1}},y")
        data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
        if data.shape[1] != len(names):
            raise DgpError("row width does not match header")
        return Dataset(columns=data, p=p, m=m)


def simulate(spec: PlrSpec, n: int, seed) -> Dataset:
    """Simulate n rows from the process.

    seed may be an int, SeedSequence, or Generator. Unresolved coefficient
    blocks are drawn first from the same stream, then sources in the fixed
    order xi, eta, eps, so output is bitwise reproducible.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DgpError(f"n must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    resolved = resolve(spec, rng)
    nx, nt, ny = resolved.effective_noises()
    xi = nx.sample((int(n), spec.p), rng)
    eta = nt.sample((int(n), spec.m), rng)
    eps = ny.sample(int(n), rng)
    x = xi
    t = nuisance_t(resolved, x) + eta
    y = nuisance_y(resolved, x) + t @ resolved.theta + eps
    columns = np.column_stack([x, t, y])
    sources = np.column_stack([xi, eta, eps])
    return Dataset(columns=columns, p=spec.p, m=spec.m,
                   ground_truth=GroundTruth(spec=resolved, sources=sources))


def build_linear_mixing(spec: PlrSpec) -> tuple[np.ndarray, np.ndarray]:
    """Mixing matrix A and its exact inverse W for a linear process.

    Sources map to observations as (X, T, Y) = A @ (xi, eta, eps); both
    matrices are unit-lower-triangular, so det(A) = det(W) = 1 and the
    product A @ W is the identity up to float rounding.
    """
    if spec.nuisance != "linear":
        raise DgpError("mixing matrices exist only for the linear nuisance")
    if not spec.is_resolved:
        raise DgpError("spec has unresolved coefficient blocks; call resolve() first")
    p, m = spec.p, spec.m
    d = p + m + 1
    a, b, theta = spec.a_block, spec.b_block, spec.theta
    mix = np.eye(d)
    mix[p : p + m, :p] = a
    mix[-1, :p] = b + theta @ a
    mix[-1, p : p + m] = theta
    unmix = np.eye(d)
    unmix[p : p + m, :p] = -a
    unmix[-1, :p] = -b
    unmix[-1, p : p + m] = -theta
    return mix, unmix
