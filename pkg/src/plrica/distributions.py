"""Noise families for the data-generating processes.

A NoiseSpec names a location-scale family member. Moments are computed
analytically (exactly, up to float rounding) and sampling is deterministic
given a generator, so the same spec is usable both as a simulation input
and as an oracle for the identification conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

FAMILIES = ("gaussian", "laplace", "uniform", "generalized_normal", "discrete_symmetric")

# default discrete support: three points with unit variance and zero mean
THREE_POINT_SUPPORT = (-math.sqrt(2.0), 0.0, math.sqrt(2.0))
THREE_POINT_PROBABILITIES = (0.25, 0.5, 0.25)


class DistributionError(ValueError):
    """Invalid noise specification or unusable request."""


class DiscreteDensityError(DistributionError):
    """Raised when a density is requested for a discrete family."""


@dataclass(frozen=True)
class MomentReport:
    """Population moments of a noise spec.

    mean and variance describe the spec itself. The remaining fields
    describe the standardized variable z = (X - mean)/sd under the cubic
    contrast t(z) = z^3: e_t = E[t(z)], e_tprime = E[t'(z)], e_eta_t =
    E[z t(z)] (the fourth moment), and var_t = Var(t(z)).
    """

    mean: float
    variance: float
    fourth_moment: float
    sixth_moment: float
    e_t: float
    e_tprime: float
    e_eta_t: float
    var_t: float


@dataclass(frozen=True)
class NonGaussianityCheck:
    """Sampling-based excess-kurtosis check."""

    excess_kurtosis: float
    std_error: float
    decisive: bool
    n_samples: int


@dataclass(frozen=True)
class NoiseSpec:
    """One member of a location-scale noise family.

    The variable is location + scale * B where B is the family's base
    member: standard normal, standard Laplace, uniform on
    [-sqrt(3), sqrt(3)], a generalized normal with density proportional to
    exp(-|x|^beta), or a finite symmetric distribution on `support` with
    `probabilities`.
    """

    family: str
    location: float = 0.0
    scale: float = 1.0
    shape_beta: Optional[float] = None
    support: Optional[tuple[float, ...]] = None
    probabilities: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DistributionError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.location) and math.isfinite(self.scale)):
            raise DistributionError("location and scale must be finite")
        if self.scale <= 0:
            raise DistributionError(f"scale must be positive, got {self.scale}")
        if self.family == "generalized_normal":
            if self.shape_beta is None or not (self.shape_beta > 0):
                raise DistributionError("generalized_normal requires shape_beta > 0")
        elif self.shape_beta is not None:
            raise DistributionError(f"shape_beta is only meaningful for generalized_normal")
        if self.family == "discrete_symmetric":
            if self.support is None or self.probabilities is None:
                raise DistributionError("discrete_symmetric requires support and probabilities")
            sup = tuple(float(v) for v in self.support)
            pr = tuple(float(v) for v in self.probabilities)
            if len(sup) != len(pr) or len(sup) == 0:
                raise DistributionError("support and probabilities must have equal nonzero length")
            if not all(math.isfinite(v) for v in sup):
                raise DistributionError("support must be finite")
            if any(v < 0 for v in pr) or abs(sum(pr) - 1.0) > 1e-12:
                raise DistributionError("probabilities must be nonnegative and sum to 1")
            object.__setattr__(self, "support", sup)
            object.__setattr__(self, "probabilities", pr)
        elif self.support is not None or self.probabilities is not None:
            raise DistributionError("support/probabilities are only meaningful for discrete_symmetric")

    # ---- constructors ----

    @classmethod
    def gaussian(cls, location: float = 0.0, scale: float = 1.0) -> "NoiseSpec":
        return cls("gaussian", location, scale)

    @classmethod
    def laplace(cls, location: float = 0.0, scale: float = 1.0) -> "NoiseSpec":
        return cls("laplace", location, scale)

    @classmethod
    def uniform(cls, location: float = 0.0, scale: float = 1.0) -> "NoiseSpec":
        """Uniform on [location - sqrt(3)*scale, location + sqrt(3)*scale]."""
        return cls("uniform", location, scale)

    @classmethod
    def generalized_normal(cls, shape_beta: float, location: float = 0.0,
                           scale: float = 1.0) -> "NoiseSpec":
        return cls("generalized_normal", location, scale, shape_beta=shape_beta)

    @classmethod
    def three_point(cls, location: float = 0.0, scale: float = 1.0) -> "NoiseSpec":
        """Symmetric three-point distribution on {-sqrt(2), 0, sqrt(2)}."""
        return cls("discrete_symmetric", location, scale,
                   support=THREE_POINT_SUPPORT, probabilities=THREE_POINT_PROBABILITIES)

    # ---- base-member moments ----

    def _base_raw_moment(self, k: int) -> float:
        """E[B^k] for the base member of the family."""
        if self.family == "gaussian":
            return 0.0 if k % 2 else float(math.prod(range(1, k, 2)))  # (k-1)!!
        if self.family == "laplace":
            return 0.0 if k % 2 else float(math.factorial(k))
        if self.family == "uniform":
            # base is uniform on [-sqrt(3), sqrt(3)]
            return 0.0 if k % 2 else 3.0 ** (k // 2) / (k + 1)
        if self.family == "generalized_normal":
            if k % 2:
                return 0.0
            b = self.shape_beta
            return math.exp(math.lgamma((k + 1) / b) - math.lgamma(1.0 / b))
        # discrete
        return float(sum(p * s**k for s, p in zip(self.support, self.probabilities)))

    def mean(self) -> float:
        return self.location + self.scale * self._base_raw_moment(1)

    def variance(self) -> float:
        m1 = self._base_raw_moment(1)
        m2 = self._base_raw_moment(2)
        return self.scale**2 * (m2 - m1 * m1)

    def moments(self) -> MomentReport:
        """Analytic moment report; see MomentReport for field semantics."""
        raw = [1.0] + [self._base_raw_moment(k) for k in range(1, 7)]
        mu = raw[1]
        central = [0.0] * 7
        for k in range(2, 7):
            central[k] = sum(math.comb(k, i) * raw[k - i] * (-mu) ** i for i in range(k + 1))
        var0 = central[2]
        if var0 <= 0:
            raise DistributionError("degenerate distribution: zero variance")
        sd0 = math.sqrt(var0)
        z3 = central[3] / sd0**3
        z4 = central[4] / var0**2
        z6 = central[6] / var0**3
        return MomentReport(
            mean=self.mean(),
            variance=self.variance(),
            fourth_moment=z4,
            sixth_moment=z6,
            e_t=z3,
            e_tprime=3.0,  # E[3 z^2] for a unit-variance variable
            e_eta_t=z4,
            var_t=z6 - z3 * z3,
        )

    # ---- sampling ----

    def sample(self, size, rng) -> np.ndarray:
        """Draw samples of the given size (int or shape tuple).

        rng may be a Generator, SeedSequence, or int seed. Draw order per
        family is fixed, so samples are bitwise reproducible for a given
        generator state.
        """
        rng = np.random.default_rng(rng)
        if isinstance(size, (int, np.integer)):
            if size < 1:
                raise DistributionError("size must be at least 1")
        else:
            size = tuple(int(v) for v in size)
            if any(v < 1 for v in size):
                raise DistributionError("size entries must be at least 1")
        if self.family == "gaussian":
            return rng.normal(self.location, self.scale, size)
        if self.family == "laplace":
            return rng.laplace(self.location, self.scale, size)
        if self.family == "uniform":
            half = math.sqrt(3.0) * self.scale
            return rng.uniform(self.location - half, self.location + half, size)
        if self.family == "generalized_normal":
            # |B|^beta is Gamma(1/beta, 1); attach a fair sign
            b = self.shape_beta
            g = rng.standard_gamma(1.0 / b, size)
            signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return self.location + self.scale * signs * g ** (1.0 / b)
        idx = rng.choice(len(self.support), size=size, p=np.asarray(self.probabilities))
        return self.location + self.scale * np.asarray(self.support)[idx]

    # ---- transforms and densities ----

    def standardized(self) -> "NoiseSpec":
        """Same family member rescaled to zero mean and unit variance."""
        m = self.mean()
        v = self.variance()
        # ulp-tolerant fixed point so standardized() is idempotent
        if abs(m) <= 1e-15 and abs(v - 1.0) <= 4e-16:
            return self
        s = math.sqrt(v)
        return replace(self, location=(self.location - m) / s, scale=self.scale / s)

    def log_density(self, x) -> np.ndarray:
        """Pointwise log density. Discrete families have none."""
        if self.family == "discrete_symmetric":
            raise DiscreteDensityError("discrete family has no density")
        u = (np.asarray(x, dtype=float) - self.location) / self.scale
        if self.family == "gaussian":
            return -0.5 * u * u - 0.5 * math.log(2.0 * math.pi) - math.log(self.scale)
        if self.family == "laplace":
            return -np.abs(u) - math.log(2.0 * self.scale)
        if self.family == "uniform":
            half = math.sqrt(3.0)
            inside = np.abs(u) <= half
            out = np.where(inside, -math.log(2.0 * half * self.scale), -np.inf)
            return out if out.ndim else float(out)
        b = self.shape_beta
        const = math.log(b) - math.log(2.0 * self.scale) - math.lgamma(1.0 / b)
        return const - np.abs(u) ** b


def log_density(spec: NoiseSpec, x) -> np.ndarray:
    return spec.log_density(x)


def moments(spec: NoiseSpec) -> MomentReport:
    return spec.moments()


def sample(spec: NoiseSpec, size, rng) -> np.ndarray:
    return spec.sample(size, rng)


def homl_condition_value(spec: NoiseSpec) -> float:
    """E[z t(z)] - E[t'(z)] for the cubic contrast on the standardized
    variable. Zero means the orthogonal higher-moment score degenerates."""
    report = spec.moments()
    return report.e_eta_t - report.e_tprime


def ica_condition_value(spec: NoiseSpec) -> float:
    """Excess kurtosis E[z^4] - 3 of the standardized variable. Zero means
    fourth-order source separation degenerates."""
    report = spec.moments()
    return report.fourth_moment - 3.0


def check_nongaussianity(spec: NoiseSpec, n: int = 100_000, seed=0) -> NonGaussianityCheck:
    """Estimate excess kurtosis from samples and test it against 0.

    decisive is True when |excess| exceeds 3 standard errors, i.e. the
    sample rules out a Gaussian fourth moment.
    """
    if n < 10:
        raise DistributionError("need at least 10 samples")
    draws = spec.sample(n, np.random.default_rng(seed))
    z = (draws - draws.mean()) / draws.std()
    fourth = z**4
    excess = float(fourth.mean() - 3.0)
    se = float(fourth.std(ddof=1) / math.sqrt(n))
    return NonGaussianityCheck(
        excess_kurtosis=excess,
        std_error=se,
        decisive=bool(abs(excess) > 3.0 * se),
        n_samples=int(n),
    )
