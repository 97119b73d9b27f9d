"""Parameter records and seeded samplers for the four planted models.

Sampling is a pure function of (params, seed, stream).  Streams are produced
by the counter-based Philox4x64-10 generator keyed with the pair
(seed, stream); this choice is stable across platforms and releases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MOMENT_TOL = 1e-12


class SingularModelError(ValueError):
    """A parameter sits on a boundary where the orthonormal system is undefined."""


@dataclass(frozen=True)
class PriorSpec:
    """Finite discrete spike prior with mean 0 and variance 1."""

    points: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) != len(self.probs) or not self.points:
            raise ValueError("points and probs must be non-empty and equal length")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > MOMENT_TOL:
            raise ValueError("probabilities must sum to 1")
        if abs(self.moment(1)) > MOMENT_TOL:
            raise ValueError(f"prior mean {self.moment(1)} exceeds tolerance {MOMENT_TOL}")
        if abs(self.moment(2) - 1.0) > MOMENT_TOL:
            raise ValueError(f"prior variance {self.moment(2)} != 1 beyond tolerance {MOMENT_TOL}")

    def moment(self, k: int) -> float:
        return sum(p * x ** k for x, p in zip(self.points, self.probs))

    def abs_moment(self, k: int) -> float:
        return sum(p * abs(x) ** k for x, p in zip(self.points, self.probs))

    def max_abs_moment(self, k: int) -> float:
        """max over j in {0..k} of E|pi|^j."""
        return max(self.abs_moment(j) for j in range(k + 1))

    @property
    def kurtosis(self) -> float:
        return self.moment(4)

    @staticmethod
    def rademacher() -> "PriorSpec":
        return PriorSpec((-1.0, 1.0), (0.5, 0.5))

    @staticmethod
    def three_point(a: float) -> "PriorSpec":
        """Sparse prior on {-a, 0, +a} with unit variance; E pi^4 = a^2."""
        if a < 1:
            raise ValueError("three-point prior needs a >= 1 for valid probabilities")
        p = 1.0 / (2.0 * a * a)
        return PriorSpec((-a, 0.0, a), (p, 1.0 - 2.0 * p, p))


@dataclass(frozen=True)
class SubmatrixParams:
    n: int
    lam: float
    rho: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n >= 2 required")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


@dataclass(frozen=True)
class PdsParams:
    n: int
    rho: float
    p0: float
    p1: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n >= 2 required")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if not 0.0 < self.p0 <= self.p1 <= 1.0:
            raise ValueError("require 0 < p0 <= p1 <= 1")

    @property
    def lam(self) -> float:
        return (self.p1 - self.p0) / math.sqrt(self.p0 * (1.0 - self.p0))

    @property
    def p1_effective(self) -> float:
        """p1 = 1 is handled by continuity: evaluate just below 1."""
        return self.p1 if self.p1 < 1.0 else float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class WignerParams:
    n: int
    m: int
    lam: float
    prior: PriorSpec

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n >= 2 required")
        if self.m < 1:
            raise ValueError("rank m >= 1 required")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


@dataclass(frozen=True)
class SbmParams:
    n: int
    q: int
    pi: tuple[float, ...]
    Q: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q >= 2 communities required")
        if len(self.pi) != self.q:
            raise ValueError("pi must have q entries")
        if any(p <= 0 for p in self.pi):
            raise ValueError("pi entries must be strictly positive")
        if abs(sum(self.pi) - 1.0) > MOMENT_TOL:
            raise ValueError("pi must sum to 1")
        if len(self.Q) != self.q or any(len(row) != self.q for row in self.Q):
            raise ValueError("Q must be q x q")
        for k in range(self.q):
            for l in range(self.q):
                if self.Q[k][l] != self.Q[l][k]:
                    raise ValueError("Q must be symmetric")
                if self.Q[k][l] <= 0:
                    raise ValueError("Q entries must be strictly positive")
                if self.Q[k][l] > self.n:
                    raise ValueError("Q entries must be <= n so edge probabilities stay <= 1")

    @property
    def pi_arr(self) -> np.ndarray:
        return np.array(self.pi, dtype=float)

    @property
    def q_arr(self) -> np.ndarray:
        return np.array(self.Q, dtype=float)

    @property
    def d(self) -> float:
        """Expected value of Q over an i.i.d. label pair (the mean degree)."""
        pi = self.pi_arr
        return float(pi @ self.q_arr @ pi)


ModelParams = SubmatrixParams | PdsParams | WignerParams | SbmParams


@dataclass(frozen=True, eq=False)
class Sample:
    latent: np.ndarray
    y: np.ndarray
    seed: int
    stream: int = 0


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, stream)."""
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _symmetric_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Symmetric matrix with i.i.d. N(0,1) entries on and above the diagonal."""
    z = np.zeros((n, n))
    iu = np.triu_indices(n)
    z[iu] = rng.standard_normal(len(iu[0]))
    return z + z.T - np.diag(np.diag(z))


def _symmetric_bernoulli(rng: np.random.Generator, probs_upper: np.ndarray, n: int) -> np.ndarray:
    """Zero-diagonal symmetric 0/1 matrix from per-edge probabilities (i < j order)."""
    u = rng.random(len(probs_upper))
    y = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    y[iu] = (u < probs_upper).astype(float)
    return y + y.T


def sample(params: ModelParams, seed: int, stream: int = 0) -> Sample:
    rng = rng_for(seed, stream)
    n = params.n
    if isinstance(params, SubmatrixParams):
        theta = (rng.random(n) < params.rho).astype(float)
        z = _symmetric_normal(rng, n)
        y = params.lam * np.outer(theta, theta) + z
        return Sample(theta, y, seed, stream)
    if isinstance(params, PdsParams):
        theta = (rng.random(n) < params.rho).astype(float)
        iu = np.triu_indices(n, k=1)
        plant = theta[iu[0]] * theta[iu[1]]
        probs = params.p0 + (params.p1 - params.p0) * plant
        y = _symmetric_bernoulli(rng, probs, n)
        return Sample(theta, y, seed, stream)
    if isinstance(params, WignerParams):
        u = rng.choice(np.array(params.prior.points), p=np.array(params.prior.probs), size=(n, params.m))
        z = _symmetric_normal(rng, n)
        y = math.sqrt(params.lam / n) * (u @ u.T) + z
        return Sample(u, y, seed, stream)
    if isinstance(params, SbmParams):
        sigma = rng.choice(params.q, p=params.pi_arr, size=n)
        q_arr = params.q_arr
        iu = np.triu_indices(n, k=1)
        probs = q_arr[sigma[iu[0]], sigma[iu[1]]] / n
        y = _symmetric_bernoulli(rng, probs, n)
        return Sample(sigma, y, seed, stream)
    raise TypeError(f"unknown params type {type(params)!r}")


def estimand(params: ModelParams, smp: Sample) -> float:
    """The scalar the model asks to estimate."""
    if isinstance(params, (SubmatrixParams, PdsParams)):
        return float(smp.latent[0])
    if isinstance(params, WignerParams):
        return math.sqrt(params.lam / params.n) * float(smp.latent[0] @ smp.latent[1])
    if isinstance(params, SbmParams):
        return float(params.Q[smp.latent[0]][smp.latent[1]] - params.d)
    raise TypeError(f"unknown params type {type(params)!r}")


def estimand_pair(params: SbmParams, smp: Sample, k: int, l: int) -> float:
    """SBM pairwise estimand (1{sigma_1 = k} - pi_k)(1{sigma_2 = l} - pi_l), 0-based labels."""
    if not isinstance(params, SbmParams):
        raise TypeError("pairwise estimand is SBM-specific")
    a = (1.0 if smp.latent[0] == k else 0.0) - params.pi[k]
    b = (1.0 if smp.latent[1] == l else 0.0) - params.pi[l]
    return a * b


def second_moment_x(params: ModelParams, pair: tuple[int, int] | None = None) -> float:
    """Exact E[x^2] for the model's estimand."""
    if isinstance(params, (SubmatrixParams, PdsParams)):
        return params.rho
    if isinstance(params, WignerParams):
        return params.lam * params.m / params.n
    if isinstance(params, SbmParams):
        if pair is not None:
            k, l = pair
            return params.pi[k] * (1 - params.pi[k]) * params.pi[l] * (1 - params.pi[l])
        pi = params.pi_arr
        q_arr = params.q_arr
        return float(pi @ ((q_arr - params.d) ** 2) @ pi)
    raise TypeError(f"unknown params type {type(params)!r}")


def mean_y(params: ModelParams) -> np.ndarray:
    """Analytic E[Y] entrywise (used by sampler sanity checks)."""
    n = params.n
    if isinstance(params, SubmatrixParams):
        m = np.full((n, n), params.lam * params.rho ** 2)
        np.fill_diagonal(m, params.lam * params.rho)
        return m
    if isinstance(params, PdsParams):
        m = np.full((n, n), params.p0 + (params.p1 - params.p0) * params.rho ** 2)
        np.fill_diagonal(m, 0.0)
        return m
    if isinstance(params, WignerParams):
        m = np.zeros((n, n))
        np.fill_diagonal(m, math.sqrt(params.lam / n) * params.m)
        return m
    if isinstance(params, SbmParams):
        m = np.full((n, n), params.d / n)
        np.fill_diagonal(m, 0.0)
        return m
    raise TypeError(f"unknown params type {type(params)!r}")


def dump_sample(smp: Sample, params: ModelParams, path: str) -> tuple[str, str]:
    """Write Y as whitespace-separated text plus a latent sidecar; returns the paths."""
    ypath = path
    lpath = path + ".latent"
    np.savetxt(ypath, smp.y, fmt="%.17g")
    lat = smp.latent if smp.latent.ndim > 1 else smp.latent.reshape(1, -1)
    np.savetxt(lpath, lat, fmt="%.17g")
    return ypath, lpath
