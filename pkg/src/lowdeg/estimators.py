"""The explicit degree-O(log n) estimators: tree polynomials for the planted
submatrix/subgraph models and self-avoiding-walk averages for spiked Wigner
and the SBM, with exact and Monte Carlo evaluation.

SAW evaluation enumerates distinct-internal-vertex chains once per (n, D) and
evaluates monomials through cached flat index arrays; no color coding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graphs import GraphClassSpec, MultiGraph, enumerate_class, saw_count
from .guards import guard
from .models import (ModelParams, PdsParams, PriorSpec, SbmParams,
                     SubmatrixParams, WignerParams, estimand, rng_for, sample,
                     second_moment_x)
from .thresholds import sbm_spectral_from_params

TREE_KINDS = ("tree-submatrix", "tree-pds")
SAW_KINDS = ("saw-wigner", "saw-sbm")

MAX_TREE_EVAL_N = 12
MAX_TREE_EVAL_K = 2
MAX_SAW_EVAL_N = 400
MAX_SAW_EVAL_D = 3
MAX_PAIR_N = 9
MAX_PAIR_K = 1
MAX_ROW_ENUM = 2_000_000


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    order: int  # k for tree kinds, D for saw kinds
    params: ModelParams

    def __post_init__(self):
        if self.kind not in TREE_KINDS + SAW_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.kind in TREE_KINDS:
            if self.order < 0:
                raise ValueError("tree estimators require k >= 0")
            want = SubmatrixParams if self.kind == "tree-submatrix" else PdsParams
            if not isinstance(self.params, want):
                raise ValueError(f"{self.kind} needs {want.__name__}")
        else:
            if self.order < 2:
                raise ValueError("saw estimators require D >= 2")
            want = WignerParams if self.kind == "saw-wigner" else SbmParams
            if not isinstance(self.params, want):
                raise ValueError(f"{self.kind} needs {want.__name__}")

    @property
    def degree(self) -> int:
        return 2 * self.order + 2 if self.kind in TREE_KINDS else self.order


@dataclass
class McResult:
    trials: int
    efx: float
    efx_se: float
    ef2: float
    ef2_se: float
    ex2: float
    corr: float
    corr_se: float
    seed: int


@lru_cache(maxsize=None)
def tree_monomials(n: int, k: int) -> tuple[MultiGraph, ...]:
    return tuple(enumerate_class(GraphClassSpec("tree-Tk", n=n, k=k)))


@lru_cache(maxsize=None)
def _tree_index_array(n: int, k: int) -> np.ndarray:
    trees = tree_monomials(n, k)
    idx = np.empty((len(trees), 2 * k + 2), dtype=np.intp)
    for r, t in enumerate(trees):
        idx[r] = [(i - 1) * n + (j - 1) for (i, j), _ in t.edges]
    return idx


@lru_cache(maxsize=None)
def _saw_index_array(n: int, D: int) -> np.ndarray:
    count = saw_count(n, D)
    guard(count <= MAX_ROW_ENUM, f"saw enumeration of {count} paths too large")
    idx = np.empty((count, D), dtype=np.intp)
    if D == 1:
        idx[0] = [1]  # flat index of Y[0, 1]
        return idx
    for r, inner in enumerate(itertools.permutations(range(3, n + 1), D - 1)):
        chain = (1,) + inner + (2,)
        idx[r] = [(chain[t] - 1) * n + (chain[t + 1] - 1) for t in range(D)]
    return idx


def evaluate(spec: EstimatorSpec, y: np.ndarray) -> float:
    """Exact value of the estimator polynomial on the observation y."""
    params = spec.params
    n = params.n
    if y.shape != (n, n):
        raise ValueError(f"observation must be {n} x {n}")
    if spec.kind in TREE_KINDS:
        guard(n <= MAX_TREE_EVAL_N, f"tree evaluation n={n} exceeds {MAX_TREE_EVAL_N}")
        guard(spec.order <= MAX_TREE_EVAL_K, f"tree evaluation k={spec.order} too large")
        idx = _tree_index_array(n, spec.order)
        if spec.kind == "tree-pds":
            scale = math.sqrt(params.p0 * (1.0 - params.p0))
            flat = ((y - params.p0) / scale).ravel()
        else:
            flat = y.ravel()
        return float(np.prod(flat[idx], axis=1).sum())
    guard(n <= MAX_SAW_EVAL_N, f"saw evaluation n={n} exceeds {MAX_SAW_EVAL_N}")
    guard(spec.order <= MAX_SAW_EVAL_D, f"saw evaluation D={spec.order} exceeds {MAX_SAW_EVAL_D}")
    idx = _saw_index_array(n, spec.order)
    if spec.kind == "saw-sbm":
        flat = (y - params.d / n).ravel()
    else:
        flat = y.ravel()
    return float(np.prod(flat[idx], axis=1).mean())


def first_moment(spec: EstimatorSpec) -> float:
    """Exact analytic E[f(Y) x]; tree counts come from the enumeration."""
    params = spec.params
    if spec.kind == "tree-submatrix":
        count = len(tree_monomials(params.n, spec.order))
        D = spec.degree
        return count * params.lam ** D * params.rho ** (D + 1)
    if spec.kind == "tree-pds":
        count = len(tree_monomials(params.n, spec.order))
        D = spec.degree
        return count * params.rho ** (D + 1) * params.lam ** D
    if spec.kind == "saw-wigner":
        D = spec.order
        return params.m * (params.lam / params.n) ** ((D + 1) / 2.0)
    # saw-sbm: (d^{D+1} / n^D) sum over the non-unit eigenvalues of T
    D = spec.order
    spectral = sbm_spectral_from_params(params)
    tail = sum(e ** (D + 1) for e in spectral.eigs_T[1:])
    return spectral.d ** (D + 1) / params.n ** D * tail


# ---------------------------------------------------------------------------
# Exact tree second moments
# ---------------------------------------------------------------------------

def _theta_weighted_core(core: MultiGraph, forced: frozenset[int], rho: float,
                         w_factor: float) -> float:
    """E[prod over core edges of (w_factor theta_i theta_j + 1)], with theta
    forced to 1 on `forced` and Bernoulli(rho) elsewhere."""
    free = tuple(sorted(core.vertices - forced))
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(free)):
        theta = dict(zip(free, bits))
        for v in forced:
            theta[v] = 1
        w = 1.0
        for b in bits:
            w *= rho if b else (1.0 - rho)
        term = w
        for (i, j), _ in core.edges:
            term *= w_factor * theta[i] * theta[j] + 1.0
        total += term
    return total


@dataclass
class TreePairMoments:
    value: float            # exact E[f^2]
    pair_count: int
    max_bound_excess: float  # worst (pair moment - pair bound); <= 0 when bounds hold


def _pair_params(params) -> tuple[float, float, float]:
    """(lambda, eta, core factor) for the tree pair moments."""
    if isinstance(params, SubmatrixParams):
        lam = params.lam
        eta = lam * lam
        return lam, eta, eta
    lam = params.lam
    eta = (params.p1 - params.p0) / (params.p0 * (1.0 - params.p0))
    return lam, eta, (1.0 - 2.0 * params.p0) * eta


def tree_pair_moment(alpha: MultiGraph, beta: MultiGraph, params) -> float:
    """Exact E[Y^{alpha+beta}] (submatrix) or R_{alpha beta} (PDS) by theta
    enumeration restricted to the touched vertices."""
    lam, _, wfac = _pair_params(params)
    rho = params.rho
    core = alpha.meet(beta)
    delta_edges = [p for p in set(alpha.support) ^ set(beta.support)]
    delta = MultiGraph(delta_edges)
    forced = core.vertices & delta.vertices
    s = _theta_weighted_core(core, frozenset(forced), rho, wfac)
    return lam ** delta.edge_count * rho ** delta.vertex_count * s


def tree_pair_bound(alpha: MultiGraph, beta: MultiGraph, params) -> float:
    """The per-pair moment bound in terms of (eta, btilde, mtilde)."""
    _, eta, _ = _pair_params(params)
    rho = params.rho
    if alpha == beta:
        return (eta * rho + 1.0) ** alpha.edge_count
    lam = params.lam
    core = alpha.meet(beta)
    delta = MultiGraph(list(set(alpha.support) ^ set(beta.support)))
    btilde = len(core.vertices & delta.vertices)
    mtilde = core.component_count
    ell = core.edge_count
    return lam ** delta.edge_count * rho ** delta.vertex_count \
        * (eta + 1.0) ** (btilde - mtilde) * (eta * rho + 1.0) ** (ell - (btilde - mtilde))


def exact_second_moment_tree(params, k: int) -> TreePairMoments:
    """Exact E[f(Y)^2] for the tree estimator: sum of pair moments, each
    checked against its analytic bound."""
    guard(params.n <= MAX_PAIR_N, f"pair enumeration n={params.n} exceeds {MAX_PAIR_N}")
    guard(k <= MAX_PAIR_K, f"pair enumeration k={k} exceeds {MAX_PAIR_K}")
    trees = tree_monomials(params.n, k)
    total = 0.0
    worst = -math.inf
    count = 0
    for a in range(len(trees)):
        for b in range(a, len(trees)):
            val = tree_pair_moment(trees[a], trees[b], params)
            bound = tree_pair_bound(trees[a], trees[b], params)
            worst = max(worst, val - bound)
            total += val if a == b else 2.0 * val
            count += 1
    return TreePairMoments(total, count, worst)


# ---------------------------------------------------------------------------
# SAW pair moments (spiked Wigner)
# ---------------------------------------------------------------------------

def _is_saw(alpha: MultiGraph) -> bool:
    if alpha.edge_count == 0 or not alpha.is_simple or not alpha.connected:
        return False
    degs = alpha.degrees()
    ends = [v for v, d in degs.items() if d == 1]
    return sorted(ends) == [1, 2] and all(d <= 2 for d in degs.values())


def saw_pair_moment(alpha: MultiGraph, beta: MultiGraph, params: WignerParams) -> float:
    """Exact E[Y^{alpha+beta}] for two same-length 1-2 paths, by enumerating
    the discrete prior rows on V(alpha u beta).  Asserts nonnegativity and the
    (Km)^{v-l-1} (1 + Km lam/n)^l (lam/n)^{D-l} envelope."""
    if not (_is_saw(alpha) and _is_saw(beta)):
        raise ValueError("saw_pair_moment expects two 1-to-2 self-avoiding paths")
    if alpha.edge_count != beta.edge_count:
        raise ValueError("paths must have equal length")
    prior, m, lam, n = params.prior, params.m, params.lam, params.n
    pts, prb = prior.points, prior.probs
    verts = tuple(sorted(alpha.vertices | beta.vertices))
    guard(len(verts) <= 12, f"pair touches {len(verts)} vertices (limit 12)")
    combos = len(pts) ** (m * len(verts))
    guard(combos <= MAX_ROW_ENUM, f"row enumeration of {combos} assignments too large")
    core = alpha.meet(beta)
    delta = MultiGraph(list(set(alpha.support) ^ set(beta.support)))
    ratio = lam / n
    total = 0.0
    for assign in itertools.product(range(len(pts)), repeat=m * len(verts)):
        w = 1.0
        for t in assign:
            w *= prb[t]
        rows = {v: [pts[t] for t in assign[r * m:(r + 1) * m]]
                for r, v in enumerate(verts)}
        term = w
        for (i, j), _ in core.edges:
            ip = sum(a * b for a, b in zip(rows[i], rows[j]))
            term *= ratio * ip * ip + 1.0
        for (i, j), _ in delta.edges:
            ip = sum(a * b for a, b in zip(rows[i], rows[j]))
            term *= math.sqrt(ratio) * ip
        total += term
    D = alpha.edge_count
    ell = core.edge_count
    v_shared = len(alpha.vertices & beta.vertices)
    kurt = prior.kurtosis
    envelope = (kurt * m) ** (v_shared - ell - 1) * (1.0 + kurt * m * ratio) ** ell \
        * ratio ** (D - ell)
    tol = 1e-9 * max(1.0, abs(envelope))
    if total < -tol:
        raise AssertionError(f"pair moment {total} negative")
    if total > envelope + tol:
        raise AssertionError(f"pair moment {total} exceeds envelope {envelope}")
    return total


def path_moment_formula(length: int, prior: PriorSpec, m: int) -> float:
    """m^L (1 + (K-1)/m)^{L-1}: exact second moment of a length-L path product."""
    if length < 1:
        raise ValueError("path length must be >= 1")
    return float(m) ** length * (1.0 + (prior.kurtosis - 1.0) / m) ** (length - 1)


def path_moment_exact(length: int, prior: PriorSpec, m: int) -> float:
    """E prod over path edges of <x_i, x_j>^2, by full row enumeration."""
    pts, prb = prior.points, prior.probs
    verts = length + 1
    combos = len(pts) ** (m * verts)
    guard(combos <= MAX_ROW_ENUM, f"row enumeration of {combos} assignments too large")
    total = 0.0
    for assign in itertools.product(range(len(pts)), repeat=m * verts):
        w = 1.0
        for t in assign:
            w *= prb[t]
        term = w
        for v in range(length):
            ip = sum(pts[assign[v * m + t]] * pts[assign[(v + 1) * m + t]] for t in range(m))
            term *= ip * ip
        total += term
    return total


def path_moment_mc(length: int, prior: PriorSpec, m: int, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of the path second moment."""
    rng = rng_for(seed, stream=0)
    rows = rng.choice(np.array(prior.points), p=np.array(prior.probs),
                      size=(trials, length + 1, m))
    ips = np.einsum("tvm,tvm->tv", rows[:, :-1, :], rows[:, 1:, :])
    vals = np.prod(ips * ips, axis=1)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


# ---------------------------------------------------------------------------
# Monte Carlo correlation
# ---------------------------------------------------------------------------

def mc_correlation(spec: EstimatorSpec, trials: int, seed: int,
                   stream_base: int = 0) -> McResult:
    """Unbiased per-trial estimates of E[f x] and E[f^2] with one independent
    stream per trial (stream_base + t, so distinct sweep points can claim
    disjoint stream blocks); Corr standard error by the first-order delta
    method."""
    if trials < 2:
        raise ValueError("trials >= 2 required")
    params = spec.params
    fx = np.empty(trials)
    f2 = np.empty(trials)
    for t in range(trials):
        smp = sample(params, seed, stream=stream_base + t)
        f = evaluate(spec, smp.y)
        x = estimand(params, smp)
        fx[t] = f * x
        f2[t] = f * f
    ex2 = second_moment_x(params)
    efx = float(fx.mean())
    ef2 = float(f2.mean())
    efx_se = float(fx.std(ddof=1) / math.sqrt(trials))
    ef2_se = float(f2.std(ddof=1) / math.sqrt(trials))
    if ef2 > 0 and ex2 > 0:
        corr = efx / math.sqrt(ef2 * ex2)
        grad = np.array([1.0 / math.sqrt(ef2 * ex2),
                         -0.5 * efx / (ef2 ** 1.5 * math.sqrt(ex2))])
        cov = np.cov(fx, f2) / trials
        corr_se = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    else:
        corr, corr_se = math.nan, math.nan
    return McResult(trials, efx, efx_se, ef2, ef2_se, ex2, corr, corr_se, seed)
