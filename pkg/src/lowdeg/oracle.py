"""Exact Corr_{<=D} / MMSE_{<=D} at tiny n: the ground-truth oracle.

Gaussian models use the Hermite basis with exact signal moments; Bernoulli
models use multilinear monomials with moments by latent enumeration.  The
Gram solve goes through a symmetric eigendecomposition pseudoinverse with a
relative rank cutoff (the Gram is typically rank-deficient on 0/1 data).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .basis import c_submatrix
from .cumulants import moment_X
from .graphs import MultiGraph
from .guards import guard
from .models import (ModelParams, PdsParams, SbmParams, SubmatrixParams,
                     WignerParams, second_moment_x)

MAX_ORACLE_N = 6
MAX_ORACLE_D = 3
RANK_CUTOFF = 1e-10


@dataclass
class GramSystem:
    indices: list[MultiGraph]
    G: np.ndarray
    c: np.ndarray
    ex2: float
    model: str
    degree: int


@dataclass
class OracleResult:
    corr: float
    mmse: float
    basis_size: int
    gram_rank: int


def _gaussian_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def _bernoulli_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def _multigraph_basis(n: int, D: int) -> list[MultiGraph]:
    pairs = _gaussian_pairs(n)
    out = [MultiGraph()]
    for d in range(1, D + 1):
        out.extend(MultiGraph(c) for c in itertools.combinations_with_replacement(pairs, d))
    return out


def _simple_basis(n: int, D: int) -> list[MultiGraph]:
    pairs = _bernoulli_pairs(n)
    out = [MultiGraph()]
    for d in range(1, D + 1):
        out.extend(MultiGraph(c) for c in itertools.combinations(pairs, d))
    return out


def _vertex_mask(g: MultiGraph) -> int:
    mask = 0
    for v in g.vertices:
        mask |= 1 << (v - 1)
    return mask


def _hermite_gram(basis: list[MultiGraph], signal_moment) -> np.ndarray:
    """G_{a a'} = sum over beta <= meet of the expansion coefficients times
    E[X^{(a-beta)+(a'-beta)}]; signal_moment maps a MultiGraph to that moment."""
    size = len(basis)
    # per subgraph beta: list of (row index, coefficient, residual graph)
    by_beta: dict[MultiGraph, list[tuple[int, float, MultiGraph]]] = {}
    for row, alpha in enumerate(basis):
        fa = alpha.factorial()
        for beta in alpha.subgraphs():
            coef = math.sqrt(beta.factorial() / fa) * alpha.binom(beta)
            by_beta.setdefault(beta, []).append((row, coef, alpha.minus(beta)))
    g = np.zeros((size, size))
    for entries in by_beta.values():
        for a in range(len(entries)):
            ra, ca, resta = entries[a]
            for b in range(a, len(entries)):
                rb, cb, restb = entries[b]
                val = ca * cb * signal_moment(resta.add(restb))
                g[ra, rb] += val
                if ra != rb:
                    g[rb, ra] += val
    return g


def _submatrix_gram(params: SubmatrixParams, D: int) -> GramSystem:
    basis = _multigraph_basis(params.n, D)
    lam, rho = params.lam, params.rho
    cache: dict[MultiGraph, float] = {}

    def smoment(g: MultiGraph) -> float:
        val = cache.get(g)
        if val is None:
            val = lam ** g.edge_count * rho ** g.vertex_count
            cache[g] = val
        return val

    g = _hermite_gram(basis, smoment)
    c = np.array([c_submatrix(alpha, lam, rho) for alpha in basis])
    return GramSystem(basis, g, c, second_moment_x(params), "submatrix", D)


def _wigner_gram(params: WignerParams, D: int) -> GramSystem:
    basis = _multigraph_basis(params.n, D)
    cache: dict[MultiGraph, float] = {}

    def smoment(g: MultiGraph) -> float:
        val = cache.get(g)
        if val is None:
            val = moment_X(g, params.prior, params.lam, params.n, params.m)
            cache[g] = val
        return val

    g = _hermite_gram(basis, smoment)
    c = np.array([smoment(alpha.bar()) / math.sqrt(alpha.factorial()) for alpha in basis])
    return GramSystem(basis, g, c, second_moment_x(params), "wigner", D)


def _latent_table(params) -> tuple[list[tuple], np.ndarray]:
    """Latent assignments and weights for Bernoulli models."""
    n = params.n
    if isinstance(params, PdsParams):
        rho = params.rho
        lats = list(itertools.product((0, 1), repeat=n))
        w = np.array([math.prod(rho if b else 1 - rho for b in lat) for lat in lats])
        return lats, w
    lats = list(itertools.product(range(params.q), repeat=n))
    w = np.array([math.prod(params.pi[s] for s in lat) for lat in lats])
    return lats, w


def _edge_prob_rows(params, lats) -> np.ndarray:
    """probability of each potential edge (i<j order) under each latent assignment."""
    pairs = _bernoulli_pairs(params.n)
    rows = np.empty((len(lats), len(pairs)))
    if isinstance(params, PdsParams):
        for r, lat in enumerate(lats):
            rows[r] = [params.p0 + (params.p1 - params.p0) * lat[i - 1] * lat[j - 1]
                       for (i, j) in pairs]
    else:
        for r, lat in enumerate(lats):
            rows[r] = [params.Q[lat[i - 1]][lat[j - 1]] / params.n for (i, j) in pairs]
    return rows


def _bernoulli_gram(params, D: int, pair: tuple[int, int] | None) -> GramSystem:
    basis = _simple_basis(params.n, D)
    pairs = _bernoulli_pairs(params.n)
    pair_pos = {p: t for t, p in enumerate(pairs)}
    masks = []
    for alpha in basis:
        mask = 0
        for p in alpha.support:
            mask |= 1 << pair_pos[p]
        masks.append(mask)
    lats, w = _latent_table(params)
    probs = _edge_prob_rows(params, lats)
    n_masks = 1 << len(pairs)
    guard(len(lats) * n_masks <= 50_000_000,
          f"latent x edge-mask table of {len(lats) * n_masks} entries too large")
    # pm[r][mask]: probability all edges in the mask are present under latent r
    pm = np.ones((len(lats), n_masks))
    for mask in range(1, n_masks):
        low = mask & (-mask)
        pm[:, mask] = pm[:, mask ^ low] * probs[:, low.bit_length() - 1]
    if isinstance(params, PdsParams):
        x = np.array([lat[0] for lat in lats], dtype=float)
    elif pair is not None:
        k, l = pair
        x = np.array([((lat[0] == k) - params.pi[k]) * ((lat[1] == l) - params.pi[l])
                      for lat in lats])
    else:
        x = np.array([params.Q[lat[0]][lat[1]] - params.d for lat in lats])
    size = len(basis)
    g = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            val = float(w @ pm[:, masks[a] | masks[b]])
            g[a, b] = g[b, a] = val
    c = np.array([float((w * x) @ pm[:, masks[a]]) for a in range(size)])
    if isinstance(params, PdsParams):
        ex2 = second_moment_x(params)
    else:
        ex2 = second_moment_x(params, pair)
    model = "pds" if isinstance(params, PdsParams) else "sbm"
    return GramSystem(basis, g, c, ex2, model, D)


def build_gram(params: ModelParams, D: int, pair: tuple[int, int] | None = None) -> GramSystem:
    """Gram matrix, coefficient vector and E[x^2] for degree-<=D estimation.

    `pair` selects the SBM pairwise estimand x_{k,l} (0-based labels) in place
    of the default Q_{s1,s2} - d.
    """
    guard(params.n <= MAX_ORACLE_N, f"oracle n={params.n} exceeds {MAX_ORACLE_N}")
    guard(D <= MAX_ORACLE_D, f"oracle degree {D} exceeds {MAX_ORACLE_D}")
    if D < 0:
        raise ValueError("degree must be >= 0")
    if isinstance(params, SubmatrixParams):
        return _submatrix_gram(params, D)
    if isinstance(params, WignerParams):
        return _wigner_gram(params, D)
    if isinstance(params, (PdsParams, SbmParams)):
        return _bernoulli_gram(params, D, pair)
    raise TypeError(f"unknown params type {type(params)!r}")


def build_gram_monomial(params: ModelParams, D: int) -> GramSystem:
    """Raw-monomial Gram for the Gaussian models (basis-invariance cross-check).

    E[Y^gamma] is computed by enumerating the latent signal exactly and
    integrating the independent Gaussian noise moment per edge.
    """
    guard(params.n <= MAX_ORACLE_N, f"oracle n={params.n} exceeds {MAX_ORACLE_N}")
    guard(D <= MAX_ORACLE_D, f"oracle degree {D} exceeds {MAX_ORACLE_D}")
    basis = _multigraph_basis(params.n, D)

    def gauss_moment(j: int) -> float:
        if j % 2 == 1:
            return 0.0
        out = 1.0
        for t in range(1, j, 2):
            out *= t
        return out  # (j-1)!!

    if isinstance(params, SubmatrixParams):
        lam, rho = params.lam, params.rho
        states = [(\
            {v: b for v, b in zip(range(1, params.n + 1), bits)},
            math.prod(rho if b else 1 - rho for b in bits))
            for bits in itertools.product((0, 1), repeat=params.n)]

        def signal(st, i, j):
            return lam * st[i] * st[j]

        def xval(st):
            return float(st[1])
    elif isinstance(params, WignerParams):
        pts, prb = params.prior.points, params.prior.probs
        scale = math.sqrt(params.lam / params.n)
        rows = list(itertools.product(range(len(pts)), repeat=params.m))
        states = []
        for combo in itertools.product(rows, repeat=params.n):
            wgt = 1.0
            vecs = {}
            for v, row in enumerate(combo, start=1):
                for t in row:
                    wgt *= prb[t]
                vecs[v] = [pts[t] for t in row]
            states.append((vecs, wgt))
        guard(len(states) <= 2_000_000, "wigner latent enumeration too large")

        def signal(st, i, j):
            return scale * sum(a * b for a, b in zip(st[i], st[j]))

        def xval(st):
            return signal(st, 1, 2)
    else:
        raise TypeError("monomial Gram is for the Gaussian models")

    def y_moment(gamma: MultiGraph, extra=None) -> float:
        total = 0.0
        for st, wgt in states:
            term = wgt if extra is None else wgt * extra(st)
            for (i, j), mult in gamma.edges:
                s = signal(st, i, j)
                term *= sum(math.comb(mult, k) * s ** k * gauss_moment(mult - k)
                            for k in range(mult + 1))
            total += term
        return total

    size = len(basis)
    g = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            g[a, b] = g[b, a] = y_moment(basis[a].add(basis[b]))
    c = np.array([y_moment(alpha, extra=xval) for alpha in basis])
    model = "submatrix" if isinstance(params, SubmatrixParams) else "wigner"
    return GramSystem(basis, g, c, second_moment_x(params), model, D)


def exact_corr(gs: GramSystem, cutoff: float = RANK_CUTOFF) -> OracleResult:
    """Corr = sqrt(c^T G^+ c / E[x^2]) with a relative eigenvalue cutoff,
    clamped to [0, 1]; MMSE from the correlation identity."""
    if gs.ex2 <= 0:
        raise ValueError("estimand second moment must be positive")
    w, vecs = np.linalg.eigh(gs.G)
    wmax = float(np.max(np.abs(w))) if len(w) else 0.0
    keep = w > cutoff * wmax if wmax > 0 else np.zeros_like(w, dtype=bool)
    proj = vecs.T @ gs.c
    quad = float(np.sum(proj[keep] ** 2 / w[keep]))
    corr2 = min(max(quad / gs.ex2, 0.0), 1.0)
    corr = math.sqrt(corr2)
    return OracleResult(corr=corr, mmse=(1.0 - corr2) * gs.ex2,
                        basis_size=len(gs.indices), gram_rank=int(np.sum(keep)))


def minimized_mse(gs: GramSystem, rcond: float = RANK_CUTOFF) -> float:
    """Independent MMSE path: minimize E[(f - x)^2] by least squares on G f = c."""
    f, *_ = np.linalg.lstsq(gs.G, gs.c, rcond=rcond)
    return float(gs.ex2 - 2.0 * gs.c @ f + f @ gs.G @ f)
