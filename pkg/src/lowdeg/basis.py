"""Orthonormal polynomial systems per model and exact evaluation of the
coefficient vector c and constraint matrix M.

Bernoulli-model expectations are computed by exact enumeration of the latent
variables (theta for planted subgraph, community labels for the block model);
Gaussian-model quantities use the closed Hermite-expansion forms.  SBM labels
are 0-based here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .graphs import MultiGraph
from .guards import guard
from .models import PdsParams, SbmParams, SingularModelError

MAX_ENUM_VERTICES = 10


@dataclass(frozen=True)
class BasisIndex:
    """Index (beta, gamma) into the orthonormal system.

    For submatrix/PDS, gamma is a sorted tuple of vertex ids (a subset of [n]).
    For the SBM, gamma is a tuple of community labels aligned with
    sorted(V(beta)); gamma = () when beta is empty.
    """

    beta: MultiGraph
    gamma: tuple[int, ...] = ()

    def gamma_set(self) -> frozenset[int]:
        return frozenset(self.gamma)


# ---------------------------------------------------------------------------
# Hermite machinery (unit-norm probabilist's family)
# ---------------------------------------------------------------------------

def hermite(k: int, z: float) -> float:
    """Orthonormal Hermite value h_k(z), E[h_j(Z) h_k(Z)] = 1{j=k} for Z ~ N(0,1)."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    if k == 0:
        return 1.0
    h_prev, h = 1.0, z
    for j in range(1, k):
        h_prev, h = h, (z * h - math.sqrt(j) * h_prev) / math.sqrt(j + 1)
    return h


def hermite_monomial(alpha: MultiGraph, y) -> float:
    """H_alpha(Y) = product over edges of h_mult(Y_ij); y is a full symmetric matrix."""
    out = 1.0
    for (i, j), m in alpha.edges:
        out *= hermite(m, y[i - 1, j - 1])
    return out


# ---------------------------------------------------------------------------
# Latent enumeration helpers
# ---------------------------------------------------------------------------

def _theta_assignments(verts: tuple[int, ...], rho: float):
    """All 0/1 assignments on verts with their Bernoulli(rho) weights."""
    for bits in itertools.product((0, 1), repeat=len(verts)):
        w = 1.0
        for b in bits:
            w *= rho if b else (1.0 - rho)
        yield dict(zip(verts, bits)), w


def _sigma_assignments(verts: tuple[int, ...], pi: tuple[float, ...]):
    q = len(pi)
    for labels in itertools.product(range(q), repeat=len(verts)):
        w = 1.0
        for s in labels:
            w *= pi[s]
        yield dict(zip(verts, labels)), w


# ---------------------------------------------------------------------------
# Planted submatrix
# ---------------------------------------------------------------------------

def c_submatrix(alpha: MultiGraph, lam: float, rho: float) -> float:
    """lambda^{|a|} rho^{|V(a) u {1}|} / sqrt(a!)."""
    v = len(alpha.vertices | {1})
    return lam ** alpha.edge_count * rho ** v / math.sqrt(alpha.factorial())


def M_submatrix(idx: BasisIndex, alpha: MultiGraph, lam: float, rho: float) -> float:
    """Closed form; zero unless beta <= alpha and gamma inside V(alpha - beta)."""
    if not 0.0 < rho < 1.0:
        raise SingularModelError("rho must lie strictly inside (0, 1)")
    beta = idx.beta
    if not alpha.contains(beta):
        return 0.0
    rest = alpha.minus(beta)
    gamma = idx.gamma_set()
    if not gamma <= rest.vertices:
        return 0.0
    coef = math.sqrt(beta.factorial() / alpha.factorial()) * alpha.binom(beta)
    return coef * lam ** rest.edge_count * rho ** rest.vertex_count \
        * ((1.0 - rho) / rho) ** (len(gamma) / 2.0)


def c_submatrix_by_expectation(alpha: MultiGraph, lam: float, rho: float) -> float:
    """Definition path: E[H_alpha(Y) theta_1] with theta enumerated exactly."""
    verts = tuple(sorted(alpha.vertices | {1}))
    total = 0.0
    for theta, w in _theta_assignments(verts, rho):
        x_mono = 1.0
        for (i, j), m in alpha.edges:
            x_mono *= (lam * theta[i] * theta[j]) ** m
        total += w * x_mono * theta[1]
    return total / math.sqrt(alpha.factorial())


def M_submatrix_by_expectation(idx: BasisIndex, alpha: MultiGraph, lam: float, rho: float) -> float:
    """Definition path via the Hermite expansion plus exact theta enumeration."""
    if not 0.0 < rho < 1.0:
        raise SingularModelError("rho must lie strictly inside (0, 1)")
    beta = idx.beta
    if not alpha.contains(beta):
        return 0.0
    rest = alpha.minus(beta)
    gamma = idx.gamma_set()
    verts = tuple(sorted(rest.vertices | gamma))
    coef = math.sqrt(beta.factorial() / alpha.factorial()) * alpha.binom(beta)
    norm = math.sqrt(rho * (1.0 - rho))
    total = 0.0
    for theta, w in _theta_assignments(verts, rho):
        term = 1.0
        for (i, j), m in rest.edges:
            term *= (lam * theta[i] * theta[j]) ** m
        for i in gamma:
            term *= (theta[i] - rho) / norm
        total += w * term
    return coef * total


def u_factor(gamma_size: int, rho: float) -> float:
    """(-sqrt(rho / (1 - rho)))^{|gamma|}, the certificate's gamma prefactor."""
    if not 0.0 < rho < 1.0:
        raise SingularModelError("rho must lie strictly inside (0, 1)")
    return (-math.sqrt(rho / (1.0 - rho))) ** gamma_size


# ---------------------------------------------------------------------------
# Planted dense subgraph
# ---------------------------------------------------------------------------

def _require_simple(alpha: MultiGraph, what: str) -> None:
    if not alpha.is_simple and alpha.edge_count > 0:
        raise ValueError(f"{what} must be a simple graph")


def c_pds(alpha: MultiGraph, params: PdsParams) -> float:
    """rho^{|V(a) u {1}|} (p1 - p0)^{|a|}."""
    _require_simple(alpha, "alpha")
    v = len(alpha.vertices | {1})
    return params.rho ** v * (params.p1 - params.p0) ** alpha.edge_count


def M_pds(idx: BasisIndex, alpha: MultiGraph, params: PdsParams) -> float:
    """Exact E[phi_alpha psi_{beta gamma}] by enumerating theta over the touched vertices."""
    beta = idx.beta
    _require_simple(alpha, "alpha")
    _require_simple(beta, "beta")
    if not alpha.contains(beta):
        return 0.0
    gamma = idx.gamma_set()
    rho = params.rho
    if gamma and not 0.0 < rho < 1.0:
        raise SingularModelError("gamma factors need rho strictly inside (0, 1)")
    p0, p1 = params.p0, params.p1_effective
    s0 = math.sqrt(p0 * (1.0 - p0))
    s1 = math.sqrt(p1 * (1.0 - p1))
    rest = alpha.minus(beta)
    verts = tuple(sorted(alpha.vertices | beta.vertices | gamma))
    norm = math.sqrt(rho * (1.0 - rho)) if gamma else 1.0
    total = 0.0
    for theta, w in _theta_assignments(verts, rho):
        if any(theta[i] * theta[j] == 0 for (i, j), _ in rest.edges):
            continue
        term = (p1 - p0) ** rest.edge_count
        for (i, j), _ in beta.edges:
            term *= s1 if theta[i] * theta[j] == 1 else s0
        for i in gamma:
            term *= (theta[i] - rho) / norm
        total += w * term
    return total


def c_pds_by_expectation(alpha: MultiGraph, params: PdsParams) -> float:
    """Definition path: E[(Y - p0)^alpha theta_1] with theta enumerated exactly."""
    _require_simple(alpha, "alpha")
    verts = tuple(sorted(alpha.vertices | {1}))
    total = 0.0
    dp = params.p1 - params.p0
    for theta, w in _theta_assignments(verts, params.rho):
        term = theta[1]
        for (i, j), _ in alpha.edges:
            term *= dp * theta[i] * theta[j]  # E[Y_ij - p0 | theta]
        total += w * term
    return total


# ---------------------------------------------------------------------------
# Stochastic block model (labels 0..q-1)
# ---------------------------------------------------------------------------

def _gamma_map(beta: MultiGraph, gamma: tuple[int, ...]) -> dict[int, int]:
    verts = sorted(beta.vertices)
    if len(gamma) != len(verts):
        raise ValueError("gamma must assign one label per vertex of beta")
    return dict(zip(verts, gamma))


def c_sbm(alpha: MultiGraph, k0: int, l0: int, params: SbmParams) -> float:
    """E[phi_alpha x_{k0 l0}] by exact enumeration over community labels."""
    _require_simple(alpha, "alpha")
    verts = tuple(sorted(alpha.vertices | {1, 2}))
    guard(len(verts) <= MAX_ENUM_VERTICES, f"{len(verts)} vertices exceed the enumeration guard")
    n, d, q_mat, pi = params.n, params.d, params.Q, params.pi
    total = 0.0
    for sig, w in _sigma_assignments(verts, pi):
        x = ((1.0 if sig[1] == k0 else 0.0) - pi[k0]) * ((1.0 if sig[2] == l0 else 0.0) - pi[l0])
        if x == 0.0:
            continue
        term = x
        for (i, j), _ in alpha.edges:
            term *= (q_mat[sig[i]][sig[j]] - d) / n
        total += w * term
    return total


def M_sbm(idx: BasisIndex, alpha: MultiGraph, params: SbmParams) -> float:
    """E[phi_alpha psi_{beta gamma}]; zero whenever beta is not a subgraph of alpha."""
    beta = idx.beta
    _require_simple(alpha, "alpha")
    _require_simple(beta, "beta")
    if not alpha.contains(beta):
        return 0.0
    verts = tuple(sorted(alpha.vertices | beta.vertices))
    guard(len(verts) <= MAX_ENUM_VERTICES, f"{len(verts)} vertices exceed the enumeration guard")
    n, d, q_mat, pi = params.n, params.d, params.Q, params.pi
    gmap = _gamma_map(beta, idx.gamma)
    weight0 = 1.0
    for i, lab in gmap.items():
        weight0 /= math.sqrt(pi[lab])
    rest = alpha.minus(beta)
    free = tuple(v for v in verts if v not in gmap)
    total = 0.0
    for sig_free, w in _sigma_assignments(free, pi):
        sig = dict(gmap)
        sig.update(sig_free)
        term = weight0 * w
        for i, lab in gmap.items():
            term *= pi[lab]  # P(sigma_i = gamma_i) for the indicator event
        for (i, j), _ in beta.edges:
            p = q_mat[sig[i]][sig[j]] / n
            term *= math.sqrt(p * (1.0 - p))
        for (i, j), _ in rest.edges:
            term *= (q_mat[sig[i]][sig[j]] - d) / n
        total += term
    return total


def M_sbm_diag(alpha: MultiGraph, gamma: tuple[int, ...], params: SbmParams) -> float:
    """Closed form for M_{alpha gamma, alpha}: sqrt(prod pi) * prod sqrt(p(1-p))."""
    _require_simple(alpha, "alpha")
    n, q_mat, pi = params.n, params.Q, params.pi
    gmap = _gamma_map(alpha, gamma)
    out = 1.0
    for lab in gmap.values():
        out *= math.sqrt(pi[lab])
    for (i, j), _ in alpha.edges:
        p = q_mat[gmap[i]][gmap[j]] / n
        out *= math.sqrt(p * (1.0 - p))
    return out


def conditional_moment_phi(alpha: MultiGraph, W: tuple[int, ...], tau: tuple[int, ...],
                           params: SbmParams) -> float:
    """Exact E[phi_alpha(Y) | sigma_W = tau] by summing labels on V(alpha) \\ W."""
    _require_simple(alpha, "alpha")
    wset = frozenset(W)
    if not wset <= alpha.vertices:
        raise ValueError("W must be a subset of V(alpha)")
    if len(tau) != len(W):
        raise ValueError("tau must label every vertex of W")
    verts = tuple(sorted(alpha.vertices))
    guard(len(verts) <= MAX_ENUM_VERTICES, f"{len(verts)} vertices exceed the enumeration guard")
    n, d, q_mat, pi = params.n, params.d, params.Q, params.pi
    fixed = dict(zip(W, tau))  # tau aligned with the given W order
    free = tuple(v for v in verts if v not in fixed)
    total = 0.0
    for sig_free, w in _sigma_assignments(free, pi):
        sig = dict(fixed)
        sig.update(sig_free)
        term = w
        for (i, j), _ in alpha.edges:
            term *= (q_mat[sig[i]][sig[j]] - d) / n
        total += term
    return total


def conditional_moment_phi_table(alpha: MultiGraph, W: tuple[int, ...],
                                 params: SbmParams) -> dict[tuple[int, ...], float]:
    """E[phi_alpha | sigma_W = tau] for every tau at once (single label sweep)."""
    _require_simple(alpha, "alpha")
    wset = frozenset(W)
    if not wset <= alpha.vertices:
        raise ValueError("W must be a subset of V(alpha)")
    verts = tuple(sorted(alpha.vertices))
    guard(len(verts) <= MAX_ENUM_VERTICES, f"{len(verts)} vertices exceed the enumeration guard")
    n, d, q_mat, pi = params.n, params.d, params.Q, params.pi
    out: dict[tuple[int, ...], float] = {}
    for sig, w_all in _sigma_assignments(verts, pi):
        w = 1.0
        for v in verts:
            if v not in wset:
                w *= pi[sig[v]]
        term = w
        for (i, j), _ in alpha.edges:
            term *= (q_mat[sig[i]][sig[j]] - d) / n
        tau = tuple(sig[v] for v in W)
        out[tau] = out.get(tau, 0.0) + term
    return out


def expectation_phi_sbm(alpha: MultiGraph, params: SbmParams) -> float:
    """Unconditional E[phi_alpha(Y)]."""
    if alpha.edge_count == 0:
        return 1.0
    return conditional_moment_phi(alpha, (), (), params)


# ---------------------------------------------------------------------------
# psi evaluators (Monte Carlo orthonormality checks, certificates)
# ---------------------------------------------------------------------------

def psi_submatrix(idx: BasisIndex, z, theta, rho: float) -> float:
    if not 0.0 < rho < 1.0:
        raise SingularModelError("rho must lie strictly inside (0, 1)")
    out = hermite_monomial(idx.beta, z)
    norm = math.sqrt(rho * (1.0 - rho))
    for i in idx.gamma:
        out *= (theta[i - 1] - rho) / norm
    return out


def psi_pds(idx: BasisIndex, y, theta, params: PdsParams) -> float:
    p0, p1 = params.p0, params.p1_effective
    s0 = math.sqrt(p0 * (1.0 - p0))
    s1 = math.sqrt(p1 * (1.0 - p1))
    out = 1.0
    for (i, j), _ in idx.beta.edges:
        if theta[i - 1] * theta[j - 1] == 1:
            out *= (y[i - 1, j - 1] - p1) / s1
        else:
            out *= (y[i - 1, j - 1] - p0) / s0
    rho = params.rho
    if idx.gamma:
        if not 0.0 < rho < 1.0:
            raise SingularModelError("gamma factors need rho strictly inside (0, 1)")
        norm = math.sqrt(rho * (1.0 - rho))
        for i in idx.gamma:
            out *= (theta[i - 1] - rho) / norm
    return out


def psi_sbm(idx: BasisIndex, y, sigma, params: SbmParams) -> float:
    gmap = _gamma_map(idx.beta, idx.gamma)
    for i, lab in gmap.items():
        if sigma[i - 1] != lab:
            return 0.0
    n, q_mat, pi = params.n, params.Q, params.pi
    out = 1.0
    for lab in gmap.values():
        out /= math.sqrt(pi[lab])
    for (i, j), _ in idx.beta.edges:
        p = q_mat[gmap[i]][gmap[j]] / n
        out *= (y[i - 1, j - 1] - p) / math.sqrt(p * (1.0 - p))
    return out


def phi_pds(alpha: MultiGraph, y, p0: float) -> float:
    out = 1.0
    for (i, j), _ in alpha.edges:
        out *= y[i - 1, j - 1] - p0
    return out


def phi_sbm(alpha: MultiGraph, y, params: SbmParams) -> float:
    ratio = params.d / params.n
    out = 1.0
    for (i, j), _ in alpha.edges:
        out *= y[i - 1, j - 1] - ratio
    return out


# ---------------------------------------------------------------------------
# Exact psi Gram matrices (Bernoulli models)
# ---------------------------------------------------------------------------

def _pair_moment_bernoulli(p: float, centers_scales: list[tuple[float, float]]) -> float:
    """E[prod (Y - c_k)/s_k] for a single Y ~ Ber(p) and the given factors."""
    hit = (1.0 - p)
    val1 = 1.0
    val0 = 1.0
    for c, s in centers_scales:
        val1 *= (1.0 - c) / s
        val0 *= (0.0 - c) / s
    return p * val1 + hit * val0


def exact_psi_gram_pds(indices: list[BasisIndex], params: PdsParams):
    import numpy as np

    rho = params.rho
    p0, p1 = params.p0, params.p1_effective
    s0 = math.sqrt(p0 * (1.0 - p0))
    s1 = math.sqrt(p1 * (1.0 - p1))
    norm = math.sqrt(rho * (1.0 - rho))
    size = len(indices)
    g = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            ia, ib = indices[a], indices[b]
            verts = tuple(sorted(ia.beta.vertices | ib.beta.vertices
                                 | ia.gamma_set() | ib.gamma_set()))
            guard(len(verts) <= MAX_ENUM_VERTICES, "psi gram enumeration too large")
            edges = sorted(set(ia.beta.support) | set(ib.beta.support))
            total = 0.0
            for theta, w in _theta_assignments(verts, rho):
                term = 1.0
                for (i, j) in edges:
                    inside = theta[i] * theta[j] == 1
                    p = p1 if inside else p0
                    cs = []
                    if ia.beta.multiplicity(i, j):
                        cs.append((p1, s1) if inside else (p0, s0))
                    if ib.beta.multiplicity(i, j):
                        cs.append((p1, s1) if inside else (p0, s0))
                    term *= _pair_moment_bernoulli(p, cs)
                for i in ia.gamma:
                    term *= (theta[i] - rho) / norm
                for i in ib.gamma:
                    term *= (theta[i] - rho) / norm
                total += w * term
            g[a, b] = g[b, a] = total
    return g


def exact_psi_gram_sbm(indices: list[BasisIndex], params: SbmParams):
    import numpy as np

    n, q_mat, pi = params.n, params.Q, params.pi
    size = len(indices)
    g = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            ia, ib = indices[a], indices[b]
            ga, gb = _gamma_map(ia.beta, ia.gamma), _gamma_map(ib.beta, ib.gamma)
            verts = tuple(sorted(ia.beta.vertices | ib.beta.vertices))
            guard(len(verts) <= MAX_ENUM_VERTICES, "psi gram enumeration too large")
            edges = sorted(set(ia.beta.support) | set(ib.beta.support))
            total = 0.0
            for sig, w in _sigma_assignments(verts, pi):
                if any(sig[i] != lab for i, lab in ga.items()):
                    continue
                if any(sig[i] != lab for i, lab in gb.items()):
                    continue
                term = 1.0
                for lab in ga.values():
                    term /= math.sqrt(pi[lab])
                for lab in gb.values():
                    term /= math.sqrt(pi[lab])
                for (i, j) in edges:
                    p = q_mat[sig[i]][sig[j]] / n
                    s = math.sqrt(p * (1.0 - p))
                    cs = []
                    if ia.beta.multiplicity(i, j):
                        cs.append((p, s))
                    if ib.beta.multiplicity(i, j):
                        cs.append((p, s))
                    term *= _pair_moment_bernoulli(p, cs)
                total += w * term
            g[a, b] = g[b, a] = total
    return g


# ---------------------------------------------------------------------------
# Index set construction and CSV export
# ---------------------------------------------------------------------------

def rooted_good_indices(goods: list[MultiGraph]) -> list[BasisIndex]:
    """All (beta, gamma) with beta in the given rooted-good list and
    gamma a subset of V(beta) u {1}."""
    out = []
    for beta in goods:
        pool = sorted(beta.vertices | {1})
        for r in range(len(pool) + 1):
            for gamma in itertools.combinations(pool, r):
                out.append(BasisIndex(beta, gamma))
    return out


def sbm_good_indices(goods: list[MultiGraph], q: int) -> list[BasisIndex]:
    """All (beta, gamma) with beta good and gamma in [q]^{V(beta)}."""
    out = []
    for beta in goods:
        verts = sorted(beta.vertices)
        for gamma in itertools.product(range(q), repeat=len(verts)):
            out.append(BasisIndex(beta, gamma))
    return out


def gamma_string(gamma: tuple[int, ...]) -> str:
    return "|".join(str(x) for x in gamma)


def export_coeff_csv(path: str, coeffs: dict[MultiGraph, float]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("beta_canonical,gamma_canonical,alpha_canonical,value\n")
        for alpha in sorted(coeffs, key=MultiGraph.sort_key):
            fh.write(f",,\"{alpha.to_line()}\",{coeffs[alpha]:.17g}\n")


def export_constraint_csv(path: str, entries: dict[tuple[BasisIndex, MultiGraph], float]) -> None:
    def sort_key(item):
        (idx, alpha), _ = item
        return (idx.beta.sort_key(), idx.gamma, alpha.sort_key())

    with open(path, "w", encoding="ascii") as fh:
        fh.write("beta_canonical,gamma_canonical,alpha_canonical,value\n")
        for (idx, alpha), val in sorted(entries.items(), key=sort_key):
            fh.write(f"\"{idx.beta.to_line()}\",{gamma_string(idx.gamma)},"
                     f"\"{alpha.to_line()}\",{val:.17g}\n")
