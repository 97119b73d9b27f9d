"""Joint-cumulant machinery for the spiked Wigner lower bound.

kappa_alpha is the joint cumulant of the estimand together with one copy of
the signal entry X_ij per edge of alpha.  The recursion zeroes out on "bad"
graphs exactly; the set-partition formula is kept as an independent oracle.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

from .graphs import GraphClassSpec, MultiGraph, enumerate_class, is_good_pair
from .guards import guard
from .models import PriorSpec

MAX_KAPPA_EDGES = 6
MAX_ORACLE_VARS = 6


def moment_X(gamma: MultiGraph, prior: PriorSpec, lam: float, n: int, m: int = 1) -> float:
    """Exact E[X^gamma] for the rank-m spike sqrt(lam/n) U U^T.

    Rank 1 factors over vertices as prod E[pi^deg]; general m sums one
    coordinate assignment per edge copy (self-loops add 2 to the degree at
    their vertex and coordinate).
    """
    d = gamma.edge_count
    if d == 0:
        return 1.0
    base = (lam / n) ** (d / 2.0)
    if m == 1:
        out = 1.0
        for v, deg in gamma.degrees().items():
            out *= prior.moment(deg)
        return base * out
    edges = gamma.edge_multiset()
    total = 0.0
    for assign in itertools.product(range(m), repeat=d):
        deg: dict[tuple[int, int], int] = {}
        for (i, j), c in zip(edges, assign):
            deg[(i, c)] = deg.get((i, c), 0) + 1
            deg[(j, c)] = deg.get((j, c), 0) + 1  # (i, i) hits the same key twice
        term = 1.0
        for cnt in deg.values():
            term *= prior.moment(cnt)
            if term == 0.0:
                break
        total += term
    return base * total


@lru_cache(maxsize=None)
def _kappa_rank1(alpha: MultiGraph, prior: PriorSpec, lam: float, n: int) -> float:
    if not is_good_pair(alpha):
        return 0.0
    if alpha.edge_count == 0:
        return 0.0  # kappa of the empty graph is E[x] = 0
    total = moment_X(alpha.bar(), prior, lam, n, 1)
    for beta in alpha.proper_subgraphs():
        if beta.edge_count == 0 or not is_good_pair(beta):
            continue
        total -= alpha.binom(beta) * moment_X(alpha.minus(beta), prior, lam, n, 1) \
            * _kappa_rank1(beta, prior, lam, n)
    return total


def kappa(alpha: MultiGraph, prior: PriorSpec, lam: float, n: int, m: int = 1) -> float:
    """kappa_alpha at rank m, via the rank-1 recursion and additivity kappa^(m) = m kappa^(1)."""
    guard(alpha.edge_count <= MAX_KAPPA_EDGES,
          f"|alpha|={alpha.edge_count} exceeds the cumulant recursion guard")
    return m * _kappa_rank1(alpha, prior, lam, n)


def _set_partitions(items: list):
    """All partitions of items into non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def kappa_oracle(alpha: MultiGraph, prior: PriorSpec, lam: float, n: int, m: int = 1) -> float:
    """Joint cumulant of the |alpha|+1 edge variables of alpha + (1,2), by the
    set-partition Moebius formula.  Independent cross-check for kappa()."""
    items = list(alpha.bar().edge_multiset())
    guard(len(items) <= MAX_ORACLE_VARS,
          f"{len(items)} variables exceed the Bell-number guard")
    total = 0.0
    for part in _set_partitions(items):
        sign = (-1.0) ** (len(part) - 1) * math.factorial(len(part) - 1)
        prod = sign
        for block in part:
            prod *= moment_X(MultiGraph(block), prior, lam, n, m)
            if prod == 0.0:
                break
        total += prod
    return total


@lru_cache(maxsize=None)
def f_value(alpha: MultiGraph) -> int:
    """Combinatorial growth weight: f(0) = 1 and
    f(alpha) = sum over good beta < alpha of binom(alpha, beta) f(beta)."""
    if not is_good_pair(alpha):
        raise ValueError("f is defined on good graphs only")
    if alpha.edge_count == 0:
        return 1
    total = 0
    for beta in alpha.proper_subgraphs():
        if is_good_pair(beta):
            total += alpha.binom(beta) * f_value(beta)
    return total


def f_upper_bound(alpha: MultiGraph) -> float:
    """(2|alpha|)^{|alpha| - |V(alpha)| + 1}."""
    d = alpha.edge_count
    return float(2 * d) ** (d - alpha.vertex_count + 1)


def kappa_upper_bound(alpha: MultiGraph, prior: PriorSpec, lam: float, n: int) -> float:
    """(lam/n)^{(|alpha|+1)/2} f(alpha) M(delta(alpha + (1,2)))."""
    d = alpha.edge_count
    return (lam / n) ** ((d + 1) / 2.0) * f_value(alpha) \
        * prior.max_abs_moment(alpha.bar().excess_degree)


def wigner_corr_bound(D: int, lam: float, m: int, n: int, prior: PriorSpec) -> dict:
    """Desk-scale exact sum of kappa^2/alpha! over good graphs, plus the
    analytic envelope sqrt((m/n) sum_{d<=D} lam^d) (existential constants
    omitted).  The exact sum requires enumeration and is reported as None
    beyond the enumeration guards."""
    from .graphs import MAX_EDGES, MAX_N
    from .guards import override_active

    ex2 = lam * m / n
    envelope_sq = (m / n) * sum(lam ** d for d in range(1, D + 1))
    rec = {
        "kappa_sq_sum": None,
        "ex2": ex2,
        "corr_bound_exact": None,
        "envelope_sq": envelope_sq,
        "envelope": math.sqrt(envelope_sq),
        "good_count": None,
    }
    if (n <= MAX_N and D <= min(MAX_EDGES, MAX_KAPPA_EDGES)) or override_active():
        goods = enumerate_class(GraphClassSpec("good-SW", n=n, max_edges=D))
        total = 0.0
        for alpha in goods:
            if alpha.edge_count == 0:
                continue
            k = m * _kappa_rank1(alpha, prior, lam, n)
            total += k * k / alpha.factorial()
        rec["kappa_sq_sum"] = total
        rec["corr_bound_exact"] = math.sqrt(total / ex2) if ex2 > 0 else 0.0
        rec["good_count"] = len(goods) - 1
    return rec
