"""Cumulant machinery: recursion vs set-partition oracle, f recursion, and
growth bounds."""

import itertools
import math

import pytest

from lowdeg.cumulants import (f_upper_bound, f_value, kappa, kappa_oracle,
                              kappa_upper_bound, moment_X, wigner_corr_bound)
from lowdeg.graphs import (EMPTY, GraphClassSpec, MultiGraph, enumerate_class,
                           is_good_pair)
from lowdeg.guards import GuardError
from lowdeg.models import PriorSpec

RAD = PriorSpec.rademacher()
TP3 = PriorSpec.three_point(math.sqrt(3.0))


def all_multigraphs(n, dmax):
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
    out = [EMPTY]
    for d in range(1, dmax + 1):
        out.extend(MultiGraph(c) for c in
                   itertools.combinations_with_replacement(pairs, d))
    return out


def moment_by_rows(gamma, prior, lam, n, m):
    """Independent oracle: enumerate every row assignment of the spike matrix."""
    pts, prb = prior.points, prior.probs
    verts = sorted(gamma.vertices)
    total = 0.0
    for assign in itertools.product(range(len(pts)), repeat=m * len(verts)):
        w = 1.0
        for t in assign:
            w *= prb[t]
        rows = {v: [pts[t] for t in assign[r * m:(r + 1) * m]]
                for r, v in enumerate(verts)}
        term = w
        for (i, j), mult in gamma.edges:
            ip = sum(a * b for a, b in zip(rows[i], rows[j]))
            term *= ip ** mult
        total += term
    return (lam / n) ** (gamma.edge_count / 2.0) * total


class TestMomentX:
    def test_examples(self):
        assert abs(moment_X(MultiGraph({(1, 2): 2}), RAD, 2.0, 8) - 0.25) < 1e-15
        tri = MultiGraph([(1, 2), (2, 3), (1, 3)])
        assert abs(moment_X(tri, RAD, 1.0, 4) - 0.25 ** 1.5) < 1e-15
        assert moment_X(MultiGraph([(1, 2)]), RAD, 1.0, 4) == 0.0  # odd degree
        assert moment_X(EMPTY, RAD, 1.0, 4) == 1.0

    def test_self_loop_degree(self):
        loop = MultiGraph([(1, 1)])
        # E[X_11] = sqrt(lam/n) E[pi^2] = sqrt(lam/n)
        assert abs(moment_X(loop, RAD, 2.0, 8) - math.sqrt(0.25)) < 1e-15

    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("prior", [RAD, TP3])
    def test_rank_m_matches_row_enumeration(self, m, prior):
        graphs = [MultiGraph({(1, 2): 2}),
                  MultiGraph([(1, 2), (2, 3), (1, 3)]),
                  MultiGraph({(1, 1): 1, (1, 2): 2})]
        for g in graphs:
            want = moment_by_rows(g, prior, 1.3, 5, m)
            assert abs(moment_X(g, prior, 1.3, 5, m) - want) < 1e-12


class TestKappa:
    def test_empty_and_single_edge(self):
        assert kappa(EMPTY, RAD, 1.0, 4) == 0.0
        assert abs(kappa(MultiGraph([(1, 2)]), RAD, 2.0, 8) - 0.25) < 1e-15

    def test_bad_graphs_exactly_zero(self):
        for alpha in all_multigraphs(4, 4):
            if not is_good_pair(alpha):
                assert kappa(alpha, RAD, 0.8, 4) == 0.0
                assert kappa(alpha, TP3, 0.8, 4) == 0.0

    @pytest.mark.parametrize("prior", [RAD, TP3])
    def test_matches_partition_oracle(self, prior):
        worst = 0.0
        for alpha in all_multigraphs(4, 3):
            worst = max(worst, abs(kappa(alpha, prior, 0.9, 4)
                                   - kappa_oracle(alpha, prior, 0.9, 4)))
        assert worst < 1e-12

    def test_oracle_single_variable(self):
        # kappa of the lone (1,2) variable is E[X_12] = 0
        assert abs(kappa_oracle(EMPTY, RAD, 1.0, 4)) < 1e-18

    def test_oracle_independence_split(self):
        # components sharing no vertices: joint cumulant vanishes
        alpha = MultiGraph([(3, 4), (3, 4)])
        assert abs(kappa_oracle(alpha, TP3, 1.0, 6)) < 1e-15

    def test_rank_additivity_via_oracle(self):
        goods = [g for g in enumerate_class(GraphClassSpec("good-SW", n=4, max_edges=3))
                 if g.edge_count]
        for alpha in goods:
            base = kappa_oracle(alpha, RAD, 1.1, 4, m=1)
            for m in (2, 3):
                assert abs(kappa_oracle(alpha, RAD, 1.1, 4, m=m) - m * base) < 1e-12
                assert abs(kappa(alpha, RAD, 1.1, 4, m=m) - m * kappa(alpha, RAD, 1.1, 4)) < 1e-15

    def test_guards(self):
        big = MultiGraph({(1, 2): 7})
        with pytest.raises(GuardError):
            kappa(big, RAD, 1.0, 4)
        with pytest.raises(GuardError):
            kappa_oracle(MultiGraph({(1, 2): 6}), RAD, 1.0, 4)


class TestF:
    def test_base_cases(self):
        assert f_value(EMPTY) == 1
        assert f_value(MultiGraph([(1, 2)])) == 1

    def test_double_edge_by_hand(self):
        de = MultiGraph({(1, 2): 2})
        assert f_value(de) == 3
        assert f_upper_bound(de) == 4.0

    def test_rejects_bad_graphs(self):
        with pytest.raises(ValueError):
            f_value(MultiGraph([(1, 3)]))

    def test_doubling_identity(self):
        # 2 f(alpha) = sum over good beta <= alpha of binom(alpha, beta) f(beta)
        goods = [g for g in enumerate_class(GraphClassSpec("good-SW", n=5, max_edges=5))
                 if g.edge_count]
        for alpha in goods:
            rhs = sum(alpha.binom(beta) * f_value(beta)
                      for beta in alpha.subgraphs() if is_good_pair(beta))
            assert 2 * f_value(alpha) == rhs

    def test_upper_bound_all_good(self):
        for alpha in enumerate_class(GraphClassSpec("good-SW", n=5, max_edges=5)):
            if alpha.edge_count:
                assert f_value(alpha) <= f_upper_bound(alpha)


class TestKappaBound:
    @pytest.mark.parametrize("prior", [RAD, TP3])
    def test_bound_holds(self, prior):
        goods = [g for g in enumerate_class(GraphClassSpec("good-SW", n=5, max_edges=4))
                 if g.edge_count]
        for alpha in goods:
            assert abs(kappa(alpha, prior, 1.7, 5)) \
                <= kappa_upper_bound(alpha, prior, 1.7, 5) + 1e-15


class TestWignerBound:
    def test_zero_signal(self):
        rec = wigner_corr_bound(3, 0.0, 1, 4, RAD)
        assert rec["kappa_sq_sum"] == 0.0
        assert rec["envelope"] == 0.0
        assert rec["corr_bound_exact"] == 0.0

    def test_frozen_enumeration_value(self):
        # n=4, D=2, lam=0.5, m=1, Rademacher: sum kappa^2/alpha! equals
        # (1/8)^2 + 2 (1/8)^3 = 5/256, frozen from the pre-build enumeration
        rec = wigner_corr_bound(2, 0.5, 1, 4, RAD)
        assert abs(rec["kappa_sq_sum"] - 5.0 / 256.0) < 1e-15

    def test_envelope_geometric_sum(self):
        rec = wigner_corr_bound(2, 0.5, 2, 100, RAD)
        assert abs(rec["envelope_sq"] - (2 / 100) * (0.5 + 0.25)) < 1e-15

    def test_envelope_limit_below_one(self):
        # for lam < 1 the large-D envelope approaches sqrt((m/n) lam/(1-lam))
        rec = wigner_corr_bound(400, 0.8, 1, 1000, RAD)
        assert abs(rec["envelope_sq"] - (1 / 1000) * 0.8 / 0.2) < 1e-12

    def test_rank_scaling(self):
        one = wigner_corr_bound(2, 0.5, 1, 4, RAD)
        three = wigner_corr_bound(2, 0.5, 3, 4, RAD)
        assert abs(three["kappa_sq_sum"] - 9 * one["kappa_sq_sum"]) < 1e-15
