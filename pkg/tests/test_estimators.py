"""Tree and SAW estimator tests: exact evaluation, first moments, pair
moments against brute force, and Monte Carlo agreement."""

import itertools
import math

import numpy as np
import pytest

from lowdeg.estimators import (EstimatorSpec, evaluate, exact_second_moment_tree,
                               first_moment, mc_correlation, path_moment_exact,
                               path_moment_formula, path_moment_mc,
                               saw_pair_moment, tree_monomials, tree_pair_bound,
                               tree_pair_moment)
from lowdeg.graphs import GraphClassSpec, MultiGraph, enumerate_class
from lowdeg.guards import GuardError
from lowdeg.models import (PdsParams, PriorSpec, SbmParams, SubmatrixParams,
                           WignerParams, sample)

RAD = PriorSpec.rademacher()
TP3 = PriorSpec.three_point(math.sqrt(3.0))


class TestSpecValidation:
    def test_kind_and_order(self):
        with pytest.raises(ValueError):
            EstimatorSpec("saw-wigner", 1, WignerParams(n=10, m=1, lam=1.0, prior=RAD))
        with pytest.raises(ValueError):
            EstimatorSpec("tree-submatrix", -1, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        with pytest.raises(ValueError):
            EstimatorSpec("tree-submatrix", 0, PdsParams(n=6, rho=0.3, p0=0.2, p1=0.5))

    def test_degree(self):
        spec = EstimatorSpec("tree-submatrix", 1, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        assert spec.degree == 4
        sw = EstimatorSpec("saw-wigner", 3, WignerParams(n=10, m=1, lam=1.0, prior=RAD))
        assert sw.degree == 3


class TestEvaluate:
    def test_tree_hand_expansion(self):
        p = SubmatrixParams(n=4, lam=1.0, rho=0.4)
        spec = EstimatorSpec("tree-submatrix", 0, p)
        y = np.arange(16, dtype=float).reshape(4, 4)
        y = 0.5 * (y + y.T)
        want = sum(y[0, a] * y[0, b] for a in range(1, 4) for b in range(a + 1, 4))
        assert abs(evaluate(spec, y) - want) < 1e-12

    def test_saw_zero_matrix(self):
        spec = EstimatorSpec("saw-wigner", 3, WignerParams(n=10, m=1, lam=1.0, prior=RAD))
        assert evaluate(spec, np.zeros((10, 10))) == 0.0

    def test_saw_sbm_empty_graph(self):
        params = SbmParams(n=10, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0)))
        spec = EstimatorSpec("saw-sbm", 2, params)
        assert abs(evaluate(spec, np.zeros((10, 10))) - (-0.2) ** 2) < 1e-15

    def test_saw_matches_direct_enumeration(self):
        params = WignerParams(n=7, m=1, lam=1.0, prior=RAD)
        spec = EstimatorSpec("saw-wigner", 3, params)
        smp = sample(params, 33)
        paths = enumerate_class(GraphClassSpec("saw-SD", n=7, D=3))
        want = sum(math.prod(smp.y[i - 1, j - 1] for (i, j), _ in p.edges)
                   for p in paths) / len(paths)
        assert abs(evaluate(spec, smp.y) - want) < 1e-12

    def test_guards(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=12, lam=1.0, rho=0.3))
        evaluate(spec, np.zeros((12, 12)))
        with pytest.raises(GuardError):
            evaluate(EstimatorSpec("tree-submatrix", 0,
                                   SubmatrixParams(n=13, lam=1.0, rho=0.3)),
                     np.zeros((13, 13)))

    def test_shape_check(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        with pytest.raises(ValueError):
            evaluate(spec, np.zeros((5, 5)))


class TestFirstMoment:
    def test_tree_counts_from_enumeration(self):
        p = SubmatrixParams(n=8, lam=1.0, rho=0.4)
        spec = EstimatorSpec("tree-submatrix", 0, p)
        count = len(tree_monomials(8, 0))
        assert count == math.comb(7, 2)
        assert abs(first_moment(spec) - count * 1.0 ** 2 * 0.4 ** 3) < 1e-15

    def test_zero_signal(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=6, lam=0.0, rho=0.3))
        assert first_moment(spec) == 0.0

    def test_wigner_formula(self):
        spec = EstimatorSpec("saw-wigner", 3,
                             WignerParams(n=100, m=1, lam=1.0, prior=RAD))
        assert abs(first_moment(spec) - 1e-4) < 1e-19

    def test_sbm_eigenvalue_formula(self):
        params = SbmParams(n=100, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0)))
        spec = EstimatorSpec("saw-sbm", 2, params)
        # d = 2, lambda_2 = 1/2: (d^3/n^2) lambda_2^3 = 1e-4
        assert abs(first_moment(spec) - 1e-4) < 1e-18

    def test_pds_matches_submatrix_substitution(self):
        pds = PdsParams(n=7, rho=0.3, p0=0.2, p1=0.7)
        sub = SubmatrixParams(n=7, lam=pds.lam, rho=0.3)
        a = first_moment(EstimatorSpec("tree-pds", 0, pds))
        b = first_moment(EstimatorSpec("tree-submatrix", 0, sub))
        assert abs(a - b) < 1e-12


class TestTreePairMoments:
    def test_zero_signal_collapses_to_count(self):
        p = SubmatrixParams(n=6, lam=0.0, rho=0.3)
        res = exact_second_moment_tree(p, 0)
        assert abs(res.value - len(tree_monomials(6, 0))) < 1e-12

    def test_frozen_brute_force_value(self):
        # n=6, k=0, lam=0.5, rho=0.3: frozen from the pre-build brute force
        # over all theta in {0,1}^6
        p = SubmatrixParams(n=6, lam=0.5, rho=0.3)
        res = exact_second_moment_tree(p, 0)
        assert abs(res.value - 10.90680625) < 1e-9

    def test_pair_moment_vs_full_theta_enumeration(self):
        p = SubmatrixParams(n=5, lam=0.7, rho=0.35)
        trees = tree_monomials(5, 0)
        for a, b in itertools.product(trees[:4], trees[:4]):
            want = 0.0
            for bits in itertools.product((0, 1), repeat=5):
                w = math.prod(p.rho if x else 1 - p.rho for x in bits)
                th = dict(zip(range(1, 6), bits))
                term = w
                core = a.meet(b)
                for (i, j), _ in core.edges:
                    term *= p.lam ** 2 * th[i] * th[j] + 1.0
                for (i, j) in set(a.support) ^ set(b.support):
                    term *= p.lam * th[i] * th[j]
                want += term
            assert abs(tree_pair_moment(a, b, p) - want) < 1e-12

    def test_bounds_hold(self):
        for params in (SubmatrixParams(n=6, lam=0.9, rho=0.4),
                       PdsParams(n=6, rho=0.35, p0=0.2, p1=0.8)):
            res = exact_second_moment_tree(params, 0)
            assert res.max_bound_excess <= 1e-12

    def test_diagonal_bound_formula(self):
        p = SubmatrixParams(n=6, lam=0.9, rho=0.4)
        alpha = tree_monomials(6, 0)[0]
        assert abs(tree_pair_bound(alpha, alpha, p)
                   - (0.81 * 0.4 + 1.0) ** 2) < 1e-12

    def test_guards(self):
        with pytest.raises(GuardError):
            exact_second_moment_tree(SubmatrixParams(n=10, lam=0.5, rho=0.3), 0)
        with pytest.raises(GuardError):
            exact_second_moment_tree(SubmatrixParams(n=6, lam=0.5, rho=0.3), 2)


class TestSawPairMoments:
    def test_identical_paths_rademacher(self):
        params = WignerParams(n=7, m=1, lam=2.0, prior=RAD)
        paths = enumerate_class(GraphClassSpec("saw-SD", n=7, D=3))
        got = saw_pair_moment(paths[0], paths[0], params)
        assert abs(got - (1 + 2.0 / 7) ** 3) < 1e-12

    def test_disjoint_interiors(self):
        params = WignerParams(n=8, m=1, lam=1.5, prior=RAD)
        a = MultiGraph([(1, 3), (3, 4), (4, 2)])
        b = MultiGraph([(1, 5), (5, 6), (6, 2)])
        val = saw_pair_moment(a, b, params)
        assert val >= 0.0

    def test_rank_two(self):
        params = WignerParams(n=6, m=2, lam=1.0, prior=RAD)
        paths = enumerate_class(GraphClassSpec("saw-SD", n=6, D=2))
        for a in paths:
            for b in paths:
                saw_pair_moment(a, b, params)  # envelope asserted internally

    def test_rejects_non_paths(self):
        params = WignerParams(n=6, m=1, lam=1.0, prior=RAD)
        with pytest.raises(ValueError):
            saw_pair_moment(MultiGraph([(1, 2)]), MultiGraph([(1, 3), (3, 2)]), params)
        with pytest.raises(ValueError):
            saw_pair_moment(MultiGraph([(1, 3), (3, 4)]),
                            MultiGraph([(1, 3), (3, 4)]), params)


class TestPathMoments:
    @pytest.mark.parametrize("length", [1, 2, 3])
    @pytest.mark.parametrize("m", [1, 2, 4])
    def test_formula_exact_rademacher(self, length, m):
        assert abs(path_moment_exact(length, RAD, m)
                   - path_moment_formula(length, RAD, m)) < 1e-12 * m ** length

    def test_formula_exact_three_point(self):
        for length in (1, 2, 3):
            want = path_moment_formula(length, TP3, 1)
            assert abs(path_moment_exact(length, TP3, 1) - want) < 1e-12 * max(1, want)

    def test_rademacher_rank_one_is_m_power(self):
        # K = 1: the interaction factor disappears
        assert path_moment_formula(3, RAD, 2) == 8.0

    def test_mc_agrees(self):
        mc, se = path_moment_mc(2, TP3, 2, 20_000, 99)
        want = path_moment_formula(2, TP3, 2)
        assert abs(mc - want) <= 4 * se


class TestMonteCarlo:
    def test_requires_two_trials(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        with pytest.raises(ValueError):
            mc_correlation(spec, 1, 0)

    def test_deterministic(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        a = mc_correlation(spec, 100, 7)
        b = mc_correlation(spec, 100, 7)
        assert a.efx == b.efx and a.corr == b.corr

    def test_zero_signal_centered(self):
        spec = EstimatorSpec("saw-wigner", 2,
                             WignerParams(n=30, m=1, lam=0.0, prior=RAD))
        res = mc_correlation(spec, 4000, 13)
        assert abs(res.efx) <= 4 * res.efx_se

    def test_first_moment_within_se(self):
        params = WignerParams(n=40, m=1, lam=3.0, prior=RAD)
        spec = EstimatorSpec("saw-wigner", 2, params)
        res = mc_correlation(spec, 4000, 17)
        assert abs(res.efx - first_moment(spec)) <= 4 * res.efx_se

    def test_ef2_matches_exact_tree(self):
        params = SubmatrixParams(n=6, lam=0.5, rho=0.3)
        spec = EstimatorSpec("tree-submatrix", 0, params)
        res = mc_correlation(spec, 4000, 19)
        exact = exact_second_moment_tree(params, 0)
        assert abs(res.ef2 - exact.value) <= 4 * res.ef2_se

    def test_tree_pds_first_and_second_moment(self):
        params = PdsParams(n=6, rho=0.4, p0=0.25, p1=0.85)
        spec = EstimatorSpec("tree-pds", 0, params)
        res = mc_correlation(spec, 4000, 23)
        assert abs(res.efx - first_moment(spec)) <= 4 * res.efx_se
        exact = exact_second_moment_tree(params, 0)
        assert abs(res.ef2 - exact.value) <= 4 * res.ef2_se

    def test_saw_sbm_first_moment(self):
        params = SbmParams(n=40, q=2, pi=(0.5, 0.5), Q=((4.0, 1.0), (1.0, 4.0)))
        spec = EstimatorSpec("saw-sbm", 2, params)
        res = mc_correlation(spec, 4000, 29)
        assert abs(res.efx - first_moment(spec)) <= 4 * res.efx_se

    def test_stream_base_blocks_are_disjoint(self):
        spec = EstimatorSpec("tree-submatrix", 0, SubmatrixParams(n=6, lam=1.0, rho=0.3))
        a = mc_correlation(spec, 50, 7, stream_base=0)
        b = mc_correlation(spec, 50, 7, stream_base=1 << 32)
        assert a.efx != b.efx
