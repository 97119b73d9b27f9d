"""Exact Corr/MMSE oracle tests: closed-form anchors, basis invariance,
Monte Carlo Gram agreement, and the correlation-MMSE identity."""

import math

import numpy as np
import pytest

from lowdeg.guards import GuardError
from lowdeg.models import (PdsParams, PriorSpec, SbmParams, SubmatrixParams,
                           WignerParams, estimand, sample)
from lowdeg.oracle import (build_gram, build_gram_monomial, exact_corr,
                           minimized_mse)

RAD = PriorSpec.rademacher()


class TestAnchors:
    def test_degree_zero_submatrix(self):
        gs = build_gram(SubmatrixParams(n=3, lam=1.0, rho=0.5), 0)
        res = exact_corr(gs)
        assert abs(res.corr - math.sqrt(0.5)) < 1e-12
        assert abs(res.mmse - 0.25) < 1e-12

    def test_zero_signal_matches_degree_zero(self):
        gs = build_gram(SubmatrixParams(n=3, lam=0.0, rho=0.3), 2)
        assert abs(exact_corr(gs).corr - math.sqrt(0.3)) < 1e-10

    def test_frozen_least_squares_fixture(self):
        # n=3, D=1, lam=1, rho=0.5: value frozen from the pre-build dense
        # least-squares oracle over the monomial basis
        gs = build_gram(SubmatrixParams(n=3, lam=1.0, rho=0.5), 1)
        res = exact_corr(gs)
        assert abs(res.corr - 0.7956802944259791) < 1e-12
        assert abs(res.mmse - 0.1834464345310936) < 1e-12

    def test_sbm_degree_one_matches_label_enumeration(self):
        params = SbmParams(n=3, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0)))
        gs = build_gram(params, 1)
        # Gram entries are Bernoulli moments; check a couple directly
        basis = gs.indices
        for a, alpha in enumerate(basis):
            for b, beta in enumerate(basis):
                union = {p for p, _ in alpha.edges} | {p for p, _ in beta.edges}
                want = 0.0
                import itertools
                for sig in itertools.product(range(2), repeat=3):
                    w = math.prod(params.pi[s] for s in sig)
                    w *= math.prod(params.Q[sig[i - 1]][sig[j - 1]] / 3.0
                                   for (i, j) in union)
                    want += w
                assert abs(gs.G[a, b] - want) < 1e-12


class TestStructure:
    def test_monotone_in_degree(self):
        p = SubmatrixParams(n=3, lam=1.0, rho=0.5)
        corrs = [exact_corr(build_gram(p, D)).corr for D in range(3)]
        assert corrs[0] <= corrs[1] + 1e-12
        assert corrs[1] <= corrs[2] + 1e-12

    def test_basis_invariance_gaussian(self):
        p = SubmatrixParams(n=3, lam=1.0, rho=0.5)
        for D in range(3):
            a = exact_corr(build_gram(p, D)).corr
            b = exact_corr(build_gram_monomial(p, D)).corr
            assert abs(a - b) < 1e-10
        wp = WignerParams(n=3, m=1, lam=1.2, prior=RAD)
        a = exact_corr(build_gram(wp, 2)).corr
        b = exact_corr(build_gram_monomial(wp, 2)).corr
        assert abs(a - b) < 1e-10

    def test_correlation_mmse_identity(self):
        for params, pair in [
            (SubmatrixParams(n=4, lam=0.8, rho=0.25), None),
            (PdsParams(n=4, rho=0.3, p0=0.2, p1=0.7), None),
            (WignerParams(n=4, m=2, lam=1.5, prior=RAD), None),
            (SbmParams(n=4, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0))), (0, 1)),
        ]:
            gs = build_gram(params, 2, pair=pair)
            res = exact_corr(gs)
            assert abs(res.mmse - minimized_mse(gs)) < 1e-12

    def test_corr_clamped(self):
        gs = build_gram(SubmatrixParams(n=3, lam=2.0, rho=0.9), 2)
        res = exact_corr(gs)
        assert 0.0 <= res.corr <= 1.0

    def test_guards(self):
        with pytest.raises(GuardError):
            build_gram(SubmatrixParams(n=7, lam=1.0, rho=0.5), 1)
        with pytest.raises(GuardError):
            build_gram(SubmatrixParams(n=3, lam=1.0, rho=0.5), 4)

    def test_ex2_zero_rejected(self):
        gs = build_gram(WignerParams(n=3, m=1, lam=0.0, prior=RAD), 1)
        with pytest.raises(ValueError):
            exact_corr(gs)


class TestGramVsMonteCarlo:
    def test_submatrix_gram_mc(self):
        params = SubmatrixParams(n=3, lam=0.9, rho=0.4)
        gs = build_gram(params, 2)
        from lowdeg.basis import hermite_monomial
        picks = [1, 3, 7, len(gs.indices) - 1]
        trials = 30_000
        acc = np.zeros((len(picks), len(picks)))
        acc2 = np.zeros_like(acc)
        for t in range(trials):
            smp = sample(params, 5150, stream=t)
            vals = np.array([hermite_monomial(gs.indices[i], smp.y) for i in picks])
            outer = np.outer(vals, vals)
            acc += outer
            acc2 += outer ** 2
        mean = acc / trials
        se = np.sqrt(np.maximum(acc2 / trials - mean ** 2, 1e-12) / trials)
        want = gs.G[np.ix_(picks, picks)]
        z = np.abs(mean - want) / np.maximum(se, 1e-9)
        assert z.max() < 5.0

    def test_c_vector_mc_wigner(self):
        params = WignerParams(n=3, m=1, lam=1.0, prior=RAD)
        gs = build_gram(params, 2)
        from lowdeg.basis import hermite_monomial
        picks = [2, 5, 9]
        trials = 30_000
        acc = np.zeros(len(picks))
        acc2 = np.zeros(len(picks))
        for t in range(trials):
            smp = sample(params, 6160, stream=t)
            x = estimand(params, smp)
            vals = np.array([hermite_monomial(gs.indices[i], smp.y) for i in picks]) * x
            acc += vals
            acc2 += vals ** 2
        mean = acc / trials
        se = np.sqrt(np.maximum(acc2 / trials - mean ** 2, 1e-12) / trials)
        z = np.abs(mean - gs.c[picks]) / np.maximum(se, 1e-9)
        assert z.max() < 5.0

    def test_rank_deficiency_handled(self):
        # monomials on 0/1 data are linearly dependent; rank < basis size
        params = PdsParams(n=4, rho=0.4, p0=0.3, p1=0.8)
        gs = build_gram(params, 3)
        res = exact_corr(gs)
        assert res.gram_rank <= res.basis_size
        assert math.isfinite(res.corr)
