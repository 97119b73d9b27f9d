"""Certificate construction, verification, soundness against the oracle, and
the explicit analytic bound expressions."""

import itertools

import pytest

import lowdeg.basis as ob
from lowdeg.basis import BasisIndex
from lowdeg.certificate import (Certificate, ResidualError, analytic_bounds,
                                build_certificate, certificate_norm_identity_submatrix,
                                check_removal_relation, corr_bound,
                                crucial_identity_gap, u_pds, u_submatrix,
                                verify_certificate)
from lowdeg.graphs import EMPTY, GraphClassSpec, MultiGraph, enumerate_class
from lowdeg.models import (PdsParams, PriorSpec, SbmParams, SubmatrixParams,
                           WignerParams)
from lowdeg.oracle import build_gram, exact_corr

SBM = SbmParams(n=5, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0)))


class TestUValues:
    def test_empty_index(self):
        assert u_submatrix(BasisIndex(EMPTY, ()), 1.0, 0.5) == 0.5  # c_empty = rho

    def test_closed_form_example(self):
        # alpha = (1,2), gamma = {1,2}, lam = 1, rho = 0.5: prefactor
        # (rho/(1-rho)) = 1 so u equals c_alpha = lam rho^2 = 0.25
        idx = BasisIndex(MultiGraph([(1, 2)]), (1, 2))
        assert abs(u_submatrix(idx, 1.0, 0.5) - 0.25) < 1e-15

    def test_sign_alternates_in_gamma(self):
        alpha = MultiGraph([(1, 2)])
        u1 = u_submatrix(BasisIndex(alpha, (1,)), 1.0, 0.25)
        u2 = u_submatrix(BasisIndex(alpha, (1, 2)), 1.0, 0.25)
        assert u1 < 0 < u2

    def test_non_good_indices_vanish(self):
        assert u_submatrix(BasisIndex(MultiGraph([(3, 4)]), ()), 1.0, 0.5) == 0.0
        # gamma outside V(alpha) u {1}
        assert u_submatrix(BasisIndex(MultiGraph([(1, 2)]), (3,)), 1.0, 0.5) == 0.0

    def test_pds_empty_and_degenerate(self):
        p = PdsParams(n=4, rho=0.3, p0=0.25, p1=0.8)
        assert abs(u_pds(BasisIndex(EMPTY, ()), p) - 0.3) < 1e-15
        flat = PdsParams(n=4, rho=0.3, p0=0.4, p1=0.4)
        assert u_pds(BasisIndex(MultiGraph([(1, 2)]), ()), flat) == 0.0

    def test_pds_substitution_identity(self):
        p = PdsParams(n=5, rho=0.3, p0=0.2, p1=0.7)
        goods = enumerate_class(GraphClassSpec(
            "connected-rooted-at-1", n=5, max_edges=3,
            parallel_edges=False, self_loops=False))
        for idx in ob.rooted_good_indices(goods):
            assert abs(u_pds(idx, p) - u_submatrix(idx, p.lam, p.rho)) < 1e-12


class TestCertificates:
    def test_submatrix_residual_and_soundness(self):
        params = SubmatrixParams(n=4, lam=0.3, rho=0.2)
        cert = build_certificate(params, 2)
        assert cert.residual <= 1e-10
        oc = exact_corr(build_gram(params, 2))
        assert corr_bound(cert, cert.ex2) >= oc.corr - 1e-9

    def test_norm_identity(self):
        cert = build_certificate(SubmatrixParams(n=4, lam=0.6, rho=0.35), 2)
        lhs, rhs = certificate_norm_identity_submatrix(cert)
        assert abs(lhs - rhs) < 1e-12

    def test_bound_monotone_in_degree(self):
        params = SubmatrixParams(n=4, lam=0.5, rho=0.3)
        bounds = [build_certificate(params, D).bound for D in (1, 2, 3)]
        assert bounds[0] <= bounds[1] <= bounds[2]

    def test_pds_crucial_identity(self):
        params = PdsParams(n=4, rho=0.3, p0=0.25, p1=0.8)
        goods = enumerate_class(GraphClassSpec(
            "connected-rooted-at-1", n=4, max_edges=2,
            parallel_edges=False, self_loops=False))
        for alpha in goods:
            if alpha.edge_count == 0:
                continue
            for beta in goods:
                if alpha.contains(beta):
                    assert crucial_identity_gap(params, beta, alpha) < 1e-13

    def test_sbm_certificate(self):
        cert = build_certificate(SBM, 2, pair=(0, 0))
        assert cert.residual <= 1e-10
        oc = exact_corr(build_gram(SBM, 2, pair=(0, 0)))
        assert corr_bound(cert, cert.ex2) >= oc.corr - 1e-9
        # d for the lone edge equals its coefficient
        edge = MultiGraph([(1, 2)])
        assert abs(cert.d_alpha[edge] - ob.c_sbm(edge, 0, 0, SBM)) < 1e-15

    def test_sbm_three_communities(self):
        p3 = SbmParams(n=4, q=3, pi=(1 / 3, 1 / 3, 1 / 3),
                       Q=((4.0, 1.0, 1.0), (1.0, 4.0, 1.0), (1.0, 1.0, 4.0)))
        for pair in ((0, 0), (0, 2)):
            cert = build_certificate(p3, 2, pair=pair)
            oc = exact_corr(build_gram(p3, 2, pair=pair))
            assert cert.residual <= 1e-9
            assert corr_bound(cert, cert.ex2) >= oc.corr - 1e-9

    def test_sbm_unequal_blocks(self):
        # pi = (1/2, 1/4, 1/4) with Q pi = d 1 (mean degree 2 for every label)
        p3 = SbmParams(n=4, q=3, pi=(0.5, 0.25, 0.25),
                       Q=((2.0, 2.0, 2.0), (2.0, 3.0, 1.0), (2.0, 1.0, 3.0)))
        cert = build_certificate(p3, 2, pair=(1, 2))
        oc = exact_corr(build_gram(p3, 2, pair=(1, 2)))
        assert cert.residual <= 1e-9
        assert corr_bound(cert, cert.ex2) >= oc.corr - 1e-9

    def test_sbm_zero_signal(self):
        flat = SbmParams(n=5, q=2, pi=(0.5, 0.5), Q=((2.0, 2.0), (2.0, 2.0)))
        cert = build_certificate(flat, 2, pair=(0, 0))
        assert cert.bound == 0.0
        assert cert.residual <= 1e-15

    def test_wigner_rejected(self):
        with pytest.raises(ValueError):
            build_certificate(WignerParams(n=4, m=1, lam=1.0,
                                           prior=PriorSpec.rademacher()), 2)

    def test_corr_bound_refuses_large_residual(self):
        cert = build_certificate(SubmatrixParams(n=3, lam=0.4, rho=0.25), 2)
        broken = Certificate(cert.model, cert.degree, cert.n, cert.u, 1e-3,
                             cert.bound, cert.ex2, cert.params, good=cert.good)
        with pytest.raises(ResidualError):
            corr_bound(broken, cert.ex2)


class TestVerifyCertificate:
    def _assemble(self, params, D):
        cert = build_certificate(params, D)
        lam, rho = params.lam, params.rho
        m_entries = {}
        c_entries = {}
        for alpha in cert.good:
            c_entries[alpha] = ob.c_submatrix(alpha, lam, rho)
            for idx in cert.u:
                val = ob.M_submatrix(idx, alpha, lam, rho)
                if val:
                    m_entries[(idx, alpha)] = val
        return cert, m_entries, c_entries

    def test_report(self):
        params = SubmatrixParams(n=4, lam=0.5, rho=0.3)
        cert, M, c = self._assemble(params, 2)
        bad = [MultiGraph([(3, 4)]), MultiGraph([(1, 2), (3, 4)])]
        report = verify_certificate(cert, M, c, cert.good, bad_alphas=bad)
        assert report.max_residual <= 1e-12
        assert report.max_bad_error <= 1e-12
        assert len(report.bad_checks) == 2

    def test_zero_u_with_nonzero_c_rejected(self):
        params = SubmatrixParams(n=4, lam=0.5, rho=0.3)
        cert, M, c = self._assemble(params, 2)
        zeroed = Certificate(cert.model, cert.degree, cert.n,
                             {k: 0.0 for k in cert.u}, cert.residual, 0.0,
                             cert.ex2, cert.params, good=cert.good)
        report = verify_certificate(zeroed, M, c, cert.good)
        assert report.max_residual > 1e-3

    def test_bad_alpha_leaf_case_sbm(self):
        cert = build_certificate(SBM, 2, pair=(0, 0))
        rec = check_removal_relation(cert, MultiGraph([(1, 2), (2, 3)]))
        assert rec["mu"] == 0.0
        assert rec["max_error"] <= 1e-12

    def test_bad_alpha_disconnected_case_sbm(self):
        cert = build_certificate(SBM, 4, pair=(0, 0))
        alpha = MultiGraph([(1, 2), (3, 4), (4, 5), (3, 5)])
        rec = check_removal_relation(cert, alpha)
        assert rec["alpha_hat"] == MultiGraph([(1, 2)])
        assert abs(rec["mu"] - ob.expectation_phi_sbm(
            MultiGraph([(3, 4), (4, 5), (3, 5)]), SBM)) < 1e-15
        assert rec["max_error"] <= 1e-12

    def test_good_alpha_rejected(self):
        cert = build_certificate(SubmatrixParams(n=4, lam=0.5, rho=0.3), 2)
        with pytest.raises(ValueError):
            check_removal_relation(cert, MultiGraph([(1, 2)]))


class TestSbmGrowthBounds:
    def test_d_alpha_bound_up_to_five_edges(self):
        # |d_alpha| <= (d lam / n)^{|a|} f(a) (q/pi_min)^{2(|a|-|V|+2)} on every
        # enumerated good alpha with |alpha| <= 5
        from lowdeg.cumulants import f_value
        from lowdeg.thresholds import sbm_spectral_from_params
        params = SbmParams(n=6, q=2, pi=(0.5, 0.5), Q=((3.0, 1.0), (1.0, 3.0)))
        cert = build_certificate(params, 5, pair=(0, 0))
        spec = sbm_spectral_from_params(params)
        ratio = spec.d * spec.lam / params.n
        base = params.q / min(params.pi)
        assert cert.residual <= 1e-9
        for alpha in cert.good:
            if alpha.edge_count == 0:
                continue
            da, va = alpha.edge_count, alpha.vertex_count
            bound = ratio ** da * f_value(alpha) * base ** (2 * (da - va + 2))
            assert abs(cert.d_alpha[alpha]) <= bound + 1e-15

    def test_diag_m_nonnegative_and_lower_bound(self):
        from lowdeg.thresholds import sbm_spectral_from_params
        params = SBM
        spec = sbm_spectral_from_params(params)
        qmin = min(min(row) for row in params.Q)
        qmax = max(max(row) for row in params.Q)
        goods = enumerate_class(GraphClassSpec("good-SBM", n=5, max_edges=3))
        for alpha in goods:
            if alpha.edge_count == 0:
                continue
            msq = 0.0
            for gamma in itertools.product(range(2), repeat=alpha.vertex_count):
                val = ob.M_sbm_diag(alpha, gamma, params)
                assert val >= 0.0
                msq += val * val
            lower = (spec.d / params.n) ** alpha.edge_count \
                * (1 - qmax / params.n) ** alpha.edge_count \
                * (qmin / spec.d) ** (alpha.edge_count - alpha.vertex_count
                                      + alpha.component_count)
            assert msq >= lower - 1e-15


class TestAnalyticBounds:
    def test_submatrix_b_one(self):
        rec = analytic_bounds(SubmatrixParams(n=1000, lam=0.02, rho=0.05), D=6)
        assert rec["b_v"][0] == 1.0
        assert rec["constant_C_symbolic"] is True

    def test_wigner_envelope(self):
        prior = PriorSpec.rademacher()
        rec = analytic_bounds(WignerParams(n=10 ** 4, m=1, lam=0.5, prior=prior), D=10)
        want = 1e-4 * sum(0.5 ** d for d in range(1, 11))
        assert abs(rec["envelope_sq"] - want) < 1e-18
        assert rec["below_bbp"] is True

    def test_sbm_sum_linear_at_ks(self):
        rec = analytic_bounds(SbmParams(n=1000, q=2, pi=(0.5, 0.5),
                                        Q=((6.0, 2.0), (2.0, 6.0))), D=20)
        assert abs(rec["ks"] - 1.0) < 1e-12
        assert abs(rec["sum_ks"] - 20.0) < 1e-9

    def test_sbm_sum_geometric_above_ks(self):
        rec = analytic_bounds(SbmParams(n=1000, q=2, pi=(0.5, 0.5),
                                        Q=((9.0, 3.0), (3.0, 9.0))), D=20)
        assert abs(rec["ks"] - 1.5) < 1e-12
        assert rec["sum_ks"] >= 1.5 ** 20 / 3.0

    def test_flags_only_never_constants(self):
        rec = analytic_bounds(SubmatrixParams(n=100, lam=0.5, rho=0.3), D=3)
        assert "constant_C" in rec and rec["constant_C_symbolic"]
