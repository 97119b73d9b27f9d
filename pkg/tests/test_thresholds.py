"""Threshold calculators and SBM spectral quantities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowdeg.thresholds import (amp_threshold, amp_threshold_lower, b_power_inf_norm,
                               bbp_gap, pds_lambda, sbm_spectral, threshold_flags)


def degree_regular_instance(rng, q):
    """Random (pi, Q) with positive entries satisfying the equal-mean-degree
    condition: Q = d (J + D^-1/2 S D^-1/2) with S symmetric and S sqrt(pi) = 0."""
    pi = rng.uniform(0.5, 1.5, size=q)
    pi = pi / pi.sum()
    sqrt_pi = np.sqrt(pi)
    s = rng.uniform(-1.0, 1.0, size=(q, q))
    s = 0.5 * (s + s.T)
    proj = np.eye(q) - np.outer(sqrt_pi, sqrt_pi)
    s = proj @ s @ proj
    s *= 0.3 / max(1.0, np.abs(s).max())
    d = 3.0
    q_mat = d * (np.ones((q, q)) + s / np.outer(sqrt_pi, sqrt_pi))
    if q_mat.min() <= 0:
        return degree_regular_instance(rng, q)
    return pi, q_mat


class TestSbmSpectral:
    def test_symmetric_two_block(self):
        spec = sbm_spectral((0.5, 0.5), ((3.0, 1.0), (1.0, 3.0)))
        assert abs(spec.d - 2.0) < 1e-15
        assert abs(spec.lam - 0.5) < 1e-12
        assert abs(spec.ks - 0.5) < 1e-12
        assert spec.degree_condition_residual == 0.0
        assert spec.eigs_T == (1.0, 0.5)

    def test_above_ks(self):
        spec = sbm_spectral((0.5, 0.5), ((5.0, 1.0), (1.0, 5.0)))
        assert abs(spec.d - 3.0) < 1e-15
        assert abs(spec.lam - 2.0 / 3.0) < 1e-12
        assert abs(spec.ks - 4.0 / 3.0) < 1e-12

    def test_constant_q_rank_one(self):
        spec = sbm_spectral((0.5, 0.5), ((2.0, 2.0), (2.0, 2.0)))
        assert spec.lam < 1e-12
        assert spec.ks < 1e-12

    def test_three_block_multiplicity(self):
        pi = (1 / 3, 1 / 3, 1 / 3)
        q_mat = ((4.0, 1.0, 1.0), (1.0, 4.0, 1.0), (1.0, 1.0, 4.0))
        spec = sbm_spectral(pi, q_mat)
        assert abs(spec.eigs_T[1] - 0.5) < 1e-12
        assert abs(spec.eigs_T[2] - 0.5) < 1e-12
        assert spec.multiplicity == 2

    def test_b_eigs_match_t_eigs(self):
        rng = np.random.default_rng(3)
        for q in (2, 3, 4):
            pi, q_mat = degree_regular_instance(rng, q)
            spec = sbm_spectral(pi, q_mat)
            t_eigs = sorted(np.real(np.linalg.eigvals(spec.T)), key=abs, reverse=True)
            assert all(abs(a - b) < 1e-8 for a, b in zip(spec.eigs_T, t_eigs))

    def test_b_power_norm_bound(self):
        rng = np.random.default_rng(4)
        for q in (2, 3):
            pi, q_mat = degree_regular_instance(rng, q)
            spec = sbm_spectral(pi, q_mat)
            for t in range(1, 11):
                assert b_power_inf_norm(spec, t) <= spec.lam ** t + 1e-9


class TestScalarThresholds:
    def test_amp_value(self):
        assert abs(amp_threshold(0.01, 10 ** 4) - 0.6065306597126334) < 1e-12
        assert amp_threshold_lower(0.5, 100) == amp_threshold(0.5, 100) * math.sqrt(0.5)

    def test_amp_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            amp_threshold(0.0, 100)

    def test_pds_lambda(self):
        assert pds_lambda(0.3, 0.3) == 0.0
        assert abs(pds_lambda(0.25, 0.75) - 0.5 / math.sqrt(0.1875)) < 1e-15

    def test_bbp(self):
        assert bbp_gap(1.0) == 0.0
        assert bbp_gap(1.5) == 0.5

    def test_flags(self):
        f = threshold_flags("wigner", lam=0.8)
        assert f["below_bbp"] is True
        f = threshold_flags("sbm", pi=(0.5, 0.5), Q=((5.0, 1.0), (1.0, 5.0)))
        assert f["below_ks"] is False


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_spectral_invariants_random(seed, q):
    rng = np.random.default_rng(seed)
    pi, q_mat = degree_regular_instance(rng, q)
    spec = sbm_spectral(pi, q_mat)
    assert spec.degree_condition_residual < 1e-10
    assert abs(spec.eigs_T[0] - 1.0) < 1e-10
    assert len(spec.eigs_T) == q
    assert spec.lam <= 1.0 + 1e-9
    for t in (1, 5, 10):
        assert b_power_inf_norm(spec, t) <= spec.lam ** t + 1e-9
