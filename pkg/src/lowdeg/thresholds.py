"""Sharp-threshold formulas and SBM spectral quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import SbmParams

EIG_TOL = 1e-10


@dataclass
class SbmSpectral:
    d: float
    T: np.ndarray
    B: np.ndarray
    eigs_T: tuple[float, ...]  # sorted by magnitude, descending; eigs_T[0] = 1
    lam: float                 # |lambda_2(T)|
    ks: float                  # d * lam^2
    degree_condition_residual: float
    multiplicity: int          # eigenvalues of B matching |lambda_2| up to sign


def sbm_spectral(pi, Q) -> SbmSpectral:
    """Average degree, stochastic matrix T, symmetric B, and the KS parameter.

    Eigenvalues come from the symmetric matrix B; T's spectrum is recovered as
    {1} plus the eigenvalues of B.
    """
    pi = np.asarray(pi, dtype=float)
    q_mat = np.asarray(Q, dtype=float)
    d = float(pi @ q_mat @ pi)
    t_mat = np.diag(pi) @ q_mat / d
    sqrt_pi = np.sqrt(pi)
    b_mat = np.diag(sqrt_pi) @ q_mat @ np.diag(sqrt_pi) / d - np.outer(sqrt_pi, sqrt_pi)
    b_mat = 0.5 * (b_mat + b_mat.T)
    w, vecs = np.linalg.eigh(b_mat)
    # B kills the sqrt(pi) direction (the Perron pair of T); drop that one
    # eigenvalue so the remaining ones are lambda_2(T), ..., lambda_q(T)
    overlap = np.abs(vecs.T @ sqrt_pi)
    near_zero = np.abs(w) <= EIG_TOL * max(1.0, float(np.max(np.abs(w))))
    if near_zero.any():
        cand = np.where(near_zero)[0]
        drop = cand[int(np.argmax(overlap[cand]))]
    else:
        drop = int(np.argmin(np.abs(w)))  # degree condition violated; best effort
    rest = [float(w[i]) for i in range(len(w)) if i != drop]
    eigs = tuple([1.0] + sorted(rest, key=abs, reverse=True))
    lam = abs(eigs[1]) if len(eigs) > 1 else 0.0
    mult = int(sum(1 for e in rest if abs(abs(e) - lam) <= 1e-9)) if lam > 0 else len(rest)
    resid = float(np.max(np.abs(q_mat @ pi - d)))
    return SbmSpectral(
        d=d, T=t_mat, B=b_mat, eigs_T=eigs, lam=lam, ks=d * lam * lam,
        degree_condition_residual=resid, multiplicity=mult,
    )


def sbm_spectral_from_params(params: SbmParams) -> SbmSpectral:
    return sbm_spectral(params.pi, params.Q)


def b_power_inf_norm(spec: SbmSpectral, t: int) -> float:
    """max_{k,l} |(B^t)_{k,l}|, to compare against lam^t."""
    return float(np.max(np.abs(np.linalg.matrix_power(spec.B, t))))


def amp_threshold(rho: float, n: int) -> float:
    """(rho sqrt(e n))^{-1}: the sharp signal level for the tree-polynomial regime."""
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    return 1.0 / (rho * math.sqrt(math.e * n))


def amp_threshold_lower(rho: float, n: int) -> float:
    """(rho sqrt(e n))^{-1} sqrt(1 - rho): the lower-bound variant of the threshold."""
    return amp_threshold(rho, n) * math.sqrt(1.0 - rho)


def pds_lambda(p0: float, p1: float) -> float:
    """(p1 - p0)/sqrt(p0 (1 - p0)), the effective signal strength of the subgraph model."""
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly inside (0, 1)")
    return (p1 - p0) / math.sqrt(p0 * (1.0 - p0))


def bbp_gap(lam: float) -> float:
    """Signed distance to the rank-one spectral transition at lambda = 1."""
    return lam - 1.0


def threshold_flags(model: str, **kw) -> dict:
    """Below/above flags for the model's sharp threshold, plus the signed gaps."""
    if model == "submatrix":
        thr = amp_threshold(kw["rho"], kw["n"])
        thr_lower = amp_threshold_lower(kw["rho"], kw["n"])
        return {"amp_threshold": thr, "amp_threshold_lower": thr_lower,
                "amp_gap": kw["lam"] - thr, "below_amp": kw["lam"] <= thr_lower}
    if model == "pds":
        lam = pds_lambda(kw["p0"], kw["p1"])
        thr = amp_threshold(kw["rho"], kw["n"])
        thr_lower = amp_threshold_lower(kw["rho"], kw["n"])
        return {"lambda_effective": lam, "amp_threshold": thr,
                "amp_threshold_lower": thr_lower,
                "amp_gap": lam - thr, "below_amp": lam <= thr_lower}
    if model == "wigner":
        return {"bbp_gap": bbp_gap(kw["lam"]), "below_bbp": kw["lam"] <= 1.0}
    if model == "sbm":
        spec = sbm_spectral(kw["pi"], kw["Q"])
        return {"d": spec.d, "lambda2": spec.lam, "ks": spec.ks,
                "ks_gap": spec.ks - 1.0, "below_ks": spec.ks <= 1.0,
                "degree_condition_residual": spec.degree_condition_residual,
                "multiplicity": spec.multiplicity}
    raise ValueError(f"unknown model {model!r}")
