"""Deviation-matrix machinery for the linear noise-free dynamics.

The J x J Gram matrices of mapped deviations (E), mapped residuals (R),
and their cross terms (F) obey closed-form dynamics along the flow:
E(t) diagonalizes in the fixed eigenbasis of E(0) with eigenvalues
lambda(t) = (2t/J + 1/lambda0)^{-1}, the coordinate-change matrix L(t)
shares that basis with entries (2 lambda0 t / J + 1)^{-1/2}, Tr(R) is
non-increasing, and mapped residuals split into a decaying component in
the span of the initial mapped deviations plus a constant remainder.
These closed forms double as exact oracles for the integrators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .model import Ensemble, InverseProblem, NoiseModel
from .trajectory import Trajectory


@dataclass(frozen=True)
class DeviationMatrices:
    """Gram matrices E, F, R of mapped deviations and residuals.

    E[l, j] = <Ae_l, Ae_j>_Gamma, F[l, j] = <Ar_l, Ae_j>_Gamma,
    R[l, j] = <Ar_l, Ar_j>_Gamma. E and R are symmetric, E is PSD, and
    both E and F annihilate the all-ones vector.
    """

    E: np.ndarray
    F: np.ndarray
    R: np.ndarray

    @property
    def size(self) -> int:
        return self.E.shape[0]


@dataclass(frozen=True)
class ResidualSplit:
    """Gamma-orthogonal decomposition of one mapped residual."""

    parallel: np.ndarray
    perp: np.ndarray


@dataclass(frozen=True)
class SpectralE:
    """Eigendecomposition of the initial deviation Gram matrix.

    Eigenvalues below the zero cutoff are treated as exactly zero so the
    closed-form evolution keeps those directions frozen.
    """

    X: np.ndarray
    lambda0: np.ndarray

    def __post_init__(self):
        ident = self.X @ self.X.T
        if not np.allclose(ident, np.eye(self.X.shape[0]), atol=1e-12):
            raise ValueError("X must be orthogonal")
        if np.any(np.diff(self.lambda0) > 0):
            raise ValueError("lambda0 must be sorted descending")

    @classmethod
    def from_matrix(cls, e0: np.ndarray,
                    zero_cutoff: float = 1e-12) -> "SpectralE":
        e0 = np.asarray(e0, dtype=float)
        eigvals, eigvecs = np.linalg.eigh(0.5 * (e0 + e0.T))
        order = np.argsort(eigvals)[::-1]
        lam = eigvals[order]
        x = eigvecs[:, order]
        lam = np.where(lam > zero_cutoff * max(lam.max(), 0.0), lam, 0.0)
        return cls(x, lam)


def deviation_matrices(ens: Ensemble, truth: np.ndarray,
                       prob: InverseProblem) -> DeviationMatrices:
    """E, F, R for a linear forward map and known truth."""
    a = prob.forward.linear_matrix
    if a is None:
        raise ValueError("deviation matrices require a linear forward map")
    if truth is None:
        raise ValueError("deviation matrices require the ground truth")
    g = ens.members @ a.T
    w_ae = prob.noise.whiten(g - g.mean(axis=0))
    w_ar = prob.noise.whiten(g - a @ truth)
    e_mat = w_ae @ w_ae.T
    f_mat = w_ar @ w_ae.T
    r_mat = w_ar @ w_ar.T
    return DeviationMatrices(0.5 * (e_mat + e_mat.T), f_mat,
                             0.5 * (r_mat + r_mat.T))


def matrix_ode_rhs(dm: DeviationMatrices,
                   ensemble_size: Optional[int] = None
                   ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-hand sides dE = -(2/J) E^2, dF = -(2/J) F E, dR = -(2/J) F F^T."""
    j = dm.size if ensemble_size is None else ensemble_size
    factor = -2.0 / j
    return (factor * dm.E @ dm.E, factor * dm.F @ dm.E,
            factor * dm.F @ dm.F.T)


def analytic_E(spec: SpectralE, t: float, ensemble_size: int) -> np.ndarray:
    """Closed-form E(t) = X diag(lambda(t)) X^T.

    lambda(t) = (2t/J + 1/lambda0)^{-1} on directions with lambda0 > 0
    and identically zero elsewhere.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam0 = spec.lambda0
    lam_t = np.zeros_like(lam0)
    positive = lam0 > 0
    lam_t[positive] = 1.0 / (2.0 * t / ensemble_size + 1.0 / lam0[positive])
    return (spec.X * lam_t) @ spec.X.T


def analytic_L(spec: SpectralE, t: float, ensemble_size: int) -> np.ndarray:
    """Closed-form coordinate change L(t) = X diag(omega(t)) X^T.

    omega(t) = (2 lambda0 t / J + 1)^{-1/2}; frozen directions keep
    omega = 1, and L(0) is the identity.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    omega = 1.0 / np.sqrt(2.0 * spec.lambda0 * t / ensemble_size + 1.0)
    return (spec.X * omega) @ spec.X.T


def split_observation_vectors(
    vectors: np.ndarray,
    basis0: np.ndarray,
    noise: NoiseModel,
) -> List[ResidualSplit]:
    """Gamma-orthogonal projection of each row onto span(basis0).

    Rank deficiency in the basis is handled through the pseudo-inverse
    of its Gamma-Gram matrix with a relative cutoff of 1e-12.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    basis = np.atleast_2d(np.asarray(basis0, dtype=float))
    w_basis = noise.whiten(basis)
    w_vectors = noise.whiten(vectors)
    gram = w_basis @ w_basis.T
    coeffs = w_vectors @ w_basis.T @ np.linalg.pinv(gram, rcond=1e-12)
    parallel = coeffs @ basis
    return [
        ResidualSplit(parallel=p, perp=v - p)
        for p, v in zip(parallel, vectors)
    ]


def residual_split(
    ens: Ensemble,
    truth: np.ndarray,
    basis0: np.ndarray,
    gamma: Union[np.ndarray, NoiseModel],
    forward_matrix: np.ndarray,
) -> List[ResidualSplit]:
    """Decompose each mapped residual A(u_j - truth) against span(basis0).

    `basis0` holds the initial mapped deviations as rows; `gamma` may be
    the noise covariance matrix or a NoiseModel. All members share the
    same perpendicular component along the exact dynamics.
    """
    noise = gamma if isinstance(gamma, NoiseModel) else NoiseModel(gamma)
    residuals = (ens.members - np.asarray(truth)) @ forward_matrix.T
    return split_observation_vectors(residuals, basis0, noise)


def mapped_deviations(ens: Ensemble, forward_matrix: np.ndarray) -> np.ndarray:
    """Rows A(u_j - ubar), the natural basis for residual splitting."""
    g = ens.members @ forward_matrix.T
    return g - g.mean(axis=0)


def check_maximal_dimension(ens: Ensemble, prob: InverseProblem,
                            rcond: float = 1e-10) -> Tuple[int, int]:
    """Rank of the mapped deviations against the maximum min(J-1, K).

    Returned as (actual, maximal); callers report rather than assume.
    """
    a = prob.forward.linear_matrix
    if a is None:
        raise ValueError("maximal-dimension check needs a linear forward map")
    dev = mapped_deviations(ens, a)
    svals = np.linalg.svd(dev, compute_uv=False)
    rank = int(np.sum(svals > rcond * svals[0])) if svals[0] > 0 else 0
    return rank, min(ens.size - 1, prob.forward.out_dim)


def collapse_rate_fit(traj: Trajectory, window: Tuple[float, float],
                      series: str = "E_fro") -> float:
    """Least-squares slope of log(series) against log(t) over the window."""
    t0, t1 = window
    times = traj.times
    values = traj.column(series)
    mask = (times >= t0) & (times <= t1) & (times > 0)
    if mask.sum() < 2:
        raise ValueError("window must contain at least two recorded times")
    if np.any(values[mask] <= 0):
        raise ValueError(f"series {series} has non-positive values in window")
    log_t = np.log(times[mask])
    log_v = np.log(values[mask])
    design = np.column_stack([log_t, np.ones_like(log_t)])
    slope, _ = np.linalg.lstsq(design, log_v, rcond=None)[0]
    return float(slope)
