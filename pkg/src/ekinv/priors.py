"""Gaussian priors via spectral (Karhunen-Loeve) decompositions.

A prior is stored as eigenpairs (lambda_j, z_j) of its covariance operator,
with the z_j orthonormal in the discrete L2 inner product of the underlying
mesh. Nodal samples are sums sqrt(lambda_j) * zeta_j * z_j; the nodal
covariance matrix is sum_j lambda_j z_j z_j^T.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse

from .fem1d import Mesh1D


class PriorKind(enum.Enum):
    INVERSE_SHIFTED_LAPLACIAN = "inverse_shifted_laplacian"
    BILAPLACIAN = "bilaplacian"


@dataclass(frozen=True)
class PriorSpec:
    """Spectral description of a Gaussian covariance operator.

    `eigenvalues` are positive and non-increasing; `modes` holds the
    discretized eigenfunctions as rows. `mass` represents the discrete
    L2 inner product in which the modes are orthonormal (a scalar for a
    uniform weight, or a sparse mass matrix).
    """

    kind: PriorKind
    eigenvalues: np.ndarray
    modes: np.ndarray
    mass: Union[float, scipy.sparse.spmatrix]
    beta: Optional[float] = None
    _cov_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        modes = np.asarray(self.modes, dtype=float)
        if lam.ndim != 1 or modes.ndim != 2 or modes.shape[0] != lam.size:
            raise ValueError("need one eigenvalue per mode row")
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be positive")
        if np.any(np.diff(lam) > 1e-12 * lam[0]):
            raise ValueError("eigenvalues must be non-increasing")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def dim(self) -> int:
        return self.modes.shape[1]

    def l2_inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Discrete L2 inner product underlying the mode orthonormality."""
        if np.isscalar(self.mass):
            return float(self.mass) * float(f @ g)
        return float(f @ (self.mass @ g))

    def truncate(self, n: int) -> "PriorSpec":
        if not 1 <= n <= self.n_modes:
            raise ValueError(f"cannot keep {n} of {self.n_modes} modes")
        return PriorSpec(self.kind, self.eigenvalues[:n], self.modes[:n],
                         self.mass, self.beta)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One draw sum_j sqrt(lambda_j) zeta_j z_j with zeta_j iid N(0,1)."""
        zeta = rng.standard_normal(self.n_modes)
        return (np.sqrt(self.eigenvalues) * zeta) @ self.modes

    def cov_apply(self, x: np.ndarray) -> np.ndarray:
        """Nodal covariance action: sum_j lambda_j z_j (z_j . x)."""
        return (self.eigenvalues * (self.modes @ x)) @ self.modes

    def cov_quadratic(self, x: np.ndarray) -> float:
        """Quadratic form x^T C0 x (equals ||C0^{1/2} x||^2)."""
        proj = self.modes @ x
        return float(self.eigenvalues @ np.square(proj))

    def cov_matrix(self) -> np.ndarray:
        """Dense nodal covariance matrix sum_j lambda_j z_j z_j^T (cached)."""
        if "cov" not in self._cov_cache:
            self._cov_cache["cov"] = (
                self.modes.T * self.eigenvalues
            ) @ self.modes
        return self._cov_cache["cov"]

    def cov_diag(self) -> np.ndarray:
        return np.einsum("j,ji,ji->i", self.eigenvalues, self.modes, self.modes)


def brownian_bridge_prior(mesh: Mesh1D, beta: float = 10.0,
                          n_modes: Optional[int] = None) -> PriorSpec:
    """Prior with covariance beta * (negative Dirichlet Laplacian)^{-1} on (0, pi).

    The eigenpairs are analytic: lambda_j = beta / j^2 with sine modes
    sqrt(2/pi) sin(j x), exactly orthonormal in the h-weighted nodal
    inner product.
    """
    if n_modes is None:
        n_modes = mesh.n_interior
    if not 1 <= n_modes <= mesh.n_interior:
        raise ValueError("n_modes must be between 1 and the number of nodes")
    x = mesh.interior_nodes
    j = np.arange(1, n_modes + 1)
    eigenvalues = beta / j.astype(float) ** 2
    modes = np.sqrt(2.0 / np.pi) * np.sin(np.outer(j, x))
    return PriorSpec(PriorKind.INVERSE_SHIFTED_LAPLACIAN, eigenvalues, modes,
                     mass=mesh.width, beta=beta)


def kl_initial_ensemble(prior: PriorSpec, size: int, seed: int) -> np.ndarray:
    """Member j = sqrt(lambda_j) zeta_j z_j, the j-th KL term of one draw.

    Returns a (size, d) array of members; the ensemble spanned by the
    first J members is a strict subset of the span of any larger one.
    """
    if size > prior.n_modes:
        raise ValueError(
            f"requested {size} members but prior has {prior.n_modes} modes"
        )
    zeta = np.random.default_rng(seed).standard_normal(size)
    scale = np.sqrt(prior.eigenvalues[:size]) * zeta
    return scale[:, None] * prior.modes[:size]


def adaptive_first_member(truth: np.ndarray, others: np.ndarray,
                          alphas: np.ndarray) -> np.ndarray:
    """First member making the mapped residual of member 1 lie in the
    span of the mapped deviations.

    Solves u1 - truth = sum_k alpha_k (u_k - mean) for u1 given the other
    J-1 members and the coefficient vector (alpha_1, ..., alpha_J). The
    identity holds in state space, so it holds under any linear forward map.
    """
    others = np.atleast_2d(np.asarray(others, dtype=float))
    alphas = np.asarray(alphas, dtype=float)
    j_total = others.shape[0] + 1
    if alphas.shape != (j_total,):
        raise ValueError(f"need {j_total} coefficients, got {alphas.shape}")
    denom = 1.0 - alphas[0] + alphas.sum() / j_total
    if abs(denom) < 1e-12 * (1.0 + np.abs(alphas).sum()):
        raise ValueError(
            f"degenerate coefficient choice: 1 - alpha_1 + sum(alpha)/J = {denom:.3e}"
        )
    others_sum = others.sum(axis=0)
    numer = (np.asarray(truth, dtype=float)
             + alphas[1:] @ others
             - (alphas.sum() / j_total) * others_sum)
    return numer / denom
