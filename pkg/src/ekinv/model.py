"""Ensemble/problem data model and the elementary statistical operators.

States and observations are plain 1-D numpy arrays; an ensemble is an
immutable stack of member states. Empirical covariances divide by the
ensemble size J (not J-1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg


class EkinvError(Exception):
    """Base class for errors raised by this package."""


class ForwardEvaluationError(EkinvError):
    """A forward evaluation returned non-finite values."""

    def __init__(self, member: int, message: str = ""):
        self.member = member
        super().__init__(
            message or f"non-finite forward evaluation for member {member}"
        )


class BlowUpError(EkinvError):
    """A trajectory exceeded the blow-up guard."""

    def __init__(self, time: float, member: int, norm: float):
        self.time = time
        self.member = member
        self.norm = norm
        super().__init__(
            f"member {member} blew up at t={time:.6g} (norm {norm:.3e})"
        )


class SigmaMode(enum.Enum):
    """Covariance of the artificial observation perturbations."""

    ZERO = "zero"
    EQUAL_GAMMA = "equal_gamma"


@dataclass(frozen=True)
class Ensemble:
    """An ordered collection of J state vectors, stored as rows of a (J, d) array."""

    members: np.ndarray

    def __post_init__(self):
        members = np.atleast_2d(np.asarray(self.members, dtype=float))
        if members.ndim != 2:
            raise ValueError("ensemble members must form a (J, d) array")
        if members.shape[0] < 1:
            raise ValueError("ensemble needs at least one member")
        members = members.copy()
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return self.members.shape[0]

    @property
    def dim(self) -> int:
        return self.members.shape[1]

    def member(self, j: int) -> np.ndarray:
        return self.members[j]

    def deviations(self) -> np.ndarray:
        """Members minus the ensemble mean, as a (J, d) array."""
        return self.members - self.members.mean(axis=0)


@dataclass(frozen=True)
class NoiseModel:
    """Observation-noise normalization Gamma plus the perturbation mode Sigma.

    Gamma must be symmetric positive definite; its Cholesky factor is
    computed once and reused for all Gamma-weighted inner products.
    """

    gamma: np.ndarray
    sigma_mode: SigmaMode = SigmaMode.ZERO
    _chol: np.ndarray = field(init=False, repr=False, compare=False)
    _diag: Optional[np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ValueError("gamma must be a square matrix")
        if not np.allclose(gamma, gamma.T, rtol=1e-12, atol=1e-12):
            raise ValueError("gamma must be symmetric")
        try:
            chol = scipy.linalg.cholesky(gamma, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise ValueError("gamma must be positive definite") from exc
        gamma = gamma.copy()
        gamma.setflags(write=False)
        diag = None
        if np.count_nonzero(gamma - np.diag(np.diagonal(gamma))) == 0:
            diag = np.diagonal(gamma).copy()
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_diag", diag)

    @classmethod
    def identity(cls, k: int, sigma_mode: SigmaMode = SigmaMode.ZERO) -> "NoiseModel":
        return cls(np.eye(k), sigma_mode)

    @classmethod
    def scaled_identity(
        cls, k: int, std: float, sigma_mode: SigmaMode = SigmaMode.ZERO
    ) -> "NoiseModel":
        """Gamma = std**2 * I, the covariance of iid N(0, std**2) noise."""
        return cls(std**2 * np.eye(k), sigma_mode)

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    @property
    def gamma_chol(self) -> np.ndarray:
        """Lower Cholesky factor L with L L^T = Gamma."""
        return self._chol

    def whiten(self, v: np.ndarray) -> np.ndarray:
        """Apply Gamma^{-1/2} (via the Cholesky factor) to vectors.

        Accepts a single vector or a stack of vectors in the last axis
        convention (..., K); returns the same shape. Diagonal Gamma takes
        an elementwise fast path.
        """
        v = np.asarray(v, dtype=float)
        if self._diag is not None:
            return v / np.sqrt(self._diag)
        out = scipy.linalg.solve_triangular(self._chol, v.reshape(-1, v.shape[-1]).T,
                                            lower=True, check_finite=False)
        return out.T.reshape(v.shape)

    def gamma_solve(self, v: np.ndarray) -> np.ndarray:
        """Apply Gamma^{-1} to vectors with shape (..., K)."""
        v = np.asarray(v, dtype=float)
        if self._diag is not None:
            return v / self._diag
        out = scipy.linalg.cho_solve((self._chol, True),
                                     v.reshape(-1, v.shape[-1]).T,
                                     check_finite=False)
        return out.T.reshape(v.shape)

    def whiten_matrix(self, a: np.ndarray) -> np.ndarray:
        """Apply Gamma^{-1/2} from the left to a (K, m) matrix."""
        a = np.asarray(a, dtype=float)
        if self._diag is not None:
            return a / np.sqrt(self._diag)[:, None]
        return scipy.linalg.solve_triangular(self._chol, a, lower=True,
                                             check_finite=False)

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        """Gamma-weighted inner product <a, b>_Gamma = a^T Gamma^{-1} b."""
        return float(self.whiten(a) @ self.whiten(b))

    def norm_sq(self, v: np.ndarray) -> np.ndarray:
        """Squared Gamma-weighted norms along the last axis."""
        w = self.whiten(v)
        return np.sum(np.square(w), axis=-1)

@dataclass(frozen=True)
class ForwardMap:
    """Map from states to observations, with optional linear structure.

    When `linear_matrix` is set, `evaluate(u)` must agree with the matrix
    product to within 1e-12 relative error. `adjoint_apply` is the plain
    transpose action, needed only by gradient-based variants.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    out_dim: int
    linear_matrix: Optional[np.ndarray] = None
    adjoint_apply: Optional[Callable[[np.ndarray], np.ndarray]] = None
    evaluate_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def from_matrix(cls, a: np.ndarray) -> "ForwardMap":
        a = np.asarray(a, dtype=float)
        return cls(
            evaluate=lambda u: a @ u,
            out_dim=a.shape[0],
            linear_matrix=a,
            adjoint_apply=lambda w: a.T @ w,
            evaluate_batch=lambda members: members @ a.T,
        )

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.evaluate(u)

    def batch(self, members: np.ndarray) -> np.ndarray:
        """Evaluate the map on each row of a (J, d) array, returning (J, K)."""
        if self.evaluate_batch is not None:
            return np.asarray(self.evaluate_batch(members), dtype=float)
        return np.stack([np.asarray(self.evaluate(u), dtype=float)
                         for u in members])


@dataclass(frozen=True)
class InverseProblem:
    """Forward map, observed data, noise normalization, optional ground truth."""

    forward: ForwardMap
    data: np.ndarray
    noise: NoiseModel
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (self.forward.out_dim,):
            raise ValueError(
                f"data dimension {data.shape} does not match forward output "
                f"dimension ({self.forward.out_dim},)"
            )
        if self.noise.dim != self.forward.out_dim:
            raise ValueError("noise dimension does not match forward output")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)


def evaluate_ensemble(ens: Ensemble, prob: InverseProblem) -> np.ndarray:
    """Forward-evaluate every member once, raising on non-finite output."""
    g = prob.forward.batch(ens.members)
    bad = ~np.isfinite(g).all(axis=1)
    if bad.any():
        raise ForwardEvaluationError(int(np.argmax(bad)))
    return g


def ensemble_mean(ens: Ensemble) -> np.ndarray:
    """Arithmetic mean of the ensemble members."""
    return ens.members.mean(axis=0)


def cov_pp(ens: Ensemble, g_evals: np.ndarray) -> np.ndarray:
    """Empirical covariance of the forward images, a K x K matrix.

    `g_evals` holds the forward image of each member as a row; division
    is by J. The result is symmetric positive semi-definite with rank
    at most J - 1.
    """
    g = np.atleast_2d(np.asarray(g_evals, dtype=float))
    if g.shape[0] != ens.size:
        raise ValueError("g_evals must hold one forward image per member")
    d = g - g.mean(axis=0)
    return d.T @ d / ens.size


def cov_up(ens: Ensemble, g_evals: np.ndarray) -> np.ndarray:
    """Empirical state-observation cross covariance, a d x K matrix."""
    g = np.atleast_2d(np.asarray(g_evals, dtype=float))
    if g.shape[0] != ens.size:
        raise ValueError("g_evals must hold one forward image per member")
    du = ens.deviations()
    dg = g - g.mean(axis=0)
    return du.T @ dg / ens.size


def empirical_cov(ens: Ensemble) -> np.ndarray:
    """Empirical covariance of the members, a d x d matrix (division by J)."""
    du = ens.deviations()
    return du.T @ du / ens.size


def misfit_phi(u: np.ndarray, prob: InverseProblem) -> float:
    """Least-squares data misfit 0.5 * ||Gamma^{-1/2} (y - G(u))||^2."""
    residual = prob.data - np.asarray(prob.forward(u), dtype=float)
    return 0.5 * float(prob.noise.norm_sq(residual))


def misfit_theta(u: np.ndarray, y_dagger: np.ndarray,
                 forward: ForwardMap) -> np.ndarray:
    """Observable misfit G(u) - y_dagger (the quantity accessible in practice)."""
    return np.asarray(forward(u), dtype=float) - np.asarray(y_dagger, dtype=float)
