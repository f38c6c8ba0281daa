"""Piecewise-linear FEM for the 1-D elliptic operator -p'' + p on (0, pi).

The forward map observes the solution at equispaced interior points which
coincide with mesh nodes, so point evaluation is exact nodal interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .model import ForwardMap

DOMAIN_LENGTH = np.pi


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of (0, pi) with n_cells elements."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError("need at least 4 cells")
        if self.n_cells & (self.n_cells - 1) != 0:
            raise ValueError("n_cells must be a power of two")

    @property
    def width(self) -> float:
        return DOMAIN_LENGTH / self.n_cells

    @property
    def n_interior(self) -> int:
        return self.n_cells - 1

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.width * np.arange(1, self.n_cells)


@dataclass(frozen=True)
class Fem1DLinear:
    """Assembled system for -p'' + p = u with homogeneous Dirichlet conditions.

    `operator` is the (stiffness + mass) matrix on interior nodes, `mass`
    the consistent mass matrix used for the load, and `observation` the
    K x d matrix of nodal interpolation weights at the observation points.
    """

    mesh: Mesh1D
    operator: np.ndarray
    mass: np.ndarray
    observation: np.ndarray
    obs_points: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)
    _forward_matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        chol = scipy.linalg.cho_factor(self.operator, lower=True)
        object.__setattr__(self, "_chol", chol)
        # Cached dense forward matrix O A^{-1} M, kept for linear-algebra
        # consumers; the evaluate path below goes through the solve.
        fwd = self.observation @ scipy.linalg.cho_solve(chol, self.mass)
        object.__setattr__(self, "_forward_matrix", fwd)

    @property
    def n_obs(self) -> int:
        return self.observation.shape[0]

    @property
    def forward_matrix(self) -> np.ndarray:
        return self._forward_matrix

    def solve(self, u: np.ndarray) -> np.ndarray:
        """Nodal FEM solution p of -p'' + p = u for nodal data u."""
        return scipy.linalg.cho_solve(self._chol, self.mass @ u,
                                      check_finite=False)

    def solve_batch(self, members: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._chol, self.mass @ members.T,
                                      check_finite=False).T

    def forward_map(self) -> ForwardMap:
        """Forward map u -> observations of the solution.

        Evaluation goes through the cached dense matrix; `linear_forward`
        keeps the explicit solve path, and the two agree to rounding.
        """
        return ForwardMap.from_matrix(self._forward_matrix)


def linear_forward(fem: Fem1DLinear, u: np.ndarray) -> np.ndarray:
    """Observations of the FEM solution, via the assembled solve path."""
    return fem.observation @ fem.solve(u)


def assemble_fem_1d(mesh: Mesh1D, n_obs: Optional[int] = None) -> Fem1DLinear:
    """Assemble the P1 system and the point-observation operator.

    Observations sit at x_k = k * pi / (n_obs + 1), k = 1..n_obs, which
    must be mesh nodes (n_cells divisible by n_obs + 1). The default is
    the 15-point configuration.
    """
    if n_obs is None:
        n_obs = 2**4 - 1
    d = mesh.n_interior
    h = mesh.width

    main = np.full(d, 2.0 / h + 4.0 * h / 6.0)
    off = np.full(d - 1, -1.0 / h + h / 6.0)
    operator = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)

    mass = (
        np.diag(np.full(d, 4.0 * h / 6.0))
        + np.diag(np.full(d - 1, h / 6.0), 1)
        + np.diag(np.full(d - 1, h / 6.0), -1)
    )

    stride, rem = divmod(mesh.n_cells, n_obs + 1)
    if rem != 0:
        raise ValueError(
            f"{n_obs} observation points do not fall on nodes of a "
            f"{mesh.n_cells}-cell mesh"
        )
    observation = np.zeros((n_obs, d))
    obs_index = stride * np.arange(1, n_obs + 1) - 1
    observation[np.arange(n_obs), obs_index] = 1.0
    obs_points = h * (obs_index + 1)

    return Fem1DLinear(mesh, operator, mass, observation, obs_points)
