"""P1 FEM for the 2-D log-permeability problem -div(e^u grad p) = f on (-1, 1)^2.

The coefficient field u lives on all mesh nodes and enters the assembly
through its value at element centroids (piecewise-constant coefficient
per triangle); p satisfies homogeneous Dirichlet conditions. The
observation operator reads the solution at an interior grid of nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .model import ForwardMap
from .priors import PriorKind, PriorSpec


@dataclass(frozen=True)
class Fem2DNonlinear:
    """Uniform triangulation of (-1, 1)^2 with the assembly machinery.

    `n_cells` squares per side, each split into two triangles. Nodal
    order is row-major over the (n_cells + 1)^2 grid including the
    boundary; `interior` indexes the Dirichlet dofs of p.
    """

    n_cells: int
    source: float = 100.0
    n_obs_per_side: int = 7
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    triangles: np.ndarray = field(init=False, repr=False, compare=False)
    interior: np.ndarray = field(init=False, repr=False, compare=False)
    obs_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _local_stiffness: np.ndarray = field(init=False, repr=False, compare=False)
    _load: np.ndarray = field(init=False, repr=False, compare=False)
    _coo_rows: np.ndarray = field(init=False, repr=False, compare=False)
    _coo_cols: np.ndarray = field(init=False, repr=False, compare=False)
    _coo_vals: np.ndarray = field(init=False, repr=False, compare=False)
    _coo_elem: np.ndarray = field(init=False, repr=False, compare=False)
    _bandwidth: int = field(init=False, repr=False, compare=False)
    _band_map: scipy.sparse.csr_matrix = field(init=False, repr=False,
                                               compare=False)

    def __post_init__(self):
        n = self.n_cells
        if n < 4:
            raise ValueError("need at least 4 cells per side")
        if n % (self.n_obs_per_side + 1) != 0:
            raise ValueError("observation grid must fall on mesh nodes")

        side = np.linspace(-1.0, 1.0, n + 1)
        xx, yy = np.meshgrid(side, side, indexing="xy")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])

        def node_id(ix, iy):
            return iy * (n + 1) + ix

        tris = []
        for iy in range(n):
            for ix in range(n):
                p00 = node_id(ix, iy)
                p10 = node_id(ix + 1, iy)
                p01 = node_id(ix, iy + 1)
                p11 = node_id(ix + 1, iy + 1)
                tris.append((p00, p10, p11))
                tris.append((p00, p11, p01))
        triangles = np.array(tris, dtype=int)

        ix = np.arange(n + 1)
        boundary_mask = np.zeros((n + 1, n + 1), dtype=bool)
        boundary_mask[0, :] = boundary_mask[-1, :] = True
        boundary_mask[:, 0] = boundary_mask[:, -1] = True
        interior = np.flatnonzero(~boundary_mask.ravel())

        stride = n // (self.n_obs_per_side + 1)
        obs_idx = stride * np.arange(1, self.n_obs_per_side + 1)
        obs_nodes = np.array([
            node_id(i, j) for j in obs_idx for i in obs_idx
        ])

        # Per-element geometry: constant P1 gradients give the local
        # stiffness (area * grad_i . grad_j), identical for congruent
        # triangles but computed generically.
        coords = nodes[triangles]  # (n_el, 3, 2)
        v1 = coords[:, 1] - coords[:, 0]
        v2 = coords[:, 2] - coords[:, 0]
        area = 0.5 * np.abs(v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])
        b = coords[:, [1, 2, 0], 1] - coords[:, [2, 0, 1], 1]
        c = coords[:, [2, 0, 1], 0] - coords[:, [1, 2, 0], 0]
        grads = np.stack([b, c], axis=-1) / (2.0 * area)[:, None, None]
        local = np.einsum("eia,eja,e->eij", grads, grads, area)

        load_full = np.zeros(nodes.shape[0])
        np.add.at(load_full, triangles.ravel(),
                  np.repeat(self.source * area / 3.0, 3))

        rows = np.repeat(triangles, 3, axis=1).ravel()
        cols = np.tile(triangles, (1, 3)).ravel()
        vals = local.ravel()
        elem = np.repeat(np.arange(triangles.shape[0]), 9)

        # Restrict to interior dofs once; boundary rows/cols drop out.
        index_map = -np.ones(nodes.shape[0], dtype=int)
        index_map[interior] = np.arange(interior.size)
        keep = (index_map[rows] >= 0) & (index_map[cols] >= 0)
        irows = index_map[rows[keep]]
        icols = index_map[cols[keep]]
        ivals = vals[keep]
        ielem = elem[keep]

        # Precomputed map from element coefficients to the upper-banded
        # storage of the interior stiffness, so each assembly is one
        # sparse matrix-vector product.
        n_int = interior.size
        bandwidth = n
        upper = irows <= icols
        band_rows = bandwidth + irows[upper] - icols[upper]
        flat = band_rows * n_int + icols[upper]
        band_map = scipy.sparse.coo_matrix(
            (ivals[upper], (flat, ielem[upper])),
            shape=((bandwidth + 1) * n_int, triangles.shape[0]),
        ).tocsr()

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "obs_nodes", obs_nodes)
        object.__setattr__(self, "_local_stiffness", local)
        object.__setattr__(self, "_load", load_full[interior])
        object.__setattr__(self, "_coo_rows", irows)
        object.__setattr__(self, "_coo_cols", icols)
        object.__setattr__(self, "_coo_vals", ivals)
        object.__setattr__(self, "_coo_elem", ielem)
        object.__setattr__(self, "_bandwidth", bandwidth)
        object.__setattr__(self, "_band_map", band_map)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_obs(self) -> int:
        return self.obs_nodes.size

    @property
    def mesh_width(self) -> float:
        return 2.0 / self.n_cells

    def mass_matrix_full(self) -> scipy.sparse.csr_matrix:
        """Consistent P1 mass matrix on all nodes (the discrete L2 Gram)."""
        coords = self.nodes[self.triangles]
        v1 = coords[:, 1] - coords[:, 0]
        v2 = coords[:, 2] - coords[:, 0]
        area = 0.5 * np.abs(v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])
        local = (np.ones((3, 3)) + np.eye(3)) / 12.0
        vals = (local[None, :, :] * area[:, None, None]).ravel()
        rows = np.repeat(self.triangles, 3, axis=1).ravel()
        cols = np.tile(self.triangles, (1, 3)).ravel()
        return scipy.sparse.coo_matrix(
            (vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes)
        ).tocsr()

    def mass_matrix(self) -> scipy.sparse.csr_matrix:
        """Consistent P1 mass matrix on interior dofs."""
        full = self.mass_matrix_full()
        return full[self.interior][:, self.interior]

    def stiffness_matrix(self) -> scipy.sparse.csr_matrix:
        """Dirichlet Laplacian stiffness on interior dofs (unit coefficient)."""
        return self._assemble(np.ones(self.triangles.shape[0]))

    def _assemble(self, coeff: np.ndarray) -> scipy.sparse.csr_matrix:
        vals = self._coo_vals * coeff[self._coo_elem]
        n_int = self.interior.size
        return scipy.sparse.coo_matrix(
            (vals, (self._coo_rows, self._coo_cols)), shape=(n_int, n_int)
        ).tocsr()

    def solve(self, u: np.ndarray) -> np.ndarray:
        """Full nodal solution p (zero on the boundary) for nodal field u."""
        coeff = np.exp(u[self.triangles].mean(axis=1))
        if not np.all(np.isfinite(coeff)):
            raise FloatingPointError("non-finite coefficient field")
        n_int = self.interior.size
        banded = (self._band_map @ coeff).reshape(self._bandwidth + 1, n_int)
        p_int = scipy.linalg.solveh_banded(banded, self._load,
                                           check_finite=False)
        p = np.zeros(self.n_nodes)
        p[self.interior] = p_int
        return p

    def forward_map(self) -> ForwardMap:
        """Nonlinear map from the nodal log-permeability to point observations."""
        return ForwardMap(
            evaluate=lambda u: self.solve(u)[self.obs_nodes],
            out_dim=self.n_obs,
        )


def nonlinear_forward_2d(fem: Fem2DNonlinear, u: np.ndarray) -> np.ndarray:
    """Observations of the solution for the nodal log-permeability u."""
    return fem.solve(u)[fem.obs_nodes]


def bilaplacian_prior_2d(fem: Fem2DNonlinear,
                         n_modes: Optional[int] = None) -> PriorSpec:
    """Prior with covariance (Dirichlet Laplacian)^{-2} on the 2-D mesh.

    Eigenpairs come from the stiffness-mass pencil K z = mu M z; the
    covariance eigenvalues are 1/mu^2 and the modes (extended by zero to
    the boundary) are mass-orthonormal.
    """
    k_mat = fem.stiffness_matrix().toarray()
    m_mat = fem.mass_matrix().toarray()
    mu, vecs = scipy.linalg.eigh(k_mat, m_mat)
    order = np.argsort(mu)
    mu = mu[order]
    vecs = vecs[:, order]
    if n_modes is None:
        n_modes = mu.size
    if not 1 <= n_modes <= mu.size:
        raise ValueError("n_modes out of range")

    eigenvalues = 1.0 / mu[:n_modes] ** 2
    modes = np.zeros((n_modes, fem.n_nodes))
    modes[:, fem.interior] = vecs[:, :n_modes].T
    return PriorSpec(PriorKind.BILAPLACIAN, eigenvalues, modes,
                     mass=fem.mass_matrix_full())
