"""The discrete-time ensemble Kalman iteration for inverse problems.

One step moves every member by the Kalman-gain increment
``C_up (C_pp + h^{-1} Gamma)^{-1} (y + xi - G(u))`` with optional
perturbed observations ``xi ~ N(0, h^{-1} Sigma)``. The span of the
initial members is invariant under the map, with or without noise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .model import (
    Ensemble,
    InverseProblem,
    SigmaMode,
    cov_pp,
    cov_up,
    evaluate_ensemble,
)
from .rngstream import CH_OBS_NOISE, CounterStream
from .trajectory import DiagnosticsRecorder, Trajectory


@dataclass(frozen=True)
class DiscreteConfig:
    """Schedule of the discrete iteration.

    With ``step_size`` left at its default 1/n_steps the run emulates
    the tempering schedule ending at t = 1; an explicit step size allows
    longer horizons t = n_steps * step_size.
    """

    n_steps: int
    step_size: Optional[float] = None
    perturb_obs: bool = False
    rng_seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be positive")
        if self.step_size is None:
            object.__setattr__(self, "step_size", 1.0 / self.n_steps)
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")


def enkf_update(
    ens: Ensemble,
    prob: InverseProblem,
    cfg: DiscreteConfig,
    rng: Optional[CounterStream] = None,
    step: int = 0,
    g_evals: Optional[np.ndarray] = None,
) -> Ensemble:
    """One Kalman-gain update of every member.

    `g_evals` may carry the forward images of the current members to
    avoid re-evaluating them. Perturbed observations draw one noise
    vector per member, keyed by (seed, step, member) so the stream does
    not depend on evaluation order.
    """
    g = evaluate_ensemble(ens, prob) if g_evals is None else np.asarray(g_evals)
    h = cfg.step_size
    noise = prob.noise

    c_pp = cov_pp(ens, g)
    c_up = cov_up(ens, g)
    gain_matrix = c_pp + noise.gamma / h
    chol = scipy.linalg.cho_factor(gain_matrix, lower=True, check_finite=False)

    residuals = prob.data - g
    if cfg.perturb_obs and noise.sigma_mode is SigmaMode.EQUAL_GAMMA:
        stream = rng if rng is not None else CounterStream(cfg.rng_seed)
        scale = 1.0 / np.sqrt(h)
        xi = np.stack([
            scale * (noise.gamma_chol
                     @ stream.normal((step, j, CH_OBS_NOISE), noise.dim))
            for j in range(ens.size)
        ])
        residuals = residuals + xi

    increments = scipy.linalg.cho_solve(chol, residuals.T,
                                        check_finite=False).T @ c_up.T
    return Ensemble(ens.members + increments)


def run_discrete(prob: InverseProblem, ens0: Ensemble,
                 cfg: DiscreteConfig) -> Trajectory:
    """Run n_steps updates, recording diagnostics along the way.

    With record_every = 1 all n_steps + 1 ensembles are kept; larger
    strides keep every stride-th step plus the endpoint.
    """
    stream = CounterStream(cfg.rng_seed)
    recorder = DiagnosticsRecorder(prob)

    ens = ens0
    for n in range(cfg.n_steps):
        g = evaluate_ensemble(ens, prob)
        if n % cfg.record_every == 0:
            recorder.record(n * cfg.step_size, ens, g)
        ens = enkf_update(ens, prob, cfg, stream, step=n, g_evals=g)
    recorder.record(cfg.n_steps * cfg.step_size, ens,
                    evaluate_ensemble(ens, prob))
    return recorder.build()


def subspace_distance(ens: Ensemble, basis0) -> float:
    """Largest relative distance of any member from the span of basis0.

    Returns max_j ||u_j - P u_j|| / ||u_j|| with P the orthogonal
    projector onto span(basis0); zero-norm members contribute zero.
    """
    basis = np.atleast_2d(np.asarray(basis0, dtype=float))
    if basis.shape[0] < 1:
        raise ValueError("basis0 must be nonempty")
    q = scipy.linalg.orth(basis.T)
    members = ens.members
    residual = members - (members @ q) @ q.T
    norms = np.linalg.norm(members, axis=1)
    rel = np.linalg.norm(residual, axis=1) / np.where(norms > 0, norms, 1.0)
    return float(rel.max())
