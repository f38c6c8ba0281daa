"""Time-stamped ensembles plus the named scalar diagnostics both steppers record."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .model import Ensemble, InverseProblem

MEMBER_DIAGNOSTICS = ("e_sq", "Ae_sq", "r_sq", "Ar_sq", "phi", "theta_sq")
AGGREGATES = ("mean", "min", "max")
MATRIX_DIAGNOSTICS = ("E_fro", "F_fro", "R_fro", "E_op", "R_tr")


@dataclass(frozen=True)
class Trajectory:
    """Recorded times, ensembles, and per-time scalar diagnostics.

    Diagnostic keys follow ``<name>_<aggregate>`` for per-member
    quantities (squared deviation/residual norms, misfits) and plain
    names for the deviation-matrix norms, which are present only when
    the problem carries a ground truth.
    """

    times: np.ndarray
    ensembles: List[Ensemble]
    diagnostics: Dict[str, np.ndarray]

    def __post_init__(self):
        if len(self.times) != len(self.ensembles):
            raise ValueError("times and ensembles must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def column(self, key: str) -> np.ndarray:
        return self.diagnostics[key]

    @property
    def final_ensemble(self) -> Ensemble:
        return self.ensembles[-1]

    def index_at(self, t: float, atol: float = 1e-9) -> int:
        """Index of the recorded time equal to t (within atol)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol:
            raise KeyError(f"time {t} was not recorded")
        return i


class DiagnosticsRecorder:
    """Accumulates the per-step diagnostics for one run.

    Forward images are passed in by the stepper so each member is
    evaluated exactly once per step.
    """

    def __init__(self, prob: InverseProblem):
        self.prob = prob
        self.truth = prob.truth
        self.g_truth = (
            np.asarray(prob.forward(prob.truth), dtype=float)
            if prob.truth is not None
            else None
        )
        self._times: List[float] = []
        self._ensembles: List[Ensemble] = []
        self._rows: List[Dict[str, float]] = []

    def record(self, t: float, ens: Ensemble, g_evals: np.ndarray) -> None:
        noise = self.prob.noise
        members = ens.members
        g = np.asarray(g_evals, dtype=float)

        row: Dict[str, float] = {}
        e_sq = np.sum(np.square(members - members.mean(axis=0)), axis=1)
        ae_sq = noise.norm_sq(g - g.mean(axis=0))
        theta = g - self.prob.data
        theta_sq = noise.norm_sq(theta)
        phi = 0.5 * theta_sq
        _aggregate(row, "e_sq", e_sq)
        _aggregate(row, "Ae_sq", ae_sq)
        _aggregate(row, "phi", phi)
        _aggregate(row, "theta_sq", theta_sq)

        if self.truth is not None:
            r_sq = np.sum(np.square(members - self.truth), axis=1)
            ar = g - self.g_truth
            ar_sq = noise.norm_sq(ar)
            _aggregate(row, "r_sq", r_sq)
            _aggregate(row, "Ar_sq", ar_sq)

            w_ae = noise.whiten(g - g.mean(axis=0))
            w_ar = noise.whiten(ar)
            e_mat = w_ae @ w_ae.T
            f_mat = w_ar @ w_ae.T
            r_mat = w_ar @ w_ar.T
            row["E_fro"] = float(np.linalg.norm(e_mat, "fro"))
            row["F_fro"] = float(np.linalg.norm(f_mat, "fro"))
            row["R_fro"] = float(np.linalg.norm(r_mat, "fro"))
            row["E_op"] = float(np.linalg.norm(e_mat, 2))
            row["R_tr"] = float(np.trace(r_mat))

        self._times.append(float(t))
        self._ensembles.append(ens)
        self._rows.append(row)

    def build(self) -> Trajectory:
        keys = self._rows[0].keys() if self._rows else ()
        diagnostics = {
            key: np.array([row[key] for row in self._rows]) for key in keys
        }
        return Trajectory(np.array(self._times), list(self._ensembles),
                          diagnostics)


def _aggregate(row: Dict[str, float], name: str, values: np.ndarray) -> None:
    row[f"{name}_mean"] = float(values.mean())
    row[f"{name}_min"] = float(values.min())
    row[f"{name}_max"] = float(values.max())
