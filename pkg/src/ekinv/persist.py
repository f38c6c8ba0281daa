"""Plain-text and binary persistence for experiment inputs.

Vectors go to single-column CSV so truth fields and noise realizations
are diffable; eigenpair sets go to npz.
"""
from __future__ import annotations

import os
from typing import Tuple

import numpy as np


def save_vector(path: str, vec: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for value in np.asarray(vec, dtype=float):
            fh.write(repr(float(value)) + "\n")


def load_vector(path: str) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return np.array([float(line) for line in fh if line.strip()])


def save_eigenpairs(path: str, eigenvalues: np.ndarray,
                    modes: np.ndarray) -> None:
    np.savez(path, eigenvalues=np.asarray(eigenvalues),
             modes=np.asarray(modes))


def load_eigenpairs(path: str) -> Tuple[np.ndarray, np.ndarray]:
    if not os.path.exists(path) and os.path.exists(path + ".npz"):
        path = path + ".npz"
    data = np.load(path)
    return data["eigenvalues"], data["modes"]
