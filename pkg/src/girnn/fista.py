"""FISTA solver for l1-regularized least squares on speckle measurements.

Solves min_x 0.5*||Ax - b||^2 + lambda*||x||_1 where each row of A is a
flattened illumination pattern and b holds the bucket values. The sparsity
basis is the pixel basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .correlation import normalize_minmax
from .errors import NumericalError
from .imaging import ImageTensor, MeasurementSequence


@dataclass(frozen=True)
class CsProblem:
    """One l1 least-squares instance: rows of A, observations b, and knobs."""

    sensing_rows: np.ndarray
    observations: np.ndarray
    height: int
    width: int
    lam: float = 0.0
    max_iterations: int = 500
    tolerance: float = 1e-6

    def __post_init__(self):
        A = np.asarray(self.sensing_rows, dtype=np.float64)
        b = np.asarray(self.observations, dtype=np.float64)
        if A.ndim != 2 or A.size == 0:
            raise ValueError("sensing matrix must be non-empty 2-D")
        if A.shape[1] != self.height * self.width:
            raise ValueError(
                f"row length {A.shape[1]} != pixel count {self.height * self.width}"
            )
        if b.shape != (A.shape[0],):
            raise ValueError(f"need {A.shape[0]} observations, got shape {b.shape}")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        object.__setattr__(self, "sensing_rows", A)
        object.__setattr__(self, "observations", b)

    @staticmethod
    def from_measurements(
        measurements: MeasurementSequence,
        lam: float | None = None,
        max_iterations: int = 500,
        tolerance: float = 1e-6,
    ) -> "CsProblem":
        """Build the instance from measurements; default lambda = 0.01*max|A^T b|."""
        stack = measurements.speckles.stack
        n = stack.shape[0]
        A = stack.reshape(n, -1)
        b = measurements.buckets
        if lam is None:
            lam = 0.01 * float(np.abs(A.T @ b).max())
        return CsProblem(
            A, b, stack.shape[1], stack.shape[2],
            lam=lam, max_iterations=max_iterations, tolerance=tolerance,
        )


class FistaResult(NamedTuple):
    image: ImageTensor
    iterations: int
    objective: float
    raw: np.ndarray


def soft_threshold(v: np.ndarray, theta: float) -> np.ndarray:
    """Componentwise shrinkage sign(v)*max(|v|-theta, 0)."""
    if theta < 0:
        raise ValueError("threshold must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def lipschitz_estimate(sensing_rows: np.ndarray, min_iterations: int = 30) -> float:
    """Upper estimate of the top eigenvalue of A^T A by power iteration.

    Runs at least ``min_iterations`` rounds or until the Rayleigh quotient
    settles below 1e-6 relative change, then pads by a 1.01 safety factor.
    An all-zero matrix returns the floor constant 1.0.
    """
    A = np.asarray(sensing_rows, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("sensing matrix must be non-empty 2-D")
    if not np.any(A):
        return 1.0
    rng = np.random.Generator(np.random.PCG64(0))
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    eig = 0.0
    for it in range(max(min_iterations, 1000)):
        w = A.T @ (A @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 1.0
        new_eig = float(v @ w)
        v = w / norm
        if it + 1 >= min_iterations and abs(new_eig - eig) <= 1e-6 * abs(new_eig):
            eig = new_eig
            break
        eig = new_eig
    return 1.01 * eig


def fista_reconstruct(problem: CsProblem) -> FistaResult:
    """Accelerated proximal gradient from x0 = 0.

    Gradient step 1/L, shrink by lambda/L, momentum t_{k+1} = (1+sqrt(1+4t_k^2))/2.
    Stops at max_iterations or when the relative change of x drops below the
    problem tolerance. The returned image is min-max normalized.
    """
    A = problem.sensing_rows
    b = problem.observations
    L = lipschitz_estimate(A)
    step = 1.0 / L
    shrink = problem.lam / L

    x = np.zeros(A.shape[1])
    y = x.copy()
    t = 1.0
    iterations = 0
    for k in range(problem.max_iterations):
        grad = A.T @ (A @ y - b)
        x_new = soft_threshold(y - step * grad, shrink)
        if not np.all(np.isfinite(x_new)):
            raise NumericalError(f"non-finite iterate at iteration {k + 1}")
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        change = np.linalg.norm(x_new - x)
        scale = np.linalg.norm(x_new)
        x, t = x_new, t_new
        iterations = k + 1
        if change <= problem.tolerance * max(scale, 1e-30):
            break

    residual = A @ x - b
    objective = 0.5 * float(residual @ residual) + problem.lam * float(np.abs(x).sum())
    image = normalize_minmax(x.reshape(problem.height, problem.width))
    return FistaResult(image=image, iterations=iterations, objective=objective, raw=x)
