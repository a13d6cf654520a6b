"""Small dense normal-equation systems.

Both fits reduce to a k x k symmetric system (k <= 16). Raw monomial
bases make these badly scaled (condition numbers near 1e12 for a cubic
in temperature), so the solver uses Gauss elimination with scaled row
pivoting rather than a Cholesky factorization.
"""
import logging
from dataclasses import dataclass

import numpy as np

from errormodel.errors import SingularMatrixError

logger = logging.getLogger(__name__)

MAX_ORDER = 16
SINGULAR_TOL = 1e-12
# scaled pivots below this are reported, not rejected
NEAR_SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class NormalEquations:
    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        rhs = np.array(self.rhs, dtype=float).reshape(-1)
        k = rhs.shape[0]
        if matrix.shape != (k, k):
            raise ValueError(f"matrix shape {matrix.shape} does not match rhs length {k}")
        if not 1 <= k <= MAX_ORDER:
            raise ValueError(f"order {k} outside 1..{MAX_ORDER}")
        matrix.setflags(write=False)
        rhs.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'rhs', rhs)

    @property
    def k(self):
        return self.rhs.shape[0]

    @classmethod
    def assemble(cls, design, observations):
        """Form (B^T B) x = B^T y from a design matrix B (n x k).

        Only the upper triangle is summed; the lower one is its mirror,
        so the matrix is symmetric bit for bit.
        """
        design = np.asarray(design, dtype=float)
        observations = np.asarray(observations, dtype=float)
        if design.ndim != 2 or design.shape[0] != observations.shape[0]:
            raise ValueError("design matrix and observations disagree in length")
        k = design.shape[1]
        matrix = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                matrix[i, j] = np.sum(design[:, i] * design[:, j])
                matrix[j, i] = matrix[i, j]
        rhs = np.array([np.sum(design[:, i] * observations) for i in range(k)])
        return cls(matrix=matrix, rhs=rhs)

    def as_lists(self):
        return self.matrix.tolist(), self.rhs.tolist()


def solve(eq, tol=SINGULAR_TOL, hint=None):
    """Solve the normal equations by scaled partial pivoting.

    A pivot smaller than ``tol`` times the largest initial pivot raises
    SingularMatrixError carrying the (0-based) elimination step.
    """
    a = eq.matrix.copy()
    b = eq.rhs.copy()
    n = eq.k

    scale = np.max(np.abs(a), axis=1)
    if np.any(scale == 0.0):
        row = int(np.argmin(scale))
        raise SingularMatrixError(f"matrix is singular: row {row + 1} is zero", pivot=row, hint=hint)
    threshold = tol * np.max(np.abs(np.diag(a)))
    smallest = np.inf

    for k in range(n):
        p = int(np.argmax(np.abs(a[k:, k]) / scale[k:])) + k
        if abs(a[p, k]) <= threshold:
            raise SingularMatrixError(
                f"matrix is singular at working precision: pivot {k + 1} is {a[p, k]:.3e}",
                pivot=k, hint=hint,
            )
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        smallest = min(smallest, abs(a[k, k]) / scale[k])
        for i in range(k + 1, n):
            if a[i, k] != 0.0:
                lam = a[i, k] / a[k, k]
                a[i, k + 1:] -= lam * a[k, k + 1:]
                a[i, k] = 0.0
                b[i] -= lam * b[k]

    if smallest < NEAR_SINGULAR_TOL:
        logger.warning(f"Near-singular {n}x{n} system: smallest scaled pivot {smallest:.3e}")

    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - np.dot(a[k, k + 1:], x[k + 1:])) / a[k, k]
    return x


def relative_residual(eq, x):
    """max |A x - b| / max |b|"""
    denominator = np.max(np.abs(eq.rhs))
    residual = np.max(np.abs(eq.matrix @ x - eq.rhs))
    return residual / denominator if denominator else residual
