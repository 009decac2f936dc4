"""
Symmetric eigensolver (cyclic Jacobi rotations).
"""

import numpy as np

from typing import Tuple

from numerics.tensor import Tensor
from utils.errors import ConvergenceError, DimensionError
from utils.logging_config import get_logger

logger = get_logger(__name__)

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-10


def _off_diagonal_norm(a: Tensor) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def sym_eig(a: Tensor, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS) -> Tuple[Tensor, Tensor]:
    """
    Eigen-decomposition of a symmetric matrix.

    The input is symmetrized as (a + a.T) / 2. Rotations sweep the upper
    triangle in row order until the off-diagonal Frobenius norm drops to
    ``tol * max(1, ||a||_F)``.

    Args:
        a: Square matrix, symmetric within roundoff
        tol: Off-diagonal stopping threshold
        max_sweeps: Sweep budget

    Returns:
        (eigenvalues in descending order, eigenvectors as columns). Each
        eigenvector's largest-magnitude entry is positive.

    Raises:
        DimensionError: If ``a`` is not square
        ConvergenceError: If the sweep budget is exhausted
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"sym_eig expects a square matrix, got {a.shape}")
    n = a.shape[0]
    work = 0.5 * (a + a.T)
    vectors = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(work)))

    converged = False
    for sweep in range(max_sweeps):
        off = _off_diagonal_norm(work)
        if off <= threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q

                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
        logger.debug(f"Jacobi sweep {sweep + 1}: off-diagonal norm {off:.3e}")
    else:
        converged = _off_diagonal_norm(work) <= threshold

    if not converged:
        raise ConvergenceError(f"Jacobi eigensolver did not converge within {max_sweeps} sweeps")

    eigenvalues = np.diag(work).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]

    # deterministic sign: largest-magnitude entry positive
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[pivots, np.arange(n)] < 0.0, -1.0, 1.0)
    vectors = vectors * signs
    return eigenvalues, vectors
