"""Sparse storage and linear solves.

Matrices are ``scipy.sparse.csr_matrix`` with canonical (sorted,
duplicate-free) indices. The solver is SuperLU with partial pivoting, which
also copes with the indefinite saddle-point systems of the mixed scheme,
followed by a few steps of iterative refinement.

Rows and columns are equilibrated first. Jacobians of dry regions carry
factors of Kr that can be twenty orders of magnitude below the rest, and
an unscaled residual bound is then neither attainable nor meaningful. The
accuracy test ``||D_r (A x - b)|| <= rel_tol ||D_r b||`` is applied to the
row-scaled system, with ``D_r`` scaling each row of ``A D_c`` to unit
maximum.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla


class LinearSolveError(RuntimeError):
    pass


def as_csr(A) -> sps.csr_matrix:
    """Square CSR matrix with sorted, summed-up column indices."""
    A = sps.csr_matrix(A, dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    A.sum_duplicates()
    A.sort_indices()
    return A


def matvec(A, v: np.ndarray) -> np.ndarray:
    return A @ np.asarray(v, dtype=float)


def transpose_matvec(A, v: np.ndarray) -> np.ndarray:
    return A.T @ np.asarray(v, dtype=float)


def equilibrate(A: sps.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Row and column scalings ``r``, ``c`` giving diag(r) A diag(c) unit row and column maxima."""
    r = abs(A).max(axis=1).toarray().ravel()
    if np.any(r == 0.0):
        raise LinearSolveError("matrix has an empty row")
    r = 1.0 / r
    c = abs(sps.diags(r) @ A).max(axis=0).toarray().ravel()
    if np.any(c == 0.0):
        raise LinearSolveError("matrix has an empty column")
    return r, 1.0 / c


def solve(A, b: np.ndarray, rel_tol: float = 1e-10, refinements: int = 3) -> np.ndarray:
    """Solve ``A x = b`` to the (equilibrated) relative residual ``rel_tol``.

    Raises :class:`LinearSolveError` when the factorization breaks down or
    the residual bound cannot be met.
    """
    A = as_csr(A)
    b = np.asarray(b, dtype=float)
    if b.shape != (A.shape[0],):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({A.shape[0]},)")
    if not np.all(np.isfinite(A.data)) or not np.all(np.isfinite(b)):
        raise LinearSolveError("non-finite entries in linear system")
    if not np.any(b):
        return np.zeros_like(b)
    r, c = equilibrate(A)
    As = (sps.diags(r) @ A @ sps.diags(c)).tocsc()
    bs = r * b
    bnorm = np.linalg.norm(bs)
    try:
        lu = spla.splu(As)
    except RuntimeError as exc:  # "Factor is exactly singular"
        raise LinearSolveError(str(exc)) from exc
    y = lu.solve(bs)
    res = bs - As @ y
    rnorm = np.linalg.norm(res)
    for _ in range(refinements):
        if not np.isfinite(rnorm) or rnorm <= rel_tol * bnorm:
            break
        y = y + lu.solve(res)
        res = bs - As @ y
        rnorm = np.linalg.norm(res)
    if not np.isfinite(rnorm) or rnorm > rel_tol * bnorm:
        raise LinearSolveError(f"relative residual {rnorm / bnorm:.3e} exceeds {rel_tol:.1e}")
    return c * y
