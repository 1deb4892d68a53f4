"""Sparse SPD kernel: matrix-vector products and Jacobi-preconditioned CG."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


class SolveFailure(RuntimeError):
    """A linear solve missed its tolerance within the iteration cap."""


def spmv(a: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product with deterministic row-wise accumulation."""
    x = np.asarray(x, dtype=float)
    if a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix is {a.shape}, vector has {x.shape[0]}")
    return a @ x


def solve_spd(
    a: sp.csr_matrix,
    rhs: np.ndarray,
    rel_tol: float = 1e-12,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = rhs for symmetric positive definite A by preconditioned CG.

    Convergence means ||A x - rhs|| <= rel_tol * ||rhs|| in the true residual,
    which is recomputed whenever the recurrence residual passes.  The iteration
    cap is 10 times the dimension; hitting it is reported through the returned
    SolveReport, never hidden.  An optional x0 warm-starts the iteration.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"dimension mismatch: matrix is {a.shape}, rhs has {n}")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    diag = a.diagonal()
    if np.any(diag <= 0.0):
        raise ValueError("matrix has a non-positive diagonal entry; not SPD")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    cap = 10 * n
    iterations = 0
    # Outer loop restarts from the true residual, so recurrence drift can
    # never fake convergence.
    while True:
        r = rhs - a @ x
        res = float(np.linalg.norm(r)) / rhs_norm
        if res <= rel_tol or iterations >= cap:
            break
        z = inv_diag * r
        p = z.copy()
        rz = float(r @ z)
        inner_target = 0.5 * rel_tol * rhs_norm
        while iterations < cap:
            ap = a @ p
            pap = float(p @ ap)
            if pap <= 0.0:
                raise ValueError("matrix is not positive definite")
            step = rz / pap
            x += step * p
            r -= step * ap
            iterations += 1
            if np.linalg.norm(r) <= inner_target:
                break
            z = inv_diag * r
            rz_next = float(r @ z)
            p = z + (rz_next / rz) * p
            rz = rz_next
    return x, SolveReport(iterations, res, bool(res <= rel_tol))
