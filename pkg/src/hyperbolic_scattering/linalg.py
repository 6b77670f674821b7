from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def perron_root(
    matrix: np.ndarray | sp.spmatrix,
    tol: float = 1e-13,
    max_iter: int = 20_000,
    start: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """
    Spectral radius and Perron vector of a nonnegative matrix.

    Power iteration on (A + I) so that imprimitive matrices still converge;
    the returned vector is normalized to unit l1 norm.
    """
    a = sp.csr_matrix(matrix)
    n = a.shape[0]
    if n == 0:
        return 0.0, np.zeros(0)
    shifted = a + sp.identity(n, format="csr")
    v = np.full(n, 1.0 / n) if start is None else np.abs(start) / np.abs(start).sum()
    rho = 0.0
    for _ in range(max_iter):
        w = shifted @ v
        total = float(w.sum())
        if total <= 0.0:
            return 0.0, v
        w /= total
        new_rho = total - 1.0
        if np.max(np.abs(w - v)) <= tol and abs(new_rho - rho) <= tol * max(1.0, abs(new_rho)):
            return max(new_rho, 0.0), w
        v, rho = w, new_rho
    return max(rho, 0.0), v
