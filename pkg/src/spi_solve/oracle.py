"""Reference least-squares solutions through a full SVD.

Shares no code with :mod:`spi_solve.solver`; it exists to check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, OracleError

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray  # (m, k)
    sigma: np.ndarray  # (k,), non-increasing
    V: np.ndarray  # (n, k)

    def rank(self, rank_tol: float | None = None) -> int:
        return int(np.count_nonzero(self.sigma > _cutoff(self, rank_tol)))


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ContractError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    return A


def svd(A) -> SvdResult:
    """Thin SVD ``A = U diag(sigma) V^*`` with ``k = min(m, n)``."""
    A = _check_matrix(A)
    try:
        U, sigma, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"SVD did not converge: {exc}") from exc
    return SvdResult(U, sigma, Vh.conj().T)


def _cutoff(res: SvdResult, rank_tol: float | None) -> float:
    m, n = res.U.shape[0], res.V.shape[0]
    if rank_tol is None:
        rank_tol = max(m, n) * _EPS
    smax = res.sigma[0] if res.sigma.size else 0.0
    return rank_tol * smax


def pinv_solve(A, b, rank_tol: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution ``V_r diag(1/sigma_r) U_r^* b``.

    Singular values at or below ``rank_tol * sigma_max`` are discarded;
    ``rank_tol`` defaults to ``max(m, n) * eps``.
    """
    A = _check_matrix(A)
    b = np.asarray(b)
    if b.ndim != 1 or b.shape[0] != A.shape[0]:
        raise ContractError(f"b has shape {b.shape}, A has {A.shape[0]} rows")
    res = svd(A)
    keep = res.sigma > _cutoff(res, rank_tol)
    coeffs = (res.U[:, keep].conj().T @ b) / res.sigma[keep]
    return res.V[:, keep] @ coeffs


def pinv(A, rank_tol: float | None = None) -> np.ndarray:
    """Explicit pseudoinverse, for small property checks."""
    res = svd(_check_matrix(A))
    keep = res.sigma > _cutoff(res, rank_tol)
    return (res.V[:, keep] / res.sigma[keep]) @ res.U[:, keep].conj().T


def range_complement(A, g, rank_tol: float | None = None) -> np.ndarray:
    """Component of ``g`` orthogonal to ``range(A)``."""
    res = svd(_check_matrix(A))
    Ur = res.U[:, res.sigma > _cutoff(res, rank_tol)]
    g = np.asarray(g)
    w = g - Ur @ (Ur.conj().T @ g)
    # second pass removes the rounding residue of the first projection
    return w - Ur @ (Ur.conj().T @ w)
