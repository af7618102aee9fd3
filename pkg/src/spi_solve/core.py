"""Dense storage conventions and the matrix-vector kernels.

Matrices are plain :class:`numpy.ndarray` objects in column-major (Fortran)
order with dtype ``float64`` or ``complex128``; vectors are 1-D arrays of the
same dtypes. Real data is never promoted to complex storage.

Inner products follow ``<v1, v2> = v1^* v2`` (conjugate-linear in the first
argument), so ``<A[:, i], b> = (A^* b)[i]``.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ContractError

REAL = np.dtype(np.float64)
COMPLEX = np.dtype(np.complex128)

THREADS_ENV = "SPI_SOLVE_THREADS"


def _field_dtype(arr: np.ndarray) -> np.dtype:
    return COMPLEX if np.iscomplexobj(arr) else REAL


def as_matrix(a, *, copy: bool = False, check_finite: bool = True) -> np.ndarray:
    """Return ``a`` as a column-major ``float64``/``complex128`` 2-D array.

    Raises :class:`ContractError` for anything that is not a non-empty 2-D
    array of finite numbers. ``check_finite=False`` skips the O(mn) scan for
    callers that detect non-finite input from their outputs instead.
    """
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ContractError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractError(f"matrix dimensions must be positive, got {arr.shape}")
    if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == np.bool_):
        raise ContractError(f"unsupported matrix dtype {arr.dtype}")
    out = np.array(arr, dtype=_field_dtype(arr), order="F", copy=copy or None)
    if check_finite and not np.all(np.isfinite(out)):
        raise ContractError("matrix contains NaN or Inf entries")
    return out


def as_vector(v, *, copy: bool = False) -> np.ndarray:
    """Return ``v`` as a 1-D ``float64``/``complex128`` array.

    Column vectors of shape ``(k, 1)`` are flattened.
    """
    arr = np.asarray(v)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ContractError(f"expected a 1-D vector, got shape {arr.shape}")
    if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == np.bool_):
        raise ContractError(f"unsupported vector dtype {arr.dtype}")
    out = np.array(arr, dtype=_field_dtype(arr), copy=copy or None)
    if not np.all(np.isfinite(out)):
        raise ContractError("vector contains NaN or Inf entries")
    return out


def matvec(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return ``A @ v``.

    A real matrix applied to a complex vector is evaluated as two real
    products so that ``A`` is never copied into complex storage.
    """
    if v.ndim != 1 or v.shape[0] != A.shape[1]:
        raise ContractError(
            f"matvec: vector length {v.shape} does not match matrix columns {A.shape[1]}"
        )
    if np.iscomplexobj(v) and not np.iscomplexobj(A):
        return A @ v.real + 1j * (A @ v.imag)
    return A @ v


def adjoint_matvec(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return ``A^* @ v`` without forming the conjugate transpose.

    Entry ``j`` is the column dot product ``<A[:, j], v>``. For complex ``A``
    this is evaluated as ``conj(v^* A)``, which reads ``A`` in place.
    """
    if v.ndim != 1 or v.shape[0] != A.shape[0]:
        raise ContractError(
            f"adjoint_matvec: vector length {v.shape} does not match matrix rows {A.shape[0]}"
        )
    if np.iscomplexobj(A):
        return np.conj(np.conj(v) @ A)
    if np.iscomplexobj(v):
        return v.real @ A + 1j * (v.imag @ A)
    return v @ A


def frobenius_norm(A: np.ndarray) -> float:
    """Return ``sqrt(sum |a_ij|^2)``."""
    return float(np.linalg.norm(A, "fro")) if A.size else 0.0


def max_column_norm(A: np.ndarray) -> float:
    """Largest 2-norm over the columns of ``A`` (one pass, no temporaries)."""
    # rows of the C-contiguous transpose are the columns of A; complex rows
    # are reinterpreted as interleaved (re, im) float64 pairs
    At = np.ascontiguousarray(A.T)
    if np.iscomplexobj(At):
        At = At.view(np.float64)
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", At, At))))


def column(A: np.ndarray, i: int) -> np.ndarray:
    """Contiguous view of column ``i``."""
    return A[:, i]


def thread_limit() -> int | None:
    """Thread cap requested through ``SPI_SOLVE_THREADS``.

    Returns ``None`` when the variable is unset (library default). ``0`` means
    sequential deterministic mode and is reported as ``1``.
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ContractError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ContractError(f"{THREADS_ENV} must be >= 0, got {value}")
    return max(value, 1)


def apply_thread_limit():
    """Cap BLAS threads according to ``SPI_SOLVE_THREADS``.

    Returns the ``threadpoolctl`` controller (keep a reference for the
    duration of the limit) or ``None`` when no cap is requested. With more
    than one BLAS thread results are no longer guaranteed to be bitwise
    reproducible across thread counts.
    """
    limit = thread_limit()
    if limit is None:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)
