"""Random matrices whose non-zero singular values are all equal.

``A = s * U_r V_r^*`` where ``U_r`` (m x r) and ``V_r`` (n x r) have Haar
distributed orthonormal columns obtained from phase-corrected QR factors of
standard Gaussian matrices.

Random streams are ``numpy.random.Generator(PCG64(seed))`` and normal variates
come from ``Generator.standard_normal`` (ziggurat). Matrices are filled in
column-major order; a complex Gaussian matrix is ``X_R + i X_I`` with ``X_R``
drawn in full before ``X_I``. The stream for a system is consumed in the
order: left factor, right factor, then the vector ``t`` in ``b = A t``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from . import core
from .errors import ContractError, DegenerateInputError
from .solver import BlockSystem

Field = Literal["real", "complex"]

RNG_ID = f"numpy-{np.__version__}/PCG64/standard_normal-ziggurat/column-major"

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class GeneratorSpec:
    m: int
    n: int
    r: int
    s: float
    field: Field = "real"
    seed: int = 0
    full_qr: bool = False

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if not 1 <= self.r <= min(self.m, self.n):
            raise ContractError(f"need 1 <= r <= min(m, n), got r={self.r}")
        if not self.s > 0:
            raise ContractError(f"s must be positive, got {self.s}")
        if self.field not in ("real", "complex"):
            raise ContractError(f"field must be 'real' or 'complex', got {self.field!r}")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


def make_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for trial/block ``path`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([seed, *path])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gaussian_matrix(rows: int, cols: int, field: Field, stream: np.random.Generator) -> np.ndarray:
    """I.i.d. standard normal matrix (real and imaginary parts each N(0, 1))."""
    if rows < 1 or cols < 1:
        raise ContractError(f"dimensions must be positive, got ({rows}, {cols})")
    # drawing (cols, rows) row-major and transposing fills columns in order
    X = stream.standard_normal((cols, rows)).T
    if field == "complex":
        X = X + 1j * stream.standard_normal((cols, rows)).T
    return np.asfortranarray(X)


def gaussian_vector(n: int, field: Field, stream: np.random.Generator) -> np.ndarray:
    t = stream.standard_normal(n)
    if field == "complex":
        t = t + 1j * stream.standard_normal(n)
    return t


def haar_q_factor(X: np.ndarray, return_r: bool = False):
    """Orthonormal Q-factor of ``X`` with columns rotated so ``diag(R) > 0``.

    Householder QR (LAPACK ``geqrf``) followed by multiplying column ``i`` of
    ``Q`` by the phase of ``R[i, i]``. For Gaussian ``X`` the result is Haar
    distributed. With ``return_r`` the phase-corrected ``R`` is returned too.
    """
    X = core.as_matrix(X)
    if X.shape[0] < X.shape[1]:
        raise ContractError(f"need rows >= cols, got {X.shape}")
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.diagonal(R)
    mag = np.abs(diag)
    floor = _EPS * max(X.shape) * core.frobenius_norm(X)
    if np.any(mag <= floor):
        raise DegenerateInputError(
            f"X is numerically rank deficient (min |R_ii| = {mag.min():.3e})"
        )
    phase = diag / mag
    Q = np.asfortranarray(Q * phase)
    if return_r:
        return Q, np.conj(phase)[:, None] * R
    return Q


def generate_spi(spec: GeneratorSpec, stream: np.random.Generator | None = None) -> np.ndarray:
    """Rank ``r`` matrix of shape ``(m, n)`` with all non-zero singular values ``s``.

    By default only ``m x r`` and ``n x r`` Gaussian matrices are factored;
    ``spec.full_qr`` builds the full ``m x m`` and ``n x n`` orthogonal
    factors and keeps their leading ``r`` columns.
    """
    if stream is None:
        stream = make_stream(spec.seed)
    kl = spec.m if spec.full_qr else spec.r
    kr = spec.n if spec.full_qr else spec.r
    U = haar_q_factor(gaussian_matrix(spec.m, kl, spec.field, stream))[:, : spec.r]
    V = haar_q_factor(gaussian_matrix(spec.n, kr, spec.field, stream))[:, : spec.r]
    return np.asfortranarray(spec.s * (U @ V.conj().T))


def generate_system(spec: GeneratorSpec):
    """Return ``(A, t, b)`` with ``b = A t`` and Gaussian ``t``, all from one stream."""
    stream = make_stream(spec.seed)
    A = generate_spi(spec, stream)
    t = gaussian_vector(spec.n, spec.field, stream)
    return A, t, core.matvec(A, t)


def generate_block_diagonal(specs):
    """Assemble a block-diagonal matrix from per-block generator specs.

    Returns ``(A, system)``: the dense matrix with exact zeros off the blocks
    and the corresponding :class:`BlockSystem`.
    """
    specs = list(specs)
    if not specs:
        raise ContractError("block generator spec list is empty")
    system = BlockSystem.from_blocks(generate_spi(sp) for sp in specs)
    return system.assemble(), system
