"""Direct least-squares solver for scaled partial isometries.

A matrix ``A`` is a scaled partial isometry when every non-zero singular value
equals the same ``alpha``; equivalently ``A A^* A = alpha^2 A``. For such
matrices the minimum-norm least-squares solution of ``A x = b`` needs only
three matrix-vector products::

    u = A^* b,   v = A u,   d = conj(A^* v)
    x_i = |u_i|^2 / d_i      (x_i = 0 when d_i vanishes)

``d_i`` is both the denominator ``(A^* b)^* A^* A[:, i]`` and the zero test
quantity ``b^* A A^* A[:, i]`` of the closed form: the two are the same scalar
because ``(A^* b)^* A^* = b^* A A^*``, and it is the conjugate of entry ``i``
of ``A^* A A^* b``. For a true scaled partial isometry
``d_i = alpha^2 conj(u_i)`` so the formula reduces to ``x = u / alpha^2``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import core
from .errors import ContractError, InconclusiveVerificationError, UndefinedScaleError

EPS = float(np.finfo(np.float64).eps)

DEFAULT_ZERO_TOL_FACTOR = 100.0
# relative size (vs. the RMS entry of u) below which an index is left out of
# the ratio-constancy diagnostic
RATIO_SUPPORT = 1e-2
# consistency above this marks the input as not a scaled partial isometry
CONSISTENCY_WARN = 1e-8
DEFAULT_PROBES = 8


@dataclass(frozen=True)
class SpiSolveReport:
    """Result of :func:`solve_spi`.

    ``alpha_sq`` is ``None`` when the scale is undefined (``A`` or ``A^* b``
    is zero); ``consistency`` is then ``None`` as well.
    """

    x: np.ndarray
    alpha_sq: float | None
    zeroed: frozenset[int]
    consistency: float | None

    @property
    def warning(self) -> str | None:
        if self.consistency is not None and self.consistency > CONSISTENCY_WARN:
            return (
                f"consistency {self.consistency:.3e} exceeds {CONSISTENCY_WARN:.0e}: "
                "matrix does not behave like a scaled partial isometry, "
                "x is not guaranteed to be the least-squares solution"
            )
        return None


@dataclass(frozen=True)
class BlockSolveReport:
    """Result of :func:`solve_block_diagonal`; ``alpha_sq`` holds one entry per block."""

    x: np.ndarray
    alpha_sq: tuple[float | None, ...]
    zeroed: frozenset[int]
    consistency: float | None
    blocks: tuple[SpiSolveReport, ...] = field(repr=False)

    @property
    def warning(self) -> str | None:
        msgs = [f"block {k}: {r.warning}" for k, r in enumerate(self.blocks) if r.warning]
        return "; ".join(msgs) or None


@dataclass(frozen=True)
class BlockSystem:
    """Block-diagonal matrix given by its diagonal blocks.

    ``row_offsets`` and ``col_offsets`` are prefix sums of the block shapes,
    starting at 0 and ending at the total size, so block ``k`` occupies rows
    ``row_offsets[k]:row_offsets[k + 1]``.
    """

    blocks: tuple[np.ndarray, ...]
    row_offsets: tuple[int, ...]
    col_offsets: tuple[int, ...]

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise ContractError("a block system needs at least one block")
        k = len(self.blocks)
        if len(self.row_offsets) != k + 1 or len(self.col_offsets) != k + 1:
            raise ContractError("offset lists must have one more entry than blocks")
        if self.row_offsets[0] != 0 or self.col_offsets[0] != 0:
            raise ContractError("offsets must start at 0")
        for i, blk in enumerate(self.blocks):
            mk = self.row_offsets[i + 1] - self.row_offsets[i]
            nk = self.col_offsets[i + 1] - self.col_offsets[i]
            if blk.ndim != 2 or blk.shape != (mk, nk) or mk < 1 or nk < 1:
                raise ContractError(
                    f"block {i} has shape {blk.shape}, offsets imply ({mk}, {nk})"
                )

    @classmethod
    def from_blocks(cls, blocks) -> "BlockSystem":
        mats = tuple(core.as_matrix(b) for b in blocks)
        rows = np.concatenate([[0], np.cumsum([b.shape[0] for b in mats])])
        cols = np.concatenate([[0], np.cumsum([b.shape[1] for b in mats])])
        return cls(mats, tuple(int(r) for r in rows), tuple(int(c) for c in cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self.row_offsets[-1], self.col_offsets[-1]

    def assemble(self) -> np.ndarray:
        dtype = np.result_type(*self.blocks)
        out = np.zeros(self.shape, dtype=dtype, order="F")
        for k, blk in enumerate(self.blocks):
            out[
                self.row_offsets[k] : self.row_offsets[k + 1],
                self.col_offsets[k] : self.col_offsets[k + 1],
            ] = blk
        return out


@dataclass(frozen=True)
class VerifyReport:
    alpha_sq: float
    max_probe_deviation: float
    probes: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_probe_deviation <= self.tol

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def scale_estimate(u: np.ndarray, d: np.ndarray) -> float:
    """Estimate ``alpha^2`` from ``u = A^* b`` and ``d = conj(A^* A A^* b)``.

    Uses ``Re(sum u_i d_i) / ||u||^2``; for a scaled partial isometry
    ``d_i = alpha^2 conj(u_i)`` and the sum is real.
    """
    u = np.asarray(u)
    d = np.asarray(d)
    if u.shape != d.shape or u.ndim != 1:
        raise ContractError(f"scale_estimate: shapes {u.shape} and {d.shape} differ")
    unorm_sq = float(np.vdot(u, u).real)
    if unorm_sq == 0.0:
        raise UndefinedScaleError("A^* b is zero: b is orthogonal to range(A)")
    return float(np.sum(u * d).real) / unorm_sq


def _pairing_imag(u: np.ndarray, d: np.ndarray) -> float:
    s = np.sum(u * d)
    mag = abs(s)
    return float(abs(s.imag) / mag) if mag > 0 else 0.0


def ratio_consistency(u: np.ndarray, d: np.ndarray, alpha_sq: float) -> float:
    """Max relative deviation of ``d_i / conj(u_i)`` from ``alpha_sq``.

    Only indices with ``|u_i|`` above ``RATIO_SUPPORT`` times the RMS entry of
    ``u`` take part; the relative imaginary part of the pairing sum is folded
    in as well.
    """
    n = u.shape[0]
    mag = np.abs(u)
    rms = float(np.linalg.norm(u)) / np.sqrt(n)
    keep = mag > RATIO_SUPPORT * rms
    dev = 0.0
    if np.any(keep) and alpha_sq != 0.0:
        ratios = d[keep] / np.conj(u[keep])
        dev = float(np.max(np.abs(ratios - alpha_sq)) / abs(alpha_sq))
    return max(dev, _pairing_imag(u, d))


def solve_spi(
    A: np.ndarray,
    b: np.ndarray,
    zero_tol_factor: float = DEFAULT_ZERO_TOL_FACTOR,
) -> SpiSolveReport:
    """Minimum-norm least-squares solution of ``A x = b`` for a scaled partial isometry.

    Parameters
    ----------
    A : ndarray, shape (m, n)
        Scaled partial isometry. Other matrices are accepted; the returned
        ``consistency`` then exposes the violation.
    b : ndarray, shape (m,)
        Right-hand side.
    zero_tol_factor : float
        Index ``i`` is zeroed when ``|d_i| <= zero_tol_factor * eps * ||A u|| *
        max_j ||A[:, j]||``. The threshold is invariant under scaling ``A`` or
        ``b``.

    Returns
    -------
    SpiSolveReport
    """
    A = core.as_matrix(A, check_finite=False)
    b = core.as_vector(b)
    if b.shape[0] != A.shape[0]:
        raise ContractError(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
    if zero_tol_factor < 0:
        raise ContractError("zero_tol_factor must be non-negative")

    u = core.adjoint_matvec(A, b)
    v = core.matvec(A, u)
    d = np.conj(core.adjoint_matvec(A, v))
    # NaN/Inf anywhere in A reaches every entry of d
    if not np.all(np.isfinite(d)):
        raise ContractError("non-finite values in A (or overflow in A A^* A)")

    n = A.shape[1]
    dtype = np.result_type(A, b)
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        # A = 0, b = 0 or b orthogonal to range(A): the minimum-norm solution is 0
        return SpiSolveReport(np.zeros(n, dtype=dtype), None, frozenset(range(n)), None)

    theta = zero_tol_factor * EPS * vnorm * core.max_column_norm(A)
    live = np.abs(d) > theta
    x = np.zeros(n, dtype=dtype)
    x[live] = (np.abs(u[live]) ** 2) / d[live]
    zeroed = frozenset(np.flatnonzero(~live).tolist())

    alpha_sq = scale_estimate(u, d)
    return SpiSolveReport(x, alpha_sq, zeroed, ratio_consistency(u, d, alpha_sq))


def solve_partial_isometry(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``A^* b``, the least-squares solution when ``A A^* A = A``.

    The premise is not checked; use :func:`verify_spi` first if unsure.
    """
    A = core.as_matrix(A)
    b = core.as_vector(b)
    if b.shape[0] != A.shape[0]:
        raise ContractError(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
    return core.adjoint_matvec(A, b)


def _block_workers() -> int:
    limit = core.thread_limit()
    if limit is None:
        return 1
    return min(limit, os.cpu_count() or 1)


def solve_block_diagonal(
    system: BlockSystem,
    b: np.ndarray,
    zero_tol_factor: float = DEFAULT_ZERO_TOL_FACTOR,
) -> BlockSolveReport:
    """Solve a block-diagonal system whose blocks are scaled partial isometries.

    Each block may carry its own scale. Blocks are solved independently with
    :func:`solve_spi` (concurrently when ``SPI_SOLVE_THREADS`` > 1) and the
    pieces are concatenated in block order.
    """
    b = core.as_vector(b)
    m, n = system.shape
    if b.shape[0] != m:
        raise ContractError(f"b has length {b.shape[0]}, block system has {m} rows")
    ro, co = system.row_offsets, system.col_offsets

    def one(k):
        return solve_spi(system.blocks[k], b[ro[k] : ro[k + 1]], zero_tol_factor)

    ks = range(len(system.blocks))
    workers = _block_workers()
    if workers > 1 and len(system.blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = tuple(pool.map(one, ks))
    else:
        reports = tuple(one(k) for k in ks)

    x = np.concatenate([r.x for r in reports])
    zeroed = frozenset(co[k] + i for k, r in enumerate(reports) for i in r.zeroed)
    cons = [r.consistency for r in reports if r.consistency is not None]
    return BlockSolveReport(
        x=x,
        alpha_sq=tuple(r.alpha_sq for r in reports),
        zeroed=zeroed,
        consistency=max(cons) if cons else None,
        blocks=reports,
    )


def _unit_probe(rng: np.random.Generator, n: int, complex_field: bool) -> np.ndarray:
    z = rng.standard_normal(n)
    if complex_field:
        z = z + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def verify_spi(
    A: np.ndarray,
    probes: int = DEFAULT_PROBES,
    tol: float = 1e-10,
    seed: int = 0,
    alpha_sq: float | None = None,
) -> VerifyReport:
    """Probe whether ``A A^* A = alpha^2 A``.

    For random unit vectors ``z`` the deviation
    ``||A A^* w - alpha^2 w|| / (alpha^2 ||w||)`` with ``w = A z`` is measured;
    each probe costs three matrix-vector products. ``alpha^2`` is taken from
    the first probe with ``w != 0`` unless supplied.

    Raises
    ------
    InconclusiveVerificationError
        If ``A`` is non-zero but ``A z`` vanished for every probe.
    """
    A = core.as_matrix(A)
    if probes < 1:
        raise ContractError("probes must be >= 1")
    if alpha_sq is not None and alpha_sq <= 0:
        raise ContractError("alpha_sq must be positive")
    fro = core.frobenius_norm(A)
    if fro == 0.0:
        return VerifyReport(0.0, 0.0, probes, tol)

    rng = np.random.default_rng(seed)
    complex_field = np.iscomplexobj(A)
    null_level = EPS * fro * np.sqrt(min(A.shape))
    pairs = []
    for _ in range(probes):
        w = core.matvec(A, _unit_probe(rng, A.shape[1], complex_field))
        wnorm = float(np.linalg.norm(w))
        if wnorm <= null_level:
            pairs.append((None, wnorm))
            continue
        y = core.matvec(A, core.adjoint_matvec(A, w))
        if alpha_sq is None:
            alpha_sq = scale_estimate(w, np.conj(y))
        pairs.append((np.linalg.norm(y - alpha_sq * w), wnorm))

    if alpha_sq is None:
        raise InconclusiveVerificationError(
            f"all {probes} probes fell in the null space of a non-zero matrix; "
            "increase the number of probes"
        )
    worst = 0.0
    for num, wnorm in pairs:
        if num is None:
            continue
        worst = max(worst, float(num) / (alpha_sq * wnorm))
    return VerifyReport(float(alpha_sq), worst, probes, tol)


def normalize_sign_decomposition(U: np.ndarray, D_diag: np.ndarray):
    """Flip signs so every non-zero diagonal entry has non-negative real part.

    For each ``i`` with ``Re(D_i) < 0`` column ``i`` of ``U`` and ``D_i`` are
    negated, which leaves ``U @ diag(D)`` unchanged. Returns new arrays.
    """
    U = core.as_matrix(U, copy=True)
    D = core.as_vector(D_diag, copy=True)
    if U.shape[1] != D.shape[0]:
        raise ContractError(f"U has {U.shape[1]} columns, D has {D.shape[0]} entries")
    flip = np.real(D) < 0
    U[:, flip] = -U[:, flip]
    D[flip] = -D[flip]
    return U, D
