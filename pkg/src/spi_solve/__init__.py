"""O(mn) least-squares solver for scaled partial-isometric linear systems."""

from .core import adjoint_matvec, frobenius_norm, matvec
from .errors import (
    ContractError,
    DegenerateInputError,
    FormatError,
    InconclusiveVerificationError,
    OracleError,
    SpiError,
    UndefinedScaleError,
)
from .generator import GeneratorSpec, generate_block_diagonal, generate_spi, generate_system
from .solver import (
    BlockSolveReport,
    BlockSystem,
    SpiSolveReport,
    VerifyReport,
    normalize_sign_decomposition,
    scale_estimate,
    solve_block_diagonal,
    solve_partial_isometry,
    solve_spi,
    verify_spi,
)

__version__ = "0.1.0"
