"""Exception hierarchy shared by the library and the command line frontend."""


class SpiError(Exception):
    """Base class for every error raised by :mod:`spi_solve`."""

    exit_code = 1


class ContractError(SpiError, ValueError):
    """A precondition on shapes, lengths or parameter ranges was violated."""

    exit_code = 3


class FormatError(SpiError, ValueError):
    """A Matrix Market file could not be parsed."""

    exit_code = 4

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class OracleError(SpiError, RuntimeError):
    """The reference SVD failed to converge."""

    exit_code = 6


class UndefinedScaleError(SpiError, ArithmeticError):
    """The scale cannot be estimated because ``A* b`` vanishes."""

    exit_code = 7


class DegenerateInputError(SpiError, ArithmeticError):
    """QR input is numerically rank deficient."""

    exit_code = 7


class InconclusiveVerificationError(SpiError, RuntimeError):
    """Every probe landed (numerically) in the null space of a non-zero matrix."""

    exit_code = 8
