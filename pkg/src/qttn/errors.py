"""Exception types raised across the package."""


class TTNError(Exception):
    """Base class for all package errors."""


class ShapeError(TTNError, ValueError):
    """Incompatible dimensions, invalid permutation or non-factorizable split."""


class PrecisionError(TTNError, TypeError):
    """Mixed precisions in one operation, or a lossy complex-to-real conversion."""


class NumericError(TTNError, ArithmeticError):
    """Non-finite values encountered in a tensor or a decomposition."""


class ChargeError(TTNError, ValueError):
    """Symmetry sectors do not match or a block violates charge conservation."""


class TopologyError(TTNError, ValueError):
    """Unsupported tree size or an invalid node reference."""


class SolverError(TTNError, RuntimeError):
    """The iterative eigensolver failed to produce a ground state."""
