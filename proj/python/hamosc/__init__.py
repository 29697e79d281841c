"""Oscillation criteria and simulations for linear matrix Hamiltonian systems."""

from ._core import (
    CRITERIA,
    Expr,
    MatrixRiccatiPath,
    SystemSpec,
    Trajectory,
    __version__,
    check,
    detect_zeros,
    empirical_oracle,
    hermitian_sqrt,
    integrate_hamiltonian,
    integrate_matrix_riccati,
    pseudoinverse,
)

__all__ = [
    "CRITERIA",
    "Expr",
    "MatrixRiccatiPath",
    "SystemSpec",
    "Trajectory",
    "__version__",
    "check",
    "detect_zeros",
    "empirical_oracle",
    "hermitian_sqrt",
    "integrate_hamiltonian",
    "integrate_matrix_riccati",
    "pseudoinverse",
]
