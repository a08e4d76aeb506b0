"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
KernelError -> 3, SolverError -> 4.
"""


class HosstabError(Exception):
    """Base class for all package errors."""


class ConfigError(HosstabError):
    """Invalid parameters, presets or configuration files."""


class KernelError(HosstabError):
    """Kernel iteration failed (non-convergence, degree cap exceeded)."""


class SolverError(HosstabError):
    """Time stepping failed (inner iteration non-convergence, singular system)."""


class DomainError(HosstabError):
    """Evaluation point outside the closed triangle 0 <= x <= y <= L."""
