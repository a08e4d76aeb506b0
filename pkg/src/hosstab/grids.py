"""Uniform spatial grid, finite-difference operators and discrete norms.

The semi-discrete operator is ``A = beta D3 - i alpha D2 + delta D1 + r I``
with the centered first/second differences and the right-biased third
difference ``D3 = Dplus Dplus Dminus`` (stable for beta > 0; its symbol
carries an O(h) dissipative real part, which is a property of the scheme,
not a bug).  Boundary conditions enter as constraint rows replacing the
PDE rows nearest the boundary: node 1 (left Dirichlet) plus, for family
A, nodes M-1 (one-sided Neumann) and M (right Dirichlet); for family B,
nodes M-1 (one-sided second derivative) and M (one-sided Neumann).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kernels import PhysicsParams


@dataclass(frozen=True)
class Grid:
    """M uniform nodes x_m = (m-1) h on [0, L], h = L/(M-1)."""

    M: int
    L: float
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 5:
            raise ConfigError("need at least M = 5 nodes (stencils use 4 trailing nodes)")
        if self.L <= 0:
            raise ConfigError("L must be positive")
        object.__setattr__(self, "h", self.L / (self.M - 1))
        object.__setattr__(self, "nodes", np.linspace(0.0, self.L, self.M))


@dataclass
class StateVector:
    """Complex grid function with its grid and boundary-family tag."""

    values: np.ndarray
    grid: Grid
    bc_family: str = "A"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.M,):
            raise ConfigError(f"state length {v.shape} does not match grid M={self.grid.M}")
        self.values = v

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.grid, self.bc_family)


def bc_row_indices(M: int) -> tuple[int, int, int]:
    """0-based indices of the constraint rows (nodes 1, M-1, M)."""
    return (0, M - 2, M - 1)


def bc_rows(grid: Grid, family: str) -> dict[int, np.ndarray]:
    """Constraint row vectors, keyed by the row index they replace.

    Each row c encodes the homogeneous condition c . w = 0.
    """
    M, h = grid.M, grid.h
    rows: dict[int, np.ndarray] = {}
    e0 = np.zeros(M)
    e0[0] = 1.0
    rows[0] = e0
    neumann = np.zeros(M)
    neumann[M - 3 :] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    if family == "A":
        eM = np.zeros(M)
        eM[M - 1] = 1.0
        rows[M - 1] = eM
        rows[M - 2] = neumann
    elif family == "B":
        rows[M - 1] = neumann
        second = np.zeros(M)
        second[M - 4 :] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2
        rows[M - 2] = second
    else:
        raise ConfigError(f"unknown bc family {family!r}")
    return rows


def build_operator(grid: Grid, params: PhysicsParams, include_damping: bool = True,
                   family: str | None = None) -> np.ndarray:
    """Assemble the M x M semi-discrete operator with embedded constraint rows.

    Interior rows m = 2..M-2 hold the finite-difference stencil of
    ``beta u_xxx - i alpha u_xx + delta u_x (+ r u)``; rows 1, M-1 and M
    are replaced by the boundary constraint rows of the requested family.
    """
    family = family or params.bc_family
    M, h = grid.M, grid.h
    A = np.zeros((M, M), dtype=complex)
    b, a, d, r = params.beta, params.alpha, params.delta, params.r
    c3 = b / h**3
    c2 = -1j * a / h**2
    c1 = d / (2.0 * h)
    for m in range(1, M - 2):
        # D3 = Dplus Dplus Dminus: (-1, 3, -3, 1) on (m-1 .. m+2)
        A[m, m - 1] += -c3
        A[m, m] += 3.0 * c3
        A[m, m + 1] += -3.0 * c3
        A[m, m + 2] += c3
        # D2 = Dplus Dminus: (1, -2, 1)
        A[m, m - 1] += c2
        A[m, m] += -2.0 * c2
        A[m, m + 1] += c2
        # D1 = (Dplus + Dminus)/2: (-1, 0, 1)/2
        A[m, m - 1] += -c1
        A[m, m + 1] += c1
        if include_damping:
            A[m, m] += r
    for idx, row in bc_rows(grid, family).items():
        A[idx, :] = row
    return A


def trace_uxx_L(state: StateVector) -> complex:
    """One-sided second-order approximation of d2/dx2 at x = L."""
    return trace_uxx_L_values(state.values, state.grid.h)


def trace_uxx_L_values(values: np.ndarray, h: float) -> complex:
    if values.shape[0] < 4:
        raise ConfigError("trace stencil needs at least 4 nodes")
    v = values
    return complex((-v[-4] + 4.0 * v[-3] - 5.0 * v[-2] + 2.0 * v[-1]) / h**2)


def l2_norm(state: StateVector) -> float:
    """Composite-trapezoid discrete L2 norm."""
    return l2_norm_values(state.values, state.grid.h)


def l2_norm_values(values: np.ndarray, h: float) -> float:
    sq = np.abs(values) ** 2
    return float(np.sqrt(h * (np.sum(sq) - 0.5 * sq[0] - 0.5 * sq[-1])))


def bc_residual(state: StateVector) -> float:
    """Max residual of the family's constraint rows applied to the state."""
    rows = bc_rows(state.grid, state.bc_family)
    return float(max(abs(np.dot(row, state.values)) for row in rows.values()))
