"""Discrete backstepping transform and its inversion.

``Upsilon`` discretizes ``(Upsilon_k u)(x) = int_x^L k(x, y) u(y) dy`` by
the composite trapezoidal rule on the grid nodes; its diagonal vanishes
because every kernel role satisfies ``k(x, x) = 0``, so ``I - Upsilon``
is unit upper triangular and the inverse transform is an exact
back-substitution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError
from .grids import Grid, StateVector, l2_norm_values
from .kernels import Kernel, kernel_eval, kernel_eval_grid


@dataclass
class TransformMatrix:
    """Trapezoid discretization of the Volterra transform for one kernel."""

    U: np.ndarray
    role: str
    grid: Grid

    @property
    def IU(self) -> np.ndarray:
        """I - Upsilon (unit upper triangular)."""
        return np.eye(self.grid.M) - self.U


def build_upsilon(kern: Kernel, grid: Grid) -> TransformMatrix:
    """Row i carries h * [1/2 k(x_i,x_i), k(x_i,x_{i+1}), ..., 1/2 k(x_i,x_M)].

    The last row is zero (empty integration range).
    """
    K = kernel_eval_grid(kern, grid.nodes)
    M = grid.M
    U = grid.h * K
    rows = np.arange(M)
    U[rows, rows] *= 0.5
    U[: M - 1, M - 1] *= 0.5
    U[M - 1, :] = 0.0
    return TransformMatrix(U=U, role=kern.role, grid=grid)


def _check_grid(T: TransformMatrix, state: StateVector) -> None:
    if state.grid is not T.grid and (state.grid.M != T.grid.M or state.grid.L != T.grid.L):
        raise ConfigError("state grid does not match transform grid")


def forward(T: TransformMatrix, u: StateVector) -> StateVector:
    """w = (I - Upsilon) u."""
    _check_grid(T, u)
    return StateVector(u.values - T.U @ u.values, u.grid, u.bc_family)


def invert(T: TransformMatrix, w: StateVector) -> StateVector:
    """Solve (I - Upsilon) u = w by back-substitution (exact, no pivoting)."""
    _check_grid(T, w)
    vals = solve_triangular(T.IU, w.values, lower=False, unit_diagonal=True)
    return StateVector(vals, w.grid, w.bc_family)


def invert_values(T: TransformMatrix, values: np.ndarray) -> np.ndarray:
    return solve_triangular(T.IU, values, lower=False, unit_diagonal=True)


def invert_fixed_point(T: TransformMatrix, w: StateVector, tol: float = 0.0,
                       max_iter: int | None = None) -> StateVector:
    """Inversion by the recursion v <- Upsilon (v + w); test oracle.

    Upsilon is nilpotent (strictly upper-triangular action), so the
    iteration terminates exactly after at most M sweeps.
    """
    _check_grid(T, w)
    M = T.grid.M
    max_iter = max_iter or (M + 1)
    v = np.zeros(M, dtype=complex)
    for _ in range(max_iter):
        v_next = T.U @ (v + w.values)
        if l2_norm_values(v_next - v, T.grid.h) <= tol:
            v = v_next
            break
        v = v_next
    return StateVector(w.values + v, w.grid, w.bc_family)


def control_signal(kern: Kernel, state: StateVector) -> complex:
    """Feedback g0 = trapezoid quadrature of kernel(0, .) against the state."""
    grid = state.grid
    row = kernel_eval(kern, np.zeros(grid.M), grid.nodes)
    wts = np.full(grid.M, grid.h)
    wts[0] *= 0.5
    wts[-1] *= 0.5
    return complex(np.sum(row * wts * state.values))


def upsilon_norm_bound(T: TransformMatrix) -> float:
    """Row-sum (infinity-norm) bound on the discrete transform operator."""
    return float(np.max(np.sum(np.abs(T.U), axis=1)))


def inverse_norm_estimate(T: TransformMatrix, iters: int = 100, seed: int = 0) -> float:
    """2-norm of (I - Upsilon)^{-1} by power iteration on its Gram operator."""
    M = T.grid.M
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    x /= np.linalg.norm(x)
    IU = T.IU
    sigma = 1.0
    for _ in range(iters):
        y = solve_triangular(IU, x, lower=False, unit_diagonal=True)
        z = solve_triangular(IU.conj().T, y, lower=True, unit_diagonal=True)
        nz = np.linalg.norm(z)
        sigma = np.sqrt(nz)
        x = z / nz
    return float(sigma)


def kernel_l2_triangle(kern: Kernel, n: int = 201) -> float:
    """L2 norm of the kernel over the triangle 0 <= x <= y <= L (trapezoid)."""
    L = kern.params.L
    xs = np.linspace(0.0, L, n)
    h = xs[1] - xs[0]
    total = 0.0
    for i, x in enumerate(xs):
        row = np.abs(kernel_eval(kern, np.full(n - i, x), xs[i:])) ** 2
        if row.size >= 2:
            line = h * (np.sum(row) - 0.5 * row[0] - 0.5 * row[-1])
        else:
            line = 0.0
        wt = 0.5 if i in (0, n - 1) else 1.0
        total += wt * h * line
    return float(np.sqrt(total))


def decay_constant(kern: Kernel, T: TransformMatrix) -> float:
    """Transfer constant c_k = |(I-Upsilon)^{-1}|_2 * (1 + |k|_L2(triangle))."""
    return inverse_norm_estimate(T) * (1.0 + kernel_l2_triangle(kern))
