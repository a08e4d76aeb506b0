import math

import numpy as np
import pytest

from hosstab.grids import Grid, StateVector, l2_norm_values
from hosstab.kernels import Kernel, PhysicsParams, solve_kernel
from hosstab.poly2 import Poly2
from hosstab.transform import (TransformMatrix, build_upsilon, control_signal,
                               decay_constant, forward, invert,
                               invert_fixed_point, inverse_norm_estimate,
                               upsilon_norm_bound)

PI = math.pi
EXP1 = PhysicsParams(beta=1, alpha=2, delta=8, r=1, L=PI)


@pytest.fixture(scope="module")
def kern():
    return solve_kernel(EXP1, "A", with_residual=False)


@pytest.fixture(scope="module")
def grid():
    return Grid(201, PI)


@pytest.fixture(scope="module")
def T(kern, grid):
    return build_upsilon(kern, grid)


def u0_exp1(x):
    return 3 - np.exp(4j * x) - 2 * np.exp(-2j * x)


def test_upsilon_structure(T, grid):
    U = T.U
    M = grid.M
    assert np.all(np.diag(U) == 0.0)                      # kernel diagonal vanishes
    assert np.all(U[-1, :] == 0.0)                        # empty last row
    assert np.all(np.tril(U, -1) == 0.0)                  # strictly upper action
    # I - U unit upper triangular
    assert np.all(np.diag(T.IU) == 1.0)


def test_zero_kernel_gives_identity(grid):
    zero = Kernel(Poly2.zero(), "control_k", EXP1, "A", 0, 0.0)
    T0 = build_upsilon(zero, grid)
    v = StateVector(np.sin(grid.nodes).astype(complex), grid)
    assert np.array_equal(forward(T0, v).values, v.values)
    assert np.allclose(invert(T0, v).values, v.values)


def test_constant_kernel_row_applied_to_ones(grid):
    # with kappa = 1 the row action approximates int_x^L 1 dy = L - x
    one = Kernel(Poly2.monomial(0, 0, 1.0), "control_k", EXP1, "A", 0, 0.0)
    T1 = build_upsilon(one, grid)
    got = T1.U @ np.ones(grid.M)
    want = PI - grid.nodes
    assert np.max(np.abs(got - want)) < 1e-10       # trapezoid exact for constants


def test_forward_matches_direct_quadrature(T, kern, grid):
    from hosstab.kernels import kernel_eval
    u = StateVector(u0_exp1(grid.nodes), grid)
    w = forward(T, u)
    # independent trapezoid quadrature at a few nodes
    for i in (0, 50, 117):
        xi = grid.nodes[i]
        ys = grid.nodes[i:]
        vals = kernel_eval(kern, np.full(ys.shape, xi), ys) * u.values[i:]
        if ys.size >= 2:
            quad = grid.h * (vals.sum() - 0.5 * vals[0] - 0.5 * vals[-1])
        else:
            quad = 0.0
        assert abs(w.values[i] - (u.values[i] - quad)) < 1e-12


def test_forward_linearity(T, grid):
    rng = np.random.default_rng(21)
    u = StateVector(rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M), grid)
    v = StateVector(rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M), grid)
    a, b = 1.7 - 0.3j, 0.4 + 2.2j
    lhs = forward(T, StateVector(a * u.values + b * v.values, grid)).values
    rhs = a * forward(T, u).values + b * forward(T, v).values
    assert np.max(np.abs(lhs - rhs)) < 1e-13 * max(1.0, np.max(np.abs(rhs)))


def test_roundtrip_error(T, grid):
    rng = np.random.default_rng(22)
    u = StateVector(rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M), grid)
    back = invert(T, forward(T, u))
    assert l2_norm_values(back.values - u.values, grid.h) <= 1e-12


def test_fixed_point_recursion_agrees_with_back_substitution(T, grid):
    rng = np.random.default_rng(23)
    w = StateVector(rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M), grid)
    direct = invert(T, w)
    fixed = invert_fixed_point(T, w)
    assert l2_norm_values(direct.values - fixed.values, grid.h) <= 1e-10


def test_control_signal_equals_boundary_residual(T, kern, grid):
    u = StateVector(u0_exp1(grid.nodes), grid)
    w = forward(T, u)
    g0 = control_signal(kern, u)
    assert abs(g0 - (u.values[0] - w.values[0])) < 1e-12
    zero = StateVector(np.zeros(grid.M, complex), grid)
    assert control_signal(kern, zero) == 0.0


def test_norm_reports_finite(T, kern):
    assert upsilon_norm_bound(T) > 0.0
    est = inverse_norm_estimate(T)
    assert np.isfinite(est) and est >= 1.0
    ck = decay_constant(kern, T)
    assert np.isfinite(ck) and ck > 1.0
