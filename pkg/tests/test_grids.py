import math

import numpy as np
import pytest

from hosstab.errors import ConfigError
from hosstab.grids import (Grid, StateVector, bc_row_indices, bc_rows,
                           build_operator, l2_norm, l2_norm_values,
                           trace_uxx_L, trace_uxx_L_values)
from hosstab.kernels import PhysicsParams

PI = math.pi
EXP1 = PhysicsParams(beta=1, alpha=2, delta=8, r=0, L=PI)


def test_grid_basics():
    g = Grid(201, PI)
    assert g.h * (g.M - 1) == pytest.approx(PI, abs=1e-15)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == pytest.approx(PI)
    with pytest.raises(ConfigError):
        Grid(4, PI)


def test_interior_rows_annihilate_constants():
    g = Grid(41, PI)
    params = PhysicsParams(beta=1, alpha=0, delta=0, r=0, L=PI)
    A = build_operator(g, params, include_damping=False)
    res = A @ np.ones(g.M, dtype=complex)
    assert np.max(np.abs(res[1:g.M - 2])) < 1e-12


def test_operator_symbol_consistency_on_plane_wave():
    # interior rows approach the symbol beta (i kappa)^3 on e^{i kappa x}
    # as h -> 0; the right-biased third difference carries a dissipative
    # O(h) term (kappa^4 h / 2), so the error halves when h halves
    kappa = 2.0
    params = PhysicsParams(beta=1.0, alpha=0.0, delta=0.0, r=0, L=PI)
    errs = []
    for M in (101, 201):
        g = Grid(M, PI)
        A = build_operator(g, params, include_damping=False)
        u = np.exp(1j * kappa * g.nodes)
        want = params.beta * (1j * kappa) ** 3 * u            # beta u_xxx
        got = A @ u
        mid = slice(2, M - 3)
        errs.append(np.max(np.abs(got[mid] - want[mid])) / kappa**3)
    assert errs[1] < errs[0]
    ratio = errs[0] / errs[1]
    assert 1.7 < ratio < 2.4
    # the predicted leading error is the real dissipative part kappa^4 h / 2
    g = Grid(201, PI)
    assert errs[1] * kappa**3 == pytest.approx(kappa**4 * g.h / 2, rel=0.1)


def test_stationary_solution_interior_residual_shrinks():
    # A u0 (no damping) is O(h) for the right-biased third difference
    def u0(x):
        return 3 - np.exp(4j * x) - 2 * np.exp(-2j * x)

    res = []
    for M in (201, 401):
        g = Grid(M, PI)
        A = build_operator(g, EXP1, include_damping=False)
        r = A @ u0(g.nodes)
        res.append(np.max(np.abs(r[1:M - 2])))
    assert res[0] / res[1] == pytest.approx(2.0, rel=0.15)


def test_difference_operators_commute_on_interior_rows():
    # Dplus Dminus equals Dminus Dplus wherever the shifts are not truncated
    M = 31
    Dp = np.diag(-np.ones(M)) + np.diag(np.ones(M - 1), 1)
    Dm = np.diag(np.ones(M)) + np.diag(-np.ones(M - 1), -1)
    left = Dp @ Dm
    right = Dm @ Dp
    assert np.allclose(left[1:M - 1, :], right[1:M - 1, :])


def test_bc_rows_family_A():
    g = Grid(11, 1.0)
    rows = bc_rows(g, "A")
    assert set(rows) == {0, 9, 10}
    assert rows[0][0] == 1.0 and np.count_nonzero(rows[0]) == 1
    assert rows[10][10] == 1.0 and np.count_nonzero(rows[10]) == 1
    # one-sided Neumann row recovers u_x(L): exact on constants and linears
    assert rows[9] @ np.ones(11) == pytest.approx(0.0, abs=1e-12)
    assert rows[9] @ g.nodes == pytest.approx(1.0, abs=1e-12)


def test_bc_rows_family_B():
    g = Grid(11, 1.0)
    rows = bc_rows(g, "B")
    assert rows[10] @ g.nodes == pytest.approx(1.0, abs=1e-12)     # Neumann row
    # second-derivative row exact on quadratics
    assert rows[9] @ (g.nodes**2) == pytest.approx(2.0, abs=1e-10)
    assert rows[9] @ np.ones(11) == pytest.approx(0.0, abs=1e-12)
    assert rows[9] @ g.nodes == pytest.approx(0.0, abs=1e-12)


def test_trace_uxx_exact_on_quadratics():
    g = Grid(51, PI)
    sv = StateVector((g.nodes**2).astype(complex), g)
    assert trace_uxx_L(sv) == pytest.approx(2.0, abs=1e-10)
    sv_const = StateVector(np.ones(g.M, dtype=complex), g)
    assert trace_uxx_L(sv_const) == pytest.approx(0.0, abs=1e-12)


def test_trace_uxx_cubic_error_is_order_h():
    g = Grid(201, PI)
    val = trace_uxx_L_values((g.nodes**3).astype(complex), g.h)
    assert abs(val - 6 * PI) < 10 * g.h


def test_l2_norm_values():
    g = Grid(201, PI)
    assert l2_norm(StateVector(np.zeros(g.M, complex), g)) == 0.0
    const = StateVector(np.ones(g.M, complex), g)
    assert l2_norm(const) == pytest.approx(math.sqrt(PI), rel=1e-6)
    sin = StateVector(np.sin(g.nodes).astype(complex), g)
    assert abs(l2_norm(sin) - math.sqrt(PI / 2)) < 1e-4


def test_bc_indices():
    assert bc_row_indices(201) == (0, 199, 200)
