"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line.

Criteria 5 and the iteration clause of criterion 7 are implemented as
stated and fail by design of the scheme itself: the right-biased third
difference is first-order dissipative, so the stationary drift is O(h)
(measured ~15% at M=201, halving with h, not the stated 2% / O(h^2));
and the formal Taylor linearization contracts by ~ dt |u|^p per sweep,
so reaching an absolute 1e-10 correction from large data takes up to 10
inner sweeps at the preset step (<= 3 only under a ~1e-3-relative
stopping rule).  See the failure messages for the measured numbers.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from hosstab.experiments import PRESETS, run_experiment, sweep_rates
from hosstab.fitting import fit_decay
from hosstab.grids import Grid, l2_norm_values
from hosstab.kernels import (PhysicsParams, apply_P, kernel_eval,
                             observer_gain, observer_kernel, solve_kernel)
from hosstab.observer import run_plant_observer
from hosstab.poly2 import Poly2
from hosstab.stepping import LinearCN, NonlinearCN, TimeGrid, run_target
from hosstab.transform import (build_upsilon, forward, invert,
                               invert_fixed_point, invert_values)

PI = math.pi
EXP1 = PhysicsParams(beta=1, alpha=2, delta=8, r=1, L=PI)
EXP4 = PhysicsParams(beta=0.5, alpha=1, delta=0.5, r=0.2, L=PI)
OBC1 = PhysicsParams(beta=1, alpha=1, delta=2, r=1, L=PI, bc_family="B")


def u0_exp1(x):
    return 3 - np.exp(4j * x) - 2 * np.exp(-2j * x)


def report(num: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def kernel_exp1():
    return solve_kernel(EXP1, "A")


def test_criterion_01_kernel_convergence_bound():
    t0 = time.perf_counter()
    L, Mc = EXP1.L, EXP1.coeff_bound
    h = Poly2.monomial(1, 1)
    bound_ok = True
    n = 0
    increments = []
    while True:
        n += 1
        h = apply_P(h, EXP1, "A")
        b = h.sup_bound(L)
        increments.append(b)
        if b > 6.0**n * Mc**n * L ** (3 * n + 2) / math.factorial(n + 1):
            bound_ok = False
        if (EXP1.r_t / 3.0) * b <= 1e-12 or n >= 60:
            break
    converged = (EXP1.r_t / 3.0) * increments[-1] <= 1e-12 and n <= 60
    elapsed = time.perf_counter() - t0
    ok = bound_ok and converged and elapsed < 5.0
    assert report(1, ok,
                  f"factorial bound holds for n=1..{n}: {bound_ok}; "
                  f"reached 1e-12 at n={n} (<=60); {elapsed:.2f}s (<5s)")


def test_criterion_02_kernel_residuals_four_bvps():
    t0 = time.perf_counter()
    kernels = {
        "control family A": solve_kernel(EXP1, "A"),
        "control family B": solve_kernel(OBC1, "B"),
        "observer family A": observer_kernel(EXP4, "A"),
        "observer family B": observer_kernel(OBC1, "B"),
    }
    worst_bc = max(k.residual.bc_sup for k in kernels.values())
    worst_pde = max(k.residual.pde_sup for k in kernels.values())
    elapsed = time.perf_counter() - t0
    ok = worst_bc <= 1e-10 and worst_pde <= 1e-6 and elapsed < 10.0
    assert report(2, ok,
                  f"max bc residual {worst_bc:.2e} (<=1e-10), "
                  f"max pde residual {worst_pde:.2e} (<=1e-6), {elapsed:.2f}s (<10s)")


def test_criterion_03_observer_reflection_identity(kernel_exp1):
    # p(x, y) = k(L-y, L-x) with the control kernel at the same rate.
    # (The rate is +r, not -r: the rate-negated reflection violates the
    # observer BVP by O(r~ |p|); see the decisions record.)
    obs = observer_kernel(EXP1, "A", with_residual=False)
    rng = np.random.default_rng(0)
    xs = rng.uniform(0, PI, 400)
    ys = xs + rng.uniform(0, 1, 400) * (PI - xs)
    gap = np.max(np.abs(kernel_eval(obs, xs, ys)
                        - kernel_eval(kernel_exp1, PI - ys, PI - xs)))
    ok = gap <= 1e-13
    assert report(3, ok, f"max |p(x,y) - k(L-y,L-x)| = {gap:.2e} (<=1e-13)")


def test_criterion_04_transform_exactness(kernel_exp1):
    from hosstab.grids import StateVector
    grid = Grid(201, PI)
    T = build_upsilon(kernel_exp1, grid)
    unit_ut = bool(np.all(np.diag(T.U) == 0.0)
                   and np.all(np.tril(T.U, -1) == 0.0))
    rng = np.random.default_rng(1)
    u = StateVector(rng.standard_normal(201) + 1j * rng.standard_normal(201), grid)
    rt = l2_norm_values(invert(T, forward(T, u)).values - u.values, grid.h)
    w = StateVector(rng.standard_normal(201) + 1j * rng.standard_normal(201), grid)
    fp = l2_norm_values(invert(T, w).values - invert_fixed_point(T, w).values,
                        grid.h)
    ok = unit_ut and rt <= 1e-12 and fp <= 1e-10
    assert report(4, ok,
                  f"unit upper triangular: {unit_ut}; round-trip {rt:.2e} "
                  f"(<=1e-12); back-substitution vs recursion {fp:.2e} (<=1e-10)")


def test_criterion_05_stationary_preservation():
    P0 = PhysicsParams(beta=1, alpha=2, delta=8, r=0, L=PI)
    drifts = []
    for M, N in ((201, 1000), (401, 2000)):
        g = Grid(M, PI)
        tg = TimeGrid(N, 1.0)
        lin = LinearCN(g, P0, tg.dt, include_damping=False)
        rec = run_target(u0_exp1(g.nodes), lin, tg, record_states=False)
        norms = rec.series["l2_w"]
        drifts.append(abs(norms[-1] - norms[0]) / norms[0])
    ratio = drifts[0] / drifts[1]
    ok = drifts[0] <= 0.02 and 3.0 <= ratio <= 5.0
    assert report(
        5, ok,
        f"drift {drifts[0]:.3%} (required <=2%), halving ratio {ratio:.2f} "
        f"(required ~4): the right-biased third difference dissipates the "
        f"e^(4ix)/e^(-2ix) modes at rate beta k^4 h/2, an O(h) effect, so "
        f"this criterion is unattainable with the prescribed stencil")


@pytest.fixture(scope="module")
def exp1_controlled_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    base = PRESETS["exp1_linear"]
    return sweep_rates(base, [0.5, 1.0, 2.0], str(out))


def test_criterion_06_prescribed_linear_decay(exp1_controlled_runs):
    res = exp1_controlled_runs
    gam_r1 = res["gammas"][1]
    in_range = 0.8 <= gam_r1 <= 1.5
    ok = in_range and res["monotone"]
    assert report(6, ok,
                  f"r=1 fitted gamma={gam_r1:.3f} in [0.8,1.5]: {in_range}; "
                  f"sweep gammas {['%.3f' % g for g in res['gammas']]} "
                  f"monotone: {res['monotone']}")


@pytest.fixture(scope="module")
def exp2_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp2")
    cfg = replace(PRESETS["exp2_cubic"], outdir=str(out))
    return run_experiment(cfg)


def test_criterion_07_nonlinear_decay(exp2_run, tmp_path_factory):
    s2 = exp2_run
    # exp2: decay clause
    ratio = s2["u_final"] / s2["u_initial"]
    decay_ok = ratio <= 0.05
    iters = s2["nonlinear"]["max_inner_iterations"]
    iter_ok = iters <= 3
    # exp3: Picard decay clause
    out3 = tmp_path_factory.mktemp("exp3")
    s3 = run_experiment(replace(PRESETS["exp3_sqrt"], outdir=str(out3),
                                fit_window=(0.5, 1.5)))
    gam3 = s3["fits"]["l2_u"]["gamma"]
    picard_ok = gam3 >= 0.5
    ok = decay_ok and iter_ok and picard_ok
    assert report(
        7, ok,
        f"p=2,r=8: u(1)/u(0)={ratio:.2e} (<=0.05): {decay_ok}; Taylor inner "
        f"iterations max={iters} (required <=3): {iter_ok} [contraction of the "
        f"formal linearization is ~dt|u|^p per sweep, so an absolute 1e-10 "
        f"correction takes ~10 sweeps from large data at this dt]; "
        f"p=1/2,r=5 Picard gamma={gam3:.2f} (>=0.5): {picard_ok}")


def test_criterion_08_scheme_cross_validation():
    P = PhysicsParams(beta=1, alpha=2, delta=8, r=2, L=PI, p_power=1.0)
    k = solve_kernel(P, "A", with_residual=False)
    g = Grid(101, PI)
    tg = TimeGrid(500, 0.5)
    T = build_upsilon(k, g)
    u0 = u0_exp1(g.nodes)
    w0 = u0 - T.U @ u0
    states = {}
    for scheme in ("taylor", "picard"):
        nl = NonlinearCN(g, P, tg.dt, T, scheme=scheme, inner_tol=1e-12)
        states[scheme] = run_target(w0, nl, tg).states
    gap = max(l2_norm_values(states["taylor"][n] - states["picard"][n], g.h)
              for n in range(tg.N))
    ok = gap <= 1e-7
    assert report(8, ok, f"p=1 Taylor vs Picard max per-step gap {gap:.2e} (<=1e-7)")


def test_criterion_09_observer_convergence():
    grid = Grid(201, PI)
    tg = TimeGrid(1000, 25.0)
    ut0 = np.exp(-20 * (grid.nodes - PI / 2) ** 2) * np.exp(5j * (grid.nodes - PI / 2))
    run = run_plant_observer(ut0, np.zeros(201, complex), EXP4, grid, tg,
                             "A", fit_window=(5.0, 25.0), keep_states=True)
    gam = run.fits["l2_utilde"].gamma
    rate_ok = gam >= 0.8 * EXP4.r
    # ||uhat - u|| = ||utilde|| exactly, by construction
    ident = max(
        abs(l2_norm_values(run.states["uhat"][n] - run.states["u"][n], grid.h)
            - run.series["l2_utilde"][n])
        for n in range(0, tg.N, 50))
    ident_ok = ident <= 1e-13
    # qualitative: observer rises from zero then decays; plant decays overall
    uhat = run.series["l2_uhat"]
    u = run.series["l2_u"]
    qual_ok = (uhat.max() > 10 * uhat[0] + 1e-12
               and uhat[-1] < 0.05 * uhat.max()
               and u[-1] < 0.05 * u[0])
    ok = rate_ok and ident_ok and qual_ok
    assert report(9, ok,
                  f"error fitted gamma={gam:.3f} (>=0.8r={0.8*EXP4.r:.2f}): "
                  f"{rate_ok}; max |(||uhat-u|| - ||utilde||)| = {ident:.1e}: "
                  f"{ident_ok}; transient-then-decay shape: {qual_ok}")


def test_criterion_10_family_B_suite(tmp_path_factory):
    results = {}
    for name, window in (("obc1_linear", None), ("obc2_p35", None),
                         ("obc3_p025", None)):
        out = tmp_path_factory.mktemp(name)
        s = run_experiment(replace(PRESETS[name], outdir=str(out)))
        results[name] = s["fits"]["l2_u"]["gamma"]
    thresholds = {"obc1_linear": 0.6 * 1.0, "obc2_p35": 0.6 * 1.5,
                  "obc3_p025": 0.6 * 1.5}
    decay_ok = all(results[n] >= thresholds[n] for n in results)
    # uncontrolled family-B run: nonincreasing discrete L2 norm
    g = Grid(201, PI)
    tg = TimeGrid(1000, 1.0)
    P0 = PhysicsParams(beta=1, alpha=1, delta=2, r=0, L=PI, bc_family="B")
    u0 = 1 / np.cosh(8 * (g.nodes - PI / 2) ** 2) * np.exp(4j * (g.nodes - PI / 2))
    rec = run_target(u0.astype(complex),
                     LinearCN(g, P0, tg.dt, include_damping=False), tg,
                     record_states=False)
    mono = bool(np.all(np.diff(rec.series["l2_w"]) <= 1e-12))
    ok = decay_ok and mono
    assert report(10, ok,
                  f"fitted gammas {({k: round(v, 3) for k, v in results.items()})} "
                  f"vs 0.6r thresholds {thresholds}: {decay_ok}; uncontrolled "
                  f"L2 nonincreasing: {mono}")
