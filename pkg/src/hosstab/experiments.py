"""Experiment presets, run orchestration and artifact emission.

Presets pin the reference parameter sets for both boundary families.
``run_experiment`` writes, per run: a norms CSV, a snapshots CSV, a
standalone matplotlib plot script (the package itself never imports a
plotting library) and a JSON summary containing decay fits and the
transform transfer constant.  Floats are written with 17 significant
digits so that re-ingestion is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .fitting import DecayFit, fit_decay
from .grids import Grid, l2_norm_values
from .kernels import (Kernel, PhysicsParams, load_kernel, observer_kernel,
                      save_kernel, solve_kernel)
from .observer import run_plant_observer
from .stepping import LinearCN, NonlinearCN, TimeGrid, run_target
from .transform import (TransformMatrix, build_upsilon, decay_constant,
                        invert_values)

FMT = "%.17g"


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def ic_stationary_mix(x: np.ndarray) -> np.ndarray:
    """3 - e^{4ix} - 2 e^{-2ix}: stationary for beta=1, alpha=2, delta=8."""
    return 3.0 - np.exp(4j * x) - 2.0 * np.exp(-2j * x)


def ic_chirped_gaussian(x: np.ndarray) -> np.ndarray:
    return np.exp(-20.0 * (x - np.pi / 2) ** 2) * np.exp(5j * (x - np.pi / 2))


def ic_sech_pulse(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.cosh(8.0 * (x - np.pi / 2) ** 2) * np.exp(4j * (x - np.pi / 2))


def ic_two_bump(x: np.ndarray) -> np.ndarray:
    return (3.0 * np.exp(-16.0 * (x - np.pi / 2) ** 2) * np.exp(4j * (x - np.pi / 2))
            + 5.0 * np.exp(-16.0 * (x - 3 * np.pi / 4) ** 2) * np.exp(4j * (x - 3 * np.pi / 4)))


INITIAL_CONDITIONS = {
    "stationary_mix": ic_stationary_mix,
    "chirped_gaussian": ic_chirped_gaussian,
    "sech_pulse": ic_sech_pulse,
    "two_bump": ic_two_bump,
    "zero": lambda x: np.zeros_like(x, dtype=complex),
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; validated on construction.

    For observer runs ``ic`` names the initial plant-observer mismatch
    and ``ic_hat`` the observer's own initial guess (the plant starts at
    their sum); for the other run kinds ``ic`` is simply the initial
    state.
    """

    params: PhysicsParams
    ic: str
    M: int = 201
    N: int = 1000
    T: float = 4.0
    run_kind: str = "controlled"          # controlled | uncontrolled | observer
    scheme: str = "auto"                  # auto | taylor | picard
    kernel_tol: float = 1e-12
    kernel_max_iter: int = 60
    inner_tol: float = 1e-10
    max_inner: int = 25
    fit_window: tuple[float, float] | None = None
    ic_hat: str = "zero"                  # observer initial guess
    outdir: str = "out"
    name: str = "run"
    snapshot_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.M < 5:
            raise ConfigError("M must be at least 5")
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.run_kind not in ("controlled", "uncontrolled", "observer"):
            raise ConfigError(f"unknown run kind {self.run_kind!r}")
        if self.scheme not in ("auto", "taylor", "picard"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.ic not in INITIAL_CONDITIONS:
            raise ConfigError(f"unknown initial condition {self.ic!r}; "
                              f"choices: {sorted(INITIAL_CONDITIONS)}")
        if self.ic_hat not in INITIAL_CONDITIONS:
            raise ConfigError(f"unknown initial condition {self.ic_hat!r}")

    def paper_scale(self) -> "ExperimentConfig":
        return replace(self, M=1001, N=5000)


def _preset(name, **kw) -> ExperimentConfig:
    return ExperimentConfig(name=name, **kw)


PRESETS: dict[str, ExperimentConfig] = {
    # family A
    "exp1_linear": _preset(
        "exp1_linear",
        params=PhysicsParams(beta=1, alpha=2, delta=8, r=1, L=math.pi),
        ic="stationary_mix", T=4.0, N=1000, fit_window=(1.0, 4.0)),
    "exp1_uncontrolled": _preset(
        "exp1_uncontrolled",
        params=PhysicsParams(beta=1, alpha=2, delta=8, r=0, L=math.pi),
        ic="stationary_mix", T=1.0, N=1000, run_kind="uncontrolled"),
    "exp2_cubic": _preset(
        "exp2_cubic",
        params=PhysicsParams(beta=1, alpha=2, delta=8, r=8, L=math.pi, p_power=2),
        ic="stationary_mix", T=1.0, N=2000, scheme="taylor"),
    "exp2_uncontrolled": _preset(
        "exp2_uncontrolled",
        params=PhysicsParams(beta=1, alpha=2, delta=8, r=0, L=math.pi, p_power=2),
        ic="stationary_mix", T=1.0, N=2000, run_kind="uncontrolled", scheme="taylor"),
    "exp3_sqrt": _preset(
        "exp3_sqrt",
        params=PhysicsParams(beta=1, alpha=2, delta=8, r=5, L=math.pi, p_power=0.5),
        ic="stationary_mix", T=2.0, N=2000, scheme="picard"),
    "exp4_observer": _preset(
        "exp4_observer",
        params=PhysicsParams(beta=0.5, alpha=1, delta=0.5, r=0.2, L=math.pi),
        ic="chirped_gaussian", T=25.0, N=1000, run_kind="observer",
        fit_window=(5.0, 25.0)),
    # family B
    "obc1_linear": _preset(
        "obc1_linear",
        params=PhysicsParams(beta=1, alpha=1, delta=2, r=1, L=math.pi, bc_family="B"),
        ic="sech_pulse", T=4.0, N=1000),
    "obc1_uncontrolled": _preset(
        "obc1_uncontrolled",
        params=PhysicsParams(beta=1, alpha=1, delta=2, r=0, L=math.pi, bc_family="B"),
        ic="sech_pulse", T=1.0, N=1000, run_kind="uncontrolled"),
    "obc2_p35": _preset(
        "obc2_p35",
        params=PhysicsParams(beta=0.5, alpha=1, delta=2, r=1.5, L=math.pi,
                             p_power=3.5, bc_family="B"),
        ic="two_bump", T=3.0, N=6000, scheme="taylor"),
    "obc3_p025": _preset(
        "obc3_p025",
        params=PhysicsParams(beta=1, alpha=1, delta=2, r=1.5, L=math.pi,
                             p_power=0.25, bc_family="B"),
        ic="sech_pulse", T=3.0, N=3000, scheme="picard"),
    "obc_observer": _preset(
        "obc_observer",
        params=PhysicsParams(beta=1, alpha=1, delta=2, r=0.5, L=math.pi, bc_family="B"),
        ic="chirped_gaussian", T=10.0, N=1000, run_kind="observer"),
}


# ---------------------------------------------------------------------------
# kernel cache
# ---------------------------------------------------------------------------


def _kernel_cache_key(params: PhysicsParams, role: str, family: str,
                      tol: float, max_iter: int) -> str:
    payload = json.dumps(
        [role, family, params.beta, params.alpha, params.delta, params.r,
         params.L, tol, max_iter], sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def get_kernel(params: PhysicsParams, role: str, family: str,
               tol: float = 1e-12, max_iter: int = 60,
               cache_dir: str | None = None) -> Kernel:
    """Build a kernel, or reload it from the text cache (bit-exact)."""
    if cache_dir is not None:
        key = _kernel_cache_key(params, role, family, tol, max_iter)
        path = os.path.join(cache_dir, f"{key}.kernel.txt")
        if os.path.exists(path):
            return load_kernel(path)
    if role == "observer_p":
        kern = observer_kernel(params, family, tol=tol, max_iter=max_iter)
    else:
        kern = solve_kernel(params, family, tol=tol, max_iter=max_iter)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        save_kernel(kern, path)
    return kern


# ---------------------------------------------------------------------------
# CSV / summary / plot-script emission
# ---------------------------------------------------------------------------


def write_csv(path: str, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[c]) for c in names]
    n = arrays[0].shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(FMT % a[i] for a in arrays) + "\n")


def read_csv(path: str) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [[] for _ in header]
        for line in fh:
            if not line.strip():
                continue
            for slot, tok in zip(data, line.strip().split(",")):
                slot.append(float(tok))
    return {name: np.array(vals) for name, vals in zip(header, data)}


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the norms and snapshots CSVs written next to this script.\"\"\"
import csv
import math
import os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def load(name):
    with open(os.path.join(here, name)) as fh:
        rows = list(csv.reader(fh))
    head, data = rows[0], rows[1:]
    cols = {h: [float(r[i]) for r in data] for i, h in enumerate(head)}
    return cols

norms = load("norms.csv")
t = norms.pop("t")
fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for name, vals in norms.items():
    if name.startswith("l2_"):
        ax[0].semilogy(t, vals, label=name)
    else:
        ax[1].plot(t, vals, label=name)
ax[0].set_xlabel("t"); ax[0].set_ylabel("L2 norm"); ax[0].legend()
ax[1].set_xlabel("t"); ax[1].legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "norms.png"), dpi=130)

snaps = load("snapshots.csv")
x = snaps.pop("x")
fig2, ax2 = plt.subplots(figsize=(7, 4))
tags = sorted({k.split("re_")[1] for k in snaps if k.startswith("re_")})
for tag in tags:
    mag = [math.hypot(a, b) for a, b in zip(snaps["re_" + tag], snaps["im_" + tag])]
    ax2.plot(x, mag, label="|" + tag + "|")
ax2.set_xlabel("x"); ax2.legend()
fig2.tight_layout()
fig2.savefig(os.path.join(here, "snapshots.png"), dpi=130)
print("wrote norms.png and snapshots.png")
"""


# ---------------------------------------------------------------------------
# run drivers
# ---------------------------------------------------------------------------


def _snapshot_columns(grid: Grid, times: np.ndarray, states: np.ndarray,
                      snap_times, prefix: str) -> dict[str, np.ndarray]:
    cols = {}
    for st in snap_times:
        n = int(np.argmin(np.abs(times - st)))
        tag = f"{prefix}_t{times[n]:g}"
        cols["re_" + tag] = states[n].real
        cols["im_" + tag] = states[n].imag
    return cols


def run_experiment(cfg: ExperimentConfig, kernel_cache: str | None = None) -> dict:
    """Execute one configured run and write its artifact files.

    Returns the summary dictionary (also written as summary.json).
    """
    os.makedirs(cfg.outdir, exist_ok=True)
    grid = Grid(cfg.M, cfg.params.L)
    tgrid = TimeGrid(cfg.N, cfg.T)
    u0 = INITIAL_CONDITIONS[cfg.ic](grid.nodes).astype(complex)
    snap_times = cfg.snapshot_times or tuple(np.linspace(0.0, cfg.T, 5))
    summary: dict = {
        "name": cfg.name,
        "run_kind": cfg.run_kind,
        "params": {
            "beta": cfg.params.beta, "alpha": cfg.params.alpha,
            "delta": cfg.params.delta, "r": cfg.params.r, "L": cfg.params.L,
            "p_power": cfg.params.p_power, "bc_family": cfg.params.bc_family,
        },
        "M": cfg.M, "N": cfg.N, "T": cfg.T, "ic": cfg.ic,
    }

    if cfg.run_kind == "observer":
        obs = _run_observer(cfg, grid, tgrid, u0, summary, kernel_cache)
        norms_cols, snap_cols = obs
    elif cfg.run_kind == "uncontrolled":
        norms_cols, snap_cols = _run_uncontrolled(cfg, grid, tgrid, u0, summary, snap_times)
    else:
        norms_cols, snap_cols = _run_controlled(cfg, grid, tgrid, u0, summary,
                                                snap_times, kernel_cache)

    write_csv(os.path.join(cfg.outdir, "norms.csv"), norms_cols)
    snap_cols = {"x": grid.nodes, **snap_cols}
    write_csv(os.path.join(cfg.outdir, "snapshots.csv"), snap_cols)
    with open(os.path.join(cfg.outdir, "plot.py"), "w", encoding="utf-8") as fh:
        fh.write(_PLOT_SCRIPT)
    with open(os.path.join(cfg.outdir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


def _fit_into(summary: dict, key: str, times, norms, window) -> None:
    try:
        summary.setdefault("fits", {})[key] = fit_decay(times, norms, window).as_dict()
    except ConfigError as exc:
        summary.setdefault("fit_errors", {})[key] = str(exc)


def _run_controlled(cfg, grid, tgrid, u0, summary, snap_times, kernel_cache):
    role = "control_k" if cfg.params.bc_family == "A" else "control_ell"
    kern = get_kernel(cfg.params, role, cfg.params.bc_family,
                      cfg.kernel_tol, cfg.kernel_max_iter, kernel_cache)
    T_mat = build_upsilon(kern, grid)
    w0 = u0 - T_mat.U @ u0
    if cfg.params.p_power > 0:
        stepper = NonlinearCN(grid, cfg.params, tgrid.dt, T_mat, scheme=cfg.scheme,
                              inner_tol=cfg.inner_tol, max_inner=cfg.max_inner)
    else:
        stepper = LinearCN(grid, cfg.params, tgrid.dt)
    rec = run_target(w0, stepper, tgrid)
    l2_u = np.zeros(tgrid.N)
    g0 = np.zeros(tgrid.N, dtype=complex)
    u_states = np.zeros_like(rec.states)
    row0 = T_mat.U[0, :]
    for n in range(tgrid.N):
        u = invert_values(T_mat, rec.states[n])
        u_states[n] = u
        l2_u[n] = l2_norm_values(u, grid.h)
        g0[n] = row0 @ u
    summary["kernel"] = {
        "iterations": kern.iterations, "last_increment": kern.last_increment,
        "pde_sup": kern.residual.pde_sup if kern.residual else None,
        "bc_sup": kern.residual.bc_sup if kern.residual else None,
    }
    summary["ck"] = decay_constant(kern, T_mat)
    summary["u_initial"] = float(l2_u[0])
    summary["u_final"] = float(l2_u[-1])
    _fit_into(summary, "l2_u", tgrid.times, l2_u, cfg.fit_window)
    _fit_into(summary, "l2_w", tgrid.times, rec.series["l2_w"], cfg.fit_window)
    if rec.report is not None:
        summary["nonlinear"] = {
            "scheme": rec.report.scheme,
            "max_inner_iterations": rec.report.max_iterations,
            "max_correction": float(rec.report.max_corrections.max()),
        }
    cols = {"t": tgrid.times, "l2_u": l2_u, "l2_w": rec.series["l2_w"],
            "abs_g0": np.abs(g0)}
    snaps = _snapshot_columns(grid, tgrid.times, u_states, snap_times, "u")
    return cols, snaps


def _run_uncontrolled(cfg, grid, tgrid, u0, summary, snap_times):
    params = cfg.params
    if params.r != 0:
        params = replace(params, r=0.0)
    if params.p_power > 0:
        zeroT = TransformMatrix(U=np.zeros((grid.M, grid.M), dtype=complex),
                                role="identity", grid=grid)
        stepper = NonlinearCN(grid, params, tgrid.dt, zeroT, scheme=cfg.scheme,
                              inner_tol=cfg.inner_tol, max_inner=cfg.max_inner)
    else:
        stepper = LinearCN(grid, params, tgrid.dt, include_damping=False)
    rec = run_target(u0, stepper, tgrid)
    if rec.report is not None:
        summary["nonlinear"] = {
            "scheme": rec.report.scheme,
            "max_inner_iterations": rec.report.max_iterations,
            "max_correction": float(rec.report.max_corrections.max()),
        }
    norms = rec.series["l2_w"]
    drift = abs(norms[-1] - norms[0]) / norms[0] if norms[0] > 0 else 0.0
    summary["norm_drift"] = float(drift)
    summary["l2_initial"] = float(norms[0])
    summary["l2_final"] = float(norms[-1])
    _fit_into(summary, "l2_u", tgrid.times, norms, cfg.fit_window)
    cols = {"t": tgrid.times, "l2_u": norms}
    snaps = _snapshot_columns(grid, tgrid.times, rec.states, snap_times, "u")
    return cols, snaps


def _run_observer(cfg, grid, tgrid, u0, summary, kernel_cache):
    family = cfg.params.bc_family
    role = "control_k" if family == "A" else "control_ell"
    ctrl = get_kernel(cfg.params, role, family, cfg.kernel_tol,
                      cfg.kernel_max_iter, kernel_cache)
    obs = get_kernel(cfg.params, "observer_p", family, cfg.kernel_tol,
                     cfg.kernel_max_iter, kernel_cache)
    uhat0 = INITIAL_CONDITIONS[cfg.ic_hat](grid.nodes).astype(complex)
    run = run_plant_observer(u0 + uhat0, uhat0, cfg.params, grid, tgrid,
                             family, cfg.fit_window, kernels=(ctrl, obs),
                             keep_states=True)
    summary["kernel"] = {
        "control_iterations": ctrl.iterations,
        "observer_iterations": obs.iterations,
        "control_residual": [ctrl.residual.pde_sup, ctrl.residual.bc_sup] if ctrl.residual else None,
        "observer_residual": [obs.residual.pde_sup, obs.residual.bc_sup] if obs.residual else None,
    }
    summary["fits"] = {k: v.as_dict() for k, v in run.fits.items()}
    cols = {"t": run.times}
    for name in ("l2_u", "l2_uhat", "l2_utilde", "l2_what", "abs_g0", "abs_trace"):
        cols[name] = run.series[name]
    snap_times = cfg.snapshot_times or tuple(np.linspace(0.0, cfg.T, 5))
    snaps = {}
    for fieldname in ("u", "uhat", "utilde"):
        snaps.update(_snapshot_columns(grid, run.times, run.states[fieldname],
                                       snap_times, fieldname))
    return cols, snaps


def sweep_rates(base: ExperimentConfig, rates, outdir: str,
                kernel_cache: str | None = None, workers: int = 1) -> dict:
    """Run the base experiment once per decay rate; collect fitted gammas."""
    configs = []
    for r in rates:
        sub = os.path.join(outdir, f"r_{r:g}")
        configs.append(replace(base, params=replace(base.params, r=float(r)),
                               outdir=sub, name=f"{base.name}_r{r:g}"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_experiment, configs))
    else:
        summaries = [run_experiment(cfg, kernel_cache) for cfg in configs]
    gammas = []
    for s in summaries:
        fits = s.get("fits", {})
        gammas.append(fits.get("l2_u", {}).get("gamma"))
    result = {
        "rates": [float(r) for r in rates],
        "gammas": gammas,
        "monotone": all(a is not None and b is not None and b > a
                        for a, b in zip(gammas, gammas[1:])),
        "runs": [s["name"] for s in summaries],
    }
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "sweep_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
    return result
