"""Backstepping boundary stabilization of higher-order Schrodinger equations.

Construct boundary-feedback kernels by exact polynomial successive
approximation, simulate the controlled plant / observer / error systems
with Crank-Nicolson finite differences, and verify prescribed
exponential decay rates numerically.
"""

from .errors import ConfigError, DomainError, HosstabError, KernelError, SolverError
from .fitting import DecayFit, fit_decay
from .grids import Grid, StateVector, build_operator, l2_norm, trace_uxx_L
from .kernels import (Kernel, KernelResidual, PhysicsParams, apply_P,
                      kernel_eval, kernel_residual, load_kernel,
                      observer_gain, observer_kernel, save_kernel, solve_kernel)
from .observer import (ObserverRun, run_error, run_error_via_target,
                       run_observer_target, run_plant_observer)
from .poly2 import Poly2
from .stepping import (LinearCN, NonlinearCN, NonlinearSolveReport, RunRecord,
                       TimeGrid, run_target)
from .transform import (TransformMatrix, build_upsilon, control_signal,
                        decay_constant, forward, invert, invert_fixed_point)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "HosstabError", "KernelError", "SolverError",
    "DecayFit", "fit_decay",
    "Grid", "StateVector", "build_operator", "l2_norm", "trace_uxx_L",
    "Kernel", "KernelResidual", "PhysicsParams", "apply_P", "kernel_eval",
    "kernel_residual", "load_kernel", "observer_gain", "observer_kernel",
    "save_kernel", "solve_kernel",
    "ObserverRun", "run_error", "run_error_via_target", "run_observer_target",
    "run_plant_observer",
    "Poly2",
    "LinearCN", "NonlinearCN", "NonlinearSolveReport", "RunRecord", "TimeGrid",
    "run_target",
    "TransformMatrix", "build_upsilon", "control_signal", "decay_constant",
    "forward", "invert", "invert_fixed_point",
    "__version__",
]
