"""Backstepping kernel construction by exact polynomial successive approximation.

The control kernel ``k(x, y)`` (boundary family A) and ``ell(x, y)``
(family B) solve third-order Goursat-type boundary value problems on the
triangle ``0 <= x <= y <= L``.  After the change of variables
``s = y - x``, ``t = L - y`` each problem becomes an integral fixed-point
equation ``G = G1 + P G`` whose iterates are exact polynomials, so the
whole construction runs in coefficient arithmetic: differentiation and
integration are row/column shifts of the coefficient grid.

The observer output-injection kernel ``p(x, y)`` solves the same kind of
problem with data on the edges ``x = 0`` and ``y = x``; the natural
variables are ``s = y - x``, ``t = x`` and the fixed-point operator is
the family-A one regardless of the boundary family (only the gain
formula downstream differs).  Equivalently, ``p(x, y) = k(L - y, L - x)``
with ``k`` built at the same decay rate.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, KernelError
from .poly2 import Poly2

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 60

CONTROL_ROLES = ("control_k", "control_ell")
OBSERVER_ROLE = "observer_p"

# first-order chain-rule coefficients (ds/dx, dt/dx, ds/dy, dt/dy) for the
# two variable maps
_CHAIN = {
    "control": (-1.0, 0.0, 1.0, -1.0),   # s = y - x, t = L - y
    "observer": (-1.0, 1.0, 1.0, 0.0),   # s = y - x, t = x
}


@dataclass(frozen=True)
class PhysicsParams:
    """Coefficients of the plant and the prescribed decay rate.

    ``i u_t + i beta u_xxx + alpha u_xx + i delta u_x + |u|^p u = 0`` on
    ``(0, L)``; ``bc_family`` selects the right-endpoint boundary set:
    'A' for Dirichlet+Neumann, 'B' for Neumann+second-derivative.
    ``p_power = 0`` marks a linear run.
    """

    beta: float
    alpha: float
    delta: float
    r: float
    L: float
    p_power: float = 0.0
    bc_family: str = "A"

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.L <= 0:
            raise ConfigError("L must be positive")
        if self.r < 0:
            raise ConfigError("decay rate r must be nonnegative")
        if self.bc_family not in ("A", "B"):
            raise ConfigError(f"bc_family must be 'A' or 'B', got {self.bc_family!r}")
        if self.bc_family == "B" and self.delta < 0:
            raise ConfigError("family B requires delta >= 0 (uncontrolled dissipativity)")
        if not 0.0 <= self.p_power <= 4.0:
            raise ConfigError("nonlinearity power must lie in [0, 4]")

    @property
    def alpha_t(self) -> float:
        return self.alpha / self.beta

    @property
    def delta_t(self) -> float:
        return self.delta / self.beta

    @property
    def r_t(self) -> float:
        return self.r / self.beta

    @property
    def coeff_bound(self) -> float:
        """max(1, |alpha_t|, |delta_t|, |r_t|), the constant in the factorial bound."""
        return max(1.0, abs(self.alpha_t), abs(self.delta_t), abs(self.r_t))


# ---------------------------------------------------------------------------
# fixed-point operators
# ---------------------------------------------------------------------------


def _triple(g: Poly2) -> Poly2:
    """Integrate twice in s and once in t, all antiderivatives vanishing at 0."""
    return g.integrate("s").integrate("s").integrate("t")


def _double_s(g: Poly2) -> Poly2:
    return g.integrate("s").integrate("s")


def apply_P(g: Poly2, params: PhysicsParams, family: str, degree_cap: int | None = None) -> Poly2:
    """One application of the split integral operator of the given family.

    Family A is the plain triple integral of the rearranged main equation;
    family B carries extra single and double s-integrals evaluated at the
    running t, coming from its inhomogeneous edge condition.
    """
    at, dt_, rt = params.alpha_t, params.delta_t, params.r_t
    gt = g.diff("t")
    gtt = gt.diff("t")
    gttt = gtt.diff("t")
    gts = gt.diff("s")
    gtts = gtt.diff("s")

    if family == "A":
        integrand = (
            gtts
            + (-1.0 / 3.0) * gttt
            + (1j * at / 3.0) * gtt
            + (-2j * at / 3.0) * gts
            + (-dt_ / 3.0) * gt
            + (rt / 3.0) * g
        )
        out = _triple(integrand)
    elif family == "B":
        integrand = (
            (2.0 / 3.0) * gttt
            + (-1.0) * gtts
            + (-2j * at / 3.0) * gtt
            + (1j * at / 3.0) * gts
            + (2.0 * dt_ / 3.0) * gt
            + (rt / 3.0) * g
        )
        out = _triple(integrand)
        out = out + _double_s((-1.0) * gtt + (1j * at) * gt + (-dt_) * g)
        out = out + ((2.0) * gt + (-1j * at) * g).integrate("s")
    else:
        raise ConfigError(f"unknown operator family {family!r}")

    out = out.flush_tiny()
    if degree_cap is not None and out.degree > degree_cap:
        raise KernelError(
            f"degree cap exceeded: got {out.degree} > {degree_cap}; "
            "raise max_iter/degree_cap or loosen the tolerance"
        )
    return out


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelResidual:
    """Sup-norm residuals of the converged kernel against its BVP."""

    pde_sup: float
    bc_sup: float


@dataclass
class Kernel:
    """A solved kernel polynomial plus its role and residual report."""

    G: Poly2
    role: str                 # control_k | control_ell | observer_p
    params: PhysicsParams
    family: str               # boundary family the kernel serves
    iterations: int
    last_increment: float
    residual: KernelResidual | None = None
    _dcache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def variable_map(self) -> str:
        return "observer" if self.role == OBSERVER_ROLE else "control"

    def _deriv_poly(self, q: int, w: int) -> Poly2:
        key = (q, w)
        if key not in self._dcache:
            p = self.G
            for _ in range(q):
                p = p.diff("s")
            for _ in range(w):
                p = p.diff("t")
            self._dcache[key] = p
        return self._dcache[key]

    def st_of_xy(self, x, y):
        if self.variable_map == "control":
            return np.asarray(y) - np.asarray(x), self.params.L - np.asarray(y)
        return np.asarray(y) - np.asarray(x), np.asarray(x)


def _solve_fixed_point(
    seed: Poly2,
    params: PhysicsParams,
    op_family: str,
    tol: float,
    max_iter: int,
    degree_cap: int | None,
) -> tuple[Poly2, int, float]:
    """Iterate G <- seed + P G, returning (G, iterations, last increment bound)."""
    if degree_cap is None:
        degree_cap = 4 * max_iter + 4
    G = seed
    inc = seed
    L = params.L
    for n in range(1, max_iter + 1):
        inc = apply_P(inc, params, op_family, degree_cap)
        G = (G + inc).flush_tiny()
        b = inc.sup_bound(L)
        if b <= tol:
            return G.trimmed(), n, b
    raise KernelError(
        f"kernel iteration did not reach tol={tol:g} within {max_iter} steps "
        f"(last increment bound {inc.sup_bound(L):.3e})"
    )


def solve_kernel(
    params: PhysicsParams,
    family: str | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    degree_cap: int | None = None,
    with_residual: bool = True,
) -> Kernel:
    """Construct the control kernel for the given boundary family.

    Successive approximation from the seed ``-(r~/3) s t``; stops when the
    sup bound of the increment drops below ``tol``.
    """
    if tol <= 0:
        raise ConfigError("tol must be positive")
    if max_iter < 1:
        raise ConfigError("max_iter must be at least 1")
    family = family or params.bc_family
    role = "control_k" if family == "A" else "control_ell"
    if params.r == 0.0:
        warnings.warn("r = 0: kernel is identically zero, feedback degenerates to 0")
        kern = Kernel(Poly2.zero(), role, params, family, 0, 0.0)
        kern.residual = KernelResidual(0.0, 0.0)
        return kern
    seed = Poly2.monomial(1, 1, -params.r_t / 3.0)
    G, its, last = _solve_fixed_point(seed, params, family, tol, max_iter, degree_cap)
    kern = Kernel(G, role, params, family, its, last)
    if with_residual:
        kern.residual = kernel_residual(kern)
    return kern


def observer_kernel(
    params: PhysicsParams,
    family: str | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    degree_cap: int | None = None,
    with_residual: bool = True,
) -> Kernel:
    """Construct the observer output-injection kernel ``p``.

    Both boundary families share the same kernel polynomial: the BVP for
    ``p`` has homogeneous data on the edges ``x = 0`` and ``y = x`` and
    reduces, in the variables ``s = y - x``, ``t = x``, to the family-A
    fixed point with the same seed and the same (positive) rate.  The
    kernel therefore coincides with the control kernel reflected through
    ``(x, y) -> (L - y, L - x)``.  Family only matters for the gain
    formula applied downstream.
    """
    if tol <= 0:
        raise ConfigError("tol must be positive")
    family = family or params.bc_family
    if params.r == 0.0:
        warnings.warn("r = 0: observer kernel is identically zero, gain degenerates to 0")
        kern = Kernel(Poly2.zero(), OBSERVER_ROLE, params, family, 0, 0.0)
        kern.residual = KernelResidual(0.0, 0.0)
        return kern
    seed = Poly2.monomial(1, 1, -params.r_t / 3.0)
    G, its, last = _solve_fixed_point(seed, params, "A", tol, max_iter, degree_cap)
    kern = Kernel(G, OBSERVER_ROLE, params, family, its, last)
    if with_residual:
        kern.residual = kernel_residual(kern)
    return kern


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def kernel_eval(kern: Kernel, x, y, dx_order: int = 0, dy_order: int = 0):
    """Evaluate the kernel or a partial derivative at points of the triangle.

    Derivatives are taken in the physical variables (x, y) and computed by
    the affine chain rule on the coefficient grid, so they are exact up to
    round-off.  Orders up to total degree three are supported (what the
    main equation needs).  Scalar or array input.
    """
    if dx_order < 0 or dy_order < 0 or dx_order + dy_order > 3:
        raise ValueError("derivative orders must be nonnegative with total <= 3")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    L = kern.params.L
    slack = 1e-9 * max(L, 1.0)
    if np.any(xa < -slack) or np.any(ya - xa < -slack) or np.any(ya > L + slack):
        raise DomainError("points must satisfy 0 <= x <= y <= L")

    xs, xt, ys, yt = _CHAIN[kern.variable_map]
    s, t = kern.st_of_xy(xa, ya)
    acc = np.zeros(np.broadcast(xa, ya).shape, dtype=complex)
    for i in range(dx_order + 1):
        ci = math.comb(dx_order, i) * (xs ** i) * (xt ** (dx_order - i))
        if ci == 0.0:
            continue
        for j in range(dy_order + 1):
            cj = math.comb(dy_order, j) * (ys ** j) * (yt ** (dy_order - j))
            if cj == 0.0:
                continue
            q = i + j
            w = (dx_order - i) + (dy_order - j)
            acc = acc + (ci * cj) * kern._deriv_poly(q, w)(s, t)
    if acc.ndim == 0:
        return complex(acc)
    return acc


def kernel_eval_grid(kern: Kernel, xnodes: np.ndarray) -> np.ndarray:
    """Kernel values on all grid pairs: ``K[i, j] = kappa(x_i, x_j)`` for j >= i.

    Entries below the diagonal are zero.  Exploits that both variable maps
    send the node lattice to a tensor product in (s, t).
    """
    xnodes = np.asarray(xnodes, dtype=float)
    M = xnodes.size
    L = kern.params.L
    h = xnodes[1] - xnodes[0]
    dvals = np.arange(M) * h                      # s = x_j - x_i
    if kern.variable_map == "control":
        tvals = L - xnodes                        # t indexed by j
        V = kern.G.eval_grid(dvals, tvals)        # V[d, j]
    else:
        tvals = xnodes                            # t = x_i, indexed by i
        V = kern.G.eval_grid(dvals, tvals)        # V[d, i]
    K = np.zeros((M, M), dtype=complex)
    ii, jj = np.tril_indices(M)                   # j >= i via transpose below
    i_idx, j_idx = jj, ii                         # upper triangle j >= i
    d_idx = j_idx - i_idx
    if kern.variable_map == "control":
        K[i_idx, j_idx] = V[d_idx, j_idx]
    else:
        K[i_idx, j_idx] = V[d_idx, i_idx]
    return K


def observer_gain(kern: Kernel, xnodes: np.ndarray, family: str | None = None) -> np.ndarray:
    """Output-injection gain profile sampled on the grid nodes.

    Family A (curvature measurement at x = L): ``-i beta p(x, L)``.
    Family B (Dirichlet measurement at x = L):
    ``-i beta p_yy(x, L) + alpha p_y(x, L) - i delta p(x, L)``.
    The sign convention pairs with an error equation carrying
    ``+ gain * trace`` on the left-hand side.
    """
    if kern.role != OBSERVER_ROLE:
        raise ConfigError("observer_gain needs an observer kernel")
    family = family or kern.family
    x = np.asarray(xnodes, dtype=float)
    L = kern.params.L
    b, a, d = kern.params.beta, kern.params.alpha, kern.params.delta
    yL = np.full_like(x, L)
    p0 = kernel_eval(kern, x, yL, 0, 0)
    if family == "A":
        return -1j * b * p0
    p1 = kernel_eval(kern, x, yL, 0, 1)
    p2 = kernel_eval(kern, x, yL, 0, 2)
    return -1j * b * p2 + a * p1 - 1j * d * p0


# ---------------------------------------------------------------------------
# residual verification
# ---------------------------------------------------------------------------


def _interior_lattice(L: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n x n points strictly inside the triangle, offset half a cell from edges."""
    u = (np.arange(n) + 0.5) * L / n
    x = np.repeat(u, n)
    v = (np.arange(n) + 0.5) / n
    y = x + np.tile(v, n) * (L - x)
    return x, y


def kernel_residual(kern: Kernel, n: int = 51) -> KernelResidual:
    """Sample the kernel's PDE and boundary conditions on lattices.

    The PDE residual substitutes exact polynomial derivatives into the
    third-order main equation (rate term ``+r~`` for control kernels,
    ``-r~`` for observer kernels).  Boundary residuals cover the edge and
    diagonal conditions of the respective problem.
    """
    P = kern.params
    L, at, dt_, rt = P.L, P.alpha_t, P.delta_t, P.r_t
    x, y = _interior_lattice(L, n)

    def ke(a, b, xx=x, yy=y):
        return kernel_eval(kern, xx, yy, a, b)

    sigma = 1.0 if kern.role in CONTROL_ROLES else -1.0
    pde = (
        ke(3, 0) + ke(0, 3)
        - 1j * at * (ke(2, 0) - ke(0, 2))
        + dt_ * (ke(1, 0) + ke(0, 1))
        + sigma * rt * ke(0, 0)
    )
    pde_sup = float(np.max(np.abs(pde))) if pde.size else 0.0

    edge = np.linspace(0.0, L, n)
    Lvec = np.full_like(edge, L)
    zero = np.zeros_like(edge)
    bc_vals = []
    if kern.role == "control_k":
        bc_vals.append(kernel_eval(kern, edge, edge, 0, 0))
        bc_vals.append(kernel_eval(kern, edge, Lvec, 0, 0))
        ddiag = kernel_eval(kern, edge, edge, 2, 0) + kernel_eval(kern, edge, edge, 1, 1)
        bc_vals.append(ddiag + rt / 3.0)
    elif kern.role == "control_ell":
        bc_vals.append(kernel_eval(kern, edge, edge, 0, 0))
        bc_vals.append(kernel_eval(kern, edge, edge, 1, 0) - (rt / 3.0) * (L - edge))
        robin = (
            kernel_eval(kern, edge, Lvec, 0, 2)
            + 1j * at * kernel_eval(kern, edge, Lvec, 0, 1)
            + dt_ * kernel_eval(kern, edge, Lvec, 0, 0)
        )
        bc_vals.append(robin)
    else:  # observer_p
        bc_vals.append(kernel_eval(kern, zero, edge, 0, 0))
        bc_vals.append(kernel_eval(kern, edge, edge, 0, 0))
        ddiag = kernel_eval(kern, edge, edge, 2, 0) + kernel_eval(kern, edge, edge, 1, 1)
        bc_vals.append(ddiag - rt / 3.0)
    bc_sup = float(max(np.max(np.abs(v)) for v in bc_vals))
    return KernelResidual(pde_sup=pde_sup, bc_sup=bc_sup)


# ---------------------------------------------------------------------------
# text export / import (kernel caching)
# ---------------------------------------------------------------------------


def save_kernel(kern: Kernel, path) -> None:
    """Write the kernel as a JSON header line plus ``i j re im`` rows."""
    head = {
        "role": kern.role,
        "family": kern.family,
        "beta": kern.params.beta,
        "alpha": kern.params.alpha,
        "delta": kern.params.delta,
        "r": kern.params.r,
        "L": kern.params.L,
        "p_power": kern.params.p_power,
        "bc_family": kern.params.bc_family,
        "iterations": kern.iterations,
        "last_increment": kern.last_increment,
        "pde_sup": kern.residual.pde_sup if kern.residual else None,
        "bc_sup": kern.residual.bc_sup if kern.residual else None,
    }
    rows = []
    c = kern.G.coeffs
    for i, j in zip(*np.nonzero(c)):
        rows.append(f"{i} {j} {c[i, j].real:.17g} {c[i, j].imag:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        fh.write(f"degree {kern.G.degree}\n")
        fh.write("\n".join(rows) + ("\n" if rows else ""))


def load_kernel(path) -> Kernel:
    """Reload a kernel written by :func:`save_kernel` (bit-exact coefficients)."""
    with open(path, encoding="utf-8") as fh:
        head = json.loads(fh.readline())
        degline = fh.readline().split()
        if len(degline) != 2 or degline[0] != "degree":
            raise ConfigError(f"malformed kernel file {path}")
        deg = int(degline[1])
        c = np.zeros((deg + 1, deg + 1), dtype=complex)
        for line in fh:
            if not line.strip():
                continue
            i, j, re, im = line.split()
            c[int(i), int(j)] = complex(float(re), float(im))
    params = PhysicsParams(
        beta=head["beta"], alpha=head["alpha"], delta=head["delta"],
        r=head["r"], L=head["L"], p_power=head.get("p_power", 0.0),
        bc_family=head.get("bc_family", head["family"]),
    )
    kern = Kernel(
        Poly2(c), head["role"], params, head["family"],
        head["iterations"], head["last_increment"],
    )
    if head.get("pde_sup") is not None:
        kern.residual = KernelResidual(head["pde_sup"], head["bc_sup"])
    return kern
