"""Exact calculus on bivariate complex polynomials.

A polynomial in the variables (s, t) is stored as a square coefficient
grid ``coeffs`` where ``coeffs[i, j]`` multiplies ``s**i * t**j``.  Only
the lower anti-triangle ``i + j <= degree`` may be populated, which is
the natural storage for the kernel iterations: integration grows the
grid by one row/column, differentiation shrinks it.

All operations return new ``Poly2`` instances; nothing mutates in place,
so values are safe to share between threads.
"""

from __future__ import annotations

import numpy as np

# Coefficients smaller than this in modulus are flushed to exact zero to
# keep denormals out of the iteration.  Far below every tolerance in use.
FLUSH_EPS = 1e-300


class Poly2:
    """Bivariate complex polynomial on a coefficient grid."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: np.ndarray):
        c = np.ascontiguousarray(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficient grid must be square, got {c.shape}")
        self.coeffs = c

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, degree: int = 0) -> "Poly2":
        return cls(np.zeros((degree + 1, degree + 1), dtype=complex))

    @classmethod
    def monomial(cls, i: int, j: int, coeff: complex = 1.0) -> "Poly2":
        """coeff * s**i * t**j."""
        n = i + j
        c = np.zeros((n + 1, n + 1), dtype=complex)
        c[i, j] = coeff
        return cls(c)

    # -- basic queries -------------------------------------------------

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def trimmed(self) -> "Poly2":
        """Drop trailing all-zero rows/columns (degree bound only shrinks)."""
        c = self.coeffs
        n = c.shape[0]
        while n > 1 and not np.any(c[n - 1, :]) and not np.any(c[:, n - 1]):
            n -= 1
        return Poly2(c[:n, :n]) if n < c.shape[0] else self

    # -- linear space ---------------------------------------------------

    def __add__(self, other: "Poly2") -> "Poly2":
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        c = np.zeros((n, n), dtype=complex)
        a, b = self.coeffs, other.coeffs
        c[: a.shape[0], : a.shape[1]] = a
        c[: b.shape[0], : b.shape[1]] += b
        return Poly2(c)

    def __sub__(self, other: "Poly2") -> "Poly2":
        return self + (other * (-1.0))

    def __mul__(self, scalar: complex) -> "Poly2":
        return Poly2(self.coeffs * scalar)

    __rmul__ = __mul__

    # -- calculus --------------------------------------------------------

    def diff(self, var: str) -> "Poly2":
        """Partial derivative with respect to 's' or 't'.

        Pure shift-and-scale on the grid; the degree bound drops by one
        (floor zero).
        """
        c = self.coeffs
        n = c.shape[0]
        if n == 1:
            return Poly2.zero()
        out = np.zeros((n - 1, n - 1), dtype=complex)
        if var == "s":
            k = np.arange(1, n).reshape(-1, 1)
            out[:, :] = k * c[1:, : n - 1]
        elif var == "t":
            k = np.arange(1, n).reshape(1, -1)
            out[:, :] = k * c[: n - 1, 1:]
        else:
            raise ValueError(f"var must be 's' or 't', got {var!r}")
        return Poly2(out)

    def integrate(self, var: str) -> "Poly2":
        """Antiderivative vanishing at ``var = 0``; degree bound grows by one."""
        c = self.coeffs
        n = c.shape[0]
        out = np.zeros((n + 1, n + 1), dtype=complex)
        if var == "s":
            k = np.arange(1, n + 1).reshape(-1, 1)
            out[1:, :n] = c / k
        elif var == "t":
            k = np.arange(1, n + 1).reshape(1, -1)
            out[:n, 1:] = c / k
        else:
            raise ValueError(f"var must be 's' or 't', got {var!r}")
        return Poly2(out)

    def flush_tiny(self) -> "Poly2":
        """Zero out coefficients below the denormal guard threshold."""
        c = self.coeffs.copy()
        c[np.abs(c) < FLUSH_EPS] = 0.0
        return Poly2(c)

    # -- evaluation -------------------------------------------------------

    def __call__(self, s, t):
        """Horner evaluation; accepts scalars or broadcastable arrays."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        c = self.coeffs
        n = c.shape[0]
        # rows first: r_i(t) by Horner over columns, then Horner in s
        acc = np.zeros(np.broadcast(s, t).shape, dtype=complex)
        for i in range(n - 1, -1, -1):
            row = c[i]
            rval = np.full_like(acc, row[n - 1])
            for j in range(n - 2, -1, -1):
                rval = rval * t + row[j]
            acc = acc * s + rval
        if acc.ndim == 0:
            return complex(acc)
        return acc

    def eval_grid(self, svals: np.ndarray, tvals: np.ndarray) -> np.ndarray:
        """Evaluate on the tensor grid ``svals x tvals``.

        Returns a matrix ``V`` with ``V[a, b] = p(svals[a], tvals[b])``.
        Uses a Vandermonde product so large grids go through BLAS.
        """
        svals = np.asarray(svals, dtype=float)
        tvals = np.asarray(tvals, dtype=float)
        n = self.coeffs.shape[0]
        # R[i, b] = sum_j c[i, j] t_b^j   (Horner over j)
        R = np.zeros((n, tvals.size), dtype=complex)
        for i in range(n):
            row = self.coeffs[i]
            rval = np.full(tvals.shape, row[n - 1], dtype=complex)
            for j in range(n - 2, -1, -1):
                rval = rval * tvals + row[j]
            R[i] = rval
        V = np.vander(svals, n, increasing=True).astype(complex)
        return V @ R

    # -- bounds -----------------------------------------------------------

    def sup_bound(self, L: float) -> float:
        """``sum |c_ij| L^(i+j)``: upper bound for sup over the triangle.

        Rigorous over-estimate of the supremum norm on
        ``{0 <= s, 0 <= t, s + t <= L}``; used as the iteration stopping
        metric and for the convergence-bound checks.
        """
        if L <= 0:
            raise ValueError("L must be positive")
        n = self.coeffs.shape[0]
        pw = L ** np.arange(n)
        return float(np.abs(self.coeffs) @ pw @ pw)

    def __repr__(self) -> str:  # pragma: no cover
        nz = int(np.count_nonzero(self.coeffs))
        return f"Poly2(degree<={self.degree}, nonzeros={nz})"
