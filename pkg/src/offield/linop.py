"""Discretized integral operators on L2(R^n) with quadrature-weighted algebra.

A kernel K(s, x) sampled on the grid acts by (K xi)(s) = sum_x K(s,x) xi(x) h^n,
so the matrix h^n * K is the operator in coefficient coordinates and every
norm below refers to that weighting.  Kernels are stored dense; the point size
M^n is capped at 512.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    GridMismatchError,
    ParameterError,
    PowerIterationWarning,
)
from .sampling import GridSpec

MAX_POINTS = 512
_POWER_SEED = 0x0FF1E1D


@dataclass(frozen=True)
class VectorL2:
    """A vector in L2(R^n) as grid samples."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        if self.values.shape != (m,) * n:
            raise ParameterError("vector shape does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("vector contains non-finite values")

    def l2_norm(self) -> float:
        h = self.grid.spacing
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * h**self.grid.n))

    def inner(self, other: "VectorL2") -> complex:
        _same_grid(self.grid, other.grid)
        h = self.grid.spacing
        return complex(np.sum(self.values * np.conj(other.values)) * h**self.grid.n)


@dataclass(frozen=True)
class KernelOperator:
    """Dense kernel K(s, x) over one grid for both slots."""

    grid: GridSpec
    kernel: np.ndarray

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        d = m**n
        if d > MAX_POINTS:
            raise ParameterError(f"grid has {d} points per slot; cap is {MAX_POINTS}")
        if self.kernel.shape != (d, d):
            raise ParameterError("kernel must be a square matrix matching the grid")
        if not np.all(np.isfinite(self.kernel)):
            raise ParameterError("kernel contains non-finite values")

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    def __add__(self, other: "KernelOperator") -> "KernelOperator":
        _same_grid(self.grid, other.grid)
        return KernelOperator(self.grid, self.kernel + other.kernel)

    def __sub__(self, other: "KernelOperator") -> "KernelOperator":
        _same_grid(self.grid, other.grid)
        return KernelOperator(self.grid, self.kernel - other.kernel)

    def __mul__(self, scalar) -> "KernelOperator":
        return KernelOperator(self.grid, self.kernel * scalar)

    __rmul__ = __mul__


def _same_grid(a: GridSpec, b: GridSpec):
    if a != b:
        raise GridMismatchError(f"grids differ: {a} vs {b}")


def identity_kernel(grid: GridSpec) -> KernelOperator:
    """Delta surrogate: 1/h^n on the diagonal acts as the identity."""
    d = grid.points_per_axis**grid.n
    return KernelOperator(grid, np.eye(d, dtype=complex) / grid.spacing**grid.n)


def rank_one(eta: VectorL2, zeta: VectorL2) -> KernelOperator:
    """K(s, x) = eta(s) conj(zeta)(x); applies as eta <xi, zeta>."""
    _same_grid(eta.grid, zeta.grid)
    u = eta.values.ravel()
    v = zeta.values.ravel()
    return KernelOperator(eta.grid, np.outer(u, np.conj(v)))


def apply(k: KernelOperator, xi: VectorL2) -> VectorL2:
    _same_grid(k.grid, xi.grid)
    h, n = k.spacing, k.grid.n
    out = k.kernel @ xi.values.ravel() * h**n
    return VectorL2(k.grid, out.reshape(xi.values.shape))


def compose(k: KernelOperator, l: KernelOperator) -> KernelOperator:
    _same_grid(k.grid, l.grid)
    h, n = k.spacing, k.grid.n
    return KernelOperator(k.grid, (k.kernel @ l.kernel) * h**n)


def adjoint_op(k: KernelOperator) -> KernelOperator:
    return KernelOperator(k.grid, np.conj(k.kernel.T))


def hs_norm(k: KernelOperator) -> float:
    h, n = k.spacing, k.grid.n
    return float(np.sqrt(np.sum(np.abs(k.kernel) ** 2) * h ** (2 * n)))


def op_norm(k: KernelOperator, tol: float = 1e-10, method: str = "power",
            max_iter: int = 10_000) -> float:
    """Largest singular value of the weighted kernel matrix.

    ``power`` iterates A*A with a deterministic random start until the
    Rayleigh estimate changes by less than tol relatively (cap max_iter,
    warning carries the last estimate); ``svd`` is the dense fallback.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    a = k.kernel * k.spacing**k.grid.n
    if method == "svd":
        return float(np.linalg.svd(a, compute_uv=False)[0])
    if method != "power":
        raise ParameterError(f"unknown op_norm method {method!r}")
    d = a.shape[0]
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    nv = np.linalg.norm(v)
    v /= nv
    ah = np.conj(a.T)
    sigma_old = -1.0
    sigma = 0.0
    for _ in range(max_iter):
        w = a @ v
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            return 0.0
        v = ah @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        if abs(sigma - sigma_old) <= tol * max(sigma, 1e-300):
            return sigma
        sigma_old = sigma
    warnings.warn(
        PowerIterationWarning(
            f"power iteration hit the {max_iter} cap at estimate {sigma}", sigma
        )
    )
    return sigma


def truncate(k: KernelOperator, t: float, s: float, side: str = "right") -> KernelOperator:
    """Compose with the multiplication by the indicator of (t-s, t+s).

    right: K o M (columns outside the window zeroed); left: M o K (rows);
    both: both.  n = 1 only; the indicator is a self-adjoint projection so
    truncating twice with the same window is idempotent.
    """
    if k.grid.n != 1:
        raise ParameterError("truncate supports n=1 kernels")
    if not s > 0:
        raise ParameterError("window half-width s must be positive")
    axis = k.grid.axis
    inside = np.abs(axis - t) < s
    kernel = k.kernel.copy()
    if side in ("right", "both"):
        kernel[:, ~inside] = 0.0
    if side in ("left", "both"):
        kernel[~inside, :] = 0.0
    if side not in ("right", "left", "both"):
        raise ParameterError(f"unknown truncation side {side!r}")
    return KernelOperator(k.grid, kernel)


def mask_columns(k: KernelOperator, keep: np.ndarray) -> KernelOperator:
    """Compose with multiplication by an arbitrary index mask (n=1)."""
    if k.grid.n != 1:
        raise ParameterError("mask_columns supports n=1 kernels")
    kernel = k.kernel.copy()
    kernel[:, ~np.asarray(keep, dtype=bool)] = 0.0
    return KernelOperator(k.grid, kernel)


def translate(k: KernelOperator, r: float) -> KernelOperator:
    """Unitary conjugation U(r) K U(-r): kernel (s, x) -> K(s+r, x+r).

    r must be a multiple of the spacing; the shift wraps periodically, which
    keeps U(r) exactly unitary on the grid.
    """
    if k.grid.n != 1:
        raise ParameterError("translate supports n=1 kernels")
    h = k.spacing
    steps = r / h
    nearest = round(steps)
    if abs(steps - nearest) > 1e-9:
        raise AlignmentError(f"translation {r} is not grid-aligned (spacing {h})")
    if nearest == 0:
        return k
    kernel = np.roll(k.kernel, (-nearest, -nearest), axis=(0, 1))
    return KernelOperator(k.grid, kernel)


def snap_to_grid(r: float, grid: GridSpec) -> float:
    """Nearest grid-aligned translation amount."""
    h = grid.spacing
    return h * round(r / h)
