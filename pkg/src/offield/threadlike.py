"""Coadjoint machinery and representation kernels for thread-like groups G_N.

Points of the dual Lie algebra are row vectors (xi_N, ..., xi_1); the
one-parameter coadjoint flow acts by

    (t . xi)_j = sum_{k=0}^{j-1} (-t)^k / k! xi_{j-k},   1 <= j <= N-1,

with the top slot flattened to zero (orbits fill it).  The degree <= N-2
polynomial xi-hat(t) = (t . xi)_{N-1} linearizes the flow into argument
shifts, which is what every asymptotic argument below runs on.

Group elements act on L2(R) through kernels k(s, t) = fhat2(s - t, t . ell)
where fhat2 is the compactly supported transform data of a test function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridTooSmallError, ParameterError
from .linop import KernelOperator
from .sampling import DECAY_FLOOR, GridSpec, Symbol, grid_fft


@dataclass(frozen=True)
class CoadjointPoint:
    """xi in the dual of g_N, coords ordered (xi_N, ..., xi_1)."""

    N: int
    coords: tuple

    def __post_init__(self):
        if self.N < 3:
            raise ParameterError("thread-like groups need N >= 3")
        if len(self.coords) != self.N:
            raise ParameterError("coords must have length N")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not all(math.isfinite(c) for c in self.coords):
            raise ParameterError("coords must be finite")

    def component(self, j: int) -> float:
        """xi_j = xi(X_j); j runs 1..N."""
        if not 1 <= j <= self.N:
            raise ParameterError(f"component index {j} outside 1..{self.N}")
        return self.coords[self.N - j]

    def bstar(self) -> np.ndarray:
        """Restriction to the abelian ideal: (xi_{N-1}, ..., xi_1)."""
        return np.array(self.coords[1:])


def coadjoint_translate(xi: CoadjointPoint, t: float) -> CoadjointPoint:
    """The flow exp(t X_N) acting on the dual; output lives in the slice V."""
    n = xi.N
    new = [0.0] * n
    for j in range(1, n):
        acc = 0.0
        fac = 1.0
        for k in range(j):
            acc += fac * xi.component(j - k)
            fac *= -t / (k + 1)
        new[n - j] = acc
    return CoadjointPoint(n, tuple(new))


@dataclass(frozen=True)
class OrbitPolynomial:
    """Real polynomial in ascending coefficient order, degree <= N-2."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", arr)

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)


def xi_hat(xi: CoadjointPoint) -> OrbitPolynomial:
    """The polynomial t -> (t . xi)_{N-1}; a linear isomorphism on the slice V."""
    n = xi.N
    coeffs = [(-1.0) ** k / math.factorial(k) * xi.component(n - 1 - k)
              for k in range(n - 1)]
    return OrbitPolynomial(np.array(coeffs))


def xi_hat_inverse(poly: OrbitPolynomial, N: int) -> CoadjointPoint:
    """Recover the slice point with the given orbit polynomial (xi_N = 0)."""
    coeffs = np.zeros(N - 1)
    given = poly.coeffs
    if given.size > N - 1:
        if np.any(np.abs(given[N - 1:]) > 0):
            raise ParameterError(f"degree {given.size - 1} exceeds N-2 = {N - 2}")
        given = given[: N - 1]
    coeffs[: given.size] = given
    coords = [0.0] * N
    for k in range(N - 1):
        coords[k + 1] = (-1.0) ** k * math.factorial(k) * coeffs[k]
    return CoadjointPoint(N, tuple(coords))


@dataclass(frozen=True)
class LayerInfo:
    kind: str  # 'generic' or 'character'
    j: Optional[int]
    character: Optional[tuple]
    canonical: CoadjointPoint


def layer_and_canonical(ell: CoadjointPoint, tol_zero: float = 1e-12) -> LayerInfo:
    """Detect the layer of ell and its canonical orbit representative.

    Generic layer j: smallest j <= N-2 with xi_j != 0; the unique orbit point
    with vanishing (j+1)-slot is reached at t = xi_{j+1} / xi_j (the lower
    slots cannot move).  Otherwise ell is a character (a, b) = (xi_N, xi_{N-1}).
    """
    n = ell.N
    for j in range(1, n - 1):
        if abs(ell.component(j)) > tol_zero:
            t_star = ell.component(j + 1) / ell.component(j)
            return LayerInfo("generic", j, None, coadjoint_translate(ell, t_star))
    return LayerInfo("character", None,
                     (ell.component(n), ell.component(n - 1)), ell)


def _multilinear(values: np.ndarray, axes: list, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation with zero fill outside every axis range."""
    ndim = values.ndim
    shape = pts.shape[:-1]
    flat = pts.reshape(-1, ndim)
    npts = flat.shape[0]
    idx0 = np.empty((npts, ndim), dtype=int)
    frac = np.empty((npts, ndim))
    inside = np.ones(npts, dtype=bool)
    for d in range(ndim):
        axis = axes[d]
        step = axis[1] - axis[0]
        f = (flat[:, d] - axis[0]) / step
        base = np.floor(f)
        idx0[:, d] = base.astype(int)
        frac[:, d] = f - base
        inside &= (f >= 0.0) & (f <= axis.size - 1)
    out = np.zeros(npts, dtype=complex)
    for corner in range(1 << ndim):
        weight = np.ones(npts)
        gather = np.empty((npts, ndim), dtype=int)
        ok = inside.copy()
        for d in range(ndim):
            up = (corner >> d) & 1
            weight = weight * (frac[:, d] if up else 1.0 - frac[:, d])
            gi = idx0[:, d] + up
            ok &= (gi >= 0) & (gi < axes[d].size)
            gather[:, d] = np.clip(gi, 0, axes[d].size - 1)
        vals = values[tuple(gather[:, d] for d in range(ndim))]
        out += np.where(ok, weight * vals, 0.0)
    return out.reshape(shape)


@dataclass(frozen=True)
class FHat2:
    """Compactly supported transform data on R x b*, with b* = R^{N-1}.

    ``grid`` carries the s-axis; ``ell_axes`` are the uniform axes of the
    N-1 dual-ideal coordinates (xi_{N-1} first).  ``support`` declares the
    box outside which values vanish.  ``evaluator(sigma, ell)`` is an optional
    closed form used instead of interpolation when available.
    """

    grid: GridSpec
    ell_axes: tuple
    values: np.ndarray
    support: tuple
    evaluator: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        m = self.grid.points_per_axis
        expect = (m,) + tuple(ax.size for ax in self.ell_axes)
        if self.values.shape != expect:
            raise ParameterError("values shape does not match the axes")
        if len(self.support) != 1 + len(self.ell_axes):
            raise ParameterError("support box needs one interval per axis")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("values must be finite")
        axes = [self.grid.axis] + list(self.ell_axes)
        for d, (lo, hi) in enumerate(self.support):
            outside = (axes[d] < lo) | (axes[d] > hi)
            sl = [slice(None)] * self.values.ndim
            sl[d] = outside
            if np.any(np.abs(self.values[tuple(sl)]) > 0):
                raise ParameterError(f"values leak outside the support box on axis {d}")

    @property
    def N(self) -> int:
        return len(self.ell_axes) + 1

    def eval(self, sigma: np.ndarray, ell_pts: np.ndarray) -> np.ndarray:
        """fhat2 at (sigma, ell); sigma broadcastable against ell_pts[..., 0]."""
        sigma = np.asarray(sigma, dtype=float)
        ell_pts = np.asarray(ell_pts, dtype=float)
        sig = np.broadcast_to(sigma, ell_pts.shape[:-1])
        if self.evaluator is not None:
            return self.evaluator(sig, ell_pts)
        pts = np.concatenate([sig[..., None], ell_pts], axis=-1)
        return _multilinear(self.values, [self.grid.axis] + list(self.ell_axes), pts)

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())


def _bump(x):
    """C-infinity bump on (-1, 1), max 1 at 0, exactly zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def make_bump_fhat2(grid: GridSpec, N: int, s_width: float, ell_centers,
                    ell_widths, ell_axes=None, amplitude: float = 1.0) -> FHat2:
    """Product bump: exactly supported in the declared box, smooth inside."""
    centers = [float(c) for c in ell_centers]
    widths = [float(w) for w in ell_widths]
    if len(centers) != N - 1 or len(widths) != N - 1:
        raise ParameterError("need N-1 centers and widths")
    if ell_axes is None:
        ell_axes = tuple(grid.dual_axis for _ in range(N - 1))
    else:
        ell_axes = tuple(np.asarray(ax, dtype=float) for ax in ell_axes)

    def evaluator(sigma, ell_pts):
        out = amplitude * _bump(sigma / s_width)
        for d in range(N - 1):
            out = out * _bump((ell_pts[..., d] - centers[d]) / widths[d])
        return out.astype(complex)

    mesh = np.meshgrid(grid.axis, *ell_axes, indexing="ij")
    vals = amplitude * _bump(mesh[0] / s_width)
    for d in range(N - 1):
        vals = vals * _bump((mesh[d + 1] - centers[d]) / widths[d])
    support = ((-s_width, s_width),) + tuple(
        (c - w, c + w) for c, w in zip(centers, widths)
    )
    return FHat2(grid, ell_axes, vals.astype(complex), support, evaluator)


def make_heisenberg_fhat2(f) -> FHat2:
    """The N=3 transform data of a Heisenberg test function.

    In polarized coordinates g = exp(s X_3) exp(u_2 X_2 + u_1 X_1) the group
    samples shear against the symmetric coordinates, which lands on
    fhat2(s, l2, l1) = fhat23(s, l2 - s l1 / 2, l1); each sheared row is
    evaluated by an exact quadrature sum, not interpolation.
    """
    grid = f.grid
    if grid.n != 1:
        raise ParameterError("make_heisenberg_fhat2 needs an H_1 function")
    h = grid.spacing
    tslice = grid_fft(f.values, (2,), h)  # (x, y, lambda)
    dual = grid.dual_axis
    y = grid.axis
    # Shear in the u slot = modulation in y: one batched shifted transform.
    pre = tslice * np.exp(
        1j * np.pi * grid.axis[:, None, None] * y[None, :, None] * dual[None, None, :]
    )
    vals = grid_fft(pre, (1,), h)
    rd = grid.dual.extent
    support = ((-grid.extent, grid.extent), (-rd, rd), (-rd, rd))
    return FHat2(grid, (dual, dual), vals, support)


def pi_ell(fh: FHat2, ell: CoadjointPoint, grid: GridSpec) -> KernelOperator:
    """Kernel operator k(s, t) = fhat2(s - t, t . ell) for generic ell."""
    if grid != fh.grid:
        raise ParameterError("operator grid must match the data grid")
    if ell.N != fh.N:
        raise ParameterError("dimension mismatch between ell and the data")
    info = layer_and_canonical(ell)
    if info.kind != "generic":
        raise ParameterError("pi_ell needs a generic-layer point")
    _check_orbit_window(fh, ell, grid)
    t_axis = grid.axis
    orbit = _orbit_curve(ell, t_axis)
    sigma = t_axis[:, None] - t_axis[None, :]
    pts = np.broadcast_to(orbit[None, :, :], (t_axis.size,) + orbit.shape)
    kernel = fh.eval(sigma, pts)
    return KernelOperator(grid, kernel.astype(complex))


def _orbit_curve(ell: CoadjointPoint, ts: np.ndarray) -> np.ndarray:
    """(t . ell) restricted to b*, rows per t: (xi_{N-1}, ..., xi_1)."""
    n = ell.N
    out = np.empty((ts.size, n - 1))
    for j in range(1, n):
        acc = np.zeros(ts.size)
        fac = np.ones(ts.size)
        for k in range(j):
            acc += fac * ell.component(j - k)
            fac *= -ts / (k + 1)
        out[:, n - 1 - j] = acc
    return out


def _check_orbit_window(fh: FHat2, ell: CoadjointPoint, grid: GridSpec):
    """The orbit must have left the support box before t leaves the grid."""
    r = grid.extent
    margin = np.concatenate([np.linspace(-4 * r, -r, 97), np.linspace(r, 4 * r, 97)])
    orbit = _orbit_curve(ell, margin)
    inside = np.ones(margin.size, dtype=bool)
    for d, (lo, hi) in enumerate(fh.support[1:]):
        inside &= (orbit[:, d] >= lo) & (orbit[:, d] <= hi)
    if not np.any(inside):
        return
    peak = float(np.abs(fh.eval(np.zeros(int(inside.sum())), orbit[inside])).max())
    if peak > DECAY_FLOOR * max(fh.max_abs(), 1e-300):
        raise GridTooSmallError(
            "the coadjoint orbit still meets the support box beyond the grid; "
            "enlarge the extent"
        )


def rho_symbol_N(fh: FHat2) -> Symbol:
    """The two-variable zero fiber: transform in s, slice b* at (b, 0, ..., 0)."""
    grid = fh.grid
    dual = grid.dual_axis
    if fh.ell_axes[0].size != dual.size or not np.allclose(fh.ell_axes[0], dual):
        raise ParameterError("the xi_{N-1} axis must equal the dual axis")
    slicer = [slice(None), slice(None)]
    for ax in fh.ell_axes[1:]:
        idx = int(np.argmin(np.abs(ax)))
        if abs(ax[idx]) > 1e-12:
            raise ParameterError("every trailing ell axis must contain 0")
        slicer.append(idx)
    plane = fh.values[tuple(slicer)]
    return Symbol(grid, grid_fft(plane, (0,), grid.spacing))
