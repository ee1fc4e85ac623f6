"""Uniform grids, test functions, and the Fourier transforms behind everything else.

Functions on the (2n+1)-dimensional Heisenberg group H_n are held as samples on
a symmetric tensor grid [-R, R)^d with M points per axis, x_j = -R + j*(2R/M).
All quadratures are periodic trapezoid sums carrying the explicit spacing
factor, so the discrete transforms below are exact statements about those sums:

    F(xi_m) = h * sum_j f(x_j) exp(-2 pi i x_j xi_m),

with xi_m running over the dual grid of spacing 1/(2R).  Schwartz-class decay
is enforced as a boundary-shell invariant, which keeps periodization error
below every tolerance used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooSmallError, OffGridError, ParameterError

# Boundary-shell modulus must stay below DECAY_FLOOR times the global max for
# a sampled function to count as a Schwartz-class surrogate.
DECAY_FLOOR = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Symmetric uniform grid on [-extent, extent) with points_per_axis samples.

    ``n`` is the half-dimension: functions on H_n carry 2n+1 sampled axes,
    vectors in L2(R^n) carry n.
    """

    n: int
    points_per_axis: int
    extent: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("half-dimension n must be a positive integer")
        m = self.points_per_axis
        if m < 8 or (m & (m - 1)) != 0:
            raise ParameterError("points_per_axis must be a power of two >= 8")
        if not self.extent > 0:
            raise ParameterError("extent must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points_per_axis

    @property
    def axis(self) -> np.ndarray:
        m = self.points_per_axis
        return -self.extent + self.spacing * np.arange(m)

    @property
    def dual(self) -> "GridSpec":
        """Frequency grid: spacing 1/(2R), extent M/(4R); dual of dual == self."""
        m = self.points_per_axis
        return GridSpec(self.n, m, m / (4.0 * self.extent))

    @property
    def dual_axis(self) -> np.ndarray:
        return self.dual.axis

    @property
    def dual_spacing(self) -> float:
        return 1.0 / (2.0 * self.extent)


def grid_fft(values: np.ndarray, axes, step: float) -> np.ndarray:
    """Quadrature Fourier transform along ``axes``: grid samples -> dual samples.

    Computes h^len(axes) * sum f(x) exp(-2 pi i x.xi) exactly (as a sum) for xi
    on the dual grid, via shifted FFTs.
    """
    axes = tuple(np.atleast_1d(axes))
    out = values
    for ax in axes:
        out = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(out, ax), axis=ax), ax)
    return out * step ** len(axes)


def grid_ifft(values: np.ndarray, axes, dual_step: float) -> np.ndarray:
    """Inverse quadrature transform: dual samples -> grid samples.

    Computes dfreq^len(axes) * sum F(xi) exp(+2 pi i x.xi).
    """
    axes = tuple(np.atleast_1d(axes))
    out = values
    m = None
    for ax in axes:
        m = out.shape[ax]
        out = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(out, ax), axis=ax), ax)
    scale = (m * dual_step) ** len(axes)
    return out * scale


def boundary_shell_max(values: np.ndarray) -> float:
    """Max modulus over the outermost index shell (any index 0 or M-1)."""
    peak = 0.0
    for ax in range(values.ndim):
        face = np.abs(values.take(0, axis=ax)).max()
        peak = max(peak, float(face))
        face = np.abs(values.take(values.shape[ax] - 1, axis=ax)).max()
        peak = max(peak, float(face))
    return peak


def _check_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise ParameterError(f"{what} contains non-finite values")


def _check_decay(values: np.ndarray, what: str):
    overall = float(np.abs(values).max()) if values.size else 0.0
    shell = boundary_shell_max(values)
    if shell > DECAY_FLOOR * overall:
        raise GridTooSmallError(
            f"{what}: boundary shell max {shell:.3e} exceeds "
            f"{DECAY_FLOOR:.0e} x overall max {overall:.3e}; enlarge the extent"
        )


@dataclass(frozen=True)
class SampledFunctionH:
    """A test function on H_n sampled over (x, y, t) in R^n x R^n x R.

    ``require_decay=False`` admits bounded functions such as matrix
    coefficients, which are legitimately non-decaying on the group.
    """

    grid: GridSpec
    values: np.ndarray
    require_decay: bool = True

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        if self.values.shape != (m,) * (2 * n + 1):
            raise ParameterError("values shape does not match the grid")
        _check_finite(self.values, "sampled function")
        if self.require_decay:
            _check_decay(self.values, "sampled function")

    def l2_norm(self) -> float:
        h = self.grid.spacing
        d = 2 * self.grid.n + 1
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * h**d))


@dataclass(frozen=True)
class PartialSpectrum23:
    """Partial Fourier transform samples over (s, u, lambda).

    s stays on the spatial grid; u (n axes) and lambda live on the dual grid.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        if self.values.shape != (m,) * (2 * n + 1):
            raise ParameterError("values shape does not match the grid")
        _check_finite(self.values, "partial spectrum")
        _check_decay(self.values, "partial spectrum")


@dataclass(frozen=True)
class Symbol:
    """Sampled transform h-hat(a, b) on the dual grid; the commutative fiber.

    ``grid`` is the underlying spatial grid; both symbol axes run over its
    dual axis.  ``sup_norm`` caches max |values|.
    """

    grid: GridSpec
    values: np.ndarray
    sup_norm: float = None  # type: ignore[assignment]

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        if self.values.shape != (m,) * (2 * n):
            raise ParameterError("symbol shape does not match the grid")
        _check_finite(self.values, "symbol")
        _check_decay(self.values, "symbol")
        sup = float(np.abs(self.values).max()) if self.values.size else 0.0
        object.__setattr__(self, "sup_norm", sup)

    @property
    def axis(self) -> np.ndarray:
        return self.grid.dual_axis


@dataclass(frozen=True)
class Window:
    """A unit L2-norm window on R^n, sampled on the spatial grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        m, n = self.grid.points_per_axis, self.grid.n
        if self.values.shape != (m,) * n:
            raise ParameterError("window shape does not match the grid")
        _check_finite(self.values, "window")
        norm = self.l2_norm()
        if abs(norm - 1.0) > 1e-10:
            raise ParameterError(f"window L2 norm {norm} is not 1 within 1e-10")

    def l2_norm(self) -> float:
        h = self.grid.spacing
        n = self.grid.n
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * h**n))

    def spectrum(self) -> np.ndarray:
        """Cached quadrature Fourier coefficients on the dual grid."""
        cached = getattr(self, "_spectrum", None)
        if cached is None:
            axes = tuple(range(self.grid.n))
            cached = grid_fft(self.values, axes, self.grid.spacing)
            object.__setattr__(self, "_spectrum", cached)
        return cached

    def eval_at(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the window at arbitrary real points (n=1 grids).

        Uses the trigonometric interpolant through the samples, which for a
        band-limited-at-floor window reproduces the function to the decay
        floor; points outside [-R, R] evaluate to zero.
        """
        if self.grid.n != 1:
            raise ParameterError("eval_at supports n=1 windows")
        pts = np.asarray(points, dtype=float)
        spec = self.spectrum()
        xi = self.grid.dual_axis
        dxi = self.grid.dual_spacing
        flat = pts.ravel()
        inside = np.abs(flat) <= self.grid.extent
        out = np.zeros(flat.shape, dtype=complex)
        if np.any(inside):
            phases = np.exp(2j * np.pi * np.outer(flat[inside], xi))
            out[inside] = phases @ spec * dxi
        return out.reshape(pts.shape)


def make_test_function(kind: str, params, grid: GridSpec) -> SampledFunctionH:
    """Build a Schwartz-class surrogate on the group grid.

    kinds:
      gaussian          params [w] or [w, c_1..c_{2n+1}]: exp(-pi |g - c|^2 / w^2)
      hermite_modulated params [w, d]: H_d(x_1) times the width-w Gaussian
      compact_bump      params [w]: radial C-infinity bump, support |g| < w
    """
    n, m = grid.n, grid.points_per_axis
    d = 2 * n + 1
    params = list(params)
    if not params:
        raise ParameterError("params must at least carry a width")
    w = float(params[0])
    if w <= 0:
        raise ParameterError("width must be positive")
    axes = np.meshgrid(*([grid.axis] * d), indexing="ij")
    if kind == "gaussian":
        center = params[1:]
        if center and len(center) != d:
            raise ParameterError(f"gaussian center needs {d} coordinates")
        if not center:
            center = [0.0] * d
        r2 = sum((ax - c) ** 2 for ax, c in zip(axes, center))
        values = np.exp(-np.pi * r2 / w**2).astype(complex)
    elif kind == "hermite_modulated":
        if len(params) < 2:
            raise ParameterError("hermite_modulated needs [width, degree]")
        deg = int(params[1])
        if deg < 0:
            raise ParameterError("degree must be nonnegative")
        r2 = sum(ax**2 for ax in axes)
        coeffs = np.zeros(deg + 1)
        coeffs[deg] = 1.0
        values = (np.polynomial.hermite.hermval(axes[0], coeffs)
                  * np.exp(-np.pi * r2 / w**2)).astype(complex)
    elif kind == "compact_bump":
        r2 = sum(ax**2 for ax in axes) / w**2
        values = np.zeros((m,) * d, dtype=complex)
        inside = r2 < 1.0
        values[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    else:
        raise ParameterError(f"unknown test-function kind {kind!r}")
    return SampledFunctionH(grid, values)


def make_window(kind: str, params, grid: GridSpec) -> Window:
    """Build a window and normalize it to exact unit grid norm."""
    n = grid.n
    params = list(params)
    axes = np.meshgrid(*([grid.axis] * n), indexing="ij")
    r2 = sum(ax**2 for ax in axes)
    if kind == "gaussian":
        w = float(params[0]) if params else 1.0
        if w <= 0:
            raise ParameterError("width must be positive")
        values = np.exp(-np.pi * r2 / w**2).astype(complex)
    elif kind == "hermite":
        deg = int(params[0]) if params else 1
        coeffs = np.zeros(deg + 1)
        coeffs[deg] = 1.0
        values = (np.polynomial.hermite.hermval(axes[0], coeffs)
                  * np.exp(-np.pi * r2)).astype(complex)
    else:
        raise ParameterError(f"unknown window kind {kind!r}")
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.spacing**n)
    if norm == 0:
        raise OffGridError("window has no mass on the grid")
    return Window(grid, values / norm)


def partial_fourier_23(f: SampledFunctionH) -> PartialSpectrum23:
    """Transform the y (axes n..2n-1) and t (axis 2n) variables of f."""
    n = f.grid.n
    axes = tuple(range(n, 2 * n + 1))
    return PartialSpectrum23(f.grid, grid_fft(f.values, axes, f.grid.spacing))


def character_transform(f: SampledFunctionH) -> Symbol:
    """Sampled f-hat(a, b): the full transform at central frequency zero.

    Integrates out t (plain quadrature) and transforms (x, y) -> (a, b).
    """
    n = f.grid.n
    h = f.grid.spacing
    integrated = f.values.sum(axis=-1) * h
    values = grid_fft(integrated, tuple(range(2 * n)), h)
    return Symbol(f.grid, values)
