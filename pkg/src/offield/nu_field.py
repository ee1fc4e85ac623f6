"""Coherent states, the almost homomorphism nu, and its defect quantities.

For a unit window eta and lambda != 0 the coherent state at u = (a, b) is

    eta(lam, a, b)(s) = |lam|^{n/4} exp(2 pi i a.s) eta(|lam|^{1/2}(s + b/lam)),

and nu_lambda(h) averages h-hat(u) against the rank-one projections onto these
states.  The operator is assembled from its closed-form kernel

    k(x, s) = int hh2(x - s, |lam|^{1/2} c) conj(eta)(|lam|^{1/2} s + sgn c)
              eta(|lam|^{1/2} x + sgn c) dc,

where hh2 inverts the symbol transform in its first slot only.  Everything is
n = 1: the quadrature cost of the coherent machinery grows like M^{3n} and the
desk-scale contracts are one-dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, OffGridError, ParameterError
from .linop import KernelOperator, VectorL2, adjoint_op, compose, op_norm
from .sampling import GridSpec, SampledFunctionH, Symbol, Window, grid_fft, grid_ifft
from .util import is_decreasing
from .heisenberg import HeisenbergField, pi_lambda, rho_symbol


@dataclass(frozen=True)
class CoherentState:
    """A normalized coherent state on the grid."""

    lam: float
    u: tuple
    values: VectorL2


def _require_n1(grid: GridSpec, what: str):
    if grid.n != 1:
        raise ParameterError(f"{what} supports n=1 grids only")


def eta_state(eta: Window, lam: float, u) -> CoherentState:
    """Sample the coherent state and renormalize on the grid.

    The continuum change of variables is unitary; on a finite box the sampled
    state loses the off-grid tail (severe once |lam|^{-1/2} exceeds the
    extent), so the samples are rescaled to exact unit grid norm to keep the
    norm invariant meaningful along lambda ladders.
    """
    _require_n1(eta.grid, "eta_state")
    if lam == 0:
        raise ParameterError("lambda must be nonzero")
    a, b = float(u[0]), float(u[1])
    grid = eta.grid
    sq = np.sqrt(abs(lam))
    pts = sq * (grid.axis + b / lam)
    env = eta.eval_at(pts)
    vals = abs(lam) ** 0.25 * np.exp(2j * np.pi * a * grid.axis) * env
    norm = np.sqrt(np.sum(np.abs(vals) ** 2) * grid.spacing)
    if norm < 1e-9:
        raise OffGridError(f"state at u=({a},{b}), lambda={lam} has left the grid")
    return CoherentState(lam, (a, b), VectorL2(grid, vals / norm))


def _state_on_lattice(eta: Window, lam: float, u, points: np.ndarray) -> np.ndarray:
    a, b = float(u[0]), float(u[1])
    sq = np.sqrt(abs(lam))
    env = eta.eval_at(sq * (points + b / lam))
    return abs(lam) ** 0.25 * np.exp(2j * np.pi * a * points) * env


def coefficient(grid: GridSpec, lam: float, u, uprime, eta: Window) -> SampledFunctionH:
    """Matrix-coefficient function <pi_lambda(x,y,t) eta(lam,u), eta(lam,u')>.

    Computed by direct grid quadrature of the inner product; the t-dependence
    factors into a pure phase.  The result is bounded, not decaying, so the
    returned samples skip the Schwartz-decay check.
    """
    _require_n1(grid, "coefficient")
    if lam == 0:
        raise ParameterError("lambda must be nonzero")
    m, h = grid.points_per_axis, grid.spacing
    lattice = h * np.arange(-(m - 1), m)
    st1 = _state_on_lattice(eta, lam, u, lattice)
    st2 = _state_on_lattice(eta, lam, uprime, lattice)
    core = slice(m - 1 - m // 2, m - 1 + m // 2)
    for st in (st1, st2):
        norm = np.sqrt(np.sum(np.abs(st[core]) ** 2) * h)
        if norm < 1e-9:
            raise OffGridError("coherent state has left the grid")
        st /= norm
    idx = np.arange(m)
    shift = idx[None, :] - idx[:, None] + (m - 1)  # st1 sampled at s - x
    st1_sh = st1[shift]
    phase_sy = np.exp(2j * np.pi * lam * np.outer(grid.axis, grid.axis))
    inner = np.einsum("is,s,sj->ij", st1_sh, np.conj(st2[core]), phase_sy) * h
    t_phase = np.exp(-2j * np.pi * lam * grid.axis)
    xy_phase = np.exp(-1j * np.pi * lam * np.outer(grid.axis, grid.axis))
    vals = (inner * xy_phase)[:, :, None] * t_phase[None, None, :]
    return SampledFunctionH(grid, vals, require_decay=False)


def symbol_group_rep(sym: Symbol) -> np.ndarray:
    """Double transform W(sigma, y): inverse in the a-slot, forward in b.

    hh2(sigma, beta) is then h * sum_y W(sigma_row, y) exp(2 pi i y beta): the
    trigonometric interpolant of the half-inverted symbol, evaluable at the
    arbitrary second arguments the kernels need.
    """
    grid = sym.grid
    dstep = grid.dual_spacing
    half = grid_ifft(sym.values, (0,), dstep)
    return grid_fft(half, (1,), dstep)


def _hh2_diagonal_table(sym: Symbol, second_args: np.ndarray) -> np.ndarray:
    """hh2 on all kernel diagonals: rows sigma_d = d*h, columns second_args.

    Row d is zero-filled when sigma_d leaves the box (Schwartz surrogate).
    """
    grid = sym.grid
    m, h = grid.points_per_axis, grid.spacing
    w = symbol_group_rep(sym)
    phases = np.exp(2j * np.pi * np.outer(grid.axis, second_args))
    table = np.zeros((2 * m - 1, second_args.size), dtype=complex)
    rows = np.arange(-(m // 2), m // 2)
    table[rows + (m - 1), :] = (w[rows + m // 2, :] @ phases) * h
    return table


def nu_lambda(h: Symbol, lam: float, eta: Window) -> KernelOperator:
    """The almost-homomorphism fiber: coherent-state average of the symbol."""
    if lam == 0:
        raise ParameterError("lambda must be nonzero; nu has the symbol itself at 0")
    if h.grid != eta.grid:
        raise ParameterError("symbol and window must share a grid")
    _require_n1(h.grid, "nu_lambda")
    grid = h.grid
    m, hs = grid.points_per_axis, grid.spacing
    sq = np.sqrt(abs(lam))
    sgn = 1.0 if lam > 0 else -1.0
    cvals = grid.axis
    dtab = _hh2_diagonal_table(h, sq * cvals)
    win = eta.eval_at(sq * grid.axis[:, None] + sgn * cvals[None, :])
    kernel = np.empty((m, m), dtype=complex)
    for d in range(-(m - 1), m):
        i0, i1 = max(d, 0), min(m - 1, m - 1 + d)
        rows = np.arange(i0, i1 + 1)
        seg = dtab[d + m - 1][None, :] * win[rows, :] * np.conj(win[rows - d, :])
        kernel[rows, rows - d] = seg.sum(axis=1) * hs
    return KernelOperator(grid, kernel)


def resolution_residual(xi: VectorL2, lam: float, eta: Window) -> float:
    """Relative gap in the coherent-state reconstruction of xi.

    Reconstructs xi from its frame coefficients over the dual (a, b) grid and
    returns ||xi - rec||_2 / ||xi||_2.
    """
    _require_n1(xi.grid, "resolution_residual")
    if lam == 0:
        raise ParameterError("lambda must be nonzero")
    if xi.grid != eta.grid:
        raise ParameterError("vector and window must share a grid")
    nrm = xi.l2_norm()
    if nrm < 1e-14:
        raise DegenerateInputError("vector is numerically zero")
    grid = xi.grid
    h = grid.spacing
    dual = grid.dual_axis
    dstep = grid.dual_spacing
    sq = np.sqrt(abs(lam))
    phases = np.exp(2j * np.pi * np.outer(dual, grid.axis))  # [a, s]
    rec = np.zeros(grid.points_per_axis, dtype=complex)
    quarter = abs(lam) ** 0.25
    for b in dual:
        env = eta.eval_at(sq * (grid.axis + b / lam))
        bnorm = quarter * np.sqrt(np.sum(np.abs(env) ** 2) * h)
        if bnorm < 1e-12:
            continue
        states = (quarter / bnorm) * phases * env[None, :]  # [a, s]
        coefs = (states.conj() @ xi.values) * h
        rec += states.T @ coefs
    rec *= dstep**2 / abs(lam)
    gap = VectorL2(grid, xi.values - rec).l2_norm()
    return gap / nrm


def symbol_product(h: Symbol, g: Symbol) -> Symbol:
    if h.grid != g.grid:
        raise ParameterError("symbols must share a grid")
    return Symbol(h.grid, h.values * g.values)


def symbol_adjoint(h: Symbol) -> Symbol:
    """The symbol of h*: pointwise conjugate of the transform."""
    return Symbol(h.grid, np.conj(h.values))


def defect(kind: str, f: SampledFunctionH, g, lam: float, eta: Window,
           norm_tol: float = 1e-10) -> float:
    """Operator-norm defect quantities that vanish as lambda -> 0.

    characterization  ||pi_lam(f) - nu_lam(rho(f))||
    mult              ||nu_lam(h h') - nu_lam(h) nu_lam(h')||, h = rho(f), h' = rho(g)
    adjoint           ||nu_lam(h*) - nu_lam(h)*||
    coefficient       max_u || nu_lam(h) eta_u - h-hat(u) eta_u ||_2
    norm_recovery     | ||nu_lam(h)|| - sup |h-hat| |
    """
    if kind == "mult" and g is None:
        raise ParameterError("kind='mult' needs the second function g")
    h = rho_symbol(f)
    if kind == "characterization":
        return op_norm(pi_lambda(f, lam) - nu_lambda(h, lam, eta), tol=norm_tol)
    if kind == "mult":
        h2 = rho_symbol(g)
        lhs = nu_lambda(symbol_product(h, h2), lam, eta)
        rhs = compose(nu_lambda(h, lam, eta), nu_lambda(h2, lam, eta))
        return op_norm(lhs - rhs, tol=norm_tol)
    if kind == "adjoint":
        lhs = nu_lambda(symbol_adjoint(h), lam, eta)
        rhs = adjoint_op(nu_lambda(h, lam, eta))
        return op_norm(lhs - rhs, tol=norm_tol)
    if kind == "coefficient":
        return _coefficient_defect(h, lam, eta)
    if kind == "norm_recovery":
        return abs(op_norm(nu_lambda(h, lam, eta), tol=norm_tol) - h.sup_norm)
    raise ParameterError(f"unknown defect kind {kind!r}")


def _coefficient_defect(h: Symbol, lam: float, eta: Window) -> float:
    """max over the symbol grid of ||nu(h) eta_u - h-hat(u) eta_u||_2."""
    grid = h.grid
    hs = grid.spacing
    op = nu_lambda(h, lam, eta)
    dual = grid.dual_axis
    sq = np.sqrt(abs(lam))
    phases = np.exp(2j * np.pi * np.outer(grid.axis, dual))  # [s, a]
    quarter = abs(lam) ** 0.25
    worst = 0.0
    for bi, b in enumerate(dual):
        env = eta.eval_at(sq * (grid.axis + b / lam))
        bnorm = quarter * np.sqrt(np.sum(np.abs(env) ** 2) * hs)
        if bnorm < 1e-12:
            continue
        states = (quarter / bnorm) * env[:, None] * phases  # [s, a]
        image = (op.kernel @ states) * hs
        resid = image - states * h.values[:, bi][None, :]
        norms = np.sqrt(np.sum(np.abs(resid) ** 2, axis=0) * hs)
        worst = max(worst, float(norms.max()))
    return worst


@dataclass(frozen=True)
class FieldDefectProfile:
    entries: list  # (lambda, defect), |lambda| decreasing
    tolerance: float
    verdict: bool


def field_defect_profile(field: HeisenbergField, eta: Window,
                         tolerance: float = 0.1) -> FieldDefectProfile:
    """Membership ladder for the nu-compatible fields: defects must decrease
    along |lambda| -> 0 and end below the tolerance."""
    if not field.lambdas:
        raise ParameterError("field ladder is empty")
    lams = sorted(field.lambdas, key=abs, reverse=True)
    entries = []
    for lam in lams:
        d = op_norm(field.fibers[lam] - nu_lambda(field.zero_fiber, lam, eta))
        entries.append((lam, d))
    defects = [d for _, d in entries]
    verdict = is_decreasing(defects) and defects[-1] < tolerance
    return FieldDefectProfile(entries, tolerance, verdict)
