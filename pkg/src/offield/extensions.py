"""Pluggable almost homomorphisms and the diagonal split construction.

An almost homomorphism is any bounded assignment (symbol, lambda) -> compact
operator whose linearity, multiplicativity, involution, and norm-recovery
defects all vanish along lambda -> 0.  ``tau_defect_profile`` measures the
four columns on a ladder.

``delaroche_nu`` realizes the classical splitting example: pick an orthonormal
basis indexed by the integer lattice and send a symbol to the diagonal
operator with entries h-hat(|lambda|^{1/2} Z).  Sampling the symbol at the
nearest grid node makes the map exactly multiplicative at every lambda, which
is the point of the construction: the extension splits even though its
spectrum matches the group algebra's.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BasisTooSmallError, ParameterError
from .linop import KernelOperator, op_norm, compose, adjoint_op
from .sampling import DECAY_FLOOR, GridSpec, Symbol, Window
from .nu_field import nu_lambda, symbol_adjoint, symbol_product
from .util import is_decreasing


@dataclass(frozen=True)
class AlmostHomomorphism:
    evaluate: Callable[[Symbol, float], KernelOperator]
    label: str


def nu_homomorphism(eta: Window) -> AlmostHomomorphism:
    return AlmostHomomorphism(lambda h, lam: nu_lambda(h, lam, eta), "nu")


def delaroche_homomorphism(basis_size: int) -> AlmostHomomorphism:
    return AlmostHomomorphism(
        lambda h, lam: delaroche_nu(h, lam, basis_size), "delaroche"
    )


_BASIS_CACHE: dict = {}


def hermite_basis(grid: GridSpec, count: int) -> np.ndarray:
    """First ``count`` eigenvectors of the grid harmonic oscillator.

    Orthonormal as coefficient vectors; divide by sqrt(h) for grid functions.
    """
    if grid.n != 1:
        raise ParameterError("hermite_basis supports n=1 grids")
    m = grid.points_per_axis
    if count > m:
        raise BasisTooSmallError(f"cannot draw {count} orthonormal vectors from {m}")
    key = (grid, m)
    full = _BASIS_CACHE.get(key)
    if full is None:
        h = grid.spacing
        lap = (np.diag(np.full(m, 2.0)) - np.diag(np.ones(m - 1), 1)
               - np.diag(np.ones(m - 1), -1)) / h**2
        ham = lap + np.diag(grid.axis**2)
        _, vecs = np.linalg.eigh(ham)
        full = vecs.T
        _BASIS_CACHE[key] = full
    return full[:count]


def lattice_spiral(count: int) -> list:
    """Deterministic enumeration of Z^2 by sup-norm rings, lexicographic inside."""
    points = []
    ring = 0
    while len(points) < count:
        if ring == 0:
            shell = [(0, 0)]
        else:
            shell = sorted(
                {(z1, z2)
                 for z1 in range(-ring, ring + 1)
                 for z2 in range(-ring, ring + 1)
                 if max(abs(z1), abs(z2)) == ring}
            )
        points.extend(shell)
        ring += 1
    return points[:count]


def _nearest_node_values(sym: Symbol, pts: np.ndarray) -> np.ndarray:
    """Symbol samples at the nearest grid node, zero outside the box.

    Nearest-node sampling commutes with pointwise symbol products, so the
    diagonal map built on it is exactly multiplicative.
    """
    axis = sym.axis
    step = axis[1] - axis[0]
    m = axis.size
    idx = np.rint((pts - axis[0]) / step).astype(int)
    inside = np.all((idx >= 0) & (idx < m), axis=-1)
    idx = np.clip(idx, 0, m - 1)
    vals = sym.values[idx[..., 0], idx[..., 1]]
    return np.where(inside, vals, 0.0)


def delaroche_nu(phi: Symbol, lam: float, basis_size: int) -> KernelOperator:
    """Diagonal operator with entries phi-hat(|lambda|^{1/2} Z), Z in Z^2."""
    if lam == 0:
        raise ParameterError("lambda must be nonzero")
    if basis_size < 1:
        raise ParameterError("basis_size must be positive")
    if phi.grid.n != 1:
        raise ParameterError("delaroche_nu supports n=1 symbols")
    count = basis_size**2
    basis = hermite_basis(phi.grid, count)
    pts = np.array(lattice_spiral(count), dtype=float) * np.sqrt(abs(lam))
    entries = _nearest_node_values(phi, pts)
    _check_excluded_tail(phi, lam, basis_size, float(np.abs(entries).max()))
    h = phi.grid.spacing
    kernel = (basis.T * entries) @ np.conj(basis) / h
    return KernelOperator(phi.grid, kernel)


def delaroche_entries(phi: Symbol, lam: float, basis_size: int) -> np.ndarray:
    """The diagonal entries in spiral order (for norm comparisons)."""
    pts = np.array(lattice_spiral(basis_size**2), dtype=float) * np.sqrt(abs(lam))
    return _nearest_node_values(phi, pts)


def _check_excluded_tail(phi: Symbol, lam: float, basis_size: int, included_max: float):
    """Truncating the lattice must not change the sup of the entries."""
    sq = np.sqrt(abs(lam))
    extent = phi.grid.dual.extent
    reach = int(np.floor(extent / sq))
    ring = (basis_size + 1) // 2
    if reach < ring:
        return  # every in-box lattice point is included
    zs = np.arange(-reach, reach + 1)
    z1, z2 = np.meshgrid(zs, zs, indexing="ij")
    excluded = np.maximum(np.abs(z1), np.abs(z2)) >= ring
    pts = np.stack([z1[excluded], z2[excluded]], axis=-1) * sq
    if pts.size == 0:
        return
    tail = float(np.abs(_nearest_node_values(phi, pts)).max())
    if tail > included_max + DECAY_FLOOR * phi.sup_norm:
        raise BasisTooSmallError(
            f"excluded lattice entries reach {tail:.3e} above the included "
            f"max {included_max:.3e}; increase basis_size"
        )


@dataclass(frozen=True)
class TauDefectProfile:
    rows: list  # (lambda, linearity, mult, involution, topology)
    verdicts: dict
    tolerance: float

    @property
    def verdict(self) -> bool:
        return all(self.verdicts.values())


def tau_defect_profile(tau: AlmostHomomorphism, h: Symbol, g: Symbol, ladder,
                       tolerance: float = 0.1) -> TauDefectProfile:
    """Linearity, multiplicativity, involution, and topology columns on a ladder.

    The linearity probe uses the fixed pair (alpha, beta) = (1, -2); random
    scalars live in the property tests.  Each column must decrease (with
    floating-point slack) and end below the tolerance.
    """
    lams = sorted(ladder, key=abs, reverse=True)
    if not lams:
        raise ParameterError("ladder must be nonempty")
    combo = Symbol(h.grid, h.values - 2.0 * g.values)
    rows = []
    for lam in lams:
        th = tau.evaluate(h, lam)
        tg = tau.evaluate(g, lam)
        lin = op_norm(tau.evaluate(combo, lam) - (th - 2.0 * tg))
        mult = op_norm(tau.evaluate(symbol_product(h, g), lam) - compose(th, tg))
        invo = op_norm(tau.evaluate(symbol_adjoint(h), lam) - adjoint_op(th))
        topo = abs(op_norm(th) - h.sup_norm)
        rows.append((lam, lin, mult, invo, topo))
    verdicts = {}
    for pos, name in ((1, "linearity"), (2, "mult"), (3, "involution"), (4, "topology")):
        col = [row[pos] for row in rows]
        verdicts[name] = is_decreasing(col) and col[-1] < tolerance
    return TauDefectProfile(rows, verdicts, tolerance)
