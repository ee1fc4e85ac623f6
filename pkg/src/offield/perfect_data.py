"""Perfect data for converging sequences in the dual of G_N, and the windowed
operators and condition defects built on it.

A sequence of generic points is described through its orbit polynomials
p_k = c_k prod (t - a_j^k).  Perfect data normalizes the subsequence: translate
families t_i^k chasing each limit point, scales rho_i^k, limit polynomials,
the index sets C (character limits) and D (generic limits) with their root
bookkeeping L(i) / J(i), and a window growth s_k adapted to it all.  Limits
are finitely many rungs here, so ``verify_perfect_data`` judges decreasing
residuals at a declared tolerance instead of taking limits, and
``propose_perfect_data`` is a loud heuristic: it either returns data that
passes the verifier or raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    NoAdaptedSequenceError,
    NotPerfectDataError,
    OffGridError,
    ParameterError,
    UndecidableLadderError,
)
from .linop import (
    KernelOperator,
    VectorL2,
    compose,
    mask_columns,
    op_norm,
    snap_to_grid,
    translate,
    truncate,
)
from .sampling import GridSpec, Symbol, Window
from .nu_field import symbol_group_rep, symbol_product
from .threadlike import CoadjointPoint, OrbitPolynomial, pi_ell, rho_symbol_N, xi_hat_inverse
from .util import is_decreasing

_polyval = np.polynomial.polynomial.polyval
_polyfromroots = np.polynomial.polynomial.polyfromroots

# Bounded-ratio tests use the last quarter of the ladder with this variation cap.
BOUNDED_VARIATION = 0.10


@dataclass(frozen=True)
class PolynomialSequence:
    """Orbit polynomials p_k = leading(k) * prod(t - roots(k)) on an integer ladder."""

    degree: int
    leading: Callable
    roots: Callable
    ladder: tuple
    group_dim: int

    def __post_init__(self):
        object.__setattr__(self, "ladder", tuple(int(k) for k in self.ladder))
        if self.degree < 1:
            raise ParameterError("degree must be at least 1")
        if self.group_dim < self.degree + 2:
            raise ParameterError("group dimension must be at least degree + 2")

    def poly_coeffs(self, k: int) -> np.ndarray:
        c = self.leading(k)
        if c == 0:
            raise NotPerfectDataError(f"leading coefficient vanishes at k={k}")
        return c * _polyfromroots(np.asarray(self.roots(k), dtype=float))

    def eval(self, k: int, t):
        return _polyval(t, self.poly_coeffs(k))

    def point(self, k: int) -> CoadjointPoint:
        return xi_hat_inverse(OrbitPolynomial(self.poly_coeffs(k)), self.group_dim)


@dataclass(frozen=True)
class PerfectData:
    """Translates, scales, limits, and index bookkeeping for one sequence.

    Root indices in L and J are 1-based.  rho is identically 1 on D by
    convention; that and the ladder-dependent facts are judged by
    ``verify_perfect_data``.
    """

    m: int
    C: frozenset
    D: frozenset
    t: Callable
    rho: Callable
    q: dict
    p_limit: dict
    L: dict
    J: dict
    s: Callable

    def __post_init__(self):
        object.__setattr__(self, "C", frozenset(self.C))
        object.__setattr__(self, "D", frozenset(self.D))
        everyone = set(range(1, self.m + 1))
        if (self.C | self.D) != everyone or (self.C & self.D):
            raise ParameterError("C and D must partition {1..m}")
        for i in self.C:
            if i not in self.p_limit or i not in self.L:
                raise ParameterError(f"character translate {i} needs p_limit and L")
        seen = set()
        for i in self.C:
            if seen & set(self.L[i]):
                raise ParameterError("L(i) sets must be pairwise disjoint")
            seen |= set(self.L[i])


def heisenberg_family(lam: Callable, ladder) -> tuple:
    """The N=3 model family ell_k = lam_k X_1*: p_k(t) = -lam_k t.

    Requires lam_k -> 0 with constant sign; the single translate chases the
    character limit with q = 1, rho = 1/|lam_k|, and window s_k = |lam_k|^{-1/2}.
    """
    ladder = tuple(int(k) for k in ladder)
    vals = [lam(k) for k in ladder]
    if any(v == 0 for v in vals):
        raise NotPerfectDataError("lambda must be nonzero on the ladder")
    signs = {v > 0 for v in vals}
    if len(signs) != 1:
        raise NotPerfectDataError("lambda must keep a constant sign on the ladder")
    sgn = 1.0 if vals[0] > 0 else -1.0
    seq = PolynomialSequence(
        degree=1,
        leading=lambda k: -lam(k),
        roots=lambda k: np.zeros(1),
        ladder=ladder,
        group_dim=3,
    )
    pd = PerfectData(
        m=1,
        C=frozenset({1}),
        D=frozenset(),
        t=lambda i, k: -1.0 / lam(k),
        rho=lambda i, k: 1.0 / abs(lam(k)),
        q={1: OrbitPolynomial([1.0])},
        p_limit={1: OrbitPolynomial([1.0, -sgn])},
        L={1: frozenset({1})},
        J={},
        s=lambda k: abs(lam(k)) ** -0.5,
    )
    return seq, pd


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    values: tuple
    note: str = ""


@dataclass(frozen=True)
class PerfectDataReport:
    conditions: tuple
    overall: bool

    def check(self, name: str) -> ConditionCheck:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _last_quarter(ladder):
    q = max(4, len(ladder) // 4)
    return ladder[-q:]


def _variation(vals) -> float:
    arr = np.asarray(vals, dtype=float)
    scale = max(float(np.abs(arr).max()), 1e-300)
    return float((arr.max() - arr.min()) / scale)


def verify_perfect_data(seq: PolynomialSequence, pd: PerfectData, tol: float
                        ) -> PerfectDataReport:
    """Judge every perfect-data condition on the ladder at tolerance tol.

    Quantities that must vanish are checked as decreasing over the last three
    rungs with final value below tol; quantities that must diverge are checked
    through their reciprocals; bounded-ratio facts use last-quarter variation.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    ladder = seq.ladder
    if len(ladder) < 3:
        raise ParameterError("ladder needs at least 3 rungs")
    top = ladder[-3:]
    checks = []

    def vanish(name, series, note=""):
        ok = is_decreasing(series) and series[-1] < tol
        checks.append(ConditionCheck(name, ok, tuple(series), note))

    def bounded(name, series, note=""):
        var = _variation(series)
        checks.append(ConditionCheck(name, var < BOUNDED_VARIATION, tuple(series),
                                     note or f"variation {var:.3g}"))

    # structural facts first
    for i in pd.C:
        qd = pd.q[i].degree
        checks.append(ConditionCheck(
            f"type[{i}]", qd == 0, (qd,), "character limits are constant"))
        dp = pd.p_limit[i].degree
        checks.append(ConditionCheck(
            f"deg-p[{i}]", dp == len(pd.L[i]), (dp, len(pd.L[i])),
            "window polynomial degree = #L(i)"))
    for i in pd.D:
        qd = pd.q[i].degree
        checks.append(ConditionCheck(
            f"type[{i}]", qd >= 1, (qd,), "generic limits are non-constant"))
        rhos = [pd.rho(i, k) for k in top]
        checks.append(ConditionCheck(
            f"rho-one[{i}]", all(r == 1.0 for r in rhos), tuple(rhos),
            "rho is 1 on D"))

    tgrid = np.linspace(-5.0, 5.0, 41)
    for i in range(1, pd.m + 1):
        res = [float(np.abs(seq.eval(k, tgrid + pd.t(i, k)) - pd.q[i](tgrid)).max())
               for k in top]
        vanish(f"limit[{i}]", res)

    for i in range(1, pd.m + 1):
        for i2 in range(i + 1, pd.m + 1):
            sep = [1.0 / max(abs(pd.t(i, k) - pd.t(i2, k)), 1e-300) for k in top]
            vanish(f"separation[{i},{i2}]", sep)

    sgrid = np.linspace(-3.0, 3.0, 25)
    for i in sorted(pd.C):
        dists = {k: np.abs(pd.t(i, k) - np.asarray(seq.roots(k))) for k in ladder}
        esc = [float(1.0 / max(dists[k].min(), 1e-300)) for k in top]
        vanish(f"root-escape[{i}]", esc)
        mism = [abs(pd.rho(i, k) - dists[k].min()) / max(dists[k].min(), 1e-300)
                for k in top]
        checks.append(ConditionCheck(
            f"rho-def[{i}]", max(mism) < tol, tuple(mism),
            "rho equals the nearest-root distance"))
        for j in range(1, seq.degree + 1):
            ratios = [dists[k][j - 1] / pd.rho(i, k) for k in _last_quarter(ladder)]
            if j in pd.L[i]:
                bounded(f"ratio-L[{i},{j}]", ratios)
            else:
                vanish(f"ratio-far[{i},{j}]",
                       [1.0 / max(r, 1e-300) for r in [ratios[k] for k in (-3, -2, -1)]])
        wres = [float(np.abs(seq.eval(k, pd.t(i, k) + sgrid * pd.rho(i, k))
                             - pd.p_limit[i](sgrid)).max()) for k in top]
        vanish(f"window-limit[{i}]", wres)

    for i in sorted(pd.D):
        for j in range(1, seq.degree + 1):
            dist = [abs(pd.t(i, k) - seq.roots(k)[j - 1]) for k in ladder]
            if j in pd.J.get(i, frozenset()):
                vanish(f"J-escape[{i},{j}]", [1.0 / max(d, 1e-300) for d in dist[-3:]])
            else:
                bounded(f"J-bounded[{i},{j}]", dist[-len(_last_quarter(ladder)):])

    # adapted window: divergences are judged by the doubling rule, not tol
    svals = [pd.s(k) for k in top]
    checks.append(ConditionCheck("window-grows", svals[-1] > svals[-2] > 0,
                                 tuple(svals), "s_k increases"))
    ratio_series = {}
    for i in sorted(pd.D):
        for j in sorted(pd.J.get(i, frozenset())):
            ratio_series[f"adapted-D[{i},{j}]"] = [
                pd.s(k) / abs(pd.t(i, k) - seq.roots(k)[j - 1]) for k in top]
    for i in sorted(pd.C):
        ratio_series[f"adapted-rho[{i}]"] = [pd.s(k) / pd.rho(i, k) for k in top]
        for j in range(1, seq.degree + 1):
            if j not in pd.L[i]:
                ratio_series[f"adapted-C[{i},{j}]"] = [
                    pd.s(k) * pd.rho(i, k) / abs(seq.roots(k)[j - 1] - pd.t(i, k))
                    for k in top]
    for name, series in ratio_series.items():
        ok = series[-1] < 2.0 * series[-2] and series[-1] < 1.0
        checks.append(ConditionCheck(name, ok, tuple(series), "ratio must decay"))

    overall = all(c.passed for c in checks)
    return PerfectDataReport(tuple(checks), overall)


def adapted_sequence(seq: PolynomialSequence, pd: PerfectData) -> Callable:
    """Window growth s_k = sqrt of the binding constraint quantity.

    The square root sits geometrically between 1 and the constraint, so every
    required ratio decays like the constraint's inverse square root.  With no
    constraints at all, s_k = k.  A constraint bounded along the ladder makes
    an adapted sequence impossible.
    """

    def binding(k: int) -> Optional[float]:
        quantities = []
        roots = np.asarray(seq.roots(k), dtype=float)
        for i in pd.D:
            for j in pd.J.get(i, frozenset()):
                quantities.append(abs(pd.t(i, k) - roots[j - 1]))
        for i in pd.C:
            quantities.append(pd.rho(i, k))
            for j in range(1, seq.degree + 1):
                if j not in pd.L[i]:
                    quantities.append(abs(roots[j - 1] - pd.t(i, k)) / pd.rho(i, k))
        return min(quantities) if quantities else None

    if binding(seq.ladder[-1]) is None:
        return lambda k: float(k)
    probe = seq.ladder[max(0, 3 * len(seq.ladder) // 4 - 1)]
    tail, mid = binding(seq.ladder[-1]), binding(probe)
    if tail <= mid * 1.1:
        raise NoAdaptedSequenceError(
            f"binding constraint stalls at {tail:.3g} (was {mid:.3g})")
    return lambda k: math.sqrt(binding(k))


def _poly_shift(coeffs: np.ndarray, t0: float) -> np.ndarray:
    """Coefficients of p(t + t0), ascending order."""
    n = coeffs.size
    out = np.zeros(n)
    for i, c in enumerate(coeffs):
        binom = np.array([math.comb(i, k) * t0 ** (i - k) for k in range(i + 1)])
        out[: i + 1] += c * binom
    return out


def propose_perfect_data(seq: PolynomialSequence) -> PerfectData:
    """Constructive heuristic extraction of perfect data from the ladder.

    Convergent-in-layer sequences are detected first (translate 0).  Character
    translates are sought as the real solutions of p_k = 1 whose distances to
    every root diverge; generic translates as root-cluster centroids whose
    recentered polynomials stabilize.  The output is verified at tolerance
    1e-2 before being returned; anything unstable raises, never returns junk.
    """
    ladder = seq.ladder
    if len(ladder) < 16:
        raise ParameterError("propose needs a ladder of at least 16 rungs")
    d = seq.degree
    coeff_rows = {k: seq.poly_coeffs(k) for k in ladder}
    half = ladder[len(ladder) // 2:]
    scale = max(float(np.abs(coeff_rows[half[-1]]).max()), 1e-300)
    stationary = all(
        float(np.abs(coeff_rows[k] - coeff_rows[half[-1]]).max()) < 1e-8 * (1 + scale)
        for k in half
    )
    if stationary:
        qpoly = OrbitPolynomial(coeff_rows[ladder[-1]].copy())
        pd = PerfectData(
            m=1, C=frozenset(), D=frozenset({1}),
            t=lambda i, k: 0.0, rho=lambda i, k: 1.0,
            q={1: qpoly}, p_limit={}, L={}, J={1: frozenset()},
            s=lambda k: float(k),
        )
        return _verified(seq, pd)

    candidates = []
    solved = {k: _unit_level_solutions(coeff_rows[k]) for k in ladder}
    counts = {len(solved[k]) for k in half}
    if len(counts) == 1 and counts != {0}:
        n_sol = counts.pop()
        for pos in range(n_sol):
            cand = _character_candidate(seq, ladder, solved, pos)
            if cand is not None:
                candidates.append(cand)
    candidates.extend(_cluster_candidates(seq, ladder))
    chosen = []
    used_roots: set = set()
    for cand in candidates:
        if cand["kind"] == "C" and (used_roots & cand["L"]):
            continue
        chosen.append(cand)
        if cand["kind"] == "C":
            used_roots |= cand["L"]
    if not chosen:
        raise UndecidableLadderError("no stable translate structure on this ladder")

    c_set, d_set, tmap, rhomap, qmap, pmap, lmap, jmap = set(), set(), {}, {}, {}, {}, {}, {}
    for idx, cand in enumerate(chosen, start=1):
        tmap[idx] = cand["t"]
        rhomap[idx] = cand["rho"]
        qmap[idx] = cand["q"]
        if cand["kind"] == "C":
            c_set.add(idx)
            pmap[idx] = cand["p"]
            lmap[idx] = frozenset(cand["L"])
        else:
            d_set.add(idx)
            jmap[idx] = frozenset(cand["J"])
    draft = PerfectData(
        m=len(chosen), C=frozenset(c_set), D=frozenset(d_set),
        t=lambda i, k: tmap[i](k), rho=lambda i, k: rhomap[i](k),
        q=qmap, p_limit=pmap, L=lmap, J=jmap, s=lambda k: float(k),
    )
    s_fn = adapted_sequence(seq, draft)
    pd = PerfectData(
        m=draft.m, C=draft.C, D=draft.D, t=draft.t, rho=draft.rho,
        q=draft.q, p_limit=draft.p_limit, L=draft.L, J=draft.J, s=s_fn,
    )
    return _verified(seq, pd)


def _verified(seq, pd, tol: float = 1e-2) -> PerfectData:
    report = verify_perfect_data(seq, pd, tol)
    if not report.overall:
        bad = [c.name for c in report.conditions if not c.passed]
        raise UndecidableLadderError(
            f"proposed data fails verification at tol {tol}: {bad}")
    return pd


def _unit_level_solutions(coeffs: np.ndarray) -> np.ndarray:
    """Sorted real solutions of p(t) = 1."""
    shifted = coeffs.copy()
    shifted[0] -= 1.0
    roots = np.polynomial.polynomial.polyroots(shifted)
    real = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    return np.sort(real)


def _character_candidate(seq, ladder, solved, pos):
    d = seq.degree
    top = ladder[-3:]

    def tfun(k):
        sols = solved.get(k)
        if sols is None:
            sols = _unit_level_solutions(seq.poly_coeffs(k))
        return float(sols[pos])

    dists = {k: np.abs(tfun(k) - np.asarray(seq.roots(k))) for k in ladder}
    mins = [dists[k].min() for k in top]
    if not (mins[-1] > mins[-2] > mins[-3] > 0):
        return None

    def rhofun(k):
        sols = np.abs(tfun(k) - np.asarray(seq.roots(k)))
        return float(sols.min())

    lset = set()
    quarter = _last_quarter(ladder)
    for j in range(1, d + 1):
        ratios = [dists[k][j - 1] / rhofun(k) for k in quarter]
        if _variation(ratios) < BOUNDED_VARIATION:
            lset.add(j)
        elif not all(b > a for a, b in zip(ratios, ratios[1:])):
            return None  # neither stabilizing nor diverging
    if not lset:
        return None
    sgrid = np.linspace(-3.0, 3.0, 25)
    ktop = ladder[-1]
    vals = seq.eval(ktop, tfun(ktop) + sgrid * rhofun(ktop)).real
    fit = np.polynomial.polynomial.polyfit(sgrid, vals, deg=len(lset))
    resid = float(np.abs(_polyval(sgrid, fit) - vals).max())
    if resid > 1e-2 * (1.0 + float(np.abs(vals).max())):
        return None
    return {
        "kind": "C", "t": tfun, "rho": rhofun, "q": OrbitPolynomial([1.0]),
        "p": OrbitPolynomial(fit), "L": lset,
    }


def _cluster_candidates(seq, ladder):
    d = seq.degree
    quarter = _last_quarter(ladder)
    roots_q = {k: np.asarray(seq.roots(k), dtype=float) for k in quarter}
    parent = list(range(d))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for j1 in range(d):
        for j2 in range(j1 + 1, d):
            if all(abs(roots_q[k][j1] - roots_q[k][j2]) < math.log(max(k, 3))
                   for k in quarter):
                parent[find(j1)] = find(j2)
    clusters: dict = {}
    for j in range(d):
        clusters.setdefault(find(j), []).append(j)

    out = []
    top = ladder[-3:]
    for members in clusters.values():
        def centroid(k, mem=tuple(members)):
            return float(np.mean(np.asarray(seq.roots(k))[list(mem)]))

        shifted = {k: _poly_shift(seq.poly_coeffs(k), centroid(k)) for k in top}
        scale = max(float(np.abs(shifted[top[-1]]).max()), 1e-300)
        diffs = [float(np.abs(shifted[a] - shifted[b]).max())
                 for a, b in zip(top, top[1:])]
        if not (is_decreasing(diffs) and diffs[-1] < 1e-6 * (1 + scale)):
            continue
        qarr = shifted[top[-1]].copy()
        qarr[np.abs(qarr) < 1e-9 * (1 + scale)] = 0.0
        qpoly = OrbitPolynomial(qarr)
        if qpoly.degree < 1:
            continue
        jset = set()
        for j in range(1, d + 1):
            dist = [abs(centroid(k) - seq.roots(k)[j - 1]) for k in top]
            if dist[-1] > dist[-2] > dist[-3] and dist[-1] > 10 * max(dist[0], 1e-300) ** 0.0:
                jset.add(j)
        out.append({
            "kind": "D", "t": centroid, "rho": (lambda k: 1.0), "q": qpoly,
            "J": jset,
        })
    return out


def eta_iku(eta: Window, pd: PerfectData, i: int, k: int, u, grid: GridSpec
            ) -> VectorL2:
    """The windowed state eta(s_k p^i(s / rho_i^k) + s_k b) e^{2 pi i a s}.

    Deliberately not renormalized: the s_k prefactor of the averaged operator
    absorbs the norm.
    """
    if i not in pd.C:
        raise ParameterError("eta_iku is defined for character translates only")
    if grid.n != 1:
        raise ParameterError("eta_iku supports n=1 grids")
    a, b = float(u[0]), float(u[1])
    sk = pd.s(k)
    rho = pd.rho(i, k)
    args = sk * pd.p_limit[i](grid.axis / rho) + sk * b
    vals = eta.eval_at(args) * np.exp(2j * np.pi * a * grid.axis)
    if float(np.abs(vals).max()) == 0.0:
        raise OffGridError("windowed state has no support on the grid")
    return VectorL2(grid, vals)


def nu_ik(phi: Symbol, eta: Window, pd: PerfectData, i: int, k: int
          ) -> KernelOperator:
    """Windowed coherent average s_k int phi-hat(a,-b) P_{i,k,u} da db.

    Assembled from the closed-form kernel

      k(s,t) = int phh2(s-t, -b/s_k + p(t/rho)) conj(eta)(b)
               eta(s_k (p(s/rho) - p(t/rho)) + b) db,

    with phh2 the symbol half-inverted in its first slot.  Linear window
    polynomials (the model family) ride an O(M^3) separated path; higher
    degrees fall back to the dense O(M^4) assembly, capped at M=64.
    """
    if i not in pd.C:
        raise ParameterError("nu_ik is defined for character translates only")
    if phi.grid != eta.grid:
        raise ParameterError("symbol and window must share a grid")
    grid = phi.grid
    if grid.n != 1:
        raise ParameterError("nu_ik supports n=1 grids")
    m, h = grid.points_per_axis, grid.spacing
    sk = pd.s(k)
    rho = pd.rho(i, k)
    p = pd.p_limit[i]
    y = grid.axis
    b = grid.axis
    w = symbol_group_rep(phi)
    wpad = np.zeros((2 * m - 1, m), dtype=complex)
    rows = np.arange(-(m // 2), m // 2)
    wpad[rows + m - 1, :] = w[rows + m // 2, :]
    eta_conj = np.conj(eta.values)
    if p.degree <= 1:
        alpha = float(p.coeffs[0])
        beta = float(p.coeffs[1]) if p.coeffs.size > 1 else 0.0
        sigma = h * np.arange(-(m - 1), m)
        win_diag = eta.eval_at(sk * beta * sigma[:, None] / rho + b[None, :])
        exp_yb = np.exp(-2j * np.pi * np.outer(y, b) / sk)
        g = np.einsum("yb,b,db->yd", exp_yb, eta_conj * h, win_diag)
        hmat = wpad * np.exp(2j * np.pi * y * alpha)[None, :] * h
        hmat = hmat * g.T
        tfac = np.exp(2j * np.pi * np.outer(y, beta * grid.axis / rho))
        kernel = np.empty((m, m), dtype=complex)
        for dd in range(-(m - 1), m):
            i0, i1 = max(dd, 0), min(m - 1, m - 1 + dd)
            ridx = np.arange(i0, i1 + 1)
            kernel[ridx, ridx - dd] = hmat[dd + m - 1] @ tfac[:, ridx - dd]
        return KernelOperator(grid, kernel)
    if m > 64:
        raise ParameterError("nonlinear window polynomials are capped at M=64")
    pt = p(grid.axis / rho)
    warg = pt[:, None] - b[None, :] / sk  # [t, b]
    ey = np.exp(2j * np.pi * warg[:, :, None] * y[None, None, :])
    dfull = np.einsum("dy,tby->dtb", wpad, ey) * h
    win = eta.eval_at(sk * (pt[:, None] - pt[None, :])[:, :, None] + b[None, None, :])
    ii = np.arange(m)
    dd = ii[:, None] - ii[None, :] + m - 1
    kernel = np.einsum("stb,b,stb->st", dfull[dd, ii[None, :], :],
                       eta_conj * h, win)
    return KernelOperator(grid, kernel)


def truncation_decay(phi: Symbol, eta: Window, pd: PerfectData, i: int, k: int,
                     norm_tol: float = 1e-8) -> float:
    """|| nu(phi)(i,k) o (I - M_{s_k rho_i^k}) ||: the mass beyond the window."""
    op = nu_ik(phi, eta, pd, i, k)
    cut = pd.s(k) * pd.rho(i, k)
    outside = np.abs(phi.grid.axis) >= cut
    return op_norm(mask_columns(op, outside), tol=norm_tol)


@dataclass(frozen=True)
class OperatorFieldGN:
    """A field over generic points plus the commutative zero fiber."""

    evaluate: Callable
    zero_fiber: Symbol


def field_from_fhat2(fh, grid: GridSpec) -> OperatorFieldGN:
    return OperatorFieldGN(lambda ell: pi_ell(fh, ell, grid), rho_symbol_N(fh))


def field_add(a: OperatorFieldGN, b: OperatorFieldGN) -> OperatorFieldGN:
    return OperatorFieldGN(
        lambda ell: a.evaluate(ell) + b.evaluate(ell),
        Symbol(a.zero_fiber.grid, a.zero_fiber.values + b.zero_fiber.values),
    )


def field_compose(a: OperatorFieldGN, b: OperatorFieldGN) -> OperatorFieldGN:
    return OperatorFieldGN(
        lambda ell: compose(a.evaluate(ell), b.evaluate(ell)),
        symbol_product(a.zero_fiber, b.zero_fiber),
    )


def condition_defect(kind: str, field: OperatorFieldGN, seq: PolynomialSequence,
                     pd: PerfectData, k: int, i: int = None,
                     eta: Window = None, phi: Symbol = None, psi: Symbol = None,
                     norm_tol: float = 1e-8) -> float:
    """One rung of the generic / character / infinity / nu-mult ladders.

    Translates are snapped to the grid before building the conjugating shift;
    the ladders used here keep them exactly aligned.
    """
    grid = field.zero_fiber.grid
    if kind == "nu_mult":
        if phi is None or psi is None or eta is None or i is None:
            raise ParameterError("nu_mult needs i, eta, phi, psi")
        lhs = compose(nu_ik(phi, eta, pd, i, k), nu_ik(psi, eta, pd, i, k))
        rhs = nu_ik(symbol_product(phi, psi), eta, pd, i, k)
        return op_norm(lhs - rhs, tol=norm_tol)
    ell_k = seq.point(k)
    a_k = field.evaluate(ell_k)
    if kind == "infinity":
        keep = np.ones(grid.points_per_axis, dtype=bool)
        for idx in range(1, pd.m + 1):
            cut = pd.s(k) * pd.rho(idx, k)
            keep &= np.abs(grid.axis - pd.t(idx, k)) > cut
        return op_norm(mask_columns(a_k, keep), tol=norm_tol)
    if i is None:
        raise ParameterError(f"kind={kind!r} needs a translate index i")
    shift = snap_to_grid(pd.t(i, k), grid)
    moved = translate(a_k, shift)
    if kind == "generic":
        if i not in pd.D:
            raise ParameterError("generic condition applies to i in D")
        ell_i = xi_hat_inverse(pd.q[i], seq.group_dim)
        diff = moved - field.evaluate(ell_i)
        return op_norm(truncate(diff, 0.0, pd.s(k), "right"), tol=norm_tol)
    if kind == "character":
        if i not in pd.C:
            raise ParameterError("character condition applies to i in C")
        if eta is None:
            raise ParameterError("character condition needs the window eta")
        diff = moved - nu_ik(field.zero_fiber, eta, pd, i, k)
        cut = pd.s(k) * pd.rho(i, k)
        return op_norm(truncate(diff, 0.0, cut, "right"), tol=norm_tol)
    raise ParameterError(f"unknown condition kind {kind!r}")
