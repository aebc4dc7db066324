"""Fiberwise matrices G(w) and A(w), their spectra, and Riesz/frame bounds.

Lattice sums are enumerated exactly: only the lattice points ``l`` for which
``w + l`` meets a generator's declared support contribute.  Truncated series
generators contribute a per-fiber error bound through ``trunc_error``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .exceptions import DimensionMismatch, NotSuperGroup, ZeroMatrix
from .genlib.expr import Tensor, merge_intervals
from .genlib.generators import GeneratorSet
from .grid import as_grid
from .lattice import (FullSpace, Group, Lattice, ZeroGroup, dual_group, fundamental_domain)

DEFAULT_TAU = 1e-8
DEFAULT_FLOOR = 1e-6
_MAX_CANDIDATES = 2_000_000


# --- spectra ----------------------------------------------------------------------

def _thresholds(eigvals: np.ndarray, tau: float) -> np.ndarray:
    lam_max = eigvals[..., 0] if eigvals.shape[-1] else np.zeros(eigvals.shape[:-1])
    return tau * np.maximum(1.0, lam_max)


def ranks_of(eigvals: np.ndarray, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Numerical ranks from descending eigenvalues, threshold ``tau * max(1, lambda_max)``."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    thr = _thresholds(eigvals, tau)
    return np.sum(eigvals > thr[..., None], axis=-1)


def hermitian_eigvals(entries: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of (a batch of) Hermitian matrices."""
    entries = np.asarray(entries)
    if entries.shape[-1] == 0:
        return np.zeros(entries.shape[:-1])
    bad = ~np.isfinite(entries).all(axis=(-1, -2)) if entries.ndim == 3 else None
    if bad is not None and bad.any():
        safe = np.where(bad[:, None, None], 0.0, entries)
        ev = np.linalg.eigvalsh(safe)[..., ::-1]
        ev[bad] = np.nan
        return ev
    return np.linalg.eigvalsh(entries)[..., ::-1]


@dataclass
class FiberMatrix:
    """An r x r Hermitian PSD matrix at frequency ``omega``."""

    omega: np.ndarray
    entries: np.ndarray
    trunc_error: float = 0.0

    @cached_property
    def eigvals(self) -> np.ndarray:
        return hermitian_eigvals(self.entries)

    @property
    def r(self) -> int:
        return self.entries.shape[0]


def _as_entries(m) -> np.ndarray:
    if isinstance(m, FiberMatrix):
        return m.entries
    return np.asarray(m, dtype=complex)


def _eig(m) -> np.ndarray:
    if isinstance(m, FiberMatrix):
        return m.eigvals
    return hermitian_eigvals(_as_entries(m))


def numerical_rank(m, tau: float = DEFAULT_TAU) -> int:
    """Number of eigenvalues above ``tau * max(1, lambda_max)``."""
    return int(ranks_of(_eig(m)[None, :], tau)[0])


def min_nonzero_eig(m, tau: float = DEFAULT_TAU) -> float:
    """Smallest eigenvalue above the rank threshold."""
    ev = _eig(m)
    k = numerical_rank(m, tau)
    if k == 0:
        raise ZeroMatrix("matrix is numerically zero")
    return float(ev[k - 1])


@dataclass
class FiberBatch:
    """Matrices at many frequencies: ``entries`` has shape (N, r, r)."""

    omegas: np.ndarray
    entries: np.ndarray
    trunc: np.ndarray

    @cached_property
    def eigvals(self) -> np.ndarray:
        return hermitian_eigvals(self.entries)

    def ranks(self, tau: float = DEFAULT_TAU) -> np.ndarray:
        return ranks_of(self.eigvals, tau)

    def __len__(self):
        return len(self.omegas)

    def __getitem__(self, n) -> FiberMatrix:
        return FiberMatrix(self.omegas[n], self.entries[n], float(self.trunc[n]))

    def to_csv(self, tau: float = DEFAULT_TAU) -> str:
        """One row per fiber: omega coordinates, eigenvalues descending, rank, trunc_error."""
        d, r = self.omegas.shape[1], self.entries.shape[1]
        head = [f"omega{k}" for k in range(d)] + [f"eig{k}" for k in range(r)] + ["rank", "trunc_error"]
        lines = [",".join(head)]
        ranks = self.ranks(tau)
        for w, ev, k, t in zip(self.omegas, self.eigvals, ranks, self.trunc):
            vals = [repr(float(x)) for x in w] + [repr(float(x)) for x in ev]
            lines.append(",".join(vals + [str(int(k)), repr(float(t))]))
        return "\n".join(lines) + "\n"


# --- support bookkeeping ---------------------------------------------------------------

def support_union(exprs, axis: int) -> np.ndarray:
    ivs = [e.support()[axis] for e in exprs]
    out = merge_intervals(np.concatenate(ivs)) if ivs else np.zeros((0, 2))
    if len(out) and not np.isfinite(out).all():
        raise ValueError("lattice sums need compactly supported generators")
    return out


def in_union(iv: np.ndarray, x: np.ndarray) -> np.ndarray:
    if len(iv) == 0:
        return np.zeros(np.shape(x), dtype=bool)
    k = np.searchsorted(iv[:, 0], x, side="right") - 1
    kk = np.clip(k, 0, None)
    return (k >= 0) & (x <= iv[kk, 1])


def _expand_ranges(starts: np.ndarray, stops: np.ndarray):
    """Concatenate arange(start, stop) for each pair; also return the owning pair index."""
    lens = np.maximum(stops - starts, 0)
    total = int(lens.sum())
    owner = np.repeat(np.arange(len(starts)), lens)
    offs = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
    return starts[owner] + offs, owner


def _hits_1d(iv: np.ndarray, spacing: float, w: np.ndarray, sort: bool = True):
    """All (sample index, lattice point) with ``iv[a] <= w + spacing*m <= iv[b]``."""
    n = len(w)
    if len(iv) == 0 or n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    order = np.argsort(w, kind="stable")
    ws = w[order]
    m_lo = np.ceil((iv[:, 0] - ws[-1]) / spacing).astype(np.int64)
    m_hi = np.floor((iv[:, 1] - ws[0]) / spacing).astype(np.int64)
    ms, owner = _expand_ranges(m_lo, m_hi + 1)
    shift = spacing * ms.astype(float)
    lo = np.searchsorted(ws, iv[owner, 0] - shift, side="left")
    hi = np.searchsorted(ws, iv[owner, 1] - shift, side="right")
    pos, pair = _expand_ranges(lo, hi)
    idx = order[pos]
    lstep = shift[pair]
    if not sort:
        return idx, lstep
    keep = np.argsort(idx, kind="stable")
    return idx[keep], lstep[keep]


def _combine_axes(per_axis, n: int):
    """Cartesian product, per sample, of per-axis hit lists (each sorted by sample)."""
    idx, coords = per_axis[0][0], per_axis[0][1][:, None]
    for ax_idx, ax_val in per_axis[1:]:
        counts = np.bincount(ax_idx, minlength=n)
        starts = np.cumsum(counts) - counts
        rep = counts[idx]
        new_idx = np.repeat(idx, rep)
        base = np.repeat(starts[idx], rep)
        within = np.arange(len(new_idx)) - np.repeat(np.cumsum(rep) - rep, rep)
        col = ax_val[base + within]
        coords = np.column_stack([np.repeat(coords, rep, axis=0), col])
        idx = new_idx
    return idx, coords


def lattice_hits(supports: list[np.ndarray], group: Group, omegas: np.ndarray, pad: float = 0.0):
    """Enumerate lattice points ``l`` with ``omega + l`` in the per-axis support product.

    Returns ``(idx, l)``: sample indices (sorted, stable) and the lattice vectors.
    """
    omegas = np.asarray(omegas, dtype=float)
    n, d = omegas.shape
    sups = [merge_intervals(s + np.array([-pad, pad])) if pad else s for s in supports]
    if isinstance(group, ZeroGroup):
        inside = np.ones(n, dtype=bool)
        for k in range(d):
            inside &= in_union(sups[k], omegas[:, k])
        idx = np.flatnonzero(inside)
        return idx, np.zeros((len(idx), d))
    if not isinstance(group, Lattice):
        raise ValueError("fiber sums run over a lattice or the trivial group")
    if group.is_diagonal:
        c = group.spacings()
        per_axis = []
        for k in range(d):
            ix, lk = _hits_1d(sups[k], c[k], omegas[:, k])
            per_axis.append((ix, lk))
        return _combine_axes(per_axis, n)
    return _hits_general(sups, group, omegas)


def _hits_general(sups, group: Lattice, omegas: np.ndarray):
    n, d = omegas.shape
    if any(len(s) == 0 for s in sups):
        return np.zeros(0, dtype=np.int64), np.zeros((0, d))
    B = group.basis_array()
    Binv = np.linalg.inv(B)
    box_lo = np.array([s[0, 0] for s in sups])
    box_hi = np.array([s[-1, 1] for s in sups])
    w_lo, w_hi = omegas.min(axis=0), omegas.max(axis=0)
    corners = []
    for ys in np.array(np.meshgrid(*[[box_lo[k] - w_hi[k], box_hi[k] - w_lo[k]] for k in range(d)],
                                   indexing="ij")).reshape(d, -1).T:
        corners.append(Binv @ ys)
    corners = np.array(corners)
    m_lo = np.floor(corners.min(axis=0)).astype(int)
    m_hi = np.ceil(corners.max(axis=0)).astype(int)
    sizes = m_hi - m_lo + 1
    if np.prod(sizes.astype(float)) * n > 50 * _MAX_CANDIDATES:
        raise ValueError("support too large for general-lattice enumeration")
    ms = np.array(np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(m_lo, m_hi)],
                              indexing="ij")).reshape(d, -1).T
    ls = ms @ B.T
    out_idx, out_l = [], []
    chunk = max(1, _MAX_CANDIDATES // max(1, len(ls)))
    for s in range(0, n, chunk):
        w = omegas[s:s + chunk]
        pts = w[:, None, :] + ls[None, :, :]
        ok = np.ones(pts.shape[:2], dtype=bool)
        for k in range(d):
            ok &= in_union(sups[k], pts[..., k])
        ii, jj = np.nonzero(ok)
        out_idx.append(ii + s)
        out_l.append(ls[jj])
    return np.concatenate(out_idx), np.concatenate(out_l)


def fiber_values(phi: GeneratorSet, group: Group, omegas, pad: float = 0.0):
    """Generator values on every contributing point of ``omegas + group``.

    Returns ``(idx, points, values)`` with ``values`` of shape (H, r).
    """
    omegas = _as_points(omegas, phi.dim)
    exprs = [g.expr for g in phi.gens]
    sups = [support_union(exprs, k) for k in range(phi.dim)]
    idx, ls = lattice_hits(sups, group, omegas, pad)
    pts = omegas[idx] + ls
    return idx, pts, _eval_on_supports(exprs, pts)


def _eval_on_supports(exprs, pts: np.ndarray) -> np.ndarray:
    """Evaluate each expression only where its own support can be nonzero."""
    vals = np.zeros((len(pts), len(exprs)), dtype=complex)
    if not len(pts):
        return vals
    for i, e in enumerate(exprs):
        mask = np.ones(len(pts), dtype=bool)
        for k, iv in enumerate(e.support()):
            if len(iv) < 64 or not np.isfinite(iv).all():
                continue
            mask &= in_union(iv, pts[:, k])
        sel = np.flatnonzero(mask)
        if len(sel) == len(pts):
            vals[:, i] = e.evaluate(pts)
        elif len(sel):
            vals[sel, i] = e.evaluate(pts[sel])
    return vals


def _outer_sums(idx, vals, n: int) -> np.ndarray:
    r = vals.shape[1]
    out = np.zeros((n, r, r), dtype=complex)
    for i in range(r):
        for j in range(i, r):
            prod = vals[:, i] * np.conj(vals[:, j])
            s = np.bincount(idx, weights=prod.real, minlength=n)
            if i == j:
                out[:, i, i] = s
            else:
                s = s + 1j * np.bincount(idx, weights=prod.imag, minlength=n)
                out[:, i, j] = s
                out[:, j, i] = np.conj(s)
    return out


def _pair_bound(norms: np.ndarray, errs: np.ndarray) -> np.ndarray:
    """max_ij of |a_i| e_j + e_i |a_j| + e_i e_j, with a and e of shape (N, r)."""
    with np.errstate(invalid="ignore"):
        m = norms[:, :, None] * errs[:, None, :] + errs[:, :, None] * norms[:, None, :] \
            + errs[:, :, None] * errs[:, None, :]
    m = np.where(np.isnan(m), math.inf, m)
    return m.reshape(len(m), -1).max(axis=1) if m.size else np.zeros(len(m))


def _as_points(omegas, d: int) -> np.ndarray:
    w = np.asarray(omegas, dtype=float)
    if w.ndim == 0:
        w = w.reshape(1, 1)
    elif w.ndim == 1:
        w = w.reshape(-1, 1) if d == 1 else w.reshape(1, -1)
    if w.shape[1] != d:
        raise DimensionMismatch(f"frequencies of dimension {w.shape[1]}, generators of dimension {d}")
    return w


def _separable(phi: GeneratorSet) -> bool:
    if phi.dim == 1:
        return False
    return all(isinstance(g.expr, Tensor) and len(g.expr.children) == phi.dim
               for g in phi.gens)


def _sum_1d(exprs, tails, spacing: float, w: np.ndarray):
    """Matrix of sums over w + spacing*Z for 1-D expressions, plus per-generator tail norms."""
    n = len(w)
    sup = support_union(exprs, 0)
    idx, ls = _hits_1d(sup, spacing, w, sort=False)
    pts = w[idx] + ls
    vals = _eval_on_supports(exprs, pts[:, None])
    ent = _outer_sums(idx, vals, n)
    errs = np.zeros((n, len(exprs)))
    for i, (e, has_tail) in enumerate(zip(exprs, tails)):
        if has_tail:
            errs[:, i] = np.sqrt(e.fiber_tail_sq(w, spacing))
    return ent, errs


def periodization(phi: GeneratorSet, group: Group, omegas) -> FiberBatch:
    """sum over g in ``group`` of Phi(w + g) Phi(w + g)^*, for each sample."""
    w = _as_points(omegas, phi.dim)
    n, d = w.shape
    if isinstance(group, ZeroGroup):
        vals = np.empty((n, phi.r), dtype=complex)
        for i, g in enumerate(phi.gens):
            vals[:, i] = g.expr.evaluate(w)
        ent = vals[:, :, None] * np.conj(vals[:, None, :])
        errs = np.array([[g.tail_bound for g in phi.gens]] * n).reshape(n, phi.r)
        return FiberBatch(w, ent, _pair_bound(np.abs(vals), errs))
    if d == 1 and group.is_diagonal:
        c = float(group.spacings()[0])
        exprs = [g.expr for g in phi.gens]
        ent, errs = _sum_1d(exprs, [g.tail_bound > 0 for g in phi.gens], c, w[:, 0])
        norms = np.sqrt(np.maximum(np.real(np.einsum("nii->ni", ent)), 0))
        return FiberBatch(w, ent, _pair_bound(norms, errs))
    if group.is_diagonal and _separable(phi):
        c = group.spacings()
        ent = np.ones((n, phi.r, phi.r), dtype=complex)
        prod_norm = np.ones((n, phi.r))
        prod_full = np.ones((n, phi.r))
        for k in range(d):
            exprs = [g.expr.children[k] for g in phi.gens]
            tails = [e.tail_sup() > 0 for e in exprs]
            ek, errs = _sum_1d(exprs, tails, float(c[k]), w[:, k])
            ent *= ek
            nk = np.sqrt(np.maximum(np.real(np.einsum("nii->ni", ek)), 0))
            prod_norm *= nk
            prod_full *= nk + errs
        return FiberBatch(w, ent, _pair_bound(prod_norm, prod_full - prod_norm))
    idx, _, vals = fiber_values(phi, group, w)
    ent = _outer_sums(idx, vals, n)
    has_tail = any(g.tail_bound > 0 for g in phi.gens)
    trunc = np.full(n, math.inf) if has_tail else np.zeros(n)
    return FiberBatch(w, ent, trunc)


# --- public fiber operations ----------------------------------------------------------

def gram_fibers(phi: GeneratorSet, omegas) -> FiberBatch:
    return periodization(phi, dual_group(phi.lattice), omegas)


def gram_fiber(phi: GeneratorSet, omega) -> FiberMatrix:
    """G(w)_{ij} = sum over l in the dual lattice of phi_i(w + l) conj(phi_j(w + l))."""
    return gram_fibers(phi, _as_points(omega, phi.dim)[:1])[0]


def check_supergroup(phi: GeneratorSet, gamma: Group) -> None:
    if isinstance(gamma, FullSpace):
        if gamma.d != phi.dim:
            raise DimensionMismatch("Gamma has the wrong dimension")
        return
    if not isinstance(gamma, Lattice):
        raise NotSuperGroup(f"{gamma} is not a supergroup of the base lattice")
    if gamma.dim != phi.dim or not phi.lattice.is_sublattice_of(gamma):
        raise NotSuperGroup(f"base lattice {phi.lattice} is not contained in {gamma}")


def a_fibers(phi: GeneratorSet, gamma: Group, omegas) -> FiberBatch:
    check_supergroup(phi, gamma)
    return periodization(phi, dual_group(gamma), omegas)


def a_fiber(phi: GeneratorSet, gamma: Group, omega) -> FiberMatrix:
    """A(w) = sum over g in Gamma* of Phi(w + g) Phi(w + g)^*."""
    return a_fibers(phi, gamma, _as_points(omega, phi.dim)[:1])[0]


def check_ga_identity(phi: GeneratorSet, gamma: Group, omega, reps=None) -> float:
    """max-abs residual of G(w) - sum over coset reps f of A(w + f)."""
    from .lattice import coset_reps
    check_supergroup(phi, gamma)
    if not isinstance(gamma, Lattice):
        raise NotSuperGroup("the coset decomposition needs a lattice Gamma")
    reps = reps if reps is not None else coset_reps(phi.lattice, gamma)
    w = _as_points(omega, phi.dim)
    g = gram_fibers(phi, w).entries
    acc = np.zeros_like(g)
    for f in reps.as_array():
        acc += a_fibers(phi, gamma, w + f).entries
    res = np.abs(g - acc).reshape(len(w), -1).max(axis=1)
    return float(res[0]) if len(w) == 1 else res


# --- frame bounds -------------------------------------------------------------------

@dataclass
class FrameReport:
    lower: float
    upper: float
    s: float
    verdict: str  # "Riesz" | "FrameNotRiesz" | "NotFrame"
    grid: dict
    tau: float
    floor: float
    rank_deficient: int = 0
    refined_lower: Optional[float] = None
    samples: int = 0

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "lower": self.lower, "upper": self.upper, "s": self.s,
                "grid": self.grid, "tau": self.tau, "floor": self.floor,
                "rank_deficient": self.rank_deficient, "refined_lower": self.refined_lower,
                "samples": self.samples}


def domain_points(phi: GeneratorSet, grid=None) -> np.ndarray:
    """Grid over one fundamental domain of the dual lattice."""
    return as_grid(grid).points(fundamental_domain(dual_group(phi.lattice)))


def _bounds(batch: FiberBatch, tau: float):
    ev = batch.eigvals
    ranks = ranks_of(ev, tau)
    nz = ranks > 0
    if not nz.any():
        return 0.0, 0.0, ranks
    lower = float(np.min(ev[nz, :][np.arange(nz.sum()), ranks[nz] - 1]))
    upper = float(np.max(ev[nz, 0]))
    return lower, upper, ranks


def frame_report(phi: GeneratorSet, grid=None, tau: float = DEFAULT_TAU,
                 floor: float = DEFAULT_FLOOR) -> FrameReport:
    """Spectral Riesz/frame verdict from the Gramian on a grid of fibers."""
    grid = as_grid(grid)
    batch = gram_fibers(phi, domain_points(phi, grid))
    lower, upper, ranks = _bounds(batch, tau)
    deficient = int(np.sum(ranks < phi.r))
    refined = None
    if lower >= floor and lower > 0:
        verdict = "Riesz" if deficient == 0 else "FrameNotRiesz"
    else:
        verdict = "NotFrame"
        fine = gram_fibers(phi, domain_points(phi, grid.refined(phi.dim)))
        refined, _, _ = _bounds(fine, tau)
    s = max(upper, 1.0 / lower) if lower > 0 else math.inf
    return FrameReport(lower, upper, s, verdict, grid.describe(phi.dim), tau, floor,
                       deficient, refined, len(batch))


def scan_window(phi: GeneratorSet, gamma: Group, pad: float = 0.25):
    """Natural scan box for A(w): one period of Gamma*, or the support hull for Gamma = R^d."""
    if isinstance(gamma, FullSpace):
        exprs = [g.expr for g in phi.gens]
        lo, hi = [], []
        for k in range(phi.dim):
            s = support_union(exprs, k)
            if len(s) == 0:
                lo.append(-1.0)
                hi.append(1.0)
            else:
                lo.append(s[0, 0] - pad)
                hi.append(s[-1, 1] + pad)
        return np.array(lo), np.array(hi)
    dom = fundamental_domain(dual_group(gamma))
    if not dual_group(gamma).is_diagonal:
        raise ValueError("scan windows need an axis-aligned Gamma")
    return np.asarray(dom.offset), np.asarray(dom.offset) + np.diag(dom.edges)


@dataclass
class Violation:
    omega: list
    eigenvalue: float

    def to_dict(self):
        return {"omega": self.omega, "eigenvalue": self.eigenvalue}


def check_frame_A_bounds(phi: GeneratorSet, gamma: Group, grid=None, s: float = 1.0,
                         tau: float = DEFAULT_TAU, tol: float = 1e-9, omegas=None) -> list[Violation]:
    """Fibers where a nonzero eigenvalue of A(w) leaves [1/s, s] by more than ``tol``."""
    if s < 1:
        raise ValueError("frame constant s must be >= 1")
    if omegas is None:
        lo, hi = scan_window(phi, gamma)
        omegas = as_grid(grid).box_points(lo, hi)
    batch = a_fibers(phi, gamma, omegas)
    ev = batch.eigvals
    thr = _thresholds(ev, tau)
    out = []
    for n in range(len(ev)):
        nz = ev[n][ev[n] > thr[n]]
        bad = nz[(nz < 1.0 / s - tol) | (nz > s + tol)]
        if len(bad):
            out.append(Violation(batch.omegas[n].tolist(), float(bad[0])))
    return out
