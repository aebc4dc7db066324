"""Extra-invariance tests by rank bookkeeping, generator counts and reduction."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AlreadyMinimal
from .fiber import (DEFAULT_TAU, FiberBatch, a_fibers, check_supergroup, domain_points, fiber_values,
                    gram_fibers, lattice_hits, ranks_of, scan_window, support_union, in_union)
from .genlib.generators import GeneratorSet
from .grid import as_grid
from .lattice import FullSpace, Group, Lattice, coset_reps, dual_group

BREAKPOINT_RADIUS = 1e-6
MAX_EXCLUDED_FRACTION = 0.01


def _unordered_endpoints(phi: GeneratorSet, axis: int) -> np.ndarray:
    ends = support_union([g.expr for g in phi.gens], axis)
    return np.unique(ends.ravel())


def excluded_mask(phi: GeneratorSet, group: Group, omegas: np.ndarray,
                  radius: float = BREAKPOINT_RADIUS) -> np.ndarray:
    """Samples whose periodized copies (by ``group``) come within ``radius`` of a support endpoint."""
    n, d = omegas.shape
    bps = [_unordered_endpoints(phi, k) for k in range(d)]
    out = np.zeros(n, dtype=bool)
    if radius <= 0 or all(len(b) == 0 for b in bps):
        return out
    if isinstance(group, Lattice) and group.is_diagonal:
        from .fiber import _hits_1d
        c = group.spacings()
        for k in range(d):
            if len(bps[k]):
                pts = np.column_stack([bps[k] - radius, bps[k] + radius])
                idx, _ = _hits_1d(pts, float(c[k]), omegas[:, k])
                out[idx] = True
        return out
    sups = [support_union([g.expr for g in phi.gens], k) for k in range(d)]
    idx, ls = lattice_hits(sups, group, omegas, pad=radius)
    pts = omegas[idx] + ls
    hit = np.zeros(len(idx), dtype=bool)
    for k in range(d):
        if len(bps[k]):
            iv = np.column_stack([bps[k] - radius, bps[k] + radius])
            hit |= in_union(iv, pts[:, k])
    out[idx[hit]] = True
    return out


def _in_band(vals: np.ndarray, scale: np.ndarray, tau: float) -> np.ndarray:
    """Values too close to the rank threshold to support a confident decision."""
    lo = 0.1 * tau * scale
    hi = 10.0 * tau * scale
    return (vals > lo[..., None]) & (vals < hi[..., None])


@dataclass
class FiberRecord:
    omega: list
    rank_g: int
    ranks_a: list
    ok: bool
    excluded: bool = False

    def to_dict(self) -> dict:
        return {"omega": self.omega, "rank_g": self.rank_g, "ranks_a": self.ranks_a, "ok": self.ok,
                "excluded": self.excluded}


@dataclass
class InvarianceReport:
    verdict: str  # "Invariant" | "NotInvariant" | "Inconclusive"
    fibers: list
    excluded: int
    grid: dict
    tau: float
    gamma: str = ""
    violations: int = 0
    confident_violations: int = 0

    @property
    def samples(self) -> int:
        return len(self.fibers)

    def violating_fraction(self, lo=None, hi=None) -> float:
        """Fraction of non-excluded samples (optionally with omega[0] in (lo, hi)) that violate."""
        keep = [f for f in self.fibers if not f.excluded
                and (lo is None or f.omega[0] > lo) and (hi is None or f.omega[0] < hi)]
        if not keep:
            return 0.0
        return sum(not f.ok for f in keep) / len(keep)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "grid": self.grid, "tau": self.tau, "gamma": self.gamma,
                "excluded": self.excluded, "violations": self.violations,
                "confident_violations": self.confident_violations,
                "fibers": [f.to_dict() for f in self.fibers]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = len(self.fibers[0].omega) if self.fibers else 1
        k = len(self.fibers[0].ranks_a) if self.fibers else 0
        w.writerow([f"omega{i}" for i in range(d)] + ["rank_g"] + [f"rank_a{i}" for i in range(k)]
                   + ["ok", "excluded"])
        for f in self.fibers:
            w.writerow([repr(v) for v in f.omega] + [f.rank_g] + list(f.ranks_a)
                       + [int(f.ok), int(f.excluded)])
        return buf.getvalue()


def _decide(ok: np.ndarray, confident: np.ndarray, excluded: np.ndarray) -> str:
    if excluded.mean() > MAX_EXCLUDED_FRACTION:
        return "Inconclusive"
    live = ~excluded
    if np.all(ok[live]):
        return "Invariant"
    if np.any(~ok[live] & confident[live]):
        return "NotInvariant"
    return "Inconclusive"


def _assemble(omegas, rank_g, ranks_a, ok, excluded, confident, grid, d, tau, gamma) -> InvarianceReport:
    fibers = [FiberRecord([float(v) for v in omegas[n]], int(rank_g[n]), [int(v) for v in ranks_a[n]],
                          bool(ok[n]), bool(excluded[n])) for n in range(len(omegas))]
    return InvarianceReport(_decide(ok, confident, excluded), fibers, int(excluded.sum()),
                            grid.describe(d), tau, gamma, int(np.sum(~ok & ~excluded)),
                            int(np.sum(~ok & ~excluded & confident)))


def check_gamma_invariance(phi: GeneratorSet, gamma: Group, grid=None, tau: float = DEFAULT_TAU,
                           radius: float = BREAKPOINT_RADIUS) -> InvarianceReport:
    """Compare rank G(w) with the sum over coset representatives f of rank A(w + f)."""
    check_supergroup(phi, gamma)
    if isinstance(gamma, FullSpace):
        return check_translation_invariance(phi, grid, tau, radius)
    grid = as_grid(grid)
    w = domain_points(phi, grid)
    g = gram_fibers(phi, w)
    ev_g = g.eigvals
    rank_g = ranks_of(ev_g, tau)
    unsure = _in_band(ev_g, np.maximum(1.0, ev_g[:, 0]), tau).any(axis=1)
    reps = coset_reps(phi.lattice, gamma).as_array()
    ranks_a = np.zeros((len(w), len(reps)), dtype=int)
    for k, f in enumerate(reps):
        a = a_fibers(phi, gamma, w + f)
        ev = a.eigvals
        ranks_a[:, k] = ranks_of(ev, tau)
        unsure |= _in_band(ev, np.maximum(1.0, ev[:, 0]), tau).any(axis=1)
    ok = rank_g == ranks_a.sum(axis=1)
    excluded = excluded_mask(phi, dual_group(phi.lattice), w, radius)
    return _assemble(w, rank_g, ranks_a, ok, excluded, ~unsure, grid, phi.dim, tau, str(gamma))


def nonzero_fiber_counts(phi: GeneratorSet, omegas: np.ndarray, tau: float = DEFAULT_TAU):
    """Per sample: number of l in the dual lattice with Phi(w + l) numerically nonzero."""
    idx, _, vals = fiber_values(phi, dual_group(phi.lattice), omegas)
    sq = np.sum(np.abs(vals) ** 2, axis=1)
    thr = tau * np.maximum(1.0, sq)
    nz = sq > thr
    counts = np.bincount(idx[nz], minlength=len(omegas))
    unsure_pts = (sq > 0.1 * thr) & (sq < 10.0 * thr)
    unsure = np.bincount(idx[unsure_pts], minlength=len(omegas)) > 0
    return counts, unsure


def check_translation_invariance(phi: GeneratorSet, grid=None, tau: float = DEFAULT_TAU,
                                 radius: float = BREAKPOINT_RADIUS) -> InvarianceReport:
    """Compare rank G(w) with the number of nonzero points of the fiber of Phi at w."""
    grid = as_grid(grid)
    w = domain_points(phi, grid)
    ev_g = gram_fibers(phi, w).eigvals
    rank_g = ranks_of(ev_g, tau)
    counts, unsure = nonzero_fiber_counts(phi, w, tau)
    unsure |= _in_band(ev_g, np.maximum(1.0, ev_g[:, 0]), tau).any(axis=1)
    ok = rank_g == counts
    excluded = excluded_mask(phi, dual_group(phi.lattice), w, radius)
    return _assemble(w, rank_g, counts[:, None], ok, excluded, ~unsure, grid, phi.dim, tau,
                     str(FullSpace(phi.dim)))


def _gram_ranks(phi, grid, tau, radius):
    w = domain_points(phi, grid)
    ranks = gram_fibers(phi, w).ranks(tau)
    excluded = excluded_mask(phi, dual_group(phi.lattice), w, radius)
    return w, ranks, excluded


def minimal_generator_count(phi: GeneratorSet, grid=None, tau: float = DEFAULT_TAU,
                            radius: float = BREAKPOINT_RADIUS) -> int:
    """Largest numerical rank of G(w) over the non-excluded samples."""
    _, ranks, excluded = _gram_ranks(phi, as_grid(grid), tau, radius)
    live = ranks[~excluded]
    return int(live.max()) if len(live) else 0


@dataclass
class ReducedSet:
    """Fiberwise reduced families: ``vectors[n]`` has shape (fiber length, r - 1)."""

    omegas: np.ndarray
    vectors: list
    removed: np.ndarray
    span_residual: float
    r: int
    log: list = field(default_factory=list)

    def relabel(self, n: int) -> dict:
        """Map original generator index to its index in the reduced family at fiber ``n``."""
        cut = int(self.removed[n])
        return {i: (i if i < cut else i - 1) for i in range(self.r) if i != cut}

    def __len__(self):
        return len(self.vectors)


def _residual(vecs: np.ndarray, target: np.ndarray) -> float:
    if vecs.shape[1] == 0:
        return float(np.linalg.norm(target))
    coef, *_ = np.linalg.lstsq(vecs, target, rcond=None)
    return float(np.linalg.norm(target - vecs @ coef))


def _span_gap(basis: np.ndarray, originals: np.ndarray) -> float:
    return max((_residual(basis, originals[:, i]) for i in range(originals.shape[1])), default=0.0)


def reduce_generators(phi: GeneratorSet, grid=None, tau: float = DEFAULT_TAU,
                      radius: float = BREAKPOINT_RADIUS) -> ReducedSet:
    """Drop, at every fiber, the first generator vector lying in the span of the others."""
    grid = as_grid(grid)
    w, ranks, excluded = _gram_ranks(phi, grid, tau, radius)
    if np.any(ranks[~excluded] == phi.r) or not np.any(~excluded):
        raise AlreadyMinimal(f"some fiber already has full rank {phi.r}")
    idx, _, vals = fiber_values(phi, dual_group(phi.lattice), w)
    starts = np.searchsorted(idx, np.arange(len(w)), side="left")
    stops = np.searchsorted(idx, np.arange(len(w)), side="right")
    vectors, removed, log = [], np.zeros(len(w), dtype=int), []
    worst = 0.0
    for n in range(len(w)):
        V = vals[starts[n]:stops[n]]
        scale = max(1.0, float(np.linalg.norm(V, axis=0).max(initial=0.0)))
        res = [_residual(np.delete(V, i, axis=1), V[:, i]) for i in range(phi.r)]
        hits = [i for i, v in enumerate(res) if v < tau * scale]
        cut = hits[0] if hits else int(np.argmin(res))
        if not hits:
            log.append({"omega": w[n].tolist(), "note": "no exact dependency; removed the nearest",
                        "removed": cut, "residual": res[cut]})
        kept = np.delete(V, cut, axis=1)
        removed[n] = cut
        vectors.append(kept)
        if not excluded[n]:
            worst = max(worst, _span_gap(kept, V))
    return ReducedSet(w, vectors, removed, worst, phi.r, log)


def rank_drop_locus(phi: GeneratorSet, grid=None, tau: float = DEFAULT_TAU, rho=None,
                    radius: float = BREAKPOINT_RADIUS, force: bool = False) -> list[tuple[list, int]]:
    """Non-excluded samples where rank G(w) < rho (default: the minimal generator count)."""
    if not phi.continuous and not force:
        raise ValueError("rank_drop_locus expects continuous generators (pass force=True to override)")
    w, ranks, excluded = _gram_ranks(phi, as_grid(grid), tau, radius)
    if rho is None:
        live = ranks[~excluded]
        rho = max(1, int(live.max()) if len(live) else 0)
    sel = np.flatnonzero((ranks < rho) & ~excluded)
    return [(w[n].tolist(), int(ranks[n])) for n in sel]


def _scan_batch(phi: GeneratorSet, gamma: Group, grid) -> tuple[FiberBatch, tuple]:
    lo, hi = scan_window(phi, gamma)
    grid = as_grid(grid)
    pts = grid.box_points(lo, hi)
    return a_fibers(phi, gamma, pts), grid.counts(phi.dim)


@dataclass
class SemicontinuityFlag:
    omega: list
    rank: int
    neighbour_ranks: list

    def to_dict(self):
        return {"omega": self.omega, "rank": self.rank, "neighbour_ranks": self.neighbour_ranks}


def semicontinuity_scan(phi: GeneratorSet, gamma: Group, grid=None,
                        tau: float = DEFAULT_TAU) -> list[SemicontinuityFlag]:
    """Samples where rank A jumps *up* relative to both axis neighbours.

    A lower semicontinuous rank may dip at isolated points but never spike; a
    confident spike (all eigenvalues clear of the threshold band) is flagged.
    """
    batch, shape = _scan_batch(phi, gamma, grid)
    ev = batch.eigvals
    ranks = ranks_of(ev, tau)
    unsure = _in_band(ev, np.maximum(1.0, ev[:, 0]), tau).any(axis=1)
    flags = []
    flat = np.arange(len(ranks)).reshape(shape)
    for ax in range(len(shape)):
        if shape[ax] < 3:
            continue
        mid = np.take(flat, range(1, shape[ax] - 1), axis=ax).ravel()
        left = np.take(flat, range(0, shape[ax] - 2), axis=ax).ravel()
        right = np.take(flat, range(2, shape[ax]), axis=ax).ravel()
        spike = (ranks[mid] > ranks[left]) & (ranks[mid] > ranks[right])
        sure = ~(unsure[mid] | unsure[left] | unsure[right])
        for m, l, r in zip(mid[spike & sure], left[spike & sure], right[spike & sure]):
            flags.append(SemicontinuityFlag(batch.omegas[m].tolist(), int(ranks[m]),
                                            [int(ranks[l]), int(ranks[r])]))
    return flags


def rank_histogram(phi: GeneratorSet, gamma: Group, grid=None, tau: float = DEFAULT_TAU):
    batch, _ = _scan_batch(phi, gamma, grid)
    return batch, batch.ranks(tau)


def constant_rank_scan(phi: GeneratorSet, gamma: Group, grid=None, s: float = 1.0,
                       tau: float = DEFAULT_TAU, radius: float = BREAKPOINT_RADIUS) -> dict:
    """Histogram of rank A(w) over the scan window; ``constant`` if a single value occurs."""
    if s < 1:
        raise ValueError("frame constant s must be >= 1")
    batch, ranks = rank_histogram(phi, gamma, grid, tau)
    group = dual_group(gamma)
    excluded = excluded_mask(phi, group, batch.omegas, radius)
    hist = Counter(int(v) for v in ranks[~excluded])
    constant = len(hist) == 1
    return {"constant": constant, "rank": next(iter(hist)) if constant else None,
            "histogram": dict(sorted(hist.items())), "excluded": int(excluded.sum()),
            "samples": len(ranks)}
