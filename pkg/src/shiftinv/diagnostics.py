"""Decay and regularity diagnostics for Fourier-domain generators.

All quantities are grid or quadrature measurements reported together with a
trend label; none of them certifies an infinite value.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import DimensionMismatch
from .fiber import a_fibers, frame_report, gram_fibers, scan_window, support_union
from .genlib.generators import FourierGenerator, GeneratorSet
from .grid import as_grid
from .lattice import Group, Lattice

DEFAULT_H_SCHEDULE = (1 / 64, 1 / 128, 1 / 256, 1 / 512)
DEFAULT_OMEGA = 8.0


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# --- pointwise decay ----------------------------------------------------------------

@dataclass
class DecayReport:
    s: float
    sup: float
    levels: list
    block_sups: list
    trend: str  # "bounded" | "diverging" | "inconclusive"
    samples: int = 0

    def ratios(self) -> list:
        b = self.block_sups
        return [b[k + 1] / b[k] if b[k] > 0 else math.inf for k in range(len(b) - 1)]

    def to_dict(self) -> dict:
        return {"s": self.s, "sup": self.sup, "trend": self.trend, "samples": self.samples,
                "blocks": [{"level": int(j), "sup": float(v)} for j, v in zip(self.levels, self.block_sups)]}

    def to_csv(self) -> str:
        return _csv(["level", "sup"], zip(self.levels, self.block_sups))


def classify_blocks(sups, min_run: int = 3, step: float = 1.02, total: float = 1.5,
                    spread: float = 0.10) -> str:
    """Label a sequence of per-block sups.

    diverging: every consecutive ratio is at least ``step`` and the sequence
    grows by ``total`` or more over a run of at least ``min_run`` blocks.
    bounded: the last ``min_run`` blocks agree within ``spread``.
    """
    v = np.asarray(sups, dtype=float)
    if len(v) < min_run or not np.all(np.isfinite(v)):
        return "inconclusive"
    if np.all(v == 0):
        return "bounded"
    pos = v > 0
    if np.all(pos) and np.all(v[1:] / v[:-1] >= step) and v[-1] / v[0] >= total:
        return "diverging"
    tail = v[-min_run:]
    if tail.max() <= (1 + spread) * tail.min():
        return "bounded"
    return "inconclusive"


def _sample_intervals(iv: np.ndarray, per: int) -> np.ndarray:
    """``per`` equispaced points on each closed interval, endpoints included."""
    if len(iv) == 0:
        return np.zeros(0)
    u = np.linspace(0.0, 1.0, per)
    return (iv[:, :1] + (iv[:, 1:] - iv[:, :1]) * u[None, :]).ravel()


def decay_sup(gen: FourierGenerator, s: float, grid=None, per_interval: int = 33,
              radius: Optional[float] = None) -> DecayReport:
    """sup of |w|^s |phi(w)| over the support, with per-level block sups for series generators.

    Non-series generators are split into dyadic shells 2^k <= |w| < 2^(k+1);
    ``radius`` bounds the scan for generators with unbounded support.
    """
    if s < 0:
        raise ValueError("exponent s must be >= 0")
    if gen.dim != 1:
        raise DimensionMismatch("decay_sup expects a 1-D generator")
    blocks = gen.expr.blocks()
    levels, sups, total = [], [], 0
    if blocks is not None:
        for j, iv in blocks:
            w = _sample_intervals(iv, per_interval)
            vals = np.abs(w) ** s * np.abs(gen.expr.evaluate(w)) if len(w) else np.zeros(1)
            levels.append(j)
            sups.append(float(vals.max(initial=0.0)))
            total += len(w)
        monitored = [v for j, v in zip(levels, sups) if j >= 1]
    else:
        sup = support_union([gen.expr], 0)
        if len(sup) and not np.isfinite(sup).all():
            if radius is None:
                raise ValueError("unbounded support needs a scan radius")
            sup = np.clip(sup, -radius, radius)
        n = as_grid(grid).counts(1)[0]
        w = np.concatenate([np.linspace(a, b, max(per_interval, int(n * (b - a)) + 1)) for a, b in sup]) \
            if len(sup) else np.zeros(1)
        vals = np.abs(w) ** s * np.abs(gen.expr.evaluate(w))
        total = len(w)
        shell = np.floor(np.log2(np.maximum(np.abs(w), 1e-300))).astype(int)
        shell = np.maximum(shell, -1)
        top = max(int(shell.max()) + 3, 2)
        for k in range(-1, top):
            m = shell == k
            levels.append(k)
            sups.append(float(vals[m].max()) if m.any() else 0.0)
        # a bounded support cannot sustain growth: report the shells but label bounded
        monitored = None if np.isfinite(support_union([gen.expr], 0)).all() else sups
    grid_sup = max(sups) if sups else 0.0
    trend = "bounded" if monitored is None else classify_blocks(monitored)
    return DecayReport(float(s), grid_sup, levels, sups, trend, total)


# --- fractional Sobolev seminorm -------------------------------------------------------

@dataclass
class SobolevTrendReport:
    s: float
    schedule: list
    values: list
    trend: str  # "diverging" | "converging" | "inconclusive"
    cell: float = 0.0

    def increments(self) -> list:
        v = self.values
        return [v[k + 1] - v[k] for k in range(len(v) - 1)]

    def to_dict(self) -> dict:
        return {"s": self.s, "trend": self.trend, "cell": self.cell,
                "rows": [{"Omega": o, "h": h, "value": v} for (o, h), v in zip(self.schedule, self.values)]}

    def to_csv(self) -> str:
        return _csv(["Omega", "h", "value"], [(float(o), float(h), float(v))
                                             for (o, h), v in zip(self.schedule, self.values)])


def classify_values(values, grow: float = 0.75, settle: float = 0.05) -> str:
    """diverging if increments do not shrink (each ratio >= ``grow``); converging if the
    last relative change is at most ``settle``."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return "inconclusive"
    inc = np.diff(v)
    if len(inc) >= 2 and np.all(inc > 0):
        if np.all(inc[1:] / inc[:-1] >= grow):
            return "diverging"
    last = v[-1]
    if last == 0 or abs(v[-1] - v[-2]) <= settle * abs(last):
        return "converging"
    return "inconclusive"


def _dyadic_cell(h_min: float, oversample: int) -> float:
    return 2.0 ** math.floor(math.log2(h_min / oversample))


def _lag_sums(f: np.ndarray) -> np.ndarray:
    """S_k = sum_i |f_i - f_{i+k}|^2 for k = 0..N-1."""
    n = len(f)
    p = np.abs(f) ** 2
    csum = np.concatenate([[0.0], np.cumsum(p)])
    k = np.arange(n)
    head = csum[n - k]  # sum_{i < n-k} |f_i|^2
    tail = csum[n] - csum[k]  # sum_{i >= k} |f_i|^2
    size = 1 << int(math.ceil(math.log2(2 * n)))
    F = np.fft.fft(f, size)
    corr = np.fft.ifft(F * np.conj(F))[:n]  # sum_i f_{i+k} conj(f_i)
    return np.maximum(head + tail - 2.0 * corr.real, 0.0)


def gagliardo_seminorm(f: Callable, s: float, omega: float, hs, oversample: int = 8) -> tuple[list, float]:
    """Truncated seminorms for a list of cut-offs ``hs`` at a common radius ``omega``.

    Midpoint cells of dyadic width delta <= min(hs)/oversample tile [-omega, omega]; the
    double integral over |u - v| >= h is sum_k K(k delta) S_k delta^2 over lags k delta >= h.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    hs = list(hs)
    delta = _dyadic_cell(min(hs), oversample)
    n = int(math.ceil(2 * omega / delta))
    u = -omega + (np.arange(n) + 0.5) * delta
    vals = np.asarray(f(u), dtype=complex)
    S = _lag_sums(vals)
    k = np.arange(1, n)
    terms = 2.0 * S[1:] * (k * delta) ** (-1.0 - 2.0 * s) * delta ** 2
    tail = np.cumsum(terms[::-1])[::-1]  # tail[k-1] = sum over lags >= k
    out = []
    for h in hs:
        k0 = max(1, int(math.ceil(h / delta - 1e-9)))
        out.append(float(tail[k0 - 1]) if k0 <= len(tail) else 0.0)
    return out, delta


def _as_callable(f) -> Callable:
    if isinstance(f, FourierGenerator):
        if f.dim != 1:
            raise DimensionMismatch("Sobolev trends are computed for 1-D factors")
        return lambda u: f.expr.evaluate(u)
    return f


def gagliardo_trend(f: Union[FourierGenerator, Callable], s: float = 0.5, schedule=None,
                    oversample: int = 8) -> SobolevTrendReport:
    """Truncated Gagliardo seminorms over a schedule of (Omega, h) pairs and their trend.

    ``f`` is a 1-D generator or any vectorised callable.  The default schedule fixes
    Omega = 8 and halves h from 1/64 to 1/512.
    """
    fn = _as_callable(f)
    if schedule is None:
        schedule = [(DEFAULT_OMEGA, h) for h in DEFAULT_H_SCHEDULE]
    schedule = [(float(o), float(h)) for o, h in schedule]
    h_min = min(h for _, h in schedule)
    values = []
    cell = _dyadic_cell(h_min, oversample)
    by_omega: dict = {}
    for o, h in schedule:
        by_omega.setdefault(o, []).append(h)
    cache = {}
    for o, hs in by_omega.items():
        vs, _ = gagliardo_seminorm(fn, s, o, [h_min] + hs, oversample)
        cache.update({(o, h): v for h, v in zip(hs, vs[1:])})
    values = [cache[(o, h)] for o, h in schedule]
    return SobolevTrendReport(float(s), schedule, values, classify_values(values), cell)


# --- trace continuity --------------------------------------------------------------

@dataclass
class Jump:
    left: float
    right: float
    size: float

    def to_dict(self):
        return {"left": self.left, "right": self.right, "size": self.size}


def trace_continuity_scan(phi: GeneratorSet, gamma: Group, grid=None, s: Optional[float] = None) -> list[Jump]:
    """Adjacent samples where Tr A(w) changes by more than 0.5/s.

    ``s`` defaults to the frame constant measured on the Gramian.
    """
    if phi.dim != 1:
        raise DimensionMismatch("trace scans run on 1-D generator sets")
    if s is None:
        s = frame_report(phi, grid).s
    thr = 0.5 / s if s and math.isfinite(s) else 0.0
    lo, hi = scan_window(phi, gamma)
    w = as_grid(grid).box_points(lo, hi)
    batch = a_fibers(phi, gamma, w)
    tr = np.real(np.einsum("nii->n", batch.entries))
    d = np.abs(np.diff(tr))
    sel = np.flatnonzero(d > thr)
    return [Jump(float(w[k, 0]), float(w[k + 1, 0]), float(d[k])) for k in sel]


# --- local fiber mass --------------------------------------------------------------

def local_fiber_mass(f: FourierGenerator, omega0, delta: float, lattice: Optional[Lattice] = None,
                     n: int = 64) -> float:
    """Average of the fiber sum sum_k |f(w + k)|^2 over the ball B(omega0, delta).

    Midpoint rule on an n^d cell grid over the enclosing cube; cells whose centres lie in
    the ball are averaged.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    d = f.dim
    lattice = lattice or Lattice.integer(d)
    c = np.atleast_1d(np.asarray(omega0, dtype=float))
    if len(c) != d:
        raise DimensionMismatch("omega0 has the wrong dimension")
    u = -delta + (np.arange(n) + 0.5) * (2 * delta / n)
    mesh = np.meshgrid(*([u] * d), indexing="ij")
    off = np.stack([m.ravel() for m in mesh], axis=1)
    off = off[np.sum(off ** 2, axis=1) <= delta ** 2]
    batch = gram_fibers(GeneratorSet((f,), lattice), c + off)
    return float(np.real(batch.entries[:, 0, 0]).mean())


# --- per-level Sobolev energy of series generators ------------------------------------

@dataclass
class LevelEnergyReport:
    s: float
    levels: list
    energies: list
    trend: str

    def to_dict(self) -> dict:
        return {"s": self.s, "trend": self.trend,
                "levels": [{"level": int(j), "energy": float(e)} for j, e in zip(self.levels, self.energies)]}

    def to_csv(self) -> str:
        return _csv(["level", "energy"], [(int(j), float(e)) for j, e in zip(self.levels, self.energies)])


def level_energy_profile(gen: FourierGenerator, s: float, cells: int = 512, oversample: int = 8) -> LevelEnergyReport:
    """Squared seminorm carried by each level of a series generator.

    Copies inside one level are identical, so the level energy is the number of
    copies times the seminorm of one copy, measured on a window three copy-widths
    wide with the cut-off scaled to the copy width.  Interactions between distinct
    copies are not included.
    """
    blocks = gen.expr.blocks()
    if blocks is None:
        raise ValueError("level profiles need a series generator")
    levels, energies = [], []
    for j, iv in blocks:
        if j < 1 or not len(iv):
            continue
        a, b = iv[len(iv) // 2]
        width = b - a
        centre = 0.5 * (a + b)
        h = width / cells
        vals, _ = gagliardo_seminorm(lambda u: gen.expr.evaluate(u + centre), s, 1.5 * width, [h], oversample)
        levels.append(j)
        energies.append(len(iv) * vals[0])
    return LevelEnergyReport(float(s), levels, energies, classify_blocks(energies))
