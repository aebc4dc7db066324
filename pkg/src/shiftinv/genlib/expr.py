"""Immutable expression trees for Fourier-domain generators.

Every node evaluates vectorised on an ``(N, dim)`` array of frequencies and
reports a per-axis support descriptor: a sorted union of closed intervals
outside of which the (truncated) expression is exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from ..exceptions import DimensionMismatch

INF = math.inf


# --- the transition function ---------------------------------------------------

def _sigma(x):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def smoothstep(x):
    """C-infinity step s(x): 0 for x <= 0, 1 for x >= 1, with s(1-x) = 1 - s(x)."""
    x = np.asarray(x, dtype=float)
    a, b = _sigma(x), _sigma(1.0 - x)
    return a / (a + b)


def eval_g(x):
    """Smooth transition g with g = 0 on (-inf, 0], g = 1 on [1, inf) and g(x)^2 + g(1-x)^2 = 1."""
    out = np.sin(0.5 * np.pi * smoothstep(x))
    return out if np.ndim(x) else float(out)


def eval_g0(x):
    x = np.asarray(x, dtype=float)
    return eval_g(x + 1.0) * eval_g(1.0 - x)


def eval_g1(x):
    x = np.asarray(x, dtype=float)
    return eval_g(x + 1.0) * eval_g(1.0 - 2.0 * x)


def gamma_j(j: int) -> int:
    """gamma_j = 1 + 4 + ... + 4^(j-1)."""
    return (4 ** j - 1) // 3


def hj_interval(j: int) -> tuple[Fraction, Fraction]:
    if j == 0:
        return Fraction(-1, 4), Fraction(1, 4)
    return Fraction(1, 2) - Fraction(1, 2 ** j), Fraction(1, 2) - Fraction(1, 2 ** (j + 2))


def eval_hj(j: int, w):
    w = np.asarray(w, dtype=float)
    if j == 0:
        return eval_g0(4.0 * w)
    return eval_g1(2.0 ** (j + 1) * w - 2.0 ** j + 1.0)


# --- interval helpers ----------------------------------------------------------

def _iv(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return arr


def merge_intervals(iv: np.ndarray) -> np.ndarray:
    """Sort and merge closed intervals; touching intervals are merged."""
    iv = _iv(iv)
    if len(iv) == 0:
        return iv
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    ends = np.maximum.accumulate(iv[:, 1])
    new = np.empty(len(iv), dtype=bool)
    new[0] = True
    new[1:] = iv[1:, 0] > ends[:-1]
    starts_idx = np.flatnonzero(new)
    stops_idx = np.append(starts_idx[1:] - 1, len(iv) - 1)
    return np.column_stack([iv[starts_idx, 0], ends[stops_idx]])


def intersect_intervals(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = merge_intervals(a), merge_intervals(b)
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo, hi = max(a[i, 0], b[j, 0]), min(a[i, 1], b[j, 1])
        if lo <= hi:
            out.append((lo, hi))
        if a[i, 1] < b[j, 1]:
            i += 1
        else:
            j += 1
    return _iv(out)


def interiors_disjoint(a: np.ndarray, b: np.ndarray) -> bool:
    """True when no interval of ``a`` overlaps one of ``b`` in a set of positive length.

    Only comparisons are used, so the answer is exact for the stored endpoints.
    """
    a, b = merge_intervals(a), merge_intervals(b)
    if len(a) == 0 or len(b) == 0:
        return True
    k = np.searchsorted(b[:, 0], a[:, 1], side="left") - 1
    ok = k >= 0
    return not np.any(b[k[ok], 1] > a[ok, 0])


def _affine(iv: np.ndarray, scale: float, shift: float) -> np.ndarray:
    """Image of intervals under t -> scale * t + shift."""
    iv = _iv(iv)
    if len(iv) == 0:
        return iv
    with np.errstate(invalid="ignore"):
        lo, hi = iv[:, 0] * scale + shift, iv[:, 1] * scale + shift
    out = np.column_stack([np.minimum(lo, hi), np.maximum(lo, hi)])
    return merge_intervals(out)


def _periodic_copies(t, hfun, a, b, start, spacing, count):
    """Sum over l in [0, count) of h(t - spacing*(start + l)); h vanishes outside [a, b].

    Requires b - a < spacing, so at most one copy can cover each point.
    """
    out = np.zeros_like(t)
    lo = spacing * start + a
    hi = spacing * (start + count - 1) + b
    sel = np.flatnonzero((t >= lo) & (t <= hi))
    if len(sel) == 0:
        return out
    y = t[sel] - spacing * start
    l = np.floor((y - a) / spacing)
    ok = (l >= 0) & (l < count)
    out[sel[ok]] = hfun(y[ok] - spacing * l[ok])
    return out


def _scalar(x):
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _scalar_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


# --- nodes ---------------------------------------------------------------------

class Node:
    """Base class. Subclasses are frozen dataclasses."""

    kind = "Node"

    @property
    def dim(self) -> int:
        return 1

    @property
    def continuous(self) -> bool:
        return True

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise DimensionMismatch(f"expected points of dimension {self.dim}, got shape {x.shape}")
        return self._eval(x)

    def _eval(self, x):
        raise NotImplementedError

    def support(self) -> list[np.ndarray]:
        """Per-axis unions of closed intervals containing the support."""
        raise NotImplementedError

    def breakpoints(self) -> list[np.ndarray]:
        """Per-axis points where the expression may fail to be smooth."""
        raise NotImplementedError

    def sup_bound(self) -> float:
        return 1.0

    def tail_sup(self) -> float:
        """Sup-norm bound on the part of the expression discarded by truncation."""
        return 0.0

    def fiber_tail_sq(self, t, spacing: float) -> np.ndarray:
        """Bound on sum_k |tail(t + spacing k)|^2 for 1-D nodes; zero without a tail."""
        return np.zeros(np.shape(t))

    def blocks(self) -> Optional[list[tuple[int, np.ndarray]]]:
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


class _Leaf1D(Node):
    def _eval(self, x):
        return self._f(x[:, 0])


@dataclass(frozen=True)
class BumpG(_Leaf1D):
    kind = "BumpG"

    def _f(self, t):
        return eval_g(t)

    def support(self):
        return [_iv([(0.0, INF)])]

    def breakpoints(self):
        return [np.array([0.0, 1.0])]

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class G0(_Leaf1D):
    kind = "G0"

    def _f(self, t):
        return eval_g0(t)

    def support(self):
        return [_iv([(-1.0, 1.0)])]

    def breakpoints(self):
        return [np.array([-1.0, 1.0])]

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class G1(_Leaf1D):
    kind = "G1"

    def _f(self, t):
        return eval_g1(t)

    def support(self):
        return [_iv([(-1.0, 0.5)])]

    def breakpoints(self):
        return [np.array([-1.0, 0.5])]

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Hj(_Leaf1D):
    """h_0(w) = g0(4w); h_j(w) = g1(2^(j+1) w - 2^j + 1) for j >= 1."""

    j: int
    kind = "Hj"

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("level j must be >= 0")

    def _f(self, t):
        return eval_hj(self.j, t)

    def support(self):
        a, b = hj_interval(self.j)
        return [_iv([(float(a), float(b))])]

    def breakpoints(self):
        return [self.support()[0].ravel()]

    def to_dict(self):
        return {"kind": self.kind, "j": self.j}


@dataclass(frozen=True)
class Indicator(_Leaf1D):
    """Indicator of the half-open interval [a, b)."""

    a: Fraction
    b: Fraction
    kind = "Indicator"

    def __post_init__(self):
        object.__setattr__(self, "a", _scalar(self.a))
        object.__setattr__(self, "b", _scalar(self.b))
        if not self.a < self.b:
            raise ValueError("Indicator needs a < b")

    @property
    def continuous(self):
        return False

    def _f(self, t):
        return ((t >= float(self.a)) & (t < float(self.b))).astype(float)

    def support(self):
        return [_iv([(float(self.a), float(self.b))])]

    def breakpoints(self):
        return [np.array([float(self.a), float(self.b)])]

    def to_dict(self):
        return {"kind": self.kind, "a": _scalar_str(self.a), "b": _scalar_str(self.b)}


@dataclass(frozen=True)
class PiecewiseLinear(_Leaf1D):
    """Linear interpolation through (knots, values) on [knots[0], knots[-1]], zero outside."""

    knots: tuple
    values: tuple
    kind = "PiecewiseLinear"

    def __post_init__(self):
        object.__setattr__(self, "knots", tuple(_scalar(k) for k in self.knots))
        object.__setattr__(self, "values", tuple(_scalar(v) for v in self.values))
        if len(self.knots) < 2 or len(self.knots) != len(self.values):
            raise ValueError("need at least two knots and matching values")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")

    @property
    def continuous(self):
        return self.values[0] == 0 and self.values[-1] == 0

    def _f(self, t):
        k = np.array([float(v) for v in self.knots])
        v = np.array([float(v) for v in self.values])
        inside = (t >= k[0]) & (t <= k[-1])
        return np.where(inside, np.interp(t, k, v), 0.0)

    def support(self):
        return [_iv([(float(self.knots[0]), float(self.knots[-1]))])]

    def breakpoints(self):
        return [np.array([float(k) for k in self.knots])]

    def sup_bound(self):
        return max(abs(float(v)) for v in self.values)

    def to_dict(self):
        return {"kind": self.kind, "knots": [_scalar_str(k) for k in self.knots],
                "values": [_scalar_str(v) for v in self.values]}


@dataclass(frozen=True)
class Shift(Node):
    """x -> child(x - by)."""

    child: Node
    by: tuple
    kind = "Shift"

    def __post_init__(self):
        by = self.by if isinstance(self.by, (tuple, list)) else (self.by,)
        object.__setattr__(self, "by", tuple(_scalar(v) for v in by))
        if len(self.by) != self.child.dim:
            raise DimensionMismatch("shift vector does not match child dimension")

    @property
    def dim(self):
        return self.child.dim

    @property
    def continuous(self):
        return self.child.continuous

    def _v(self):
        return np.array([float(v) for v in self.by])

    def _eval(self, x):
        return self.child._eval(x - self._v())

    def support(self):
        return [_affine(iv, 1.0, float(v)) for iv, v in zip(self.child.support(), self.by)]

    def breakpoints(self):
        return [b + float(v) for b, v in zip(self.child.breakpoints(), self.by)]

    def sup_bound(self):
        return self.child.sup_bound()

    def tail_sup(self):
        return self.child.tail_sup()

    def fiber_tail_sq(self, t, spacing):
        return self.child.fiber_tail_sq(np.asarray(t) - float(self.by[0]), spacing)

    def blocks(self):
        b = self.child.blocks()
        if b is None or self.dim != 1:
            return None
        return [(lvl, _affine(iv, 1.0, float(self.by[0]))) for lvl, iv in b]

    def to_dict(self):
        return {"kind": self.kind, "by": [_scalar_str(v) for v in self.by],
                "child": self.child.to_dict()}


@dataclass(frozen=True)
class Reflect(Node):
    """x -> child(-x)."""

    child: Node
    kind = "Reflect"

    @property
    def dim(self):
        return self.child.dim

    @property
    def continuous(self):
        return self.child.continuous

    def _eval(self, x):
        return self.child._eval(-x)

    def support(self):
        return [_affine(iv, -1.0, 0.0) for iv in self.child.support()]

    def breakpoints(self):
        return [-b for b in self.child.breakpoints()]

    def sup_bound(self):
        return self.child.sup_bound()

    def tail_sup(self):
        return self.child.tail_sup()

    def fiber_tail_sq(self, t, spacing):
        return self.child.fiber_tail_sq(-np.asarray(t), spacing)

    def blocks(self):
        b = self.child.blocks()
        if b is None:
            return None
        return [(lvl, _affine(iv, -1.0, 0.0)) for lvl, iv in b]

    def to_dict(self):
        return {"kind": self.kind, "child": self.child.to_dict()}


@dataclass(frozen=True)
class Dilate(Node):
    """x -> child(a * x) for a nonzero scalar a."""

    child: Node
    a: Fraction
    kind = "Dilate"

    def __post_init__(self):
        object.__setattr__(self, "a", _scalar(self.a))
        if self.a == 0:
            raise ValueError("dilation factor must be nonzero")

    @property
    def dim(self):
        return self.child.dim

    @property
    def continuous(self):
        return self.child.continuous

    def _eval(self, x):
        return self.child._eval(float(self.a) * x)

    def support(self):
        return [_affine(iv, 1.0 / float(self.a), 0.0) for iv in self.child.support()]

    def breakpoints(self):
        return [b / float(self.a) for b in self.child.breakpoints()]

    def sup_bound(self):
        return self.child.sup_bound()

    def tail_sup(self):
        return self.child.tail_sup()

    def fiber_tail_sq(self, t, spacing):
        a = float(self.a)
        return self.child.fiber_tail_sq(a * np.asarray(t), abs(a) * spacing)

    def blocks(self):
        b = self.child.blocks()
        if b is None:
            return None
        return [(lvl, _affine(iv, 1.0 / float(self.a), 0.0)) for lvl, iv in b]

    def to_dict(self):
        return {"kind": self.kind, "a": _scalar_str(self.a), "child": self.child.to_dict()}


@dataclass(frozen=True)
class Scale(Node):
    """Multiplication by a complex constant."""

    child: Node
    c: complex
    kind = "Scale"

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    @property
    def dim(self):
        return self.child.dim

    @property
    def continuous(self):
        return self.child.continuous

    def _eval(self, x):
        v = self.child._eval(x)
        return v * (self.c.real if self.c.imag == 0 else self.c)

    def support(self):
        if self.c == 0:
            return [_iv([]) for _ in range(self.dim)]
        return self.child.support()

    def breakpoints(self):
        return self.child.breakpoints()

    def sup_bound(self):
        return abs(self.c) * self.child.sup_bound()

    def tail_sup(self):
        return abs(self.c) * self.child.tail_sup()

    def fiber_tail_sq(self, t, spacing):
        return abs(self.c) ** 2 * self.child.fiber_tail_sq(t, spacing)

    def blocks(self):
        return self.child.blocks()

    def to_dict(self):
        return {"kind": self.kind, "c": {"re": repr(self.c.real), "im": repr(self.c.imag)},
                "child": self.child.to_dict()}


@dataclass(frozen=True)
class Sum(Node):
    """Sum of children; an empty sum is the zero function (``dim`` then required)."""

    children: tuple
    ndim: int = 1
    kind = "Sum"

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.children:
            dims = {c.dim for c in self.children}
            if len(dims) != 1:
                raise DimensionMismatch("Sum children must share a dimension")
            object.__setattr__(self, "ndim", dims.pop())

    @property
    def dim(self):
        return self.ndim

    @property
    def continuous(self):
        return all(c.continuous for c in self.children)

    def _eval(self, x):
        out = np.zeros(len(x))
        for c in self.children:
            out = out + c._eval(x)
        return out

    def support(self):
        if not self.children:
            return [_iv([]) for _ in range(self.dim)]
        sups = [c.support() for c in self.children]
        return [merge_intervals(np.concatenate([s[k] for s in sups])) for k in range(self.dim)]

    def breakpoints(self):
        if not self.children:
            return [np.array([]) for _ in range(self.dim)]
        bps = [c.breakpoints() for c in self.children]
        return [np.unique(np.concatenate([b[k] for b in bps])) for k in range(self.dim)]

    def sup_bound(self):
        return sum(c.sup_bound() for c in self.children)

    def tail_sup(self):
        return sum(c.tail_sup() for c in self.children)

    def fiber_tail_sq(self, t, spacing):
        tot = np.zeros(np.shape(t))
        for c in self.children:
            tot = tot + np.sqrt(c.fiber_tail_sq(t, spacing))
        return tot ** 2

    def to_dict(self):
        d = {"kind": self.kind, "children": [c.to_dict() for c in self.children]}
        if not self.children:
            d["dim"] = self.ndim
        return d


@dataclass(frozen=True)
class Product(Node):
    children: tuple
    kind = "Product"

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Product needs at least one child")
        if len({c.dim for c in self.children}) != 1:
            raise DimensionMismatch("Product children must share a dimension")

    @property
    def dim(self):
        return self.children[0].dim

    @property
    def continuous(self):
        # a jump of one factor is harmless where the remaining factors vanish
        jumpy = [c for c in self.children if not c.continuous]
        if not jumpy:
            return True
        if self.dim != 1:
            return False
        for c in jumpy:
            rest = [o for o in self.children if o is not c]
            if not rest or not all(o.continuous for o in rest):
                return False
            bp = c.breakpoints()[0]
            if not len(bp):
                continue
            vals = np.ones(len(bp), dtype=complex)
            for o in rest:
                vals = vals * o.evaluate(bp)
            if np.max(np.abs(vals)) > 1e-12:
                return False
        return True

    def _eval(self, x):
        out = self.children[0]._eval(x)
        for c in self.children[1:]:
            out = out * c._eval(x)
        return out

    def support(self):
        sups = [c.support() for c in self.children]
        out = []
        for k in range(self.dim):
            cur = sups[0][k]
            for s in sups[1:]:
                cur = intersect_intervals(cur, s[k])
            out.append(cur)
        return out

    def breakpoints(self):
        bps = [c.breakpoints() for c in self.children]
        return [np.unique(np.concatenate([b[k] for b in bps])) for k in range(self.dim)]

    def sup_bound(self):
        return math.prod(c.sup_bound() for c in self.children)

    def tail_sup(self):
        # prod(f_i + t_i) - prod(f_i), expanded with sup bounds
        full = math.prod(c.sup_bound() + c.tail_sup() for c in self.children)
        return full - self.sup_bound()

    def fiber_tail_sq(self, t, spacing):
        tailed = [c for c in self.children if c.tail_sup() > 0]
        if not tailed:
            return np.zeros(np.shape(t))
        if len(tailed) > 1:
            return np.full(np.shape(t), INF)
        others = math.prod(c.sup_bound() for c in self.children if c is not tailed[0])
        return others ** 2 * tailed[0].fiber_tail_sq(t, spacing)

    def to_dict(self):
        return {"kind": self.kind, "children": [c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class Tensor(Node):
    """Tensor product: the children act on consecutive blocks of coordinates."""

    children: tuple
    kind = "Tensor"

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Tensor needs at least one factor")

    @property
    def dim(self):
        return sum(c.dim for c in self.children)

    @property
    def continuous(self):
        return all(c.continuous for c in self.children)

    def _eval(self, x):
        out = None
        k = 0
        for c in self.children:
            v = c._eval(x[:, k:k + c.dim])
            out = v if out is None else out * v
            k += c.dim
        return out

    def support(self):
        return [iv for c in self.children for iv in c.support()]

    def breakpoints(self):
        return [b for c in self.children for b in c.breakpoints()]

    def sup_bound(self):
        return math.prod(c.sup_bound() for c in self.children)

    def tail_sup(self):
        full = math.prod(c.sup_bound() + c.tail_sup() for c in self.children)
        return full - self.sup_bound()

    def to_dict(self):
        return {"kind": self.kind, "children": [c.to_dict() for c in self.children]}


# --- the series generators ----------------------------------------------------------

def _tail_window_sq(t, spacing, n1, first_missing):
    """Fiber-norm bound of the discarded levels >= first_missing of a series.

    The discarded pieces sit in [1/2 - 2^-j*, 1/2) + n1*Z and its mirror.  When
    the fiber spacing divides n1 every fiber meets each level's copies in the
    same relative position, and the partition-of-unity structure bounds the
    squared fiber norm of the whole tail by 1 per window.  Otherwise no finite
    bound is certified.
    """
    t = np.asarray(t, dtype=float)
    q = n1 / spacing
    if abs(q - round(q)) > 1e-12:
        return np.full(t.shape, INF)
    a = 0.5 - 2.0 ** (-first_missing)
    width = 0.5 - a
    pos = np.mod(t - a, spacing) <= width
    neg = np.mod(-t - a, spacing) <= width
    return pos.astype(float) + neg.astype(float)


@dataclass(frozen=True)
class Lemma61Series(_Leaf1D):
    """Even generator h_0(w) + sum_j 2^-j sum_l [h_j(w - n1(gamma_j + l)) + h_j(-w - n1(gamma_j + l))].

    Both series are truncated after level ``J``.
    """

    n1: int
    J: int = 8
    kind = "Lemma61Series"

    def __post_init__(self):
        if self.n1 < 1 or self.J < 1:
            raise ValueError("need n1 >= 1 and J >= 1")

    def _half(self, t):
        out = np.zeros_like(t)
        for j in range(1, self.J + 1):
            a, b = (float(v) for v in hj_interval(j))
            out += 2.0 ** (-j) * _periodic_copies(
                t, lambda y, j=j: eval_hj(j, y), a, b, gamma_j(j), float(self.n1), 4 ** j)
        return out

    def _f(self, t):
        # the positive half vanishes on t <= 0, so one evaluation at |t| covers both halves
        return eval_hj(0, t) + self._half(np.abs(t))

    def _level_intervals(self, j):
        a, b = hj_interval(j)
        if j == 0:
            return _iv([(float(a), float(b))])
        shifts = self.n1 * (gamma_j(j) + np.arange(4 ** j, dtype=float))
        pos = np.column_stack([float(a) + shifts, float(b) + shifts])
        return merge_intervals(np.concatenate([pos, -pos[:, ::-1]]))

    def blocks(self):
        return [(j, self._level_intervals(j)) for j in range(self.J + 1)]

    def support(self):
        return [merge_intervals(np.concatenate([iv for _, iv in self.blocks()]))]

    def breakpoints(self):
        return [np.unique(self.support()[0].ravel())]

    def tail_sup(self):
        return 2.0 ** (-self.J)

    def fiber_tail_sq(self, t, spacing):
        return _tail_window_sq(t, spacing, self.n1, self.J + 1)

    def to_dict(self):
        return {"kind": self.kind, "n1": self.n1, "J": self.J}


@dataclass(frozen=True)
class Eq62Series(_Leaf1D):
    """The i-th (i >= 2) disjointly supported companion of the level series.

    With m = 2i - 2, on w >= 0 it is
    2^-m/sqrt(2) sum_{l<4^m} h_0(w - n1(gamma_m + l))
    + sum_{j>=1} 2^-(j+m) sum_{l<4^(j+m)} h_j(w - n1(gamma_{j+m} + l)),
    extended evenly.  Levels are kept while j + m <= J.
    """

    i: int
    n1: int
    J: int = 8
    kind = "Eq62Series"

    def __post_init__(self):
        if self.i < 2 or self.n1 < 1:
            raise ValueError("need i >= 2 and n1 >= 1")
        if self.J < 2 * self.i - 2:
            raise ValueError(f"truncation J={self.J} below the first level 2i-2={2 * self.i - 2}")

    @property
    def m(self):
        return 2 * self.i - 2

    def _pos(self, t):
        m, n1 = self.m, float(self.n1)
        a0, b0 = (float(v) for v in hj_interval(0))
        out = 2.0 ** (-m) / math.sqrt(2.0) * _periodic_copies(
            t, lambda y: eval_hj(0, y), a0, b0, gamma_j(m), n1, 4 ** m)
        for j in range(1, self.J - m + 1):
            a, b = (float(v) for v in hj_interval(j))
            out += 2.0 ** (-(j + m)) * _periodic_copies(
                t, lambda y, j=j: eval_hj(j, y), a, b, gamma_j(j + m), n1, 4 ** (j + m))
        return out

    def _f(self, t):
        return self._pos(np.abs(t))

    def blocks(self):
        m, n1 = self.m, self.n1
        out = []
        for j in range(0, self.J - m + 1):
            a, b = hj_interval(j)
            shifts = n1 * (gamma_j(j + m) + np.arange(4 ** (j + m), dtype=float))
            pos = np.column_stack([float(a) + shifts, float(b) + shifts])
            out.append((j + m, merge_intervals(np.concatenate([pos, -pos[:, ::-1]]))))
        return out

    def support(self):
        return [merge_intervals(np.concatenate([iv for _, iv in self.blocks()]))]

    def breakpoints(self):
        return [np.unique(self.support()[0].ravel())]

    def tail_sup(self):
        return 2.0 ** (-self.J)

    def fiber_tail_sq(self, t, spacing):
        return _tail_window_sq(t, spacing, self.n1, self.J - self.m + 1)

    def to_dict(self):
        return {"kind": self.kind, "i": self.i, "n1": self.n1, "J": self.J}


# --- (de)serialisation --------------------------------------------------------------

def node_from_dict(d: dict) -> Node:
    kind = d.get("kind")
    if kind == "BumpG":
        return BumpG()
    if kind == "G0":
        return G0()
    if kind == "G1":
        return G1()
    if kind == "Hj":
        return Hj(int(d["j"]))
    if kind == "Indicator":
        return Indicator(_scalar(d["a"]), _scalar(d["b"]))
    if kind == "PiecewiseLinear":
        return PiecewiseLinear(tuple(d["knots"]), tuple(d["values"]))
    if kind == "Shift":
        return Shift(node_from_dict(d["child"]), tuple(d["by"]))
    if kind == "Reflect":
        return Reflect(node_from_dict(d["child"]))
    if kind == "Dilate":
        return Dilate(node_from_dict(d["child"]), _scalar(d["a"]))
    if kind == "Scale":
        c = d["c"]
        if isinstance(c, dict):
            c = complex(float(c.get("re", 0)), float(c.get("im", 0)))
        return Scale(node_from_dict(d["child"]), complex(c))
    if kind == "Sum":
        kids = tuple(node_from_dict(c) for c in d["children"])
        return Sum(kids, int(d.get("dim", 1)))
    if kind == "Product":
        return Product(tuple(node_from_dict(c) for c in d["children"]))
    if kind == "Tensor":
        return Tensor(tuple(node_from_dict(c) for c in d["children"]))
    if kind == "Lemma61Series":
        return Lemma61Series(int(d["n1"]), int(d["J"]))
    if kind == "Eq62Series":
        return Eq62Series(int(d["i"]), int(d["n1"]), int(d["J"]))
    raise ValueError(f"unknown node kind {kind!r}")
