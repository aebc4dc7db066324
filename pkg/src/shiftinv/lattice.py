"""Lattices in R^d, the full space, duality, indices and coset representatives.

All lattice arithmetic is exact: basis entries are :class:`fractions.Fraction`.
A basis is stored as a d x d matrix (tuple of rows) whose *columns* generate
the lattice.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, NotLattice, NotSublattice

Matrix = tuple[tuple[Fraction, ...], ...]


# --- exact matrix helpers -------------------------------------------------

def _as_matrix(rows) -> Matrix:
    m = tuple(tuple(Fraction(x) for x in row) for row in rows)
    n = len(m)
    if n == 0 or any(len(r) != n for r in m):
        raise ValueError("basis must be a non-empty square matrix")
    return m


def _identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _matmul(a, b) -> list[list[Fraction]]:
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0)) for j in range(m)]
            for i in range(n)]


def _transpose(a):
    return [list(col) for col in zip(*a)]


def _matvec(a, v):
    return [sum((a[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(a))]


def _det(a) -> Fraction:
    m = [list(r) for r in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def _inverse(a) -> list[list[Fraction]]:
    n = len(a)
    m = [list(r) + e for r, e in zip(a, _identity(n))]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            raise ValueError("singular matrix")
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def _is_integral(a) -> bool:
    return all(x.denominator == 1 for row in a for x in row)


def smith_normal_form(m: Sequence[Sequence[int]]):
    """Return ``(U, D, V)`` with ``U @ m @ V == D`` for a nonsingular integer matrix.

    ``U`` and ``V`` are unimodular; ``D`` is diagonal with positive entries
    d_1 | d_2 | ... | d_n.
    """
    n = len(m)
    a = [[int(x) for x in row] for row in m]
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, f):
        for row in a:
            row[dst] += f * row[src]
        for row in v:
            row[dst] += f * row[src]

    for t in range(n):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, n) for j in range(t, n) if a[i][j]]
            if not nz:
                raise ValueError("singular matrix")
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = a[t][t]
            done = True
            for i in range(t + 1, n):
                q = a[i][t] // p
                if q:
                    add_row(i, t, -q)
                if a[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    add_col(j, t, -q)
                if a[t][j]:
                    done = False
            if not done:
                continue
            # divisibility: fold a non-divisible entry into row t and retry
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return u, a, v


# --- groups ----------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice generated by the columns of ``basis``."""

    basis: Matrix

    def __post_init__(self):
        object.__setattr__(self, "basis", _as_matrix(self.basis))
        if _det(self.basis) == 0:
            raise ValueError("lattice basis must be invertible")

    @classmethod
    def diagonal(cls, entries) -> "Lattice":
        entries = [Fraction(e) for e in entries]
        n = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else Fraction(0) for j in range(n))
                         for i in range(n)))

    @classmethod
    def integer(cls, d: int = 1) -> "Lattice":
        return cls.diagonal([1] * d)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def det(self) -> Fraction:
        return abs(_det(self.basis))

    @property
    def is_diagonal(self) -> bool:
        return all(self.basis[i][j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j)

    def spacings(self) -> np.ndarray:
        """Per-axis spacings of a diagonal lattice."""
        if not self.is_diagonal:
            raise ValueError("lattice is not axis-aligned")
        return np.array([float(abs(self.basis[i][i])) for i in range(self.dim)])

    def basis_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.basis])

    def coordinates(self, vec) -> list[Fraction]:
        return _matvec(_inverse(self.basis), [Fraction(x) for x in vec])

    def __contains__(self, vec) -> bool:
        if len(vec) != self.dim:
            raise DimensionMismatch(f"expected a {self.dim}-vector")
        return all(c.denominator == 1 for c in self.coordinates(vec))

    def point(self, coeffs) -> tuple[Fraction, ...]:
        return tuple(_matvec(self.basis, [Fraction(int(c)) for c in coeffs]))

    def same_points(self, other: "Lattice") -> bool:
        if not isinstance(other, Lattice) or other.dim != self.dim:
            return False
        return _is_integral(_matmul(_inverse(self.basis), other.basis)) and \
            _is_integral(_matmul(_inverse(other.basis), self.basis))

    def is_sublattice_of(self, other: Lattice) -> bool:
        return _is_integral(_matmul(_inverse(other.basis), self.basis))

    def __str__(self):
        rows = ",".join("[" + ",".join(str(x) for x in row) + "]" for row in self.basis)
        return f"[{rows}]"


@dataclass(frozen=True)
class FullSpace:
    """The whole of R^d, admitted as the larger group Gamma."""

    d: int = 1

    @property
    def dim(self) -> int:
        return self.d

    def __str__(self):
        return "R" if self.d == 1 else f"R^{self.d}"


@dataclass(frozen=True)
class ZeroGroup:
    """The one-element group {0}: the dual of the full space.

    Sums over it degenerate to the single term at the origin.
    """

    d: int = 1

    @property
    def dim(self) -> int:
        return self.d


Group = Union[Lattice, FullSpace, ZeroGroup]


def dual_group(group: Group) -> Group:
    """Return the dual group; for a lattice basis ``B`` that is ``B^{-T}``."""
    if isinstance(group, FullSpace):
        return ZeroGroup(group.d)
    if isinstance(group, ZeroGroup):
        return FullSpace(group.d)
    return Lattice(tuple(map(tuple, _transpose(_inverse(group.basis)))))


def _require_lattice(*groups):
    for g in groups:
        if not isinstance(g, Lattice):
            raise NotLattice(f"{g} is not a lattice")


def index(sub: Group, sup: Group) -> int:
    """Index [sup : sub] of a sublattice ``sub`` inside ``sup``."""
    _require_lattice(sub, sup)
    if sub.dim != sup.dim:
        raise DimensionMismatch("lattices of different dimension")
    change = _matmul(_inverse(sup.basis), sub.basis)
    if not _is_integral(change):
        raise NotSublattice(f"{sub} is not contained in {sup}")
    q = sub.det / sup.det
    assert q.denominator == 1
    return int(q)


@dataclass(frozen=True)
class FundamentalDomain:
    """Half-open parallelepiped ``offset + E [0,1)^d`` tiling R^d under a lattice."""

    offset: tuple[float, ...]
    edges: np.ndarray  # columns are the spanning vectors

    @property
    def dim(self) -> int:
        return len(self.offset)

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.edges)))


def fundamental_domain(lattice: Lattice, offset=None) -> FundamentalDomain:
    _require_lattice(lattice)
    off = tuple(float(x) for x in (offset if offset is not None else [0.0] * lattice.dim))
    return FundamentalDomain(off, lattice.basis_array())


def reduce_to_domain(dom: FundamentalDomain, x) -> np.ndarray:
    """Representative of ``x`` modulo the lattice spanned by ``dom.edges``, inside ``dom``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.atleast_1d(x).reshape(-1, dom.dim) if not single else x.reshape(1, dom.dim)
    off = np.asarray(dom.offset)
    u = np.linalg.solve(dom.edges, (pts - off).T).T
    out = pts - np.floor(u) @ dom.edges.T
    # guard against u slightly below an integer after rounding
    u2 = np.linalg.solve(dom.edges, (out - off).T).T
    out = out - np.floor(u2) @ dom.edges.T
    return out[0] if single else out


@dataclass(frozen=True)
class CosetReps:
    reps: tuple[tuple[Fraction, ...], ...]
    sub: Lattice    # Gamma*
    super: Lattice  # Lambda*

    def __len__(self):
        return len(self.reps)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.reps])


def coset_reps(lam: Group, gamma: Group) -> CosetReps:
    """Representatives F of Lambda*/Gamma* for lattices Lambda < Gamma.

    Uses the Smith normal form of the integer matrix expressing a basis of
    Gamma* in a basis of Lambda*; representatives are reduced into the
    fundamental parallelepiped of Gamma* and sorted.
    """
    _require_lattice(lam, gamma)
    index(lam, gamma)  # raises NotSublattice
    lam_d, gam_d = dual_group(lam), dual_group(gamma)
    rel = _matmul(_inverse(lam_d.basis), gam_d.basis)
    assert _is_integral(rel)
    u, dmat, _ = smith_normal_form([[int(x) for x in row] for row in rel])
    n = len(rel)
    basis = _matmul(lam_d.basis, _inverse([[Fraction(x) for x in row] for row in u]))
    gam_inv = _inverse(gam_d.basis)
    reps = []
    for ks in itertools.product(*[range(dmat[i][i]) for i in range(n)]):
        x = _matvec(basis, [Fraction(k) for k in ks])
        c = _matvec(gam_inv, x)
        shift = _matvec(gam_d.basis, [Fraction(math.floor(ci)) for ci in c])
        reps.append(tuple(xi - si for xi, si in zip(x, shift)))
    return CosetReps(tuple(sorted(reps)), gam_d, lam_d)


# --- literal syntax ----------------------------------------------------------

_SCALED_Z = re.compile(r"^\s*(?:(?P<num>[-+0-9./]+)\s*\*?\s*)?Z(?:\^(?P<d>\d+))?\s*$")
_FULL = re.compile(r"^\s*R(?:\^(?P<d>\d+))?\s*$")


def parse_group(text, dim: Optional[int] = None, field: str = "lattice") -> Group:
    """Parse a lattice literal.

    Accepted forms: ``"Z"``, ``"Z^2"``, ``"1/2 Z"`` (or ``"3Z"``), ``"R"``, ``"R^2"``
    and rational matrices such as ``"[[1/2,0],[0,1]]"`` (a JSON-like list of rows
    is also accepted directly).  Scalar forms without an exponent take dimension
    ``dim`` when it is given.  Errors name ``field``.
    """
    try:
        g = _parse_group(text, dim)
    except ConfigError as exc:
        if field == "lattice":
            raise
        raise ConfigError(field, exc.message) from None
    if dim is not None and _group_dim(g) != dim:
        raise ConfigError(field, f"{format_group(g)} has dimension {_group_dim(g)}, expected {dim}")
    return g


def _group_dim(g) -> int:
    return g.dim


def _parse_group(text, dim) -> Group:
    if isinstance(text, (Lattice, FullSpace, ZeroGroup)):
        return text
    if isinstance(text, (list, tuple)):
        try:
            return Lattice(tuple(tuple(Fraction(str(x)) for x in row) for row in text))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise ConfigError("lattice", f"invalid basis matrix {text!r}: {exc}") from None
    if not isinstance(text, str):
        raise ConfigError("lattice", f"cannot parse {text!r}")
    m = _FULL.match(text)
    if m:
        return FullSpace(int(m.group("d") or dim or 1))
    m = _SCALED_Z.match(text)
    if m:
        d = int(m.group("d") or dim or 1)
        try:
            scale = Fraction(m.group("num")) if m.group("num") else Fraction(1)
        except (ValueError, ZeroDivisionError):
            raise ConfigError("lattice", f"invalid scale in {text!r}") from None
        if scale == 0:
            raise ConfigError("lattice", "scale must be nonzero")
        return Lattice.diagonal([scale] * d)
    s = text.strip()
    if s.startswith("["):
        rows = re.findall(r"\[([^\[\]]*)\]", s)
        return _parse_group([[x.strip() for x in r.split(",")] for r in rows], dim)
    raise ConfigError("lattice", f"cannot parse lattice literal {text!r}")


def format_group(g: Group) -> str:
    if isinstance(g, FullSpace):
        return str(g)
    if isinstance(g, ZeroGroup):
        return "0" if g.d == 1 else f"0^{g.d}"
    return str(g)
