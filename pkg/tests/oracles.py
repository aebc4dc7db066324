"""Independent reference computations used by the tests.

These deliberately avoid the package's enumeration and eigen-solver code paths.
"""

import itertools
import math

import numpy as np


def naive_gram(phi, omega, box=12):
    """Gramian by brute force over every dual lattice point with integer coordinates in [-box, box]^d."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    d = len(omega)
    B = np.array([[float(x) for x in row] for row in phi.lattice.basis])
    Bd = np.linalg.inv(B).T
    ms = np.array(list(itertools.product(range(-box, box + 1), repeat=d)), dtype=float)
    pts = omega[None, :] + ms @ Bd.T
    vals = np.stack([np.asarray(g.expr.evaluate(pts), dtype=complex) for g in phi.gens], axis=1)
    return vals.T @ np.conj(vals)


def hermitian_eigs_closed_form(m):
    """Descending eigenvalues of a Hermitian matrix of size <= 3 from its characteristic polynomial."""
    m = np.asarray(m, dtype=complex)
    r = m.shape[0]
    if r == 1:
        return np.array([m[0, 0].real])
    if r == 2:
        a, d = m[0, 0].real, m[1, 1].real
        b = abs(m[0, 1])
        mid, rad = 0.5 * (a + d), math.hypot(0.5 * (a - d), b)
        return np.array([mid + rad, mid - rad])
    if r != 3:
        raise ValueError("closed form only for r <= 3")
    # trigonometric solution of the depressed cubic
    q = np.trace(m).real / 3
    off = abs(m[0, 1]) ** 2 + abs(m[0, 2]) ** 2 + abs(m[1, 2]) ** 2
    p2 = sum((m[i, i].real - q) ** 2 for i in range(3)) + 2 * off
    p = math.sqrt(p2 / 6)
    if p == 0:
        return np.array([q, q, q])
    b = (m - q * np.eye(3)) / p
    half_det = np.linalg.det(b).real / 2
    phi = math.acos(max(-1.0, min(1.0, half_det))) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    e2 = 3 * q - e1 - e3
    return np.sort(np.array([e1, e2, e3]))[::-1]


def hat_periodization(w):
    """sum over k of max(0, 1 - |w + k|)^2; equals (1 - t)^2 + t^2 with t = w mod 1."""
    t = np.mod(w, 1.0)
    return (1 - t) ** 2 + t ** 2


def random_psd_with_kernel(rng, r, rank, kernel_basis=None):
    """Random PSD matrix of the given rank whose kernel contains ``kernel_basis`` columns."""
    if kernel_basis is None:
        x = rng.normal(size=(r, rank)) + 1j * rng.normal(size=(r, rank))
    else:
        q, _ = np.linalg.qr(kernel_basis, mode="complete")
        comp = q[:, kernel_basis.shape[1]:]
        x = comp @ (rng.normal(size=(comp.shape[1], rank)) + 1j * rng.normal(size=(comp.shape[1], rank)))
    return x @ np.conj(x.T)


def brute_seminorm(vals, delta, s, h):
    """Direct double sum of |f_i - f_k|^2 / |i - k|delta^(1+2s) delta^2 over |i - k| delta >= h."""
    n = len(vals)
    i, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    dist = np.abs(i - k) * delta
    mask = dist >= h - 1e-12
    diff = np.abs(vals[:, None] - vals[None, :]) ** 2
    with np.errstate(divide="ignore"):
        ker = np.where(mask, dist ** (-1 - 2 * s), 0.0)
    return float(np.sum(diff * ker) * delta ** 2)


def rank_additive_pair(rng, r):
    """PSD A, B whose ranges are in direct sum, so rank(A + B) = rank A + rank B."""
    basis = np.eye(r) + 0.4 * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
    a = int(rng.integers(1, r))
    b = int(rng.integers(1, r - a + 1))
    xa = basis[:, :a] @ (rng.normal(size=(a, a)) + 1j * rng.normal(size=(a, a)))
    xb = basis[:, a:a + b] @ (rng.normal(size=(b, b)) + 1j * rng.normal(size=(b, b)))
    return xa @ np.conj(xa.T), xb @ np.conj(xb.T), a, b
