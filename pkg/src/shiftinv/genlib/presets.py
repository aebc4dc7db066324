"""Ready-made generators and generator sets."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from ..lattice import Lattice
from .expr import (BumpG, Dilate, Eq62Series, G0, Indicator, Lemma61Series, PiecewiseLinear,
                   Product, Reflect, Scale, Shift, Sum, Tensor)
from .generators import FourierGenerator, GeneratorSet


def phi1_hat():
    """g(w) g(2 - w): smooth, supported on [0, 2]."""
    return Product((BumpG(), Shift(Reflect(BumpG()), (2,))))


def phi2_hat():
    """g(1 - w) chi_[0,1) - g(w - 1) chi_[1,2)."""
    left = Product((Shift(Reflect(BumpG()), (1,)), Indicator(0, 1)))
    right = Product((Shift(BumpG(), (1,)), Indicator(1, 2)))
    return Sum((left, Scale(right, -1.0)))


def sinc_hat():
    return Indicator(Fraction(-1, 2), Fraction(1, 2))


def hat_hat():
    return PiecewiseLinear((-1, 0, 1), (0, 1, 0))


def bump_hat():
    """Smooth bump g0(4(w - 1/4)) supported on [0, 1/2]."""
    return Shift(Dilate(G0(), 4), (Fraction(1, 4),))


def single(expr, label, lattice=None) -> GeneratorSet:
    return GeneratorSet((FourierGenerator(expr, label),), lattice or Lattice.integer(expr.dim))


def sinc_set() -> GeneratorSet:
    return single(sinc_hat(), "sinc")


def hat_set() -> GeneratorSet:
    return single(hat_hat(), "hat")


def bump_set() -> GeneratorSet:
    return single(bump_hat(), "bump")


def zero_set() -> GeneratorSet:
    return single(Sum((), 1), "zero")


def duplicated_sinc_set() -> GeneratorSet:
    return GeneratorSet((FourierGenerator(sinc_hat(), "sinc_a"), FourierGenerator(sinc_hat(), "sinc_b")),
                        Lattice.integer(1))


def regular_pair_1d(k: int = 1) -> list[FourierGenerator]:
    out = []
    for i in range(1, 2 * k + 1):
        if i % 2:
            e = phi1_hat() if i == 1 else Shift(phi1_hat(), (i - 1,))
        else:
            e = phi2_hat() if i == 2 else Shift(phi2_hat(), (i - 2,))
        out.append(FourierGenerator(e, f"phi{i}"))
    return out


def make_prop_regular_set(k: int = 1, d: int = 1) -> GeneratorSet:
    """(2k)^d orthonormal generators of a translation-invariant space over Z^d."""
    if k < 1 or d < 1:
        raise ValueError("need k >= 1 and d >= 1")
    base = regular_pair_1d(k)
    if d == 1:
        return GeneratorSet(tuple(base), Lattice.integer(1))
    gens = []
    for combo in itertools.product(base, repeat=d):
        label = "x".join(g.label for g in combo)
        gens.append(FourierGenerator(Tensor(tuple(g.expr for g in combo)), label, 0.0))
    return GeneratorSet(tuple(gens), Lattice.integer(d))


def dependent_regular_set() -> GeneratorSet:
    """{phi1, phi2, (phi1 + phi2)/sqrt(2)}: the third lies in the span of the first two."""
    a, b = regular_pair_1d(1)
    mix = Scale(Sum((a.expr, b.expr)), 1 / math.sqrt(2))
    return GeneratorSet((a, b, FourierGenerator(mix, "mix")), Lattice.integer(1))


def make_lemma61_generator(n1: int = 2, J: int = 8) -> FourierGenerator:
    return FourierGenerator(Lemma61Series(n1, J), f"lemma61(n1={n1},J={J})")


def make_eq62_generator(i: int, n1: int = 2, J: int = 8) -> FourierGenerator:
    return FourierGenerator(Eq62Series(i, n1, J), f"eq62(i={i},n1={n1},J={J})")


def make_prop_pointwise_set(r: int = 1, n=(2,), J: int = 8) -> GeneratorSet:
    """r orthonormal generators with disjoint Fourier supports, invariant under prod(1/n_k Z)."""
    n = tuple(int(v) for v in n)
    if r < 1 or not n or any(v < 1 for v in n):
        raise ValueError("need r >= 1 and positive n")
    first = [make_lemma61_generator(n[0], J)] + [make_eq62_generator(i, n[0], J) for i in range(2, r + 1)]
    if len(n) == 1:
        return GeneratorSet(tuple(first), Lattice.integer(1))
    psis = [Lemma61Series(nk, J) for nk in n[1:]]
    gens = tuple(FourierGenerator(Tensor((g.expr,) + tuple(psis)), g.label + "x" + "x".join(
        f"psi(n={nk})" for nk in n[1:])) for g in first)
    return GeneratorSet(gens, Lattice.integer(len(n)))


def gamma_for(n) -> Lattice:
    """The lattice prod(1/n_k Z)."""
    return Lattice.diagonal([Fraction(1, int(v)) for v in n])


PRESETS = {
    "sinc": lambda: sinc_set(),
    "hat": lambda: hat_set(),
    "bump": lambda: bump_set(),
    "zero": lambda: zero_set(),
    "dup-sinc": lambda: duplicated_sinc_set(),
    "dependent": lambda: dependent_regular_set(),
    "prop-regular": lambda k=1, d=1: make_prop_regular_set(int(k), int(d)),
    "lemma61": lambda n=2, J=8: single(make_lemma61_generator(int(n), int(J)).expr,
                                       f"lemma61(n1={n},J={J})"),
    "prop-pointwise": lambda r=1, n=(2,), J=8: make_prop_pointwise_set(
        int(r), (n,) if isinstance(n, int) else tuple(n), int(J)),
}
