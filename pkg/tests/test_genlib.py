import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftinv.exceptions import DimensionMismatch
from shiftinv.fiber import gram_fibers
from shiftinv.genlib import (PRESETS, FourierGenerator, GeneratorSet, Indicator, Lemma61Series, Tensor,
                             eval_g, eval_generator, interiors_disjoint, make_lemma61_generator,
                             make_prop_pointwise_set, make_prop_regular_set, phi1_hat, phi2_hat,
                             sinc_set, support_intervals)
from shiftinv.genlib.expr import eval_hj, gamma_j, hj_interval


def test_g_boundary_values():
    assert eval_g(0.0) == 0.0
    assert eval_g(1.0) == 1.0
    assert eval_g(-3.0) == 0.0 and eval_g(7.0) == 1.0
    assert eval_g(0.5) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert eval_g(0.25) ** 2 + eval_g(0.75) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_g_partition_of_unity_on_1000_points():
    x = np.linspace(0, 1, 1000)
    err = np.abs(eval_g(x) ** 2 + eval_g(1 - x) ** 2 - 1)
    assert err.max() < 1e-12


def test_g_monotone_and_in_unit_interval():
    x = np.linspace(-0.5, 1.5, 2001)
    y = eval_g(x)
    assert np.all((y >= 0) & (y <= 1))
    assert np.all(np.diff(y) >= 0)


def test_gamma_and_level_intervals():
    assert [gamma_j(j) for j in range(5)] == [0, 1, 5, 21, 85]
    assert hj_interval(0) == (-0.25, 0.25)
    assert float(hj_interval(1)[0]) == 0.0 and float(hj_interval(1)[1]) == 0.375
    # h_j vanishes outside its interval and peaks at 1 inside
    for j in range(4):
        a, b = (float(v) for v in hj_interval(j))
        assert eval_hj(j, a - 1e-3) == 0 and eval_hj(j, b + 1e-3) == 0
        w = np.linspace(a, b, 4001)
        assert eval_hj(j, w).max() == pytest.approx(1.0, abs=1e-9)


def test_pair_pointwise_examples():
    phi = make_prop_regular_set(1, 1)
    assert eval_generator(phi.gens[0], 1.0) == pytest.approx(1.0)
    assert eval_generator(phi.gens[1], 1.0) == pytest.approx(0.0)
    # half-open rule: phi2 jumps from 0 to g(1) = 1 at w = 0
    assert eval_generator(phi.gens[1], 0.0).real == 1.0
    assert eval_generator(phi.gens[1], -1e-12) == 0


def test_eval_generator_dimension_mismatch():
    gen = make_prop_regular_set(1, 2).gens[0]
    with pytest.raises(DimensionMismatch):
        eval_generator(gen, [0.1, 0.2, 0.3])


def test_regular_set_shapes():
    p1 = make_prop_regular_set(1, 1)
    assert p1.r == 2 and all(g.tail_bound == 0 for g in p1.gens)
    for g in p1.gens:
        iv = support_intervals(g)[0]
        assert iv.min() >= 0 and iv.max() <= 2
    p2 = make_prop_regular_set(1, 2)
    assert p2.r == 4 and all(isinstance(g.expr, Tensor) for g in p2.gens)
    assert make_prop_regular_set(2, 1).r == 4


def test_support_examples():
    assert np.array_equal(support_intervals(sinc_set().gens[0])[0], [[-0.5, 0.5]])
    assert np.array_equal(support_intervals(FourierGenerator(phi1_hat()))[0], [[0.0, 2.0]])
    iv = support_intervals(make_lemma61_generator(2, 1))[0]
    pos = [[2.0 * (1 + l), 2.0 * (1 + l) + 0.375] for l in range(4)]
    expect = sorted([[-b, -a] for a, b in pos] + [[-0.25, 0.25]] + pos)
    assert np.array_equal(iv, np.array(expect))


def test_lemma61_values():
    gen = make_lemma61_generator(2, 8)
    assert eval_generator(gen, 0.0).real == pytest.approx(1.0)
    # the gap between the level-0 bump and the first level-1 copy at 2
    gap = np.linspace(0.26, 1.99, 500)
    assert np.all(eval_generator(gen, gap) == 0)
    assert gen.tail_bound == 2.0 ** -8


@settings(max_examples=100, deadline=None)
@given(st.floats(-400, 400, allow_nan=False))
def test_lemma61_is_even(w):
    gen = make_lemma61_generator(2, 8)
    assert eval_generator(gen, w) == eval_generator(gen, -w)


def test_pointwise_set_examples():
    one = make_prop_pointwise_set(1, (2,), 5)
    assert one.r == 1 and one.gens[0].expr == Lemma61Series(2, 5)
    two = make_prop_pointwise_set(2, (2,), 8)
    a, b = (g.support_intervals()[0] for g in two.gens)
    assert interiors_disjoint(a, b)
    pos = b[b[:, 0] >= 0]
    # zero on [0, n1 gamma_2 - 1]; the first copy of the level-0 block is centred at n1 gamma_2
    assert pos[0, 0] >= 2 * gamma_j(2) - 1
    w = np.linspace(0, 2 * gamma_j(2) - 1, 3000)
    assert np.all(eval_generator(two.gens[1], w) == 0)


# --- fiber properties of the constructions ----------------------------------------

def _fiber_sums(phi, n=4096):
    w = (np.arange(n) / n)[:, None]
    return gram_fibers(phi, w)


def test_pair_normalised_and_orthogonal():
    b = _fiber_sums(make_prop_regular_set(1, 1))
    assert np.abs(b.entries[:, 0, 0] - 1).max() < 1e-10
    assert np.abs(b.entries[:, 1, 1] - 1).max() < 1e-10
    assert np.abs(b.entries[:, 0, 1]).max() < 1e-10


def test_pair_fiber_sums_by_direct_summation():
    w = np.arange(4096) / 4096
    a, b = phi1_hat(), phi2_hat()
    s11 = sum(np.abs(a.evaluate(w + l)) ** 2 for l in range(-3, 4))
    s12 = sum(a.evaluate(w + l) * np.conj(b.evaluate(w + l)) for l in range(-3, 4))
    assert np.abs(s11 - 1).max() < 1e-10 and np.abs(s12).max() < 1e-10


def test_lemma61_normalisation_within_certified_bound():
    phi = make_prop_pointwise_set(1, (2,), 8)
    b = _fiber_sums(phi)
    dev = np.abs(b.entries[:, 0, 0].real - 1)
    assert np.all(dev <= b.trunc + 1e-10)
    # away from the window of discarded levels around 1/2 the truncated sums are exact
    w = b.omegas[:, 0]
    far = np.abs(np.mod(w, 1) - 0.5) > 2.0 ** -8 + 1e-9
    assert dev[far].max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["sinc", "hat", "bump", "prop-regular", "lemma61"]),
       st.floats(-200, 200, allow_nan=False))
def test_zero_outside_declared_support(name, w):
    phi = PRESETS[name]()
    for g in phi.gens:
        iv = g.support_intervals()[0]
        inside = np.any((iv[:, 0] <= w) & (w <= iv[:, 1]))
        if not inside:
            assert eval_generator(g, w) == 0


def test_presets_bounded_by_one_plus_tail():
    w = np.linspace(-60, 60, 48001)
    for name in ["sinc", "hat", "bump", "dup-sinc", "dependent", "prop-regular", "lemma61"]:
        for g in PRESETS[name]().gens:
            assert np.abs(eval_generator(g, w)).max() <= 1 + g.tail_bound + 1e-12


def test_tensor_is_product_of_axes():
    rng = np.random.default_rng(3)
    gen = make_prop_regular_set(1, 2).gens[1]
    x = rng.uniform(-0.5, 2.5, size=(100, 2))
    a, b = gen.expr.children
    assert np.array_equal(gen.expr.evaluate(x), a.evaluate(x[:, 0]) * b.evaluate(x[:, 1]))


def test_json_round_trip_of_every_preset():
    for name, make in PRESETS.items():
        phi = make()
        text = phi.to_json()
        back = GeneratorSet.from_json(text)
        assert back.to_json() == text
        w = np.linspace(-3, 12, 301)[:, None] if phi.dim == 1 else None
        for g0, g1 in zip(phi.gens, back.gens):
            assert np.array_equal(g0.expr.evaluate(w), g1.expr.evaluate(w))
    two_d = PRESETS["prop-regular"](k=1, d=2)
    assert GeneratorSet.from_json(two_d.to_json()).to_json() == two_d.to_json()


def test_json_uses_rational_strings():
    d = json.loads(GeneratorSet((FourierGenerator(Indicator(Fraction(1, 2), 1)),)).to_json())
    assert d["generators"][0]["expr"]["a"] == "1/2"


def test_continuity_flags():
    assert sinc_set().continuous is False
    assert FourierGenerator(phi1_hat()).expr.continuous
    assert make_prop_regular_set(1, 1).continuous is False
    assert PRESETS["hat"]().continuous and PRESETS["bump"]().continuous
