import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftinv.diagnostics import (classify_blocks, classify_values, decay_sup, gagliardo_seminorm,
                                  gagliardo_trend, level_energy_profile, local_fiber_mass,
                                  trace_continuity_scan)
from shiftinv.genlib import PRESETS, FourierGenerator, make_lemma61_generator, make_prop_regular_set, phi1_hat
from shiftinv.lattice import FullSpace

from oracles import brute_seminorm

R1 = FullSpace(1)
LEMMA = make_lemma61_generator(2, 8)


def test_decay_examples():
    rep = decay_sup(LEMMA, 0.5)
    assert rep.trend == "bounded"
    stable = [v for j, v in zip(rep.levels, rep.block_sups) if j >= 3]
    assert max(stable) / min(stable) < 1.1
    assert decay_sup(LEMMA, 0.6).trend == "diverging"
    for s in (0.0, 0.5, 1.0, 2.0):
        rep = decay_sup(PRESETS["sinc"]().gens[0], s)
        assert rep.trend == "bounded" and rep.sup == pytest.approx(0.5 ** s)


def test_decay_level_sups_follow_block_estimate():
    rep = decay_sup(LEMMA, 0.6)
    sups = dict(zip(rep.levels, rep.block_sups))
    for j in range(3, 8):
        # amplitude 2^-j at frequency about n1 4^j: the level ratio tends to 2^(2s - 1)
        assert sups[j + 1] / sups[j] == pytest.approx(2 ** 0.2, rel=0.02)


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_obstruction_above_half(eps):
    assert decay_sup(LEMMA, 0.5 + eps).trend == "diverging"
    assert decay_sup(LEMMA, 0.5).trend == "bounded"


def test_decay_monotone_in_exponent():
    # on |w| <= radius, |w|^s2 <= max(1, radius^(s2 - s1)) |w|^s1
    cases = [(LEMMA, ((0.5, 0.6),)),
             (PRESETS["hat"]().gens[0], ((0.0, 0.5), (0.3, 1.2))),
             (make_prop_regular_set(1, 1).gens[1], ((0.0, 0.5), (0.5, 0.6), (0.3, 1.2)))]
    for gen, pairs in cases:
        radius = max(abs(v) for iv in gen.support_intervals() for v in iv.ravel())
        for s1, s2 in pairs:
            a, b = decay_sup(gen, s1).sup, decay_sup(gen, s2).sup
            assert b <= max(1.0, radius ** (s2 - s1)) * a * (1 + 1e-12)
    # the reverse orientation fails near the origin
    hat = PRESETS["hat"]().gens[0]
    assert decay_sup(hat, 0.0).sup > decay_sup(hat, 0.5).sup


def test_decay_rejects_negative_exponent():
    with pytest.raises(ValueError):
        decay_sup(LEMMA, -0.1)


def test_classifiers():
    assert classify_blocks([1, 1.1, 1.3, 1.6]) == "diverging"
    assert classify_blocks([1, 2, 1.0, 1.02, 1.05]) == "bounded"
    assert classify_blocks([1, 2]) == "inconclusive"
    assert classify_blocks([0, 0, 0]) == "bounded"
    assert classify_values([1, 2, 3, 4]) == "diverging"
    assert classify_values([1, 1.5, 1.6, 1.61]) == "converging"
    assert classify_values([1]) == "inconclusive"


def test_gagliardo_indicator_grows_like_log():
    tr = gagliardo_trend(PRESETS["sinc"]().gens[0], 0.5)
    assert tr.trend == "diverging"
    ratios = [v / math.log(2) for v in tr.increments()]
    assert max(ratios) / min(ratios) - 1 <= 0.2


def test_gagliardo_smooth_converges_and_zero_vanishes():
    assert gagliardo_trend(FourierGenerator(phi1_hat()), 0.5).trend == "converging"
    zero = gagliardo_trend(PRESETS["zero"]().gens[0], 0.5)
    assert zero.values == [0.0] * 4


def test_trace_of_translation_invariant_frames_diverges():
    for phi in (PRESETS["sinc"](), make_prop_regular_set(1, 1)):
        trace = lambda u, phi=phi: sum(np.abs(g.expr.evaluate(u)) ** 2 for g in phi.gens)
        assert gagliardo_trend(trace, 0.5).trend == "diverging"
        for g in phi.gens:
            if g.expr.continuous:
                assert gagliardo_trend(g, 0.5).trend == "converging"


def test_seminorm_matches_brute_double_sum():
    for f, s in ((PRESETS["sinc"]().gens[0].expr.evaluate, 0.5), (phi1_hat().evaluate, 0.3),
                 (lambda u: np.exp(1j * u) * (np.abs(u) < 1.3), 0.7)):
        omega = 2.0
        hs = [1 / 8, 1 / 16, 1 / 32]
        vals, delta = gagliardo_seminorm(f, s, omega, hs, oversample=2)
        n = int(math.ceil(2 * omega / delta))
        u = -omega + (np.arange(n) + 0.5) * delta
        fv = np.asarray(f(u), dtype=complex)
        for h, v in zip(hs, vals):
            ref = brute_seminorm(fv, delta, s, h)
            assert v == pytest.approx(ref, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["sinc", "hat", "bump", "prop-regular"]), st.floats(0.05, 0.95),
       st.lists(st.sampled_from([1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128]), min_size=2, max_size=5, unique=True))
def test_seminorm_nondecreasing_as_h_shrinks(name, s, hs):
    gen = PRESETS[name]().gens[0]
    hs = sorted(hs, reverse=True)
    vals, _ = gagliardo_seminorm(gen.expr.evaluate, s, 4.0, hs)
    assert all(v >= 0 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_trace_scan_examples():
    sinc = trace_continuity_scan(PRESETS["sinc"](), R1)
    locs = sorted(round(0.5 * (j.left + j.right), 2) for j in sinc)
    assert locs == [-0.5, 0.5] and all(j.size >= 0.5 for j in sinc)
    pair = trace_continuity_scan(make_prop_regular_set(1, 1), R1)
    locs = sorted(round(0.5 * (j.left + j.right), 2) for j in pair)
    assert locs == [0.0, 2.0] and all(j.size >= 0.5 for j in pair)
    assert trace_continuity_scan(PRESETS["hat"](), R1) == []


def test_local_fiber_mass_examples():
    bump = PRESETS["bump"]().gens[0]
    seq = [local_fiber_mass(bump, 0.75, d) for d in (0.2, 0.1, 0.05, 0.025)]
    assert all(b <= a for a, b in zip(seq, seq[1:]))
    assert seq[-1] < 1e-12
    assert local_fiber_mass(PRESETS["zero"]().gens[0], 0.3, 0.1) == 0
    assert local_fiber_mass(PRESETS["sinc"]().gens[0], 0.25, 0.1) == pytest.approx(1.0)


def test_local_fiber_mass_quadrature_converges():
    for name in ("bump", "hat"):
        g = PRESETS[name]().gens[0]
        for w0 in (0.3, 0.5, 0.9):
            a = local_fiber_mass(g, w0, 0.1, n=64)
            b = local_fiber_mass(g, w0, 0.1, n=128)
            assert abs(a - b) <= 0.01 * max(abs(b), 1e-12)
    g2 = make_prop_regular_set(1, 2).gens[0]
    assert local_fiber_mass(g2, [0.4, 0.6], 0.1, n=32) == pytest.approx(1.0, abs=1e-10)


def test_level_energy_profile():
    assert level_energy_profile(LEMMA, 0.5).trend == "bounded"
    for s in (0.55, 0.6):
        prof = level_energy_profile(LEMMA, s)
        assert prof.trend == "diverging"
        e = prof.energies
        assert e[-1] / e[-2] == pytest.approx(2 ** (2 * s - 1), rel=1e-6)
    with pytest.raises(ValueError):
        level_energy_profile(PRESETS["sinc"]().gens[0], 0.5)
