import json
from fractions import Fraction

import numpy as np
import pytest

from shiftinv.exceptions import AlreadyMinimal, NotSuperGroup
from shiftinv.genlib import PRESETS, make_prop_pointwise_set, make_prop_regular_set
from shiftinv.grid import GridSpec
from shiftinv.invariance import (check_gamma_invariance, check_translation_invariance,
                                 constant_rank_scan, excluded_mask, minimal_generator_count,
                                 rank_drop_locus, reduce_generators, semicontinuity_scan)
from shiftinv.lattice import FullSpace, Lattice

R1 = FullSpace(1)
HALF = Lattice.diagonal([Fraction(1, 2)])
THIRD = Lattice.diagonal([Fraction(1, 3)])
Z = Lattice.integer(1)


def test_gamma_invariance_examples():
    rep = check_gamma_invariance(PRESETS["sinc"](), HALF)
    assert rep.verdict == "Invariant"
    live = [f for f in rep.fibers if not f.excluded]
    assert all(f.rank_g == 1 and sum(f.ranks_a) == 1 for f in live)
    assert check_gamma_invariance(make_prop_pointwise_set(1, (2,), 8), HALF).verdict == "Invariant"
    rep = check_gamma_invariance(PRESETS["hat"](), HALF)
    assert rep.verdict == "NotInvariant"
    bad = [f for f in rep.fibers if not f.ok]
    assert all(f.rank_g == 1 and sum(f.ranks_a) == 2 for f in bad)
    assert rep.violating_fraction(0, 1) >= 0.9


def test_gamma_must_contain_lattice():
    with pytest.raises(NotSuperGroup):
        check_gamma_invariance(PRESETS["sinc"](), Lattice.diagonal([2]))


def test_translation_invariance_examples():
    assert check_translation_invariance(PRESETS["sinc"]()).verdict == "Invariant"
    for k in (1, 2):
        assert check_translation_invariance(make_prop_regular_set(k, 1)).verdict == "Invariant"
    rep = check_translation_invariance(PRESETS["hat"]())
    assert rep.verdict == "NotInvariant"
    assert rep.violating_fraction(0, 1) >= 0.9


@pytest.mark.parametrize("name", ["sinc", "hat", "bump", "dup-sinc", "dependent", "prop-regular", "lemma61", "zero"])
def test_full_space_dispatch_matches_translation_check(name):
    phi = PRESETS[name]()
    a = check_gamma_invariance(phi, R1, 1024)
    b = check_translation_invariance(phi, 1024)
    assert a.verdict == b.verdict
    assert [f.ok for f in a.fibers] == [f.ok for f in b.fibers]


@pytest.mark.parametrize("name,gamma", [("sinc", HALF), ("hat", HALF), ("hat", R1), ("prop-regular", R1),
                                        ("prop-regular", HALF), ("dup-sinc", THIRD), ("lemma61", HALF)])
def test_verdict_stable_under_grid_doubling(name, gamma):
    phi = PRESETS[name]()
    assert check_gamma_invariance(phi, gamma, 4096).verdict == check_gamma_invariance(phi, gamma, 8192).verdict


@pytest.mark.parametrize("name,gamma", [("sinc", HALF), ("hat", HALF), ("prop-regular", R1), ("dup-sinc", THIRD)])
def test_verdict_unchanged_by_scaling(name, gamma):
    phi = PRESETS[name]()
    for c in (1e-3, 2.5 - 1j, 40.0):
        a = check_gamma_invariance(phi, gamma, 2048)
        b = check_gamma_invariance(phi.scaled(c), gamma, 2048)
        assert a.verdict == b.verdict
        assert [f.rank_g for f in a.fibers] == [f.rank_g for f in b.fibers]


def test_rank_g_never_exceeds_r_and_equality_when_invariant():
    for name, gamma in [("prop-regular", HALF), ("dup-sinc", HALF), ("dependent", R1)]:
        phi = PRESETS[name]()
        rep = check_gamma_invariance(phi, gamma, 1024)
        assert all(f.rank_g <= phi.r for f in rep.fibers)
        if rep.verdict == "Invariant":
            assert all(f.rank_g == sum(f.ranks_a) for f in rep.fibers if not f.excluded)


def test_breakpoint_exclusion_and_inconclusive():
    phi = make_prop_regular_set(1, 1)
    w = np.array([[0.0], [0.5e-6], [0.3], [1 - 1e-7]])
    assert excluded_mask(phi, Z, w).tolist() == [True, True, False, True]
    # 8 samples with one on a breakpoint exceed the 1% exclusion budget
    assert check_translation_invariance(phi, 8).verdict == "Inconclusive"
    assert check_translation_invariance(phi, GridSpec(8, jitter=True, seed=1)).verdict == "Invariant"


def test_report_serialisation():
    rep = check_gamma_invariance(PRESETS["sinc"](), HALF, 16)
    d = json.loads(rep.to_json())
    assert set(d) >= {"verdict", "grid", "tau", "excluded", "fibers"}
    assert set(d["fibers"][0]) >= {"omega", "rank_g", "ranks_a", "ok"}
    assert len(rep.to_csv().splitlines()) == 17


def test_minimal_generator_count_examples():
    assert minimal_generator_count(make_prop_regular_set(1, 1)) == 2
    assert minimal_generator_count(PRESETS["dup-sinc"]()) == 1
    assert minimal_generator_count(PRESETS["sinc"]()) == 1
    assert minimal_generator_count(PRESETS["dependent"]()) == 2


def test_reduce_duplicated_sinc():
    red = reduce_generators(PRESETS["dup-sinc"]())
    assert all(v.shape[1] == 1 for v in red.vectors)
    assert red.span_residual < 1e-10
    assert np.all(red.removed == 0)
    assert red.relabel(0) == {1: 0}


def test_reduce_dependent_triple():
    red = reduce_generators(PRESETS["dependent"]())
    assert all(v.shape[1] == 2 for v in red.vectors)
    assert red.span_residual < 1e-8
    # the first vector in the span of the others is phi1, so phi2 -> 0 and mix -> 1
    assert red.relabel(0) == {1: 0, 2: 1}


def test_reduce_full_rank_raises():
    with pytest.raises(AlreadyMinimal):
        reduce_generators(make_prop_regular_set(1, 1))


def test_rank_drop_locus_examples():
    bump = rank_drop_locus(PRESETS["bump"]())
    locus = np.array([w[0] for w, _ in bump])
    # the whole gap (1/2, 1) drops; inside the support only the numerically flat edges do
    gap = np.arange(4096)[(np.arange(4096) / 4096 > 0.5 + 1e-6)] / 4096
    assert np.all(np.isin(gap, locus))
    assert not np.any((locus > 0.1) & (locus < 0.4))
    for n in (1024, 4096):
        assert rank_drop_locus(make_prop_regular_set(1, 1), n, force=True) == []
    zero = rank_drop_locus(PRESETS["zero"](), 256, rho=1)
    assert len(zero) == 256 and all(k == 0 for _, k in zero)


def test_rank_drop_needs_continuous_generators():
    with pytest.raises(ValueError):
        rank_drop_locus(PRESETS["sinc"]())


def test_semicontinuity_examples():
    assert semicontinuity_scan(make_prop_regular_set(1, 1), R1) == []
    assert semicontinuity_scan(make_prop_regular_set(1, 1), HALF) == []
    assert semicontinuity_scan(PRESETS["hat"](), R1) == []
    assert semicontinuity_scan(PRESETS["bump"](), Z) == []


def test_semicontinuity_flags_an_isolated_spike():
    # an indicator of a tiny interval strictly inside a grid cell pair forms a rank spike
    from shiftinv.genlib import FourierGenerator, GeneratorSet, Indicator
    phi = GeneratorSet((FourierGenerator(Indicator(Fraction(1, 2) - Fraction(1, 4096),
                                                   Fraction(1, 2) + Fraction(1, 4096))),), Z)
    flags = semicontinuity_scan(phi, Z, 1024)
    assert len(flags) == 1 and flags[0].rank == 1 and flags[0].neighbour_ranks == [0, 0]


def test_constant_rank_examples():
    sinc = constant_rank_scan(PRESETS["sinc"](), R1)
    assert not sinc["constant"] and set(sinc["histogram"]) == {0, 1}
    ident = constant_rank_scan(make_prop_regular_set(1, 1), Z)
    assert ident["constant"] and ident["rank"] == 2
    with pytest.raises(ValueError):
        constant_rank_scan(PRESETS["sinc"](), R1, s=0.5)
