from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belle_paire.approx import (
    approximate_by_automorphisms,
    defect_profile,
    orbit_decompose,
    strip_lift,
)
from belle_paire.measure import StepMap, l1_distance
from belle_paire.random_endo import apply_random_endo, constant_endo
from belle_paire.structures import (
    FqVector,
    NaturalNumbers,
    NonInjectiveOnWindow,
    TableInjection,
    basis_shift_endo,
    shift_endo,
    successor_endo,
    window_permutation,
)

TAUS = [successor_endo(), shift_endo(2), basis_shift_endo(2)]


@pytest.mark.parametrize("tau", TAUS, ids=lambda t: t.description)
@pytest.mark.parametrize("n", [1, 2, 3, 8, 17])
def test_family_defect_at_most_one(tau, n):
    sigmas = approximate_by_automorphisms(tau, n)
    assert len(sigmas) == n
    prof = defect_profile(tau, sigmas, 400)
    assert prof.max_defect <= 1


@pytest.mark.parametrize("tau", TAUS, ids=lambda t: t.description)
def test_sigmas_are_window_bijections(tau):
    for s in approximate_by_automorphisms(tau, 5):
        assert s.window_bijectivity(300)


def test_single_sigma_fixes_nothing_extra():
    # n=1 must still disagree at most once per point, so it IS tau off the
    # cycle-closing corrections
    tau = successor_endo()
    (sigma,) = approximate_by_automorphisms(tau, 1)
    prof = defect_profile(tau, [sigma], 100)
    assert prof.max_defect <= 1
    assert sigma.window_bijectivity(100)


@given(st.integers(1, 24))
@settings(max_examples=24, deadline=None)
def test_defect_bound_any_n(n):
    tau = shift_endo(3)
    prof = defect_profile(tau, approximate_by_automorphisms(tau, n), 200)
    assert prof.max_defect <= 1


def test_sigma_preimage_consistency():
    tau = successor_endo()
    for s in approximate_by_automorphisms(tau, 4):
        for x in range(50):
            y = s.apply(x)
            assert s.preimage(y) == x


def test_orbit_decompose_semi_orbit():
    dec = orbit_decompose(successor_endo(), 100)
    assert dec.semi_orbit_count == 1
    assert dec.orbit_count == 0
    assert dec.roots[0] == 0
    assert dec.position_of(7) == 7


def test_orbit_decompose_two_chains():
    dec = orbit_decompose(shift_endo(2), 100)
    assert dec.semi_orbit_count == 2
    assert sorted(dec.roots.values()) == [0, 1]


def test_orbit_decompose_cycles():
    rot = window_permutation(NaturalNumbers(), {0: 1, 1: 2, 2: 0})
    dec = orbit_decompose(rot, 10)
    # one 3-cycle plus seven fixed points, each its own cycle
    assert dec.orbit_count == 8
    assert dec.semi_orbit_count == 0
    assert set(dec.cycles[0]) == {0, 1, 2}
    assert sum(len(c) for c in dec.cycles.values()) == 10


def test_orbit_decompose_rejects_collision():
    bad = TableInjection(NaturalNumbers(), {0: 3})  # collides with fixed 3
    with pytest.raises(NonInjectiveOnWindow):
        orbit_decompose(bad, 10)


def test_defect_profile_marks_undetermined():
    # a table pushing mass far away leaves window points with unresolved
    # backward walks only if the walk exceeds max_steps; with generous steps
    # nothing here is undetermined
    tau = successor_endo()
    prof = defect_profile(tau, approximate_by_automorphisms(tau, 2), 50)
    assert prof.undetermined == ()
    assert set(prof.as_dict()) == set(range(50))


@pytest.mark.parametrize("n", [2, 5, 10])
def test_strip_lift_distance_formula(n):
    tau = successor_endo()
    sigmas = approximate_by_automorphisms(tau, n)
    g_hat = strip_lift(sigmas)
    h_hat = constant_endo(tau)
    assert len(g_hat.cells) <= n
    for a in range(40):
        d = l1_distance(apply_random_endo(g_hat, StepMap.constant(a)),
                        apply_random_endo(h_hat, StepMap.constant(a)))
        expected = Fraction(sum(1 for s in sigmas
                                if s.apply(a) != tau.apply(a)), n)
        assert d == expected
        assert d <= Fraction(1, n)


def test_strip_lift_on_vectors():
    tau = basis_shift_endo(2)
    n = 6
    sigmas = approximate_by_automorphisms(tau, n)
    g_hat = strip_lift(sigmas)
    h_hat = constant_endo(tau)
    dom = tau.domain
    for a in dom.window(20):
        d = l1_distance(apply_random_endo(g_hat, StepMap.constant(a)),
                        apply_random_endo(h_hat, StepMap.constant(a)))
        assert d <= Fraction(1, n)


def test_strip_lift_strips_are_horizontal():
    sig = approximate_by_automorphisms(successor_endo(), 4)
    g_hat = strip_lift(sig)
    for s, v in g_hat.cells:
        assert s.omega_shadow() == ((Fraction(0), Fraction(1)),)
