from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belle_paire.geometry import (
    SEARCH_GUARD,
    SearchGuardExceeded,
    averaging_witness,
    affine_points,
    closed_set_size,
    epsilon_lower_bound,
    exhaustive_pair_search,
    exhaustive_pair_search_pure,
    gl_matrices,
    min_k_for_delta,
    min_k_violations,
    projective_points,
    standard_chain,
    subspace_span,
)
from belle_paire.measure import Frac, RationalSet
from belle_paire.serialize import load_baseline, parse_frac
from belle_paire.structures import GeometrySpec

AFF2 = GeometrySpec("affine", 2)
AFF3 = GeometrySpec("affine", 3)
PROJ2 = GeometrySpec("projective", 2)
DIS = GeometrySpec("disintegrated")


def test_closed_set_sizes():
    assert [closed_set_size(AFF2, d) for d in range(5)] == [1, 2, 4, 8, 16]
    assert [closed_set_size(AFF3, d) for d in range(4)] == [1, 3, 9, 27]
    # projective d-flats have (q^{d+1}-1)/(q-1) points
    assert [closed_set_size(PROJ2, d) for d in range(4)] == [1, 3, 7, 15]
    assert [closed_set_size(DIS, d) for d in range(4)] == [0, 1, 2, 3]


def test_point_enumerations_match_sizes():
    for d in range(4):
        assert len(affine_points(2, d)) == closed_set_size(AFF2, d)
        assert len(affine_points(3, d)) == closed_set_size(AFF3, d)
        assert len(projective_points(2, d)) == closed_set_size(PROJ2, d)


def test_subspace_span():
    w = subspace_span(2, [(1, 0)])
    assert w == frozenset({(0, 0), (1, 0)})
    assert len(subspace_span(3, [(1, 0), (0, 1)])) == 9
    assert subspace_span(2, []) == frozenset()


@pytest.mark.parametrize("q,delta,k", [
    (2, Fraction(1, 8), 3),
    (2, Fraction(1, 2), 1),
    (2, Fraction(1, 5), 3),
    (3, Fraction(1, 9), 2),
    (3, Fraction(1, 10), 3),
])
def test_min_k_for_delta(q, delta, k):
    assert min_k_for_delta(GeometrySpec("affine", q), delta) == k
    assert min_k_for_delta(GeometrySpec("projective", q), delta) == k


def test_min_k_refused_for_disintegrated():
    # the ratio (d-k)/d creeps back to 1, so no uniform k exists
    with pytest.raises(ValueError):
        min_k_for_delta(DIS, Fraction(1, 4))


@pytest.mark.parametrize("q", [2, 3])
def test_min_k_no_violations_small_dims(q):
    geom = GeometrySpec("affine", q)
    for delta in (Fraction(1, 2), Fraction(1, 5), Fraction(1, 8)):
        k = min_k_for_delta(geom, delta)
        assert min_k_violations(geom, delta, k, max_dim=6) == []


def test_min_k_minus_one_does_violate():
    geom = GeometrySpec("affine", 2)
    delta = Fraction(1, 8)
    k = min_k_for_delta(geom, delta)
    assert min_k_violations(geom, delta, k - 1, max_dim=6)


def test_epsilon_lower_bounds():
    assert [epsilon_lower_bound(n, False) for n in (1, 2, 3, 4)] == \
        [Fraction(1, 2), Fraction(1, 4), Fraction(1, 6), Fraction(1, 8)]
    assert [epsilon_lower_bound(n, True) for n in (1, 2, 3, 4)] == \
        [Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]
    with pytest.raises(ValueError):
        epsilon_lower_bound(0, False)


@given(st.integers(1, 40))
def test_modular_bound_doubles_plain(n):
    assert epsilon_lower_bound(n, True) == 2 * epsilon_lower_bound(n, False)


def test_standard_chain_validation():
    ch = standard_chain(AFF2, (0, 1, 2), ambient=3)
    assert [len(s) for s in ch.sets] == [1, 2, 4]
    assert [ch.dim_of(i) for i in range(3)] == [0, 1, 2]
    with pytest.raises(ValueError):
        standard_chain(AFF2, (2, 1), ambient=3)


def test_chain_rejects_non_closed_sizes():
    from belle_paire.geometry import ClosedSetChain
    with pytest.raises(ValueError):
        ClosedSetChain(AFF2, (frozenset({(0, 0), (1, 0), (0, 1)}),))


def test_averaging_witness_constant_full_trace():
    ch = standard_chain(AFF2, (0, 1, 2), ambient=3)
    C = RationalSet.from_rect(Frac(0), Frac(1, 2), Frac(0), Frac(1))
    i, b, m = averaging_witness(ch, [(C, ch.sets[2])], C)
    # every chain point is fully covered, so the minimum is the whole mass
    assert m == C.measure
    assert i == 0


def test_averaging_witness_partial_cover():
    ch = standard_chain(AFF2, (0, 1, 2), ambient=3)
    C = RationalSet.from_rect(Frac(0), Frac(1, 2), Frac(0), Frac(1))
    half1 = RationalSet.from_rect(Frac(0), Frac(1, 4), Frac(0), Frac(1))
    half2 = RationalSet.from_rect(Frac(1, 4), Frac(1, 2), Frac(0), Frac(1))
    traces = [(half1, ch.sets[1]), (half2, ch.sets[2])]
    i, b, m = averaging_witness(ch, traces, C)
    # the top flat's extra points are only covered on half2
    assert i == 2
    assert m == Frac(1, 4)
    assert b not in ch.sets[1]


def test_averaging_witness_validates_partition():
    ch = standard_chain(AFF2, (0, 1), ambient=2)
    C = RationalSet.unit_square()
    half = RationalSet.vertical_strip(Frac(0), Frac(1, 2))
    with pytest.raises(ValueError):
        averaging_witness(ch, [(half, ch.sets[0])], C)
    with pytest.raises(ValueError):
        averaging_witness(ch, [(C, ch.sets[0]), (half, ch.sets[1])], C)


def test_gl_matrices_counts():
    # |GL(2,2)| = 6, |GL(2,3)| = 48, |GL(3,2)| = 168
    assert len(gl_matrices(2, 2)) == 6
    assert len(gl_matrices(2, 3)) == 48
    assert len(gl_matrices(3, 2)) == 168


def test_search_flagship_instance():
    base = load_baseline("search")["q2_dim2_grid2_span_e0"]
    res = exhaustive_pair_search(2, 2, 2, [(1, 0)])
    assert res.gap == parse_frac(base["gap"])
    assert res.gap > 0
    assert res.candidates_checked == base["candidates"]
    assert res.witness is not None


def test_search_full_subspace_is_free():
    res = exhaustive_pair_search(2, 2, 2, [(1, 0), (0, 1)])
    assert res.gap == 0


def test_search_coarse_grid_matches_known_value():
    base = load_baseline("search")["q2_dim2_grid1_span_e0"]
    res = exhaustive_pair_search(2, 2, 1, [(1, 0)])
    assert res.gap == parse_frac(base["gap"])
    assert res.candidates_checked == base["candidates"]


def test_search_deterministic_across_runs():
    a = exhaustive_pair_search(2, 2, 2, [(1, 0)])
    b = exhaustive_pair_search(2, 2, 2, [(1, 0)])
    assert a == b


def test_search_jobs_deterministic():
    a = exhaustive_pair_search(2, 2, 2, [(1, 0)])
    b = exhaustive_pair_search(2, 2, 2, [(1, 0)], jobs=3)
    assert a == b


def test_search_guard_trips():
    with pytest.raises(SearchGuardExceeded):
        exhaustive_pair_search(3, 3, 4, [(1, 0, 0)])


def test_pure_search_baseline_grids():
    grids = load_baseline("search")["pure_m2_subset1_grids"]
    for g_txt, gap_txt in grids.items():
        res = exhaustive_pair_search_pure(2, int(g_txt), 1)
        assert res.gap == parse_frac(gap_txt)


def test_pure_search_monotone_on_nested_grids():
    # candidate classes embed along refinements, so the certified lower
    # bound cannot decrease from grid g to grid 2g
    gaps = [exhaustive_pair_search_pure(2, g, 1).gap for g in (1, 2, 4)]
    assert gaps[0] >= gaps[1] >= gaps[2]


def test_vector_search_monotone_on_nested_grids():
    g1 = exhaustive_pair_search(2, 2, 1, [(1, 0)]).gap
    g2 = exhaustive_pair_search(2, 2, 2, [(1, 0)]).gap
    assert g1 >= g2  # refining the grid can only help the candidates
    assert (g1, g2) == (1, 1)
