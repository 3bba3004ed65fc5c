from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belle_paire.measure import Frac, RationalSet, StepMap, l1_distance
from belle_paire.random_endo import (
    NoRepresentativeMatch,
    PairModel,
    Refusal,
    StructuralMismatch,
    approximate_random_endo,
    apply_random_endo,
    brute_force_dist_to_image,
    certify_epsilon_isomorphism,
    compose_random_endos,
    constant_endo,
    dist_to_image,
    endos_agree_on_window,
    hausdorff_gap,
    max_strip_probe_distance,
    orbit_reduce,
    validate_random_endo,
)
from belle_paire.sampling import SampleStream
from belle_paire.structures import (
    IdentityInjection,
    NaturalNumbers,
    identity_endo,
    shift_endo,
    successor_endo,
    window_permutation,
)

NAT = NaturalNumbers()


def two_rep_endo():
    return StepMap.uniform_strips([identity_endo(NAT), successor_endo()])


def test_validate_rejects_mixed_carriers():
    from belle_paire.structures import basis_shift_endo
    mixed = StepMap.uniform_strips([identity_endo(NAT),
                                    basis_shift_endo(2)])
    with pytest.raises(StructuralMismatch):
        validate_random_endo(mixed)
    assert validate_random_endo(two_rep_endo()) == NAT


def test_apply_pushes_values_through():
    h_hat = two_rep_endo()
    f = StepMap.constant(3)
    out = apply_random_endo(h_hat, f)
    assert out.value_at(Frac(1, 4), Frac(0)) == 3
    assert out.value_at(Frac(3, 4), Frac(0)) == 4


def test_compose_on_common_refinement():
    a = constant_endo(successor_endo())
    b = StepMap.uniform_strips([identity_endo(NAT), shift_endo(2)])
    c = compose_random_endos(a, b)
    # left strip: x+1 after identity; right strip: x+1 after x+2
    assert c.value_at(Frac(0), Frac(0)).apply(10) == 11
    assert c.value_at(Frac(3, 4), Frac(0)).apply(10) == 13


def test_endos_agree_on_window():
    assert endos_agree_on_window(two_rep_endo(), two_rep_endo(), 100)
    assert not endos_agree_on_window(two_rep_endo(),
                                     constant_endo(identity_endo(NAT)), 100)


def test_orbit_reduce_exact_match_costs_nothing():
    h_hat = two_rep_endo()
    red = orbit_reduce(h_hat, [identity_endo(NAT), successor_endo()], 100)
    for s, g in red.g_hat.cells:
        assert isinstance(g, IdentityInjection)
    assert endos_agree_on_window(red.reconstruct(), h_hat, 100)


def test_orbit_reduce_factors_through_lowest_index():
    # any window-injective value factors through any injective rep by
    # completing the complement, so the lowest index always wins when no rep
    # matches exactly; the twist absorbs the difference
    swap = window_permutation(NAT, {1: 2, 2: 1})
    h_hat = constant_endo(swap.compose(successor_endo()))
    red = orbit_reduce(h_hat, [identity_endo(NAT), successor_endo()], 60)
    assert red.assignment.value_at(Frac(1, 2), Frac(1, 2)) == 0
    ((_, twist),) = red.g_hat.cells
    assert not isinstance(twist, IdentityInjection)
    assert twist.window_bijectivity(60)
    assert endos_agree_on_window(red.reconstruct(), h_hat, 60)


def test_orbit_reduce_exact_match_beats_factoring():
    # phase one: a rep agreeing on the whole window wins even when an
    # earlier rep could factor it with a twist
    h_hat = constant_endo(successor_endo())
    red = orbit_reduce(h_hat, [identity_endo(NAT), successor_endo()], 50)
    assert red.assignment.value_at(Frac(1, 2), Frac(1, 2)) == 1
    ((_, twist),) = red.g_hat.cells
    assert isinstance(twist, IdentityInjection)


def test_orbit_reduce_no_match_raises():
    h_hat = constant_endo(successor_endo())
    with pytest.raises(NoRepresentativeMatch):
        orbit_reduce(h_hat, [], 50)


@pytest.mark.parametrize("eps", [Frac(1, 2), Frac(1, 10), Frac(1, 100)])
def test_approximate_bound_and_budget_lines(eps):
    h_hat = two_rep_endo()
    cert = approximate_random_endo(h_hat, None, eps, 200)
    assert cert.bound <= eps
    assert sum((ln.contribution for ln in cert.lines), Frac(0)) == cert.bound
    for ln in cert.lines:
        assert ln.contribution == ln.measure * Frac(ln.max_defect, ln.pieces)
    # every value of the result is a window bijection
    for v in cert.g_hat.values():
        assert v.window_bijectivity(120)


def test_approximate_automorphism_passthrough():
    auto = window_permutation(NAT, {0: 1, 1: 0})
    cert = approximate_random_endo(constant_endo(auto), None, Frac(1, 7), 100)
    assert cert.bound == 0
    assert cert.g_hat == constant_endo(auto)


def test_approximate_probe_distances_within_bound():
    eps = Frac(1, 6)
    h_hat = two_rep_endo()
    cert = approximate_random_endo(h_hat, None, eps, 150)
    for a in range(25):
        f = StepMap.constant(a)
        d = l1_distance(apply_random_endo(cert.g_hat, f),
                        apply_random_endo(h_hat, f))
        assert d <= cert.bound


def test_dist_to_image_zero_when_reachable():
    h_hat = constant_endo(successor_endo())
    f = StepMap.constant(3)
    g = apply_random_endo(h_hat, f)
    assert dist_to_image(g, h_hat) == 0
    # 0 has no successor preimage anywhere, so distance is the full mass
    assert dist_to_image(StepMap.constant(0), h_hat) == 1


def test_dist_to_image_partial():
    h_hat = two_rep_endo()
    # on the left half 0 is its own preimage, on the right nothing hits 0
    assert dist_to_image(StepMap.constant(0), h_hat) == Frac(1, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_dist_to_image_matches_brute_force(seed):
    rng = SampleStream(seed)
    h_hat = rng.endo_over_reps([identity_endo(NAT), successor_endo()],
                               cells=rng.rng.randint(1, 2), twist_size=4)
    cuts = rng.cuts(rng.rng.randint(1, 2))
    vals = [rng.rng.randrange(3) for _ in cuts[:-1]]
    f = StepMap.from_vertical_strips(
        (lo, hi, v) for lo, hi, v in zip(cuts, cuts[1:], vals))
    # the oracle needs the common refinement strips and a pool covering
    # every preimage of f's alphabet plus one throwaway point
    xs = sorted({x for m in (f, h_hat) for s, _ in m.cells
                 for col in s.columns for x in col[:2]})
    strips = list(zip(xs, xs[1:]))
    pool = list(range(6))
    exact = dist_to_image(f, h_hat)
    brute = brute_force_dist_to_image(f, h_hat, strips, pool)
    assert exact == brute


def test_max_strip_probe_distance_additive():
    g_hat = constant_endo(identity_endo(NAT))
    h_hat = constant_endo(successor_endo())
    strips = [(Frac(0), Frac(1, 2)), (Frac(1, 2), Frac(1))]
    total, witness = max_strip_probe_distance(g_hat, h_hat, strips, range(10))
    assert total == 1  # they disagree everywhere on every probe
    d = l1_distance(apply_random_endo(g_hat, witness),
                    apply_random_endo(h_hat, witness))
    assert d == total


def test_max_strip_probe_witness_is_attained():
    h_hat = two_rep_endo()
    g_hat = constant_endo(identity_endo(NAT))
    strips = [(Frac(0), Frac(1, 3)), (Frac(1, 3), Frac(1))]
    total, witness = max_strip_probe_distance(g_hat, h_hat, strips, range(8))
    d = l1_distance(apply_random_endo(g_hat, witness),
                    apply_random_endo(h_hat, witness))
    assert d == total
    # no strip probe over the same alphabet can beat the reported max
    for a in range(8):
        f = StepMap.constant(a)
        assert l1_distance(apply_random_endo(g_hat, f),
                           apply_random_endo(h_hat, f)) <= total


def test_hausdorff_gap_sandwich():
    g_hat = two_rep_endo()
    h_hat = constant_endo(successor_endo())
    gap = hausdorff_gap(g_hat, h_hat, 12)
    assert 0 <= gap.lower <= gap.upper <= 1
    # identical endos have gap exactly zero on both sides
    same = hausdorff_gap(g_hat, g_hat, 12)
    assert same == (0, 0)


def test_hausdorff_upper_dominates_probes():
    g_hat = two_rep_endo()
    h_hat = constant_endo(identity_endo(NAT))
    gap = hausdorff_gap(g_hat, h_hat, 10)
    for a in range(10):
        f = StepMap.constant(a)
        assert l1_distance(apply_random_endo(g_hat, f),
                           apply_random_endo(h_hat, f)) <= gap.upper


def pair(endo, window=80):
    return PairModel(NAT.describe(), window, constant_endo(endo))


def test_certify_identical_pairs_is_free():
    res = certify_epsilon_isomorphism(pair(successor_endo()),
                                      pair(successor_endo()), Frac(1, 100))
    assert res.ok
    assert res.upper == 0


def test_certify_within_budget():
    res = certify_epsilon_isomorphism(pair(identity_endo(NAT)),
                                      pair(successor_endo()), Frac(1, 10))
    assert res.ok
    assert res.upper <= Frac(1, 10)
    assert res.g_hat.cells  # a usable map comes back


def test_certify_structural_mismatch():
    from belle_paire.structures import FqVectors, basis_shift_endo
    p1 = pair(identity_endo(NAT))
    p2 = PairModel(FqVectors(2).describe(), 80,
                   constant_endo(basis_shift_endo(2)))
    with pytest.raises(StructuralMismatch):
        certify_epsilon_isomorphism(p1, p2, Frac(1, 2))


def test_certify_refuses_non_bijection_first_pair():
    res = certify_epsilon_isomorphism(pair(successor_endo()),
                                      pair(identity_endo(NAT)), Frac(1, 4))
    assert isinstance(res, Refusal)
    assert not res.ok


def test_certify_search_backed_refusal():
    from belle_paire.structures import FqVectors, basis_shift_endo
    p1 = PairModel(FqVectors(2).describe(), 40,
                   constant_endo(identity_endo(FqVectors(2))))
    p2 = PairModel(FqVectors(2).describe(), 40,
                   constant_endo(basis_shift_endo(2)))
    ob = {"q": 2, "dim": 2, "grid": 2, "subspace": [(1, 0)]}
    res = certify_epsilon_isomorphism(p1, p2, Frac(1, 4), ob)
    assert isinstance(res, Refusal)
    assert res.evidence["search_gap"] == 1


def test_pair_model_validates_window():
    with pytest.raises(ValueError):
        PairModel("fqvec(2)", 50, constant_endo(successor_endo()))
