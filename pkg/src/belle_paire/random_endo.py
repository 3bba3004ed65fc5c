"""Random endomorphisms and elementary pairs of randomized structures.

A random endomorphism is a StepMap whose values are injections of one shared
carrier; it acts on carrier-valued step maps cellwise on the common
refinement.  This module provides that action, factorization through orbit
representatives, approximation by automorphism-valued maps with an exact
certified error bound, and two-sided Hausdorff-type distance estimates
between the images of two random endomorphisms.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import NamedTuple

from .measure import (Frac, Profile, RationalSet, StepMap, _frac,
                      common_refinement, l1_distance, slice_profile,
                      vertical_split)
from .structures import (Domain, IdentityInjection, TableInjection,
                         WindowInjection, window_permutation)
from .approx import OrbitClassifier, approximate_by_automorphisms, defect_profile

__all__ = [
    "NoRepresentativeMatch",
    "StructuralMismatch",
    "validate_random_endo",
    "constant_endo",
    "endos_agree_on_window",
    "apply_random_endo",
    "compose_random_endos",
    "OrbitReduction",
    "orbit_reduce",
    "BudgetLine",
    "ApproximationCertificate",
    "approximate_random_endo",
    "dist_to_image",
    "brute_force_dist_to_image",
    "max_strip_probe_distance",
    "GapBounds",
    "hausdorff_gap",
    "PairModel",
    "Certificate",
    "Refusal",
    "certify_epsilon_isomorphism",
]


class NoRepresentativeMatch(ValueError):
    """No representative factors the cell's value on the window."""

    def __init__(self, support: RationalSet, description: str):
        self.support = support
        self.value_description = description
        super().__init__(f"no representative factors {description} on the window")


class StructuralMismatch(ValueError):
    """The two pair models do not share an ambient presentation."""


def validate_random_endo(m: StepMap) -> Domain:
    """Check all cell values are injections of one carrier; return it."""
    vals = m.values()
    if not all(isinstance(v, WindowInjection) for v in vals):
        raise ValueError("random endo values must be window injections")
    dom = vals[0].domain
    if any(v.domain != dom for v in vals):
        raise StructuralMismatch("random endo values live on mismatched carriers")
    return dom


def constant_endo(h: WindowInjection) -> StepMap:
    return StepMap.constant(h)


def endos_agree_on_window(a_hat: StepMap, b_hat: StepMap, window: int) -> bool:
    """Cellwise pointwise agreement on the window (weaker than equality)."""
    pts = validate_random_endo(a_hat).window(window)
    return all(g.apply_window(pts) == h.apply_window(pts)
               for _, (g, h) in common_refinement([a_hat, b_hat]))


def apply_random_endo(h_hat: StepMap, f: StepMap) -> StepMap:
    """(h_hat f)(x) = h_hat(x)(f(x)) on the common refinement."""
    validate_random_endo(h_hat)
    return StepMap([(s, h.apply(a))
                    for s, (h, a) in common_refinement([h_hat, f])])


def compose_random_endos(outer: StepMap, inner: StepMap) -> StepMap:
    """Cellwise composition; acting with the result equals acting twice."""
    dom = validate_random_endo(outer)
    if validate_random_endo(inner) != dom:
        raise ValueError("random endo values live on mismatched carriers")
    return StepMap([(s, g.compose(h))
                    for s, (g, h) in common_refinement([outer, inner])])


def _factor_through(h: WindowInjection, rep: WindowInjection,
                    window: int) -> WindowInjection | None:
    """A window bijection g with g . rep = h on [0,window), if one exists.

    The matched part sends rep(x) to h(x); window points missed by rep are
    matched, in enumeration order, to the points missed by h, which squares
    the table into a finite-support permutation.  Identity tables collapse
    to the identity injection.
    """
    pts = h.domain.window(window)
    him = h.apply_window(pts)
    rim = rep.apply_window(pts)
    if len(set(rim)) != len(rim) or len(set(him)) != len(him):
        return None
    table = {}
    for r, v in zip(rim, him):
        if r in table and table[r] != v:
            return None
        table[r] = v
    rset, hset = set(rim), set(him)
    spare_targets = [r for r in rim if r not in hset]
    extra_sources = [v for v in him if v not in rset]
    for src, tgt in zip(extra_sources, spare_targets):
        table[src] = tgt
    table = {x: y for x, y in table.items() if x != y}
    if not table:
        return IdentityInjection(h.domain)
    if set(table) != set(table.values()):
        return None
    g = window_permutation(h.domain, table)
    assert all(g.apply(r) == v for r, v in zip(rim, him))
    return g


@dataclass(frozen=True)
class OrbitReduction:
    """h_hat = g_hat . (reps o assignment) cellwise on the window."""

    g_hat: StepMap       # window-bijection valued
    assignment: StepMap  # representative index valued
    reps: tuple
    window: int

    def reconstruct(self) -> StepMap:
        rep_endo = self.assignment.map_values(lambda k: self.reps[k])
        return compose_random_endos(self.g_hat, rep_endo)


def orbit_reduce(h_hat: StepMap, reps: list, window: int) -> OrbitReduction:
    """Factor every cell value through a representative.

    Representatives agreeing with the value on the whole window win first
    (their twist is the identity); otherwise the lowest-index rep admitting
    any window factorization is used.  Without the first pass every
    window-injective value would factor through the first injective rep and
    the error budget would be charged needlessly.
    """
    validate_random_endo(h_hat)
    reps = list(reps)
    pts = None
    rep_ims = []
    g_cells = []
    a_cells = []
    for s, h in h_hat.cells:
        if pts is None:
            pts = h.domain.window(window)
            rep_ims = [r.apply_window(pts) for r in reps]
        him = h.apply_window(pts)
        choice = next((k for k, rim in enumerate(rep_ims) if rim == him), None)
        if choice is not None:
            g_cells.append((s, IdentityInjection(h.domain)))
            a_cells.append((s, choice))
            continue
        for k, rep in enumerate(reps):
            g = _factor_through(h, rep, window)
            if g is not None:
                g_cells.append((s, g))
                a_cells.append((s, k))
                break
        else:
            raise NoRepresentativeMatch(s, h.description)
    return OrbitReduction(StepMap(g_cells), StepMap(a_cells), tuple(reps), window)


@dataclass(frozen=True)
class BudgetLine:
    """Accounting for one representative's share of the approximation error."""

    rep_index: int
    rep_description: str
    measure: Fraction
    max_defect: int
    pieces: int
    contribution: Fraction


@dataclass(frozen=True)
class ApproximationCertificate:
    """Automorphism-valued approximant with its exact certified bound.

    The bound covers every vertical-strip probe whose values lie in the
    stated window alphabet: l1_distance(g_hat(f), target(f)) <= bound <= eps.
    """

    g_hat: StepMap
    bound: Fraction
    eps: Fraction
    window: int
    lines: tuple
    reduction: OrbitReduction


def approximate_random_endo(h_hat: StepMap, reps, eps, window: int,
                            ) -> ApproximationCertificate:
    """Approximate a random endomorphism by an automorphism-valued one.

    With reps=None every distinct cell value serves as its own
    representative.  Each representative pays for its defect by splitting
    its region into n_k slice-proportional pieces with max_defect_k/n_k <=
    eps; the total certified error is the measure-weighted sum of those
    ratios.
    """
    eps = _frac(eps)
    if eps <= 0:
        raise ValueError("eps must be a positive rational")
    if reps is None:
        reps = list(dict.fromkeys(h_hat.values()))
    red = orbit_reduce(h_hat, reps, window)
    out_cells = []
    lines = []
    for k, rep in enumerate(red.reps):
        region = red.assignment.support_of(k)
        if region.is_empty:
            continue
        cls = OrbitClassifier(rep)
        base = defect_profile(rep, approximate_by_automorphisms(rep, 1, cls),
                              window)
        defect = base.max_defect
        if defect == 0:
            # the rep is already a window automorphism; keep it as is
            n_k = 1
            sigmas = [rep]
        else:
            # smallest n with defect/n <= eps
            n_k = -(-defect * eps.denominator // eps.numerator)
            sigmas = approximate_by_automorphisms(rep, n_k, cls)
        pieces = vertical_split(region, [Frac(1, n_k)] * n_k)
        for piece, sigma in zip(pieces, sigmas):
            for s, g in red.g_hat.cells:
                part = s.intersect(piece)
                if not part.is_empty:
                    out_cells.append((part, g.compose(sigma)))
        lines.append(BudgetLine(k, rep.description, region.measure, defect,
                                n_k, region.measure * Frac(defect, n_k)))
    bound = sum((ln.contribution for ln in lines), Frac(0))
    assert bound <= eps
    return ApproximationCertificate(StepMap(out_cells), bound, eps, window,
                                    tuple(lines), red)


def _omega_intervals(pieces) -> list:
    xs = sorted({x for s, _ in pieces for lo, hi, _ in s.columns
                 for x in (lo, hi)} | {Frac(0), Frac(1)})
    return list(zip(xs, xs[1:]))


def dist_to_image(f: StepMap, h_hat: StepMap) -> Fraction:
    """Exact distance from f to the image class of h_hat.

    Equals the infimum over all first-coordinate-only g of
    l1_distance(f, h_hat(g)): an optimal g may be normalized, on each omega
    interval of the common refinement, to a preimage of one of f's values or
    to a point mapped outside f's alphabet by every cell value.
    """
    dom = validate_random_endo(h_hat)
    pieces = common_refinement([f, h_hat])
    alphabet = set(f.values())
    hs = list(dict.fromkeys(h for _, (_, h) in pieces))
    candidates = []
    seen = set()
    for h in hs:
        for v in alphabet:
            a = h.preimage(v)
            if a is not None and a not in seen:
                seen.add(a)
                candidates.append(a)
    for x in dom.iter_points():
        if x not in seen and all(h.apply(x) not in alphabet for h in hs):
            candidates.append(x)
            break
    total = Frac(0)
    for lo, hi in _omega_intervals(pieces):
        width = hi - lo
        mid = lo  # slices are constant on refinement intervals
        best = Frac(0)
        for a in candidates:
            cover = Frac(0)
            for s, (fv, h) in pieces:
                if h.apply(a) == fv:
                    ys = s.slice_at(mid)
                    cover += sum((d - c for c, d in ys), Frac(0))
            if cover > best:
                best = cover
        total += width * (1 - best)
    return total


def brute_force_dist_to_image(f: StepMap, h_hat: StepMap, strips: list,
                              pool: list) -> Fraction:
    """Oracle: minimize l1_distance(f, h_hat(g)) over all strip maps g.

    g ranges over every assignment of pool values to the given omega strips;
    feasible only for tiny pools and strip counts.
    """
    best = None
    for combo in iter_product(pool, repeat=len(strips)):
        g = StepMap.from_vertical_strips(
            (lo, hi, v) for (lo, hi), v in zip(strips, combo))
        d = l1_distance(f, apply_random_endo(h_hat, g))
        if best is None or d < best:
            best = d
    return best


def max_strip_probe_distance(g_hat: StepMap, h_hat: StepMap, strips: list,
                             alphabet: list) -> tuple:
    """Exact max of l1_distance(g_hat(f), h_hat(f)) over all strip probes f.

    Probes assign one alphabet value per strip; the distance is additive
    across strips, so the maximum is the sum of per-strip worst cases.
    Returns (max distance, witness probe).
    """
    pieces = common_refinement([g_hat, h_hat])
    strip_mass = []
    for s, _ in pieces:
        row = []
        for lo, hi in strips:
            row.append(s.intersect(RationalSet.vertical_strip(lo, hi)).measure)
        strip_mass.append(row)
    total = Frac(0)
    witness = []
    for j, (lo, hi) in enumerate(strips):
        best, best_a = Frac(0), alphabet[0]
        for a in alphabet:
            d = Frac(0)
            for (s, (g, h)), row in zip(pieces, strip_mass):
                if row[j] and g.apply(a) != h.apply(a):
                    d += row[j]
            if d > best:
                best, best_a = d, a
        total += best
        witness.append((lo, hi, best_a))
    return total, StepMap.from_vertical_strips(witness)


class GapBounds(NamedTuple):
    upper: Fraction
    lower: Fraction


def hausdorff_gap(g_hat: StepMap, h_hat: StepMap, alphabet,
                  probes: list | None = None) -> GapBounds:
    """Two-sided estimate of the Hausdorff distance between the images.

    upper integrates, over omega, the worst per-alphabet-point disagreement
    slice; this dominates l1_distance(g_hat(f), h_hat(f)) for every strip
    probe f over the alphabet, hence bounds the (alphabet-relative)
    Hausdorff distance from above.  lower is the best probe-certified
    distance to the other image, a true lower bound.
    """
    dom = validate_random_endo(g_hat)
    if validate_random_endo(h_hat) != dom:
        raise StructuralMismatch("carriers differ")
    if isinstance(alphabet, int):
        alphabet = dom.window(alphabet)
    pieces = common_refinement([g_hat, h_hat])
    profiles = []
    for a in alphabet:
        bad = RationalSet.empty()
        for s, (g, h) in pieces:
            if g.apply(a) != h.apply(a):
                bad = bad.union(s)
        profiles.append(slice_profile(bad))
    xs = sorted(set().union(*[p.breakpoints() for p in profiles]) | {Frac(0), Frac(1)})
    upper = Frac(0)
    for lo, hi in zip(xs, xs[1:]):
        upper += (hi - lo) * max((p.at(lo) for p in profiles), default=Frac(0))
    lower = Frac(0)
    all_probes = [StepMap.constant(a) for a in alphabet] + list(probes or [])
    for f in all_probes:
        lower = max(lower,
                    dist_to_image(apply_random_endo(g_hat, f), h_hat),
                    dist_to_image(apply_random_endo(h_hat, f), g_hat))
    return GapBounds(upper, lower)


@dataclass(frozen=True)
class PairModel:
    """An ambient randomized structure with a designated submodel image."""

    structure: str
    window: int
    image: StepMap

    def __post_init__(self):
        dom = validate_random_endo(self.image)
        if dom.describe() != self.structure:
            raise ValueError(
                f"image lives on {dom.describe()}, not {self.structure}")
        for v in self.image.values():
            v.validate_window(self.window)

    @property
    def domain(self) -> Domain:
        return validate_random_endo(self.image)


@dataclass(frozen=True)
class Certificate:
    g_hat: StepMap
    upper: Fraction
    eps: Fraction
    window: int
    lines: tuple

    @property
    def ok(self) -> bool:
        return self.upper <= self.eps


@dataclass(frozen=True)
class Refusal:
    reason: str
    eps: Fraction
    evidence: dict

    ok = False


def certify_epsilon_isomorphism(pair1: PairModel, pair2: PairModel, eps,
                                obstruction: dict | None = None):
    """Certificate g_hat with gap(g_hat . image1, image2) <= eps, or a refusal.

    With an obstruction descriptor (tiny vector-space scale), an exhaustive
    search over grid certificates runs first; a searched minimal gap above
    eps refuses honestly at that scale.
    """
    eps = _frac(eps)
    if eps <= 0:
        raise ValueError("eps must be a positive rational")
    if (pair1.structure, pair1.window) != (pair2.structure, pair2.window):
        raise StructuralMismatch(
            f"{pair1.structure}@{pair1.window} vs {pair2.structure}@{pair2.window}")
    if obstruction is not None:
        from .geometry import exhaustive_pair_search
        res = exhaustive_pair_search(obstruction["q"], obstruction["dim"],
                                     obstruction["grid"],
                                     obstruction["subspace"])
        if res.gap > eps:
            return Refusal(
                "exhaustive search at the stated scale: no grid certificate "
                f"achieves gap <= {eps} (minimum is {res.gap})",
                eps, {"search_gap": res.gap,
                      "candidates": res.candidates_checked})
    if pair1.image == pair2.image:
        ident = constant_endo(IdentityInjection(pair1.domain))
        return Certificate(ident, Frac(0), eps, pair1.window, ())
    if not all(v.is_bijection for v in pair1.image.values()):
        return Refusal("the first pair's image is not presented by "
                       "bijections, so it cannot be peeled off", eps, {})
    approx = approximate_random_endo(pair2.image, None, eps, pair1.window)
    inv1 = pair1.image.map_values(lambda v: v.inverse())
    g_hat = compose_random_endos(approx.g_hat, inv1)
    gap = hausdorff_gap(approx.g_hat, pair2.image, pair1.window)
    if gap.upper > eps:
        return Refusal("approximation exists but its certified gap "
                       f"{gap.upper} exceeds {eps}", eps,
                       {"upper": gap.upper, "lower": gap.lower})
    return Certificate(g_hat, gap.upper, eps, pair1.window, approx.lines)
