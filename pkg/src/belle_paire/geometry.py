"""Finite-geometry counting bounds and a tiny-scale exhaustive gap search.

The symbolic bounds (1/(2n), the delta/k codimension law) are exact
formulas; the search oracle enumerates every grid-constant assignment of
automorphisms at scales small enough to exhaust, and reports the minimal
two-sided image gap as plain data.  No finite run instantiates the
infinite-codimension hypotheses of the theory; the two kinds of output are
kept separate on purpose.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product

from .measure import Frac, RationalSet, _frac
from .structures import GeometrySpec, is_prime

__all__ = [
    "SearchGuardExceeded",
    "closed_set_size",
    "min_k_for_delta",
    "min_k_violations",
    "epsilon_lower_bound",
    "ClosedSetChain",
    "standard_chain",
    "averaging_witness",
    "affine_points",
    "projective_points",
    "subspace_span",
    "gl_matrices",
    "SearchResult",
    "exhaustive_pair_search",
    "exhaustive_pair_search_pure",
]


class SearchGuardExceeded(ValueError):
    """The candidate space is too large to exhaust."""

    def __init__(self, count: int, guard: int):
        self.count = count
        self.guard = guard
        super().__init__(f"{count} candidates exceed the search guard {guard}")


def closed_set_size(geometry: GeometrySpec, d: int) -> int:
    """Points of a d-dimensional closed set: q^d, (q^{d+1}-1)/(q-1), or d."""
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    if geometry.kind == "affine":
        return geometry.q ** d
    if geometry.kind == "projective":
        return (geometry.q ** (d + 1) - 1) // (geometry.q - 1)
    return d


def min_k_for_delta(geometry: GeometrySpec, delta) -> int:
    """Smallest k such that codimension >= k forces |B| <= delta |A|.

    Affine flats shrink by exactly q per codimension, so k is the least
    power with q^-k <= delta; the projective ratio is dominated by the same
    power.  The disintegrated geometry admits no such k: dropping k points
    from a d-point set leaves a fraction (d-k)/d that tends to 1.
    """
    delta = _frac(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie strictly between 0 and 1")
    if geometry.kind == "disintegrated":
        raise ValueError("no uniform codimension bound exists for the "
                         "disintegrated geometry")
    q = geometry.q
    k = 1
    while Frac(1, q ** k) > delta:
        k += 1
    return k


def min_k_violations(geometry: GeometrySpec, delta, k: int,
                     max_dim: int) -> list:
    """Exhaustive check of |B| <= delta |A| over dims <= max_dim.

    Returns (d, codim, ratio) triples that violate the bound; empty means
    the k works everywhere at these scales.
    """
    delta = _frac(delta)
    bad = []
    for d in range(max_dim + 1):
        big = closed_set_size(geometry, d)
        for j in range(k, d + 1):
            small = closed_set_size(geometry, d - j)
            if Fraction(small, big) > delta:
                bad.append((d, j, Fraction(small, big)))
    return bad


def epsilon_lower_bound(n: int, modular: bool) -> Fraction:
    """The distortion floor for n-tuples: 1/(2n), or 1/n when modular."""
    if n < 1:
        raise ValueError("tuple arity must be >= 1")
    return Frac(1, n) if modular else Frac(1, 2 * n)


# --- concrete point enumerations ------------------------------------------

def affine_points(q: int, d: int, ambient: int | None = None) -> frozenset:
    """F_q^d inside F_q^ambient (zero-padded coordinates)."""
    ambient = d if ambient is None else ambient
    assert ambient >= d
    pad = (0,) * (ambient - d)
    return frozenset(tuple(p) + pad for p in iter_product(range(q), repeat=d))


def projective_points(q: int, d: int, ambient: int | None = None) -> frozenset:
    """Lines of F_q^{d+1}, as their first-nonzero-is-1 representatives."""
    ambient = d if ambient is None else ambient
    assert ambient >= d
    pad = (0,) * (ambient - d)
    pts = set()
    for v in iter_product(range(q), repeat=d + 1):
        if any(v):
            lead = next(c for c in v if c)
            inv = pow(lead, q - 2, q)
            pts.add(tuple((c * inv) % q for c in v) + pad)
    return frozenset(pts)


def subspace_span(q: int, gens) -> frozenset:
    """All F_q-combinations of the given coordinate tuples."""
    gens = [tuple(g) for g in gens]
    if not gens:
        return frozenset()
    width = len(gens[0])
    assert all(len(g) == width for g in gens)
    out = set()
    for coeffs in iter_product(range(q), repeat=len(gens)):
        v = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) % q
                  for i in range(width))
        out.add(v)
    return frozenset(out)


@dataclass(frozen=True)
class ClosedSetChain:
    """Nested closed sets with strictly increasing dimension."""

    geometry: GeometrySpec
    sets: tuple  # frozensets of points

    def __post_init__(self):
        if not self.sets:
            raise ValueError("chain must be nonempty")
        dims = [self.dim_of(i) for i in range(len(self.sets))]
        for a, b in zip(self.sets, self.sets[1:]):
            if not a <= b:
                raise ValueError("chain sets must be nested")
        for da, db in zip(dims, dims[1:]):
            if db <= da:
                raise ValueError("chain dimensions must strictly increase")

    def dim_of(self, i: int) -> int:
        size = len(self.sets[i])
        d = 0
        while closed_set_size(self.geometry, d) < size:
            d += 1
        if closed_set_size(self.geometry, d) != size:
            raise ValueError(f"set {i} has size {size}, not a closed-set size")
        return d


def standard_chain(geometry: GeometrySpec, dims, ambient: int) -> ClosedSetChain:
    """The nested coordinate flats of the given dimensions."""
    mk = affine_points if geometry.kind == "affine" else projective_points
    if geometry.kind == "disintegrated":
        sets = tuple(frozenset(range(d)) for d in dims)
    else:
        sets = tuple(mk(geometry.q, d, ambient) for d in dims)
    return ClosedSetChain(geometry, sets)


def averaging_witness(chain: ClosedSetChain, traces, C: RationalSet) -> tuple:
    """The pigeonhole step on concrete data: the least-covered chain point.

    traces lists (cell: RationalSet, R: set of points); the cells must
    partition C.  Returns (chain index, point, exact measure of
    {alpha in C : point in R(alpha)}), minimizing the measure with ties to
    the earliest chain index; the result never exceeds the averaged
    quantity (1/|Q_i|) * integral of |Q_i meet R(alpha)|.
    """
    if not chain.sets:
        raise ValueError("chain must be nonempty")
    traces = [(cell, frozenset(r)) for cell, r in traces]
    acc = RationalSet.empty()
    for cell, _ in traces:
        if not acc.disjoint_from(cell):
            raise ValueError("trace cells overlap")
        acc = acc.union(cell)
    if acc != C:
        raise ValueError("trace cells do not partition C")
    best = None
    for i, qset in enumerate(chain.sets):
        for b in sorted(qset, key=repr):
            m = sum((cell.measure for cell, r in traces if b in r), Frac(0))
            if best is None or m < best[2]:
                best = (i, b, m)
    i, b, m = best
    avg = sum((cell.measure * len(chain.sets[i] & r) for cell, r in traces),
              Frac(0)) / len(chain.sets[i])
    assert m <= avg
    return best


# --- exhaustive tiny-scale search -----------------------------------------

SEARCH_GUARD = 10_000_000


def gl_matrices(dim: int, q: int) -> list:
    """All invertible dim x dim matrices over F_q, in lexicographic order."""
    assert is_prime(q)
    mats = []
    for flat in iter_product(range(q), repeat=dim * dim):
        rows = [list(flat[i * dim:(i + 1) * dim]) for i in range(dim)]
        if _det_nonzero(rows, q):
            mats.append(tuple(tuple(r) for r in rows))
    return mats


def _det_nonzero(rows, q: int) -> bool:
    m = [r[:] for r in rows]
    n = len(m)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] % q), None)
        if piv is None:
            return False
        m[c], m[piv] = m[piv], m[c]
        inv = pow(m[c][c] % q, q - 2, q)
        for i in range(c + 1, n):
            f = (m[i][c] * inv) % q
            if f:
                m[i] = [(a - f * b) % q for a, b in zip(m[i], m[c])]
    return True


def _mat_apply(mat, v, q):
    return tuple(sum(a * b for a, b in zip(row, v)) % q for row in mat)


@dataclass(frozen=True)
class SearchResult:
    gap: Fraction
    candidates_checked: int
    witness: tuple  # per-cell automorphism labels, row-major
    forward: Fraction
    backward: Fraction

    def as_dict(self) -> dict:
        return {"gap": self.gap, "candidates": self.candidates_checked,
                "forward": self.forward, "backward": self.backward}


def _combo_at(idx: int, m: int, g: int) -> tuple:
    """Decode a candidate index into per-column assignment indices."""
    out = [0] * g
    for pos in range(g - 1, -1, -1):
        idx, out[pos] = divmod(idx, m)
    return tuple(out)


def _chunk_best(per, grid: int, start: int, stop: int):
    """Best (gap, index, fwd, bwd) over a contiguous candidate range."""
    m = len(per)
    best = None
    for idx in range(start, stop):
        combo = _combo_at(idx, m, grid)
        f = sum((per[c][0] for c in combo), Frac(0)) / grid
        w = sum((per[c][1] for c in combo), Frac(0)) / grid
        gap = max(f, w)
        if best is None or gap < best[0]:
            best = (gap, idx, f, w)
    return best


def _min_grid_gap(cells_options, grid: int, points, targets, apply_fn,
                  jobs: int = 1):
    """Shared search core: minimize the two-sided gap over cell assignments.

    cells_options: list of automorphism labels usable in every cell;
    points: the probe alphabet; targets: the comparison alphabet; apply_fn:
    (label, point) -> point.  Columns are independent, so per-column data
    is computed once and candidates are scanned as index tuples; ties go to
    the lowest index, so the result is deterministic for any jobs count.
    """
    count = len(cells_options) ** (grid * grid)
    if count > SEARCH_GUARD:
        raise SearchGuardExceeded(count, SEARCH_GUARD)
    # one column = grid rows; enumerate its assignments once
    col_assignments = list(iter_product(cells_options, repeat=grid))
    per = []  # (forward_j, backward_j) minima per assignment
    for rows in col_assignments:
        fwd = max(min(Fraction(sum(apply_fn(g, a) != b for g in rows), grid)
                      for b in targets) for a in points)
        bwd = max(min(Fraction(sum(apply_fn(g, a) != b for g in rows), grid)
                      for a in points) for b in targets)
        per.append((fwd, bwd))
    total = len(col_assignments) ** grid
    if jobs > 1 and total > jobs:
        from concurrent.futures import ProcessPoolExecutor
        step = -(-total // jobs)
        spans = [(s, min(s + step, total)) for s in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_chunk_best, [per] * len(spans),
                                    [grid] * len(spans),
                                    [s for s, _ in spans],
                                    [t for _, t in spans]))
        best = min(r for r in results if r is not None)
    else:
        best = _chunk_best(per, grid, 0, total)
    gap, idx, f, w = best
    witness = tuple(col_assignments[c]
                    for c in _combo_at(idx, len(col_assignments), grid))
    return SearchResult(gap, count, witness, f, w)


def exhaustive_pair_search(q: int, dim: int, grid: int, subspace_gens,
                           jobs: int = 1) -> SearchResult:
    """Minimal two-sided image gap over all grid-constant automorphism maps.

    Probes are V-constants per omega strip; the comparison class is
    W-valued strips for W spanned by subspace_gens.  Exact rationals; the
    result is reported as searched data at this scale, not as an instance
    of any infinite-dimensional statement.
    """
    points = sorted(iter_product(range(q), repeat=dim))
    wset = subspace_span(q, [tuple(g) for g in subspace_gens])
    if not wset:
        raise ValueError("subspace must contain at least the origin")
    mats = gl_matrices(dim, q)
    return _min_grid_gap(mats, grid, points, sorted(wset),
                         lambda m, v: _mat_apply(m, v, q), jobs)


def exhaustive_pair_search_pure(m: int, grid: int, subset_size: int,
                                jobs: int = 1) -> SearchResult:
    """Pure-set analogue on [0,m): candidates Sym(m), targets [0,subset_size)."""
    if not 0 < subset_size <= m:
        raise ValueError("subset must be a nonempty part of the carrier")
    from itertools import permutations
    perms = [tuple(p) for p in permutations(range(m))]
    return _min_grid_gap(perms, grid, list(range(m)),
                         list(range(subset_size)), lambda p, a: p[a], jobs)
