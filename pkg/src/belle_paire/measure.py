"""Exact rational geometry on the half-open unit square.

Every set here is a finite union of half-open rectangles [a,b) x [c,d) with
rational corners, kept in a canonical column form so that equality, measure
and the boolean operations are exact and decidable.  The two coordinates are
called omega (first) and omega' (second) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Callable, Iterable, Sequence

__all__ = [
    "Frac",
    "Rect",
    "RationalSet",
    "Profile",
    "StepMap",
    "DensityMismatch",
    "common_refinement",
    "l1_distance",
    "slice_profile",
    "vertical_split",
    "density_split",
]

Frac = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def _frac(x) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings; floats are rejected."""
    if isinstance(x, float):
        raise ValueError(f"floating point input rejected, use exact rationals: {x!r}")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class Rect:
    """Half-open box [x0,x1) x [y0,y1) inside the unit square, never empty."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    def __post_init__(self):
        assert ZERO <= self.x0 < self.x1 <= ONE, "bad omega interval"
        assert ZERO <= self.y0 < self.y1 <= ONE, "bad omega-prime interval"

    @property
    def area(self) -> Fraction:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, x, y) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1


# A "ys" value is a sorted tuple of disjoint, non-touching (c, d) intervals.

def _merge_ys(ivs) -> tuple:
    ivs = sorted(iv for iv in ivs if iv[0] < iv[1])
    out: list[list] = []
    for c, d in ivs:
        if out and c <= out[-1][1]:
            if d > out[-1][1]:
                out[-1][1] = d
        else:
            out.append([c, d])
    return tuple((c, d) for c, d in out)


def _ys_intersect(a, b) -> tuple:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def _ys_subtract(a, b) -> tuple:
    out = []
    bi = 0
    for lo, hi in a:
        cur = lo
        while bi < len(b) and b[bi][1] <= cur:
            bi += 1
        k = bi
        while k < len(b) and b[k][0] < hi:
            c, d = b[k]
            if c > cur:
                out.append((cur, c))
            cur = max(cur, d)
            if cur >= hi:
                break
            k += 1
        if cur < hi:
            out.append((cur, hi))
    return tuple(out)


def _ys_union(a, b) -> tuple:
    return _merge_ys(list(a) + list(b))


def _ys_total(ys) -> Fraction:
    return sum((d - c for c, d in ys), ZERO)


def _normalize_columns(cols) -> tuple:
    """Fuse consecutive columns that touch and carry the same slice."""
    out: list[list] = []
    for lo, hi, ys in cols:
        if not ys:
            continue
        if out and out[-1][1] == lo and out[-1][2] == ys:
            out[-1][1] = hi
        else:
            out.append([lo, hi, ys])
    return tuple((lo, hi, ys) for lo, hi, ys in out)


def _column_combine(cols_a, cols_b, yop: Callable) -> tuple:
    xs = sorted({x for c in cols_a for x in (c[0], c[1])}
                | {x for c in cols_b for x in (c[0], c[1])})
    out = []
    ai = bi = 0
    for lo, hi in zip(xs, xs[1:]):
        while ai < len(cols_a) and cols_a[ai][1] <= lo:
            ai += 1
        while bi < len(cols_b) and cols_b[bi][1] <= lo:
            bi += 1
        ya = cols_a[ai][2] if ai < len(cols_a) and cols_a[ai][0] <= lo else ()
        yb = cols_b[bi][2] if bi < len(cols_b) and cols_b[bi][0] <= lo else ()
        ys = yop(ya, yb)
        if ys:
            out.append((lo, hi, ys))
    return _normalize_columns(out)


class RationalSet:
    """Finite union of half-open rational rectangles, canonical and immutable.

    The canonical form slices the set into maximal omega columns on which the
    omega' slice is constant; equal sets always compare equal.
    """

    __slots__ = ("_cols", "_measure", "_hash")

    def __init__(self, _columns=()):
        # internal: trusted canonical columns; use the classmethods instead
        self._cols = _columns
        self._measure = None
        self._hash = None

    @classmethod
    def empty(cls) -> "RationalSet":
        return cls(())

    @classmethod
    def unit_square(cls) -> "RationalSet":
        return cls(((ZERO, ONE, ((ZERO, ONE),)),))

    @classmethod
    def from_rect(cls, x0, x1, y0, y1) -> "RationalSet":
        x0, x1, y0, y1 = map(_frac, (x0, x1, y0, y1))
        if x0 >= x1 or y0 >= y1:
            return cls.empty()
        return cls.from_rects([Rect(x0, x1, y0, y1)])

    @classmethod
    def from_rects(cls, rects: Iterable[Rect]) -> "RationalSet":
        """Union of the given rectangles (overlaps are allowed and fused)."""
        rects = list(rects)
        xs = sorted({x for r in rects for x in (r.x0, r.x1)})
        cols = []
        for lo, hi in zip(xs, xs[1:]):
            ys = _merge_ys([(r.y0, r.y1) for r in rects
                            if r.x0 <= lo and r.x1 >= hi])
            if ys:
                cols.append((lo, hi, ys))
        return cls(_normalize_columns(cols))

    @classmethod
    def vertical_strip(cls, x0, x1) -> "RationalSet":
        return cls.from_rect(x0, x1, 0, 1)

    @classmethod
    def horizontal_strip(cls, y0, y1) -> "RationalSet":
        return cls.from_rect(0, 1, y0, y1)

    @property
    def columns(self) -> tuple:
        return self._cols

    @property
    def rects(self) -> tuple:
        return tuple(Rect(lo, hi, c, d)
                     for lo, hi, ys in self._cols for c, d in ys)

    @property
    def measure(self) -> Fraction:
        if self._measure is None:
            self._measure = sum(((hi - lo) * _ys_total(ys)
                                 for lo, hi, ys in self._cols), ZERO)
        return self._measure

    @property
    def is_empty(self) -> bool:
        return not self._cols

    def union(self, other: "RationalSet") -> "RationalSet":
        return RationalSet(_column_combine(self._cols, other._cols, _ys_union))

    def intersect(self, other: "RationalSet") -> "RationalSet":
        return RationalSet(_column_combine(self._cols, other._cols, _ys_intersect))

    def subtract(self, other: "RationalSet") -> "RationalSet":
        return RationalSet(_column_combine(self._cols, other._cols, _ys_subtract))

    def complement(self) -> "RationalSet":
        return RationalSet.unit_square().subtract(self)

    def disjoint_from(self, other: "RationalSet") -> bool:
        return self.intersect(other).is_empty

    def contains_point(self, x, y) -> bool:
        x, y = _frac(x), _frac(y)
        for lo, hi, ys in self._cols:
            if lo <= x < hi:
                return any(c <= y < d for c, d in ys)
        return False

    def slice_at(self, x) -> tuple:
        """The omega' slice over a single omega value, as a ys tuple."""
        x = _frac(x)
        for lo, hi, ys in self._cols:
            if lo <= x < hi:
                return ys
        return ()

    def omega_shadow(self) -> tuple:
        """Omega intervals over which the slice is nonempty."""
        iv = [(lo, hi) for lo, hi, _ in self._cols]
        out: list[list] = []
        for lo, hi in iv:
            if out and out[-1][1] == lo:
                out[-1][1] = hi
            else:
                out.append([lo, hi])
        return tuple((lo, hi) for lo, hi in out)

    def __eq__(self, other):
        return isinstance(other, RationalSet) and self._cols == other._cols

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._cols)
        return self._hash

    def __bool__(self):
        return not self.is_empty

    def __repr__(self):
        if self.is_empty:
            return "RationalSet.empty()"
        parts = ", ".join(f"[{r.x0},{r.x1})x[{r.y0},{r.y1})" for r in self.rects)
        return f"RationalSet({parts})"


class Profile:
    """Piecewise-constant rational function on [0,1), zero off its pieces."""

    __slots__ = ("_pieces",)

    def __init__(self, pieces: Iterable = ()):
        cleaned = []
        for x0, x1, v in pieces:
            x0, x1, v = _frac(x0), _frac(x1), _frac(v)
            if not (ZERO <= x0 <= x1 <= ONE):
                raise ValueError(f"profile piece outside [0,1): [{x0},{x1})")
            if x0 < x1 and v != 0:
                cleaned.append((x0, x1, v))
        cleaned.sort()
        for (a0, a1, _), (b0, _, _) in zip(cleaned, cleaned[1:]):
            if b0 < a1:
                raise ValueError("profile pieces overlap")
        out: list[list] = []
        for x0, x1, v in cleaned:
            if out and out[-1][1] == x0 and out[-1][2] == v:
                out[-1][1] = x1
            else:
                out.append([x0, x1, v])
        self._pieces = tuple((x0, x1, v) for x0, x1, v in out)

    @classmethod
    def constant(cls, v) -> "Profile":
        return cls([(ZERO, ONE, _frac(v))])

    @property
    def pieces(self) -> tuple:
        return self._pieces

    def at(self, x) -> Fraction:
        x = _frac(x)
        for x0, x1, v in self._pieces:
            if x0 <= x < x1:
                return v
        return ZERO

    def breakpoints(self) -> set:
        return {x for x0, x1, _ in self._pieces for x in (x0, x1)}

    def integral(self) -> Fraction:
        return sum(((x1 - x0) * v for x0, x1, v in self._pieces), ZERO)

    def integral_over(self, intervals) -> Fraction:
        """Integrate over a finite list of disjoint omega intervals."""
        total = ZERO
        for lo, hi in intervals:
            lo, hi = _frac(lo), _frac(hi)
            for x0, x1, v in self._pieces:
                a, b = max(lo, x0), min(hi, x1)
                if a < b:
                    total += (b - a) * v
        return total

    def scale(self, c) -> "Profile":
        c = _frac(c)
        return Profile([(x0, x1, v * c) for x0, x1, v in self._pieces])

    def add(self, other: "Profile") -> "Profile":
        xs = sorted(self.breakpoints() | other.breakpoints())
        pieces = []
        for lo, hi in zip(xs, xs[1:]):
            pieces.append((lo, hi, self.at(lo) + other.at(lo)))
        return Profile(pieces)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for _, _, v in self._pieces)

    def __eq__(self, other):
        return isinstance(other, Profile) and self._pieces == other._pieces

    def __hash__(self):
        return hash(self._pieces)

    def __repr__(self):
        return f"Profile({list(self._pieces)!r})"


def slice_profile(s: RationalSet) -> Profile:
    """The map omega -> measure of the omega' slice of s."""
    return Profile([(lo, hi, _ys_total(ys)) for lo, hi, ys in s.columns])


def vertical_split(s: RationalSet, weights: Sequence) -> list[RationalSet]:
    """Split s into parts taking prescribed fractions of every omega slice.

    Each rectangle's omega' interval is cut proportionally, so for every
    omega the slice of part i has measure weights[i] times the slice of s.
    """
    ws = [_frac(w) for w in weights]
    if any(w < 0 for w in ws):
        raise ValueError("weights must be nonnegative")
    if sum(ws, ZERO) != 1:
        raise ValueError("weights must sum to 1")
    cuts = [ZERO] + list(accumulate(ws))
    parts = []
    for c0, c1 in zip(cuts, cuts[1:]):
        rects = []
        for lo, hi, ys in s.columns:
            for c, d in ys:
                h = d - c
                y0, y1 = c + h * c0, c + h * c1
                if y0 < y1:
                    rects.append(Rect(lo, hi, y0, y1))
        parts.append(RationalSet.from_rects(rects))
    return parts


class DensityMismatch(ValueError):
    """Density sum disagrees with the slice profile on some omega interval."""

    def __init__(self, lo, hi, expected, got):
        self.interval = (lo, hi)
        self.expected = expected
        self.got = got
        super().__init__(
            f"densities sum to {got} but the slice measures {expected} on "
            f"[{lo},{hi})")


def density_split(s: RationalSet, densities: Sequence) -> list[RationalSet]:
    """Split s into parts whose omega slices have prescribed step densities.

    densities may be Profiles or first-coordinate-only StepMaps with rational
    values; they must be nonnegative and sum, at every omega, to the slice
    measure of s exactly.
    """
    profs = [d if isinstance(d, Profile) else d.to_profile() for d in densities]
    for p in profs:
        if not p.is_nonnegative():
            raise ValueError("densities must be nonnegative")
    xs = sorted({x for lo, hi, _ in s.columns for x in (lo, hi)}
                | set().union(*[p.breakpoints() for p in profs])
                | {ZERO, ONE})
    parts_rects: list[list[Rect]] = [[] for _ in profs]
    for lo, hi in zip(xs, xs[1:]):
        ys = s.slice_at(lo)
        height = _ys_total(ys)
        vals = [p.at(lo) for p in profs]
        if sum(vals, ZERO) != height:
            raise DensityMismatch(lo, hi, height, sum(vals, ZERO))
        # stack the slice intervals and cut off each density's share in turn
        stack = list(ys)
        si = 0
        cur = stack[0][0] if stack else None
        for q, need in enumerate(vals):
            while need > 0:
                c, d = stack[si]
                take = min(need, d - cur)
                parts_rects[q].append(Rect(lo, hi, cur, cur + take))
                cur += take
                need -= take
                if cur == d and si + 1 < len(stack):
                    si += 1
                    cur = stack[si][0]
    return [RationalSet.from_rects(rs) for rs in parts_rects]


class StepMap:
    """Finite-valued measurable map on the unit square with rectangular cells.

    Cells partition the square exactly; equal-valued cells are fused and the
    whole object is canonically ordered, so equal maps compare equal.  Values
    must be hashable.
    """

    __slots__ = ("_cells", "_hash")

    def __init__(self, cells: Iterable):
        by_value: dict = {}
        order: list = []
        for s, v in cells:
            if not isinstance(s, RationalSet):
                raise ValueError("cell supports must be RationalSet")
            if s.is_empty:
                continue
            if v in by_value:
                by_value[v] = by_value[v].union(s)
            else:
                by_value[v] = s
                order.append(v)
        merged = [(by_value[v], v) for v in order]
        total = sum((s.measure for s, _ in merged), ZERO)
        if total != 1:
            raise ValueError(f"cells measure {total}, expected 1")
        for i, (a, _) in enumerate(merged):
            for b, _ in merged[i + 1:]:
                if not a.disjoint_from(b):
                    raise ValueError("cells overlap")
        merged.sort(key=lambda cv: cv[0].columns[0][:2] + cv[0].columns[0][2][0])
        self._cells = tuple(merged)
        self._hash = None

    @classmethod
    def constant(cls, value) -> "StepMap":
        return cls([(RationalSet.unit_square(), value)])

    @classmethod
    def from_vertical_strips(cls, strips: Iterable) -> "StepMap":
        return cls([(RationalSet.vertical_strip(x0, x1), v)
                    for x0, x1, v in strips])

    @classmethod
    def from_horizontal_strips(cls, strips: Iterable) -> "StepMap":
        return cls([(RationalSet.horizontal_strip(y0, y1), v)
                    for y0, y1, v in strips])

    @classmethod
    def uniform_strips(cls, values: Sequence) -> "StepMap":
        """Vertical strips of equal width carrying the given values."""
        n = len(values)
        return cls.from_vertical_strips(
            (Fraction(i, n), Fraction(i + 1, n), v) for i, v in enumerate(values))

    @property
    def cells(self) -> tuple:
        return self._cells

    def values(self) -> tuple:
        return tuple(v for _, v in self._cells)

    def value_at(self, x, y):
        for s, v in self._cells:
            if s.contains_point(x, y):
                return v
        raise AssertionError("cells do not cover the square")  # unreachable

    @property
    def is_first_coordinate_only(self) -> bool:
        full = ((ZERO, ONE),)
        return all(ys == full for s, _ in self._cells for _, _, ys in s.columns)

    def to_profile(self) -> Profile:
        """Read a first-coordinate-only rational-valued map as a Profile."""
        if not self.is_first_coordinate_only:
            raise ValueError("step map depends on the second coordinate")
        pieces = []
        for s, v in self._cells:
            for lo, hi, _ in s.columns:
                pieces.append((lo, hi, _frac(v)))
        return Profile(pieces)

    def map_values(self, fn: Callable) -> "StepMap":
        return StepMap([(s, fn(v)) for s, v in self._cells])

    def support_of(self, value) -> RationalSet:
        for s, v in self._cells:
            if v == value:
                return s
        return RationalSet.empty()

    def __eq__(self, other):
        return isinstance(other, StepMap) and self._cells == other._cells

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._cells)
        return self._hash

    def __repr__(self):
        return f"StepMap({len(self._cells)} cells, values={self.values()!r})"


def common_refinement(maps: Sequence[StepMap]) -> list[tuple]:
    """Shared partition on which every input map is constant.

    Returns (support, values) pairs where values[k] is the k-th map's value
    on the support; pieces with identical value tuples are fused, so the cell
    count never exceeds the product of the input cell counts.
    """
    if not maps:
        return [(RationalSet.unit_square(), ())]
    acc = [(s, (v,)) for s, v in maps[0].cells]
    for m in maps[1:]:
        nxt: dict = {}
        order = []
        for s, vt in acc:
            for t, v in m.cells:
                piece = s.intersect(t)
                if piece.is_empty:
                    continue
                key = vt + (v,)
                if key in nxt:
                    nxt[key] = nxt[key].union(piece)
                else:
                    nxt[key] = piece
                    order.append(key)
        acc = [(nxt[k], k) for k in order]
    acc.sort(key=lambda cv: cv[0].columns[0][:2] + cv[0].columns[0][2][0])
    return acc


def l1_distance(f: StepMap, g: StepMap) -> Fraction:
    """Measure of the set where f and g disagree; a metric on step maps."""
    return sum((s.measure for s, (a, b) in common_refinement([f, g]) if a != b),
               ZERO)
