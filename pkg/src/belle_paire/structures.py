"""Countable carriers and lazily evaluable injective self-maps.

A carrier is a countable domain with a canonical enumeration; window(n)
returns its first n points and every check in the library is relative to
such a window.  Injections expose a partial preimage rule so orbits can be
walked backwards without ever guessing.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

__all__ = [
    "Domain",
    "NaturalNumbers",
    "FqVectors",
    "DisjointUnion",
    "PairProduct",
    "FqVector",
    "GeometrySpec",
    "WindowInjection",
    "IdentityInjection",
    "ShiftInjection",
    "TableInjection",
    "LinearInjection",
    "ComposedInjection",
    "InverseInjection",
    "UnionInjection",
    "WreathInjection",
    "SwapInjection",
    "RotateTripleInjection",
    "NonInjectiveOnWindow",
    "successor_endo",
    "identity_endo",
    "shift_endo",
    "basis_shift_endo",
    "linear_endo_from_basis_images",
    "window_permutation",
    "is_automorphism_on_window",
    "subspace_membership",
    "is_prime",
    "is_prime_power",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
    return True  # n itself prime


class Domain:
    """Countable carrier with a canonical enumeration."""

    def point_at(self, k: int):
        raise NotImplementedError

    def window(self, n: int) -> list:
        return [self.point_at(k) for k in range(n)]

    def iter_points(self):
        k = 0
        while True:
            yield self.point_at(k)
            k += 1

    def fresh_point(self, avoid):
        """First enumerated point outside the finite set avoid."""
        avoid = set(avoid)
        for x in self.iter_points():
            if x not in avoid:
                return x

    def key(self) -> tuple:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Domain) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return self.describe()


class NaturalNumbers(Domain):
    """The pure countable set, carried by the naturals."""

    def point_at(self, k):
        return k

    def key(self):
        return ("nat",)

    def describe(self):
        return "nat"


class FqVectors(Domain):
    """Finitely supported vectors over the prime field F_q.

    Enumeration order is the base-q digit encoding: the vector enumerated at
    k has coefficients equal to the digits of k, so the window of size q**d
    is exactly the span of the first d basis vectors.
    """

    def __init__(self, q: int):
        if not is_prime(q):
            raise ValueError(f"q must be prime for vector carriers, got {q}")
        self.q = q

    def point_at(self, k):
        return FqVector.decode(self.q, k)

    def key(self):
        return ("fqvec", self.q)

    def describe(self):
        return f"fqvec({self.q})"


class DisjointUnion(Domain):
    """Tagged disjoint union; points are ('L', x) or ('R', y)."""

    def __init__(self, left: Domain, right: Domain):
        self.left = left
        self.right = right

    def point_at(self, k):
        if k % 2 == 0:
            return ("L", self.left.point_at(k // 2))
        return ("R", self.right.point_at(k // 2))

    def key(self):
        return ("union", self.left.key(), self.right.key())

    def describe(self):
        return f"union({self.left.describe()},{self.right.describe()})"


class PairProduct(Domain):
    """Cartesian pairs (b, a), enumerated along diagonals."""

    def __init__(self, first: Domain, second: Domain):
        self.first = first
        self.second = second

    def point_at(self, k):
        s = (isqrt(8 * k + 1) - 1) // 2
        i = k - s * (s + 1) // 2
        return (self.first.point_at(i), self.second.point_at(s - i))

    def key(self):
        return ("pair", self.first.key(), self.second.key())

    def describe(self):
        return f"pair({self.first.describe()},{self.second.describe()})"


@dataclass(frozen=True)
class FqVector:
    """Sparse finitely supported vector over F_q, q prime."""

    q: int
    entries: tuple  # sorted ((index, coeff), ...) with 0 < coeff < q

    def __post_init__(self):
        assert all(0 < c < self.q for _, c in self.entries)
        assert list(self.entries) == sorted(self.entries)

    @classmethod
    def zero(cls, q):
        return cls(q, ())

    @classmethod
    def basis(cls, q, i):
        return cls(q, ((i, 1),))

    @classmethod
    def from_coeffs(cls, q, coeffs):
        return cls(q, tuple((i, c % q) for i, c in enumerate(coeffs) if c % q))

    @classmethod
    def decode(cls, q, k):
        entries = []
        i = 0
        while k:
            k, c = divmod(k, q)
            if c:
                entries.append((i, c))
            i += 1
        return cls(q, tuple(entries))

    def encode(self) -> int:
        return sum(c * self.q ** i for i, c in self.entries)

    def coeff(self, i) -> int:
        for j, c in self.entries:
            if j == i:
                return c
        return 0

    @property
    def is_zero(self):
        return not self.entries

    @property
    def max_index(self):
        return self.entries[-1][0] if self.entries else -1

    def add(self, other: "FqVector") -> "FqVector":
        assert self.q == other.q
        acc = dict(self.entries)
        for i, c in other.entries:
            acc[i] = (acc.get(i, 0) + c) % self.q
        return FqVector(self.q, tuple(sorted((i, c) for i, c in acc.items() if c)))

    def scale(self, c: int) -> "FqVector":
        c %= self.q
        if c == 0:
            return FqVector.zero(self.q)
        return FqVector(self.q, tuple((i, (a * c) % self.q) for i, a in self.entries))

    def shift(self, offset: int) -> "FqVector":
        """Move every basis index up by offset (down needs coeff(0..) == 0)."""
        assert all(i + offset >= 0 for i, _ in self.entries)
        return FqVector(self.q, tuple((i + offset, c) for i, c in self.entries))

    def dense(self, dim: int) -> tuple:
        assert self.max_index < dim
        return tuple(self.coeff(i) for i in range(dim))

    def __repr__(self):
        if not self.entries:
            return "0"
        return "+".join(f"{c if c > 1 else ''}e{i}" for i, c in self.entries)


@dataclass(frozen=True)
class GeometrySpec:
    """One of the three pregeometry kinds measured by the bound module."""

    kind: str  # affine | projective | disintegrated
    q: int | None = None
    tuple_arity: int = 1

    def __post_init__(self):
        if self.kind not in ("affine", "projective", "disintegrated"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "disintegrated":
            if self.q is not None:
                raise ValueError("disintegrated geometry takes no q")
        else:
            if self.q is None or self.q < 2 or not is_prime_power(self.q):
                raise ValueError("q must be a prime power >= 2")
        if self.tuple_arity < 1:
            raise ValueError("tuple_arity must be >= 1")


class NonInjectiveOnWindow(ValueError):
    """Two window points were found sharing an image."""

    def __init__(self, x1, x2, y):
        self.pair = (x1, x2)
        self.image = y
        super().__init__(f"{x1} and {x2} both map to {y}")


class WindowInjection:
    """Injective self-map of a carrier, evaluable pointwise and lazily.

    preimage returns None when the rule has no preimage (or cannot name one);
    all soundness checks in the library are window-relative.
    """

    is_bijection = False

    def __init__(self, domain: Domain, description: str):
        self.domain = domain
        self.description = description

    def apply(self, x):
        raise NotImplementedError

    def preimage(self, y):
        raise NotImplementedError

    def key(self) -> tuple:
        raise NotImplementedError

    def apply_window(self, pts: list) -> list:
        return [self.apply(x) for x in pts]

    def preimage_window(self, pts: list) -> list:
        return [self.preimage(y) for y in pts]

    def compose(self, inner: "WindowInjection") -> "WindowInjection":
        if isinstance(self, IdentityInjection):
            return inner
        if isinstance(inner, IdentityInjection):
            return self
        return ComposedInjection(self, inner)

    def inverse(self) -> "WindowInjection":
        if not self.is_bijection:
            raise ValueError(f"{self.description} is not presented as a bijection")
        return InverseInjection(self)

    def validate_window(self, n: int) -> None:
        """Raise NonInjectiveOnWindow if two window points share an image."""
        seen = {}
        for x in self.domain.window(n):
            y = self.apply(x)
            if y in seen:
                raise NonInjectiveOnWindow(seen[y], x, y)
            seen[y] = x

    def window_bijectivity(self, n: int) -> bool:
        """Window-relative bijectivity; subclasses may use faster exact paths."""
        pts = self.domain.window(n)
        seen = {}
        for x, y in zip(pts, self.apply_window(pts)):
            if y in seen:
                return False
            seen[y] = x
        for y, x in zip(pts, self.preimage_window(pts)):
            if x is None or self.apply(x) != y:
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, WindowInjection) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<{self.description}>"


class IdentityInjection(WindowInjection):
    is_bijection = True

    def __init__(self, domain: Domain):
        super().__init__(domain, "identity")

    def apply(self, x):
        return x

    def preimage(self, y):
        return y

    def inverse(self):
        return self

    def key(self):
        return ("identity", self.domain.key())


class ShiftInjection(WindowInjection):
    """x -> x + offset on the naturals; offset 0 points have no preimage."""

    def __init__(self, offset: int):
        assert offset >= 1
        name = "successor" if offset == 1 else f"shift+{offset}"
        super().__init__(NaturalNumbers(), name)
        self.offset = offset

    def apply(self, x):
        return x + self.offset

    def preimage(self, y):
        return y - self.offset if y >= self.offset else None

    def key(self):
        return ("shift", self.offset)


class TableInjection(WindowInjection):
    """Finite lookup table extended by the identity off its support.

    The stored rule is total; whether it is injective is a window question
    (validate_window), since a table hitting an untouched point collides with
    the identity there.
    """

    def __init__(self, domain: Domain, mapping: dict, _bijection=None):
        table = dict(mapping)
        inv: dict = {}
        for x, y in table.items():
            if y in inv:
                raise ValueError(f"table sends {inv[y]} and {x} to {y}")
            inv[y] = x
        self._table = table
        self._inv = inv
        if _bijection is None:
            _bijection = set(table) == set(inv)
        self.is_bijection = _bijection
        items = ",".join(f"{x}>{y}" for x, y in sorted(table.items(), key=repr))
        super().__init__(domain, f"table{{{items}}}")

    def apply(self, x):
        return self._table.get(x, x)

    def preimage(self, y):
        if y in self._inv:
            return self._inv[y]
        if y in self._table:
            return None  # identity image was overridden and nothing else hits y
        return y

    def key(self):
        return ("table", self.domain.key(), tuple(sorted(self._table.items(), key=repr)))

    @property
    def support(self):
        return set(self._table)


def window_permutation(domain: Domain, mapping: dict) -> TableInjection:
    """A finite-support permutation: the table must permute its own support."""
    if set(mapping) != set(mapping.values()):
        raise ValueError("mapping does not permute its support")
    return TableInjection(domain, mapping, _bijection=True)


# --- linear maps over F_q ------------------------------------------------

def _inv_mod(a: int, p: int) -> int:
    return pow(a, p - 2, p)


def _solve_mod(rows: list[list[int]], rhs: list[int], p: int):
    """Solve A c = rhs over F_p; returns one solution or None.

    Returns None as well when the system is underdetermined, which cannot
    happen for the injective column families used here.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    aug = [list(r) + [b % p] for r, b in zip(rows, rhs)]
    piv_rows = []
    r = 0
    for c in range(n_cols):
        pr = next((i for i in range(r, n_rows) if aug[i][c] % p), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = _inv_mod(aug[r][c] % p, p)
        aug[r] = [(v * inv) % p for v in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][c] % p:
                f = aug[i][c] % p
                aug[i] = [(v - f * w) % p for v, w in zip(aug[i], aug[r])]
        piv_rows.append((r, c))
        r += 1
    for i in range(r, n_rows):
        if aug[i][n_cols] % p:
            return None  # inconsistent
    sol = [0] * n_cols
    seen_cols = {c for _, c in piv_rows}
    if len(seen_cols) < n_cols:
        return None  # underdetermined: columns were not independent
    for i, c in piv_rows:
        sol[c] = aug[i][n_cols] % p
    return sol


def _rank_mod(rows: list[list[int]], p: int) -> int:
    mat = [list(r) for r in rows]
    rank = 0
    n_cols = len(mat[0]) if mat else 0
    for c in range(n_cols):
        pr = next((i for i in range(rank, len(mat)) if mat[i][c] % p), None)
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        inv = _inv_mod(mat[rank][c] % p, p)
        mat[rank] = [(v * inv) % p for v in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][c] % p:
                f = mat[i][c] % p
                mat[i] = [(v - f * w) % p for v, w in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def subspace_membership(v: FqVector, gens: list[FqVector]) -> bool:
    """Exact span membership over F_q by row reduction."""
    if any(g.q != v.q for g in gens):
        raise ValueError("mixed fields")
    dim = max([v.max_index] + [g.max_index for g in gens]) + 1
    if dim == 0:
        return v.is_zero
    rows = [list(g.dense(dim)) for g in gens]
    base = _rank_mod(rows, v.q) if rows else 0
    ext = _rank_mod(rows + [list(v.dense(dim))], v.q)
    return ext == base


class LinearInjection(WindowInjection):
    """Linear map fixed by finitely many basis images plus a symbolic tail.

    Basis vector e_i maps to images[i] for i < len(images); beyond that the
    tail rule applies: 'identity' keeps e_i, 'shift' sends e_i to e_{i+1}.
    """

    def __init__(self, q: int, images: tuple, tail: str = "identity"):
        if tail not in ("identity", "shift"):
            raise ValueError(f"unknown tail rule {tail!r}")
        images = tuple(images)
        if any(v.q != q for v in images):
            raise ValueError("image vectors live in the wrong field")
        dom = FqVectors(q)
        self.q = q
        self.images = images
        self.tail = tail
        self._maximg = max([v.max_index for v in images], default=-1)
        # desk check: the columns that can interact must be independent
        d = len(images) + self._maximg + 2
        cols = [self._basis_image(i).dense(d + 1) for i in range(d)]
        if _rank_mod([list(r) for r in zip(*cols)], q) < d:
            raise ValueError("basis images are not linearly independent")
        name = f"linear[q={q},{len(images)} images,tail={tail}]"
        super().__init__(dom, name)
        # identity tail with a finite block staying inside its own span is
        # onto; independence was checked above, so the block is invertible
        if tail == "identity" and all(v.max_index < len(images) for v in images):
            self.is_bijection = True

    def _basis_image(self, i: int) -> FqVector:
        if i < len(self.images):
            return self.images[i]
        if self.tail == "identity":
            return FqVector.basis(self.q, i)
        return FqVector.basis(self.q, i + 1)

    def apply(self, v: FqVector) -> FqVector:
        out = FqVector.zero(self.q)
        for i, c in v.entries:
            out = out.add(self._basis_image(i).scale(c))
        return out

    def preimage(self, y: FqVector):
        d = max(len(self.images), self._maximg + 1, y.max_index + 1, 1)
        cols = [self._basis_image(i).dense(d + 1) for i in range(d)]
        rows = [[col[r] for col in cols] for r in range(d + 1)]
        sol = _solve_mod(rows, list(y.dense(d + 1)), self.q)
        if sol is None:
            return None
        return FqVector.from_coeffs(self.q, sol)

    def key(self):
        return ("linear", self.q, tuple(v.entries for v in self.images), self.tail)


def basis_shift_endo(q: int) -> LinearInjection:
    """The index-shift embedding e_i -> e_{i+1}, injective and not onto."""
    return LinearInjection(q, (), tail="shift")


def linear_endo_from_basis_images(q: int, images, tail: str = "identity") -> LinearInjection:
    return LinearInjection(q, tuple(images), tail)


class ComposedInjection(WindowInjection):
    """outer after inner."""

    def __init__(self, outer: WindowInjection, inner: WindowInjection):
        assert outer.domain == inner.domain
        super().__init__(inner.domain,
                         f"({outer.description} . {inner.description})")
        self.outer = outer
        self.inner = inner
        self.is_bijection = outer.is_bijection and inner.is_bijection

    def apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def preimage(self, y):
        mid = self.outer.preimage(y)
        if mid is None:
            return None
        return self.inner.preimage(mid)

    def key(self):
        return ("compose", self.outer.key(), self.inner.key())


class InverseInjection(WindowInjection):
    """Inverse of a bijectively presented injection."""

    def __init__(self, inner: WindowInjection):
        assert inner.is_bijection
        super().__init__(inner.domain, f"inverse({inner.description})")
        self.inner = inner

    is_bijection = True

    def apply(self, x):
        y = self.inner.preimage(x)
        if y is None:
            raise ValueError(
                f"{self.inner.description} has no preimage at {x}; "
                "bijection presentation is unsound here")
        return y

    def preimage(self, y):
        return self.inner.apply(y)

    def inverse(self):
        return self.inner

    def key(self):
        return ("inverse", self.inner.key())


class UnionInjection(WindowInjection):
    """Componentwise action on a tagged disjoint union."""

    def __init__(self, domain: DisjointUnion, left: WindowInjection,
                 right: WindowInjection):
        assert isinstance(domain, DisjointUnion)
        assert left.domain == domain.left and right.domain == domain.right
        super().__init__(domain, f"[{left.description}|{right.description}]")
        self.left = left
        self.right = right
        self.is_bijection = left.is_bijection and right.is_bijection

    def apply(self, x):
        tag, v = x
        if tag == "L":
            return ("L", self.left.apply(v))
        return ("R", self.right.apply(v))

    def preimage(self, y):
        tag, v = y
        part = self.left if tag == "L" else self.right
        w = part.preimage(v)
        return None if w is None else (tag, w)

    def key(self):
        return ("unionmap", self.left.key(), self.right.key())


class WreathInjection(WindowInjection):
    """(b, a) -> (h(b), g_b(a)) with finitely many materialized g_b."""

    def __init__(self, domain: PairProduct, h_part: WindowInjection,
                 coords: dict, default: WindowInjection):
        assert isinstance(domain, PairProduct)
        assert h_part.domain == domain.first
        assert default.domain == domain.second
        assert all(g.domain == domain.second for g in coords.values())
        self.h_part = h_part
        self.coords = dict(coords)
        self.default = default
        self._ck = tuple(sorted(((repr(b), b, g.key()) for b, g in coords.items())))
        names = ",".join(f"{b}:{g.description}" for _, b, gk in self._ck
                         for g in [coords[b]])
        super().__init__(domain,
                         f"wreath[{h_part.description};{names};*:{default.description}]")
        self.is_bijection = (h_part.is_bijection and default.is_bijection
                             and all(g.is_bijection for g in coords.values()))

    def coord(self, b) -> WindowInjection:
        return self.coords.get(b, self.default)

    def apply(self, x):
        b, a = x
        return (self.h_part.apply(b), self.coord(b).apply(a))

    def preimage(self, y):
        b1, a1 = y
        b = self.h_part.preimage(b1)
        if b is None:
            return None
        a = self.coord(b).preimage(a1)
        return None if a is None else (b, a)

    def key(self):
        return ("wreathmap", self.h_part.key(),
                tuple((b_repr, gk) for b_repr, _, gk in self._ck),
                self.default.key())


class SwapInjection(WindowInjection):
    """Exchange the two (identically carried) halves of a disjoint union."""

    is_bijection = True

    def __init__(self, domain: DisjointUnion):
        assert isinstance(domain, DisjointUnion)
        assert domain.left.key() == domain.right.key()
        super().__init__(domain, "swap")

    def apply(self, x):
        tag, v = x
        return ("R" if tag == "L" else "L", v)

    preimage = apply

    def inverse(self):
        return self

    def key(self):
        return ("swap", self.domain.key())


class RotateTripleInjection(WindowInjection):
    """Cycle the three identically carried copies in union(union(A,A),A)."""

    is_bijection = True

    def __init__(self, domain: DisjointUnion, steps: int = 1):
        assert isinstance(domain, DisjointUnion)
        assert isinstance(domain.left, DisjointUnion)
        k = domain.left.left.key()
        assert domain.left.right.key() == k and domain.right.key() == k
        assert steps in (1, 2)
        super().__init__(domain, f"rot3^{steps}")
        self.steps = steps

    @staticmethod
    def _slot(x):
        tag, v = x
        if tag == "R":
            return 2, v
        tag2, w = v
        return (0, w) if tag2 == "L" else (1, w)

    @staticmethod
    def _unslot(i, v):
        if i == 0:
            return ("L", ("L", v))
        if i == 1:
            return ("L", ("R", v))
        return ("R", v)

    def apply(self, x):
        i, v = self._slot(x)
        return self._unslot((i + self.steps) % 3, v)

    def preimage(self, y):
        i, v = self._slot(y)
        return self._unslot((i - self.steps) % 3, v)

    def inverse(self):
        return RotateTripleInjection(self.domain, 3 - self.steps)

    def key(self):
        return ("rot3", self.domain.key(), self.steps)


def identity_endo(domain: Domain | None = None) -> IdentityInjection:
    return IdentityInjection(domain if domain is not None else NaturalNumbers())

def successor_endo() -> ShiftInjection:
    return ShiftInjection(1)

def shift_endo(offset: int) -> ShiftInjection:
    return ShiftInjection(offset)


def is_automorphism_on_window(h: WindowInjection, n: int) -> bool:
    """Window-relative bijectivity: injective there, preimages exist there."""
    return h.window_bijectivity(n)
