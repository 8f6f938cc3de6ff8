"""Free super-commutative polynomial algebra on weighted chart coordinates.

Coordinates carry a weight, a parity, and a tag set recording which lifts
have been applied to them.  Monomials are kept in a canonical sorted form
with the sign bookkeeping of odd transpositions done once, at
normalization time; polynomials are finite maps from canonical monomials
to exact rational coefficients, truncated at a fixed total degree.

Truncation never happens silently: any operation that drops an over-degree
term marks its result, and downstream exact computations refuse flagged
input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .weights import (
    ZERO,
    BasisSymbol,
    Weight,
    WeightSystem,
    paired_basic,
    weight,
)


class AlgebraError(ValueError):
    """Raised when an algebra operation's precondition fails."""


class TruncationOverflow(AlgebraError):
    """An exact computation would be contaminated by dropped terms."""


def _name_key(name: str) -> tuple:
    # natural order: x2 before x10
    stem = name.rstrip("0123456789")
    digits = name[len(stem):]
    return (stem, int(digits) if digits else -1)


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateId:
    """Base name plus the ordered tuple of lifts already applied."""

    base_name: str
    tags: tuple[BasisSymbol, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.tags)) != len(self.tags):
            raise AlgebraError("duplicate lift tag on a coordinate")

    @property
    def name(self) -> str:
        if not self.tags:
            return self.base_name
        inner = ",".join(t.label for t in sorted(self.tags, key=lambda s: s.sort_key))
        return f"{self.base_name}[{inner}]"


@dataclass(frozen=True)
class Coordinate:
    """A single chart generator: id, weight, parity."""

    cid: CoordinateId
    weight: Weight
    parity: int

    def __post_init__(self) -> None:
        if self.parity != self.weight.parity:
            raise AlgebraError(f"coordinate {self.cid.name}: parity does not "
                               "match its weight")
        key = (self.weight.sort_key,
               _name_key(self.cid.base_name),
               tuple(sorted(t.sort_key for t in self.cid.tags)))
        object.__setattr__(self, "_key", key)

    @property
    def sort_key(self) -> tuple:
        return self._key  # type: ignore[attr-defined]

    @property
    def name(self) -> str:
        return self.cid.name

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.name


def tagged_coordinate(c: Coordinate, tag: BasisSymbol,
                      order: tuple[BasisSymbol, ...] | None = None) -> Coordinate:
    """The image coordinate of ``c`` under one lift: tag added, weight
    shifted by ``tag - a<i>``, parity flipped.

    ``order`` is the chart's lift-application order; when given, the new
    tag is spliced into its position there instead of appended, so the id
    matches the coordinate the chart actually owns.
    """
    shift = weight({tag: 1}) - weight({paired_basic(tag): 1})
    if order is None:
        tags = c.cid.tags + (tag,)
    else:
        have = set(c.cid.tags) | {tag}
        tags = tuple(t for t in order if t in have)
    return Coordinate(
        CoordinateId(c.cid.base_name, tags),
        c.weight + shift,
        (c.parity + 1) % 2,
    )


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

def _coordinate_names(system_weight: Weight, k: int) -> str:
    if system_weight.is_zero:
        return f"x{k}"
    return f"xi{{{system_weight.label}}}_{k}"


@dataclass(frozen=True)
class Chart:
    """A local model: a weight system, concrete coordinates, a truncation.

    ``applied_lifts`` records the lift symbols in application order; it is
    empty for charts that were never lifted.
    """

    system: WeightSystem
    coordinates: tuple[Coordinate, ...]
    truncation: int
    applied_lifts: tuple[BasisSymbol, ...] = ()

    def __post_init__(self) -> None:
        if self.truncation < 1:
            raise AlgebraError("truncation degree must be >= 1")
        coords = tuple(sorted(self.coordinates, key=lambda c: c.sort_key))
        object.__setattr__(self, "coordinates", coords)
        names = [c.name for c in coords]
        if len(set(names)) != len(names):
            raise AlgebraError("duplicate coordinate names in chart")
        for c in coords:
            for s, _ in c.weight.items:
                if s not in self.system.basis:
                    raise AlgebraError(f"coordinate {c.name} uses symbol "
                                       f"{s.label} outside the system basis")

    @classmethod
    def from_dims(cls, system: WeightSystem, dims: dict[Weight, int],
                  truncation: int = 3) -> "Chart":
        """Build a chart with ``dims[w]`` generators at each weight ``w``.

        Weight-0 generators are named ``x1, x2, ...``; generators of weight
        ``w`` are named ``xi{<label>}_k``.
        """
        for w in dims:
            if w not in system.elements:
                raise AlgebraError(f"dims keyed by {w.label}, which is not a "
                                   "system element")
        coords = []
        for w in sorted(dims, key=lambda u: u.sort_key):
            for k in range(1, dims[w] + 1):
                coords.append(Coordinate(CoordinateId(_coordinate_names(w, k)),
                                         w, w.parity))
        return cls(system, tuple(coords), truncation)

    @property
    def dims(self) -> dict[Weight, int]:
        out: dict[Weight, int] = {}
        for c in self.coordinates:
            out[c.weight] = out.get(c.weight, 0) + 1
        return out

    @property
    def base_dim(self) -> int:
        return sum(1 for c in self.coordinates if c.weight.is_zero)

    def coordinate(self, name: str) -> Coordinate:
        for c in self.coordinates:
            if c.name == name:
                return c
        raise AlgebraError(f"no coordinate named {name!r}")

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return Polynomial(self, {Monomial(()): Fraction(1)})

    def gen(self, c: Coordinate, coeff: Fraction | int = 1) -> "Polynomial":
        if c not in self.coordinates:
            raise AlgebraError(f"{c.name} is not a coordinate of this chart")
        return Polynomial(self, {Monomial(((c, 1),)): Fraction(coeff)})


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

class Monomial:
    """A canonical product of coordinate powers.

    Factors are sorted by the global coordinate order; odd coordinates
    appear with exponent exactly 1.  Weight, parity and degree are
    precomputed.
    """

    __slots__ = ("factors", "weight", "parity", "degree", "_key", "_hash")

    def __init__(self, factors: tuple[tuple[Coordinate, int], ...]):
        keys = [c.sort_key for c, _ in factors]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            raise AlgebraError("monomial factors must be sorted and unique")
        w = ZERO
        par = 0
        deg = 0
        for c, e in factors:
            if e < 1:
                raise AlgebraError("exponents must be >= 1")
            if c.parity and e > 1:
                raise AlgebraError(f"odd coordinate {c.name} squared")
            for _ in range(e):
                w = w + c.weight
            par += e * c.parity
            deg += e
        self.factors = factors
        self.weight = w
        self.parity = par % 2
        self.degree = deg
        self._key = tuple((c.sort_key, e) for c, e in factors)
        self._hash = hash(self._key)

    @property
    def sort_key(self) -> tuple:
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    @property
    def is_one(self) -> bool:
        return not self.factors

    def text(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for c, e in self.factors:
            parts.append(c.name if e == 1 else f"{c.name}^{e}")
        return " * ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.text()


ONE = Monomial(())


def normalize(raw: Iterable[Coordinate]) -> tuple[Monomial | None, int]:
    """Sort a raw factor list into canonical form.

    Returns the canonical monomial and the sign picked up from odd-odd
    transpositions, or ``(None, 0)`` when an odd coordinate repeats.
    """
    items = list(raw)
    # count inversions among odd factors of the given arrangement
    swaps = 0
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            if items[b].sort_key < items[a].sort_key:
                if items[a].parity and items[b].parity:
                    swaps += 1
    items.sort(key=lambda c: c.sort_key)
    factors: list[tuple[Coordinate, int]] = []
    for c in items:
        if factors and factors[-1][0] == c:
            if c.parity:
                return None, 0
            factors[-1] = (c, factors[-1][1] + 1)
        else:
            factors.append((c, 1))
    return Monomial(tuple(factors)), (-1) ** (swaps % 2)


def merge_factors(fa: tuple[tuple[Coordinate, int], ...],
                  fb: tuple[tuple[Coordinate, int], ...],
                  ) -> tuple[tuple[tuple[Coordinate, int], ...] | None, int]:
    """Merge two canonical factor tuples; the sign counts the odd factors
    of ``fb`` that cross odd factors of ``fa`` on their way to place."""
    if not fa:
        return fb, 1
    if not fb:
        return fa, 1
    suffix_odd = [0] * (len(fa) + 1)
    for k in range(len(fa) - 1, -1, -1):
        c, e = fa[k]
        suffix_odd[k] = suffix_odd[k + 1] + (e * c.parity)
    out: list[tuple[Coordinate, int]] = []
    swaps = 0
    i = j = 0
    while i < len(fa) and j < len(fb):
        ca, ea = fa[i]
        cb, eb = fb[j]
        ka, kb = ca.sort_key, cb.sort_key
        if ka < kb:
            out.append(fa[i])
            i += 1
        elif kb < ka:
            swaps += cb.parity * eb * suffix_odd[i]
            out.append(fb[j])
            j += 1
        else:
            if ca.parity:
                return None, 0
            out.append((ca, ea + eb))
            i += 1
            j += 1
    out.extend(fa[i:])
    out.extend(fb[j:])
    return tuple(out), (-1) ** (swaps % 2)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Polynomial:
    """Finite map from canonical monomials to exact rationals.

    ``truncated`` is sticky: it marks that some ancestor computation
    dropped a term above the chart's truncation degree, so exact kernel
    arguments must not trust this value.
    """

    __slots__ = ("chart", "terms", "truncated")

    def __init__(self, chart: Chart, terms: dict[Monomial, Fraction],
                 truncated: bool = False):
        self.chart = chart
        self.terms = {m: c for m, c in terms.items() if c != 0}
        self.truncated = truncated

    # -- ring structure ----------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        acc = dict(self.terms)
        for m, c in other.terms.items():
            v = acc.get(m, Fraction(0)) + c
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
        return Polynomial(self.chart, acc, self.truncated or other.truncated)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.chart, {m: -c for m, c in self.terms.items()},
                          self.truncated)

    def scale(self, k: Fraction | int) -> "Polynomial":
        k = Fraction(k)
        return Polynomial(self.chart, {m: k * c for m, c in self.terms.items()},
                          self.truncated)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return multiply(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # -- inspection ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def weights(self) -> set[Weight]:
        return {m.weight for m in self.terms}

    def homogeneous_weight(self) -> Weight:
        ws = self.weights()
        if len(ws) != 1:
            raise AlgebraError("polynomial is not weight-homogeneous")
        return next(iter(ws))

    def parity_of(self) -> int:
        ps = {m.parity for m in self.terms}
        if len(ps) != 1:
            raise AlgebraError("polynomial is not parity-homogeneous")
        return next(iter(ps))

    def max_degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: mc[0].sort_key)

    def in_chart(self, chart: Chart) -> "Polynomial":
        """Reinterpret over another chart sharing these coordinates."""
        have = set(chart.coordinates)
        for m in self.terms:
            for c, _ in m.factors:
                if c not in have:
                    raise AlgebraError(f"coordinate {c.name} does not exist "
                                       "in the target chart")
        return Polynomial(chart, dict(self.terms), self.truncated)

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            body = str(c) if m.is_one else f"{c} * {m.text()}"
            parts.append(body)
        return " + ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.text()


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    """Bilinear product with odd-transposition signs, truncated at the
    chart degree.  Dropped terms flag the result."""
    if p.chart is not q.chart and p.chart != q.chart:
        raise AlgebraError("polynomials live on different charts")
    cap = p.chart.truncation
    acc: dict[Monomial, Fraction] = {}
    dropped = False
    for ma, ca in p.terms.items():
        for mb, cb in q.terms.items():
            if ma.degree + mb.degree > cap:
                dropped = True
                continue
            factors, sign = merge_factors(ma.factors, mb.factors)
            if sign == 0:
                continue
            m = Monomial(factors)
            v = acc.get(m, Fraction(0)) + sign * ca * cb
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
    return Polynomial(p.chart, acc, p.truncated or q.truncated or dropped)


def monomial_poly(chart: Chart, m: Monomial, coeff: Fraction | int = 1) -> Polynomial:
    return Polynomial(chart, {m: Fraction(coeff)})


def homogeneous_component(p: Polynomial, w: Weight) -> Polynomial:
    return Polynomial(p.chart, {m: c for m, c in p.terms.items() if m.weight == w},
                      p.truncated)


# ---------------------------------------------------------------------------
# component bases
# ---------------------------------------------------------------------------

def _gen_monomials(coords: list[Coordinate], idx: int, target: Weight,
                   budget: int, exact: int | None,
                   prefix: list[tuple[Coordinate, int]],
                   out: list[Monomial], nonneg: bool) -> None:
    if idx == len(coords):
        if target.is_zero and (exact is None or exact == 0):
            out.append(Monomial(tuple(prefix)))
        return
    if nonneg and not target.is_nonnegative:
        return
    head = coords[idx]
    cap = min(1 if head.parity else budget, budget)
    if exact is not None:
        cap = min(cap, exact)
    rem = target
    for e in range(0, cap + 1):
        if e > 0:
            rem = rem - head.weight
            if nonneg and not rem.is_nonnegative:
                # non-negative factor weights only sink further
                break
        _gen_monomials(coords, idx + 1, rem if e else target, budget - e,
                       None if exact is None else exact - e,
                       prefix + ([(head, e)] if e else []), out, nonneg)


def component_basis(chart: Chart, w: Weight, max_degree: int | None = None,
                    ) -> list[Monomial]:
    """All canonical monomials of weight ``w`` and total degree at most the
    chart truncation (or ``max_degree``), in a deterministic order.

    Results are memoized on the chart; the cache is a pure function of the
    chart's immutable data.
    """
    cap = chart.truncation if max_degree is None else max_degree
    cache = getattr(chart, "_basis_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(chart, "_basis_cache", cache)
    key = (w, cap)
    hit = cache.get(key)
    if hit is not None:
        return list(hit)
    coords = list(chart.coordinates)
    nonneg = all(c.weight.is_nonnegative for c in coords)
    out: list[Monomial] = []
    _gen_monomials(coords, 0, w, cap, None, [], out, nonneg)
    out.sort(key=lambda m: m.sort_key)
    cache[key] = tuple(out)
    return out


def fiber_slice(chart: Chart, w: Weight, degree: int) -> list[Monomial]:
    """Monomials of weight ``w`` with no weight-0 factors and total degree
    exactly ``degree``.  These generate the weight component as a module
    over the weight-0 functions."""
    coords = [c for c in chart.coordinates if not c.weight.is_zero]
    nonneg = all(c.weight.is_nonnegative for c in coords)
    out: list[Monomial] = []
    _gen_monomials(coords, 0, w, degree, degree, [], out, nonneg)
    out.sort(key=lambda m: m.sort_key)
    return out


def base_monomials(chart: Chart, max_degree: int) -> list[Monomial]:
    """Monomials purely in the weight-0 coordinates, degree <= cap."""
    coords = [c for c in chart.coordinates if c.weight.is_zero]
    out: list[Monomial] = []
    _gen_monomials(coords, 0, ZERO, max_degree, None, [], out, True)
    out.sort(key=lambda m: m.sort_key)
    return out


# ---------------------------------------------------------------------------
# chart dumps
# ---------------------------------------------------------------------------

def chart_dump(chart: Chart) -> list[dict]:
    """One record per coordinate: name, applied tags, weight (vector over
    the chart's basis, plus a readable label), parity."""
    basis = chart.system.basis
    return [
        {
            "name": c.name,
            "tags": [t.label for t in c.cid.tags],
            "weight": [c.weight.coeff(s) for s in basis],
            "label": c.weight.label,
            "parity": c.parity,
        }
        for c in chart.coordinates
    ]


def chart_dump_text(chart: Chart) -> str:
    """Aligned text table of :func:`chart_dump`."""
    rows = [[r["name"], ",".join(r["tags"]) or "-",
             "(" + ",".join(str(v) for v in r["weight"]) + ")",
             r["label"], str(r["parity"])] for r in chart_dump(chart)]
    header = ["name", "tags", "weight", "label", "parity"]
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) if rows
              else len(header[c]) for c in range(len(header))]
    lines = []
    for cells in [header] + rows:
        lines.append("  " + " | ".join(x.ljust(w)
                                       for x, w in zip(cells, widths)).rstrip())
    return "\n".join(lines)
