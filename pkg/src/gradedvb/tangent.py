"""Shifted tangent lifts and odd de Rham derivations.

A lift by an additional symbol ``b`` over direction ``i`` doubles the
coordinates of a chart: each coordinate ``c`` gains a partner carrying the
extra tag ``b``, with weight shifted by ``b - a<i>`` and parity flipped.
The associated odd derivation sends ``c`` to its tagged partner, with a
sign counting the later-applied tags already present; that convention
makes all the derivations square to zero and anticommute while coordinates
stay indexed by unordered tag sets.

Lifted charts contain coordinates of negative weight.  Dividing by the
ideal they generate (substituting zero for each of them) restores
non-negative grading; restricting further to multiplicity-free weights
produces the chart of the associated multi-fold vector bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    AlgebraError,
    Chart,
    Monomial,
    Polynomial,
    monomial_poly,
    multiply,
    tagged_coordinate,
)
from .weights import BasisSymbol, Weight, WeightSystem, paired_basic, weight


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    """A graded derivation of a chart algebra, given on generators.

    ``images`` maps coordinates to polynomials over the same chart;
    missing coordinates map to zero.  The derivation extends to products
    by the graded Leibniz rule: moving an odd derivation past an odd
    factor costs a sign.
    """

    chart: Chart
    weight_shift: Weight
    parity: int
    images: dict  # Coordinate -> Polynomial

    def __post_init__(self) -> None:
        for c, img in self.images.items():
            if c not in self.chart.coordinates:
                raise AlgebraError(f"image given for foreign coordinate {c.name}")
            if img.is_zero:
                continue
            if img.homogeneous_weight() != c.weight + self.weight_shift:
                raise AlgebraError(f"image of {c.name} is not homogeneous of "
                                   "the shifted weight")
            if img.parity_of() != (c.parity + self.parity) % 2:
                raise AlgebraError(f"image of {c.name} has the wrong parity")

    def of(self, c) -> Polynomial:
        return self.images.get(c, self.chart.zero())

    def apply_monomial(self, m: Monomial) -> Polynomial:
        out = self.chart.zero()
        factors = m.factors
        parities = [c.parity * e for c, e in factors]
        prefix = 0
        for k, (c, e) in enumerate(factors):
            img = self.images.get(c)
            if img is not None and not img.is_zero:
                suffix = (e - 1) * c.parity + sum(parities[k + 1:])
                sign_exp = self.parity * prefix + (self.parity + c.parity) * suffix
                rest = list(factors)
                if e == 1:
                    rest.pop(k)
                else:
                    rest[k] = (c, e - 1)
                coeff = Fraction(e) * ((-1) ** (sign_exp % 2))
                term = multiply(monomial_poly(self.chart, Monomial(tuple(rest)), coeff), img)
                out = out + term
            prefix += parities[k]
        return out

    def apply(self, p: Polynomial) -> Polynomial:
        if p.chart != self.chart:
            p = p.in_chart(self.chart)
        out = self.chart.zero()
        for m, c in p.terms.items():
            out = out + self.apply_monomial(m).scale(c)
        if p.truncated:
            out = Polynomial(out.chart, out.terms, True)
        return out

    def with_zeroed(self, coord) -> "Derivation":
        """Copy with one generator image replaced by zero (mutation tests)."""
        imgs = dict(self.images)
        imgs[coord] = self.chart.zero()
        return Derivation(self.chart, self.weight_shift, self.parity, imgs)


def anticommutator(a: Derivation, b: Derivation, p: Polynomial) -> Polynomial:
    return a.apply(b.apply(p)) + b.apply(a.apply(p))


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------

def _lift(chart: Chart, tag: BasisSymbol) -> Chart:
    if tag.kind != "additional":
        raise AlgebraError(f"lift tag must be an additional symbol, got {tag.label}")
    if tag in chart.applied_lifts:
        raise AlgebraError(f"lift {tag.label} already applied")
    shift = weight({tag: 1}) - weight({paired_basic(tag): 1})
    new_coords = list(chart.coordinates)
    for c in chart.coordinates:
        new_coords.append(tagged_coordinate(c, tag))
    basis = tuple(sorted(set(chart.system.basis) | {tag},
                         key=lambda s: s.sort_key))
    elements = set(chart.system.elements)
    elements.update(w + shift for w in chart.system.elements)
    system = WeightSystem(basis, frozenset(elements))
    return Chart(system, tuple(new_coords), chart.truncation,
                 chart.applied_lifts + (tag,))


def tangent_lift(chart: Chart, tag: BasisSymbol) -> Chart:
    """Apply one shifted tangent lift.

    The public constructor insists on canonical order: every previously
    applied lift must precede ``tag`` in the canonical symbol order.  Use
    :func:`tangent_lift_unchecked` to experiment with other orders.
    """
    for prev in chart.applied_lifts:
        if not prev.sort_key < tag.sort_key:
            raise AlgebraError(f"lift {tag.label} applied out of canonical "
                               f"order (after {prev.label})")
    return _lift(chart, tag)


def tangent_lift_unchecked(chart: Chart, tag: BasisSymbol) -> Chart:
    """Lift without the canonical-order check; for reorder experiments."""
    return _lift(chart, tag)


def _tag_sign(existing: tuple[BasisSymbol, ...], applied: tuple[BasisSymbol, ...],
              tag: BasisSymbol) -> int:
    """Sign for moving the differential of ``tag`` into place past the
    tags of ``existing`` that were applied after ``tag``."""
    pos = {t: k for k, t in enumerate(applied)}
    later = sum(1 for t in existing if pos[t] > pos[tag])
    return (-1) ** (later % 2)


def de_rham(chart: Chart, tag: BasisSymbol) -> Derivation:
    """The odd derivation of one applied lift.

    Sends each coordinate without the tag to its tagged partner (with the
    reordering sign) and kills coordinates that already carry the tag.
    """
    if tag not in chart.applied_lifts:
        raise AlgebraError(f"lift {tag.label} was not applied to this chart")
    shift = weight({tag: 1}) - weight({paired_basic(tag): 1})
    images = {}
    lookup = {c.cid: c for c in chart.coordinates}
    for c in chart.coordinates:
        if tag in c.cid.tags:
            continue
        partner = lookup[tagged_coordinate(c, tag, chart.applied_lifts).cid]
        sign = _tag_sign(c.cid.tags, chart.applied_lifts, tag)
        images[c] = chart.gen(partner, sign)
    return Derivation(chart, shift, 1, images)


# ---------------------------------------------------------------------------
# quotient by the negative-weight ideal, multiplicity-free restriction
# ---------------------------------------------------------------------------

def quotient_chart(chart: Chart) -> Chart:
    """Drop every coordinate whose weight has a negative coefficient."""
    coords = tuple(c for c in chart.coordinates if c.weight.is_nonnegative)
    elements = frozenset(w for w in chart.system.elements if w.is_nonnegative)
    system = WeightSystem(chart.system.basis, elements)
    return Chart(system, coords, chart.truncation, chart.applied_lifts)


def quotient_polynomial(target: Chart, p: Polynomial) -> Polynomial:
    """Substitute zero for negative-weight coordinates; an algebra map."""
    terms = {}
    for m, coeff in p.terms.items():
        if all(c.weight.is_nonnegative for c, _ in m.factors):
            terms[m] = coeff
    return Polynomial(target, terms, p.truncated)


def multiplicity_free_restriction(chart: Chart) -> Chart:
    """Keep only coordinates of multiplicity-free weight.

    Requires a chart already free of negative weights.  Because factor
    weights of a non-negative monomial are bounded by its total weight,
    the multiplicity-free components of the quotient algebra live entirely
    inside this restricted chart.
    """
    if any(not c.weight.is_nonnegative for c in chart.coordinates):
        raise AlgebraError("restrict after the negative-weight quotient")
    coords = tuple(c for c in chart.coordinates if c.weight.is_multiplicity_free)
    elements = frozenset(w for w in chart.system.elements
                         if w.is_nonnegative and w.is_multiplicity_free)
    system = WeightSystem(chart.system.basis, elements)
    return Chart(system, coords, chart.truncation, chart.applied_lifts)
