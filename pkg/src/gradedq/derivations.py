"""Graded vector fields stored by their images on the coordinates."""

from __future__ import annotations

from typing import Iterable, Mapping

from .graded import Chart, GradedPoly, partial, substitute


class Derivation:
    """A homogeneous derivation of the algebra of a chart.

    ``images`` maps coordinate names (generators and base coordinates
    ``x1..xn``) to their images; missing names map to zero.  Acting on an
    element ``f`` it is ``sum_g X(g) * d/dg f`` with left derivatives.
    """

    __slots__ = ("chart", "degree", "images")

    def __init__(self, chart: Chart, degree: int, images: Mapping[str, GradedPoly] | None = None,
                 check: bool = True):
        self.chart = chart
        self.degree = int(degree)
        clean = {}
        for name, img in (images or {}).items():
            if not chart.has(name):
                raise KeyError(f"unknown coordinate {name!r}")
            if img.chart != chart:
                raise ValueError(f"image of {name} lives on a different chart")
            if not img:
                continue
            if check:
                want = chart.degree_of(name) + self.degree
                if img.degrees() != {want}:
                    raise ValueError(
                        f"image of {name} has degrees {sorted(img.degrees())}, expected {want}")
            clean[name] = img
        self.images = clean

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "Derivation":
        return cls(chart, degree, {})

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "Derivation":
        """The coordinate vector field d/d(name)."""
        return cls(chart, -chart.degree_of(name), {name: chart.one()})

    def names(self):
        return list(self.chart.base) + [g.name for g in self.chart.generators]

    def image(self, name: str) -> GradedPoly:
        if not self.chart.has(name):
            raise KeyError(f"unknown coordinate {name!r}")
        return self.images.get(name, self.chart.zero())

    def __call__(self, f: GradedPoly) -> GradedPoly:
        return apply(self, f)

    def is_zero(self) -> bool:
        return not self.images

    def __bool__(self):
        return bool(self.images)

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        if self.chart != other.chart:
            return False
        if not self.images and not other.images:
            return True
        return self.degree == other.degree and self.images == other.images

    __hash__ = None

    def _check(self, other):
        if not isinstance(other, Derivation):
            raise TypeError("expected a Derivation")
        if other.chart != self.chart:
            raise ValueError("mismatched charts")

    def __add__(self, other):
        self._check(other)
        if not other.images:
            return self
        if not self.images:
            return other
        if other.degree != self.degree:
            raise ValueError("cannot add derivations of different degrees")
        images = dict(self.images)
        for k, v in other.images.items():
            images[k] = images[k] + v if k in images else v
        return Derivation(self.chart, self.degree, images, check=False)

    def __neg__(self):
        return Derivation(self.chart, self.degree, {k: -v for k, v in self.images.items()}, check=False)

    def __sub__(self, other):
        return self + (-other)

    def left_multiply(self, f: GradedPoly) -> "Derivation":
        """The derivation f*X (f homogeneous)."""
        d = f.degree
        if d is None:
            return Derivation.zero(self.chart, self.degree)
        return Derivation(self.chart, self.degree + d,
                          {k: f * v for k, v in self.images.items()}, check=False)

    def __str__(self):
        if not self.images:
            return "0"
        parts = [f"({self.images[k]})*d/d{k}" for k in self.names() if k in self.images]
        return " + ".join(parts)

    def __repr__(self):
        return f"Derivation(degree={self.degree}, {self})"


def apply(X: Derivation, f: GradedPoly) -> GradedPoly:
    if f.chart != X.chart:
        raise ValueError("mismatched charts")
    result = f.chart.zero()
    for name, img in X.images.items():
        d = partial(name, f)
        if d:
            result = result + img * d
    return result


def commutator(X: Derivation, Y: Derivation) -> Derivation:
    """Graded commutator [X, Y] = XY - (-1)^{|X||Y|} YX."""
    X._check(Y)
    sign = -1 if (X.degree * Y.degree) % 2 else 1
    images = {}
    for name in X.names():
        v = apply(X, Y.image(name))
        w = apply(Y, X.image(name))
        v = v + w if sign < 0 else v - w
        if v:
            images[name] = v
    return Derivation(X.chart, X.degree + Y.degree, images, check=False)


def square(X: Derivation) -> Derivation:
    """X o X = 1/2 [X, X] for an odd derivation."""
    if X.degree % 2 == 0:
        raise ValueError("square is only defined for odd derivations")
    images = {}
    for name in X.names():
        v = apply(X, X.image(name))
        if v:
            images[name] = v
    return Derivation(X.chart, 2 * X.degree, images, check=False)


def is_vertical(X: Derivation, base: Iterable[str]) -> bool:
    return all(not X.image(name) for name in base)


def is_projectable(X: Derivation, kept: Iterable[str],
                   relations: Mapping[str, GradedPoly] | None = None) -> bool:
    """True when images of ``kept`` coordinates only involve kept generators.

    ``relations`` optionally expresses dropped generators through kept ones
    (a sub-bundle); they are substituted into the images first.
    """
    kept = set(kept)
    chart = X.chart
    dropped = [g.name for g in chart.generators if g.name not in kept]
    for name in kept:
        img = X.image(name)
        if relations:
            img = substitute(img, relations, chart)
        if any(img.involves(d) for d in dropped):
            return False
    return True


def restrict(X: Derivation, target: Chart) -> Derivation:
    """Reinterpret a derivation on a chart that shares all involved coordinates.

    Images must only involve generators of ``target`` (use after a successful
    projectability check).
    """
    images = {}
    for name, img in X.images.items():
        if not target.has(name):
            continue
        images[name] = transport(img, target)
    return Derivation(target, X.degree, images)


def transport(f: GradedPoly, target: Chart) -> GradedPoly:
    """Move an element to another chart with the same named generators."""
    names = [g.name for g in f.chart.generators]
    gens = {}
    result = target.zero()
    for m, c in f.terms.items():
        # multiply factors in source order so the reordering sign is recomputed
        term = target.scalar(c)
        for i, e in enumerate(m):
            if e:
                if names[i] not in gens:
                    if not target.has(names[i]):
                        raise ValueError(f"generator {names[i]} is absent from the target chart")
                    gens[names[i]] = target.gen(names[i])
                term = term * gens[names[i]] ** e
        result = result + term
    return result
