"""Graded-commutative polynomial algebra over rational functions.

A :class:`Chart` fixes an ordered list of generators of nonzero or zero
degree on top of the base coordinates ``x1..xn`` (which are the variables
of the coefficient field).  A :class:`GradedPoly` is a finite sum of
monomials in the generators, written in chart order, with
:class:`~gradedq.rational.RationalFunction` coefficients.  Odd generators
square to zero and anticommute; all reordering signs are computed when
monomials are multiplied, so a product is always in normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .rational import ExpressionError, RationalFunction, evaluate_expression, parse_scalar


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int

    @property
    def parity(self) -> int:
        return self.degree % 2


class Chart:
    """Base dimension ``n`` plus an ordered list of graded generators."""

    def __init__(self, n: int, generators: Sequence[tuple[str, int]]):
        if n < 1:
            raise ValueError("dimension must be positive")
        gens = tuple(Generator(name, int(deg)) for name, deg in generators)
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        self.base = tuple(f"x{i}" for i in range(1, n + 1))
        if set(names) & set(self.base):
            raise ValueError("generator names clash with base coordinates")
        self.n = n
        self.generators = gens
        self.index = {g.name: i for i, g in enumerate(gens)}
        self.degrees = tuple(g.degree for g in gens)
        self.odd = tuple(g.parity == 1 for g in gens)
        self._key = (n, gens)

    @classmethod
    def courant(cls, n: int, fibre: Sequence[tuple[str, int]] = ()) -> "Chart":
        """Chart of T*[2]T[1]M: psi (1), b (1), p (2), then optional fibre coordinates."""
        gens = [(f"psi{i}", 1) for i in range(1, n + 1)]
        gens += [(f"b{i}", 1) for i in range(1, n + 1)]
        gens += [(f"p{i}", 2) for i in range(1, n + 1)]
        return cls(n, gens + list(fibre))

    def extend(self, fibre: Sequence[tuple[str, int]]) -> "Chart":
        return Chart(self.n, [(g.name, g.degree) for g in self.generators] + list(fibre))

    def __eq__(self, other):
        return isinstance(other, Chart) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        return f"Chart(n={self.n}, [{gens}])"

    def has(self, name: str) -> bool:
        return name in self.index or name in self.base

    def degree_of(self, name: str) -> int:
        if name in self.base:
            return 0
        return self.generators[self.index[name]].degree

    # element constructors ---------------------------------------------
    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def one(self) -> "GradedPoly":
        return self.scalar(1)

    def scalar(self, c) -> "GradedPoly":
        if not isinstance(c, RationalFunction):
            c = RationalFunction.constant(self.n, c)
        if not c:
            return self.zero()
        return GradedPoly(self, {self._unit: c}, _clean=True)

    @property
    def _unit(self):
        return (0,) * len(self.generators)

    def gen(self, name: str) -> "GradedPoly":
        if name in self.base:
            return self.scalar(RationalFunction.variable(self.n, self.base.index(name)))
        if name not in self.index:
            raise KeyError(f"unknown generator {name!r}")
        mono = [0] * len(self.generators)
        mono[self.index[name]] = 1
        return GradedPoly(self, {tuple(mono): RationalFunction.one(self.n)}, _clean=True)

    def __getitem__(self, name):
        return self.gen(name)

    def monomial_degree(self, mono) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees))


def _mono_product(chart: Chart, m1, m2):
    """Return (sign, monomial) of m1*m2 in normal order, sign 0 if it vanishes."""
    odd = chart.odd
    swaps = 0
    seen_later = 0  # odd factors of m1 at positions > current
    for i in range(len(m1) - 1, -1, -1):
        if odd[i]:
            if m2[i]:
                if m1[i]:
                    return 0, None
                swaps += seen_later
            if m1[i]:
                seen_later += 1
    return (-1 if swaps & 1 else 1), tuple(a + b for a, b in zip(m1, m2))


class GradedPoly:
    """Immutable element of the graded algebra of a chart."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[tuple, RationalFunction], _clean=False):
        self.chart = chart
        if _clean:
            self.terms = dict(terms)
        else:
            self.terms = {m: c for m, c in terms.items() if c}
        self._hash = None

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, GradedPoly):
            return self.chart == other.chart and self.terms == other.terms
        if isinstance(other, (int, Fraction, RationalFunction)):
            return self == self.chart.scalar(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def degrees(self) -> set[int]:
        return {self.chart.monomial_degree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int | None:
        """Degree of a homogeneous element (None for zero)."""
        degs = self.degrees()
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous element with degrees {sorted(degs)}")
        return degs.pop()

    def homogeneous_part(self, d: int) -> "GradedPoly":
        md = self.chart.monomial_degree
        return GradedPoly(self.chart, {m: c for m, c in self.terms.items() if md(m) == d}, _clean=True)

    def homogeneous_parts(self) -> dict[int, "GradedPoly"]:
        return {d: self.homogeneous_part(d) for d in sorted(self.degrees())}

    def involves(self, name: str) -> bool:
        i = self.chart.index[name]
        return any(m[i] for m in self.terms)

    def coefficient(self, *names: str) -> RationalFunction:
        """Coefficient of the normal-ordered monomial in ``names`` (repeats allowed)."""
        mono = [0] * len(self.chart.generators)
        for name in names:
            mono[self.chart.index[name]] += 1
        sign, m = 1, tuple(mono)
        # names may be given out of normal order
        probe = self.chart.one()
        for name in names:
            probe = probe * self.chart.gen(name)
        if not probe.terms:
            return RationalFunction.zero(self.chart.n)
        ((m, c),) = probe.terms.items()
        sign = 1 if c == 1 else -1
        value = self.terms.get(m)
        if value is None:
            return RationalFunction.zero(self.chart.n)
        return value if sign == 1 else -value

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GradedPoly):
            if other.chart != self.chart:
                raise ValueError("mismatched charts")
            return other
        if isinstance(other, (int, Fraction, RationalFunction)):
            return self.chart.scalar(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m)
            if v is None:
                terms[m] = c
            else:
                v = v + c
                if v:
                    terms[m] = v
                else:
                    del terms[m]
        return GradedPoly(self.chart, terms, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.chart, {m: -c for m, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, c: RationalFunction) -> "GradedPoly":
        if not c:
            return self.chart.zero()
        return GradedPoly(self.chart, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction)):
            if not isinstance(other, RationalFunction):
                other = RationalFunction.constant(self.chart.n, other)
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        chart = self.chart
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                sign, m = _mono_product(chart, m1, m2)
                if not sign:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                v = terms.get(m)
                terms[m] = c if v is None else v + c
        return GradedPoly(chart, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        """Division by a nonzero scalar (degree-0 element without generators)."""
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        unit = self.chart._unit
        if set(other.terms) - {unit}:
            raise ValueError("division by an element that is not a scalar")
        s = other.terms.get(unit)
        if s is None:
            raise ZeroDivisionError("division by zero")
        return self.scale(s.inverse())

    def __pow__(self, k: int):
        result = self.chart.one()
        for _ in range(k):
            result = result * self
        return result

    def map_coefficients(self, fn) -> "GradedPoly":
        return GradedPoly(self.chart, {m: fn(c) for m, c in self.terms.items()})

    # output -----------------------------------------------------------
    def sorted_terms(self):
        """Terms in a stable order: by degree, then by monomial."""
        md = self.chart.monomial_degree
        return sorted(self.terms.items(), key=lambda mc: (md(mc[0]), tuple(-e for e in mc[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for g, e in zip(self.chart.generators, m):
                if e == 1:
                    factors.append(g.name)
                elif e > 1:
                    factors.append(f"{g.name}^{e}")
            cs = str(c)
            if not factors:
                parts.append(f"({cs})" if len(c.num.terms()) > 1 or not c.den.is_one else cs)
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            elif c.is_constant():
                parts.append(f"{cs}*" + "*".join(factors))
            else:
                parts.append(f"({cs})*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"GradedPoly({self})"


def partial(name: str, f: GradedPoly) -> GradedPoly:
    """Left partial derivative with respect to a generator or base coordinate."""
    chart = f.chart
    if name in chart.base:
        i = chart.base.index(name)
        return GradedPoly(chart, {m: c.diff(i) for m, c in f.terms.items()})
    if name not in chart.index:
        raise KeyError(f"unknown generator {name!r}")
    k = chart.index[name]
    odd = chart.odd
    terms = {}
    if odd[k]:
        for m, c in f.terms.items():
            if m[k]:
                before = sum(1 for j in range(k) if odd[j] and m[j])
                mm = m[:k] + (0,) + m[k + 1:]
                terms[mm] = -c if before & 1 else c
    else:
        for m, c in f.terms.items():
            e = m[k]
            if e:
                mm = m[:k] + (e - 1,) + m[k + 1:]
                terms[mm] = c * e
    return GradedPoly(chart, terms, _clean=True)


def substitute(f: GradedPoly, images: Mapping[str, GradedPoly], target: Chart,
               base: Sequence[RationalFunction] | None = None) -> GradedPoly:
    """Algebra morphism sending each generator of ``f.chart`` to ``images[name]``.

    ``base`` optionally gives the images of x1..xn as rational functions on
    the target chart; coefficients are composed with them.  Generators
    absent from ``images`` must also exist in ``target`` and map to themselves.
    """
    chart = f.chart
    gen_images = []
    for g in chart.generators:
        img = images.get(g.name)
        if img is None:
            img = target.gen(g.name)
        elif img.chart != target:
            raise ValueError(f"image of {g.name} lives on a different chart")
        gen_images.append(img)
    powers: dict = {}
    result = target.zero()
    for m, c in f.terms.items():
        coeff = c.compose(base) if base is not None else c
        if not coeff:
            continue
        term = target.scalar(coeff)
        for i, e in enumerate(m):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = gen_images[i] ** e
                term = term * powers[key]
        result = result + term
    return result


def parse_graded(text: str, chart: Chart) -> GradedPoly:
    """Parse an expression in base coordinates and chart generators (explicit ``*``)."""

    def leaf(name, col):
        if chart.has(name):
            return chart.gen(name)
        raise ExpressionError(f"unknown identifier {name!r}", col)

    return evaluate_expression(text, leaf, chart.scalar)


class ChartChange:
    """Change of base coordinates x' = phi(x) with declared inverse.

    Induces the transformation of the Courant chart:
    psi' = J psi, b' = J^{-T} b, p' = J^{-T} p - J^{-T} dJ^T J^{-T} b,
    with J = (d phi^mu / d x^nu) and dJ = d_mu J psi^mu.
    ``fibre`` optionally gives rules for fibre generators as a callable
    ``fibre(change, chart) -> {name: GradedPoly}`` on the unprimed chart.
    """

    def __init__(self, phi: Sequence[RationalFunction], inverse: Sequence[RationalFunction]):
        n = len(phi)
        if len(inverse) != n:
            raise ValueError("map and inverse must have the same length")
        self.n = n
        self.phi = tuple(phi)
        self.inverse_map = tuple(inverse)
        xs = [RationalFunction.variable(n, i) for i in range(n)]
        if [f.compose(self.inverse_map) for f in self.phi] != xs or \
                [g.compose(self.phi) for g in self.inverse_map] != xs:
            raise ValueError("declared inverse does not invert the map")
        self.J = [[phi[m].diff(v) for v in range(n)] for m in range(n)]
        self.Jinv = linalg.inverse(self.J)

    @classmethod
    def parse(cls, phi: Sequence[str], inverse: Sequence[str]) -> "ChartChange":
        n = len(phi)
        return cls([parse_scalar(s, n) for s in phi], [parse_scalar(s, n) for s in inverse])

    def inverted(self) -> "ChartChange":
        return ChartChange(self.inverse_map, self.phi)

    def courant_images(self, chart: Chart) -> dict[str, GradedPoly]:
        """Images of primed psi, b, p as functions of the unprimed coordinates."""
        n = self.n
        psi = [chart.gen(f"psi{i}") for i in range(1, n + 1)]
        b = [chart.gen(f"b{i}") for i in range(1, n + 1)]
        p = [chart.gen(f"p{i}") for i in range(1, n + 1)]
        JinvT = linalg.transpose(self.Jinv)
        # dJ^T as a matrix of degree-1 elements: (dJ^T)_{ab} = d_l J_{ba} psi^l
        dJT = [[sum((psi[l] * self.J[b_][a].diff(l) for l in range(n)), chart.zero())
                for b_ in range(n)] for a in range(n)]
        images = {}
        for mu in range(n):
            images[f"psi{mu + 1}"] = sum((psi[nu] * self.J[mu][nu] for nu in range(n)), chart.zero())
            images[f"b{mu + 1}"] = sum((b[nu] * JinvT[mu][nu] for nu in range(n)), chart.zero())
        # correction term -J^{-T} dJ^T J^{-T} b
        jb = [sum((b[c] * JinvT[a][c] for c in range(n)), chart.zero()) for a in range(n)]
        djb = [sum((dJT[a][c] * jb[c] for c in range(n)), chart.zero()) for a in range(n)]
        for mu in range(n):
            val = sum((p[nu] * JinvT[mu][nu] for nu in range(n)), chart.zero())
            val = val - sum((djb[a] * JinvT[mu][a] for a in range(n)), chart.zero())
            images[f"p{mu + 1}"] = val
        return images

    def pullback(self, f: GradedPoly, fibre: Mapping[str, GradedPoly] | None = None) -> GradedPoly:
        """Express ``f`` (written in primed coordinates) in unprimed coordinates."""
        chart = f.chart
        images = {k: v for k, v in self.courant_images(chart).items() if k in chart.index}
        if fibre:
            images.update(fibre)
        return substitute(f, images, chart, base=list(self.phi))

    def scalar_in_new(self, f: RationalFunction) -> RationalFunction:
        """Rewrite a function of x as a function of x' using the inverse map."""
        return f.compose(self.inverse_map)
