"""The degree-2 symplectic NQ-manifold T*[2]T[1]M and the exact Courant algebroid.

Coordinates are ``x`` (0), ``psi`` (1), ``b`` (1), ``p`` (2).  The Poisson
bracket is the one of the symplectic form dx dp + dpsi db, with signs fixed
so that the hamiltonian vector field of Theta is exactly d_M.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .derivations import Derivation, apply, square
from .graded import Chart, GradedPoly, partial
from .rational import RationalFunction


def perm_sign(idx) -> int:
    """Sign of the permutation sorting ``idx`` (0 when an index repeats)."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


class CourantModel:
    """Base dimension and a three-form H stored on strictly increasing triples (0-based)."""

    def __init__(self, n: int, H: Mapping[tuple, RationalFunction] | None = None):
        self.n = n
        clean = {}
        for key, val in (H or {}).items():
            key = tuple(key)
            if len(key) != 3 or not all(0 <= k < n for k in key):
                raise ValueError(f"bad H index {key}")
            s = perm_sign(key)
            if s == 0:
                if val:
                    raise ValueError(f"H component {key} with repeated index must vanish")
                continue
            skey = tuple(sorted(key))
            v = val if s > 0 else -val
            if skey in clean and clean[skey] != v:
                raise ValueError(f"conflicting values for H{skey}")
            if v:
                clean[skey] = v
        self.H = clean
        self._chart = None

    @property
    def chart(self) -> Chart:
        if self._chart is None:
            self._chart = Chart.courant(self.n)
        return self._chart

    def h(self, i, j, k) -> RationalFunction:
        s = perm_sign((i, j, k))
        if s == 0:
            return RationalFunction.zero(self.n)
        v = self.H.get(tuple(sorted((i, j, k))))
        if v is None:
            return RationalFunction.zero(self.n)
        return v if s > 0 else -v

    def dH(self) -> dict[tuple, RationalFunction]:
        """Nonzero components of dH on strictly increasing quadruples."""
        out = {}
        for quad in combinations(range(self.n), 4):
            acc = RationalFunction.zero(self.n)
            for pos in range(4):
                rest = quad[:pos] + quad[pos + 1:]
                term = self.h(*rest).diff(quad[pos])
                acc = acc + term if pos % 2 == 0 else acc - term
            if acc:
                out[quad] = acc
        return out

    def is_closed(self) -> bool:
        return not self.dH()

    def with_H(self, H) -> "CourantModel":
        return CourantModel(self.n, H)

    def negated(self) -> "CourantModel":
        return CourantModel(self.n, {k: -v for k, v in self.H.items()})


def _gens(chart: Chart, prefix: str, n: int):
    return [chart.gen(f"{prefix}{i}") for i in range(1, n + 1)]


def build_theta(m: CourantModel, chart: Chart | None = None) -> GradedPoly:
    chart = chart or m.chart
    psi, p = _gens(chart, "psi", m.n), _gens(chart, "p", m.n)
    theta = chart.zero()
    for mu in range(m.n):
        theta = theta + psi[mu] * p[mu]
    for (i, j, k), h in m.H.items():
        theta = theta + (psi[i] * psi[j] * psi[k]).scale(h)
    return theta


def build_dM(m: CourantModel, chart: Chart | None = None) -> Derivation:
    """d_M on the Courant chart, or on an extension of it (zero on extra generators)."""
    chart = chart or m.chart
    n = m.n
    psi, p = _gens(chart, "psi", n), _gens(chart, "p", n)
    images = {}
    for mu in range(n):
        images[f"x{mu + 1}"] = psi[mu]
        img = p[mu]
        for nu, rho in combinations(range(n), 2):
            h = m.h(mu, nu, rho)
            if h:
                img = img + (psi[nu] * psi[rho]).scale(h)
        images[f"b{mu + 1}"] = img
    for kappa in range(n):
        img = chart.zero()
        for (i, j, k), h in m.H.items():
            dh = h.diff(kappa)
            if dh:
                img = img - (psi[i] * psi[j] * psi[k]).scale(dh)
        images[f"p{kappa + 1}"] = img
    return Derivation(chart, 1, images)


def _courant_n(chart: Chart) -> int:
    n = chart.n
    for i in range(1, n + 1):
        for pre in ("psi", "b", "p"):
            if f"{pre}{i}" not in chart.index:
                raise ValueError("not a Courant chart")
    return n


def hamiltonian_vf(f: GradedPoly) -> Derivation:
    """X_f with X_f(g) = {f, g}; f must be homogeneous."""
    chart = f.chart
    n = _courant_n(chart)
    d = f.degree
    if d is None:
        return Derivation.zero(chart, -2)
    odd_sign = 1 if d % 2 else -1
    images = {}
    for i in range(1, n + 1):
        x, psi, b, p = f"x{i}", f"psi{i}", f"b{i}", f"p{i}"
        images[x] = partial(p, f)
        images[p] = -partial(x, f)
        img_b = partial(psi, f)
        img_psi = partial(b, f)
        images[b] = img_b if odd_sign > 0 else -img_b
        images[psi] = img_psi if odd_sign > 0 else -img_psi
    return Derivation(chart, d - 2, images)


def poisson_bracket(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """Degree -2 Poisson bracket, bilinear over homogeneous parts of f."""
    if f.chart != g.chart:
        raise ValueError("mismatched charts")
    result = f.chart.zero()
    for part in f.homogeneous_parts().values():
        result = result + apply(hamiltonian_vf(part), g)
    return result


@dataclass
class MasterReport:
    bracket: GradedPoly
    dH: dict
    consistent: bool

    @property
    def master_holds(self) -> bool:
        return self.bracket.is_zero()


def check_master(m: CourantModel) -> MasterReport:
    theta = build_theta(m)
    br = poisson_bracket(theta, theta)
    dh = m.dH()
    return MasterReport(br, dh, br.is_zero() == (not dh))


def dM_squared(m: CourantModel) -> Derivation:
    return square(build_dM(m))


# sections of the generalized tangent bundle --------------------------------

class GenSection:
    """a = a^mu d_mu + a_mu dx^mu with rational-function components."""

    __slots__ = ("n", "vec", "form")

    def __init__(self, vec: Sequence[RationalFunction], form: Sequence[RationalFunction]):
        if len(vec) != len(form):
            raise ValueError("vector and form parts must have the same length")
        self.n = len(vec)
        self.vec = tuple(vec)
        self.form = tuple(form)

    @classmethod
    def zero(cls, n):
        z = RationalFunction.zero(n)
        return cls([z] * n, [z] * n)

    @classmethod
    def basis(cls, n, alpha):
        """Frame element E_alpha: d_alpha for alpha < n, dx^(alpha-n) otherwise."""
        comps = [RationalFunction.zero(n)] * (2 * n)
        comps[alpha] = RationalFunction.one(n)
        return cls.from_components(comps)

    @classmethod
    def from_components(cls, comps):
        n = len(comps) // 2
        return cls(comps[:n], comps[n:])

    @classmethod
    def parse(cls, vec: Sequence[str], form: Sequence[str]):
        from .rational import parse_scalar
        n = len(vec)
        return cls([parse_scalar(s, n) for s in vec], [parse_scalar(s, n) for s in form])

    def components(self) -> list:
        return list(self.vec) + list(self.form)

    def __add__(self, other):
        return GenSection([a + b for a, b in zip(self.vec, other.vec)],
                          [a + b for a, b in zip(self.form, other.form)])

    def __neg__(self):
        return GenSection([-a for a in self.vec], [-a for a in self.form])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "GenSection":
        return GenSection([f * a for a in self.vec], [f * a for a in self.form])

    def __eq__(self, other):
        if not isinstance(other, GenSection):
            return NotImplemented
        return self.vec == other.vec and self.form == other.form

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.vec) and not any(self.form)

    def vector_part(self) -> "GenSection":
        return GenSection(self.vec, [RationalFunction.zero(self.n)] * self.n)

    def form_part(self) -> "GenSection":
        return GenSection([RationalFunction.zero(self.n)] * self.n, self.form)

    def as_function(self, chart: Chart) -> GradedPoly:
        """The degree-1 function a^mu b_mu + a_mu psi^mu."""
        out = chart.zero()
        for mu in range(self.n):
            out = out + chart.gen(f"b{mu + 1}").scale(self.vec[mu])
            out = out + chart.gen(f"psi{mu + 1}").scale(self.form[mu])
        return out

    @classmethod
    def from_function(cls, f: GradedPoly) -> "GenSection":
        n = f.chart.n
        vec = [f.coefficient(f"b{mu + 1}") for mu in range(n)]
        form = [f.coefficient(f"psi{mu + 1}") for mu in range(n)]
        if f != cls(vec, form).as_function(f.chart):
            raise ValueError("function is not linear in psi and b")
        return cls(vec, form)

    def __str__(self):
        parts = []
        for mu, c in enumerate(self.vec):
            if c:
                parts.append(f"({c})*d{mu + 1}")
        for mu, c in enumerate(self.form):
            if c:
                parts.append(f"({c})*dx{mu + 1}")
        return " + ".join(parts) or "0"

    def __repr__(self):
        return f"GenSection({self})"


def vector_action(vec, f: RationalFunction) -> RationalFunction:
    """X(f) for a vector field with components vec."""
    acc = RationalFunction.zero(f.n)
    for mu, c in enumerate(vec):
        if c:
            acc = acc + c * f.diff(mu)
    return acc


def lie_bracket(X, Y) -> list:
    n = len(X)
    return [vector_action(X, Y[mu]) - vector_action(Y, X[mu]) for mu in range(n)]


def exterior_derivative(f: RationalFunction) -> GenSection:
    n = f.n
    return GenSection([RationalFunction.zero(n)] * n, [f.diff(mu) for mu in range(n)])


def pairing(a: GenSection, b: GenSection) -> RationalFunction:
    acc = RationalFunction.zero(a.n)
    for mu in range(a.n):
        acc = acc + b.form[mu] * a.vec[mu] + a.form[mu] * b.vec[mu]
    return acc


def anchor(a: GenSection) -> tuple:
    return a.vec


def dorfman(a: GenSection, b: GenSection, m: CourantModel) -> GenSection:
    """[[X+xi, Y+eta]] = [X,Y] + L_X eta - i_Y d xi + i_Y i_X H."""
    n = a.n
    X, xi, Y, eta = a.vec, a.form, b.vec, b.form
    vec = lie_bracket(X, Y)
    form = []
    for mu in range(n):
        acc = vector_action(X, eta[mu])
        for nu in range(n):
            if eta[nu] and X[nu]:
                acc = acc + eta[nu] * X[nu].diff(mu)
            if Y[nu]:
                acc = acc - Y[nu] * (xi[mu].diff(nu) - xi[nu].diff(mu))
        for nu in range(n):
            for rho in range(n):
                if X[nu] and Y[rho]:
                    h = m.h(nu, rho, mu)
                    if h:
                        acc = acc + h * X[nu] * Y[rho]
        form.append(acc)
    return GenSection(vec, form)


def dorfman_skew(a: GenSection, b: GenSection, m: CourantModel) -> GenSection:
    d = dorfman(a, b, m) - dorfman(b, a, m)
    return d.scale(RationalFunction.constant(a.n, Fraction(1, 2)))
