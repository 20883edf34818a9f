"""K-curvature and K-torsion via the shifted coordinate p~ = p + K^T b.

An auxiliary affine connection is stored by ``K_nu^rho_mu``.  The shift
p~_mu = p_mu + K_nu^rho_mu psi^nu b_rho is covariant exactly when K obeys
K' = J K J^-1 - J dJ^-1, which is the transformation law of a connection
acting on one-forms:

    (nabla^K_X xi)_mu = X^nu (d_nu xi_mu + K_nu^rho_mu xi_rho).

That convention is used throughout (``k_tilde`` accepts ``sign=-1`` to
evaluate the opposite one for comparison).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .connection import (
    GenConnection, build_QE, covariant_derivative, curvature_components, naive_curvature,
    naive_torsion, split_linear, tautological_section, vf_matrix,
)
from .courant import CourantModel, GenSection, dorfman_skew, lie_bracket, vector_action
from .derivations import Derivation, apply, commutator, square
from .graded import Chart, GradedPoly, substitute
from .rational import RationalFunction


class AffineConnectionK:
    def __init__(self, n: int, K: Mapping[tuple, RationalFunction] | None = None):
        self.n = n
        z = RationalFunction.zero(n)
        self.K = [[[z] * n for _ in range(n)] for _ in range(n)]
        for (nu, rho, mu), val in (K or {}).items():
            self.K[nu][rho][mu] = val

    def coeff(self, nu, rho, mu) -> RationalFunction:
        """K_nu^rho_mu."""
        return self.K[nu][rho][mu]

    def items(self):
        n = self.n
        for nu in range(n):
            for rho in range(n):
                for mu in range(n):
                    if self.K[nu][rho][mu]:
                        yield (nu, rho, mu), self.K[nu][rho][mu]

    def is_zero(self) -> bool:
        return not any(True for _ in self.items())

    def nabla_form(self, X, xi, sign: int = 1) -> list:
        """Components of nabla^K_X xi."""
        n = self.n
        out = []
        for mu in range(n):
            acc = vector_action(X, xi[mu])
            for nu in range(n):
                if not X[nu]:
                    continue
                for rho in range(n):
                    k = self.K[nu][rho][mu]
                    if k and xi[rho]:
                        term = X[nu] * k * xi[rho]
                        acc = acc + term if sign > 0 else acc - term
            out.append(acc)
        return out


def tilde_p(K: AffineConnectionK, chart: Chart) -> list[GradedPoly]:
    n = K.n
    out = []
    for mu in range(n):
        val = chart.gen(f"p{mu + 1}")
        for (nu, rho, m), k in K.items():
            if m == mu:
                val = val + (chart.gen(f"psi{nu + 1}") * chart.gen(f"b{rho + 1}")).scale(k)
        out.append(val)
    return out


def p_elimination(K: AffineConnectionK, chart: Chart) -> dict[str, GradedPoly]:
    """p_mu -> -K_nu^rho_mu psi^nu b_rho, i.e. the substitution p~ = 0."""
    n = K.n
    pt = tilde_p(K, chart)
    return {f"p{mu + 1}": chart.gen(f"p{mu + 1}") - pt[mu] for mu in range(n)}


def _drop_tilde_p(f: GradedPoly, K: AffineConnectionK) -> GradedPoly:
    return substitute(f, p_elimination(K, f.chart), f.chart)


# contraction along sections --------------------------------------------

def contraction_vf(a: GenSection, K: AffineConnectionK, chart: Chart, sign: int = 1) -> Derivation:
    """iota^K_a, the degree -1 vector field with iota^K_a(p~) = 0.

    psi^mu -> a^mu, b_mu -> a_mu and
    p_nu -> -sign * (a^mu K_mu^rho_nu b_rho - a_mu K_rho^mu_nu psi^rho).
    ``sign=-1`` gives the opposite correction for comparison purposes.
    """
    n = a.n
    images = {}
    for mu in range(n):
        if a.vec[mu]:
            images[f"psi{mu + 1}"] = chart.scalar(a.vec[mu])
        if a.form[mu]:
            images[f"b{mu + 1}"] = chart.scalar(a.form[mu])
    for nu in range(n):
        img = chart.zero()
        for mu in range(n):
            for rho in range(n):
                k = K.coeff(mu, rho, nu)
                if k and a.vec[mu]:
                    img = img + chart.gen(f"b{rho + 1}").scale(a.vec[mu] * k)
                k = K.coeff(rho, mu, nu)
                if k and a.form[mu]:
                    img = img - chart.gen(f"psi{rho + 1}").scale(a.form[mu] * k)
        if img:
            images[f"p{nu + 1}"] = -img if sign > 0 else img
    return Derivation(chart, -1, images)


def contract2(f: GradedPoly, a: GenSection, b: GenSection) -> GradedPoly:
    """iota_b iota_a f for f quadratic in psi, b (no p); fibre factors are carried along."""
    chart = f.chart
    n = a.n
    K0 = AffineConnectionK(n)
    ia, ib = contraction_vf(a, K0, chart), contraction_vf(b, K0, chart)
    return apply(ib, apply(ia, f))


# K-curvature ------------------------------------------------------------

@dataclass
class KCurvature:
    graded: list                 # R^K[alpha][beta] as graded elements (no p)
    psipsi: dict                 # (mu, nu), mu < nu -> matrix
    psib: dict                   # (mu, nu) -> matrix
    bb: dict                     # (mu, nu), mu < nu -> matrix
    split_ok: bool               # R_QE == R^K + V^mu p~_mu
    nabla_V_ok: bool             # psi-b block equals the nabla^{Gamma K} V formula
    full: list                   # R_QE matrix

    def evaluate(self, a: GenSection, b: GenSection):
        """R^K(a, b) as an r x r matrix of scalars."""
        return [[_scalar(contract2(e, a, b)) for e in row] for row in self.graded]


def _scalar(f: GradedPoly) -> RationalFunction:
    unit = f.chart._unit
    if set(f.terms) - {unit}:
        raise ValueError("expected a scalar")
    return f.terms.get(unit, RationalFunction.zero(f.chart.n))


def _blocks(graded, n, r):
    chart = graded[0][0].chart
    z = RationalFunction.zero(n)
    psipsi, psib, bb = {}, {}, {}
    for mu in range(n):
        for nu in range(n):
            if mu < nu:
                psipsi[(mu, nu)] = [[graded[a][c].coefficient(f"psi{mu + 1}", f"psi{nu + 1}")
                                     for c in range(r)] for a in range(r)]
                bb[(mu, nu)] = [[graded[a][c].coefficient(f"b{mu + 1}", f"b{nu + 1}")
                                 for c in range(r)] for a in range(r)]
            psib[(mu, nu)] = [[graded[a][c].coefficient(f"psi{mu + 1}", f"b{nu + 1}")
                               for c in range(r)] for a in range(r)]
    del chart, z
    return psipsi, psib, bb


def k_curvature(m: CourantModel, c: GenConnection, K: AffineConnectionK) -> KCurvature:
    QE = build_QE(m, c)
    chart = QE.chart
    full = vf_matrix(square(QE), c)
    n, r = c.n, c.rank
    RK = [[_drop_tilde_p(e, K) for e in row] for row in full]
    pt = tilde_p(K, chart)
    split_ok = True
    for a in range(r):
        for be in range(r):
            rebuilt = RK[a][be]
            for mu in range(n):
                if c.V[mu][a][be]:
                    rebuilt = rebuilt + pt[mu].scale(c.V[mu][a][be])
            if rebuilt != full[a][be]:
                split_ok = False
    psipsi, psib, bb = _blocks(RK, n, r)
    expected = curvature_components(m, c, K)["psib"]
    nabla_V_ok = all(psib[key] == expected[key] for key in psib)
    return KCurvature(RK, psipsi, psib, bb, split_ok, nabla_V_ok, full)


# K-torsion ----------------------------------------------------------------

@dataclass
class KTorsion:
    graded: GradedPoly       # T^K as a section (linear in s)
    full: GradedPoly         # T_QE
    split_ok: bool           # T_QE == T^K + p~_mu s^mu
    n: int

    def evaluate(self, a: GenSection, b: GenSection) -> GenSection:
        """T^K(a, b) = iota_b iota_a T^K as a section of TM + T*M."""
        val = contract2(self.graded, a, b)
        names = [f"s{i}" for i in range(1, 2 * self.n + 1)]
        parts = split_linear(val, names)
        return GenSection.from_components([_scalar(parts[nm]) for nm in names])

    def part(self, kind: str) -> GradedPoly:
        """The psi-psi ('nabla'), b-b ('V') or psi-b ('11') part."""
        n = self.n
        chart = self.graded.chart
        psi_i = {chart.index[f"psi{i}"] for i in range(1, n + 1)}
        b_i = {chart.index[f"b{i}"] for i in range(1, n + 1)}
        want = {"nabla": (2, 0), "V": (0, 2), "11": (1, 1)}[kind]
        terms = {mono: v for mono, v in self.graded.terms.items()
                 if (sum(mono[i] for i in psi_i), sum(mono[i] for i in b_i)) == want}
        return GradedPoly(chart, terms, _clean=True)


def k_torsion(m: CourantModel, c: GenConnection, K: AffineConnectionK) -> KTorsion:
    if not c.is_tangent():
        raise ValueError("K-torsion needs a connection on TM + T*M")
    QE = build_QE(m, c)
    chart = QE.chart
    T = apply(QE, tautological_section(c, chart))
    TK = _drop_tilde_p(T, K)
    pt = tilde_p(K, chart)
    rebuilt = TK
    for mu in range(c.n):
        rebuilt = rebuilt + pt[mu] * chart.gen(f"s{c.n + mu + 1}")
    return KTorsion(TK, T, rebuilt == T, c.n)


def t11_formula(c: GenConnection, K: AffineConnectionK, X, nu_form) -> GenSection:
    """nabla_X nu - nabla^K_X nu - V_nu(X) for a vector X and a one-form nu."""
    n = c.n
    z = RationalFunction.zero(n)
    a = GenSection(X, [z] * n)
    form_sec = GenSection([z] * n, nu_form)
    nab = GenSection.from_components(covariant_derivative(c.with_V_zero(), a, form_sec.components()))
    nabK = GenSection([z] * n, K.nabla_form(X, nu_form))
    Vnu = GenSection.from_components(covariant_derivative(_only_V(c), form_sec, a.components()))
    return nab - nabK - Vnu


def _only_V(c: GenConnection) -> GenConnection:
    return GenConnection(c.n, c.rank, None, c.V, c.fibre_degree)


def t_nabla_formula(m: CourantModel, c: GenConnection, X, Y) -> GenSection:
    """T_{nabla^TT}(X,Y) + (nabla^{T*T}_X Y - nabla^{T*T}_Y X + H(X,Y,.))."""
    n = c.n
    z = RationalFunction.zero(n)
    a, b = GenSection(X, [z] * n), GenSection(Y, [z] * n)
    cG = c.with_V_zero()
    Dab = GenSection.from_components(covariant_derivative(cG, a, b.components()))
    Dba = GenSection.from_components(covariant_derivative(cG, b, a.components()))
    out = Dab - Dba
    br = lie_bracket(X, Y)
    vec = [v - w for v, w in zip(out.vec, br)]
    form = list(out.form)
    for rho in range(n):
        for mu in range(n):
            for nu in range(n):
                h = m.h(mu, nu, rho)
                if h and X[mu] and Y[nu]:
                    form[rho] = form[rho] + h * X[mu] * Y[nu]
    return GenSection(vec, form)


def t_V_formula(c: GenConnection, nu_form, lam_form) -> GenSection:
    """V_nu lambda - V_lambda nu for one-forms."""
    n = c.n
    z = RationalFunction.zero(n)
    a, b = GenSection([z] * n, nu_form), GenSection([z] * n, lam_form)
    cV = _only_V(c)
    return (GenSection.from_components(covariant_derivative(cV, a, b.components()))
            - GenSection.from_components(covariant_derivative(cV, b, a.components())))


# comparison with the naive operators ---------------------------------------

def k_tilde(a: GenSection, b: GenSection, m: CourantModel, K: AffineConnectionK, sign: int = 1) -> GenSection:
    """[[a,b]]_sk - [X,Y] + nabla^K_Y xi - nabla^K_X eta (a pure one-form)."""
    sk = dorfman_skew(a, b, m)
    br = lie_bracket(a.vec, b.vec)
    vec = [s - t for s, t in zip(sk.vec, br)]
    f1 = K.nabla_form(b.vec, a.form, sign)
    f2 = K.nabla_form(a.vec, b.form, sign)
    form = [s + u - v for s, u, v in zip(sk.form, f1, f2)]
    if any(vec):
        raise AssertionError("K-tilde has a vector part")
    return GenSection(vec, form)


def V_endomorphism(c: GenConnection, xi) -> list:
    r = c.rank
    z = RationalFunction.zero(c.n)
    M = [[z] * r for _ in range(r)]
    for mu in range(c.n):
        if xi[mu]:
            M = [[x + xi[mu] * v for x, v in zip(rx, rv)] for rx, rv in zip(M, c.V[mu])]
    return M


def naive_curvature_matrix(m, c, a, b) -> list:
    r = c.rank
    n = c.n
    cols = []
    for be in range(r):
        sigma = [RationalFunction.one(n) if i == be else RationalFunction.zero(n) for i in range(r)]
        cols.append(naive_curvature(m, c, a, b, sigma))
    return [[cols[be][al] for be in range(r)] for al in range(r)]


@dataclass
class NaiveComparison:
    curvature_ok: bool
    torsion_ok: bool | None
    curvature_residual: list
    torsion_residual: GenSection | None
    first_difference: str | None


def compare_naive(m, c, K, a, b, kc: KCurvature | None = None, kt: KTorsion | None = None,
                  sign: int = 1, skew: bool = False) -> NaiveComparison:
    """Check R^K(a,b) = R_D(a,b) + V_Ktilde and T^K(a,b) = T_D(a,b) + Ktilde.

    Both hold exactly when H = 0 and T_D uses the skew bracket.  Otherwise
    the residuals are V_{H(X,Y,.)} and H(X,Y,.) + (1/2) d<a,b> respectively
    (the latter term only with the Dorfman bracket).
    """
    kc = kc or k_curvature(m, c, K)
    lhs = kc.evaluate(a, b)
    kt_ = k_tilde(a, b, m, K, sign)
    rhs = naive_curvature_matrix(m, c, a, b)
    VK = V_endomorphism(c, kt_.form)
    res = [[l - x - y for l, x, y in zip(rl, rx, ry)] for rl, rx, ry in zip(lhs, rhs, VK)]
    curv_ok = not any(v for row in res for v in row)
    first = None
    if not curv_ok:
        for i, row in enumerate(res):
            for j, v in enumerate(row):
                if v and first is None:
                    first = f"curvature[{i + 1}][{j + 1}]: {v}"
    tors_ok, tres = None, None
    if c.is_tangent():
        kt = kt or k_torsion(m, c, K)
        tres = kt.evaluate(a, b) - naive_torsion(m, c, a, b, skew) - kt_
        tors_ok = tres.is_zero()
        if not tors_ok and first is None:
            comps = tres.components()
            i = next(i for i, v in enumerate(comps) if v)
            first = f"torsion[{i + 1}]: {comps[i]}"
    return NaiveComparison(curv_ok, tors_ok, res, tres, first)


def h_contraction(m: CourantModel, X, Y) -> list:
    """Components of the one-form H(X, Y, .)."""
    n = m.n
    out = []
    for rho in range(n):
        acc = RationalFunction.zero(n)
        for mu in range(n):
            for nu in range(n):
                h = m.h(mu, nu, rho)
                if h and X[mu] and Y[nu]:
                    acc = acc + h * X[mu] * Y[nu]
        out.append(acc)
    return out


def double_contraction_check(m: CourantModel, c: GenConnection, K: AffineConnectionK,
                             a: GenSection, b: GenSection, kc: KCurvature | None = None,
                             kt: KTorsion | None = None, sign: int = 1) -> tuple[bool, bool | None]:
    """[iota_b,[iota_a, R_QE]] == R^K(a,b) and iota_b iota_a T_QE == T^K(a,b)."""
    QE = build_QE(m, c)
    chart = QE.chart
    R = square(QE)
    ia = contraction_vf(a, K, chart, sign)
    ib = contraction_vf(b, K, chart, sign)
    Y = commutator(ib, commutator(ia, R))
    got = vf_matrix(Y, c)
    kc = kc or k_curvature(m, c, K)
    want = kc.evaluate(a, b)
    curv = all(_scalar(got[i][j]) == want[i][j] for i in range(c.rank) for j in range(c.rank)) \
        if all(not got[i][j].terms or set(got[i][j].terms) == {chart._unit}
               for i in range(c.rank) for j in range(c.rank)) else False
    tors = None
    if c.is_tangent():
        T = apply(QE, tautological_section(c, chart))
        val = apply(ib, apply(ia, T))
        kt = kt or k_torsion(m, c, K)
        names = c.fibre_names()
        try:
            parts = split_linear(val, names)
            got_t = GenSection.from_components([_scalar(parts[nm]) for nm in names])
            tors = got_t == kt.evaluate(a, b)
        except ValueError:
            tors = False
    return curv, tors
