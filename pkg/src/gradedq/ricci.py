"""Generalized metric, Ricci^K, Scal^K and the torsion-free pairing-compatible family.

Ric^K_{ab} = <E^c, R^K(E_c, E_a) E_b> with E^c the pairing-dual frame, so the
contraction picks the E_c component.  Scal^K = G^{ab} Ric^K_{ab}, where raising
with the pairing swaps the TM and T*M halves: Scal^K = sum G[s(a)][s(b)] Ric[a][b].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .connection import GenConnection
from .courant import CourantModel, GenSection
from .ktensors import AffineConnectionK, KCurvature, k_curvature, k_torsion
from .rational import RationalFunction

HALF = Fraction(1, 2)


class GeneralizedMetric:
    def __init__(self, g, B=None):
        n = len(g)
        z = RationalFunction.zero(n)
        B = B if B is not None else [[z] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if g[i][j] != g[j][i]:
                    raise ValueError("g must be symmetric")
                if B[i][j] + B[j][i]:
                    raise ValueError("B must be antisymmetric")
        if not linalg.det(g):
            raise ValueError("g is singular")
        self.n = n
        self.g = [list(r) for r in g]
        self.B = [list(r) for r in B]
        self.ginv = linalg.inverse(self.g)
        Bg = linalg.matmul(self.B, self.ginv)
        gB = linalg.matmul(self.ginv, self.B)
        BgB = linalg.matmul(Bg, self.B)
        top = [[self.g[i][j] - BgB[i][j] for j in range(n)] + [Bg[i][j] for j in range(n)] for i in range(n)]
        bot = [[-gB[i][j] for j in range(n)] + [self.ginv[i][j] for j in range(n)] for i in range(n)]
        self.G = top + bot

    def eta(self):
        n = self.n
        one, z = RationalFunction.one(n), RationalFunction.zero(n)
        return [[one if (j == i + n or i == j + n) else z for j in range(2 * n)] for i in range(2 * n)]

    def h_map(self):
        """eta^{-1} G (eta is its own inverse)."""
        return linalg.matmul(self.eta(), self.G)

    def is_symmetric(self) -> bool:
        return self.G == linalg.transpose(self.G)

    def squares_to_identity(self) -> bool:
        h = self.h_map()
        return linalg.matmul(h, h) == linalg.identity(self.n, 2 * self.n)


def build_G(g, B=None) -> GeneralizedMetric:
    return GeneralizedMetric(g, B)


def levi_civita(g) -> list:
    """Gamma[mu][nu][rho] = Gamma_mu^nu_rho of the metric g."""
    n = len(g)
    ginv = linalg.inverse(g)
    z = RationalFunction.zero(n)
    out = [[[z] * n for _ in range(n)] for _ in range(n)]
    for mu in range(n):
        for nu in range(n):
            for rho in range(n):
                acc = z
                for k in range(n):
                    if ginv[nu][k]:
                        acc = acc + ginv[nu][k] * (g[k][rho].diff(mu) + g[k][mu].diff(rho) - g[mu][rho].diff(k))
                out[mu][nu][rho] = acc * RationalFunction.constant(n, HALF)
    return out


def _check_sym(arr, n, sym, anti, what):
    for i in range(n):
        for j in range(n):
            for k in range(n):
                v = arr[i][j][k]
                if sym and v != sym(arr, i, j, k):
                    raise ValueError(f"{what} violates its symmetry at {(i, j, k)}")
                if anti and v + anti(arr, i, j, k):
                    raise ValueError(f"{what} violates its antisymmetry at {(i, j, k)}")


class CanonicalD:
    """D = [[nabla, 0], [H/2 + gamma, nabla*]] + [[0, V^{TT*}], [V^{T*T}, 0]].

    Gamma: symmetric nabla^TT coefficients Gamma[mu][nu][rho] = Gamma_mu^nu_rho.
    V_TsT[mu][nu][rho] = V^mu_{nu rho}, antisymmetric in (nu, rho).
    gamma and V_TTs are accepted for completeness; their symmetry constraints
    (symmetric in one pair, antisymmetric in an overlapping pair) force them to vanish.
    """

    def __init__(self, m: CourantModel, Gamma, V_TsT=None, gamma=None, V_TTs=None):
        n = m.n
        z = RationalFunction.zero(n)
        zero3 = [[[z] * n for _ in range(n)] for _ in range(n)]
        self.m = m
        self.n = n
        self.Gamma = Gamma
        self.V_TsT = V_TsT or zero3
        self.gamma = gamma or zero3
        self.V_TTs = V_TTs or zero3
        _check_sym(Gamma, n, lambda a, i, j, k: a[k][j][i], None, "Gamma (torsion-free)")
        _check_sym(self.V_TsT, n, None, lambda a, i, j, k: a[i][k][j], "V^{T*T}")
        _check_sym(self.gamma, n, lambda a, i, j, k: a[k][j][i], lambda a, i, j, k: a[i][k][j], "gamma")
        _check_sym(self.V_TTs, n, lambda a, i, j, k: a[k][j][i], lambda a, i, j, k: a[i][k][j], "V^{TT*}")

    def connection(self) -> GenConnection:
        n = self.n
        blocks = {"Gamma_TT": {}, "Gamma_TsTs": {}, "Gamma_TsT": {}, "V_TsT": {}, "V_TTs": {}}
        for mu in range(n):
            for nu in range(n):
                for rho in range(n):
                    blocks["Gamma_TT"][(mu, nu, rho)] = self.Gamma[mu][nu][rho]
                    # dual connection: Gamma~_mu_nu^rho = -Gamma_mu^rho_nu
                    blocks["Gamma_TsTs"][(mu, nu, rho)] = -self.Gamma[mu][rho][nu]
                    blocks["Gamma_TsT"][(mu, nu, rho)] = \
                        self.m.h(mu, nu, rho) * RationalFunction.constant(n, HALF) + self.gamma[mu][nu][rho]
                    blocks["V_TsT"][(mu, nu, rho)] = self.V_TsT[mu][nu][rho]
                    blocks["V_TTs"][(mu, nu, rho)] = self.V_TTs[mu][nu][rho]
        return GenConnection.tangent(n, blocks)


def fix_K(c: CanonicalD) -> AffineConnectionK:
    """K_mu^nu_rho = Gamma~_mu_rho^nu - V^nu_{rho mu}."""
    n = c.n
    K = {}
    for mu in range(n):
        for nu in range(n):
            for rho in range(n):
                v = -c.Gamma[mu][nu][rho] - c.V_TsT[nu][rho][mu]
                if v:
                    K[(mu, nu, rho)] = v
    return AffineConnectionK(n, K)


def ricci_K(m: CourantModel, c: GenConnection, K: AffineConnectionK, kc: KCurvature | None = None) -> list:
    if not c.is_tangent():
        raise ValueError("Ricci^K needs TM + T*M")
    kc = kc or k_curvature(m, c, K)
    n2 = c.rank
    n = c.n
    frame = [GenSection.basis(n, a) for a in range(n2)]
    z = RationalFunction.zero(n)
    ric = [[z] * n2 for _ in range(n2)]
    for g in range(n2):
        for a in range(n2):
            M = kc.evaluate(frame[g], frame[a])
            for b in range(n2):
                ric[a][b] = ric[a][b] + M[g][b]
    return ric


def _swap(a, n):
    return a + n if a < n else a - n


def scalar_from_ricci(ric, G: GeneralizedMetric) -> RationalFunction:
    n = G.n
    acc = RationalFunction.zero(n)
    for a in range(2 * n):
        for b in range(2 * n):
            if ric[a][b]:
                acc = acc + G.G[_swap(a, n)][_swap(b, n)] * ric[a][b]
    return acc


def scalar_K(m, c, K, G: GeneralizedMetric, kc=None) -> RationalFunction:
    return scalar_from_ricci(ricci_K(m, c, K, kc), G)


def scalar_four_parts(ric, G: GeneralizedMetric) -> dict:
    """The four G-contractions separately (upper-upper, two mixed, lower-lower)."""
    n = G.n
    z = RationalFunction.zero(n)
    parts = {"Ric^{mn} G_{mn}": z, "Ric^m_n G^n_m": z, "Ric_m^n G_n^m": z, "Ric_{mn} G^{mn}": z}
    for a in range(2 * n):
        for b in range(2 * n):
            val = G.G[_swap(a, n)][_swap(b, n)] * ric[a][b]
            key = ("Ric_{mn} G^{mn}" if b < n else "Ric_m^n G_n^m") if a < n else \
                ("Ric^m_n G^n_m" if b < n else "Ric^{mn} G_{mn}")
            parts[key] = parts[key] + val
    return parts


def scal_g_nabla(ginv, Gamma) -> RationalFunction:
    n = len(ginv)
    acc = RationalFunction.zero(n)
    for mu in range(n):
        for nu in range(n):
            if not ginv[mu][nu]:
                continue
            t = RationalFunction.zero(n)
            for rho in range(n):
                t = t + Gamma[mu][rho][nu].diff(rho) - Gamma[rho][rho][nu].diff(mu)
                for s in range(n):
                    t = t + Gamma[rho][rho][s] * Gamma[mu][s][nu] - Gamma[mu][rho][s] * Gamma[rho][s][nu]
            acc = acc + ginv[mu][nu] * t
    return acc


def scalar_formula_terms(G: GeneralizedMetric, c: CanonicalD) -> dict:
    """The closed-form scalar curvature, term by term.

    Covariant derivatives use nabla^TT: for a one-form
    nabla_mu W_nu = d_mu W_nu - Gamma_mu^r_nu W_r, and on V^{mu rho nu} each
    upper index gets +Gamma.
    """
    n = c.n
    z = RationalFunction.zero(n)
    Gm, V3, Vl = c.Gamma, c.V_TTs, c.V_TsT
    Glow = [[G.G[i][j] for j in range(n)] for i in range(n)]
    Gup = [[G.G[n + i][n + j] for j in range(n)] for i in range(n)]
    terms = {"Scal(g, nabla)": scal_g_nabla(Gup, Gm)}

    def nabla_V3(r, mu, rr, nu):
        # nabla_r V^{mu rr nu}
        v = V3[mu][rr][nu].diff(r)
        for s in range(n):
            v = v + Gm[r][mu][s] * V3[s][rr][nu] + Gm[r][rr][s] * V3[mu][s][nu] + Gm[r][nu][s] * V3[mu][rr][s]
        return v

    t1 = t2 = z
    for mu in range(n):
        for nu in range(n):
            if not Glow[mu][nu]:
                continue
            for r in range(n):
                t1 = t1 + Glow[mu][nu] * nabla_V3(r, mu, r, nu)
                for s in range(n):
                    t2 = t2 + Glow[mu][nu] * Vl[s][s][r] * V3[mu][r][nu]
    terms["G_{mn} nabla_r V^{mrn}"] = t1
    terms["G_{mn} V^s_{sr} V^{mrn}"] = t2

    W = [sum((Vl[s][s][nu] for s in range(n)), z) for nu in range(n)]
    t3 = t4 = z
    for mu in range(n):
        for nu in range(n):
            if not Gup[mu][nu]:
                continue
            dW = W[nu].diff(mu) - sum((Gm[mu][r][nu] * W[r] for r in range(n)), z)
            t3 = t3 - Gup[mu][nu] * dW
            for s in range(n):
                for r in range(n):
                    t4 = t4 - Gup[mu][nu] * Vl[s][r][mu] * Vl[r][s][nu]
    terms["-G^{mn} nabla_m V^s_{sn}"] = t3
    terms["-G^{mn} V^s_{rm} V^r_{sn}"] = t4
    return terms


def scalar_formula(G: GeneralizedMetric, c: CanonicalD) -> RationalFunction:
    return sum(scalar_formula_terms(G, c).values(), RationalFunction.zero(c.n))


@dataclass
class ScalarComparison:
    scalar_K: RationalFunction
    formula: RationalFunction
    matches: bool
    parts: dict             # four G-contractions of Ric^K
    terms: dict             # formula terms
    torsion_free: bool      # k_torsion vanishes with the fixed K
    difference: RationalFunction


def compare_scalar(G: GeneralizedMetric, c: CanonicalD) -> ScalarComparison:
    conn = c.connection()
    K = fix_K(c)
    kt = k_torsion(c.m, conn, K)
    ric = ricci_K(c.m, conn, K)
    sk = scalar_from_ricci(ric, G)
    terms = scalar_formula_terms(G, c)
    f = sum(terms.values(), RationalFunction.zero(c.n))
    return ScalarComparison(sk, f, sk == f, scalar_four_parts(ric, G), terms, kt.graded.is_zero(), sk - f)
