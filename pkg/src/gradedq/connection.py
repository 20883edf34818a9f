"""Q-connections on pullback bundles over T*[2]T[1]M and generalized connections.

A generalized connection D = nabla + V on a rank-r bundle E is stored by
``Gamma[mu][alpha][beta]`` and ``V[mu][alpha][beta]`` with

    D_{d_mu} e_beta = Gamma_mu^alpha_beta e_alpha,
    D_{dx^mu} e_beta = V^mu^alpha_beta e_alpha.

On the graded side the fibre coordinates ``s1..sr`` of E* correspond to the
frame e_alpha and Q_E(s_beta) = (Gamma_mu^alpha_beta psi^mu + V^mu^alpha_beta b_mu) s_alpha.
For E = TM + T*M the frame is (d_1..d_n, dx^1..dx^n), so s_mu = s_alpha with
alpha = mu and s^mu = s_alpha with alpha = n + mu.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .courant import CourantModel, GenSection, build_dM, dorfman, dorfman_skew, pairing, vector_action
from .derivations import Derivation, apply, square
from .graded import Chart, GradedPoly
from .rational import RationalFunction

HALF = Fraction(1, 2)

# Named blocks of a connection on TM + T*M: (array, row offset, column offset).
# Row index is alpha (the image frame element), column index is beta.
TANGENT_BLOCKS = {
    "Gamma_TT": ("Gamma", 0, 0),     # Gamma_mu^nu_rho
    "Gamma_TsTs": ("Gamma", 1, 1),   # tilde Gamma_mu_nu^rho
    "Gamma_TTs": ("Gamma", 0, 1),    # Gamma_mu^{nu rho}
    "Gamma_TsT": ("Gamma", 1, 0),    # Gamma_{mu nu rho}
    "V_TT": ("V", 0, 0),             # tilde V^mu^nu_rho
    "V_TTs": ("V", 0, 1),            # V^{mu nu rho}
    "V_TsT": ("V", 1, 0),            # V^mu_{nu rho}
    "V_TsTs": ("V", 1, 1),           # V^mu_nu^rho
}


def _zeros3(n, r):
    z = RationalFunction.zero(n)
    return [[[z] * r for _ in range(r)] for _ in range(n)]


class GenConnection:
    """Component data of D = nabla + V on a bundle of rank ``r`` over an n-manifold."""

    def __init__(self, n: int, rank: int, Gamma=None, V=None, fibre_degree: int = 0):
        self.n = n
        self.rank = rank
        self.fibre_degree = fibre_degree
        self.Gamma = _zeros3(n, rank)
        self.V = _zeros3(n, rank)
        for target, data in ((self.Gamma, Gamma), (self.V, V)):
            if data is None:
                continue
            if isinstance(data, Mapping):
                for (mu, a, b), val in data.items():
                    target[mu][a][b] = val
            else:
                if len(data) != n or any(len(row) != rank or any(len(r) != rank for r in row) for row in data):
                    raise ValueError("connection array has the wrong shape")
                for mu in range(n):
                    for a in range(rank):
                        for b in range(rank):
                            target[mu][a][b] = data[mu][a][b]

    @classmethod
    def tangent(cls, n: int, blocks: Mapping[str, Mapping[tuple, RationalFunction]] | None = None,
                fibre_degree: int = -1) -> "GenConnection":
        """Connection on TM + T*M from named blocks with 0-based (mu, nu, rho) indices."""
        c = cls(n, 2 * n, fibre_degree=fibre_degree)
        for name, comps in (blocks or {}).items():
            if name not in TANGENT_BLOCKS:
                raise KeyError(f"unknown connection block {name!r}")
            arr, ro, co = TANGENT_BLOCKS[name]
            target = c.Gamma if arr == "Gamma" else c.V
            for (mu, nu, rho), val in comps.items():
                if not all(0 <= i < n for i in (mu, nu, rho)):
                    raise ValueError(f"index out of range in {name}: {(mu, nu, rho)}")
                target[mu][ro * n + nu][co * n + rho] = val
        return c

    def block(self, name: str):
        """Read back a named block as a dict {(mu, nu, rho): value} of nonzero entries."""
        arr, ro, co = TANGENT_BLOCKS[name]
        src = self.Gamma if arr == "Gamma" else self.V
        n = self.n
        return {(mu, nu, rho): src[mu][ro * n + nu][co * n + rho]
                for mu in range(n) for nu in range(n) for rho in range(n)
                if src[mu][ro * n + nu][co * n + rho]}

    def is_tangent(self) -> bool:
        return self.rank == 2 * self.n

    def V_is_zero(self) -> bool:
        return not any(v for plane in self.V for row in plane for v in row)

    def with_V_zero(self) -> "GenConnection":
        return GenConnection(self.n, self.rank, self.Gamma, None, self.fibre_degree)

    def fibre_names(self) -> list[str]:
        return [f"s{i}" for i in range(1, self.rank + 1)]

    def chart(self) -> Chart:
        return Chart.courant(self.n, [(s, self.fibre_degree) for s in self.fibre_names()])


# graded side -------------------------------------------------------------

def connection_form(c: GenConnection, chart: Chart):
    """Matrix Q[alpha][beta] = Gamma_mu^alpha_beta psi^mu + V^mu^alpha_beta b_mu."""
    n, r = c.n, c.rank
    psi = [chart.gen(f"psi{i}") for i in range(1, n + 1)]
    b = [chart.gen(f"b{i}") for i in range(1, n + 1)]
    Q = [[chart.zero() for _ in range(r)] for _ in range(r)]
    for a in range(r):
        for be in range(r):
            acc = chart.zero()
            for mu in range(n):
                g = c.Gamma[mu][a][be]
                if g:
                    acc = acc + psi[mu].scale(g)
                v = c.V[mu][a][be]
                if v:
                    acc = acc + b[mu].scale(v)
            Q[a][be] = acc
    return Q


def build_QE(m: CourantModel, c: GenConnection) -> Derivation:
    if m.n != c.n:
        raise ValueError("model and connection dimensions differ")
    chart = c.chart()
    dM = build_dM(m, chart)
    Q = connection_form(c, chart)
    s = [chart.gen(name) for name in c.fibre_names()]
    images = dict(dM.images)
    for be, name in enumerate(c.fibre_names()):
        img = chart.zero()
        for a in range(c.rank):
            if Q[a][be]:
                img = img + Q[a][be] * s[a]
        images[name] = img
    return Derivation(chart, 1, images)


def split_linear(f: GradedPoly, names: Sequence[str]) -> dict[str, GradedPoly]:
    """Write f = sum_i C_i * s_i with each fibre generator s_i rightmost.

    Fibre generators must come after all others in the chart.  Raises if
    some monomial is not linear in the fibre generators.
    """
    chart = f.chart
    idx = [chart.index[nm] for nm in names]
    first = min(idx)
    out = {nm: {} for nm in names}
    for m, c in f.terms.items():
        hits = [i for i in idx if m[i]]
        if len(hits) != 1 or m[hits[0]] != 1 or any(m[j] for j in range(first, len(m)) if j != hits[0]):
            raise ValueError("element is not linear in the fibre coordinates")
        k = hits[0]
        out[chart.generators[k].name][m[:k] + (0,) + m[k + 1:]] = c
    return {nm: GradedPoly(chart, terms, _clean=True) for nm, terms in out.items()}


def vf_matrix(X: Derivation, c: GenConnection):
    """M[alpha][beta] with X(s_beta) = sum_alpha M[alpha][beta] s_alpha."""
    names = c.fibre_names()
    r = c.rank
    M = [[X.chart.zero() for _ in range(r)] for _ in range(r)]
    for be, nm in enumerate(names):
        parts = split_linear(X.image(nm), names)
        for a, an in enumerate(names):
            M[a][be] = parts[an]
    return M


def curvature_closed_form(m: CourantModel, c: GenConnection, chart: Chart | None = None):
    """R[alpha][beta] from the explicit psi-psi, psi-b, b-b and p components.

    psi^mu psi^nu : d_mu Gamma_nu + Gamma_mu Gamma_nu + 1/2 H_{rho mu nu} V^rho
    psi^mu b_nu   : d_mu V^nu + Gamma_mu V^nu - V^nu Gamma_mu
    b_mu b_nu     : + V^mu V^nu
    p_mu          : V^mu
    """
    chart = chart or c.chart()
    n, r = c.n, c.rank
    V = c.V
    psi = [chart.gen(f"psi{i}") for i in range(1, n + 1)]
    b = [chart.gen(f"b{i}") for i in range(1, n + 1)]
    p = [chart.gen(f"p{i}") for i in range(1, n + 1)]
    R = [[chart.zero() for _ in range(r)] for _ in range(r)]
    comps = curvature_components(m, c)
    for a in range(r):
        for be in range(r):
            acc = chart.zero()
            for (mu, nu), mat in comps["psipsi"].items():
                if mat[a][be]:
                    acc = acc + (psi[mu] * psi[nu]).scale(mat[a][be])
            for (mu, nu), mat in comps["psib"].items():
                if mat[a][be]:
                    acc = acc + (psi[mu] * b[nu]).scale(mat[a][be])
            for (mu, nu), mat in comps["bb"].items():
                if mat[a][be]:
                    acc = acc + (b[mu] * b[nu]).scale(mat[a][be])
            for mu in range(n):
                if V[mu][a][be]:
                    acc = acc + p[mu].scale(V[mu][a][be])
            R[a][be] = acc
    return R


def _matmul(A, B, r):
    n = A[0][0].n
    out = [[RationalFunction.zero(n)] * r for _ in range(r)]
    for i in range(r):
        row = out[i] = list(out[i])
        for k in range(r):
            aik = A[i][k]
            if not aik:
                continue
            for j in range(r):
                if B[k][j]:
                    row[j] = row[j] + aik * B[k][j]
    return out


def _matadd(A, B, sign=1):
    return [[a + b if sign > 0 else a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _matdiff(A, mu):
    return [[a.diff(mu) for a in row] for row in A]


def curvature_components(m: CourantModel, c: GenConnection, K=None):
    """Matrix-valued coefficients of the curvature, keyed by ordered index pairs.

    Returns dict with keys ``psipsi`` (mu, nu) (not antisymmetrized),
    ``psib`` (mu, nu) and ``bb`` (mu, nu).  With ``K`` given, the psi-b block
    includes the -V^kappa K_mu^nu_kappa shift of the K-curvature.
    """
    n, r = c.n, c.rank
    G, V = c.Gamma, c.V
    psipsi, psib, bb = {}, {}, {}
    for mu in range(n):
        for nu in range(n):
            mat = _matadd(_matdiff(G[nu], mu), _matmul(G[mu], G[nu], r))
            for rho in range(n):
                h = m.h(rho, mu, nu)
                if h:
                    mat = [[x + HALF * h * v for x, v in zip(rx, rv)] for rx, rv in zip(mat, V[rho])]
            psipsi[(mu, nu)] = mat
            mat = _matadd(_matdiff(V[nu], mu), _matmul(G[mu], V[nu], r))
            mat = _matadd(mat, _matmul(V[nu], G[mu], r), -1)
            if K is not None:
                for kappa in range(n):
                    k = K.coeff(mu, nu, kappa)
                    if k:
                        mat = [[x - k * v for x, v in zip(rx, rv)] for rx, rv in zip(mat, V[kappa])]
            psib[(mu, nu)] = mat
            bb[(mu, nu)] = _matmul(V[mu], V[nu], r)
    return {"psipsi": psipsi, "psib": psib, "bb": bb}


@dataclass
class CurvatureResult:
    vf: Derivation
    matrix: list
    closed_form: list
    matches: bool
    vertical: bool


def curvature(m: CourantModel, c: GenConnection) -> CurvatureResult:
    QE = build_QE(m, c)
    vf = square(QE)
    M = vf_matrix(vf, c)
    closed = curvature_closed_form(m, c, vf.chart)
    matches = M == closed
    # vertical: agrees with d_M^2 on the base coordinates (zero when dH = 0)
    dM2 = square(build_dM(m, vf.chart))
    base = [nm for nm in vf.names() if nm not in c.fibre_names()]
    vertical = all(vf.image(nm) == dM2.image(nm) for nm in base)
    return CurvatureResult(vf, M, closed, matches, vertical)


def flat_curvature_R_nabla(c: GenConnection):
    """Antisymmetrized R_nabla(d_mu, d_nu) matrices for mu < nu (nonzero only)."""
    n, r = c.n, c.rank
    G = c.Gamma
    out = {}
    for mu in range(n):
        for nu in range(mu + 1, n):
            a = _matadd(_matdiff(G[nu], mu), _matdiff(G[mu], nu), -1)
            a = _matadd(a, _matmul(G[mu], G[nu], r))
            a = _matadd(a, _matmul(G[nu], G[mu], r), -1)
            if any(x for row in a for x in row):
                out[(mu, nu)] = a
    return out


@dataclass
class QBundleReport:
    curvature_zero: bool
    V_zero: bool
    flat: bool

    @property
    def consistent(self) -> bool:
        return self.curvature_zero == (self.V_zero and self.flat)


def is_Q_bundle(m: CourantModel, c: GenConnection) -> QBundleReport:
    res = curvature(m, c)
    return QBundleReport(res.vf.is_zero(), c.V_is_zero(), not flat_curvature_R_nabla(c))


# torsion on TM + T*M -----------------------------------------------------

def tautological_section(c: GenConnection, chart: Chart) -> GradedPoly:
    n = c.n
    tau = chart.zero()
    for mu in range(n):
        tau = tau + chart.gen(f"psi{mu + 1}") * chart.gen(f"s{mu + 1}")
        tau = tau + chart.gen(f"b{mu + 1}") * chart.gen(f"s{n + mu + 1}")
    return tau


def torsion_closed_form(m: CourantModel, c: GenConnection, chart: Chart | None = None):
    """The three parts T(Gamma), T(V), T^(1,1)(Gamma, V) as graded elements."""
    if not c.is_tangent():
        raise ValueError("torsion needs a connection on TM + T*M")
    chart = chart or c.chart()
    n = c.n
    G, V = c.Gamma, c.V
    psi = [chart.gen(f"psi{i}") for i in range(1, n + 1)]
    b = [chart.gen(f"b{i}") for i in range(1, n + 1)]
    p = [chart.gen(f"p{i}") for i in range(1, n + 1)]
    s_lo = [chart.gen(f"s{i}") for i in range(1, n + 1)]
    s_up = [chart.gen(f"s{n + i}") for i in range(1, n + 1)]
    TG, TV, T11 = chart.zero(), chart.zero(), chart.zero()
    for mu in range(n):
        for nu in range(n):
            for rho in range(n):
                # Gamma_mu^rho_nu psi psi s_rho + (1/2 H_rho mu nu + Gamma_{mu rho nu}) psi psi s^rho
                g = G[mu][rho][nu]
                if g:
                    TG = TG + (psi[mu] * psi[nu] * s_lo[rho]).scale(g)
                coef = HALF * m.h(rho, mu, nu) + G[mu][n + rho][nu]
                if coef:
                    TG = TG + (psi[mu] * psi[nu] * s_up[rho]).scale(coef)
                # V^{mu rho nu} b b s_rho + V^mu_rho^nu b b s^rho
                v = V[mu][rho][n + nu]
                if v:
                    TV = TV + (b[mu] * b[nu] * s_lo[rho]).scale(v)
                v = V[mu][n + rho][n + nu]
                if v:
                    TV = TV + (b[mu] * b[nu] * s_up[rho]).scale(v)
                # (tilde V^mu^rho_nu - Gamma_nu^{rho mu}) b psi s_rho
                coef = V[mu][rho][nu] - G[nu][rho][n + mu]
                if coef:
                    T11 = T11 + (b[mu] * psi[nu] * s_lo[rho]).scale(coef)
                # (V^mu_{rho nu} - tilde Gamma_nu_rho^mu) b psi s^rho
                coef = V[mu][n + rho][nu] - G[nu][n + rho][n + mu]
                if coef:
                    T11 = T11 + (b[mu] * psi[nu] * s_up[rho]).scale(coef)
        T11 = T11 + p[mu] * s_up[mu]
    return TG, TV, T11


@dataclass
class TorsionResult:
    graded: GradedPoly
    T_Gamma: GradedPoly
    T_V: GradedPoly
    T_11: GradedPoly
    matches: bool


def torsion(m: CourantModel, c: GenConnection) -> TorsionResult:
    if not c.is_tangent():
        raise ValueError("torsion needs a connection on TM + T*M")
    QE = build_QE(m, c)
    T = apply(QE, tautological_section(c, QE.chart))
    TG, TV, T11 = torsion_closed_form(m, c, QE.chart)
    return TorsionResult(T, TG, TV, T11, T == TG + TV + T11)


# classical operators ----------------------------------------------------

def covariant_derivative(c: GenConnection, a: GenSection, sigma: Sequence[RationalFunction]) -> list:
    """D_a sigma = nabla_X sigma + V_xi sigma, sigma given by frame components."""
    n, r = c.n, c.rank
    X, xi = a.vec, a.form
    out = []
    for al in range(r):
        acc = vector_action(X, sigma[al])
        for mu in range(n):
            if X[mu]:
                row = c.Gamma[mu][al]
                for be in range(r):
                    if row[be] and sigma[be]:
                        acc = acc + X[mu] * row[be] * sigma[be]
            if xi[mu]:
                row = c.V[mu][al]
                for be in range(r):
                    if row[be] and sigma[be]:
                        acc = acc + xi[mu] * row[be] * sigma[be]
        out.append(acc)
    return out


def D_section(c: GenConnection, a: GenSection, b: GenSection) -> GenSection:
    """D_a b for E = TM + T*M."""
    return GenSection.from_components(covariant_derivative(c, a, b.components()))


def _sub(u, v):
    return [x - y for x, y in zip(u, v)]


def naive_curvature(m: CourantModel, c: GenConnection, a: GenSection, b: GenSection, sigma) -> list:
    """R_D(a,b) sigma = [D_a, D_b] sigma - D_{[[a,b]]_sk} sigma."""
    Dab = covariant_derivative(c, a, covariant_derivative(c, b, sigma))
    Dba = covariant_derivative(c, b, covariant_derivative(c, a, sigma))
    Dsk = covariant_derivative(c, dorfman_skew(a, b, m), sigma)
    return _sub(_sub(Dab, Dba), Dsk)


def naive_torsion(m: CourantModel, c: GenConnection, a: GenSection, b: GenSection,
                  skew: bool = False) -> GenSection:
    """T_D(a,b) = D_a b - D_b a - [[a,b]] (Dorfman, or skew bracket with ``skew=True``)."""
    br = dorfman_skew(a, b, m) if skew else dorfman(a, b, m)
    return D_section(c, a, b) - D_section(c, b, a) - br


def gualtieri_torsion(m: CourantModel, c: GenConnection, a: GenSection, b: GenSection,
                      e: GenSection) -> RationalFunction:
    t = D_section(c, a, b) - D_section(c, b, a) - dorfman_skew(a, b, m)
    extra = pairing(D_section(c, e, a), b) - pairing(D_section(c, e, b), a)
    return pairing(t, e) + HALF * extra


def pairing_violations(c: GenConnection) -> list:
    """Entries where Gamma_mu or V^mu fails to be skew for the pairing.

    Compatibility is equivalent to eta*M being antisymmetric for each
    coefficient matrix M, with eta the matrix of the canonical pairing.
    """
    if not c.is_tangent():
        raise ValueError("pairing compatibility needs TM + T*M")
    n = c.n

    def eta_m(M, i, j):
        # (eta M)_{ij}: eta swaps the T and T* halves
        return M[(i + n) % (2 * n)][j]

    bad = []
    for name, arr in (("Gamma", c.Gamma), ("V", c.V)):
        for mu in range(n):
            M = arr[mu]
            for i in range(2 * n):
                for j in range(i, 2 * n):
                    v = eta_m(M, i, j) + eta_m(M, j, i)
                    if v:
                        bad.append((name, mu, i, j, v))
    return bad


def check_pairing_compat(c: GenConnection) -> bool:
    return not pairing_violations(c)
