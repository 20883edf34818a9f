"""Lie algebroids as degree-1 NQ-manifolds A[1] and their connections.

Chart: base x, xi^alpha (degree 1), fibre s_alpha (degree -1) for E = A.
With left derivatives the differential

    d_A = rho^mu_alpha xi^alpha d/dx^mu + 1/2 f^alpha_{beta gamma} xi^beta xi^gamma d/dxi^alpha

is the Chevalley-Eilenberg differential of the bracket
[e_beta, e_gamma] = -f^alpha_{beta gamma} e_alpha.  That is the bracket
used by ``bracket`` so that both torsion computations agree.

Connection coefficients follow the dual-frame convention
nabla_eta e^gamma = Gamma_alpha_beta^gamma eta^alpha e^beta, hence
nabla_eta e_beta = -Gamma_alpha_beta^gamma eta^alpha e_gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .derivations import Derivation, apply, square
from .graded import Chart, GradedPoly
from .rational import RationalFunction


class AlgebroidModel:
    def __init__(self, n: int, rank: int, rho, f: Mapping[tuple, RationalFunction] | None = None):
        self.n, self.rank = n, rank
        z = RationalFunction.zero(n)
        if len(rho) != n or any(len(row) != rank for row in rho):
            raise ValueError("anchor must be an n x rank array")
        self.rho = [list(row) for row in rho]          # rho[mu][alpha]
        self.f = [[[z] * rank for _ in range(rank)] for _ in range(rank)]   # f[gamma][alpha][beta]
        for (g, a, b), val in (f or {}).items():
            if a == b:
                if val:
                    raise ValueError("structure functions must be antisymmetric")
                continue
            for (i, j, v) in ((a, b, val), (b, a, -val)):
                if self.f[g][i][j] and self.f[g][i][j] != v:
                    raise ValueError(f"inconsistent structure function f^{g}_{a}{b}")
                self.f[g][i][j] = v

    @classmethod
    def tangent(cls, n: int) -> "AlgebroidModel":
        rho = [[RationalFunction.one(n) if i == j else RationalFunction.zero(n) for j in range(n)]
               for i in range(n)]
        return cls(n, n, rho)

    def chart(self, with_fibre: bool = True) -> Chart:
        gens = [(f"xi{a}", 1) for a in range(1, self.rank + 1)]
        if with_fibre:
            gens += [(f"s{a}", -1) for a in range(1, self.rank + 1)]
        return Chart(self.n, gens)

    def anchor(self, a: Sequence[RationalFunction]) -> list:
        return [sum((self.rho[mu][al] * a[al] for al in range(self.rank)), RationalFunction.zero(self.n))
                for mu in range(self.n)]


def _act(vec, g: RationalFunction) -> RationalFunction:
    acc = RationalFunction.zero(g.n)
    for mu, c in enumerate(vec):
        if c:
            acc = acc + c * g.diff(mu)
    return acc


def bracket(m: AlgebroidModel, a, b) -> list:
    """[a, b] with [e_beta, e_gamma] = -f^alpha_{beta gamma} e_alpha."""
    Xa, Xb = m.anchor(a), m.anchor(b)
    out = []
    for g in range(m.rank):
        acc = _act(Xa, b[g]) - _act(Xb, a[g])
        for al in range(m.rank):
            for be in range(m.rank):
                if m.f[g][al][be] and a[al] and b[be]:
                    acc = acc - m.f[g][al][be] * a[al] * b[be]
        out.append(acc)
    return out


def build_dA(m: AlgebroidModel, chart: Chart | None = None) -> Derivation:
    chart = chart or m.chart(with_fibre=False)
    xi = [chart.gen(f"xi{a}") for a in range(1, m.rank + 1)]
    images = {}
    for mu in range(m.n):
        img = chart.zero()
        for al in range(m.rank):
            if m.rho[mu][al]:
                img = img + xi[al].scale(m.rho[mu][al])
        images[f"x{mu + 1}"] = img
    for g in range(m.rank):
        img = chart.zero()
        for be in range(m.rank):
            for ga in range(be + 1, m.rank):
                v = m.f[g][be][ga]
                if v:
                    # 1/2 f xi^b xi^c summed over both orders
                    img = img + (xi[be] * xi[ga]).scale(v)
        images[f"xi{g + 1}"] = img
    return Derivation(chart, 1, images)


def check_algebroid(m: AlgebroidModel) -> bool:
    return square(build_dA(m)).is_zero()


class AlgebroidConnection:
    """Coefficients Gamma[alpha][beta][gamma] = Gamma_alpha_beta^gamma."""

    def __init__(self, rank: int, n: int, Gamma: Mapping[tuple, RationalFunction] | None = None):
        self.rank, self.n = rank, n
        z = RationalFunction.zero(n)
        self.Gamma = [[[z] * rank for _ in range(rank)] for _ in range(rank)]
        for (a, b, g), val in (Gamma or {}).items():
            self.Gamma[a][b][g] = val

    def nabla(self, m: AlgebroidModel, eta, sigma) -> list:
        """nabla_eta sigma for sigma = sigma^beta e_beta."""
        X = m.anchor(eta)
        out = []
        for g in range(self.rank):
            acc = _act(X, sigma[g])
            for al in range(self.rank):
                if not eta[al]:
                    continue
                for be in range(self.rank):
                    c = self.Gamma[al][be][g]
                    if c and sigma[be]:
                        acc = acc - c * eta[al] * sigma[be]
            out.append(acc)
        return out


def build_QA(m: AlgebroidModel, c: AlgebroidConnection) -> Derivation:
    chart = m.chart()
    dA = build_dA(m, chart)
    xi = [chart.gen(f"xi{a}") for a in range(1, m.rank + 1)]
    s = [chart.gen(f"s{a}") for a in range(1, m.rank + 1)]
    images = dict(dA.images)
    for be in range(m.rank):
        img = chart.zero()
        for al in range(m.rank):
            for g in range(m.rank):
                v = c.Gamma[al][be][g]
                if v:
                    img = img - (xi[al] * s[g]).scale(v)
        images[f"s{be + 1}"] = img
    return Derivation(chart, 1, images)


def _contraction(m: AlgebroidModel, chart: Chart, a) -> Derivation:
    return Derivation(chart, -1, {f"xi{al + 1}": chart.scalar(a[al]) for al in range(m.rank) if a[al]})


def _fibre_components(f: GradedPoly, m: AlgebroidModel) -> list:
    chart = f.chart
    out = []
    for g in range(m.rank):
        out.append(f.coefficient(f"s{g + 1}"))
    check = chart.zero()
    for g in range(m.rank):
        if out[g]:
            check = check + chart.gen(f"s{g + 1}").scale(out[g])
    if check != f:
        raise ValueError("expected a section of A with scalar coefficients")
    return out


@dataclass
class AlgebroidTorsion:
    graded: GradedPoly
    components: dict        # (alpha, beta, gamma) -> T^alpha_{beta gamma}, beta < gamma, from the graded side
    closed_form: dict
    bracket_form: dict
    matches: bool


def algebroid_torsion(m: AlgebroidModel, c: AlgebroidConnection) -> AlgebroidTorsion:
    """T = (1/2 f^a_bc + Gamma_c_b^a) xi^b xi^c s_a, three ways."""
    QA = build_QA(m, c)
    chart = QA.chart
    tau = chart.zero()
    for al in range(m.rank):
        tau = tau + chart.gen(f"xi{al + 1}") * chart.gen(f"s{al + 1}")
    T = apply(QA, tau)
    r = m.rank
    comps, closed, brk = {}, {}, {}
    basis = [[RationalFunction.one(m.n) if i == j else RationalFunction.zero(m.n) for i in range(r)]
             for j in range(r)]
    for be in range(r):
        for ga in range(be + 1, r):
            ev = apply(_contraction(m, chart, basis[ga]), apply(_contraction(m, chart, basis[be]), T))
            vals = _fibre_components(ev, m)
            lhs = [a - b for a, b in zip(c.nabla(m, basis[be], basis[ga]), c.nabla(m, basis[ga], basis[be]))]
            br = bracket(m, basis[be], basis[ga])
            for al in range(r):
                comps[(al, be, ga)] = vals[al]
                closed[(al, be, ga)] = m.f[al][be][ga] + c.Gamma[ga][be][al] - c.Gamma[be][ga][al]
                brk[(al, be, ga)] = lhs[al] - br[al]
    matches = comps == closed == brk
    return AlgebroidTorsion(T, comps, closed, brk, matches)


def torsion_at(m: AlgebroidModel, c: AlgebroidConnection, a, b) -> list:
    """nabla_a b - nabla_b a - [a, b]."""
    return [x - y - z for x, y, z in zip(c.nabla(m, a, b), c.nabla(m, b, a), bracket(m, a, b))]


def algebroid_curvature(m: AlgebroidModel, c: AlgebroidConnection, a, b) -> list:
    """F(a,b) = [nabla_a, nabla_b] - nabla_[a,b] as an r x r matrix F[gamma][beta]."""
    r = m.rank
    br = bracket(m, a, b)
    cols = []
    for be in range(r):
        e = [RationalFunction.one(m.n) if i == be else RationalFunction.zero(m.n) for i in range(r)]
        v1 = c.nabla(m, a, c.nabla(m, b, e))
        v2 = c.nabla(m, b, c.nabla(m, a, e))
        v3 = c.nabla(m, br, e)
        cols.append([x - y - z for x, y, z in zip(v1, v2, v3)])
    return [[cols[be][g] for be in range(r)] for g in range(r)]


def graded_curvature_at(m: AlgebroidModel, c: AlgebroidConnection, a, b) -> list:
    """iota_b iota_a of the matrix of Q_A^2 on the fibre coordinates."""
    QA = build_QA(m, c)
    chart = QA.chart
    F = square(QA)
    ia, ib = _contraction(m, chart, a), _contraction(m, chart, b)
    r = m.rank
    out = [[RationalFunction.zero(m.n)] * r for _ in range(r)]
    for be in range(r):
        img = apply(ib, apply(ia, F.image(f"s{be + 1}")))
        vals = _fibre_components(img, m)
        for g in range(r):
            out[g][be] = vals[g]
    return out


def frame_algebroid(E) -> AlgebroidModel:
    """TM in the frame e_alpha = E[mu][alpha] d_mu (E invertible)."""
    from . import linalg
    n = len(E)
    Einv = linalg.inverse(E)
    f = {}
    cols = [[E[mu][al] for mu in range(n)] for al in range(n)]
    for be in range(n):
        for ga in range(be + 1, n):
            X, Y = cols[be], cols[ga]
            br = [_act(X, Y[mu]) - _act(Y, X[mu]) for mu in range(n)]
            for al in range(n):
                v = sum((Einv[al][mu] * br[mu] for mu in range(n)), RationalFunction.zero(n))
                if v:
                    f[(al, be, ga)] = -v
    return AlgebroidModel(n, n, E, f)
