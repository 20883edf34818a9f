"""Dirac structures as d_M-invariant lagrangian submanifolds of T*[2]T[1]M.

A Dirac structure L is given in a frame e_A = rho^mu_A d_mu + rho_{mu A} dx^mu.
The embedding of L[1] (coordinates x, lambda^A) is

    psi^mu = rho^mu_A lambda^A,  b_mu = rho_{mu A} lambda^A,  p_mu = 1/2 phi_{mu AB} lambda^A lambda^B

with phi_{mu AB} = rho^k_A d_mu rho_{k B} + d_mu rho^k_B rho_{k A}.  Lagrangian and
invariance checks are done independently of that formula: constraints cutting
out the image are built with a Gram left inverse, then Poisson-bracketed
(lagrangian) or hit with d_M (invariance) and pulled back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import linalg
from .algebroid import AlgebroidConnection, AlgebroidModel, build_dA
from .connection import GenConnection, build_QE, split_linear, tautological_section
from .courant import CourantModel, GenSection, build_dM, dorfman, poisson_bracket
from .derivations import Derivation, apply, square
from .graded import Chart, GradedPoly, substitute
from .ktensors import AffineConnectionK, k_curvature, k_tilde, k_torsion, tilde_p
from .rational import RationalFunction


class IsotropyError(ValueError):
    pass


class DiracStructure:
    def __init__(self, rho_T, rho_Tstar):
        n = len(rho_T)
        if len(rho_Tstar) != n or any(len(r) != n for r in list(rho_T) + list(rho_Tstar)):
            raise ValueError("Dirac frame data must be two n x n arrays")
        self.n = n
        self.rho_T = [list(r) for r in rho_T]          # rho^mu_A  -> rho_T[mu][A]
        self.rho_Tstar = [list(r) for r in rho_Tstar]  # rho_{mu A} -> rho_Tstar[mu][A]
        bad = self.isotropy_defect()
        if bad:
            raise IsotropyError(f"frame is not isotropic: <e_{bad[0] + 1}, e_{bad[1] + 1}> = {bad[2]}")
        M = self.frame_matrix()
        if not linalg.det(linalg.matmul(linalg.transpose(M), M)):
            raise ValueError("frame does not have rank n")

    @classmethod
    def tangent(cls, n: int) -> "DiracStructure":
        one, zero = RationalFunction.one(n), RationalFunction.zero(n)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)],
                   [[zero] * n for _ in range(n)])

    @classmethod
    def poisson(cls, pi) -> "DiracStructure":
        """Graph of a bivector: e_A = dx^A + pi^{mu A} d_mu."""
        n = len(pi)
        one, zero = RationalFunction.one(n), RationalFunction.zero(n)
        for i in range(n):
            for j in range(n):
                if pi[i][j] + pi[j][i]:
                    raise ValueError("pi must be antisymmetric")
        return cls([[pi[mu][A] for A in range(n)] for mu in range(n)],
                   [[one if mu == A else zero for A in range(n)] for mu in range(n)])

    def isotropy_defect(self):
        n = self.n
        for A in range(n):
            for B in range(A, n):
                v = sum((self.rho_T[mu][A] * self.rho_Tstar[mu][B] + self.rho_T[mu][B] * self.rho_Tstar[mu][A]
                         for mu in range(n)), RationalFunction.zero(n))
                if v:
                    return (A, B, v)
        return None

    def frame_matrix(self):
        """2n x n matrix whose column A holds (rho^mu_A ; rho_{mu A})."""
        return [row[:] for row in self.rho_T] + [row[:] for row in self.rho_Tstar]

    def frame_section(self, A: int) -> GenSection:
        n = self.n
        return GenSection([self.rho_T[mu][A] for mu in range(n)], [self.rho_Tstar[mu][A] for mu in range(n)])

    def phi(self):
        """phi[mu][A][B] fixed by the mixed lagrangian condition."""
        n = self.n
        z = RationalFunction.zero(n)
        out = [[[z] * n for _ in range(n)] for _ in range(n)]
        for mu in range(n):
            for A in range(n):
                for B in range(n):
                    acc = z
                    for k in range(n):
                        acc = acc + self.rho_T[k][A] * self.rho_Tstar[k][B].diff(mu) \
                            + self.rho_T[k][B].diff(mu) * self.rho_Tstar[k][A]
                    out[mu][A][B] = acc
        return out

    def chart(self, fibre: Sequence[tuple[str, int]] = ()) -> Chart:
        return Chart(self.n, [(f"lam{A}", 1) for A in range(1, self.n + 1)] + list(fibre))


# embedding -------------------------------------------------------------------

@dataclass
class Embedding:
    L: DiracStructure
    target: Chart                # chart of L[1] (plus fibre)
    images: dict                 # psi, b, p -> elements of target
    phi: list
    lagrangian: bool = False
    bracket_defects: list = field(default_factory=list)

    def pullback(self, f: GradedPoly) -> GradedPoly:
        imgs = {k: v for k, v in self.images.items() if k in f.chart.index}
        return substitute(f, imgs, self.target)


def _embedding_images(L: DiracStructure, target: Chart, phi) -> dict:
    n = L.n
    lam = [target.gen(f"lam{A}") for A in range(1, n + 1)]
    images = {}
    for mu in range(n):
        psi = target.zero()
        b = target.zero()
        for A in range(n):
            if L.rho_T[mu][A]:
                psi = psi + lam[A].scale(L.rho_T[mu][A])
            if L.rho_Tstar[mu][A]:
                b = b + lam[A].scale(L.rho_Tstar[mu][A])
        p = target.zero()
        for A in range(n):
            for B in range(A + 1, n):
                if phi[mu][A][B]:
                    # 1/2 phi_AB l^A l^B summed over ordered pairs
                    p = p + (lam[A] * lam[B]).scale(phi[mu][A][B])
        images[f"psi{mu + 1}"] = psi
        images[f"b{mu + 1}"] = b
        images[f"p{mu + 1}"] = p
    return images


def lambda_expressions(L: DiracStructure, chart: Chart) -> list[GradedPoly]:
    """lambda^A as functions of psi, b through the Gram left inverse of the frame."""
    n = L.n
    M = L.frame_matrix()
    Mt = linalg.transpose(M)
    left = linalg.matmul(linalg.inverse(linalg.matmul(Mt, M)), Mt)
    coords = [chart.gen(f"psi{mu}") for mu in range(1, n + 1)] + [chart.gen(f"b{mu}") for mu in range(1, n + 1)]
    return [sum((coords[k].scale(left[A][k]) for k in range(2 * n) if left[A][k]), chart.zero())
            for A in range(n)]


def constraints(L: DiracStructure, chart: Chart, phi=None) -> list[GradedPoly]:
    """Functions on the Courant chart vanishing on the image of L[1].

    Degree 1: the pairing functions of e_A; degree 2: p_mu - 1/2 phi lambda lambda.
    """
    n = L.n
    phi = phi if phi is not None else L.phi()
    out = [L.frame_section(A).as_function(chart) for A in range(n)]
    lam = lambda_expressions(L, chart)
    for mu in range(n):
        c = chart.gen(f"p{mu + 1}")
        for A in range(n):
            for B in range(A + 1, n):
                if phi[mu][A][B]:
                    c = c - (lam[A] * lam[B]).scale(phi[mu][A][B])
        out.append(c)
    return out


def build_embedding(L: DiracStructure, fibre: Sequence[tuple[str, int]] = (), phi=None) -> Embedding:
    phi = phi if phi is not None else L.phi()
    target = L.chart(fibre)
    emb = Embedding(L, target, _embedding_images(L, target, phi), phi)
    chart = Chart.courant(L.n)
    cons = constraints(L, chart, phi)
    pulled = [emb.pullback(c) for c in cons]
    if any(pulled):
        raise AssertionError("constraints do not vanish on the embedding")
    defects = []
    for i, c1 in enumerate(cons):
        for j in range(i, len(cons)):
            v = emb.pullback(poisson_bracket(c1, cons[j]))
            if v:
                defects.append((i, j, v))
    emb.lagrangian = not defects
    emb.bracket_defects = defects
    return emb


def check_invariance(L: DiracStructure, m: CourantModel, phi=None) -> tuple[bool, list]:
    """d_M of every constraint vanishes on the image (d_M is tangent to it)."""
    emb = build_embedding(L, phi=phi)
    chart = m.chart
    dM = build_dM(m, chart)
    residuals = []
    for i, c in enumerate(constraints(L, chart, emb.phi)):
        v = emb.pullback(apply(dM, c))
        if v:
            residuals.append((i, v))
    return not residuals, residuals


def poisson_phi_expected(pi, sign: int = 1):
    """sign * d_mu pi^{AB}, the phi of a graph of pi."""
    n = len(pi)
    return [[[pi[A][B].diff(mu) if sign > 0 else -pi[A][B].diff(mu) for B in range(n)]
             for A in range(n)] for mu in range(n)]


# phi^KL obstruction -------------------------------------------------------------

def phi_KL(L: DiracStructure, K: AffineConnectionK):
    """phi^KL[mu][A][B], defined by p~_mu restricted to L[1] = 1/2 phi^KL_{mu AB} lambda^A lambda^B."""
    n = L.n
    phi = L.phi()
    out = [[[phi[mu][A][B] for B in range(n)] for A in range(n)] for mu in range(n)]
    for (nu, k, mu), val in K.items():
        for A in range(n):
            for B in range(n):
                out[mu][A][B] = out[mu][A][B] + val * (L.rho_T[nu][A] * L.rho_Tstar[k][B]
                                                      - L.rho_T[nu][B] * L.rho_Tstar[k][A])
    return out


def phi_KL_from_ptilde(L: DiracStructure, K: AffineConnectionK):
    """The same tensor read off from the restriction of p~."""
    n = L.n
    emb = build_embedding(L)
    chart = Chart.courant(n)
    z = RationalFunction.zero(n)
    out = [[[z] * n for _ in range(n)] for _ in range(n)]
    for mu, pt in enumerate(tilde_p(K, chart)):
        r = emb.pullback(pt)
        for A in range(n):
            for B in range(A + 1, n):
                v = r.coefficient(f"lam{A + 1}", f"lam{B + 1}")
                out[mu][A][B] = v
                out[mu][B][A] = -v
    return out


def phi_KL_intrinsic(L: DiracStructure, K: AffineConnectionK, m: CourantModel | None = None):
    """rho_T*([e_A, e_B]) + nabla^K_{rho(e_B)} rho_T*(e_A) - nabla^K_{rho(e_A)} rho_T*(e_B)."""
    n = L.n
    m = m or CourantModel(n)
    z = RationalFunction.zero(n)
    out = [[[z] * n for _ in range(n)] for _ in range(n)]
    for A in range(n):
        for B in range(n):
            a, b = L.frame_section(A), L.frame_section(B)
            br = dorfman(a, b, m).form
            f1 = K.nabla_form(b.vec, a.form)
            f2 = K.nabla_form(a.vec, b.form)
            for mu in range(n):
                out[mu][A][B] = br[mu] + f1[mu] - f2[mu]
    return out


def phi_KL_ktilde(L: DiracStructure, K: AffineConnectionK, m: CourantModel | None = None):
    n = L.n
    m = m or CourantModel(n)
    z = RationalFunction.zero(n)
    out = [[[z] * n for _ in range(n)] for _ in range(n)]
    for A in range(n):
        for B in range(n):
            kt = k_tilde(L.frame_section(A), L.frame_section(B), m, K)
            for mu in range(n):
                out[mu][A][B] = kt.form[mu]
    return out


def swap_AB(arr):
    n = len(arr)
    return [[[arr[mu][B][A] for B in range(n)] for A in range(n)] for mu in range(n)]


@dataclass
class ObstructionReport:
    phi_KL: list
    V_pairing: dict                 # (A, B), A < B -> r x r matrix V^mu phi^KL_{mu AB}
    curvature_unobstructed: bool
    torsion_unobstructed: bool | None
    curvature_restricts: bool       # R_QE|L == R^K|L, computed directly
    torsion_restricts: bool | None  # T_QE|L == T^K|L, computed directly
    consistent: bool


def check_obstruction(L: DiracStructure, m: CourantModel, c: GenConnection, K: AffineConnectionK) -> ObstructionReport:
    n, r = L.n, c.rank
    pk = phi_KL(L, K)
    z = RationalFunction.zero(n)
    pairing = {}
    for A in range(n):
        for B in range(A + 1, n):
            M = [[z] * r for _ in range(r)]
            for mu in range(n):
                if pk[mu][A][B]:
                    M = [[x + pk[mu][A][B] * v for x, v in zip(rx, rv)] for rx, rv in zip(M, c.V[mu])]
            pairing[(A, B)] = M
    curv_ok = not any(v for M in pairing.values() for row in M for v in row)
    tors_ok = not any(v for plane in pk for row in plane for v in row) if c.is_tangent() else None

    fibre = [(s, c.fibre_degree) for s in c.fibre_names()]
    emb = build_embedding(L, fibre)
    kc = k_curvature(m, c, K)
    full = [[emb.pullback(e) for e in row] for row in kc.full]
    kpart = [[emb.pullback(e) for e in row] for row in kc.graded]
    curv_res = full == kpart
    tors_res = None
    if c.is_tangent():
        kt = k_torsion(m, c, K)
        tors_res = emb.pullback(kt.full) == emb.pullback(kt.graded)
    consistent = curv_ok == curv_res and (tors_ok is None or tors_ok == tors_res)
    return ObstructionReport(pk, pairing, curv_ok, tors_ok, curv_res, tors_res, consistent)


# restriction to L[1] ------------------------------------------------------------

@dataclass
class Restriction:
    vf: Derivation              # restricted Q_E on (x, lambda, s)
    algebroid: AlgebroidModel   # L as a Lie algebroid (bracket [e_A,e_B] = -f e_C)
    base_matches: bool          # x and lambda images equal d_L of that algebroid
    curvature_matches: bool     # (restricted vf)^2 == restriction of Q_E^2 on s


def _restrict_vf(X: Derivation, L: DiracStructure, emb: Embedding, names: Sequence[str]) -> Derivation:
    chart = X.chart
    lam = lambda_expressions(L, chart)
    images = {}
    for mu in range(L.n):
        images[f"x{mu + 1}"] = emb.pullback(X.image(f"x{mu + 1}"))
    for A in range(L.n):
        images[f"lam{A + 1}"] = emb.pullback(apply(X, lam[A]))
    for s in names:
        images[s] = emb.pullback(X.image(s))
    return Derivation(emb.target, X.degree, images)


def algebroid_of(L: DiracStructure, m: CourantModel) -> AlgebroidModel:
    """L as an algebroid, structure functions read off from d_M on lambda."""
    emb = build_embedding(L)
    chart = m.chart
    dM = build_dM(m, chart)
    n = L.n
    f = {}
    for C, lam in enumerate(lambda_expressions(L, chart)):
        img = emb.pullback(apply(dM, lam))
        for A in range(n):
            for B in range(A + 1, n):
                v = img.coefficient(f"lam{A + 1}", f"lam{B + 1}")
                if v:
                    f[(C, A, B)] = v
    return AlgebroidModel(n, n, L.rho_T, f)


def restrict_connection(L: DiracStructure, m: CourantModel, c: GenConnection) -> Restriction:
    ok, _ = check_invariance(L, m)
    if not ok:
        raise ValueError("d_M is not tangent to the embedding of L")
    fibre = [(s, c.fibre_degree) for s in c.fibre_names()]
    emb = build_embedding(L, fibre)
    QE = build_QE(m, c)
    QL = _restrict_vf(QE, L, emb, c.fibre_names())
    alg = algebroid_of(L, m)
    dL = build_dA(alg)
    base_ok = all(_as_lam(dL.image(nm), emb.target) == QL.image(nm.replace("xi", "lam"))
                  for nm in dL.names())
    R = square(QE)
    RL = square(QL)
    curv_ok = all(RL.image(s) == emb.pullback(R.image(s)) for s in c.fibre_names())
    return Restriction(QL, alg, base_ok, curv_ok)


def _as_lam(f: GradedPoly, target: Chart) -> GradedPoly:
    images = {f"xi{A}": target.gen(f"lam{A}") for A in range(1, target.n + 1) if f"xi{A}" in f.chart.index}
    return substitute(f, images, target)


@dataclass
class TorsionRestriction:
    preserved: bool                 # D maps sections of L to sections of L
    connection: AlgebroidConnection | None
    tautological_ok: bool           # tau restricted equals lambda^A t_A
    torsion_matches: bool | None    # restricted T_QE equals the algebroid torsion of the induced connection


def _t_coords(L: DiracStructure, chart: Chart) -> list[GradedPoly]:
    n = L.n
    out = []
    for A in range(n):
        t = chart.zero()
        for mu in range(n):
            if L.rho_T[mu][A]:
                t = t + chart.gen(f"s{mu + 1}").scale(L.rho_T[mu][A])
            if L.rho_Tstar[mu][A]:
                t = t + chart.gen(f"s{n + mu + 1}").scale(L.rho_Tstar[mu][A])
        out.append(t)
    return out


def _in_t_span(f: GradedPoly, L: DiracStructure, names) -> list | None:
    """Coefficients C_A with f = sum C_A t_A, or None."""
    n = L.n
    chart = f.chart
    parts = split_linear(f, names)
    M = L.frame_matrix()
    Mt = linalg.transpose(M)
    left = linalg.matmul(linalg.inverse(linalg.matmul(Mt, M)), Mt)
    coeffs = []
    for A in range(n):
        acc = chart.zero()
        for k in range(2 * n):
            if left[A][k] and parts[names[k]]:
                acc = acc + parts[names[k]].scale(left[A][k])
        coeffs.append(acc)
    t = _t_coords(L, chart)
    rebuilt = chart.zero()
    for A in range(n):
        rebuilt = rebuilt + coeffs[A] * t[A]
    return coeffs if rebuilt == f else None


def restrict_torsion(L: DiracStructure, m: CourantModel, c: GenConnection) -> TorsionRestriction:
    """For E = TM + T*M: restrict D to L when it preserves L, compare torsions."""
    if not c.is_tangent():
        raise ValueError("torsion restriction needs TM + T*M")
    n = L.n
    names = c.fibre_names()
    fibre = [(s, c.fibre_degree) for s in names]
    emb = build_embedding(L, fibre)
    QE = build_QE(m, c)
    chart = QE.chart
    target = emb.target
    t_src = _t_coords(L, chart)
    t_tgt = _t_coords(L, target)
    lam = [target.gen(f"lam{A}") for A in range(1, n + 1)]
    tau = emb.pullback(tautological_section(c, chart))
    taut_ok = tau == sum((lam[A] * t_tgt[A] for A in range(n)), target.zero())
    Gam = {}
    preserved = True
    for B in range(n):
        img = emb.pullback(apply(QE, t_src[B]))
        coeffs = _in_t_span(img, L, names)
        if coeffs is None:
            preserved = False
            break
        # Q(t_B) = C_A^C_B lambda^A t_C with C = -Gamma_A_B^C
        for C in range(n):
            for A in range(n):
                v = coeffs[C].coefficient(f"lam{A + 1}")
                if v:
                    Gam[(A, B, C)] = -v
    if not preserved:
        return TorsionRestriction(False, None, taut_ok, None)
    conn = AlgebroidConnection(n, n, Gam)
    alg = algebroid_of(L, m)
    from .algebroid import algebroid_torsion
    at = algebroid_torsion(alg, conn)
    T = emb.pullback(apply(QE, tautological_section(c, chart)))
    # express the algebroid torsion xi^b xi^c s_a in lambda and t
    graded = at.graded
    images = {f"xi{A + 1}": lam[A] for A in range(n)}
    images.update({f"s{A + 1}": t_tgt[A] for A in range(n)})
    want = substitute(graded, images, target)
    return TorsionRestriction(True, conn, taut_ok, want == T)
