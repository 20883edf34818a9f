"""Seeded battery of exact identity checks, one group per acceptance criterion.

Every group draws from its own ``random.Random`` derived from the seed, so a
group's result does not depend on which other groups ran.  Checks marked
``gating=False`` record a printed form that is known not to hold; they are
reported but do not affect the exit status.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import sympy

from . import algebroid as alg
from .connection import (GenConnection, build_QE, curvature, gualtieri_torsion, is_Q_bundle, torsion)
from .courant import (CourantModel, GenSection, build_dM, build_theta, check_master, dM_squared,
                      exterior_derivative, hamiltonian_vf, pairing)
from .dirac import (DiracStructure, build_embedding, check_invariance, check_obstruction, phi_KL,
                    poisson_phi_expected, restrict_connection)
from .graded import ChartChange
from .ktensors import (AffineConnectionK, V_endomorphism, compare_naive, double_contraction_check,
                       h_contraction, k_curvature, k_torsion, naive_curvature_matrix, tilde_p)
from .rational import RationalFunction, parse_scalar
from .ricci import CanonicalD, build_G, compare_scalar, fix_K, levi_civita, scalar_K
from .sampling import (exact_H, random_christoffel, random_connection, random_frame, random_H, random_K,
                       random_poly, random_section, random_tangent_connection, random_V_TsT)
from .transform import (gualtieri_transported, pushforward, to_primed, transform_connection, transform_K,
                        transform_model, vertical_vf)


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str = ""
    gating: bool = True


def _rng(seed, k):
    return random.Random(f"{seed}:{k}")


def _first_nonzero(matrix, label):
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            if v:
                return f"{label}[{i + 1}][{j + 1}] = {v}"
    return ""


def master(seed, samples):
    rng = _rng(seed, 1)
    out = []
    for k in range(samples):
        rep = check_master(random_H(rng, 3, degree=2))
        out.append(Check(1, f"n=3 random H #{k + 1}: {{Theta,Theta}} = 0", rep.master_holds,
                         "" if rep.master_holds else str(rep.bracket)))
    rep = check_master(exact_H(rng, 4))
    out.append(Check(1, "n=4 H=dB: {Theta,Theta} = 0", rep.master_holds))
    m = CourantModel(4, {(0, 1, 2): RationalFunction.variable(4, 3)})
    rep = check_master(m)
    bad = not rep.master_holds and not dM_squared(m).is_zero()
    out.append(Check(1, "n=4 H=x4 dx1dx2dx3: master equation and d_M^2 = 0 both fail", bad))
    out.append(Check(1, "n=4 H=x4 dx1dx2dx3: flags consistent with dH", rep.consistent))
    return out


def convention(seed, samples):
    rng = _rng(seed, 2)
    out = []
    for k in range(max(samples, 5)):
        n = 3 + k % 2
        m = random_H(rng, n, degree=1)
        X, dM = hamiltonian_vf(build_theta(m)), build_dM(m)
        bad = [g for g in m.chart.generators if X.image(g.name) != dM.image(g.name)]
        out.append(Check(2, f"n={n} #{k + 1}: X_Theta = d_M on every generator", not bad,
                         f"generator {bad[0].name}" if bad else ""))
    return out


def curvature_components(seed, samples):
    rng = _rng(seed, 3)
    out = []
    for k in range(max(samples, 5)):
        m = CourantModel(2)
        c = random_connection(rng, 2, 2, density=0.7)
        res = curvature(m, c)
        d = "" if res.matches else _first_nonzero(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(res.matrix, res.closed_form)], "R")
        out.append(Check(3, f"n=2 rank 2 #{k + 1}: Q_E^2 = closed form", res.matches, d))
    return out


def torsion_components(seed, samples):
    rng = _rng(seed, 4)
    out = []
    for k in range(max(samples, 5)):
        n = 2 if k % 2 == 0 else 3
        m = random_H(rng, n, degree=1)
        c = random_tangent_connection(rng, n, density=0.4)
        res = torsion(m, c)
        d = "" if res.matches else str(res.graded - res.T_Gamma - res.T_V - res.T_11)
        out.append(Check(4, f"n={n} #{k + 1}: Q_E(tau) = T(Gamma) + T(V) + T(1,1)", res.matches, d))
    return out


def k_splits(seed, samples):
    rng = _rng(seed, 5)
    out = []
    for k in range(samples):
        n = 2
        m = random_H(rng, n)
        c = random_tangent_connection(rng, n, density=0.5)
        K = random_K(rng, n)
        kc, kt = k_curvature(m, c, K), k_torsion(m, c, K)
        out.append(Check(5, f"#{k + 1}: R_QE = R^K + V^mu p~_mu", kc.split_ok))
        out.append(Check(5, f"#{k + 1}: T_QE = T^K + p~_mu s^mu", kt.split_ok))
        a, b = random_section(rng, n, degree=1), random_section(rng, n, degree=1)
        cur, tor = double_contraction_check(m, c, K, a, b, kc, kt)
        out.append(Check(5, f"#{k + 1}: double contraction recovers R^K(a,b), T^K(a,b)", cur and tor))
    return out


def comparison(seed, samples):
    rng = _rng(seed, 6)
    out = []
    n = 3
    m = random_H(rng, n, degree=1)
    m0 = CourantModel(n)
    c = random_tangent_connection(rng, n, density=0.3)
    K = random_K(rng, n, density=0.4)
    kc, kt = k_curvature(m, c, K), k_torsion(m, c, K)
    kc0, kt0 = k_curvature(m0, c, K), k_torsion(m0, c, K)
    lit_c = lit_t = h0 = resid = True
    first_c = first_t = ""
    for _ in range(max(samples, 20)):
        a, b = random_section(rng, n, degree=1), random_section(rng, n, degree=1)
        lit = compare_naive(m, c, K, a, b, kc, kt)
        lit_c &= lit.curvature_ok
        lit_t &= bool(lit.torsion_ok)
        if not lit.curvature_ok and not first_c:
            first_c = _first_nonzero(lit.curvature_residual, "curvature")
        if not lit.torsion_ok and not first_t:
            comps = lit.torsion_residual.components()
            i = next(i for i, v in enumerate(comps) if v)
            first_t = f"torsion[{i + 1}] = {comps[i]}"
        z = compare_naive(m0, c, K, a, b, kc0, kt0, skew=True)
        h0 &= z.curvature_ok and bool(z.torsion_ok)
        hx = h_contraction(m, a.vec, b.vec)
        zero = [RationalFunction.zero(n)] * n
        half_d = exterior_derivative(pairing(a, b)).scale(RationalFunction.constant(n, Fraction(1, 2)))
        resid &= lit.curvature_residual == V_endomorphism(c, hx) and \
            lit.torsion_residual == GenSection(zero, hx) + half_d
    out.append(Check(6, "random H: R^K(a,b) = R_D(a,b) + V_K~(a,b) as stated", lit_c, first_c, gating=False))
    out.append(Check(6, "random H: T^K(a,b) = T_D(a,b) + K~(a,b) as stated", lit_t, first_t, gating=False))
    out.append(Check(6, "H=0, skew bracket: both comparisons hold", h0))
    out.append(Check(6, "residuals equal V_{H(X,Y,.)} and H(X,Y,.) + 1/2 d<a,b>", resid))
    return out


CHANGE2 = (["x1", "x2+x1^2"], ["x1", "x2-x1^2"])


def tensoriality(seed, samples):
    rng = _rng(seed, 7)
    n = 2
    ch = ChartChange.parse(*CHANGE2)
    m = CourantModel(n)
    c = random_tangent_connection(rng, n, density=0.5)
    K = random_K(rng, n)
    chart = build_QE(m, c).chart
    m2, c2, K2 = transform_model(m, ch), transform_connection(m, c, ch), transform_K(K, ch, chart)
    out = []
    pt, pt2 = tilde_p(K, chart), tilde_p(K2, chart)
    P = [[ch.Jinv[j][i] for j in range(n)] for i in range(n)]
    ok = all(to_primed(sum((pt[nu].scale(P[mu][nu]) for nu in range(n)), chart.zero()), ch) == pt2[mu]
             for mu in range(n))
    out.append(Check(7, "p~ transforms as a one-form", ok))
    kc, kc2 = k_curvature(m, c, K), k_curvature(m2, c2, K2)
    ok = pushforward(vertical_vf(kc.graded, c, chart), ch, "tangent") == vertical_vf(kc2.graded, c2, chart)
    out.append(Check(7, "R^K transforms tensorially", ok))
    ok = to_primed(k_torsion(m, c, K).graded, ch, "tangent") == k_torsion(m2, c2, K2).graded
    out.append(Check(7, "T^K transforms tensorially", ok))
    anomaly_ok = literal_ok = gual_ok = flin_ok = True
    for _ in range(samples):
        a, b, e = (random_section(rng, n, degree=1) for _ in range(3))
        f = random_poly(rng, n, degree=2)
        before, after = gualtieri_transported(m, c, ch, a, b, e)
        gual_ok &= before == after
        flin_ok &= gualtieri_torsion(m, c, a.scale(f), b, e) == f * gualtieri_torsion(m, c, a, b, e)
        R1 = naive_curvature_matrix(m, c, a.scale(f), b)
        R0 = naive_curvature_matrix(m, c, a, b)
        anomaly = [[x - f * y for x, y in zip(r1, r0)] for r1, r0 in zip(R1, R0)]
        ab = pairing(a, b)
        Vdf = V_endomorphism(c, exterior_derivative(f).form)
        half = RationalFunction.constant(n, Fraction(-1, 2))
        anomaly_ok &= anomaly == [[half * ab * v for v in row] for row in Vdf]
        literal_ok &= anomaly == [[ab * v for v in row] for row in Vdf]
    out.append(Check(7, "Gualtieri torsion is invariant under the chart change", gual_ok))
    out.append(Check(7, "Gualtieri torsion is C-infinity linear in its first slot", flin_ok))
    out.append(Check(7, "R_D(fa,b) - f R_D(a,b) = -1/2 <a,b> V_df", anomaly_ok))
    out.append(Check(7, "R_D(fa,b) - f R_D(a,b) = <a,b> V_df as stated", literal_ok, gating=False))
    return out


def _P(rows, n):
    return [[parse_scalar(s, n) for s in row] for row in rows]


SO3 = [["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]]
NON_POISSON = [["0", "x1*x2", "0"], ["-x1*x2", "0", "x3"], ["0", "-x3", "0"]]


def dirac(seed, samples):
    rng = _rng(seed, 8)
    n = 3
    m0 = CourantModel(n)
    out = []
    L = DiracStructure.tangent(n)
    out.append(Check(8, "TM: lagrangian and d_M-invariant",
                     build_embedding(L).lagrangian and check_invariance(L, m0)[0]))
    zero = True
    for _ in range(samples):
        K = random_K(rng, n)
        zero &= not any(v for plane in phi_KL(L, K) for row in plane for v in row)
    out.append(Check(8, "TM: phi^KL = 0 for random K", zero))
    pi = _P(SO3, n)
    Lp = DiracStructure.poisson(pi)
    out.append(Check(8, "graph of a Poisson bivector: lagrangian and invariant",
                     build_embedding(Lp).lagrangian and check_invariance(Lp, m0)[0]))
    out.append(Check(8, "graph of a non-Poisson bivector: invariance fails",
                     not check_invariance(DiracStructure.poisson(_P(NON_POISSON, n)), m0)[0]))
    out.append(Check(8, "phi = +d pi at K = 0", Lp.phi() == poisson_phi_expected(pi, 1)))
    out.append(Check(8, "phi = -d pi at K = 0 as stated", Lp.phi() == poisson_phi_expected(pi, -1),
                     gating=False))
    c = random_tangent_connection(rng, 2, density=0.4)
    L2 = DiracStructure.poisson(_P([["0", "1"], ["-1", "0"]], 2))
    rep = check_obstruction(L2, CourantModel(2), c, random_K(rng, 2))
    out.append(Check(8, "phi^KL obstruction agrees with direct restriction", rep.consistent))
    L2t = DiracStructure.tangent(2)
    rep = check_obstruction(L2t, CourantModel(2), c, AffineConnectionK(2))
    out.append(Check(8, "unobstructed: K-curvature and K-torsion restrict to L",
                     rep.curvature_unobstructed and rep.curvature_restricts and bool(rep.torsion_restricts)))
    r = restrict_connection(L2t, CourantModel(2), c)
    out.append(Check(8, "restricted Q_E: base is d_L, square is the restricted curvature",
                     r.base_matches and r.curvature_matches))
    return out


def algebroid(seed, samples):
    rng = _rng(seed, 9)
    out = []
    for k in range(samples):
        n = 2 + k % 2
        m = alg.frame_algebroid(random_frame(rng, n))
        c = alg.AlgebroidConnection(n, n, {(a, b, g): random_poly(rng, n, degree=1, terms=2, density=0.6)
                                           for a in range(n) for b in range(n) for g in range(n)})
        out.append(Check(9, f"#{k + 1}: d_A^2 = 0 on a frame algebroid", alg.check_algebroid(m)))
        out.append(Check(9, f"#{k + 1}: Q_A(tau_A) = bracket torsion", alg.algebroid_torsion(m, c).matches))
    # identity anchor with a nonzero bracket of coordinate fields: the anchor is not a morphism
    bad = alg.AlgebroidModel(3, 3, alg.AlgebroidModel.tangent(3).rho, {(0, 1, 2): RationalFunction.one(3)})
    out.append(Check(9, "d_A^2 != 0 detected when the anchor is not a bracket morphism",
                     not alg.check_algebroid(bad)))
    return out


def classical_scalar(g_rows) -> sympy.Expr:
    """Scalar curvature from Christoffel symbols, computed with sympy."""
    n = len(g_rows)
    xs = sympy.symbols(f"x1:{n + 1}")
    g = sympy.Matrix(n, n, lambda i, j: sympy.sympify(g_rows[i][j].replace("^", "**"),
                                                      locals={str(x): x for x in xs}))
    gi = g.inv()
    Gam = [[[sum(gi[l, k] * (sympy.diff(g[k, i], xs[j]) + sympy.diff(g[k, j], xs[i]) - sympy.diff(g[i, j], xs[k]))
                 for k in range(n)) / 2 for j in range(n)] for i in range(n)] for l in range(n)]

    def riem(r, s, m, v):   # R^r_{s m v}
        t = sympy.diff(Gam[r][v][s], xs[m]) - sympy.diff(Gam[r][m][s], xs[v])
        t += sum(Gam[r][m][l] * Gam[l][v][s] - Gam[r][v][l] * Gam[l][m][s] for l in range(n))
        return t
    ric = [[sum(riem(r, s, r, v) for r in range(n)) for v in range(n)] for s in range(n)]
    return sympy.simplify(sum(gi[s, v] * ric[s][v] for s in range(n) for v in range(n)))


def to_sympy(f: RationalFunction) -> sympy.Expr:
    xs = sympy.symbols(f"x1:{f.n + 1}")
    return sympy.sympify(str(f).replace("^", "**"), locals={str(x): x for x in xs})


CURVED_METRIC = [["1", "x1"], ["x1", "1+x1^2+x2^2"]]


def scalar(seed, samples):
    rng = _rng(seed, 10)
    out = []
    n = 2
    g = _P(CURVED_METRIC, n)
    m = CourantModel(n)
    cd = CanonicalD(m, levi_civita(g))
    val = scalar_K(m, cd.connection(), fix_K(cd), build_G(g))
    ok = sympy.simplify(to_sympy(val) - classical_scalar(CURVED_METRIC)) == 0
    out.append(Check(10, "Levi-Civita, V=B=H=0: Scal^K = classical scalar curvature", ok, str(val)))
    for k in range(samples):
        nn = 2 if k % 2 == 0 else 3
        mm = random_H(rng, nn, degree=1)
        gg = [[RationalFunction.one(nn) if i == j else RationalFunction.zero(nn) for j in range(nn)]
              for i in range(nn)]
        gg[-1][-1] = parse_scalar("1+x1^2", nn)
        z = RationalFunction.zero(nn)
        B = [[z] * nn for _ in range(nn)]
        B[0][1] = random_poly(rng, nn, degree=1)
        B[1][0] = -B[0][1]
        cd = CanonicalD(mm, random_christoffel(rng, nn), random_V_TsT(rng, nn))
        cmp = compare_scalar(build_G(gg, B), cd)
        d = ""
        if not cmp.matches:
            d = f"difference {cmp.difference}"
        out.append(Check(10, f"n={nn} #{k + 1}: Scal^K with fixed K = closed-form scalar", cmp.matches, d))
        out.append(Check(10, f"n={nn} #{k + 1}: fixed K has vanishing K-torsion", cmp.torsion_free))
    return out


def q_bundle(seed, samples):
    rng = _rng(seed, 11)
    out = []
    m = CourantModel(2)
    for k in range(samples):
        kind = k % 3
        if kind == 0:
            c = random_connection(rng, 2, 2, density=0.7)
        elif kind == 1:
            c = random_connection(rng, 2, 2, density=0.7, with_V=False)
        else:
            # flat: Gamma = 0, or a constant diagonal Gamma
            c = GenConnection(2, 2, {(mu, a, a): RationalFunction.constant(2, rng.randint(-2, 2))
                                     for mu in range(2) for a in range(2)})
        rep = is_Q_bundle(m, c)
        out.append(Check(11, f"#{k + 1}: curvature = 0 iff V = 0 and R_nabla = 0", rep.consistent,
                         f"zero={rep.curvature_zero} V=0={rep.V_zero} flat={rep.flat}"))
    return out


GROUPS = [master, convention, curvature_components, torsion_components, k_splits, comparison,
          tensoriality, dirac, algebroid, scalar, q_bundle]


def run_all(seed: int = 0, samples: int = 3) -> list[Check]:
    out = []
    for group in GROUPS:
        out.extend(group(seed, samples))
    return out
