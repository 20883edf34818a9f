from fractions import Fraction

import pytest
from hypothesis import given, settings

from gradedq.connection import (GenConnection, build_QE, check_pairing_compat, covariant_derivative, curvature,
                                curvature_closed_form, flat_curvature_R_nabla, gualtieri_torsion, is_Q_bundle,
                                naive_torsion, torsion, vf_matrix)
from gradedq.courant import CourantModel, GenSection, build_dM, exterior_derivative, pairing, vector_action
from gradedq.graded import parse_graded
from gradedq.rational import RationalFunction, parse_scalar
from gradedq.ricci import CanonicalD
from gradedq.sampling import (random_christoffel, random_connection, random_H, random_poly, random_section,
                              random_tangent_connection, random_V_TsT)

from strategies import rng_from, seeds, settings_fast


def S(text, n=2):
    return parse_scalar(text, n)


def const(n, v):
    return RationalFunction.constant(n, v)


# the homological vector field Q_E ------------------------------------------

def test_trivial_connection_extends_dM_by_zero():
    m = CourantModel(2)
    c = GenConnection(2, 3)
    Q = build_QE(m, c)
    dM = build_dM(m, Q.chart)
    for g in Q.chart.generators:
        want = Q.chart.zero() if g.name.startswith("s") else dM.image(g.name)
        assert Q.image(g.name) == want


def test_QE_on_fibre_generators():
    m = CourantModel(2)
    c = GenConnection(2, 2, Gamma={(0, 1, 0): S("x2")}, V={(1, 0, 1): S("3")})
    Q = build_QE(m, c)
    ch = Q.chart
    assert Q.image("s1") == parse_graded("x2*psi1*s2", ch)
    assert Q.image("s2") == parse_graded("3*b2*s1", ch)


@settings(**settings_fast)
@given(seeds)
def test_QE_is_projectable(seed):
    from gradedq.derivations import is_projectable
    rng = rng_from(seed)
    c = random_connection(rng, 2, 2)
    Q = build_QE(CourantModel(2), c)
    base = [g.name for g in Q.chart.generators if not g.name.startswith("s")]
    assert is_projectable(Q, base)


def test_bad_shape_rejected():
    with pytest.raises(ValueError):
        GenConnection(2, 2, Gamma=[[[S("1")]]])
    with pytest.raises(KeyError):
        GenConnection.tangent(2, {"Gamma_XX": {}})
    with pytest.raises(ValueError):
        GenConnection.tangent(2, {"V_TT": {(0, 2, 0): S("1")}})


# curvature -------------------------------------------------------------------

def test_curvature_zero_for_trivial_connection():
    res = curvature(CourantModel(2), GenConnection(2, 2))
    assert res.vf.is_zero() and res.matches and res.vertical


def test_curvature_V_zero_only_psipsi():
    # Gamma_2 = [[0, x1], [0, 0]]: R_nabla(d1, d2) = d1 Gamma_2 = E_12
    c = GenConnection(2, 2, Gamma={(1, 0, 1): S("x1")})
    res = curvature(CourantModel(2), c)
    ch = res.vf.chart
    assert res.matches
    assert res.matrix[0][1] == parse_graded("psi1*psi2", ch)
    assert res.matrix[0][0].is_zero() and res.matrix[1][0].is_zero() and res.matrix[1][1].is_zero()


def _commutator(A, B):
    r = len(A)
    return [[sum(A[i][k] * B[k][j] - B[i][k] * A[k][j] for k in range(r)) for j in range(r)] for i in range(r)]


def test_curvature_bb_block_is_plus_commutator():
    # Constant V, Gamma = 0, H = 0: composing Q_E twice by hand gives
    # Q_E^2 s_beta = V^mu p_mu s + [V^1, V^2]_{gamma beta} b1 b2 s_gamma.
    V1, V2 = [[1, 2], [0, -1]], [[0, 1], [3, 0]]
    comm = _commutator(V1, V2)
    assert any(any(row) for row in comm)
    V = {(mu, a, b): const(2, M[a][b]) for mu, M in enumerate((V1, V2)) for a in range(2) for b in range(2)}
    c = GenConnection(2, 2, V=V)
    res = curvature(CourantModel(2), c)
    assert res.matches
    for g in range(2):
        for be in range(2):
            coeff = res.vf.image(f"s{be + 1}").coefficient("b1", "b2", f"s{g + 1}")
            assert coeff == const(2, comm[g][be])
    # the opposite sign in the b-b block would not reproduce Q_E^2
    flipped = [[-x for x in row] for row in comm]
    assert flipped != comm


def test_curvature_p_part_is_V():
    V = {(0, 0, 1): S("x2"), (1, 1, 0): S("2")}
    c = GenConnection(2, 2, V=V)
    res = curvature(CourantModel(2), c)
    assert res.vf.image("s2").coefficient("p1", "s1") == S("x2")
    assert res.vf.image("s1").coefficient("p2", "s2") == S("2")


@settings(**settings_fast)
@given(seeds)
def test_curvature_matches_closed_form(seed):
    rng = rng_from(seed)
    m = random_H(rng, 3, degree=1)
    c = random_connection(rng, 3, 2, density=0.4)
    res = curvature(m, c)
    assert res.matches
    assert res.vertical


def test_curvature_psipsi_H_term():
    # H = dx1 dx2 dx3, Gamma = 0, V^3 = E_11: psi1 psi2 coefficient is 1/2 H_312 V^3 twice
    m = CourantModel(3, {(0, 1, 2): S("1", 3)})
    c = GenConnection(3, 1, V={(2, 0, 0): S("1", 3)})
    res = curvature(m, c)
    assert res.matches
    assert res.matrix[0][0].coefficient("psi1", "psi2") == const(3, 1)


def test_closed_form_chart_default():
    c = GenConnection(2, 1, Gamma={(0, 0, 0): S("x2")})
    R = curvature_closed_form(CourantModel(2), c)
    # d_2 Gamma_1 appears as psi2 psi1 = - psi1 psi2
    assert R[0][0] == parse_graded("-psi1*psi2", c.chart())


# Q-bundle criterion ---------------------------------------------------------------

def test_q_bundle_trivial():
    rep = is_Q_bundle(CourantModel(2), GenConnection(2, 2))
    assert rep.curvature_zero and rep.consistent


def test_q_bundle_V_nonzero():
    rep = is_Q_bundle(CourantModel(2), GenConnection(2, 1, V={(0, 0, 0): S("1")}))
    assert not rep.curvature_zero and not rep.V_zero and rep.consistent


def test_q_bundle_curved_nabla():
    c = GenConnection(2, 1, Gamma={(0, 0, 0): S("x2")})
    assert flat_curvature_R_nabla(c)
    rep = is_Q_bundle(CourantModel(2), c)
    assert not rep.curvature_zero and not rep.flat and rep.consistent


def test_q_bundle_flat_nontrivial():
    # Gamma_mu = d_mu g * id is flat but nonzero
    c = GenConnection(2, 2, Gamma={(0, 0, 0): S("2*x1"), (0, 1, 1): S("2*x1"), (1, 0, 0): S("1"), (1, 1, 1): S("1")})
    rep = is_Q_bundle(CourantModel(2), c)
    assert rep.curvature_zero and rep.flat and rep.consistent


# torsion -------------------------------------------------------------------------

def test_torsion_trivial_connection():
    res = torsion(CourantModel(2), GenConnection.tangent(2))
    assert res.graded == parse_graded("p1*s3 + p2*s4", res.graded.chart)
    assert res.matches


def test_torsion_pure_H():
    m = CourantModel(3, {(0, 1, 2): S("x1", 3)})
    res = torsion(m, GenConnection.tangent(3))
    want = parse_graded("x1*psi2*psi3*s4 + x1*psi3*psi1*s5 + x1*psi1*psi2*s6 + p1*s4 + p2*s5 + p3*s6",
                        res.graded.chart)
    assert res.graded == want
    assert res.matches


@settings(**settings_fast)
@given(seeds)
def test_torsion_matches_parts(seed):
    rng = rng_from(seed)
    n = 2 + seed % 2
    m = random_H(rng, n, degree=1)
    res = torsion(m, random_tangent_connection(rng, n, density=0.4))
    assert res.matches


def test_torsion_requires_tangent():
    with pytest.raises(ValueError):
        torsion(CourantModel(2), GenConnection(2, 3))


# classical side -------------------------------------------------------------

def test_covariant_derivative_examples():
    c = GenConnection(2, 2, Gamma={(0, 1, 0): S("x2")}, V={(1, 0, 1): S("5")})
    one, zero = S("1"), S("0")
    # D_{d1} e_1 = x2 e_2
    assert covariant_derivative(c, GenSection([one, zero], [zero, zero]), [one, zero]) == [zero, S("x2")]
    # D_{dx2} e_2 = 5 e_1
    assert covariant_derivative(c, GenSection([zero, zero], [zero, one]), [zero, one]) == [S("5"), zero]


def _index_oracle(c, a, sigma):
    n, r = c.n, c.rank
    out = []
    for al in range(r):
        acc = vector_action(a.vec, sigma[al])
        for mu in range(n):
            for be in range(r):
                acc = acc + a.vec[mu] * c.Gamma[mu][al][be] * sigma[be] + a.form[mu] * c.V[mu][al][be] * sigma[be]
        out.append(acc)
    return out


@settings(**settings_fast)
@given(seeds)
def test_covariant_derivative_oracle_and_leibniz(seed):
    rng = rng_from(seed)
    n, r = 2, 3
    c = random_connection(rng, n, r)
    a = random_section(rng, n, degree=1)
    sigma = [random_poly(rng, n) for _ in range(r)]
    f = random_poly(rng, n)
    assert covariant_derivative(c, a, sigma) == _index_oracle(c, a, sigma)
    lhs = covariant_derivative(c, a, [f * s for s in sigma])
    rhs = [vector_action(a.vec, f) * s + f * d for s, d in zip(sigma, covariant_derivative(c, a, sigma))]
    assert lhs == rhs
    # function-linear in a
    assert covariant_derivative(c, a.scale(f), sigma) == [f * d for d in covariant_derivative(c, a, sigma)]


@settings(**settings_fast)
@given(seeds)
def test_naive_torsion_diagonal(seed):
    # D_a a - D_a a - [[a,a]] = -1/2 d<a,a>
    rng = rng_from(seed)
    n = 2
    m = CourantModel(n)
    c = random_tangent_connection(rng, n)
    a = random_section(rng, n, degree=1)
    half = const(n, Fraction(-1, 2))
    assert naive_torsion(m, c, a, a) == exterior_derivative(pairing(a, a)).scale(half)
    assert naive_torsion(m, c, a, a, skew=True).is_zero()


def _canonical(rng, n, m):
    return CanonicalD(m, random_christoffel(rng, n), random_V_TsT(rng, n)).connection()


@settings(**settings_fast)
@given(seeds)
def test_gualtieri_torsion_tensorial_and_skew(seed):
    rng = rng_from(seed)
    n = 2
    m = CourantModel(n)
    c = _canonical(rng, n, m)
    assert check_pairing_compat(c)
    a, b, e = (random_section(rng, n, degree=1) for _ in range(3))
    f = random_poly(rng, n, degree=1)
    T = gualtieri_torsion(m, c, a, b, e)
    assert gualtieri_torsion(m, c, a.scale(f), b, e) == f * T
    assert gualtieri_torsion(m, c, a, b.scale(f), e) == f * T
    assert gualtieri_torsion(m, c, a, b, e.scale(f)) == f * T
    assert gualtieri_torsion(m, c, b, a, e) == -T
    assert gualtieri_torsion(m, c, a, e, b) == -T


def test_gualtieri_torsion_levi_civita_type_vanishes():
    # Gamma symmetric, H = 0, V = 0: the canonical connection is torsion-free
    m = CourantModel(2)
    z = S("0")
    G = [[[S("x1"), z], [z, S("x2")]], [[z, S("1")], [S("x1"), z]]]
    G[1][0][0] = G[0][0][1]
    G[0][1][1] = G[1][1][0]
    c = CanonicalD(m, G).connection()
    for a, b, e in [(GenSection.basis(2, i), GenSection.basis(2, j), GenSection.basis(2, k))
                    for i in range(4) for j in range(4) for k in range(4)]:
        assert gualtieri_torsion(m, c, a, b, e).is_zero()


def test_pairing_compat_examples():
    assert check_pairing_compat(GenConnection.tangent(2))
    m = CourantModel(2, {})
    assert check_pairing_compat(CanonicalD(m, random_christoffel(rng_from(1), 2)).connection())
    bad = GenConnection.tangent(2, {"Gamma_TT": {(0, 0, 0): S("1")}})
    assert not check_pairing_compat(bad)


def test_vf_matrix_rejects_nonlinear():
    m = CourantModel(1)
    c = GenConnection(1, 2)
    Q = build_QE(m, c)
    from gradedq.derivations import Derivation
    ch = Q.chart
    X = Derivation(ch, 0, {"s1": parse_graded("s1*s2", ch)})
    with pytest.raises(ValueError):
        vf_matrix(X, c)
