from fractions import Fraction

from hypothesis import given, settings

from gradedq.connection import GenConnection, curvature
from gradedq.courant import CourantModel, GenSection, exterior_derivative, pairing
from gradedq.graded import Chart, parse_graded
from gradedq.ktensors import (AffineConnectionK, V_endomorphism, compare_naive, contract2, contraction_vf,
                              double_contraction_check, h_contraction, k_curvature, k_tilde, k_torsion,
                              p_elimination, t11_formula, t_nabla_formula, t_V_formula, tilde_p)
from gradedq.derivations import apply
from gradedq.rational import RationalFunction, parse_scalar
from gradedq.sampling import (random_H, random_K, random_poly, random_section, random_tangent_connection)

from strategies import rng_from, seeds, settings_fast

C2 = Chart.courant(2)


def S(text, n=2):
    return parse_scalar(text, n)


def test_tilde_p_example():
    K = AffineConnectionK(2, {(0, 1, 0): S("x2"), (1, 0, 1): S("3")})
    pt = tilde_p(K, C2)
    assert pt[0] == parse_graded("p1 + x2*psi1*b2", C2)
    assert pt[1] == parse_graded("p2 + 3*psi2*b1", C2)
    assert p_elimination(K, C2)["p1"] == parse_graded("-x2*psi1*b2", C2)


def test_contraction_kills_tilde_p():
    K = AffineConnectionK(2, {(0, 1, 0): S("x2"), (1, 1, 1): S("x1")})
    a = GenSection.parse(["1", "x1"], ["x2", "2"])
    i_a = contraction_vf(a, K, C2)
    for pt in tilde_p(K, C2):
        assert apply(i_a, pt).is_zero()
    assert apply(i_a, C2.gen("psi2")) == C2.scalar(S("x1"))
    assert apply(i_a, C2.gen("b1")) == C2.scalar(S("x2"))
    # the opposite correction leaves a remainder
    i_bad = contraction_vf(a, K, C2, sign=-1)
    assert any(not apply(i_bad, pt).is_zero() for pt in tilde_p(K, C2))


def test_contract2_examples():
    a, b = GenSection.parse(["1", "0"], ["0", "0"]), GenSection.parse(["0", "0"], ["0", "1"])
    # iota_b iota_a (psi1 b2) = iota_b (b2) = 1
    assert contract2(parse_graded("psi1*b2", C2), a, b) == C2.one()
    assert contract2(parse_graded("psi1*b2", C2), b, a) == -C2.one()


# K-curvature -------------------------------------------------------------

@settings(**settings_fast)
@given(seeds)
def test_k_curvature_split_and_nabla_V(seed):
    rng = rng_from(seed)
    m = random_H(rng, 2)
    c = random_tangent_connection(rng, 2, density=0.4)
    kc = k_curvature(m, c, random_K(rng, 2))
    assert kc.split_ok
    assert kc.nabla_V_ok
    for row in kc.graded:
        for e in row:
            assert all(e.coefficient(f"p{i}").is_zero() for i in (1, 2))


def test_k_curvature_without_V_is_R_QE():
    rng = rng_from(11)
    c = random_tangent_connection(rng, 2, with_V=False)
    m = CourantModel(2)
    full = curvature(m, c).matrix
    for K in (AffineConnectionK(2), random_K(rng, 2)):
        assert k_curvature(m, c, K).graded == full


def test_k_curvature_trivial_K_drops_p():
    c = GenConnection(2, 1, V={(0, 0, 0): S("1")})
    kc = k_curvature(CourantModel(2), c, AffineConnectionK(2))
    assert kc.full[0][0] == parse_graded("p1", kc.full[0][0].chart)
    assert kc.graded[0][0].is_zero()


@settings(**settings_fast)
@given(seeds)
def test_double_contraction(seed):
    rng = rng_from(seed)
    m = random_H(rng, 2)
    c = random_tangent_connection(rng, 2, density=0.4)
    K = random_K(rng, 2)
    a, b = random_section(rng, 2, degree=1), random_section(rng, 2, degree=1)
    assert double_contraction_check(m, c, K, a, b) == (True, True)


def test_double_contraction_opposite_sign_fails():
    rng = rng_from(5)
    m = CourantModel(2)
    c = random_tangent_connection(rng, 2, density=0.8)
    K = AffineConnectionK(2, {(0, 0, 0): S("1"), (1, 0, 1): S("x1")})
    a, b = GenSection.parse(["1", "x2"], ["x1", "1"]), GenSection.parse(["x1", "1"], ["1", "x2"])
    assert double_contraction_check(m, c, K, a, b) == (True, True)
    assert double_contraction_check(m, c, K, a, b, sign=-1) != (True, True)


# K-torsion ------------------------------------------------------------------

@settings(**settings_fast)
@given(seeds)
def test_k_torsion_split(seed):
    rng = rng_from(seed)
    m = random_H(rng, 2 + seed % 2, degree=1)
    n = m.n
    kt = k_torsion(m, random_tangent_connection(rng, n, density=0.4), random_K(rng, n))
    assert kt.split_ok
    assert kt.graded == kt.part("nabla") + kt.part("V") + kt.part("11")


@settings(**settings_fast)
@given(seeds)
def test_k_torsion_classical_parts(seed):
    rng = rng_from(seed)
    n = 3
    m = random_H(rng, n, degree=1)
    c = random_tangent_connection(rng, n, density=0.4)
    K = random_K(rng, n)
    kt = k_torsion(m, c, K)
    z = [RationalFunction.zero(n)] * n
    X, Y = random_section(rng, n, 1).vec, random_section(rng, n, 1).vec
    nu, lam = random_section(rng, n, 1).form, random_section(rng, n, 1).form
    assert kt.evaluate(GenSection(X, z), GenSection(Y, z)) == t_nabla_formula(m, c, X, Y)
    assert kt.evaluate(GenSection(z, nu), GenSection(z, lam)) == t_V_formula(c, nu, lam)
    assert kt.evaluate(GenSection(X, z), GenSection(z, nu)) == t11_formula(c, K, X, nu)


def test_k_torsion_trivial():
    # Gamma = V = 0, H = 0, K = 0: T_QE = p_mu s^mu, all of it is p~
    from gradedq.connection import GenConnection as GC
    kt = k_torsion(CourantModel(2), GC.tangent(2), AffineConnectionK(2))
    assert kt.graded.is_zero() and kt.split_ok


# K-tilde ----------------------------------------------------------------------

def _k_tilde_oracle(a, b, K):
    """H = 0 closed form: 1/2(eta d X - X d eta) - 1/2(xi d Y - Y d xi) plus the K terms."""
    n = a.n
    X, xi, Y, eta = a.vec, a.form, b.vec, b.form
    out = []
    half = RationalFunction.constant(n, Fraction(1, 2))
    for mu in range(n):
        acc = RationalFunction.zero(n)
        for nu in range(n):
            acc = acc + half * (eta[nu] * X[nu].diff(mu) - X[nu] * eta[nu].diff(mu))
            acc = acc - half * (xi[nu] * Y[nu].diff(mu) - Y[nu] * xi[nu].diff(mu))
            for rho in range(n):
                k = K.coeff(nu, rho, mu)
                acc = acc + k * (Y[nu] * xi[rho] - X[nu] * eta[rho])
        out.append(acc)
    return out


@settings(**settings_fast)
@given(seeds)
def test_k_tilde_oracle(seed):
    rng = rng_from(seed)
    n = 2
    K = random_K(rng, n)
    a, b = random_section(rng, n), random_section(rng, n)
    kt = k_tilde(a, b, CourantModel(n), K)
    assert not any(kt.vec)
    assert list(kt.form) == _k_tilde_oracle(a, b, K)


@settings(**settings_fast)
@given(seeds)
def test_k_tilde_skew_and_anomaly(seed):
    rng = rng_from(seed)
    n = 2
    m = random_H(rng, 3, degree=1) if seed % 2 else CourantModel(n)
    n = m.n
    K = random_K(rng, n)
    a, b = random_section(rng, n, 1), random_section(rng, n, 1)
    f = random_poly(rng, n)
    assert k_tilde(a, b, m, K) == -k_tilde(b, a, m, K)
    # k_tilde(fa, b) - f k_tilde(a, b) = 1/2 <a,b> df
    half = RationalFunction.constant(n, Fraction(1, 2))
    lhs = k_tilde(a.scale(f), b, m, K) - k_tilde(a, b, m, K).scale(f)
    assert lhs == exterior_derivative(f).scale(half * pairing(a, b))


def test_k_tilde_H_term():
    # vector fields only, K = 0: k_tilde(X, Y) = H(X,Y,.) from the twisted bracket
    m = CourantModel(3, {(0, 1, 2): S("x3", 3)})
    a, b = GenSection.parse(["1", "0", "0"], ["0"] * 3), GenSection.parse(["0", "1", "0"], ["0"] * 3)
    got = k_tilde(a, b, m, AffineConnectionK(3))
    hx = h_contraction(m, a.vec, b.vec)
    assert hx == [S("0", 3), S("0", 3), S("x3", 3)]
    assert list(got.form) == hx


# comparison with the naive operators ------------------------------------------

@settings(**settings_fast)
@given(seeds)
def test_comparison_holds_for_H_zero_skew(seed):
    rng = rng_from(seed)
    n = 2
    m = CourantModel(n)
    c = random_tangent_connection(rng, n, density=0.4)
    K = random_K(rng, n)
    a, b = random_section(rng, n, 1), random_section(rng, n, 1)
    res = compare_naive(m, c, K, a, b, skew=True)
    assert res.curvature_ok and res.torsion_ok and res.first_difference is None


@settings(**settings_fast)
@given(seeds)
def test_comparison_residuals(seed):
    rng = rng_from(seed)
    n = 3
    m = random_H(rng, n, degree=1)
    c = random_tangent_connection(rng, n, density=0.3)
    K = random_K(rng, n, density=0.4)
    a, b = random_section(rng, n, 1), random_section(rng, n, 1)
    res = compare_naive(m, c, K, a, b)
    hx = h_contraction(m, a.vec, b.vec)
    half = RationalFunction.constant(n, Fraction(1, 2))
    zero = [RationalFunction.zero(n)] * n
    assert res.curvature_residual == V_endomorphism(c, hx)
    assert res.torsion_residual == GenSection(zero, hx) + exterior_derivative(pairing(a, b)).scale(half)


def test_comparison_fails_as_stated_for_nonzero_H():
    # the unmodified statement breaks as soon as H(X,Y,.) and <a,b> are nonzero
    m = CourantModel(3, {(0, 1, 2): S("1", 3)})
    c = GenConnection.tangent(3, {"V_TsTs": {(2, 0, 0): S("1", 3)}})
    K = AffineConnectionK(3)
    a = GenSection.parse(["1", "0", "0"], ["0", "0", "0"])
    b = GenSection.parse(["0", "1", "0"], ["x1", "0", "0"])
    res = compare_naive(m, c, K, a, b)
    assert not res.curvature_ok and not res.torsion_ok
    assert res.first_difference.startswith("curvature")


def test_comparison_opposite_K_sign_fails():
    m = CourantModel(2)
    c = GenConnection.tangent(2, {"V_TsTs": {(0, 0, 0): S("1")}, "Gamma_TT": {(1, 0, 1): S("x1")}})
    K = AffineConnectionK(2, {(0, 0, 0): S("1"), (1, 1, 0): S("x2")})
    a = GenSection.parse(["1", "x1"], ["0", "1"])
    b = GenSection.parse(["x2", "1"], ["1", "0"])
    assert compare_naive(m, c, K, a, b, skew=True).curvature_ok
    assert not compare_naive(m, c, K, a, b, sign=-1, skew=True).curvature_ok
