from hypothesis import given, settings

from gradedq.connection import GenConnection, build_QE, curvature, torsion
from gradedq.courant import CourantModel, build_theta, pairing
from gradedq.derivations import square
from gradedq.graded import ChartChange
from gradedq.ktensors import AffineConnectionK, k_curvature, k_torsion, tilde_p
from gradedq.rational import parse_scalar
from gradedq.sampling import (exact_H, random_connection, random_K, random_section, random_tangent_connection)
from gradedq.transform import (gualtieri_transported, pushforward, to_primed, to_unprimed, transform_connection,
                               transform_K, transform_model, transform_section, vertical_vf)

from strategies import rng_from, seeds, settings_fast

CURVED = ChartChange.parse(["x1", "x2+x1^2"], ["x1", "x2-x1^2"])
SCALE3 = ChartChange.parse(["2*x1", "x2", "x3"], ["x1/2", "x2", "x3"])


def test_three_form_rescales():
    # H = x1 dx1 dx2 dx3 with x'1 = 2 x1: H = (x'1/2)(1/2) dx'1 dx'2 dx'3
    m = CourantModel(3, {(0, 1, 2): parse_scalar("x1", 3)})
    m2 = transform_model(m, SCALE3)
    assert m2.h(0, 1, 2) == parse_scalar("x1/4", 3)


@settings(**settings_fast)
@given(seeds)
def test_theta_is_invariant(seed):
    m = exact_H(rng_from(seed), 3, degree=1)
    m2 = transform_model(m, SCALE3)
    assert SCALE3.pullback(build_theta(m2)) == build_theta(m)


def test_primed_roundtrip():
    chart = GenConnection.tangent(2).chart()
    f = build_QE(CourantModel(2), GenConnection.tangent(2)).image("s1") + chart.gen("x1") * chart.gen("p2")
    assert to_unprimed(to_primed(f, CURVED, "tangent"), CURVED, "tangent") == f


def test_tautological_section_invariant():
    c = GenConnection.tangent(2)
    T = torsion(CourantModel(2), c)
    chart = T.graded.chart
    from gradedq.connection import tautological_section
    tau = tautological_section(c, chart)
    assert to_primed(tau, CURVED, "tangent") == tau


def test_flat_connection_picks_up_christoffel_symbols():
    # D = 0 in x; d'_1 = d_1 - 2 x1 d_2 so D_{d'_1} d'_1 = -2 d'_2
    m = CourantModel(2)
    c2 = transform_connection(m, GenConnection.tangent(2), CURVED)
    assert curvature(m, c2).vf.is_zero()
    tt = c2.block("Gamma_TT")
    assert set(tt) == {(0, 1, 0)}
    assert tt[(0, 1, 0)] == parse_scalar("-2", 2)
    # on one-forms: D_{d'_1} dx'^2 = D_{d'_1}(dx2 + 2 x1 dx1) = 2 dx'^1
    assert c2.block("Gamma_TsTs") == {(0, 0, 1): parse_scalar("2", 2)}


@settings(**settings_fast)
@given(seeds)
def test_connection_roundtrip(seed):
    rng = rng_from(seed)
    m = CourantModel(2)
    c = random_connection(rng, 2, 2, density=0.5)
    c2 = transform_connection(m, c, CURVED)
    back = transform_connection(transform_model(m, CURVED), c2, CURVED.inverted())
    assert back.Gamma == c.Gamma and back.V == c.V


@settings(**settings_fast)
@given(seeds)
def test_curvature_is_covariant(seed):
    rng = rng_from(seed)
    m = CourantModel(2)
    c = random_tangent_connection(rng, 2, density=0.4)
    c2 = transform_connection(m, c, CURVED)
    R = square(build_QE(m, c))
    assert pushforward(R, CURVED, "tangent") == square(build_QE(transform_model(m, CURVED), c2))


@settings(**settings_fast)
@given(seeds)
def test_section_pairing_invariant(seed):
    rng = rng_from(seed)
    a, b = random_section(rng, 2, 1), random_section(rng, 2, 1)
    a2, b2 = transform_section(a, CURVED), transform_section(b, CURVED)
    assert pairing(a2, b2).compose(CURVED.phi) == pairing(a, b)


# the auxiliary connection K -------------------------------------------------

def _ptilde_covariant(K, change, chart, sign=1):
    n = K.n
    K2 = transform_K(K, change, chart, sign)
    pt, pt2 = tilde_p(K, chart), tilde_p(K2, chart)
    P = [[change.Jinv[j][i] for j in range(n)] for i in range(n)]
    return all(to_primed(sum((pt[nu].scale(P[mu][nu]) for nu in range(n)), chart.zero()), change) == pt2[mu]
               for mu in range(n))


@settings(**settings_fast)
@given(seeds)
def test_ptilde_is_a_one_form(seed):
    K = random_K(rng_from(seed), 2)
    chart = GenConnection.tangent(2).chart()
    assert _ptilde_covariant(K, CURVED, chart)


def test_vector_field_law_breaks_ptilde():
    chart = GenConnection.tangent(2).chart()
    for K in (AffineConnectionK(2), AffineConnectionK(2, {(0, 0, 0): parse_scalar("x2", 2)})):
        assert _ptilde_covariant(K, CURVED, chart)
        assert not _ptilde_covariant(K, CURVED, chart, sign=-1)


def test_zero_K_gains_inhomogeneous_term():
    chart = GenConnection.tangent(2).chart()
    K2 = transform_K(AffineConnectionK(2), CURVED, chart)
    # same inhomogeneous term as the trivial connection acting on one-forms
    assert dict(K2.items()) == {(0, 1, 0): parse_scalar("2", 2)}
    # linear changes keep K = 0
    assert transform_K(AffineConnectionK(3), SCALE3, GenConnection.tangent(3).chart()).is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_k_tensors_transform_tensorially(seed):
    rng = rng_from(seed)
    m = CourantModel(2)
    c = random_tangent_connection(rng, 2, density=0.4)
    K = random_K(rng, 2)
    chart = build_QE(m, c).chart
    m2, c2, K2 = transform_model(m, CURVED), transform_connection(m, c, CURVED), transform_K(K, CURVED, chart)
    kc, kc2 = k_curvature(m, c, K), k_curvature(m2, c2, K2)
    assert pushforward(vertical_vf(kc.graded, c, chart), CURVED, "tangent") == vertical_vf(kc2.graded, c2, chart)
    assert to_primed(k_torsion(m, c, K).graded, CURVED, "tangent") == k_torsion(m2, c2, K2).graded


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_gualtieri_torsion_invariant(seed):
    rng = rng_from(seed)
    m = CourantModel(2)
    c = random_tangent_connection(rng, 2, density=0.4)
    a, b, e = (random_section(rng, 2, 1) for _ in range(3))
    before, after = gualtieri_transported(m, c, CURVED, a, b, e)
    assert before == after
