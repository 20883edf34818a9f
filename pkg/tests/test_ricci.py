import pytest
import sympy
from hypothesis import given, settings

from gradedq import linalg
from gradedq.courant import CourantModel
from gradedq.ktensors import AffineConnectionK, k_torsion
from gradedq.rational import RationalFunction, parse_scalar
from gradedq.ricci import (CanonicalD, build_G, compare_scalar, fix_K, levi_civita, ricci_K, scal_g_nabla,
                           scalar_four_parts, scalar_from_ricci, scalar_K)
from gradedq.sampling import random_christoffel, random_H, random_poly, random_V_TsT
from gradedq.verify import classical_scalar, to_sympy

from strategies import rng_from, seeds

CURVED_METRIC = [["1", "x1"], ["x1", "1+x1^2+x2^2"]]


def P(rows, n=None):
    n = n or len(rows)
    return [[parse_scalar(s, n) for s in row] for row in rows]


def lc_scalar(rows):
    g = P(rows)
    m = CourantModel(len(rows))
    cd = CanonicalD(m, levi_civita(g))
    return scalar_K(m, cd.connection(), fix_K(cd), build_G(g))


def _metric_with_B(rng, n):
    g = [[RationalFunction.one(n) if i == j else RationalFunction.zero(n) for j in range(n)] for i in range(n)]
    g[-1][-1] = parse_scalar("1+x1^2", n)
    z = RationalFunction.zero(n)
    B = [[z] * n for _ in range(n)]
    B[0][1] = random_poly(rng, n, degree=1)
    B[1][0] = -B[0][1]
    return g, B


# generalized metric ---------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(seeds)
def test_generalized_metric_squares_to_one(seed):
    rng = rng_from(seed)
    g, B = _metric_with_B(rng, 2 + seed % 2)
    G = build_G(g, B)
    assert G.is_symmetric()
    assert G.squares_to_identity()


def test_generalized_metric_blocks_without_B():
    g = P([["2", "0"], ["0", "1+x1^2"]])
    G = build_G(g).G
    assert [row[:2] for row in G[:2]] == g
    assert [row[2:] for row in G[2:]] == linalg.inverse(g)
    assert not any(v for row in G[:2] for v in row[2:])


def test_generalized_metric_B_block():
    g = P([["1", "0"], ["0", "1"]])
    B = P([["0", "x1"], ["-x1", "0"]])
    G = build_G(g, B).G
    # g - B g^-1 B = 1 + x1^2 on the diagonal, B g^-1 top right, -g^-1 B bottom left
    assert G[0][0] == parse_scalar("1+x1^2", 2)
    assert G[0][3] == parse_scalar("x1", 2)
    assert G[2][1] == parse_scalar("-x1", 2)
    assert G[1][2] == G[2][1]


def test_generalized_metric_errors():
    with pytest.raises(ValueError):
        build_G(P([["1", "x1"], ["0", "1"]]))
    with pytest.raises(ValueError):
        build_G(P([["1", "1"], ["1", "1"]]))
    with pytest.raises(ValueError):
        build_G(P([["1", "0"], ["0", "1"]]), P([["0", "1"], ["1", "0"]]))


# Levi-Civita and the classical scalar --------------------------------------------

def test_levi_civita_flat():
    G = levi_civita(P([["1", "0"], ["0", "1"]]))
    assert not any(v for plane in G for row in plane for v in row)


def test_levi_civita_polar_like():
    # g = diag(1, x1^2): Gamma^2_12 = 1/x1, Gamma^1_22 = -x1
    G = levi_civita(P([["1", "0"], ["0", "x1^2"]]))
    assert G[0][1][1] == parse_scalar("1/x1", 2)
    assert G[1][0][1] == parse_scalar("-x1", 2)
    assert lc_scalar([["1", "0"], ["0", "x1^2"]]).is_zero()


def test_surface_of_revolution_by_hand():
    # dr^2 + f^2 dt^2 has Gauss curvature -f''/f; f = 1 + x1^2 gives scalar -4/(1+x1^2)
    val = lc_scalar([["1", "0"], ["0", "(1+x1^2)^2"]])
    assert val == parse_scalar("-4/(1+x1^2)", 2)


def test_stereographic_sphere_by_hand():
    # unit sphere in stereographic coordinates: Gauss curvature 1, scalar 2
    c = "4/(1+x1^2+x2^2)^2"
    assert lc_scalar([[c, "0"], ["0", c]]) == RationalFunction.constant(2, 2)


def test_curved_metric_against_sympy():
    val = lc_scalar(CURVED_METRIC)
    assert sympy.simplify(to_sympy(val) - classical_scalar(CURVED_METRIC)) == 0
    assert val == parse_scalar("(-2*x2^2 - 2*x2 - 2)/(x2^4 + 2*x2^2 + 1)", 2)


def test_scal_g_nabla_is_classical():
    g = P(CURVED_METRIC)
    assert scal_g_nabla(linalg.inverse(g), levi_civita(g)) == lc_scalar(CURVED_METRIC)


def test_three_dimensional_metric_against_sympy():
    rows = [["1", "0", "0"], ["0", "1+x1^2", "0"], ["0", "0", "1+x2^2"]]
    val = lc_scalar(rows)
    assert sympy.simplify(to_sympy(val) - classical_scalar(rows)) == 0


# canonical connections ----------------------------------------------------------

def test_canonical_symmetry_checks():
    m = CourantModel(2)
    z, one = RationalFunction.zero(2), RationalFunction.one(2)
    G = [[[z] * 2 for _ in range(2)] for _ in range(2)]
    G[0][0][1] = one                # Gamma_1^1_2 without Gamma_2^1_1: torsion
    with pytest.raises(ValueError):
        CanonicalD(m, G)
    zero = [[[z] * 2 for _ in range(2)] for _ in range(2)]
    gamma = [[[z] * 2 for _ in range(2)] for _ in range(2)]
    gamma[0][0][1], gamma[1][0][0] = one, one     # symmetric in (1,3) but not antisymmetric in (2,3)
    with pytest.raises(ValueError):
        CanonicalD(m, zero, gamma=gamma)


def test_fix_K_of_levi_civita_is_minus_gamma():
    g = P(CURVED_METRIC)
    G = levi_civita(g)
    K = fix_K(CanonicalD(CourantModel(2), G))
    for mu in range(2):
        for nu in range(2):
            for rho in range(2):
                assert K.coeff(mu, nu, rho) == -G[mu][nu][rho]


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_fixed_K_is_torsion_free(seed):
    rng = rng_from(seed)
    n = 2 + seed % 2
    m = random_H(rng, n, degree=1)
    cd = CanonicalD(m, random_christoffel(rng, n), random_V_TsT(rng, n))
    assert k_torsion(m, cd.connection(), fix_K(cd)).graded.is_zero()


def test_other_K_leaves_torsion():
    rng = rng_from(3)
    m = CourantModel(2)
    cd = CanonicalD(m, random_christoffel(rng, 2, density=1.0), random_V_TsT(rng, 2, density=1.0))
    K = fix_K(cd)
    flipped = AffineConnectionK(2, {key: -v for key, v in K.items()})
    assert not k_torsion(m, cd.connection(), flipped).graded.is_zero()


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_scalar_matches_closed_form(seed):
    rng = rng_from(seed)
    n = 2 + seed % 2
    m = random_H(rng, n, degree=1)
    g, B = _metric_with_B(rng, n)
    cd = CanonicalD(m, random_christoffel(rng, n), random_V_TsT(rng, n))
    cmp = compare_scalar(build_G(g, B), cd)
    assert cmp.matches and cmp.torsion_free
    assert sum(cmp.parts.values(), RationalFunction.zero(n)) == cmp.scalar_K
    assert sum(cmp.terms.values(), RationalFunction.zero(n)) == cmp.formula


def test_ricci_contraction_of_flat_data():
    m = CourantModel(2)
    cd = CanonicalD(m, levi_civita(P([["1", "0"], ["0", "1"]])))
    ric = ricci_K(m, cd.connection(), fix_K(cd))
    assert not any(v for row in ric for v in row)
    G = build_G(P([["1", "0"], ["0", "1"]]))
    assert scalar_from_ricci(ric, G).is_zero()
    assert set(scalar_four_parts(ric, G)) == {"Ric^{mn} G_{mn}", "Ric^m_n G^n_m", "Ric_m^n G_n^m", "Ric_{mn} G^{mn}"}
