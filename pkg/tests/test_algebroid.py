import pytest
from hypothesis import given, settings

from gradedq.algebroid import (AlgebroidConnection, AlgebroidModel, algebroid_curvature, algebroid_torsion, bracket,
                               build_dA, build_QA, check_algebroid, frame_algebroid, graded_curvature_at, torsion_at)
from gradedq.courant import lie_bracket
from gradedq.graded import parse_graded
from gradedq.rational import RationalFunction, parse_scalar
from gradedq.sampling import random_frame, random_poly

from strategies import rng_from, seeds, settings_fast


def S(text, n):
    return parse_scalar(text, n)


def so3(n=1):
    one = RationalFunction.one(n)
    f = {(0, 1, 2): one, (1, 2, 0): one, (2, 0, 1): one}
    return AlgebroidModel(n, 3, [[RationalFunction.zero(n)] * 3 for _ in range(n)], f)


def unit(n, r, i):
    return [RationalFunction.one(n) if j == i else RationalFunction.zero(n) for j in range(r)]


def random_alg_connection(rng, n, r):
    return AlgebroidConnection(r, n, {(a, b, g): random_poly(rng, n, degree=1, terms=2, density=0.6)
                                      for a in range(r) for b in range(r) for g in range(r)})


def test_so3_is_an_algebroid():
    m = so3()
    assert check_algebroid(m)
    # [e1, e2] = -e3 with the sign fixed by d_A
    assert bracket(m, unit(1, 3, 0), unit(1, 3, 1)) == [-x for x in unit(1, 3, 2)]
    dA = build_dA(m)
    assert dA.image("xi1") == parse_graded("xi2*xi3", dA.chart)


def test_bracket_without_morphism_fails():
    m = AlgebroidModel(3, 3, AlgebroidModel.tangent(3).rho, {(0, 1, 2): RationalFunction.one(3)})
    assert not check_algebroid(m)


def test_non_jacobi_structure_fails():
    # rho = 0, [e1,e2] = -e1, [e2,e3] = -e2, [e1,e3] = 0
    one = RationalFunction.one(1)
    m = AlgebroidModel(1, 3, [[RationalFunction.zero(1)] * 3], {(0, 0, 1): one, (1, 1, 2): one})
    # Jacobiator: [e1,[e2,e3]] + [e2,[e3,e1]] + [e3,[e1,e2]] = e1 + 0 + 0
    assert not check_algebroid(m)


def test_tangent_algebroid_is_de_rham():
    m = AlgebroidModel.tangent(2)
    dA = build_dA(m)
    assert dA.image("x1") == parse_graded("xi1", dA.chart)
    assert dA.image("xi1").is_zero()
    assert check_algebroid(m)


def test_anchor_shape_checked():
    with pytest.raises(ValueError):
        AlgebroidModel(2, 2, [[RationalFunction.one(2)]])
    with pytest.raises(ValueError):
        AlgebroidModel(1, 2, [[RationalFunction.zero(1)] * 2], {(0, 0, 0): RationalFunction.one(1)})


@settings(**settings_fast)
@given(seeds)
def test_frame_algebroid_bracket_is_lie_bracket(seed):
    rng = rng_from(seed)
    n = 2 + seed % 2
    E = random_frame(rng, n)
    m = frame_algebroid(E)
    assert check_algebroid(m)
    a = [random_poly(rng, n, degree=1) for _ in range(n)]
    b = [random_poly(rng, n, degree=1) for _ in range(n)]
    assert m.anchor(bracket(m, a, b)) == lie_bracket(m.anchor(a), m.anchor(b))


# connections -------------------------------------------------------------------

def test_QA_on_fibre():
    m = AlgebroidModel.tangent(2)
    c = AlgebroidConnection(2, 2, {(0, 1, 0): S("x2", 2)})
    QA = build_QA(m, c)
    assert QA.image("s2") == parse_graded("-x2*xi1*s1", QA.chart)
    assert c.nabla(m, unit(2, 2, 0), unit(2, 2, 1)) == [S("-x2", 2), S("0", 2)]


@settings(**settings_fast)
@given(seeds)
def test_torsion_three_ways(seed):
    rng = rng_from(seed)
    n = 2 + seed % 2
    m = frame_algebroid(random_frame(rng, n))
    c = random_alg_connection(rng, n, n)
    res = algebroid_torsion(m, c)
    assert res.matches
    a, b = [random_poly(rng, n, 1) for _ in range(n)], [random_poly(rng, n, 1) for _ in range(n)]
    # tensorial, evaluated from components
    want = [sum((res.components[(al, be, ga)] * (a[be] * b[ga] - a[ga] * b[be])
                 for be in range(n) for ga in range(be + 1, n)), RationalFunction.zero(n)) for al in range(n)]
    assert torsion_at(m, c, a, b) == want


def test_symmetric_connection_on_TM_is_torsion_free():
    n = 2
    m = AlgebroidModel.tangent(n)
    G = {(0, 1, 0): S("x1", n), (1, 0, 0): S("x1", n), (0, 0, 1): S("x2", n), (1, 1, 1): S("3", n)}
    res = algebroid_torsion(m, AlgebroidConnection(n, n, G))
    assert res.matches and not any(res.components.values())
    assert res.graded.is_zero()


def test_so3_torsion_of_zero_connection():
    res = algebroid_torsion(so3(), AlgebroidConnection(3, 1))
    assert res.matches
    assert res.components[(2, 0, 1)] == RationalFunction.one(1)


@settings(**settings_fast)
@given(seeds)
def test_curvature_graded_matches_classical(seed):
    rng = rng_from(seed)
    n = 2
    m = frame_algebroid(random_frame(rng, n))
    c = random_alg_connection(rng, n, n)
    a, b = [random_poly(rng, n, 1) for _ in range(n)], [random_poly(rng, n, 1) for _ in range(n)]
    g = random_poly(rng, n, 1)
    F = algebroid_curvature(m, c, a, b)
    assert graded_curvature_at(m, c, a, b) == F
    assert algebroid_curvature(m, c, [g * x for x in a], b) == [[g * x for x in row] for row in F]
    assert algebroid_curvature(m, c, b, a) == [[-x for x in row] for row in F]


def test_flat_tangent_connection():
    m = AlgebroidModel.tangent(2)
    F = graded_curvature_at(m, AlgebroidConnection(2, 2), unit(2, 2, 0), unit(2, 2, 1))
    assert not any(x for row in F for x in row)
