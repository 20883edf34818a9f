"""Seeded random data for property checks.

Everything is drawn from a ``random.Random`` instance so that a seed fully
determines the sample.  Coefficients are small integers; polynomials have
low degree to keep exact arithmetic fast.
"""

from __future__ import annotations

import random
from itertools import combinations

from .connection import GenConnection
from .courant import CourantModel, GenSection
from .rational import RationalFunction, base_ring


def random_poly(rng: random.Random, n: int, degree: int = 2, terms: int = 3, coeff: int = 3,
                density: float = 1.0) -> RationalFunction:
    """A random polynomial in x1..xn (zero with probability 1 - density)."""
    if rng.random() > density:
        return RationalFunction.zero(n)
    ring = base_ring(n)
    poly = ring.zero
    for _ in range(terms):
        c = rng.randint(-coeff, coeff)
        if not c:
            continue
        mono = ring.one
        for _ in range(rng.randint(0, degree)):
            mono = mono * ring.gens[rng.randrange(n)]
        poly = poly + c * mono
    return RationalFunction(poly)


def random_H(rng, n, density=1.0, degree=2) -> CourantModel:
    H = {t: random_poly(rng, n, degree=degree, density=density) for t in combinations(range(n), 3)}
    return CourantModel(n, H)


def exact_H(rng, n, degree=2) -> CourantModel:
    """H = dB for a random polynomial two-form B."""
    B = {pair: random_poly(rng, n, degree=degree) for pair in combinations(range(n), 2)}

    def b(i, j):
        if i == j:
            return RationalFunction.zero(n)
        return B[(i, j)] if i < j else -B[(j, i)]

    H = {}
    for i, j, k in combinations(range(n), 3):
        H[(i, j, k)] = b(j, k).diff(i) - b(i, k).diff(j) + b(i, j).diff(k)
    return CourantModel(n, H)


def random_connection(rng, n, rank, density=0.6, degree=1, with_V=True, fibre_degree=0) -> GenConnection:
    G = {}
    V = {}
    for mu in range(n):
        for a in range(rank):
            for b in range(rank):
                G[(mu, a, b)] = random_poly(rng, n, degree=degree, terms=2, density=density)
                if with_V:
                    V[(mu, a, b)] = random_poly(rng, n, degree=degree, terms=2, density=density)
    return GenConnection(n, rank, G, V, fibre_degree=fibre_degree)


def random_tangent_connection(rng, n, density=0.6, degree=1, with_V=True) -> GenConnection:
    c = random_connection(rng, n, 2 * n, density=density, degree=degree, with_V=with_V)
    c.fibre_degree = -1
    return c


def random_section(rng, n, degree=2, density=0.8) -> GenSection:
    return GenSection([random_poly(rng, n, degree=degree, density=density) for _ in range(n)],
                      [random_poly(rng, n, degree=degree, density=density) for _ in range(n)])


def random_components(rng, n, count, degree=2, density=0.8):
    return [random_poly(rng, n, degree=degree, density=density) for _ in range(count)]


def random_K(rng, n, density=0.5, degree=1):
    from .ktensors import AffineConnectionK
    return AffineConnectionK(n, {(a, b, c): random_poly(rng, n, degree=degree, terms=2, density=density)
                                 for a in range(n) for b in range(n) for c in range(n)})


def random_christoffel(rng, n, density=0.6, degree=1) -> list:
    """Gamma[mu][nu][rho] symmetric in mu, rho."""
    G = [[[None] * n for _ in range(n)] for _ in range(n)]
    for mu in range(n):
        for nu in range(n):
            for rho in range(mu, n):
                G[mu][nu][rho] = G[rho][nu][mu] = random_poly(rng, n, degree=degree, terms=2, density=density)
    return G


def random_V_TsT(rng, n, density=0.6, degree=1) -> list:
    """V[mu][nu][rho] antisymmetric in nu, rho."""
    z = RationalFunction.zero(n)
    V = [[[z] * n for _ in range(n)] for _ in range(n)]
    for mu in range(n):
        for nu, rho in combinations(range(n), 2):
            v = random_poly(rng, n, degree=degree, terms=2, density=density)
            V[mu][nu][rho], V[mu][rho][nu] = v, -v
    return V


def random_frame(rng, n, degree=1) -> list:
    """Unipotent upper-triangular frame matrix E[mu][alpha]; always invertible."""
    one, z = RationalFunction.one(n), RationalFunction.zero(n)
    return [[one if i == j else (random_poly(rng, n, degree=degree, terms=2) if i < j else z)
             for j in range(n)] for i in range(n)]
