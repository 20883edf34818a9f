"""Transport of graded objects and connection data under a base chart change.

The primed chart reuses the generator names of the unprimed one.  Fibre
coordinates of the generalized tangent bundle transform like the frame
(d_mu, dx^mu): s'_mu = (J^-1)^nu_mu s_nu and s'^mu = J^mu_nu s^nu, so that
the tautological section psi^mu s_mu + b_mu s^mu is invariant.
"""

from __future__ import annotations

from .connection import GenConnection, build_QE, gualtieri_torsion
from .courant import CourantModel, GenSection, build_theta
from .derivations import Derivation, apply
from .graded import Chart, ChartChange, GradedPoly, substitute
from .ktensors import AffineConnectionK
from .rational import RationalFunction


def tangent_fibre_images(change: ChartChange, chart: Chart) -> dict[str, GradedPoly]:
    n = change.n
    s = [chart.gen(f"s{i}") for i in range(1, 2 * n + 1)]
    out = {}
    for mu in range(n):
        out[f"s{mu + 1}"] = sum((s[nu] * change.Jinv[nu][mu] for nu in range(n)), chart.zero())
        out[f"s{n + mu + 1}"] = sum((s[n + nu] * change.J[mu][nu] for nu in range(n)), chart.zero())
    return out


def forward_images(change: ChartChange, chart: Chart, fibre: str | None = None) -> dict:
    """Primed generators written in unprimed coordinates."""
    images = dict(change.courant_images(chart))
    if fibre == "tangent":
        images.update(tangent_fibre_images(change, chart))
    elif fibre == "trivial":
        pass
    elif fibre is not None:
        raise ValueError(f"unknown fibre rule {fibre!r}")
    return images


def to_primed(f: GradedPoly, change: ChartChange, fibre: str | None = None) -> GradedPoly:
    """Rewrite a function of the unprimed coordinates in the primed ones."""
    inv = change.inverted()
    images = {k: v for k, v in forward_images(inv, f.chart, fibre).items() if k in f.chart.index}
    return substitute(f, images, f.chart, base=list(inv.phi))


def to_unprimed(f: GradedPoly, change: ChartChange, fibre: str | None = None) -> GradedPoly:
    return to_primed(f, change.inverted(), fibre)


def pushforward(X: Derivation, change: ChartChange, fibre: str | None = None) -> Derivation:
    chart = X.chart
    fwd = forward_images(change, chart, fibre)
    images = {}
    for i, phi in enumerate(change.phi):
        img = apply(X, chart.scalar(phi))
        if img:
            images[f"x{i + 1}"] = to_primed(img, change, fibre)
    for g in chart.generators:
        src = fwd.get(g.name, chart.gen(g.name))
        img = apply(X, src)
        if img:
            images[g.name] = to_primed(img, change, fibre)
    return Derivation(chart, X.degree, images)


def transform_model(m: CourantModel, change: ChartChange) -> CourantModel:
    """H' read off from Theta written in primed coordinates."""
    n = m.n
    theta = to_primed(build_theta(m), change)
    chart = theta.chart
    H = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                v = theta.coefficient(f"psi{i + 1}", f"psi{j + 1}", f"psi{k + 1}")
                if v:
                    H[(i, j, k)] = v
    m2 = CourantModel(n, H)
    if build_theta(m2, chart) != theta:
        raise AssertionError("Theta did not keep its normal form")
    return m2


def transform_connection(m: CourantModel, c: GenConnection, change: ChartChange) -> GenConnection:
    """Connection data in the primed chart, read off from the pushed-forward Q_E."""
    fibre = "tangent" if c.is_tangent() else "trivial"
    QE = build_QE(m, c)
    Q2 = pushforward(QE, change, fibre)
    n, r = c.n, c.rank
    z = RationalFunction.zero(n)
    G = [[[z] * r for _ in range(r)] for _ in range(n)]
    V = [[[z] * r for _ in range(r)] for _ in range(n)]
    names = c.fibre_names()
    for be, sb in enumerate(names):
        img = Q2.image(sb)
        for al, sa in enumerate(names):
            for mu in range(n):
                G[mu][al][be] = img.coefficient(f"psi{mu + 1}", sa)
                V[mu][al][be] = img.coefficient(f"b{mu + 1}", sa)
    c2 = GenConnection(n, r, G, V, c.fibre_degree)
    if build_QE(transform_model(m, change), c2) != Q2:
        raise AssertionError("pushed-forward Q_E is not a connection of the expected form")
    return c2


def transform_K(K: AffineConnectionK, change: ChartChange, chart: Chart, sign: int = 1) -> AffineConnectionK:
    """K for the primed chart.

    With P = J^{-T}, the one-form law is K'^T = P K^T P^-1 - dP P^-1.
    ``sign=-1`` flips the inhomogeneous term (the vector-field law).
    """
    n = K.n
    psi = [chart.gen(f"psi{i}") for i in range(1, n + 1)]
    P = [[change.Jinv[j][i] for j in range(n)] for i in range(n)]
    Pinv = [[change.J[j][i] for j in range(n)] for i in range(n)]
    # KT[sigma][rho] = K_nu^rho_sigma psi^nu
    KT = [[sum((psi[nu].scale(K.coeff(nu, rho, sg)) for nu in range(n) if K.coeff(nu, rho, sg)),
               chart.zero()) for rho in range(n)] for sg in range(n)]
    dP = [[sum((psi[l].scale(P[i][j].diff(l)) for l in range(n) if P[i][j].diff(l)), chart.zero())
           for j in range(n)] for i in range(n)]
    out = {}
    for i in range(n):
        for j in range(n):
            acc = chart.zero()
            for a in range(n):
                for b in range(n):
                    if P[i][a] and Pinv[b][j] and KT[a][b]:
                        acc = acc + KT[a][b].scale(P[i][a] * Pinv[b][j])
                if Pinv[a][j] and dP[i][a]:
                    t = dP[i][a].scale(Pinv[a][j])
                    acc = acc - t if sign > 0 else acc + t
            acc = to_primed(acc, change)
            for nu in range(n):
                v = acc.coefficient(f"psi{nu + 1}")
                if v:
                    out[(nu, j, i)] = v
    return AffineConnectionK(n, out)


def transform_section(a: GenSection, change: ChartChange) -> GenSection:
    """Components in the primed frame, as functions of x'."""
    n = a.n
    vec = [sum((change.J[mu][nu] * a.vec[nu] for nu in range(n)), RationalFunction.zero(n))
           for mu in range(n)]
    form = [sum((change.Jinv[nu][mu] * a.form[nu] for nu in range(n)), RationalFunction.zero(n))
            for mu in range(n)]
    return GenSection([change.scalar_in_new(v) for v in vec], [change.scalar_in_new(v) for v in form])


def vertical_vf(matrix, c: GenConnection, chart: Chart, degree: int = 2) -> Derivation:
    names = c.fibre_names()
    images = {}
    for be, sb in enumerate(names):
        img = chart.zero()
        for al, sa in enumerate(names):
            if matrix[al][be]:
                img = img + matrix[al][be] * chart.gen(sa)
        if img:
            images[sb] = img
    return Derivation(chart, degree, images)


def gualtieri_transported(m, c, change, a, b, e):
    """(value in the unprimed chart, primed value pulled back to x)."""
    m2, c2 = transform_model(m, change), transform_connection(m, c, change)
    a2, b2, e2 = (transform_section(s, change) for s in (a, b, e))
    before = gualtieri_torsion(m, c, a, b, e)
    after = gualtieri_torsion(m2, c2, a2, b2, e2).compose(change.phi)
    return before, after
