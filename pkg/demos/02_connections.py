"""
Curvature and torsion of a Q-connection
=======================================

A connection on the generalized tangent bundle becomes a degree-one vector
field Q_E on a bigger graded manifold.  Its square is the curvature; its value
on the tautological section is the torsion.
"""

from gradedq.connection import GenConnection, build_QE, curvature, is_Q_bundle, torsion
from gradedq.courant import CourantModel
from gradedq.ktensors import AffineConnectionK, k_curvature, k_torsion
from gradedq.rational import parse_scalar

x = lambda s: parse_scalar(s, 2)
m = CourantModel(2)
c = GenConnection.tangent(2, {"Gamma_TT": {(0, 1, 0): x("x2")},
                              "V_TT": {(1, 0, 1): x("1")}})
QE = build_QE(m, c)
for name in ("s1", "s2"):
    print(f"Q_E({name}) =", QE.image(name))

R = curvature(m, c)
print("\ncurvature matches the closed form:", R.matches)

T = torsion(m, c)
print("Q_E(tau) =", T.graded)
print("split into Gamma, V and (1,1) parts:", T.matches)

# an auxiliary connection K splits off the tensorial parts
K = AffineConnectionK(2, {(0, 1, 0): x("x1")})
print("\nR = R^K + V p~ :", k_curvature(m, c, K).split_ok)
print("T = T^K + p~ s :", k_torsion(m, c, K).split_ok)

# the Q-bundle criterion: zero curvature iff V = 0 and the connection is flat
rep = is_Q_bundle(m, c)
print("\ncurvature zero:", rep.curvature_zero, "| V = 0:", rep.V_zero, "| flat:", rep.flat)
print("Q-bundle:", is_Q_bundle(m, GenConnection.tangent(2)).curvature_zero)
