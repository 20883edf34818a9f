"""
Dirac structures from Poisson bivectors
=======================================

The graph of a bivector is a lagrangian submanifold; it is invariant under
d_M exactly when the bivector is Poisson.  The linear Poisson structure on
so(3)* passes, a bivector violating Jacobi does not.
"""

from gradedq.algebroid import check_algebroid
from gradedq.courant import CourantModel
from gradedq.dirac import DiracStructure, algebroid_of, build_embedding, check_invariance
from gradedq.rational import parse_scalar


def bivector(rows):
    return [[parse_scalar(s, 3) for s in row] for row in rows]


so3 = DiracStructure.poisson(bivector([["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]]))
bad = DiracStructure.poisson(bivector([["0", "x1*x2", "0"], ["-x1*x2", "0", "x3"], ["0", "-x3", "0"]]))
m = CourantModel(3)

for label, L in (("so(3)*", so3), ("non-Poisson", bad)):
    ok, residuals = check_invariance(L, m)
    print(f"{label}: lagrangian={build_embedding(L).lagrangian} invariant={ok}")
    for i, r in residuals[:2]:
        print(f"   constraint {i + 1} not preserved: {r}")

# the restriction of d_M to the graph is the Lie algebroid of the Poisson structure
A = algebroid_of(so3, m)
print("\nalgebroid d_A^2 = 0:", check_algebroid(A))
print("f^3_12 =", A.f[2][0][1])
