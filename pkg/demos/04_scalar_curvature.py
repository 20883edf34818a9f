"""
Scalar curvature from the generalized metric
============================================

With B = H = 0 and the Levi-Civita connection, the scalar built from the
K-Ricci tensor and the generalized metric reproduces ordinary Riemannian
scalar curvature.  Here it is checked against a direct sympy computation.
"""

import sympy

from gradedq.courant import CourantModel
from gradedq.rational import parse_scalar
from gradedq.ricci import CanonicalD, build_G, fix_K, levi_civita, scalar_K
from gradedq.verify import classical_scalar, to_sympy

rows = [["1", "x1"], ["x1", "1+x1^2+x2^2"]]
g = [[parse_scalar(s, 2) for s in row] for row in rows]
m = CourantModel(2)
cd = CanonicalD(m, levi_civita(g))
val = scalar_K(m, cd.connection(), fix_K(cd), build_G(g))
print("Scal^K       =", val)
print("classical    =", classical_scalar(rows))
print("difference   =", sympy.simplify(to_sympy(val) - classical_scalar(rows)))

# the round sphere in stereographic coordinates has scalar curvature 2
c = "4/(1+x1^2+x2^2)^2"
g = [[parse_scalar(s, 2) for s in row] for row in [[c, "0"], ["0", c]]]
cd = CanonicalD(m, levi_civita(g))
print("sphere       =", scalar_K(m, cd.connection(), fix_K(cd), build_G(g)))
