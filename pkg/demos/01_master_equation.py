"""
The master equation for an exact Courant algebroid
==================================================

Theta = psi p + 1/6 H psi psi psi solves {Theta, Theta} = 0 exactly when the
three-form H is closed.  Below: a closed H in three dimensions, then a
four-dimensional H whose exterior derivative is nonzero.
"""

from gradedq.courant import CourantModel, build_dM, build_theta, check_master, hamiltonian_vf
from gradedq.rational import parse_scalar

# n = 3: every three-form is closed
m = CourantModel(3, {(0, 1, 2): parse_scalar("x1*x2 + x3^2", 3)})
print("Theta =", build_theta(m))
rep = check_master(m)
print("{Theta,Theta} =", rep.bracket, "| master equation holds:", rep.master_holds)

# the Hamiltonian vector field of Theta is the differential d_M
X, dM = hamiltonian_vf(build_theta(m)), build_dM(m)
for g in m.chart.generators:
    print(f"  d_M({g.name}) = {dM.image(g.name)}", "(matches X_Theta)" if X.image(g.name) == dM.image(g.name) else "")

# n = 4, H = x4 dx1 dx2 dx3 has dH = -dx1 dx2 dx3 dx4
m4 = CourantModel(4, {(0, 1, 2): parse_scalar("x4", 4)})
rep = check_master(m4)
print("\nn=4 {Theta,Theta} =", rep.bracket)
print("master equation holds:", rep.master_holds, "| consistent with dH:", rep.consistent)
