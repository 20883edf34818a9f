"""Exact symbolic checks for graded geometry of Courant algebroids.

Chart-level computations on T*[2]T[1]M and its extensions: the homological
vector field d_M, Q-connections with their curvature and torsion, K-tensors,
Dirac structures, Lie algebroids and the K-scalar curvature.  All arithmetic
is exact over rational functions in x1..xn.
"""

from .rational import ExpressionError, RationalFunction, parse_scalar
from .graded import Chart, ChartChange, GradedPoly, substitute
from .derivations import Derivation, apply, commutator, square
from .courant import (CourantModel, GenSection, build_dM, build_theta, check_master, dorfman,
                      dorfman_skew, hamiltonian_vf, pairing, poisson_bracket)
from .connection import (GenConnection, build_QE, curvature, gualtieri_torsion, is_Q_bundle,
                         naive_curvature, naive_torsion, torsion)
from .ktensors import AffineConnectionK, compare_naive, k_curvature, k_tilde, k_torsion, tilde_p
from .algebroid import AlgebroidConnection, AlgebroidModel, algebroid_torsion, build_dA, check_algebroid
from .dirac import DiracStructure, IsotropyError, build_embedding, check_invariance, check_obstruction, phi_KL
from .ricci import (CanonicalD, GeneralizedMetric, build_G, compare_scalar, fix_K, levi_civita, ricci_K,
                    scalar_formula, scalar_K)
from .model import Model, ModelError, load_model, parse_model

__all__ = [
    "ExpressionError", "RationalFunction", "parse_scalar",
    "Chart", "ChartChange", "GradedPoly", "substitute",
    "Derivation", "apply", "commutator", "square",
    "CourantModel", "GenSection", "build_dM", "build_theta", "check_master", "dorfman", "dorfman_skew",
    "hamiltonian_vf", "pairing", "poisson_bracket",
    "GenConnection", "build_QE", "curvature", "gualtieri_torsion", "is_Q_bundle", "naive_curvature",
    "naive_torsion", "torsion",
    "AffineConnectionK", "compare_naive", "k_curvature", "k_tilde", "k_torsion", "tilde_p",
    "AlgebroidConnection", "AlgebroidModel", "algebroid_torsion", "build_dA", "check_algebroid",
    "DiracStructure", "IsotropyError", "build_embedding", "check_invariance", "check_obstruction", "phi_KL",
    "CanonicalD", "GeneralizedMetric", "build_G", "compare_scalar", "fix_K", "levi_civita", "ricci_K",
    "scalar_formula", "scalar_K",
    "Model", "ModelError", "load_model", "parse_model",
]
