"""Group-invariant L_p dual Minkowski problems for polytopes in the plane and in space."""
from .bodies import (
    Ball, Ellipsoid, HeightBody, PolyStar, SampledStar, circumradius, conv_witness_support,
    make_height_body, mvee, orbit_body, polar, radial, support, vertices, volume,
)
from .classify import ClassificationReport, classify, render_table, witness_nonsymmetric
from .dualmeasure import dual_curvature, dual_curvature_pq, dual_mixed_volume, radial_cells
from .errors import DualMinkError, InputError, NumericalError
from .group import (
    FiniteGroup, Orbit, builtin_group, close_group, contains_minus_identity, fixed_point_space,
    hemisphere_witness, is_irreducible, orbit, orbit_inradius, symmetrize_measure,
)
from .measure import DiscreteMeasure
from .quadrature import sphere_quadrature
from .solver import (
    ProblemSpec, Solution, SolverOptions, grad_phi, minimize, phi, rescale, solve_1d, verify,
)

__version__ = "0.1.0"
