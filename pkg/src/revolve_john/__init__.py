"""Ellipsoids of revolution inscribed in and circumscribed about convex polytopes.

Fixed-axis and any-axis solvers, John-type certificates, numerical checks of
the geometric bounds, and the explicit extremal constructions.
"""
from .bounds import (
    BoundReport,
    bad_ellipsoid_instance,
    check_ellipsoid_properties,
    check_fixed_axis_containment,
    check_inclusion,
    check_inradius_bound,
    check_lowner_properties,
    check_right_cone_axis_containment,
    check_volume_bound,
    lemma_circumradius_primitive,
    lemma_inradius_primitive,
)
from .certificates import (
    JohnCertificate,
    contact_polytopes,
    ellipsoid_certificate,
    extract_contact_pairs,
    fit_john_weights,
    good_center,
    lowner_certificate,
    position_certificate,
    verify_certificate,
)
from .constructions import (
    build_appendix_a,
    inradius_closed_form,
    lifted_configuration,
    majorization_brute_force,
    majorization_value,
    polar_vertices_appendix_a,
)
from .errors import (
    CertificateNotFound,
    DimensionError,
    EmptySetError,
    InfeasibleError,
    NoContactError,
    NonConvergenceError,
    PreconditionError,
    RevolveError,
    UnboundedError,
)
from .geometry import (
    ContactPair,
    FEllipsoid,
    HPolytope,
    Subspace,
    VPolytope,
    circumradius,
    inradius_chebyshev,
    polar_vpolytope,
    project,
    section,
    volume,
)
from .solver import (
    GeneralPosition,
    SolveConfig,
    local_perturbation_test,
    oracle_grid_search,
    solve_ellipsoid_any_axis,
    solve_ellipsoid_fixed_axis,
    solve_general_fixed_axis,
    solve_lowner_fixed_axis,
)

__version__ = "0.1.0"
