"""Spectra of discrete p-form Laplacians under collapse of a group action.

The package builds simplicial models of the standard collapsing manifolds,
assembles Whitney-form mass matrices for a family of weighted inner
products indexed by the collapse parameter eps, and tracks how many small
eigenvalues survive as eps -> 0 against the cohomology of the quotient.
"""

from .builders import (
    ActionData,
    GeometryData,
    QuadratureRule,
    build_circle,
    build_flat_torus,
    build_icosphere,
    build_interval_complex,
    build_s3_600cell,
    simplex_quadrature,
    sphere_chart_frames,
    subdivide,
    suspension,
)
from .cohomology import (
    CohomologyBasis,
    betti_number,
    betti_numbers,
    check_chain_map,
    cochain_pullback,
    cohomology_basis,
    induced_map_kernel_dim,
    kernel_dim_lower_bound,
    kernel_dimension,
)
from .complexes import (
    ComplexReport,
    SimplicialComplex,
    boundary_matrix,
    coboundary_matrix,
    euler_characteristic,
    integer_triplets,
    validate_complex,
)
from .eigen import (
    ConditioningError,
    SpectralError,
    SpectrumResult,
    condition_estimate,
    hodge_spectrum,
    im_d_pencil,
    residual_norms,
    smallest_generalized_eigenpairs,
    spectrum_im_d,
)
from .experiments import (
    CompareReport,
    DualityReport,
    DualityRow,
    SweepReport,
    bilipschitz_compare,
    collapse_sweep,
    conformal_perturb,
    default_eps_grid,
    hodge_duality_report,
    metric_distortion,
    report_from_json,
    report_to_csv,
    report_to_json,
    theorem_kernel_dim,
    write_report,
)
from .feec import MassFamily, RhoEvaluator, coboundary_stiffness
from .meshio import mesh_from_text, mesh_to_text, read_mesh, write_mesh

__version__ = "0.1.0"

__all__ = [
    "ActionData",
    "CohomologyBasis",
    "CompareReport",
    "ComplexReport",
    "ConditioningError",
    "DualityReport",
    "DualityRow",
    "GeometryData",
    "MassFamily",
    "QuadratureRule",
    "RhoEvaluator",
    "SimplicialComplex",
    "SpectralError",
    "SpectrumResult",
    "SweepReport",
    "betti_number",
    "betti_numbers",
    "bilipschitz_compare",
    "boundary_matrix",
    "build_circle",
    "build_flat_torus",
    "build_icosphere",
    "build_interval_complex",
    "build_s3_600cell",
    "coboundary_matrix",
    "coboundary_stiffness",
    "check_chain_map",
    "cochain_pullback",
    "cohomology_basis",
    "collapse_sweep",
    "condition_estimate",
    "conformal_perturb",
    "default_eps_grid",
    "euler_characteristic",
    "hodge_duality_report",
    "hodge_spectrum",
    "im_d_pencil",
    "induced_map_kernel_dim",
    "integer_triplets",
    "kernel_dim_lower_bound",
    "kernel_dimension",
    "mesh_from_text",
    "mesh_to_text",
    "metric_distortion",
    "read_mesh",
    "report_from_json",
    "report_to_csv",
    "report_to_json",
    "residual_norms",
    "simplex_quadrature",
    "smallest_generalized_eigenpairs",
    "spectrum_im_d",
    "sphere_chart_frames",
    "subdivide",
    "suspension",
    "theorem_kernel_dim",
    "validate_complex",
    "write_mesh",
    "write_report",
    "__version__",
]
