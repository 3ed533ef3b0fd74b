"""Robust recovery of linear subspaces in point clouds by lp minimization
over the Grassmannian: samplers for the uniform mixture measure, energies
and their geodesic derivatives, optimality-condition checkers, geodesic
descent and K-subspace fitters, a RANSAC baseline, and a seeded Monte Carlo
harness."""

from .energy import (
    Certificate,
    DirectionSpec,
    EnergyParams,
    check_necessary_p_gt1,
    check_sufficient_l1,
    ell0_count,
    energy_multi,
    energy_single,
    voronoi_assign,
)
from .errors import (
    ConfigRejected,
    DimensionMismatch,
    GeodesicNotUnique,
    InvalidArgument,
    InvalidNoise,
    LpSubspaceError,
    NonsmoothPoint,
    RankDeficient,
    SingularPoint,
)
from .grassmann import (
    PrincipalDecomposition,
    Subspace,
    dist_point_subspace,
    geodesic,
    grassmann_distance,
    orthonormalize,
    principal_decomposition,
    project,
    project_perp,
    random_subspace,
)
from .optimize import (
    FitOptions,
    FitResult,
    best_k_subspaces,
    best_single_subspace,
    geodesic_descent,
    permutation_distance,
    ransac_subspace,
)
from .sampling import (
    MixtureModel,
    PointCloud,
    sample_mixture,
    sample_noisy_cylinder,
    sample_on_subspace,
    sample_unit_ball,
)

__all__ = [name for name in dir() if not name.startswith("_")]
