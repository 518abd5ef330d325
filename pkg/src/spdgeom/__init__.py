"""Thompson, Hilbert and affine-invariant geometry of SPD matrices."""

from .analysis import (
    MidpointReport,
    det_euclid_midpoint_factor,
    det_star_midpoint_factor,
    midpoint_distance,
    midpoint_distance_direct,
    sample_spectra,
)
from .core import (
    DenseSpd,
    ExtremePair,
    SparseCholesky,
    SparseSpd,
    Spectrum,
    random_sparse_spd,
    random_spd,
    validate_spd,
)
from .errors import (
    DimensionMismatch,
    FactorizationFailure,
    NoConvergence,
    NonPositiveResult,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    SolveFailure,
    SpdError,
)
from .geneig import extreme_pair, extreme_pair_dense, extreme_pair_krylov, full_spectrum
from .geometry import (
    GeodesicKind,
    dist_hilbert,
    dist_riemannian,
    dist_thompson,
    geodesic,
    geodesic_euclidean,
    geodesic_riemannian,
    geodesic_star,
)
from .io import read_matrix, write_matrix
from .means import (
    MeanReport,
    arithmetic_mean,
    inductive_mean,
    inductive_sequence,
    karcher_mean,
    sparsity_report,
)

__version__ = "0.1.0"
