from .closedness import ClosednessResiduals, closedness_predicates, exterior_closedness
from .mesh import CircleMesh, SigmaMesh, TriangleMesh, icosphere, load_off, parse_sigma
from .operator import (
    LaplacianOperator,
    SpectralResult,
    cluster_eigenvalues,
    deformation_dimension,
    laplacian_operator,
    low_spectrum,
    reeb_exclusion_check,
)
