from .basegeom import (
    BUILTIN_BASES,
    BaseManifold,
    ChartAxis,
    Circle,
    FlatTorus,
    RoundSphere,
    TabulatedMetric,
    finite_difference_christoffel,
    levi_civita,
    make_base,
)
from .conegeom import ConePoint, ConeTangent, RiemannianCone
from .immersion import (
    DiscreteImmersion,
    GeometryCache,
    decompose_normal,
    first_variation_rate,
    fundamental_trace_residual,
    induced_metric,
    laplace_beltrami,
    lemma_one_residual,
    mean_curvature,
    radial_mean_curvature,
    sup_second_fundamental,
    tangential_position_norm,
    volume,
)
from .mesh import Mesh
