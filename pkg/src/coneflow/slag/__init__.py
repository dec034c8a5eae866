from .forms import (
    CalabiYauFrame,
    ToricDiagram,
    holomorphic_volume,
    omega,
    pfaffian,
    to_complex,
    to_real,
)
from .legendrian import (
    LegendrianReport,
    contact_form,
    great_circle_samples,
    hopf_circle_samples,
    legendrian_cone_check,
)
from .levelset import (
    SLagSample,
    angle_function,
    certify_special_lagrangian,
    constraint_gradients,
    dump_samples,
    lagrangian_angle,
    level_set_residual,
    max_residuals,
    moment_map,
    sample_level_set,
    tangent_frame,
    torus_action,
)
