from biharm_bench.geometry.ambient import (
    AmbientKind,
    AmbientModel,
    ambient_ricci,
    complex_structure_apply,
    curvature_contraction,
    curvature_operator,
    horizontal_project,
)
from biharm_bench.geometry.immersion import ImmersionSpec, sphere_chart, sphere_point
from biharm_bench.geometry.lagrangian import (
    HUmbilicalField,
    HUmbilicalFit,
    connection_forms,
    humbilical_fit,
    lagrangian_defect,
    lagrangian_defect_of,
    lem2_residuals,
    lem2_residuals_of,
    pnmc_defect,
    pnmc_defect_of,
)
from biharm_bench.geometry.local import GeometrySample, LocalGeometry
from biharm_bench.geometry.submanifold import (
    adapted_frame,
    bienergy_density,
    bitension,
    codazzi_residual,
    energy_density,
    induced_metric,
    intrinsic_ricci,
    laplace_beltrami_tension,
    mean_curvature,
    metric_ricci,
    normal_derivative,
    normal_laplacian,
    rough_laplacian,
    second_fundamental_form,
    sectional_curvature,
    shape_operator,
    tension,
)
