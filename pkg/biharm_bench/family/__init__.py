from .catalog import CATALOG, CatalogEntry, build_immersion, list_catalog, resolve_mu
from .immersions import (
    MuRootSet,
    chen_immersion,
    clifford_torus_lift,
    flat_plane,
    holomorphic_control,
    humbilical_coefficients,
    lambda_from_mu,
    mu_roots,
    real_sphere_lift,
    unit_circle,
    warped_product_immersion,
)
from .legendre import (
    LegendreCurve,
    chen_curve,
    chen_curve_map,
    closed_form_deviation,
    export_curve_csv,
    generic_legendre_curve,
    great_circle_curve,
    integrated_chen_curve,
    legendre_diagnostics,
    solve_legendre,
)
