"""
Point operations of the submanifold calculus. Each takes an immersion and a
chart point (or an already built LocalGeometry) and returns base values.
"""
from typing import Callable, Optional, Sequence, Union

import numpy as np

from biharm_bench.errors import NotLagrangianError, NotNormalError
from biharm_bench.geometry.ambient import AmbientModel
from biharm_bench.geometry.immersion import ImmersionSpec
from biharm_bench.geometry.local import GeometrySample, LocalGeometry, gauss_ricci
from biharm_bench.jets import Jet

NORMALITY_TOLERANCE = 1e-8
LEGENDRIAN_TOLERANCE = 1e-8

FieldSpec = Union[Jet, Callable[[LocalGeometry], Jet]]


def _field(geometry: LocalGeometry, field: FieldSpec) -> Jet:
    jet = field(geometry) if callable(field) else field
    value = jet.value
    defect = float(np.linalg.norm(value - geometry.project_normal(value)))
    if defect > NORMALITY_TOLERANCE * max(1.0, float(np.linalg.norm(value))):
        raise NotNormalError(f"Field is not normal at {geometry.point} (defect {defect:.3e}).")
    return jet


def induced_metric(immersion: ImmersionSpec, point: Sequence[float]) -> np.ndarray:
    return LocalGeometry(immersion, point, frame="coordinate").metric.value


def adapted_frame(
    immersion: ImmersionSpec, point: Sequence[float], H_hint: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Orthonormal tangent frame (rows). Without a hint this is Gram-Schmidt of
    the coordinate vectors; with a hint, e_1 = -J(H_hint)/|H_hint|.
    """
    if H_hint is None:
        return LocalGeometry(immersion, point, frame="coordinate").frame.value
    coordinate_geometry = LocalGeometry(immersion, point, frame="coordinate")
    H_hint = np.asarray(H_hint, dtype=float)
    defect = float(np.linalg.norm(H_hint - coordinate_geometry.project_normal(H_hint)))
    if defect > NORMALITY_TOLERANCE * max(1.0, float(np.linalg.norm(H_hint))):
        raise NotNormalError(f"Hint is not normal at {tuple(point)} (defect {defect:.3e}).")
    return LocalGeometry(immersion, point, frame="adapted", frame_hint=H_hint).frame.value


def second_fundamental_form(
    immersion: ImmersionSpec, point: Sequence[float], frame: str = "auto"
) -> np.ndarray:
    """B[i, j] = B(e_i, e_j). For lifts the iphi-component of D_{e_i} e_j is checked."""
    geometry = LocalGeometry(immersion, point, frame=frame)
    if immersion.target.is_lift:
        De = geometry.frame_derivatives.value
        i_phi = geometry.i_phi.value
        defect = float(np.abs(De @ i_phi).max())
        if defect > LEGENDRIAN_TOLERANCE:
            raise NotLagrangianError(
                f"Second fundamental form of the lift is not horizontal (defect {defect:.3e}); "
                "the lift is not Legendrian."
            )
    return geometry.second_fundamental_form.value


def mean_curvature(B: np.ndarray) -> np.ndarray:
    """H = (1/m) sum_i B(e_i, e_i) in an orthonormal frame."""
    return np.einsum("iin->n", B) / B.shape[0]


def shape_operator(B: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """(A_xi)_ij = <B(e_i, e_j), xi>."""
    return B @ np.asarray(xi, dtype=float)


def normal_derivative(
    immersion: ImmersionSpec,
    point: Sequence[float],
    direction: Sequence[float],
    field: FieldSpec,
    **options,
) -> np.ndarray:
    """
    nabla^perp_X xi with X given by its frame components.
    """
    geometry = LocalGeometry(immersion, point, **options)
    jet = _field(geometry, field)
    return np.asarray(direction, dtype=float) @ geometry.normal_derivatives(jet).value


def normal_laplacian(
    immersion: ImmersionSpec, point: Sequence[float], field: FieldSpec, **options
) -> np.ndarray:
    geometry = LocalGeometry(immersion, point, **options)
    return geometry.normal_laplacian(_field(geometry, field)).value


def rough_laplacian(geometry: LocalGeometry, field: FieldSpec) -> np.ndarray:
    jet = field(geometry) if callable(field) else field
    return geometry.rough_laplacian(jet).value


def tension(immersion: ImmersionSpec, point: Sequence[float], **options) -> np.ndarray:
    return LocalGeometry(immersion, point, **options).tension()


def bitension(immersion: ImmersionSpec, point: Sequence[float], **options) -> np.ndarray:
    return LocalGeometry(immersion, point, **options).bitension()


def laplace_beltrami_tension(geometry: LocalGeometry) -> np.ndarray:
    return geometry.laplace_beltrami_tension()


def intrinsic_ricci(sample: GeometrySample, model: AmbientModel) -> np.ndarray:
    """Ricci tensor of the induced metric in the sample frame, via the Gauss equation."""
    return gauss_ricci(model, sample.position, sample.frame, sample.B, sample.H)


def metric_ricci(geometry: LocalGeometry) -> np.ndarray:
    """Ricci tensor from Christoffel symbols of the metric jets."""
    return geometry.ricci_metric()


def sectional_curvature(geometry: LocalGeometry, i: int, j: int, route: str = "gauss") -> float:
    if route == "gauss":
        return geometry.sectional_gauss(i, j)
    if route == "metric":
        return geometry.sectional_metric(i, j)
    raise ValueError(f"Unknown curvature route {route}.")


def codazzi_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> float:
    return LocalGeometry(immersion, point, **options).codazzi_residual()


def energy_density(geometry: LocalGeometry) -> float:
    """(1/2) sum_i |dphi(e_i)|^2; m/2 for isometric immersions."""
    frame = geometry.frame.value
    return 0.5 * float(np.sum(frame * frame))


def bienergy_density(geometry: LocalGeometry) -> float:
    """|tau|^2, the integrand of the bi-energy."""
    tau = geometry.tension()
    return float(tau @ tau)
