"""
Residual evaluators for the biharmonicity criteria. Each criterion splits the
bitension equation into a tangential and a normal part; the residual carries
both norms plus the individual equations it was assembled from.
"""
import logging
from typing import Dict, Sequence

import numpy as np
from pydantic import BaseModel

from biharm_bench.errors import (
    NotHUmbilicalError,
    NotLagrangianError,
    ReductionInapplicableError,
)
from biharm_bench.geometry.ambient import ambient_ricci
from biharm_bench.geometry.immersion import ImmersionSpec
from biharm_bench.geometry.lagrangian import HUmbilicalField, lagrangian_defect_of
from biharm_bench.geometry.local import LocalGeometry

logger = logging.getLogger(__name__)

# Below this reference scale residuals are reported absolute.
SCALE_FLOOR = 1e-12
LAGRANGIAN_TOLERANCE = 1e-8
FIT_TOLERANCE = 1e-6
# The reduced system needs mu away from zero and a single k.
MU_FLOOR = 1e-8
K_SPREAD_TOLERANCE = 1e-7

CRITERIA = ("split", "kahler", "spaceform", "humbilical", "reduced")


class CriterionResidual(BaseModel):
    # Criterion identifier, one of CRITERIA.
    name: str
    tangential_norm: float
    normal_norm: float
    # Individual equation residuals (absolute).
    per_equation: Dict[str, float]
    # Reference scale m|H| for relative reporting.
    scale: float

    def relative(self, value: float) -> float:
        return value / self.scale if self.scale > SCALE_FLOOR else value

    @property
    def relative_tangential(self) -> float:
        return self.relative(self.tangential_norm)

    @property
    def relative_normal(self) -> float:
        return self.relative(self.normal_norm)

    @property
    def worst(self) -> float:
        """Largest of the two parts, relative where the scale allows."""
        return max(self.relative_tangential, self.relative_normal)


def _residual(geometry: LocalGeometry, name: str, tangential: np.ndarray, normal: np.ndarray, **equations) -> CriterionResidual:
    tangential_norm = float(np.linalg.norm(tangential))
    normal_norm = float(np.linalg.norm(normal))
    per_equation = {"tangential": tangential_norm, "normal": normal_norm}
    per_equation.update({key: float(value) for key, value in equations.items()})
    return CriterionResidual(
        name=name,
        tangential_norm=tangential_norm,
        normal_norm=normal_norm,
        per_equation=per_equation,
        scale=geometry.m * geometry.mean_curvature_norm,
    )


def _split_parts(vector: np.ndarray, frame: np.ndarray):
    tangential = (frame @ vector) @ frame
    return tangential, vector - tangential


def _require_lagrangian(geometry: LocalGeometry) -> None:
    defect = lagrangian_defect_of(geometry)
    if defect > LAGRANGIAN_TOLERANCE:
        raise NotLagrangianError(
            f"Lagrangian defect {defect:.3e} at {geometry.point} exceeds {LAGRANGIAN_TOLERANCE}."
        )


# General criterion: the rough Laplacian split into tangential and normal parts.


def split_residual_of(geometry: LocalGeometry) -> CriterionResidual:
    frame = geometry.frame.value
    curvature_t, curvature_n = _split_parts(geometry.curvature_term(), frame)
    tangential = geometry.trace_nabla_shape_H() + geometry.trace_shape_nabla_perp_H() - curvature_t
    normal = geometry.normal_laplacian_H() + geometry.trace_B_shape_H() - curvature_n
    return _residual(geometry, "split", tangential, normal)


def split_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> CriterionResidual:
    return split_residual_of(LocalGeometry(immersion, point, **options))


# Kahler rewriting for Lagrangian submanifolds.


def _kahler_curvature_terms(geometry: LocalGeometry):
    """
    Replacements of the tangential and normal parts of sum_i R(H, e_i)e_i
    written through Codazzi, Ric^N and the intrinsic Ricci tensor.
    """
    m = geometry.m
    frame = geometry.frame.value
    B = geometry.second_fundamental_form.value
    H = geometry.mean_curvature.value
    J_frame = frame @ geometry.J.T

    nabla_B = geometry.covariant_second_fundamental_form
    codazzi = np.array(
        [
            sum(nabla_B[j, i, i] - nabla_B[i, j, i] for i in range(m)) @ H
            for j in range(m)
        ]
    )
    tangential = codazzi @ frame

    JH = geometry.apply_J(H)
    JH_components = frame @ JH
    position = geometry.phi.value
    ambient = np.array([ambient_ricci(geometry.model, position, JH, frame[i]) for i in range(m)])
    intrinsic = JH_components @ geometry.ricci_gauss()
    # B(JH, e_i)
    B_JH = np.einsum("k,kin->in", JH_components, B)
    pairing = np.einsum("in,ijn->j", B_JH, B)
    shape_H_JH = B_JH @ H
    normal = (
        ambient @ J_frame
        - intrinsic @ J_frame
        - geometry.apply_J(pairing @ frame)
        + m * geometry.apply_J(shape_H_JH @ frame)
    )
    # normal stands for -(sum_i R(H,e_i)e_i)^perp
    return tangential, normal


def kahler_residual_of(geometry: LocalGeometry) -> CriterionResidual:
    _require_lagrangian(geometry)
    curvature_t, curvature_n = _kahler_curvature_terms(geometry)
    tangential = geometry.trace_nabla_shape_H() + geometry.trace_shape_nabla_perp_H() - curvature_t
    normal = geometry.normal_laplacian_H() + geometry.trace_B_shape_H() + curvature_n
    return _residual(geometry, "kahler", tangential, normal)


def kahler_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> CriterionResidual:
    return kahler_residual_of(LocalGeometry(immersion, point, **options))


def kahler_rewriting_residuals(geometry: LocalGeometry) -> Dict[str, float]:
    """
    Distance between the Kahler rewritings and the direct curvature
    contraction; both vanish on Lagrangian submanifolds of space forms.
    """
    frame = geometry.frame.value
    direct_t, direct_n = _split_parts(geometry.curvature_term(), frame)
    rewritten_t, rewritten_n = _kahler_curvature_terms(geometry)
    return {
        "tangential_rewriting": float(np.linalg.norm(direct_t - rewritten_t)),
        "normal_rewriting": float(np.linalg.norm(direct_n + rewritten_n)),
    }


# Space form shortcut: the curvature contraction is (m+3) eps H.


def spaceform_residual_of(geometry: LocalGeometry) -> CriterionResidual:
    m = geometry.m
    H = geometry.mean_curvature.value
    tangential = geometry.trace_nabla_shape_H() + geometry.trace_shape_nabla_perp_H()
    normal = (
        geometry.normal_laplacian_H()
        + geometry.trace_B_shape_H()
        - (m + 3) * geometry.model.epsilon * H
    )
    return _residual(geometry, "spaceform", tangential, normal)


def spaceform_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> CriterionResidual:
    return spaceform_residual_of(LocalGeometry(immersion, point, **options))


def curvature_contraction_residual(geometry: LocalGeometry) -> float:
    """|sum_i R(H, e_i)e_i - (m+3) eps H|."""
    H = geometry.mean_curvature.value
    closed_form = (geometry.m + 3) * geometry.model.epsilon * H
    return float(np.linalg.norm(geometry.curvature_term() - closed_form))


# H-umbilical systems.


def _field(geometry: LocalGeometry) -> HUmbilicalField:
    field = HUmbilicalField.from_geometry(geometry)
    if field.fit_residual > FIT_TOLERANCE:
        raise NotHUmbilicalError(
            f"H-umbilical fit residual {field.fit_residual:.3e} at {geometry.point} exceeds {FIT_TOLERANCE}."
        )
    return field


def humbilical_equations(field: HUmbilicalField):
    """
    Tangential coefficients (along e_0, e_j) and normal coefficients (along
    Je_0, Je_j) of the bitension of an H-umbilical Lagrangian submanifold.
    """
    m, eps = field.m, field.epsilon
    omega_jet = field.omega
    omega = omega_jet.value
    a = float(field.a.value)
    lam = float(field.lam.value)
    mu = float(field.mu.value)
    d_a_jet = field.derivative(field.a)
    d_a = d_a_jet.value
    dd_a = field.derivative(d_a_jet).value
    d_lam = field.derivative(field.lam).value
    # d_omega[p, i, j, l] = e_p(omega[i, j, l])
    d_omega = field.derivative(omega_jet).value
    rest = range(1, m)

    first = 2 * lam * d_a[0] + a * d_lam[0] + lam * a * sum(omega[l, 0, l] for l in rest)
    second = np.array([2 * mu * d_a[j] + a * lam * omega[0, 0, j] for j in rest])
    trace_term = -np.trace(dd_a) + a * float(np.sum(omega[:, 0, :] ** 2))
    trace_term += float(np.einsum("j,iij->", d_a, omega))
    trace_term += a * (lam**2 + (m - 1) * mu**2 - eps * (m + 3))
    transverse = np.array(
        [
            -2 * d_a @ omega[:, 0, j]
            - a * sum(d_omega[i, i, 0, j] for i in range(m))
            - a * float(np.einsum("il,il->", omega[:, 0, :], omega[:, :, j]))
            + a * float(np.einsum("il,l->", np.einsum("iil->il", omega), omega[:, 0, j]))
            for j in rest
        ]
    )
    return first, second, trace_term, transverse


def humbilical_residual_of(geometry: LocalGeometry) -> CriterionResidual:
    first, second, trace_term, transverse = humbilical_equations(_field(geometry))
    tangential = np.concatenate([[first], second])
    normal = np.concatenate([[trace_term], transverse])
    return _residual(
        geometry,
        "humbilical",
        tangential,
        normal,
        first_direction=abs(first),
        transverse_directions=float(np.abs(second).max()) if len(second) else 0.0,
        normal_trace=abs(trace_term),
        normal_transverse=float(np.abs(transverse).max()) if len(transverse) else 0.0,
    )


def humbilical_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> CriterionResidual:
    return humbilical_residual_of(LocalGeometry(immersion, point, **options))


def reduced_equations(field: HUmbilicalField):
    """
    The H-umbilical system once mu != 0 forces a single k = omega[l, 0, l].
    """
    mu = float(field.mu.value)
    if abs(mu) < MU_FLOOR:
        raise ReductionInapplicableError(f"mu = {mu:.3e} is too small for the reduced system.")
    if field.k_spread > K_SPREAD_TOLERANCE:
        raise ReductionInapplicableError(
            f"omega[l, 0, l] is not constant over l (spread {field.k_spread:.3e})."
        )
    m, eps = field.m, field.epsilon
    a = float(field.a.value)
    lam = float(field.lam.value)
    k_jet = field.k
    k = float(k_jet.value)
    d_a_jet = field.derivative(field.a)
    d_a = d_a_jet.value
    dd_a = field.derivative(d_a_jet).value
    d_lam = field.derivative(field.lam).value
    d_k = field.derivative(k_jet).value

    first = 2 * lam * d_a[0] + a * d_lam[0] + a * lam * (m - 1) * k
    second = d_a[1:]
    trace_term = (
        -dd_a[0, 0]
        + a * (m - 1) * k**2
        - d_a[0] * (m - 1) * k
        + a * (lam**2 + (m - 1) * mu**2 - eps * (m + 3))
    )
    transverse = d_k[1:]
    return first, second, trace_term, transverse


def reduced_residual_of_field(field: HUmbilicalField, scale: float) -> CriterionResidual:
    first, second, trace_term, transverse = reduced_equations(field)
    return CriterionResidual(
        name="reduced",
        tangential_norm=float(np.linalg.norm(np.concatenate([[first], second]))),
        normal_norm=float(np.linalg.norm(np.concatenate([[trace_term], transverse]))),
        per_equation={
            "first_direction": abs(float(first)),
            "a_transverse": float(np.abs(second).max()) if len(second) else 0.0,
            "normal_trace": abs(float(trace_term)),
            "k_transverse": float(np.abs(transverse).max()) if len(transverse) else 0.0,
        },
        scale=scale,
    )


def reduced_residual_of(geometry: LocalGeometry) -> CriterionResidual:
    field = _field(geometry)
    return reduced_residual_of_field(field, geometry.m * geometry.mean_curvature_norm)


def reduced_residual(immersion: ImmersionSpec, point: Sequence[float], **options) -> CriterionResidual:
    return reduced_residual_of(LocalGeometry(immersion, point, **options))


RESIDUAL_FUNCTIONS = {
    "split": split_residual_of,
    "kahler": kahler_residual_of,
    "spaceform": spaceform_residual_of,
    "humbilical": humbilical_residual_of,
    "reduced": reduced_residual_of,
}
