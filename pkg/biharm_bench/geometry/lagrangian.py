import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from biharm_bench.errors import (
    MinimalPointError,
    NotHUmbilicalError,
    NotLagrangianError,
)
from biharm_bench.geometry.immersion import ImmersionSpec
from biharm_bench.geometry.local import MINIMAL_POINT, LocalGeometry
from biharm_bench.jets import Jet, get_basis

logger = logging.getLogger(__name__)

# Below this size B counts as identically zero at a minimal point.
VANISHING_B = 1e-10


@dataclass(frozen=True)
class HUmbilicalFit:
    """
    Pointwise fit of B to the H-umbilical shape
    B(e1,e1) = lambda Je1, B(ei,ei) = mu Je1, B(e1,ei) = mu Jei, B(ei,ej) = 0.
    """

    lam: float
    mu: float
    a: float
    fit_residual: float
    # k = <nabla_{e_l} e_1, e_l>, common over l >= 2, with its spread.
    k: float
    k_spread: float
    minimal: bool = False

    @classmethod
    def from_shape(cls, m: int, lam: float, mu: float, fit_residual: float, k: float, k_spread: float, minimal: bool = False) -> "HUmbilicalFit":
        return cls(
            lam=lam,
            mu=mu,
            a=(lam + (m - 1) * mu) / m,
            fit_residual=fit_residual,
            k=k,
            k_spread=k_spread,
            minimal=minimal,
        )


@dataclass(frozen=True)
class HUmbilicalField:
    """
    Local jets of the H-umbilical data: a, lambda, mu and the connection forms
    omega[i, j, l] = <nabla_{e_i} e_j, e_l>, with `derivative(f)` stacking
    e_i(f) over the frame. Synthetic fields (constant data) are used as
    controls.
    """

    m: int
    epsilon: float
    a: Jet
    lam: Jet
    mu: Jet
    omega: Jet
    derivative: Callable[[Jet], Jet]
    fit_residual: float = 0.0

    @property
    def k(self) -> Jet:
        if self.m < 2:
            return self.omega[0, 0, 0] * 0.0
        return Jet.stack([self.omega[l, 0, l] for l in range(1, self.m)]).mean(0)

    @property
    def k_spread(self) -> float:
        if self.m < 2:
            return 0.0
        values = [float(self.omega[l, 0, l].value) for l in range(1, self.m)]
        return max(values) - min(values)

    @classmethod
    def constant(
        cls,
        m: int,
        lam: float,
        mu: float,
        epsilon: float,
        omega: Optional[np.ndarray] = None,
        a: Optional[float] = None,
    ) -> "HUmbilicalField":
        basis = get_basis(m)
        if omega is None:
            omega = np.zeros((m, m, m))
        if a is None:
            a = (lam + (m - 1) * mu) / m

        def derivative(f: Jet) -> Jet:
            return Jet.zeros(basis, (m,) + f.shape)

        return cls(
            m=m,
            epsilon=epsilon,
            a=Jet.constant(basis, a),
            lam=Jet.constant(basis, lam),
            mu=Jet.constant(basis, mu),
            omega=Jet.constant(basis, omega),
            derivative=derivative,
        )

    @classmethod
    def from_geometry(cls, geometry: LocalGeometry) -> "HUmbilicalField":
        m = geometry.m
        B = geometry.second_fundamental_form
        omega = geometry.connection_forms
        if geometry.frame_kind != "adapted":
            if geometry.mean_curvature_norm >= MINIMAL_POINT:
                raise NotLagrangianError(
                    f"No adapted frame at {geometry.point}: J(H) is not tangent."
                )
            if float(np.abs(B.value).max()) > VANISHING_B:
                raise NotHUmbilicalError(
                    f"Minimal point with nonzero second fundamental form at {geometry.point}."
                )
            zero = Jet.zeros(geometry.basis)
            return cls(
                m=m,
                epsilon=geometry.model.epsilon,
                a=zero,
                lam=zero,
                mu=zero,
                omega=omega,
                derivative=geometry.directional,
            )

        J_first = geometry.frame[0].linear(geometry.J)
        lam = B[0, 0].inner(J_first)
        if m > 1:
            mu = Jet.stack([B[i, i].inner(J_first) for i in range(1, m)]).mean(0)
        else:
            mu = lam * 0.0
        a = geometry.mean_curvature.inner(J_first)
        return cls(
            m=m,
            epsilon=geometry.model.epsilon,
            a=a,
            lam=lam,
            mu=mu,
            omega=omega,
            derivative=geometry.directional,
            fit_residual=_pattern_residual(geometry, float(lam.value), float(mu.value)),
        )

    def fit(self) -> HUmbilicalFit:
        k = float(self.k.value) if self.m > 1 else 0.0
        minimal = float(np.abs(self.a.value)) < MINIMAL_POINT and float(np.abs(self.lam.value)) < MINIMAL_POINT
        return HUmbilicalFit.from_shape(
            self.m,
            float(self.lam.value),
            float(self.mu.value),
            self.fit_residual,
            k,
            self.k_spread,
            minimal=minimal,
        )


def _pattern_residual(geometry: LocalGeometry, lam: float, mu: float) -> float:
    m = geometry.m
    B = geometry.second_fundamental_form.value
    J_frame = geometry.frame.value @ geometry.J.T
    worst = 0.0
    for i in range(m):
        for j in range(m):
            if i == 0 and j == 0:
                expected = lam * J_frame[0]
            elif i == j:
                expected = mu * J_frame[0]
            elif i == 0 or j == 0:
                expected = mu * J_frame[max(i, j)]
            else:
                expected = np.zeros_like(J_frame[0])
            worst = max(worst, float(np.linalg.norm(B[i, j] - expected)))
    return worst


def lagrangian_defect(immersion: ImmersionSpec, point: Sequence[float]) -> float:
    """
    max |<J e_i, e_j>| over the tangent frame; for lifts also max |<i phi, e_i>|.
    """
    return lagrangian_defect_of(LocalGeometry(immersion, point, frame="coordinate"))


def lagrangian_defect_of(geometry: LocalGeometry) -> float:
    frame = geometry.coordinate_frame.value
    defect = float(np.abs((frame @ geometry.J.T) @ frame.T).max())
    if geometry.model.is_lift:
        defect = max(defect, float(np.abs(frame @ geometry.i_phi.value).max()))
    return defect


def connection_forms(immersion: ImmersionSpec, point: Sequence[float], **options) -> np.ndarray:
    """omega[i, j, l] = <nabla_{e_i} e_j, e_l>."""
    return LocalGeometry(immersion, point, **options).connection_forms.value


def humbilical_fit(immersion: ImmersionSpec, point: Sequence[float], **options) -> HUmbilicalFit:
    geometry = LocalGeometry(immersion, point, **options)
    return HUmbilicalField.from_geometry(geometry).fit()


def pnmc_defect(immersion: ImmersionSpec, point: Sequence[float], **options) -> float:
    """max_i |nabla^perp_{e_i}(H/|H|)|."""
    geometry = LocalGeometry(immersion, point, **options)
    return pnmc_defect_of(geometry)


def pnmc_defect_of(geometry: LocalGeometry) -> float:
    if geometry.mean_curvature_norm < MINIMAL_POINT:
        raise MinimalPointError(
            f"Mean curvature vanishes at {geometry.point}; normalized mean curvature undefined."
        )
    H = geometry.mean_curvature
    unit = H / H.inner(H).sqrt()
    derivatives = geometry.normal_derivatives(unit).value
    return float(np.linalg.norm(derivatives, axis=-1).max())


def lem2_residuals(immersion: ImmersionSpec, point: Sequence[float], **options) -> Dict[str, float]:
    geometry = LocalGeometry(immersion, point, **options)
    return lem2_residuals_of(HUmbilicalField.from_geometry(geometry))


def lem2_residuals_of(field: HUmbilicalField) -> Dict[str, float]:
    """
    Codazzi consequences for H-umbilical Lagrangian data (0-based frame
    indices, e_0 the distinguished direction):

        e_j lam = (2 mu - lam) omega[0, j, 0]            j > 0
        e_0 mu = (lam - 2 mu) omega[l, 0, l]             every l > 0
        (lam - 2 mu) omega[j, 0, i] = 0                  i != j > 0
        e_j mu = 0                                       j > 0
        mu omega[0, 0, j] = 0                            j > 0
        mu omega[l, 0, l] independent of l > 0
        mu omega[j, 0, i] = 0                            i != j > 0
    """
    m = field.m
    omega = field.omega.value
    lam = float(field.lam.value)
    mu = float(field.mu.value)
    d_lam = field.derivative(field.lam).value
    d_mu = field.derivative(field.mu).value

    def worst(values) -> float:
        values = [abs(float(v)) for v in values]
        return max(values) if values else 0.0

    rest = range(1, m)
    off_diagonal = [(i, j) for i in rest for j in rest if i != j]
    diagonal = [mu * omega[l, 0, l] for l in rest]
    return {
        "lambda_transverse": worst(d_lam[j] - (2 * mu - lam) * omega[0, j, 0] for j in rest),
        "mu_along_first": worst(d_mu[0] - (lam - 2 * mu) * omega[l, 0, l] for l in rest),
        "mixed_forms": worst((lam - 2 * mu) * omega[j, 0, i] for i, j in off_diagonal),
        "mu_transverse": worst(d_mu[j] for j in rest),
        "mu_first_forms": worst(mu * omega[0, 0, j] for j in rest),
        "mu_diagonal_forms": (max(diagonal) - min(diagonal)) if diagonal else 0.0,
        "mu_mixed_forms": worst(mu * omega[j, 0, i] for i, j in off_diagonal),
    }
