"""
Constructors for the biharmonic H-umbilical family, the warped-product
immersions built from Legendre curves, and the control immersions used by
the catalog.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import mpmath
import numpy as np

from biharm_bench.errors import CatalogError, DegenerateImmersionError, DomainError
from biharm_bench.family.legendre import LegendreCurve, chen_curve
from biharm_bench.geometry.ambient import AmbientModel
from biharm_bench.geometry.immersion import ImmersionSpec, sphere_chart, sphere_point
from biharm_bench.jets import cos, expi, sin

logger = logging.getLogger(__name__)

# Working precision (decimal digits) of the closed forms.
MU_ROOT_DPS = 40
SECOND_COMPONENT_FLOOR = 1e-10


@dataclass(frozen=True)
class MuRootSet:
    """The four real mu of the biharmonic family in dimension m, descending."""

    m: int
    exact: Tuple[mpmath.mpf, ...]

    @property
    def roots(self) -> Tuple[float, ...]:
        return tuple(float(r) for r in self.exact)

    def __getitem__(self, index: int) -> float:
        if not 0 <= index < len(self.exact):
            raise CatalogError(f"Root index {index} outside 0..{len(self.exact) - 1}.")
        return float(self.exact[index])

    def __len__(self) -> int:
        return len(self.exact)


def mu_roots(m: int) -> MuRootSet:
    """mu = +-sqrt((m + 5 +- sqrt(m^2 + 6m + 25)) / (2m)), m >= 2."""
    if m < 2:
        raise CatalogError(f"The biharmonic family needs m >= 2, got {m}.")
    with mpmath.workdps(MU_ROOT_DPS):
        m_mp = mpmath.mpf(m)
        s = mpmath.sqrt(m_mp**2 + 6 * m_mp + 25)
        large = mpmath.sqrt((m_mp + 5 + s) / (2 * m_mp))
        small = mpmath.sqrt((m_mp + 5 - s) / (2 * m_mp))
        return MuRootSet(m=m, exact=(large, small, -small, -large))


def lambda_from_mu(mu):
    """(mu^2 - 1)/mu; keeps mpmath precision when given an mpf."""
    if mu == 0:
        raise DomainError("lambda is undefined for mu = 0.")
    return (mu * mu - 1) / mu


def humbilical_coefficients(m: int, mu) -> Tuple[float, float, float]:
    """(lambda, mu, a) of the family member with this mu."""
    with mpmath.workdps(MU_ROOT_DPS):
        mu_mp = mpmath.mpf(mu)
        lam = lambda_from_mu(mu_mp)
        a = (lam + (m - 1) * mu_mp) / m
        return float(lam), float(mu_mp), float(a)


# Warped products over Legendre curves.


def warped_product_immersion(curve: LegendreCurve, m: int, name: str = "warped-product") -> ImmersionSpec:
    """
    Legendrian lift (z1(x), z2(x) y) with y on the unit (m-1)-sphere in
    spherical angles; chart (x, angles).
    """
    assert m >= 1, "Dimension must be positive."
    if np.any(np.abs(curve.z[:, 1]) < SECOND_COMPONENT_FLOOR):
        raise DegenerateImmersionError(f"{curve.name}: |z2| vanishes on the curve domain.")

    def mapping(u):
        x, angles = u[0], list(u[1:])
        z1_re, z1_im, z2_re, z2_im = curve.evaluate(x)
        coords = [z1_re, z1_im]
        for y in sphere_point(angles):
            coords.extend([z2_re * y, z2_im * y])
        return coords

    angle_domain, angle_periodic = sphere_chart(m - 1) if m > 1 else ((), ())
    parameters = dict(curve.parameters)
    parameters["m"] = m
    return ImmersionSpec(
        name=name,
        target=AmbientModel.projective(m),
        chart_dimension=m,
        mapping=mapping,
        domain=(tuple(curve.domain),) + tuple(angle_domain),
        periodic=(curve.periodic,) + tuple(angle_periodic),
        description=f"warped product over the {curve.name} Legendre curve",
        parameters=parameters,
    )


def chen_immersion(m: int, mu: float) -> ImmersionSpec:
    """
    Lift (sqrt(mu^2/(mu^2+1)) e^{-ix/mu}, e^{i mu x} y / sqrt(mu^2+1)) into
    S^{2m+1}. Any nonzero mu is accepted; only the four roots are biharmonic.
    """
    if mu == 0:
        raise DomainError("The family needs mu != 0.")
    lam, mu, a = humbilical_coefficients(m, mu)
    spec = warped_product_immersion(chen_curve(mu, step=1e-2), m, name="chen")
    spec.parameters.update({"mu": mu, "lambda": lam, "a": a})
    return spec


# Controls.


def flat_plane(m: int) -> ImmersionSpec:
    """R^m inside C^m, totally geodesic and Lagrangian."""

    def mapping(u):
        coords = []
        for x in u:
            coords.extend([x, 0.0 * x])
        return coords

    return ImmersionSpec(
        name="flat-plane",
        target=AmbientModel.flat(m),
        chart_dimension=m,
        mapping=mapping,
        domain=tuple((-1.0, 1.0) for _ in range(m)),
        periodic=tuple(False for _ in range(m)),
        description="real plane in C^m",
    )


def unit_circle() -> ImmersionSpec:
    def mapping(u):
        return [cos(u[0]), sin(u[0])]

    return ImmersionSpec(
        name="circle",
        target=AmbientModel.flat(1),
        chart_dimension=1,
        mapping=mapping,
        domain=((0.0, 2 * np.pi),),
        periodic=(True,),
        description="unit circle in C",
    )


def holomorphic_control() -> ImmersionSpec:
    """z -> (z, z) in C^2, a complex line (not Lagrangian)."""

    def mapping(u):
        re, im = u
        return [re, im, re, im]

    return ImmersionSpec(
        name="holomorphic-control",
        target=AmbientModel.flat(2),
        chart_dimension=2,
        mapping=mapping,
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        periodic=(False, False),
        description="complex diagonal line in C^2",
    )


def clifford_torus_lift(m: int) -> ImmersionSpec:
    """
    (e^{i theta_0}, ..., e^{i theta_m}) / sqrt(m+1) with theta_0 = -sum theta_k,
    a minimal Legendrian torus.
    """
    scale = 1.0 / np.sqrt(m + 1.0)

    def mapping(u):
        theta_0 = -sum(u[1:], u[0])
        coords = []
        for theta in [theta_0] + list(u):
            c, s = expi(theta)
            coords.extend([scale * c, scale * s])
        return coords

    return ImmersionSpec(
        name="clifford-lagrangian-torus",
        target=AmbientModel.projective(m),
        chart_dimension=m,
        mapping=mapping,
        domain=tuple((0.0, 2 * np.pi) for _ in range(m)),
        periodic=tuple(True for _ in range(m)),
        description=f"minimal Lagrangian torus in CP^{m}",
    )


def real_sphere_lift(m: int) -> ImmersionSpec:
    """Real points of the unit sphere of C^{m+1}: a totally geodesic lift of RP^m."""

    def mapping(u):
        coords = []
        for y in sphere_point(list(u)):
            coords.extend([y, 0.0 * y])
        return coords

    domain, periodic = sphere_chart(m)
    return ImmersionSpec(
        name="real-sphere",
        target=AmbientModel.projective(m),
        chart_dimension=m,
        mapping=mapping,
        domain=domain,
        periodic=periodic,
        description=f"totally geodesic RP^{m} in CP^{m}",
    )
