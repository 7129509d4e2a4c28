import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from biharm_bench.errors import CatalogError
from biharm_bench.family.immersions import (
    chen_immersion,
    clifford_torus_lift,
    flat_plane,
    holomorphic_control,
    mu_roots,
    real_sphere_lift,
    unit_circle,
    warped_product_immersion,
)
from biharm_bench.family.legendre import generic_legendre_curve
from biharm_bench.geometry.immersion import ImmersionSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    # (m, mu) -> immersion; mu is already resolved from a root index.
    builder: Callable[[int, Optional[float]], ImmersionSpec]
    default_criteria: Tuple[str, ...]
    # Fixed dimension for entries that ignore m.
    fixed_m: Optional[int] = None
    min_m: int = 1
    needs_mu: bool = False


CATALOG: Dict[str, CatalogEntry] = {
    entry.name: entry
    for entry in [
        CatalogEntry(
            name="flat-plane",
            description="R^m in C^m (totally geodesic Lagrangian, harmonic control)",
            builder=lambda m, mu: flat_plane(m),
            default_criteria=("split", "kahler", "spaceform", "humbilical"),
        ),
        CatalogEntry(
            name="circle",
            description="unit circle in C (non-biharmonic control, normal residual 1)",
            builder=lambda m, mu: unit_circle(),
            default_criteria=("split", "kahler", "spaceform"),
            fixed_m=1,
        ),
        CatalogEntry(
            name="chen",
            description="biharmonic PNMC Lagrangian H-umbilical family in CP^m",
            builder=lambda m, mu: chen_immersion(m, mu),
            default_criteria=("split", "kahler", "spaceform", "humbilical", "reduced"),
            min_m=2,
            needs_mu=True,
        ),
        CatalogEntry(
            name="warped-from-ode",
            description="warped product over an RK4-integrated generic Legendre curve",
            builder=lambda m, mu: warped_product_immersion(
                generic_legendre_curve(), m, name="warped-from-ode"
            ),
            default_criteria=("split", "kahler", "spaceform", "humbilical"),
            min_m=2,
        ),
        CatalogEntry(
            name="clifford-lagrangian-torus",
            description="minimal Lagrangian torus in CP^m (harmonic control)",
            builder=lambda m, mu: clifford_torus_lift(m),
            default_criteria=("split", "kahler", "spaceform"),
        ),
        CatalogEntry(
            name="holomorphic-control",
            description="complex line z -> (z, z) in C^2 (non-Lagrangian control)",
            builder=lambda m, mu: holomorphic_control(),
            default_criteria=("split", "spaceform"),
            fixed_m=2,
        ),
        CatalogEntry(
            name="real-sphere",
            description="totally geodesic RP^m in CP^m",
            builder=lambda m, mu: real_sphere_lift(m),
            default_criteria=("split", "kahler", "spaceform"),
        ),
    ]
}


def resolve_mu(m: int, mu_root: Optional[int], mu: Optional[float]) -> float:
    """An explicit mu wins over a root index; the default is root 0."""
    if mu is not None:
        return float(mu)
    return mu_roots(m)[0 if mu_root is None else mu_root]


def build_immersion(
    name: str, m: int, mu_root: Optional[int] = None, mu: Optional[float] = None
) -> ImmersionSpec:
    if name not in CATALOG:
        raise CatalogError(f"Unknown immersion {name!r}; known: {', '.join(sorted(CATALOG))}.")
    entry = CATALOG[name]
    if entry.fixed_m is not None and m != entry.fixed_m:
        logger.warning("%s has fixed dimension %d; ignoring m = %d.", name, entry.fixed_m, m)
        m = entry.fixed_m
    if m < entry.min_m:
        raise CatalogError(f"{name} needs m >= {entry.min_m}, got {m}.")
    resolved_mu = resolve_mu(m, mu_root, mu) if entry.needs_mu else None
    immersion = entry.builder(m, resolved_mu)
    logger.info("Built %s (m = %d) into %s.", name, m, immersion.target.describe())
    return immersion


def list_catalog() -> Dict[str, str]:
    return {name: entry.description for name, entry in sorted(CATALOG.items())}
