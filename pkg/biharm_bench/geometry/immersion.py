from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from biharm_bench.errors import DegenerateImmersionError, DomainError
from biharm_bench.geometry.ambient import AmbientModel
from biharm_bench.jets import Jet, cos, sin
from biharm_bench.types import ComponentMap, ScalarMap

UNIT_LIFT_TOLERANCE = 1e-10
DEGENERATE_DETERMINANT = 1e-12


@dataclass(frozen=True)
class ImmersionSpec:
    """
    A chart-to-ambient map given by one callable returning every embedding
    coordinate. The callable is written with the polymorphic elementary
    functions of `biharm_bench.jets`, so it evaluates on floats and on jets.
    """

    name: str
    target: AmbientModel
    chart_dimension: int
    mapping: ComponentMap
    # (low, high) per chart axis.
    domain: Tuple[Tuple[float, float], ...]
    # Periodic axes are sampled without repeating the endpoint.
    periodic: Tuple[bool, ...]
    description: str = ""
    # Extra metadata (e.g. mu, lambda) carried into reports.
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        assert len(self.domain) == self.chart_dimension, "One domain interval per axis."
        assert len(self.periodic) == self.chart_dimension, "One periodicity flag per axis."

    def _checked(self, values: Sequence) -> list:
        values = list(values)
        if len(values) != self.target.embedding_dimension:
            raise ValueError(
                f"{self.name}: map returned {len(values)} coordinates, "
                f"expected {self.target.embedding_dimension}."
            )
        return values

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        point = [float(x) for x in point]
        return np.array([float(v) for v in self._checked(self.mapping(point))])

    def jet(self, point: Sequence[float]) -> Tuple[Jet, List[Jet]]:
        """
        Jet of the whole map at a chart point, with the chart variables used.
        """
        variables = Jet.variables(point)
        values = self._checked(self.mapping(variables))
        return Jet.stack(values, basis=variables[0].basis), variables

    def component(self, index: int) -> ScalarMap:
        """Scalar map of one embedding coordinate."""

        def component_map(u):
            return self._checked(self.mapping(u))[index]

        return component_map

    def grid(self, counts: Sequence[int]) -> np.ndarray:
        """
        Tensor-product sample grid, shape (prod(counts), chart_dimension), in
        C order over the axes.
        """
        assert len(counts) == self.chart_dimension, "One count per chart axis."
        axes = []
        for (low, high), periodic, count in zip(self.domain, self.periodic, counts):
            axes.append(np.linspace(low, high, count, endpoint=not periodic))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([axis.ravel() for axis in mesh], axis=-1)

    def shifted(self, offsets: Sequence[float]) -> "ImmersionSpec":
        """Reparametrize by a rigid shift of the chart coordinates."""
        offsets = tuple(float(o) for o in offsets)
        mapping = self.mapping

        def shifted_mapping(u):
            return mapping([x + o for x, o in zip(u, offsets)])

        domain = tuple((lo - o, hi - o) for (lo, hi), o in zip(self.domain, offsets))
        return ImmersionSpec(
            name=self.name,
            target=self.target,
            chart_dimension=self.chart_dimension,
            mapping=shifted_mapping,
            domain=domain,
            periodic=self.periodic,
            description=self.description,
            parameters=dict(self.parameters),
        )

    def check_point(self, point: Sequence[float]) -> None:
        """
        Validate the immersion invariants at one sample point: unit lift for
        projective targets and a full-rank differential.
        """
        phi, _ = self.jet(point)
        value = phi.value
        if self.target.is_lift:
            norm = float(np.linalg.norm(value))
            if abs(norm - 1.0) > UNIT_LIFT_TOLERANCE:
                raise DomainError(
                    f"{self.name}: lift has norm {norm} at {tuple(point)}, expected 1."
                )
        gradient = phi.gradient().value
        metric = gradient @ gradient.T
        if np.linalg.det(metric) <= DEGENERATE_DETERMINANT:
            raise DegenerateImmersionError(
                f"{self.name}: degenerate differential at {tuple(point)}."
            )


def sphere_point(angles: Sequence) -> list:
    """
    Point of S^k from k spherical angles; the first k-1 are colatitudes and
    the last is periodic.
    """
    coords = []
    product = 1.0
    for angle in angles:
        coords.append(product * cos(angle))
        product = product * sin(angle)
    coords.append(product)
    return coords


def sphere_chart(k: int, margin: float = 0.2) -> Tuple[Tuple[Tuple[float, float], ...], Tuple[bool, ...]]:
    """Domain and periodicity of the spherical chart of S^k, poles excluded."""
    domain = tuple((margin, np.pi - margin) for _ in range(k - 1)) + ((0.0, 2 * np.pi),)
    periodic = tuple(False for _ in range(k - 1)) + (True,)
    return domain, periodic

