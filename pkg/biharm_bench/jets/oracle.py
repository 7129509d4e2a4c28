import logging
import math
from typing import Sequence

import numpy as np

from biharm_bench.errors import OrderOverflowError, StepTooSmallError
from biharm_bench.jets.jet import ORDER, Jet
from biharm_bench.types import MultiIndex, ScalarMap

logger = logging.getLogger(__name__)

# Fourth-order central stencils, offsets -k..k, indexed by derivative order.
STENCILS = {
    0: np.array([1.0]),
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    3: np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0,
    4: np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0,
}

# Below this step, fourth differences lose too many digits to cancellation.
MIN_STEP_ORDER4 = 1e-4


def _check_multi_index(point: np.ndarray, alpha: MultiIndex) -> None:
    if len(alpha) != len(point):
        raise ValueError(
            f"Multi-index {tuple(alpha)} does not match a chart point of dimension {len(point)}."
        )
    if any(a < 0 for a in alpha):
        raise ValueError(f"Multi-index {tuple(alpha)} has negative entries.")
    if sum(alpha) > ORDER:
        raise OrderOverflowError(
            f"Derivative of order {sum(alpha)} exceeds the supported order {ORDER}."
        )


def derivative(fn: ScalarMap, point: Sequence[float], alpha: MultiIndex) -> float:
    """
    Exact partial derivative d^alpha fn(point) by jet propagation.

    Args:
        fn: scalar map taking the sequence of chart coordinates.
        point: chart point.
        alpha: multi-index with |alpha| <= 4.

    Returns:
        float: the partial derivative.
    """
    point = np.asarray(point, dtype=float).ravel()
    alpha = tuple(int(a) for a in alpha)
    _check_multi_index(point, alpha)

    result = fn(Jet.variables(point))
    if not isinstance(result, Jet):
        return float(result) if sum(alpha) == 0 else 0.0
    return float(result.partial(alpha))


def _central_difference(
    fn: ScalarMap, point: np.ndarray, alpha: MultiIndex, step: float
) -> float:
    offsets, weights = [], []
    for order in alpha:
        stencil = STENCILS[order]
        half = len(stencil) // 2
        offsets.append(np.arange(-half, half + 1))
        weights.append(stencil)

    total = 0.0
    for index in np.ndindex(*[len(w) for w in weights]):
        weight = math.prod(weights[axis][k] for axis, k in enumerate(index))
        if weight == 0.0:
            continue
        shifted = point + step * np.array(
            [offsets[axis][k] for axis, k in enumerate(index)], dtype=float
        )
        total += weight * float(fn(list(shifted)))
    return total / step ** sum(alpha)


def fd_derivative(
    fn: ScalarMap, point: Sequence[float], alpha: MultiIndex, step: float
) -> float:
    """
    Finite-difference estimate of d^alpha fn(point), independent of the jet
    engine. Products of fourth-order central stencils have error O(step^4);
    one Richardson step with step/2 cancels that term.

    Args:
        fn: scalar map taking the sequence of chart coordinates.
        point: chart point.
        alpha: multi-index with |alpha| <= 4.
        step: base step size.

    Returns:
        float: the extrapolated estimate.
    """
    point = np.asarray(point, dtype=float).ravel()
    alpha = tuple(int(a) for a in alpha)
    _check_multi_index(point, alpha)
    if step <= 0.0:
        raise StepTooSmallError(f"Step must be positive, got {step}.")
    if sum(alpha) == ORDER and step < MIN_STEP_ORDER4:
        raise StepTooSmallError(
            f"Step {step} is below {MIN_STEP_ORDER4} for a fourth-order derivative."
        )

    coarse = _central_difference(fn, point, alpha, step)
    fine = _central_difference(fn, point, alpha, step / 2.0)
    logger.debug(
        "FD derivative %s at %s: coarse=%g fine=%g", alpha, point.tolist(), coarse, fine
    )
    return (16.0 * fine - coarse) / 15.0
