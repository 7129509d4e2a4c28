import itertools
import math
from dataclasses import dataclass, field
from functools import cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from biharm_bench.errors import DomainError, OrderOverflowError
from biharm_bench.types import MultiIndex

# Truncation order of every jet. Bitension needs fourth derivatives of the map.
ORDER = 4


@dataclass(frozen=True)
class JetBasis:
    """
    Graded monomial basis of truncated Taylor polynomials in `dim` variables,
    together with the tables used by jet multiplication and differentiation.
    Index 0 is always the constant monomial.
    """

    dim: int
    indices: Tuple[MultiIndex, ...]
    position: Dict[MultiIndex, int] = field(repr=False)
    # Pairs (left, right) of monomials whose product survives truncation,
    # scattered onto the product monomial by `scatter`.
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    scatter: np.ndarray = field(repr=False)
    # Per axis: (source, target, factor) for the derivative shift.
    shifts: Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], ...] = field(repr=False)
    factorials: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.indices)


def _graded_indices(dim: int) -> List[MultiIndex]:
    indices = []
    for order in range(ORDER + 1):
        level = [
            alpha
            for alpha in itertools.product(range(order + 1), repeat=dim)
            if sum(alpha) == order
        ]
        indices.extend(sorted(level, reverse=True))
    return indices


@cache
def get_basis(dim: int) -> JetBasis:
    assert dim >= 1, "Jets need at least one variable."
    indices = _graded_indices(dim)
    position = {alpha: i for i, alpha in enumerate(indices)}

    left, right, target = [], [], []
    for i, alpha in enumerate(indices):
        for j, beta in enumerate(indices):
            if sum(alpha) + sum(beta) > ORDER:
                continue
            left.append(i)
            right.append(j)
            target.append(position[tuple(a + b for a, b in zip(alpha, beta))])

    scatter = np.zeros((len(target), len(indices)))
    scatter[np.arange(len(target)), target] = 1.0

    shifts = []
    for axis in range(dim):
        source, dest, factor = [], [], []
        for i, beta in enumerate(indices):
            raised = tuple(b + (k == axis) for k, b in enumerate(beta))
            if raised in position:
                source.append(position[raised])
                dest.append(i)
                factor.append(beta[axis] + 1)
        shifts.append((np.array(source), np.array(dest), np.array(factor, float)))

    factorials = np.array(
        [math.prod(math.factorial(a) for a in alpha) for alpha in indices], float
    )

    return JetBasis(
        dim=dim,
        indices=tuple(indices),
        position=position,
        left=np.array(left),
        right=np.array(right),
        scatter=scatter,
        shifts=tuple(shifts),
        factorials=factorials,
    )


class Jet:
    """
    Array of truncated Taylor expansions (total order <= ORDER) around a chart
    point. `coeffs` has shape (*shape, basis.size); coefficient alpha stores
    d^alpha f / alpha!. `order` is the number of degrees that are still exact
    (differentiation consumes one).
    """

    __array_priority__ = 1000
    __array_ufunc__ = None
    __slots__ = ("basis", "coeffs", "order")

    def __init__(self, basis: JetBasis, coeffs, order: int = ORDER) -> None:
        self.basis = basis
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.order = order
        assert self.coeffs.shape[-1] == basis.size, "Coefficient axis mismatch."

    @classmethod
    def constant(cls, basis: JetBasis, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (basis.size,))
        coeffs[..., 0] = value
        return cls(basis, coeffs)

    @classmethod
    def zeros(cls, basis: JetBasis, shape: Tuple[int, ...] = ()) -> "Jet":
        return cls(basis, np.zeros(tuple(shape) + (basis.size,)))

    @classmethod
    def variables(cls, point: Sequence[float]) -> List["Jet"]:
        """
        Independent chart variables u_a = point_a + du_a.
        """
        point = np.asarray(point, dtype=float).ravel()
        basis = get_basis(len(point))
        out = []
        for axis, value in enumerate(point):
            coeffs = np.zeros(basis.size)
            coeffs[0] = value
            coeffs[basis.position[tuple(int(k == axis) for k in range(basis.dim))]] = 1.0
            out.append(cls(basis, coeffs))
        return out

    @staticmethod
    def stack(items: Iterable, axis: int = 0, basis: Optional[JetBasis] = None) -> "Jet":
        items = list(items)
        if basis is None:
            basis = next(item.basis for item in items if isinstance(item, Jet))
        jets = [item if isinstance(item, Jet) else Jet.constant(basis, item) for item in items]
        ndim = jets[0].coeffs.ndim
        if axis < 0:
            axis += ndim
        return Jet(
            basis,
            np.stack([jet.coeffs for jet in jets], axis=axis),
            min(jet.order for jet in jets),
        )

    # Shape handling.

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0].copy()

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            key = key + (slice(None),)
        else:
            key = key + (Ellipsis, slice(None))
        return Jet(self.basis, self.coeffs[key], self.order)

    def sum(self, axis: Optional[int] = None) -> "Jet":
        if axis is None:
            return Jet(
                self.basis, self.coeffs.reshape(-1, self.basis.size).sum(0), self.order
            )
        if axis < 0:
            axis += self.ndim
        return Jet(self.basis, self.coeffs.sum(axis=axis), self.order)

    def mean(self, axis: int = 0) -> "Jet":
        size = self.shape[axis]
        return self.sum(axis) / size

    def inner(self, other) -> "Jet":
        """Euclidean inner product over the last leading axis."""
        return (self * other).sum(-1)

    def linear(self, matrix: np.ndarray) -> "Jet":
        """Apply a constant matrix along the last leading axis."""
        return Jet(
            self.basis, np.einsum("ij,...jk->...ik", matrix, self.coeffs), self.order
        )

    def swapaxes(self, a: int, b: int) -> "Jet":
        if a < 0:
            a += self.ndim
        if b < 0:
            b += self.ndim
        return Jet(self.basis, np.swapaxes(self.coeffs, a, b), self.order)

    # Arithmetic.

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            assert other.basis is self.basis, "Jets over different chart dimensions."
            return other
        return Jet.constant(self.basis, other)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        return Jet(self.basis, self.coeffs + other.coeffs, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.basis, -self.coeffs, self.order)

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(
                self.basis,
                self.coeffs * np.asarray(other, dtype=float)[..., None],
                self.order,
            )
        other = self._coerce(other)
        basis = self.basis
        product = (self.coeffs[..., basis.left] * other.coeffs[..., basis.right]) @ basis.scatter
        return Jet(basis, product, min(self.order, other.order))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, exponent) -> "Jet":
        if exponent == 0.5:
            return self.sqrt()
        if not float(exponent).is_integer() or exponent < 0:
            raise ValueError(f"Unsupported jet exponent {exponent}.")
        result = Jet.constant(self.basis, np.ones(self.shape))
        for _ in range(int(exponent)):
            result = result * self
        return result

    # Calculus.

    def diff(self, axis: int) -> "Jet":
        source, dest, factor = self.basis.shifts[axis]
        coeffs = np.zeros_like(self.coeffs)
        coeffs[..., dest] = self.coeffs[..., source] * factor
        return Jet(self.basis, coeffs, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of first partials along a new leading axis."""
        return Jet.stack([self.diff(a) for a in range(self.basis.dim)], axis=0)

    def partial(self, alpha: MultiIndex) -> np.ndarray:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.basis.dim:
            raise ValueError(f"Multi-index {alpha} does not match {self.basis.dim} variables.")
        if any(a < 0 for a in alpha):
            raise ValueError(f"Multi-index {alpha} has negative entries.")
        if sum(alpha) > self.order:
            raise OrderOverflowError(
                f"Derivative of order {sum(alpha)} requested from a jet exact to order {self.order}."
            )
        index = self.basis.position[alpha]
        return self.coeffs[..., index] * self.basis.factorials[index]

    def compose(self, taylor: Callable[[np.ndarray, int], np.ndarray]) -> "Jet":
        """
        Compose a scalar function with this jet. `taylor(v, k)` returns
        f^(k)(v) / k! elementwise.
        """
        base = self.value
        shifted = self - base
        result = Jet.constant(self.basis, taylor(base, 0))
        power = Jet.constant(self.basis, np.ones(self.shape))
        for k in range(1, ORDER + 1):
            power = power * shifted
            result = result + power * taylor(base, k)
        result.order = self.order
        return result

    def sin(self) -> "Jet":
        cycle = (np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))
        return self.compose(lambda v, k: cycle[k % 4](v) / math.factorial(k))

    def cos(self) -> "Jet":
        cycle = (np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin)
        return self.compose(lambda v, k: cycle[k % 4](v) / math.factorial(k))

    def exp(self) -> "Jet":
        return self.compose(lambda v, k: np.exp(v) / math.factorial(k))

    def sqrt(self) -> "Jet":
        base = self.value
        if np.any(base <= 0.0):
            raise DomainError(f"Square root of non-positive value {base.min()}.")
        return self.compose(
            lambda v, k: _binomial_half(k) * np.power(v, 0.5 - k)
        )

    def reciprocal(self) -> "Jet":
        base = self.value
        if np.any(base == 0.0):
            raise DomainError("Division by a jet with zero base value.")
        return self.compose(lambda v, k: (-1.0) ** k * np.power(v, -1.0 - k))

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.basis.dim}, order={self.order})"


def _binomial_half(k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (0.5 - j) / (j + 1)
    return out


# Elementary functions accepting plain numbers or jets, so a map is written once
# and evaluated either way.


def sin(x):
    return x.sin() if isinstance(x, Jet) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet) else np.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if np.any(np.asarray(x) < 0.0):
        raise DomainError(f"Square root of negative value {x}.")
    return np.sqrt(x)


def expi(x, frequency: float = 1.0):
    """Real and imaginary parts of exp(i * frequency * x)."""
    return cos(frequency * x), sin(frequency * x)
