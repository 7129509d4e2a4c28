import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from biharm_bench.errors import NotTangentError

logger = logging.getLogger(__name__)

TANGENCY_TOLERANCE = 1e-8
UNIT_NORM_TOLERANCE = 1e-8


class AmbientKind(str, Enum):
    FLAT = "flat"
    PROJECTIVE_VIA_LIFT = "projective_via_lift"


def complex_structure_matrix(dim: int) -> np.ndarray:
    """
    Multiplication by i in real coordinates ordered (Re z1, Im z1, Re z2, ...).
    """
    assert dim % 2 == 0, "Real dimension of a complex space must be even."
    J = np.zeros((dim, dim))
    for k in range(dim // 2):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


@dataclass(frozen=True)
class AmbientModel:
    """
    Complex space form of complex dimension m and holomorphic sectional
    curvature 4 * epsilon. The projective model is handled on the unit sphere
    of C^{m+1}: points are unit vectors, tangent vectors are horizontal.
    """

    kind: AmbientKind
    m: int

    def __post_init__(self):
        assert self.m >= 1, "Complex dimension must be positive."

    @classmethod
    def flat(cls, m: int) -> "AmbientModel":
        return cls(AmbientKind.FLAT, m)

    @classmethod
    def projective(cls, m: int) -> "AmbientModel":
        return cls(AmbientKind.PROJECTIVE_VIA_LIFT, m)

    @property
    def is_lift(self) -> bool:
        return self.kind == AmbientKind.PROJECTIVE_VIA_LIFT

    @property
    def epsilon(self) -> float:
        return 1.0 if self.is_lift else 0.0

    @property
    def real_dimension(self) -> int:
        return 2 * self.m

    @property
    def embedding_dimension(self) -> int:
        return 2 * self.m + 2 if self.is_lift else 2 * self.m

    @cached_property
    def J(self) -> np.ndarray:
        return complex_structure_matrix(self.embedding_dimension)

    def describe(self) -> str:
        return f"CP^{self.m}(4) via lift" if self.is_lift else f"C^{self.m}"

    # Tangency.

    def tangent_defect(self, p: np.ndarray, U: np.ndarray) -> float:
        """Components of U along p and ip (zero for flat models)."""
        if not self.is_lift:
            return 0.0
        return float(max(abs(U @ p), abs(U @ (self.J @ p))))

    def check_tangent(self, p: np.ndarray, *vectors: np.ndarray) -> None:
        for U in vectors:
            defect = self.tangent_defect(p, U)
            if defect > TANGENCY_TOLERANCE * max(1.0, float(np.linalg.norm(U))):
                raise NotTangentError(
                    f"Vector is not horizontal at the base point (defect {defect:.3e})."
                )

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        """
        Orthonormal basis (rows) of the real 2m-dimensional tangent space at p.
        """
        dim = self.embedding_dimension
        if not self.is_lift:
            return np.eye(dim)
        p = np.asarray(p, dtype=float)
        _check_unit(p)
        iv = self.J @ p
        projector = np.eye(dim) - np.outer(p, p) - np.outer(iv, iv)
        eigenvalues, eigenvectors = np.linalg.eigh(projector)
        basis = eigenvectors[:, eigenvalues > 0.5].T
        assert basis.shape[0] == self.real_dimension
        return basis


def _check_unit(p: np.ndarray) -> None:
    norm = float(np.linalg.norm(p))
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise NotTangentError(f"Base point has norm {norm}, expected a unit vector.")


def complex_structure_apply(model: AmbientModel, p: np.ndarray, U: np.ndarray) -> np.ndarray:
    """
    Apply J at p. For the projective model J is multiplication by i on the
    horizontal space.
    """
    p = np.asarray(p, dtype=float)
    U = np.asarray(U, dtype=float)
    if model.is_lift:
        _check_unit(p)
    model.check_tangent(p, U)
    return model.J @ U


def curvature_operator(
    model: AmbientModel, p: np.ndarray, U: np.ndarray, V: np.ndarray, W: np.ndarray
) -> np.ndarray:
    """
    R(U,V)W = eps{<V,W>U - <U,W>V + <W,JV>JU - <W,JU>JV + 2<U,JV>JW}.
    """
    eps = model.epsilon
    if eps == 0.0:
        return np.zeros_like(np.asarray(W, dtype=float))
    J = model.J
    JU, JV, JW = J @ U, J @ V, J @ W
    return eps * (
        (V @ W) * U
        - (U @ W) * V
        + (W @ JV) * JU
        - (W @ JU) * JV
        + 2.0 * (U @ JV) * JW
    )


def curvature_contraction(model: AmbientModel, xi, frame):
    """
    sum_i R(xi, e_i)e_i for a frame given as rows. Works on arrays and jets.
    """
    eps = model.epsilon
    m = len(frame)
    if eps == 0.0:
        return xi * 0.0
    J = model.J
    total = xi * 0.0
    Jxi = xi @ J.T if isinstance(xi, np.ndarray) else xi.linear(J)
    for i in range(m):
        e = frame[i]
        Je = e @ J.T if isinstance(e, np.ndarray) else e.linear(J)
        total = total + (
            (e * e).sum(-1) * xi
            - (xi * e).sum(-1) * e
            + (e * Je).sum(-1) * Jxi
            - (e * Jxi).sum(-1) * Je
            + 2.0 * (xi * Je).sum(-1) * Je
        )
    return total * eps


def ambient_ricci(model: AmbientModel, p: np.ndarray, U: np.ndarray, V: np.ndarray) -> float:
    """
    Trace of W -> R(U,W)W paired with V over an orthonormal tangent basis.
    Equals 2(m+1) eps <U,V> on a complex space form.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if model.epsilon == 0.0:
        return 0.0
    total = 0.0
    for f in model.tangent_basis(p):
        total += float(curvature_operator(model, p, U, f, f) @ V)
    return total


def horizontal_project(p: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Remove the components of U along p and ip."""
    p = np.asarray(p, dtype=float)
    U = np.asarray(U, dtype=float)
    _check_unit(p)
    iv = complex_structure_matrix(len(p)) @ p
    return U - (U @ p) * p - (U @ iv) * iv
