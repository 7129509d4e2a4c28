import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from biharm_bench.errors import (
    ConsistencyError,
    DegenerateImmersionError,
    DomainError,
    MinimalPointError,
    NotLagrangianError,
    OrderOverflowError,
)
from biharm_bench.geometry.ambient import curvature_contraction, curvature_operator
from biharm_bench.geometry.immersion import DEGENERATE_DETERMINANT, UNIT_LIFT_TOLERANCE, ImmersionSpec
from biharm_bench.jets import Jet

logger = logging.getLogger(__name__)

MINIMAL_POINT = 1e-10
TANGENCY_TOLERANCE = 1e-8
TENSION_TOLERANCE = 1e-8

FRAME_KINDS = ("auto", "adapted", "coordinate")


@dataclass
class GeometrySample:
    """
    Base values of the submanifold calculus at one chart point, all in the
    orthonormal frame e_1..e_m.
    """

    point: tuple
    # Image of the point (unit vector for lifts).
    position: np.ndarray
    metric: np.ndarray
    frame: np.ndarray
    # connection_forms[i, j, l] = <nabla_{e_i} e_j, e_l>.
    connection_forms: np.ndarray
    # B[i, j] = B(e_i, e_j), normal ambient vectors.
    B: np.ndarray
    H: np.ndarray
    frame_kind: str

    def shape(self, xi: np.ndarray) -> np.ndarray:
        """(A_xi)_ij = <B(e_i, e_j), xi>."""
        return self.B @ xi

    def invariant_defects(self) -> dict:
        m = len(self.frame)
        return {
            "frame_orthonormality": float(np.abs(self.frame @ self.frame.T - np.eye(m)).max()),
            "connection_antisymmetry": float(
                np.abs(self.connection_forms + np.swapaxes(self.connection_forms, 1, 2)).max()
            ),
            "B_symmetry": float(np.abs(self.B - np.swapaxes(self.B, 0, 1)).max()),
            "mean_curvature_trace": float(
                np.linalg.norm(self.H - np.einsum("iin->n", self.B) / m)
            ),
            "metric_min_eigenvalue": float(np.linalg.eigvalsh(self.metric).min()),
        }


class LocalGeometry:
    """
    Second-order submanifold calculus of an immersion around one chart point.

    Everything is carried as truncated Taylor jets in the chart variables, so
    frame fields, the second fundamental form and the mean curvature vector
    can be differentiated again without finite differences. For projective
    targets the computation runs on the Legendrian lift: vertical components
    (along p and ip) are projected out wherever the quotient connection is
    meant.
    """

    def __init__(
        self,
        immersion: ImmersionSpec,
        point: Sequence[float],
        frame: str = "auto",
        gauge: Optional[np.ndarray] = None,
        e1_sign: float = 1.0,
        frame_hint: Optional[np.ndarray] = None,
        second_fundamental_form_hook: Optional[Callable[["LocalGeometry", Jet], Jet]] = None,
    ) -> None:
        """
        Args:
            immersion: the immersion to analyse.
            point: chart point.
            frame: "adapted" (e_1 = -JH/|H|), "coordinate" (Gram-Schmidt of the
                coordinate vectors) or "auto" (adapted when possible).
            gauge: optional orthogonal (m-1)x(m-1) rotation of e_2..e_m.
            e1_sign: +1 or -1, orientation of e_1 in the adapted frame.
            frame_hint: constant normal vector used instead of H to set e_1.
            second_fundamental_form_hook: rewrites B after it is computed
                (used for fault injection).
        """
        assert frame in FRAME_KINDS, f"Unknown frame kind {frame}."
        self.immersion = immersion
        self.model = immersion.target
        self.m = immersion.chart_dimension
        self.point = tuple(float(x) for x in point)
        self.J = self.model.J

        self.phi, self.variables = immersion.jet(self.point)
        self.basis = self.phi.basis
        if self.model.is_lift:
            norm = float(np.linalg.norm(self.phi.value))
            if abs(norm - 1.0) > UNIT_LIFT_TOLERANCE:
                raise DomainError(
                    f"Lift has norm {norm} at {self.point}; expected a unit vector."
                )
            self.i_phi = self.phi.linear(self.J)

        # X[a] = d_a phi, hessian[a, b] = d_a d_b phi.
        self.coordinate_vectors = self.phi.gradient()
        self.hessian = Jet.stack(
            [self.coordinate_vectors[a].gradient() for a in range(self.m)], axis=0
        )
        self.metric = (
            self.coordinate_vectors[:, None, :] * self.coordinate_vectors[None, :, :]
        ).sum(-1)
        if np.linalg.det(self.metric.value) <= DEGENERATE_DETERMINANT:
            raise DegenerateImmersionError(f"Degenerate differential at {self.point}.")

        self._orthonormalize_coordinates()
        normal_hessian = self.normal(self.hessian)
        coordinate_B = self.contract_pair(self.coordinate_coefficients, normal_hessian)
        self.mean_curvature = sum(coordinate_B[k, k] for k in range(self.m)) / self.m

        self.frame_kind = self._resolve_frame_kind(frame, frame_hint)
        if self.frame_kind == "adapted":
            self.frame = self._adapted_frame(gauge, e1_sign, frame_hint)
            self.frame_coords = self.coords(self.frame)
        else:
            self.frame = self.coordinate_frame
            self.frame_coords = self.coordinate_coefficients

        B = self.contract_pair(self.frame_coords, normal_hessian)
        if second_fundamental_form_hook is not None:
            B = second_fundamental_form_hook(self, B)
        self.second_fundamental_form = B
        logger.debug("Local geometry at %s built with %s frame.", self.point, self.frame_kind)

    # Frames.

    def _orthonormalize_coordinates(self) -> None:
        """
        Gram-Schmidt of the coordinate vectors keeping f_k = sum_a C[k, a] X_a,
        so that g^{-1} = C^T C.
        """
        X = self.coordinate_vectors
        frame, rows = [], []
        for k in range(self.m):
            v = X[k]
            coeff = Jet.constant(self.basis, np.eye(self.m)[k])
            for j in range(k):
                r = v.inner(frame[j])
                v = v - r * frame[j]
                coeff = coeff - r * rows[j]
            norm = v.inner(v).sqrt()
            frame.append(v / norm)
            rows.append(coeff / norm)
        self.coordinate_frame = Jet.stack(frame)
        self.coordinate_coefficients = Jet.stack(rows)

    def _resolve_frame_kind(self, frame: str, frame_hint: Optional[np.ndarray]) -> str:
        if frame != "auto":
            return frame
        if frame_hint is None and self.mean_curvature_norm < MINIMAL_POINT:
            return "coordinate"
        try:
            self._hint_direction(frame_hint)
        except (MinimalPointError, NotLagrangianError):
            return "coordinate"
        return "adapted"

    def _hint_direction(self, frame_hint: Optional[np.ndarray]) -> Jet:
        """-J of the hint (H by default), checked to be tangent."""
        if frame_hint is None:
            hint = self.mean_curvature
        else:
            hint = Jet.constant(self.basis, np.asarray(frame_hint, dtype=float))
        size = float(np.linalg.norm(hint.value))
        if size < MINIMAL_POINT:
            raise MinimalPointError(
                f"Mean curvature vanishes at {self.point}; adapted frame undefined."
            )
        direction = -hint.linear(self.J)
        defect = float(np.linalg.norm((direction - self.tangent(direction)).value))
        if defect > TANGENCY_TOLERANCE * max(1.0, size):
            raise NotLagrangianError(
                f"J(H) is not tangent at {self.point} (defect {defect:.3e})."
            )
        return direction

    def _adapted_frame(
        self, gauge: Optional[np.ndarray], e1_sign: float, frame_hint: Optional[np.ndarray]
    ) -> Jet:
        first = self.tangent(self._hint_direction(frame_hint))
        first = first / first.inner(first).sqrt() * e1_sign

        # Complete with the coordinate vectors least parallel to e_1.
        overlaps = np.abs(self.coordinate_frame.value @ first.value)
        dropped = int(np.argmax(overlaps))
        vectors = [first]
        for k in range(self.m):
            if k == dropped:
                continue
            v = self.coordinate_vectors[k]
            for e in vectors:
                v = v - v.inner(e) * e
            vectors.append(v / v.inner(v).sqrt())

        frame = Jet.stack(vectors)
        if gauge is not None and self.m > 1:
            gauge = np.asarray(gauge, dtype=float)
            assert gauge.shape == (self.m - 1, self.m - 1), "Gauge acts on e_2..e_m."
            rest = frame[1:].swapaxes(0, 1).linear(gauge).swapaxes(0, 1)
            frame = Jet.stack([frame[0]] + list(rest))
        return frame

    # Projections (any leading shape, ambient axis last).

    def tangent(self, V: Jet) -> Jet:
        f = self.coordinate_frame
        components = (V[..., None, :] * f).sum(-1)
        return (components[..., None] * f).sum(-2)

    def vertical(self, V: Jet) -> Jet:
        if not self.model.is_lift:
            return V * 0.0
        along = V.inner(self.phi)[..., None] * self.phi
        across = V.inner(self.i_phi)[..., None] * self.i_phi
        return along + across

    def horizontal(self, V: Jet) -> Jet:
        if not self.model.is_lift:
            return V
        return V - self.vertical(V)

    def normal(self, V: Jet) -> Jet:
        return self.horizontal(V) - self.tangent(V)

    def coords(self, V: Jet) -> Jet:
        """Chart components of tangent vectors: V = sum_a coords[a] X_a."""
        components = (V[..., None, :] * self.coordinate_frame).sum(-1)
        return (components[..., :, None] * self.coordinate_coefficients).sum(-2)

    # Differentiation.

    def directional(self, V: Jet) -> Jet:
        """Stack of e_i(V) over the frame, along a new leading axis."""
        grad = Jet.stack([V.diff(a) for a in range(self.m)], axis=0)
        E = self.frame_coords[(slice(None), slice(None)) + (None,) * V.ndim]
        return (E * grad[None]).sum(1)

    def normal_derivatives(self, field: Jet) -> Jet:
        """nabla^perp_{e_i} field for every i."""
        return self.normal(self.directional(field))

    def normal_laplacian(self, field: Jet) -> Jet:
        """-sum_i (nabla^perp_i nabla^perp_i - nabla^perp_{nabla_i e_i}) field."""
        first = self.normal_derivatives(field)
        second = self.normal(self.directional(first))
        return self._laplacian(first, second)

    def rough_laplacian(self, field: Jet) -> Jet:
        """Same as normal_laplacian with the full pulled-back connection."""
        first = self.horizontal(self.directional(field))
        second = self.horizontal(self.directional(first))
        return self._laplacian(first, second)

    def _laplacian(self, first: Jet, second: Jet) -> Jet:
        omega = self.connection_forms
        total = Jet.zeros(self.basis, first.shape[1:])
        for i in range(self.m):
            total = total + second[i, i]
            for l in range(self.m):
                total = total - omega[i, i, l] * first[l]
        if total.order < 0:
            raise OrderOverflowError(
                "Field needs derivatives beyond the fourth order of the immersion."
            )
        return -total

    def contract_pair(self, E: Jet, T: Jet) -> Jet:
        """out[i, j] = sum_ab E[i, a] E[j, b] T[a, b]."""
        extra = (None,) * (T.ndim - 2)
        left = E[(slice(None), None, slice(None), None) + extra]
        right = E[(None, slice(None), None, slice(None)) + extra]
        return (left * right * T[None, None]).sum(2).sum(2)

    # Frame calculus.

    @cached_property
    def frame_derivatives(self) -> Jet:
        """De[i, j] = D_{e_i} e_j (ambient derivative)."""
        return self.directional(self.frame)

    @cached_property
    def connection_forms(self) -> Jet:
        De = self.frame_derivatives
        return (De[:, :, None, :] * self.frame[None, None, :, :]).sum(-1)

    @cached_property
    def mean_curvature_norm(self) -> float:
        return float(np.linalg.norm(self.mean_curvature.value))

    @cached_property
    def covariant_second_fundamental_form(self) -> np.ndarray:
        """nabla^perp B[i, j, k] = (nabla^perp_{e_i} B)(e_j, e_k), base values."""
        B = self.second_fundamental_form
        omega = self.connection_forms
        derivative = self.normal(self.directional(B)).value
        omega_value, B_value = omega.value, B.value
        return (
            derivative
            - np.einsum("ijl,lkn->ijkn", omega_value, B_value)
            - np.einsum("ikl,jln->ijkn", omega_value, B_value)
        )

    def apply_J(self, V: np.ndarray) -> np.ndarray:
        return V @ self.J.T

    def project_normal(self, V: np.ndarray) -> np.ndarray:
        """Normal projection of base-value ambient vectors (last axis)."""
        f = self.coordinate_frame.value
        out = V - (V @ f.T) @ f
        if self.model.is_lift:
            p = self.phi.value
            ip = self.J @ p
            out = out - np.multiply.outer(V @ p, p) - np.multiply.outer(V @ ip, ip)
        return out

    # Tension and bitension.

    def tension_by_frame(self) -> np.ndarray:
        """sum_i (nabla dphi)(e_i, e_i) from the frame derivatives."""
        De = self.frame_derivatives
        omega = self.connection_forms.value
        frame = self.frame.value
        total = np.zeros(self.model.embedding_dimension)
        for i in range(self.m):
            total += self.horizontal(De[i, i]).value - omega[i, i] @ frame
        return total

    def tension(self) -> np.ndarray:
        tau = self.tension_by_frame()
        expected = self.m * self.mean_curvature.value
        mismatch = float(np.linalg.norm(tau - expected))
        if mismatch > TENSION_TOLERANCE * max(1.0, float(np.linalg.norm(expected))):
            raise ConsistencyError(
                f"Tension routes disagree at {self.point} by {mismatch:.3e}."
            )
        return tau

    @cached_property
    def shape_H(self) -> Jet:
        """(A_H)[i, j] = <B_ij, H>."""
        return self.second_fundamental_form.inner(self.mean_curvature)

    def trace_nabla_shape_H(self) -> np.ndarray:
        """sum_i (nabla_{e_i} A_H)(e_i)."""
        A_H = self.shape_H
        A_e = (A_H[:, :, None] * self.frame[None, :, :]).sum(1)
        derivative = self.tangent(self.directional(A_e))
        omega = self.connection_forms.value
        A_e_value = A_e.value
        total = np.zeros(self.model.embedding_dimension)
        for i in range(self.m):
            total += derivative[i, i].value - omega[i, i] @ A_e_value
        return total

    def trace_shape_nabla_perp_H(self) -> np.ndarray:
        """sum_i A_{nabla^perp_{e_i} H}(e_i) = sum_ij <B_ij, nabla^perp_i H> e_j."""
        nabla_H = self.normal_derivatives(self.mean_curvature).value
        B = self.second_fundamental_form.value
        coefficients = np.einsum("ijn,in->j", B, nabla_H)
        return coefficients @ self.frame.value

    def trace_B_shape_H(self) -> np.ndarray:
        """sum_ij (A_H)_ij B_ji."""
        return np.einsum("ij,jin->n", self.shape_H.value, self.second_fundamental_form.value)

    def normal_laplacian_H(self) -> np.ndarray:
        return self.normal_laplacian(self.mean_curvature).value

    def curvature_term(self) -> np.ndarray:
        """sum_i R^N(H, e_i)e_i at the base point."""
        return curvature_contraction(self.model, self.mean_curvature.value, self.frame.value)

    def rough_laplacian_H_split(self) -> np.ndarray:
        tangential = self.trace_nabla_shape_H() + self.trace_shape_nabla_perp_H()
        normal = self.normal_laplacian_H() + self.trace_B_shape_H()
        return tangential + normal

    def bitension(self) -> np.ndarray:
        return self.m * (self.rough_laplacian_H_split() - self.curvature_term())

    # Intrinsic curvature.

    def curvature(self, U: np.ndarray, V: np.ndarray, W: np.ndarray) -> np.ndarray:
        return curvature_operator(self.model, self.phi.value, U, V, W)

    def ricci_gauss(self) -> np.ndarray:
        return gauss_ricci(
            self.model,
            self.phi.value,
            self.frame.value,
            self.second_fundamental_form.value,
            self.mean_curvature.value,
        )

    def codazzi_residual(self) -> float:
        """
        max |(R(e_i,e_j)e_k)^perp - ((nabla^perp_i B)(e_j,e_k) - (nabla^perp_j B)(e_i,e_k))|.
        """
        e = self.frame.value
        nabla_B = self.covariant_second_fundamental_form
        worst = 0.0
        for i in range(self.m):
            for j in range(self.m):
                for k in range(self.m):
                    ambient = self.project_normal(self.curvature(e[i], e[j], e[k]))
                    defect = ambient - (nabla_B[i, j, k] - nabla_B[j, i, k])
                    worst = max(worst, float(np.linalg.norm(defect)))
        return worst

    def sectional_gauss(self, i: int, j: int) -> float:
        e = self.frame.value
        B = self.second_fundamental_form.value
        return float(
            self.curvature(e[i], e[j], e[j]) @ e[i] - B[i, j] @ B[i, j] + B[i, i] @ B[j, j]
        )

    @cached_property
    def christoffel(self) -> Jet:
        """Gamma[r, a, b] from the metric jets."""
        g = self.metric
        C = self.coordinate_coefficients
        g_inv = (C[:, :, None] * C[:, None, :]).sum(0)
        dg = Jet.stack([g.diff(c) for c in range(self.m)], axis=0)
        # lowered[s, a, b] = d_a g_sb + d_b g_sa - d_s g_ab
        lowered = dg.swapaxes(0, 1) + dg.swapaxes(0, 1).swapaxes(1, 2) - dg
        return (g_inv[:, :, None, None] * lowered[None]).sum(1) * 0.5

    @cached_property
    def riemann_coordinates(self) -> np.ndarray:
        """R[rho, sigma, mu, nu] with R(d_mu, d_nu) d_sigma = R^rho_{sigma mu nu} d_rho."""
        gamma = self.christoffel
        d_gamma = np.stack([gamma.diff(c).value for c in range(self.m)])
        G = gamma.value
        # d_gamma[c, r, a, b] = d_c Gamma^r_ab
        return (
            np.einsum("mrns->rsmn", d_gamma)
            - np.einsum("nrms->rsmn", d_gamma)
            + np.einsum("rml,lns->rsmn", G, G)
            - np.einsum("rnl,lms->rsmn", G, G)
        )

    def sectional_metric(self, i: int, j: int) -> float:
        R = self.riemann_coordinates
        g = self.metric.value
        E = self.frame_coords.value
        lowered = np.einsum("ar,rsmn->asmn", g, R)
        return float(np.einsum("asmn,m,n,s,a->", lowered, E[i], E[j], E[j], E[i]))

    def ricci_metric(self) -> np.ndarray:
        R = self.riemann_coordinates
        ricci = np.einsum("msmn->ns", R)
        E = self.frame_coords.value
        return E @ ricci @ E.T

    def laplace_beltrami_tension(self) -> np.ndarray:
        """Horizontal part of g^{ab}(phi_ab - Gamma^c_ab phi_c)."""
        C = self.coordinate_coefficients.value
        g_inv = C.T @ C
        hessian = self.hessian.value
        X = self.coordinate_vectors.value
        gamma = self.christoffel.value
        laplacian = np.einsum("ab,abn->n", g_inv, hessian) - np.einsum(
            "ab,cab,cn->n", g_inv, gamma, X
        )
        if self.model.is_lift:
            p = self.phi.value
            ip = self.J @ p
            laplacian = laplacian - (laplacian @ p) * p - (laplacian @ ip) * ip
        return laplacian

    def sample(self) -> GeometrySample:
        return GeometrySample(
            point=self.point,
            position=self.phi.value,
            metric=self.metric.value,
            frame=self.frame.value,
            connection_forms=self.connection_forms.value,
            B=self.second_fundamental_form.value,
            H=self.mean_curvature.value,
            frame_kind=self.frame_kind,
        )


def gauss_ricci(model, position, frame, B, H) -> np.ndarray:
    """
    Ric(e_i, e_j) = sum_k <R(e_i,e_k)e_k, e_j> - sum_k <B_ik, B_kj> + m <H, B_ij>.
    """
    m = len(frame)
    ambient = np.zeros((m, m))
    for i in range(m):
        for k in range(m):
            ambient[i] += frame @ curvature_operator(model, position, frame[i], frame[k], frame[k])
    return ambient - np.einsum("ikn,kjn->ij", B, B) + m * (B @ H)
