import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from biharm_bench.errors import DomainError, IntegrationDriftError
from biharm_bench.jets import Jet, cos, expi, get_basis, sin

logger = logging.getLogger(__name__)

INITIAL_DATA_TOLERANCE = 1e-10
DRIFT_TOLERANCE = 1e-6
SECOND_COMPONENT_FLOOR = 1e-10

# (real z1, imag z1, real z2, imag z2) of a curve at x, floats or jets.
CurveMap = Callable[[object], Tuple]
LambdaProfile = Callable[[object], object]

CSV_COLUMNS = (
    "x",
    "re_z1",
    "im_z1",
    "re_z2",
    "im_z2",
    "norm_defect",
    "speed_defect",
    "legendre_defect",
    "mu",
)


def _hermitian(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.sum(z * np.conj(w), axis=-1)


def _rhs(lambda_value: float, state: np.ndarray) -> np.ndarray:
    z, zp = state[:2], state[2:]
    return np.concatenate([zp, 1j * lambda_value * zp - z])


def rk4_step(lambda_profile: LambdaProfile, x: float, state: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of z'' = i lambda(x) z' - z."""
    k1 = _rhs(float(lambda_profile(x)), state)
    k2 = _rhs(float(lambda_profile(x + h / 2)), state + k1 * h / 2)
    k3 = _rhs(float(lambda_profile(x + h / 2)), state + k2 * h / 2)
    k4 = _rhs(float(lambda_profile(x + h)), state + k3 * h)
    return state + (k1 + 2 * k2 + 2 * k3 + k4) * h / 6


@dataclass
class LegendreCurve:
    """
    A unit speed Legendre curve z(x) in S^3, sampled on a uniform grid and,
    for known solutions, also available in closed form.
    """

    x: np.ndarray
    # Complex samples, shape (n, 2).
    z: np.ndarray
    zp: np.ndarray
    lambda_profile: LambdaProfile
    domain: Tuple[float, float]
    closed_form: Optional[CurveMap] = None
    # Closed-form curves may be sampled as periodic in x.
    periodic: bool = False
    name: str = "legendre"
    parameters: dict = field(default_factory=dict)

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0]) if len(self.x) > 1 else 0.0

    def state_at(self, x: float) -> np.ndarray:
        """(z, z') at x, integrated from the nearest sample."""
        if self.closed_form is not None:
            z, zp = closed_form_samples(self.closed_form, np.array([x]))
            return np.concatenate([z[0], zp[0]])
        index = int(np.clip(round((x - self.x[0]) / self.step), 0, len(self.x) - 1))
        start = np.concatenate([self.z[index], self.zp[index]])
        offset = x - float(self.x[index])
        if offset == 0.0:
            return start
        return rk4_step(self.lambda_profile, float(self.x[index]), start, offset)

    def evaluate(self, x) -> Tuple:
        """Polymorphic curve map: floats in, floats out; jets in, jets out."""
        if self.closed_form is not None:
            return self.closed_form(x)
        if not isinstance(x, Jet):
            z = self.state_at(float(x))[:2]
            return z[0].real, z[0].imag, z[1].real, z[1].imag
        base = float(x.value)
        coefficients = taylor_coefficients(self.lambda_profile, base, self.state_at(base))
        t = x - base
        power = Jet.constant(x.basis, 1.0)
        parts = [Jet.zeros(x.basis) for _ in range(4)]
        for c in coefficients:
            parts[0] = parts[0] + power * c[0].real
            parts[1] = parts[1] + power * c[0].imag
            parts[2] = parts[2] + power * c[1].real
            parts[3] = parts[3] + power * c[1].imag
            power = power * t
        return tuple(parts)


def closed_form_samples(curve_map: CurveMap, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    z and z' of a closed-form curve at many points at once, through one jet
    batched over the sample axis.
    """
    basis = get_basis(1)
    coeffs = np.zeros((len(xs), basis.size))
    coeffs[:, 0] = xs
    coeffs[:, basis.position[(1,)]] = 1.0
    variable = Jet(basis, coeffs)
    parts = [
        part if isinstance(part, Jet) else Jet.constant(basis, np.full(len(xs), float(part)))
        for part in curve_map(variable)
    ]
    values = np.stack([part.value for part in parts], axis=-1)
    velocity = np.stack([part.diff(0).value for part in parts], axis=-1)
    z = values[:, 0::2] + 1j * values[:, 1::2]
    zp = velocity[:, 0::2] + 1j * velocity[:, 1::2]
    return z, zp


def taylor_coefficients(lambda_profile: LambdaProfile, x0: float, state: np.ndarray, order: int = 4) -> list:
    """
    Taylor coefficients c_0..c_order of z around x0 from the ODE:
    (k+2)(k+1) c_{k+2} = i sum_j lambda_j (k-j+1) c_{k-j+1} - c_k.
    """
    (variable,) = Jet.variables([x0])
    profile = lambda_profile(variable)
    lam = np.zeros(order + 1)
    if isinstance(profile, Jet):
        for j in range(order + 1):
            lam[j] = profile.coeffs[variable.basis.position[(j,)]]
    else:
        lam[0] = float(profile)
    c = [state[:2].astype(complex), state[2:].astype(complex)]
    for k in range(order - 1):
        acc = sum(lam[j] * (k - j + 1) * c[k - j + 1] for j in range(k + 1))
        c.append((1j * acc - c[k]) / ((k + 2) * (k + 1)))
    return c[: order + 1]


def _check_initial_data(z0: np.ndarray, z0p: np.ndarray) -> None:
    defects = {
        "norm": abs(np.linalg.norm(z0) - 1.0),
        "speed": abs(np.linalg.norm(z0p) - 1.0),
        "hermitian": abs(_hermitian(z0, z0p)),
    }
    for name, defect in defects.items():
        if defect > INITIAL_DATA_TOLERANCE:
            raise DomainError(f"Initial data violates the {name} condition (defect {defect:.3e}).")


def solve_legendre(
    lambda_profile: LambdaProfile,
    z0: Sequence[complex],
    z0p: Sequence[complex],
    interval: Tuple[float, float],
    step: float = 1e-3,
    drift_tolerance: float = DRIFT_TOLERANCE,
) -> LegendreCurve:
    """
    Integrate z'' = i lambda(x) z' - z with classical RK4 at a fixed step.

    Args:
        lambda_profile: lambda(x), written with the polymorphic elementary
            functions so it also evaluates on jets.
        z0, z0p: initial point and velocity in C^2.
        interval: (start, end) of integration.
        step: requested step; the actual step divides the interval evenly.
        drift_tolerance: bound on |z| - 1, |z'| - 1 and the Legendre defect.

    Returns:
        The sampled curve.
    """
    z0 = np.asarray(z0, dtype=complex)
    z0p = np.asarray(z0p, dtype=complex)
    _check_initial_data(z0, z0p)
    start, end = float(interval[0]), float(interval[1])
    assert end > start, "Integration interval must be increasing."
    assert step > 0, "Step must be positive."
    count = max(1, math.ceil((end - start) / step))
    h = (end - start) / count

    xs = start + h * np.arange(count + 1)
    states = np.zeros((count + 1, 4), dtype=complex)
    states[0] = np.concatenate([z0, z0p])
    for n in range(count):
        states[n + 1] = rk4_step(lambda_profile, float(xs[n]), states[n], h)
        drift = _worst_drift(states[n + 1])
        if drift > drift_tolerance:
            raise IntegrationDriftError(
                f"Invariant drift {drift:.3e} at x = {xs[n + 1]:.6f}; reduce the step (now {h:.3e})."
            )
    logger.debug(
        "Integrated Legendre curve over [%s, %s] in %d steps, final drift %.3e.",
        start,
        end,
        count,
        _worst_drift(states[-1]),
    )
    return LegendreCurve(
        x=xs,
        z=states[:, :2],
        zp=states[:, 2:],
        lambda_profile=lambda_profile,
        domain=(start, end),
    )


def _worst_drift(state: np.ndarray) -> float:
    z, zp = state[:2], state[2:]
    return max(
        abs(np.linalg.norm(z) - 1.0),
        abs(np.linalg.norm(zp) - 1.0),
        abs(float(np.real(_hermitian(1j * z, zp)))),
    )


def legendre_diagnostics(curve: LegendreCurve) -> Dict[str, np.ndarray]:
    """
    Per sample: |z| - 1, |z'| - 1, Re<iz, z'> and mu = Re(i z2 conj(z2'))/|z2|^2.
    """
    z, zp = curve.z, curve.zp
    z2_norm = np.abs(z[:, 1]) ** 2
    if np.any(z2_norm < SECOND_COMPONENT_FLOOR**2):
        index = int(np.argmin(z2_norm))
        raise DomainError(f"|z2| vanishes at x = {curve.x[index]}; mu undefined.")
    return {
        "norm_defect": np.linalg.norm(z, axis=1) - 1.0,
        "speed_defect": np.linalg.norm(zp, axis=1) - 1.0,
        "legendre_defect": np.real(_hermitian(1j * z, zp)),
        "mu": np.real(1j * z[:, 1] * np.conj(zp[:, 1])) / z2_norm,
    }


def export_curve_csv(curve: LegendreCurve, path: str) -> None:
    diagnostics = legendre_diagnostics(curve)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for n, x in enumerate(curve.x):
            z = curve.z[n]
            writer.writerow(
                [
                    repr(float(x)),
                    repr(float(z[0].real)),
                    repr(float(z[0].imag)),
                    repr(float(z[1].real)),
                    repr(float(z[1].imag)),
                ]
                + [repr(float(diagnostics[key][n])) for key in CSV_COLUMNS[5:]]
            )
    logger.info("Wrote %d curve samples to %s.", len(curve.x), path)


# Known curves.


def chen_curve_map(mu: float) -> CurveMap:
    """z(x) = (sqrt(mu^2/(mu^2+1)) e^{-ix/mu}, e^{i mu x}/sqrt(mu^2+1))."""
    if mu == 0.0:
        raise DomainError("The closed-form curve needs mu != 0.")
    first = math.sqrt(mu * mu / (mu * mu + 1.0))
    second = 1.0 / math.sqrt(mu * mu + 1.0)

    def curve_map(x):
        c1, s1 = expi(x, -1.0 / mu)
        c2, s2 = expi(x, mu)
        return first * c1, first * s1, second * c2, second * s2

    return curve_map


def sample_closed_form(
    curve_map: CurveMap,
    lambda_profile: LambdaProfile,
    interval: Tuple[float, float],
    step: float = 1e-3,
    periodic: bool = False,
    name: str = "closed-form",
    parameters: Optional[dict] = None,
) -> LegendreCurve:
    start, end = interval
    count = max(1, math.ceil((end - start) / step))
    xs = np.linspace(start, end, count + 1)
    z, zp = closed_form_samples(curve_map, xs)
    return LegendreCurve(
        x=xs,
        z=z,
        zp=zp,
        lambda_profile=lambda_profile,
        domain=(float(start), float(end)),
        closed_form=curve_map,
        periodic=periodic,
        name=name,
        parameters=dict(parameters or {}),
    )


def chen_curve(mu: float, step: float = 1e-3) -> LegendreCurve:
    lam = (mu * mu - 1.0) / mu
    return sample_closed_form(
        chen_curve_map(mu),
        lambda x: lam,
        (0.0, 2 * np.pi),
        step=step,
        periodic=True,
        name="chen",
        parameters={"mu": mu, "lambda": lam},
    )


def great_circle_curve(step: float = 1e-3) -> LegendreCurve:
    """z(x) = (cos x, sin x), the lambda = 0 solution."""

    def curve_map(x):
        return cos(x), 0.0 * x, sin(x), 0.0 * x

    return sample_closed_form(
        curve_map,
        lambda x: 0.0,
        (0.2, np.pi - 0.2),
        step=step,
        name="great-circle",
        parameters={"lambda": 0.0},
    )


def generic_lambda_profile(x):
    return 0.5 + 0.3 * sin(x)


def generic_legendre_curve(step: float = 1e-3, interval: Tuple[float, float] = (0.0, 1.0)) -> LegendreCurve:
    """
    A non-biharmonic curve: lambda(x) = 0.5 + 0.3 sin x, starting from the
    real great circle at angle 0.8.
    """
    angle = 0.8
    curve = solve_legendre(
        generic_lambda_profile,
        z0=[math.cos(angle), math.sin(angle)],
        z0p=[-math.sin(angle), math.cos(angle)],
        interval=interval,
        step=step,
    )
    curve.name = "generic"
    curve.parameters = {"lambda": "0.5 + 0.3 sin x"}
    return curve


def integrated_chen_curve(mu: float, step: float = 1e-3) -> LegendreCurve:
    """
    The Chen curve recovered from the Legendre ODE with constant
    lambda = (mu^2 - 1)/mu and the closed form's data at x = 0.
    """
    lam = (mu * mu - 1.0) / mu
    curve_map = chen_curve_map(mu)
    z, zp = closed_form_samples(curve_map, np.array([0.0]))
    curve = solve_legendre(lambda x: lam, z[0], zp[0], (0.0, 2 * np.pi), step=step)
    curve.name = "chen-ode"
    curve.parameters = {"mu": mu, "lambda": lam}
    return curve


def closed_form_deviation(curve: LegendreCurve, curve_map: CurveMap) -> float:
    """Sup-norm distance between the samples of a curve and a closed form."""
    z, _ = closed_form_samples(curve_map, curve.x)
    return float(np.abs(curve.z - z).max())
