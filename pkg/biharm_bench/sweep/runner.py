import csv
import importlib
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

import wandb
from biharm_bench.criteria import (
    RESIDUAL_FUNCTIONS,
    classification_identities,
    curvature_contraction_residual,
)
from biharm_bench.errors import (
    CatalogError,
    ConsistencyError,
    MinimalPointError,
    ReportWriteError,
    VerificationError,
)
from biharm_bench.family import CATALOG, build_immersion, humbilical_coefficients, mu_roots
from biharm_bench.geometry import (
    HUmbilicalField,
    ImmersionSpec,
    LocalGeometry,
    bienergy_density,
    energy_density,
    lagrangian_defect_of,
    pnmc_defect_of,
)
from biharm_bench.geometry.local import MINIMAL_POINT
from biharm_bench.sweep.config import RunConfig, Tolerances
from biharm_bench.sweep.pool import GridSweep
from biharm_bench.sweep.report import PointRecord, ResidualReport, emit_report

logger = logging.getLogger(__name__)

CUSTOM_CRITERIA = ("split", "kahler", "spaceform")
SCAN_COLUMNS = (
    "m",
    "root_index",
    "mu",
    "lambda",
    "a",
    "res_516",
    "res_53pp",
    "res_lambda",
    "verdict",
)


def resolve_immersion(config: RunConfig) -> Tuple[ImmersionSpec, Tuple[str, ...]]:
    """
    Catalog key, or "package.module:builder" for an immersion defined in user
    code; the builder is called with m and returns an ImmersionSpec.
    """
    if config.immersion in CATALOG:
        immersion = build_immersion(config.immersion, config.m, config.mu_root, config.mu)
        return immersion, CATALOG[config.immersion].default_criteria
    if ":" in config.immersion:
        module_name, builder_name = config.immersion.split(":", 1)
        try:
            builder = getattr(importlib.import_module(module_name), builder_name)
        except (ImportError, AttributeError) as e:
            raise CatalogError(f"Cannot load immersion builder {config.immersion}: {e}") from e
        immersion = builder(config.m)
        assert isinstance(immersion, ImmersionSpec), "Builder must return an ImmersionSpec."
        return immersion, CUSTOM_CRITERIA
    raise CatalogError(
        f"Unknown immersion {config.immersion!r}; known: {', '.join(sorted(CATALOG))}."
    )


def random_gauge(seed: int, index: int, m: int) -> Optional[np.ndarray]:
    """Rotation of e_2..e_m drawn from a per-point generator."""
    if m < 2:
        return None
    rng = np.random.default_rng(seed + index)
    q, r = np.linalg.qr(rng.normal(size=(m - 1, m - 1)))
    return q * np.sign(np.diag(r))


def structure_defects(geometry: LocalGeometry) -> Tuple[Dict[str, Optional[float]], Dict[str, str]]:
    """
    Structure checks and consistency oracles at one point. Undefined values
    (fit of a non-Lagrangian input, PNMC at a minimal point) are None.
    """
    structure: Dict[str, Optional[float]] = {}
    errors: Dict[str, str] = {}
    m = geometry.m
    H = geometry.mean_curvature.value

    structure["lagrangian_defect"] = lagrangian_defect_of(geometry)
    structure["codazzi_residual"] = geometry.codazzi_residual()
    tau = geometry.tension_by_frame()
    structure["tension_consistency"] = float(np.linalg.norm(tau - m * H))
    structure["laplace_beltrami_consistency"] = float(
        np.linalg.norm(geometry.laplace_beltrami_tension() - tau)
    )
    structure["curvature_contraction"] = curvature_contraction_residual(geometry)
    structure["energy_density"] = energy_density(geometry)

    try:
        structure["bienergy_density"] = bienergy_density(geometry)
    except ConsistencyError as e:
        structure["bienergy_density"] = None
        errors["structure.bienergy_density"] = str(e)

    try:
        structure["pnmc_defect"] = pnmc_defect_of(geometry)
    except MinimalPointError:
        structure["pnmc_defect"] = None

    structure["fit_residual"] = None
    structure["identity_mu_lambda"] = None
    structure["identity_trace"] = None
    try:
        field = HUmbilicalField.from_geometry(geometry)
    except VerificationError as e:
        errors["structure.fit_residual"] = str(e)
    else:
        structure["fit_residual"] = field.fit_residual
        if geometry.mean_curvature_norm >= MINIMAL_POINT:
            lam, mu = float(field.lam.value), float(field.mu.value)
            epsilon = geometry.model.epsilon
            structure["identity_mu_lambda"] = abs(mu * mu - lam * mu - epsilon)
            structure["identity_trace"] = abs(lam * lam + (m - 1) * mu * mu - epsilon * (m + 3))
    return structure, errors


def evaluate_point(
    immersion: ImmersionSpec,
    index: int,
    point: Sequence[float],
    criteria: Sequence[str],
    gauge: Optional[np.ndarray] = None,
    geometry_tolerance: float = Tolerances().geometry,
) -> PointRecord:
    """
    Build the local geometry at one grid point and evaluate every selected
    criterion on it. A criterion that does not apply is recorded in the
    record's errors; failing to build the geometry at all propagates.
    """
    geometry = LocalGeometry(immersion, point, frame="auto", gauge=gauge)
    record = PointRecord(index=index, point=[float(x) for x in point])
    for name in criteria:
        try:
            record.residuals[name] = RESIDUAL_FUNCTIONS[name](geometry)
        except VerificationError as e:
            logger.warning("%s not applicable at %s: %s", name, geometry.point, e)
            record.errors[name] = f"{type(e).__name__}: {e}"

    structure, errors = structure_defects(geometry)
    record.structure.update(structure)
    record.errors.update(errors)

    scale = max(1.0, geometry.m * geometry.mean_curvature_norm)
    for key in ("codazzi_residual", "tension_consistency", "laplace_beltrami_consistency"):
        if structure[key] > geometry_tolerance * scale:
            logger.warning("%s = %.3e at %s.", key, structure[key], geometry.point)
    logger.debug("Point %d at %s evaluated.", index, geometry.point)
    return record


def family_identities(immersion: ImmersionSpec) -> Dict[str, float]:
    """Closed-form identities of a family member carrying (mu, lambda)."""
    parameters = immersion.parameters
    if "mu" not in parameters or "lambda" not in parameters:
        return {}
    return classification_identities(
        immersion.chart_dimension,
        float(parameters["lambda"]),
        float(parameters["mu"]),
        immersion.target.epsilon,
    )


def describe_immersion(immersion: ImmersionSpec) -> dict:
    return {
        "name": immersion.name,
        "description": immersion.description,
        "target": immersion.target.describe(),
        "chart_dimension": immersion.chart_dimension,
        "domain": [list(interval) for interval in immersion.domain],
        "periodic": list(immersion.periodic),
        "parameters": {key: value for key, value in immersion.parameters.items()},
    }


def _wandb_summary(report: ResidualReport) -> dict:
    summary = {}
    for key, aggregate in report.aggregates.items():
        if aggregate.max is not None:
            summary[f"{key}/max"] = aggregate.max
            summary[f"{key}/mean"] = aggregate.mean
    for name, verdict in report.verdicts.items():
        summary[f"verdict/{name}"] = int(verdict.status == "pass")
    for key, verdict in report.structure_verdicts.items():
        summary[f"structure/{key}"] = int(verdict.status != "fail")
    summary["passed"] = int(report.passed)
    return summary


def run_verify(config: RunConfig) -> ResidualReport:
    """
    Build the configured immersion, sweep its grid, and assemble (and, when
    an output path is set, write) the residual report.

    Raises:
        CatalogError: unknown immersion.
        PointEvaluationError: the geometry could not be built at a grid point.
    """
    immersion, default_criteria = resolve_immersion(config)
    criteria = list(config.criteria or default_criteria)
    counts = config.grid_counts(immersion.chart_dimension)
    points = immersion.grid(counts)
    m = immersion.chart_dimension

    run = wandb.init(
        project=config.wandb_project,
        name=f"verify {immersion.name} m={m}",
        mode=config.wandb_mode,
        config=config.model_dump(mode="json"),
    )
    logger.info(
        "Verifying %s (m = %d) on a %s grid with criteria %s.",
        immersion.name,
        m,
        "x".join(str(c) for c in counts),
        ", ".join(criteria),
    )

    def evaluate(index: int, point: np.ndarray) -> PointRecord:
        gauge = random_gauge(config.seed, index, m) if config.seed is not None else None
        return evaluate_point(
            immersion, index, point, criteria, gauge, config.tolerances.geometry
        )

    try:
        records = GridSweep(evaluate, points, num_workers=config.workers).run()
        report = ResidualReport.assemble(
            config=config,
            immersion=describe_immersion(immersion),
            grid=counts,
            criteria=criteria,
            records=records,
            identities=family_identities(immersion),
        )
        run.log(_wandb_summary(report))
    finally:
        wandb.finish()

    for name, verdict in report.verdicts.items():
        logger.info(
            "%s: %s (max %s, tolerance %.1e, %d points not evaluated).",
            name,
            verdict.status,
            "n/a" if verdict.max_value is None else f"{verdict.max_value:.3e}",
            verdict.tolerance,
            verdict.failed_points,
        )
    for key, verdict in report.structure_verdicts.items():
        if verdict.status == "fail":
            logger.warning(
                "Structure check %s failed (max %s, tolerance %.1e); advisory only.",
                key,
                "n/a" if verdict.max_value is None else f"{verdict.max_value:.3e}",
                verdict.tolerance,
            )
    if config.out is not None:
        emit_report(report, config.out, config.format)
    return report


class ScanRow(BaseModel):
    m: int
    root_index: int
    mu: float
    lam: float
    a: float
    res_516: float
    res_53pp: float
    res_lambda: float
    verdict: str

    def cells(self) -> List[str]:
        numbers = [self.mu, self.lam, self.a, self.res_516, self.res_53pp, self.res_lambda]
        return [str(self.m), str(self.root_index)] + [repr(x) for x in numbers] + [self.verdict]


def run_scan(
    m_values: Sequence[int],
    verify: bool = False,
    tolerances: Optional[Tolerances] = None,
    grid: Optional[List[int]] = None,
    workers: int = 1,
    out: Optional[str] = None,
) -> List[ScanRow]:
    """
    Closed-form scan of the family over m and the four mu roots. With verify,
    every member also runs the full grid verification and the verdict needs
    both to pass.
    """
    tolerances = tolerances or Tolerances()
    rows = []
    for m in m_values:
        if m < 2:
            raise CatalogError(f"The family needs m >= 2, got {m}.")
        for root_index, mu in enumerate(mu_roots(m).roots):
            lam, mu, a = humbilical_coefficients(m, mu)
            identities = classification_identities(m, lam, mu, 1.0)
            passed = max(identities.values()) <= tolerances.identities
            if verify:
                config = RunConfig(
                    immersion="chen",
                    m=m,
                    mu_root=root_index,
                    grid=grid,
                    tolerances=tolerances,
                    workers=workers,
                )
                passed = passed and run_verify(config).passed
            rows.append(
                ScanRow(
                    m=m,
                    root_index=root_index,
                    mu=mu,
                    lam=lam,
                    a=a,
                    res_516=identities["mu_lambda_relation"],
                    res_53pp=identities["trace_relation"],
                    res_lambda=identities["lambda_formula"],
                    verdict="pass" if passed else "fail",
                )
            )
            logger.info("m = %d, root %d: mu = %.12f, %s.", m, root_index, mu, rows[-1].verdict)
    if out is not None:
        write_scan_csv(rows, out)
    return rows


def write_scan_csv(rows: Sequence[ScanRow], path: str) -> None:
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(SCAN_COLUMNS)
            writer.writerows(row.cells() for row in rows)
    except OSError as e:
        raise ReportWriteError(f"Cannot write scan table to {path}: {e}") from e
    logger.info("Wrote %d scan rows to %s.", len(rows), path)

