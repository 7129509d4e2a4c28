import csv
import json
import logging
from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from biharm_bench import __version__
from biharm_bench.criteria.residuals import CriterionResidual
from biharm_bench.errors import ReportWriteError
from biharm_bench.sweep.config import RunConfig

logger = logging.getLogger(__name__)

STRUCTURE_KEYS = (
    "lagrangian_defect",
    "fit_residual",
    "pnmc_defect",
    "codazzi_residual",
    "tension_consistency",
    "laplace_beltrami_consistency",
    "curvature_contraction",
    "identity_mu_lambda",
    "identity_trace",
    "energy_density",
    "bienergy_density",
)

# Structure defects that get an advisory verdict.
STRUCTURE_VERDICT_KEYS = ("lagrangian_defect", "fit_residual", "pnmc_defect", "codazzi_residual")


class PointRecord(BaseModel):
    # Position in the grid (C order over chart axes).
    index: int
    point: List[float]
    # Criterion name -> residual, for the criteria that applied.
    residuals: Dict[str, CriterionResidual] = Field(default_factory=dict)
    # Structure defects; None where undefined (e.g. PNMC at minimal points).
    structure: Dict[str, Optional[float]] = Field(default_factory=dict)
    # Criterion or structure name -> reason it could not be evaluated.
    errors: Dict[str, str] = Field(default_factory=dict)


class Aggregate(BaseModel):
    max: Optional[float] = None
    mean: Optional[float] = None
    count: int = 0


class Verdict(BaseModel):
    status: Literal["pass", "fail", "no-points"]
    tolerance: float
    max_value: Optional[float] = None
    # Points where the check could not be evaluated.
    failed_points: int = 0


class Provenance(BaseModel):
    engine_version: str
    timestamp: str


class ResidualReport(BaseModel):
    config: RunConfig
    immersion: Dict[str, Any]
    grid: List[int]
    criteria: List[str]
    records: List[PointRecord]
    aggregates: Dict[str, Aggregate]
    verdicts: Dict[str, Verdict]
    # Advisory checks of the structure defects against the geometry tolerance;
    # they do not enter `passed`.
    structure_verdicts: Dict[str, Verdict] = Field(default_factory=dict)
    # Closed-form identities of the family member, when the immersion has one.
    identities: Dict[str, float] = Field(default_factory=dict)
    provenance: Provenance

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.status == "pass" for v in self.verdicts.values())

    @classmethod
    def assemble(
        cls,
        config: RunConfig,
        immersion: Dict[str, Any],
        grid: List[int],
        criteria: List[str],
        records: List[PointRecord],
        identities: Optional[Dict[str, float]] = None,
        timestamp: Optional[str] = None,
    ) -> "ResidualReport":
        records = sorted(records, key=lambda record: record.index)
        aggregates = aggregate_records(records, criteria)
        verdicts = {
            name: criterion_verdict(records, name, config.tolerances.criteria)
            for name in criteria
        }
        if identities:
            worst = max(identities.values())
            verdicts["identities"] = Verdict(
                status="pass" if worst <= config.tolerances.identities else "fail",
                tolerance=config.tolerances.identities,
                max_value=worst,
            )
        structure_verdicts = {
            key: structure_verdict(records, key, config.tolerances.geometry)
            for key in STRUCTURE_VERDICT_KEYS
        }
        return cls(
            config=config,
            immersion=immersion,
            grid=list(grid),
            criteria=list(criteria),
            records=records,
            aggregates=aggregates,
            verdicts=verdicts,
            structure_verdicts=structure_verdicts,
            identities=dict(identities or {}),
            provenance=Provenance(
                engine_version=__version__,
                timestamp=timestamp or datetime.now(timezone.utc).isoformat(),
            ),
        )


def _aggregate(values: List[float]) -> Aggregate:
    if not values:
        return Aggregate()
    return Aggregate(max=max(values), mean=sum(values) / len(values), count=len(values))


def aggregate_records(records: List[PointRecord], criteria: List[str]) -> Dict[str, Aggregate]:
    """
    Max and mean per residual name, accumulated in grid order.
    """
    columns: Dict[str, List[float]] = {}
    for record in records:
        for name in criteria:
            residual = record.residuals.get(name)
            if residual is None:
                continue
            columns.setdefault(f"{name}.tangential", []).append(residual.tangential_norm)
            columns.setdefault(f"{name}.normal", []).append(residual.normal_norm)
            columns.setdefault(f"{name}.relative", []).append(residual.worst)
            for key, value in sorted(residual.per_equation.items()):
                if key in ("tangential", "normal"):
                    continue
                columns.setdefault(f"{name}.{key}", []).append(value)
        for key in STRUCTURE_KEYS:
            value = record.structure.get(key)
            if value is not None:
                columns.setdefault(f"structure.{key}", []).append(value)
    return {key: _aggregate(values) for key, values in sorted(columns.items())}


def criterion_verdict(records: List[PointRecord], name: str, tolerance: float) -> Verdict:
    if not records:
        return Verdict(status="no-points", tolerance=tolerance)
    failed = sum(1 for record in records if name in record.errors)
    values = [record.residuals[name].worst for record in records if name in record.residuals]
    worst = max(values) if values else None
    passed = failed == 0 and worst is not None and worst <= tolerance
    return Verdict(
        status="pass" if passed else "fail",
        tolerance=tolerance,
        max_value=worst,
        failed_points=failed,
    )


def structure_verdict(records: List[PointRecord], key: str, tolerance: float) -> Verdict:
    """
    Undefined values (None) are skipped; a structure error at a point counts
    as a failed point.
    """
    failed = sum(1 for record in records if f"structure.{key}" in record.errors)
    values = [record.structure[key] for record in records if record.structure.get(key) is not None]
    if not values and failed == 0:
        return Verdict(status="no-points", tolerance=tolerance)
    worst = max(values) if values else None
    passed = failed == 0 and worst <= tolerance
    return Verdict(
        status="pass" if passed else "fail",
        tolerance=tolerance,
        max_value=worst,
        failed_points=failed,
    )


def csv_columns(report: ResidualReport) -> List[str]:
    chart_dimension = len(report.grid)
    columns = ["index"] + [f"u{axis}" for axis in range(chart_dimension)]
    for name in report.criteria:
        keys = sorted(
            {
                key
                for record in report.records
                if name in record.residuals
                for key in record.residuals[name].per_equation
            }
            - {"tangential", "normal"}
        )
        columns += [f"{name}.tangential", f"{name}.normal", f"{name}.relative"]
        columns += [f"{name}.{key}" for key in keys]
    columns += list(STRUCTURE_KEYS)
    columns.append("errors")
    return columns


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def csv_rows(report: ResidualReport) -> List[List[str]]:
    columns = csv_columns(report)
    rows = []
    for record in report.records:
        cells = {"index": str(record.index)}
        cells.update({f"u{axis}": _cell(x) for axis, x in enumerate(record.point)})
        for name, residual in record.residuals.items():
            cells[f"{name}.tangential"] = _cell(residual.tangential_norm)
            cells[f"{name}.normal"] = _cell(residual.normal_norm)
            cells[f"{name}.relative"] = _cell(residual.worst)
            for key, value in residual.per_equation.items():
                cells.setdefault(f"{name}.{key}", _cell(value))
        cells.update({key: _cell(record.structure.get(key)) for key in STRUCTURE_KEYS})
        cells["errors"] = "; ".join(f"{k}: {v}" for k, v in sorted(record.errors.items()))
        rows.append([cells.get(column, "") for column in columns])
    return rows


def emit_report(report: ResidualReport, path: str, format: str = "json") -> None:
    """
    Write the report: JSON is the full nested model, CSV one row per point.
    """
    try:
        with open(path, "w", newline="") as f:
            if format == "json":
                f.write(json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True))
                f.write("\n")
            elif format == "csv":
                writer = csv.writer(f)
                writer.writerow(csv_columns(report))
                writer.writerows(csv_rows(report))
            else:
                raise ValueError(f"Unknown report format {format}.")
    except OSError as e:
        raise ReportWriteError(f"Cannot write report to {path}: {e}") from e
    logger.info("Wrote %s report with %d records to %s.", format, len(report.records), path)
