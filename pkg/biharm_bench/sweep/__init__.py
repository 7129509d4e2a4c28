from .buffer import RecordBuffer
from .config import RunConfig, Tolerances, load_config
from .pool import GridSweep, SweepWorker
from .report import (
    Aggregate,
    PointRecord,
    Provenance,
    ResidualReport,
    Verdict,
    emit_report,
)
from .runner import (
    ScanRow,
    evaluate_point,
    resolve_immersion,
    run_scan,
    run_verify,
    structure_defects,
    write_scan_csv,
)
