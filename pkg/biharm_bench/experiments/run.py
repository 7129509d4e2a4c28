import logging
import random
import sys
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from biharm_bench.errors import VerificationError
from biharm_bench.experiments.utils import get_cmd_line_parser
from biharm_bench.family import (
    chen_curve_map,
    closed_form_deviation,
    export_curve_csv,
    generic_legendre_curve,
    integrated_chen_curve,
    legendre_diagnostics,
    list_catalog,
    resolve_mu,
)
from biharm_bench.sweep import Tolerances, load_config, run_scan, run_verify

# Set random seed for reproducibility.
SEED = 42

logger = logging.getLogger(__name__)


def verify(args: Dict[str, Any]) -> int:
    config = load_config(args["config"], args["overrides"])
    report = run_verify(config)
    logger.info("Verification %s.", "passed" if report.passed else "failed")
    return 0 if report.passed else 1


def scan(args: Dict[str, Any]) -> int:
    tolerances = Tolerances(**{k: v for k, v in args["tolerances"].items() if v is not None})
    rows = run_scan(
        range(args["m_min"], args["m_max"] + 1),
        verify=args["verify"],
        tolerances=tolerances,
        grid=args["grid"],
        workers=args["workers"] or 1,
        out=args["out"],
    )
    if args["out"] is None:
        for row in rows:
            print(",".join(row.cells()))
    return 0 if all(row.verdict == "pass" for row in rows) else 1


def legendre(args: Dict[str, Any]) -> int:
    if args["profile"] == "chen":
        mu = resolve_mu(args["m"], args["mu_root"], args["mu"])
        curve = integrated_chen_curve(mu, step=args["step"])
        logger.info(
            "Closed-form deviation %.3e (mu = %.12f).",
            closed_form_deviation(curve, chen_curve_map(mu)),
            mu,
        )
    else:
        curve = generic_legendre_curve(step=args["step"])
    diagnostics = legendre_diagnostics(curve)
    for key, values in diagnostics.items():
        logger.info("%s: max |.| = %.3e", key, float(np.abs(values).max()))
    if args["out"] is not None:
        export_curve_csv(curve, args["out"])
    return 0


def catalog(args: Dict[str, Any]) -> int:
    for name, description in list_catalog().items():
        print(f"{name:28s} {description}")
    return 0


COMMANDS = {
    "verify": verify,
    "scan": scan,
    "legendre": legendre,
    "catalog": catalog,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = get_cmd_line_parser(argv)

    # Set logging level to DEBUG to see per point evaluations.
    logging.basicConfig(
        level=logging.DEBUG if args["verbose"] else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    random.seed(SEED)
    np.random.seed(SEED)

    try:
        return COMMANDS[args["command"]](args)
    except (VerificationError, ValidationError, ValueError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
